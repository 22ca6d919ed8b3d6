//! Pure-loss channel on mode `b`, kept as an explicit sum of Kraus branches.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::state::{parity_b, parity_deficit_b, TwoModeState};

/// Binomial weights `C(k, l) (1−t)^l t^{k−l}` for `l = 0..=k`.
pub(crate) fn binomial_pmf(k: usize, t: f64) -> Vec<f64> {
    if t == 1.0 {
        let mut v = vec![0.0; k + 1];
        v[0] = 1.0;
        return v;
    }
    let ln_t = t.ln();
    let ratio = ((1.0 - t) / t).ln();
    let mut ln_p = k as f64 * ln_t;
    let mut out = Vec::with_capacity(k + 1);
    for l in 0..=k {
        out.push(ln_p.exp());
        if l < k {
            ln_p += ((k - l) as f64 / (l + 1) as f64).ln() + ratio;
        }
    }
    out
}

/// The mixed state `Σ_l K_l ρ K_l†`, one pure (unnormalized) branch per number of lost photons.
#[derive(Debug, Clone)]
pub struct KrausMixture {
    branches: Vec<TwoModeState>,
}

impl KrausMixture {
    pub fn branches(&self) -> &[TwoModeState] {
        &self.branches
    }

    pub fn trace(&self) -> f64 {
        self.branches.iter().map(|b| b.norm_sqr()).sum()
    }

    /// Apply the same unitary step to every branch.
    pub fn map<F>(&self, f: F) -> Result<Self>
    where
        F: Fn(&TwoModeState) -> Result<TwoModeState>,
    {
        Ok(Self {
            branches: self.branches.iter().map(f).collect::<Result<_>>()?,
        })
    }

    pub fn parity_b(&self) -> f64 {
        self.branches.iter().map(parity_b).sum()
    }

    pub fn parity_deficit_b(&self) -> f64 {
        self.branches.iter().map(parity_deficit_b).sum()
    }

    pub fn mean_b(&self) -> f64 {
        self.branches
            .iter()
            .flat_map(|b| b.marginal_b().into_iter().enumerate())
            .map(|(n, p)| n as f64 * p)
            .sum()
    }
}

/// Mode-`b` loss of transmissivity `t`: branch `l` maps `|n_a, k⟩` to
/// `√(C(k,l)(1−t)^l t^{k−l}) |n_a, k−l⟩`.
pub fn apply_loss_channel(state: &TwoModeState, t: f64) -> Result<KrausMixture> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("transmissivity must lie in (0, 1], got {t}")));
    }
    let n_max = state.n_max();
    let pmf: Vec<Vec<f64>> = (0..=n_max).map(|k| binomial_pmf(k, t)).collect();
    let lost_max = if t == 1.0 { 0 } else { n_max };
    let src = state.amps();
    let mut branches = Vec::with_capacity(lost_max + 1);
    for l in 0..=lost_max {
        let mut branch = TwoModeState::vacuum(n_max);
        let dst = branch.amps_mut();
        dst[(0, 0)] = Complex64::new(0.0, 0.0);
        for na in 0..=n_max {
            for k in l..=(n_max - na) {
                dst[(na, k - l)] = src[(na, k)] * pmf[k][l].sqrt();
            }
        }
        branches.push(branch);
    }
    Ok(KrausMixture { branches })
}

/// `C_Q(γ) = 4 Var(n − γ l)` for the Kraus family `K_l e^{iφ(b†b − γ l)}`, where
/// `n` is the photon number of mode `b` in `state` and `l` the number lost.
pub fn kraus_fisher_bound(state: &TwoModeState, t: f64, gamma: f64) -> Result<f64> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("transmissivity must lie in (0, 1], got {t}")));
    }
    let marginal = state.marginal_b();
    let joint: Vec<(f64, f64)> = marginal
        .iter()
        .enumerate()
        .flat_map(|(n, &p)| {
            binomial_pmf(n, t)
                .into_iter()
                .enumerate()
                .map(move |(l, w)| (n as f64 - gamma * l as f64, p * w))
        })
        .collect();
    let total: f64 = joint.iter().map(|(_, w)| w).sum();
    let mean = joint.iter().map(|(x, w)| x * w).sum::<f64>() / total;
    let var = joint.iter().map(|(x, w)| (x - mean).powi(2) * w).sum::<f64>() / total;
    Ok(4.0 * var)
}

/// Minimum of `C_Q(γ)` over real `γ`. `C_Q` is quadratic in `γ`, so three
/// evaluations determine it.
pub fn kraus_fisher_minimum(state: &TwoModeState, t: f64) -> Result<f64> {
    let lo = kraus_fisher_bound(state, t, -1.0)?;
    let mid = kraus_fisher_bound(state, t, 0.0)?;
    let hi = kraus_fisher_bound(state, t, 1.0)?;
    let a = (hi + lo) / 2.0 - mid;
    let b = (hi - lo) / 2.0;
    if a <= 0.0 {
        return Ok(mid);
    }
    Ok((mid - b * b / (4.0 * a)).max(0.0))
}
