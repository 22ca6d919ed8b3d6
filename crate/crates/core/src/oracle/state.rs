//! Truncated Fock-basis states and the measurements taken on them.

use ndarray::Array2;
use num_complex::Complex64;

use crate::catalysis::SystemParams;
use crate::error::{Error, Result};
use crate::oracle::transform::ModeTransform;

/// Largest tail mass a state may drop and still be used for certified comparisons.
pub const CERTIFIED_TAIL: f64 = 1e-12;
/// Mass allowed beyond the working range used during preparation.
const WORKING_TAIL: f64 = 1e-20;
const MAX_WORKING_PHOTONS: usize = 4000;

fn zero() -> Complex64 {
    Complex64::new(0.0, 0.0)
}

/// Single-mode state truncated at `n_max` photons. Amplitudes are those of the
/// exact normalized state; `norm_tail` is the probability mass beyond `n_max`.
#[derive(Debug, Clone)]
pub struct SingleModeState {
    n_max: usize,
    amps: Vec<Complex64>,
    norm_tail: f64,
}

impl SingleModeState {
    pub fn vacuum(n_max: usize) -> Self {
        let mut amps = vec![zero(); n_max + 1];
        amps[0] = Complex64::new(1.0, 0.0);
        Self { n_max, amps, norm_tail: 0.0 }
    }

    pub fn fock(n: usize, n_max: usize) -> Result<Self> {
        if n > n_max {
            return Err(Error::Truncation { tail: 1.0, n_max });
        }
        let mut amps = vec![zero(); n_max + 1];
        amps[n] = Complex64::new(1.0, 0.0);
        Ok(Self { n_max, amps, norm_tail: 0.0 })
    }

    /// Truncate a long amplitude vector at `n_max`, keeping the dropped mass.
    fn from_working(mut full: Vec<Complex64>, extra_tail: f64, n_max: usize) -> Self {
        let tail: f64 = full.iter().skip(n_max + 1).map(|z| z.norm_sqr()).sum::<f64>() + extra_tail;
        full.resize(n_max + 1, zero());
        Self {
            n_max,
            amps: full,
            norm_tail: tail,
        }
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_tail(&self) -> f64 {
        self.norm_tail
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn certify(self) -> Result<Self> {
        if self.norm_tail >= CERTIFIED_TAIL {
            return Err(Error::Truncation {
                tail: self.norm_tail,
                n_max: self.n_max,
            });
        }
        Ok(self)
    }

    pub fn mean_photons(&self) -> f64 {
        self.amps.iter().enumerate().map(|(n, z)| n as f64 * z.norm_sqr()).sum()
    }

    pub fn parity(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(n, z)| if n % 2 == 0 { z.norm_sqr() } else { -z.norm_sqr() })
            .sum()
    }

    /// Largest magnitude on odd photon numbers.
    pub fn max_odd_amplitude(&self) -> f64 {
        self.amps.iter().skip(1).step_by(2).map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `|⟨self|other⟩|²` over the common truncation.
    pub fn fidelity(&self, other: &SingleModeState) -> f64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm_sqr()
    }
}

/// Squeezed-vacuum amplitudes `c_{2k}` until the remaining mass is below `tail`.
fn svs_working(r: f64, min_len: usize, tail: f64) -> Result<Vec<Complex64>> {
    if !(r.is_finite() && r >= 0.0) {
        return Err(Error::domain(format!("squeezing must be finite and >= 0, got {r}")));
    }
    let th = r.tanh();
    let bound = r.cosh().powi(2);
    let mut amps = vec![Complex64::new(1.0 / r.cosh().sqrt(), 0.0)];
    let mut c = amps[0].re;
    loop {
        let n = amps.len() + 1;
        // geometric bound on the mass beyond the last even entry
        if amps.len() > min_len && c * c * bound < tail {
            break;
        }
        if n > MAX_WORKING_PHOTONS {
            return Err(Error::Truncation {
                tail: c * c * bound,
                n_max: MAX_WORKING_PHOTONS,
            });
        }
        c *= -th * ((n * (n - 1)) as f64).sqrt() / n as f64;
        amps.push(zero());
        amps.push(Complex64::new(c, 0.0));
    }
    Ok(amps)
}

/// `S(r)|0⟩` truncated at `n_max`, certified.
pub fn squeezed_vacuum(r: f64, n_max: usize) -> Result<SingleModeState> {
    squeezed_vacuum_uncertified(r, n_max)?.certify()
}

pub fn squeezed_vacuum_uncertified(r: f64, n_max: usize) -> Result<SingleModeState> {
    let full = svs_working(r, n_max, WORKING_TAIL)?;
    Ok(SingleModeState::from_working(full, WORKING_TAIL, n_max))
}

/// Coherent state `|α⟩` with real amplitude, certified.
pub fn coherent_state(alpha: f64, n_max: usize) -> Result<SingleModeState> {
    coherent_state_uncertified(alpha, n_max)?.certify()
}

pub fn coherent_state_uncertified(alpha: f64, n_max: usize) -> Result<SingleModeState> {
    if !alpha.is_finite() {
        return Err(Error::domain("coherent amplitude must be finite"));
    }
    let mut full = vec![Complex64::new((-alpha * alpha / 2.0).exp(), 0.0)];
    let mut c = full[0].re;
    let mut n = 0usize;
    loop {
        n += 1;
        c *= alpha / (n as f64).sqrt();
        full.push(Complex64::new(c, 0.0));
        // beyond n > α² the terms decay at least geometrically with ratio α²/(n+1)
        let ratio = alpha * alpha / (n + 1) as f64;
        if n >= n_max && ratio < 0.5 && c * c / (1.0 - ratio) < WORKING_TAIL {
            break;
        }
        if n > MAX_WORKING_PHOTONS {
            return Err(Error::Truncation { tail: c * c, n_max });
        }
    }
    Ok(SingleModeState::from_working(full, WORKING_TAIL, n_max))
}

/// `⟨n, m|B(η)|n, m⟩` for `n = 0..len`, keeping the columns `B|n, s⟩`, `s ≤ m`,
/// of one row at a time.
pub(crate) fn catalysis_diagonal(eta: f64, m: usize, len: usize) -> Vec<f64> {
    let bs = ModeTransform::beam_splitter(eta);
    let mut row: Vec<Vec<Complex64>> = Vec::new();
    let mut out = Vec::with_capacity(len);
    for n in 0..len {
        let mut next: Vec<Vec<Complex64>> = Vec::with_capacity(m + 1);
        for s in 0..=m {
            let left = row.get(s).map(|v| v.as_slice());
            let down = next.last().map(|v| v.as_slice());
            let col = bs.next_column(n, s, left, down);
            next.push(col);
        }
        out.push(next[m][n].re);
        row = next;
    }
    out
}

/// Prepare the catalyzed state by mixing `S(r)|0⟩` with `|m⟩` on `B(η)` and
/// projecting the ancilla onto `|m⟩`. Returns the normalized state and the
/// heralding probability.
pub fn prepare_pcsvs(p: &SystemParams, n_max: usize) -> Result<(SingleModeState, f64)> {
    let (state, prob) = prepare_pcsvs_uncertified(p, n_max)?;
    Ok((state.certify()?, prob))
}

pub fn prepare_pcsvs_uncertified(p: &SystemParams, n_max: usize) -> Result<(SingleModeState, f64)> {
    p.validate()?;
    let svs = svs_working(p.r, n_max, WORKING_TAIL * 1e-4)?;
    let diag = catalysis_diagonal(p.eta, p.m as usize, svs.len());
    let raw: Vec<Complex64> = svs.iter().zip(&diag).map(|(c, d)| c * d).collect();
    let prob: f64 = raw.iter().map(|z| z.norm_sqr()).sum();
    if !(prob > 0.0) {
        return Err(Error::consistency("catalysis success probability vanished"));
    }
    let scale = prob.sqrt();
    let normalized = raw.into_iter().map(|z| z / scale).collect();
    Ok((SingleModeState::from_working(normalized, WORKING_TAIL * 1e-4 / prob, n_max), prob))
}

/// Two-mode state on the triangle `n_a + n_b ≤ n_max`. Entry `(n_a, n_b)`.
#[derive(Debug, Clone)]
pub struct TwoModeState {
    n_max: usize,
    amps: Array2<Complex64>,
    norm_tail: f64,
}

impl TwoModeState {
    pub fn vacuum(n_max: usize) -> Self {
        let mut amps = Array2::from_elem((n_max + 1, n_max + 1), zero());
        amps[(0, 0)] = Complex64::new(1.0, 0.0);
        Self { n_max, amps, norm_tail: 0.0 }
    }

    /// Build from a full grid. Mass outside the triangle is an overflow error.
    pub fn from_amps(amps: Array2<Complex64>, norm_tail: f64) -> Result<Self> {
        let (rows, cols) = amps.dim();
        if rows != cols || rows == 0 {
            return Err(Error::domain("two-mode amplitude grid must be square and non-empty"));
        }
        let n_max = rows - 1;
        let overflow: f64 = amps
            .indexed_iter()
            .filter(|((a, b), _)| a + b > n_max)
            .map(|(_, z)| z.norm_sqr())
            .sum();
        if overflow > 0.0 {
            return Err(Error::Truncation { tail: overflow, n_max });
        }
        Ok(Self { n_max, amps, norm_tail })
    }

    /// `|a⟩ ⊗ |b⟩` restricted to the triangle.
    pub fn product(a: &SingleModeState, b: &SingleModeState) -> Result<Self> {
        if a.n_max != b.n_max {
            return Err(Error::domain("product of states with different truncation"));
        }
        let n_max = a.n_max;
        let mut amps = Array2::from_elem((n_max + 1, n_max + 1), zero());
        // mass of b beyond each cutoff k: Σ_{n > k} |b_n|² (+ b's own tail)
        let mut b_suffix = vec![b.norm_tail; n_max + 2];
        for k in (0..=n_max).rev() {
            b_suffix[k] = b_suffix[k + 1] + b.amps[k].norm_sqr();
        }
        let mut tail = a.norm_tail;
        for na in 0..=n_max {
            for nb in 0..=(n_max - na) {
                amps[(na, nb)] = a.amps[na] * b.amps[nb];
            }
            tail += a.amps[na].norm_sqr() * b_suffix[n_max - na + 1];
        }
        Ok(Self { n_max, amps, norm_tail: tail })
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn amps(&self) -> &Array2<Complex64> {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut Array2<Complex64> {
        &mut self.amps
    }

    pub fn norm_tail(&self) -> f64 {
        self.norm_tail
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn certify(self) -> Result<Self> {
        if self.norm_tail >= CERTIFIED_TAIL {
            return Err(Error::Truncation {
                tail: self.norm_tail,
                n_max: self.n_max,
            });
        }
        Ok(self)
    }

    /// Photon-number distribution of mode `b`.
    pub fn marginal_b(&self) -> Vec<f64> {
        let mut p = vec![0.0; self.n_max + 1];
        for ((_, nb), z) in self.amps.indexed_iter() {
            p[nb] += z.norm_sqr();
        }
        p
    }

    /// `e^{iφ b†b}`.
    pub fn apply_phase_b(&mut self, phi: f64) {
        let phases: Vec<Complex64> = (0..=self.n_max).map(|n| Complex64::from_polar(1.0, phi * n as f64)).collect();
        for ((_, nb), z) in self.amps.indexed_iter_mut() {
            *z *= phases[nb];
        }
    }

    pub fn inner(&self, other: &TwoModeState) -> Complex64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }
}

/// `Σ (−1)^{n_b} |amp|²`.
pub fn parity_b(state: &TwoModeState) -> f64 {
    parity_weighted(&state.marginal_b(), -1.0)
}

/// `2 Σ_{odd n_b} |amp|²`, i.e. `1 − ⟨Π_b⟩` for a normalized state, without cancellation.
pub fn parity_deficit_b(state: &TwoModeState) -> f64 {
    2.0 * state.marginal_b().iter().skip(1).step_by(2).sum::<f64>()
}

/// `⟨(1 − 2T₁)^{b†b}⟩` with `0⁰ = 1`.
pub fn parity_after_external_loss(state: &TwoModeState, t1: f64) -> f64 {
    parity_weighted(&state.marginal_b(), 1.0 - 2.0 * t1)
}

fn parity_weighted(marginal: &[f64], base: f64) -> f64 {
    let mut w = 1.0;
    let mut acc = 0.0;
    for &p in marginal {
        acc += w * p;
        w *= base;
    }
    acc
}

/// Mean and variance of `b†b`, the variance by a second centered pass.
pub fn number_moments_b(state: &TwoModeState) -> (f64, f64) {
    let marginal = state.marginal_b();
    let total: f64 = marginal.iter().sum();
    let mean = marginal.iter().enumerate().map(|(n, p)| n as f64 * p).sum::<f64>() / total;
    let var = marginal
        .iter()
        .enumerate()
        .map(|(n, p)| (n as f64 - mean).powi(2) * p)
        .sum::<f64>()
        / total;
    (mean, var)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn vacuum_squeezing() {
        let s = squeezed_vacuum(0.0, 10).unwrap();
        assert_eq!(s.amps()[0], Complex64::new(1.0, 0.0));
        assert_eq!(s.norm_tail(), WORKING_TAIL);
    }

    #[test]
    fn squeezed_vacuum_moments() {
        let s = squeezed_vacuum(0.9, 100).unwrap();
        assert_abs_diff_eq!(s.mean_photons(), 0.9f64.sinh().powi(2), epsilon = 1e-10);
        assert_abs_diff_eq!(s.parity(), 1.0, epsilon = 1e-12);
        assert_eq!(s.max_odd_amplitude(), 0.0);
    }

    #[test]
    fn squeezed_vacuum_at_60_is_not_certified_for_strong_squeezing() {
        let err = squeezed_vacuum(0.9, 60).unwrap_err();
        assert!(matches!(err, Error::Truncation { .. }));
        let s = squeezed_vacuum_uncertified(0.9, 60).unwrap();
        assert_abs_diff_eq!(s.mean_photons(), 0.9f64.sinh().powi(2), epsilon = 1e-7);
        assert!(squeezed_vacuum(0.6, 60).is_ok());
    }

    #[test]
    fn coherent_state_moments() {
        let c = coherent_state(1.0, 40).unwrap();
        assert_abs_diff_eq!(c.norm_sqr(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c.mean_photons(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn catalysis_diagonal_limits() {
        let d = catalysis_diagonal(1.0, 3, 6);
        assert!(d.iter().all(|&x| (x - 1.0).abs() < 1e-15));
        // vacuum input through B(η) with m photons: amplitude η^{m/2}
        let d = catalysis_diagonal(0.3, 2, 1);
        assert_abs_diff_eq!(d[0], 0.3, epsilon = 1e-15);
        // |1,1⟩ → (2η − 1)|1,1⟩ + ...
        let d = catalysis_diagonal(0.3, 1, 2);
        assert_abs_diff_eq!(d[1], 2.0 * 0.3 - 1.0, epsilon = 1e-15);
    }

    #[test]
    fn catalysis_diagonal_matches_block_unitary() {
        let blocks = crate::oracle::transform::BlockUnitary::new(&ModeTransform::beam_splitter(0.2), 160);
        let d = catalysis_diagonal(0.2, 3, 158);
        for (n, x) in d.iter().enumerate() {
            assert_abs_diff_eq!(*x, blocks.block(n + 3)[(n, n)].re, epsilon = 1e-12);
        }
    }

    #[test]
    fn two_mode_measurements() {
        let vac = TwoModeState::vacuum(4);
        assert_eq!(parity_b(&vac), 1.0);
        let mut amps = Array2::from_elem((5, 5), zero());
        amps[(0, 1)] = Complex64::new(1.0, 0.0);
        let one = TwoModeState::from_amps(amps, 0.0).unwrap();
        assert_eq!(parity_b(&one), -1.0);
        assert_eq!(parity_deficit_b(&one), 2.0);
        assert_eq!(parity_after_external_loss(&one, 1.0), -1.0);
        assert_eq!(parity_after_external_loss(&one, 0.5), 0.0);
        assert_eq!(parity_after_external_loss(&vac, 0.5), 1.0);
        let mut amps = Array2::from_elem((3, 3), zero());
        amps[(2, 2)] = Complex64::new(1.0, 0.0);
        assert!(matches!(TwoModeState::from_amps(amps, 0.0), Err(Error::Truncation { .. })));
    }

    #[test]
    fn product_tail_accounts_for_triangle() {
        let a = coherent_state_uncertified(1.0, 8).unwrap();
        let b = squeezed_vacuum_uncertified(0.5, 8).unwrap();
        let s = TwoModeState::product(&a, &b).unwrap();
        assert_abs_diff_eq!(s.norm_sqr() + s.norm_tail(), 1.0, epsilon = 1e-14);
    }
}
