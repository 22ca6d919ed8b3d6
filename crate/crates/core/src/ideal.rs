//! Lossless interferometer: parity signal, error-propagation phase
//! sensitivity, quantum Fisher information and the SQL/HL benchmarks.

use serde::Serialize;

use crate::catalysis::{CatalysisKernel, SystemParams};
use crate::error::{Error, Result};
use crate::series::BiSeries;

/// Smallest |φ| accepted by the sensitivity routines.
pub const MIN_PHASE: f64 = 1e-8;
/// Base step of the Richardson differentiation, scaled by `max(1, |φ|)`.
pub const RICHARDSON_BASE_STEP: f64 = 1e-6;
/// Below this slope magnitude the signal is treated as stationary.
pub const MIN_SLOPE: f64 = 1e-14;
/// Allowed overshoot of |⟨Π⟩| past one before it is reported as inconsistent.
pub const PARITY_TOLERANCE: f64 = 1e-9;
/// Allowed negative excursion of the QFI.
pub const QFI_TOLERANCE: f64 = 1e-9;
/// QFI values at or below this carry no usable phase information.
pub const QFI_FLOOR: f64 = 1e-12;

/// Central differences at `h`, `h/2`, `h/4` combined by two Richardson levels.
pub fn richardson_derivative<F>(f: F, x: f64, h0: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let central = |h: f64| -> Result<f64> { Ok((f(x + h)? - f(x - h)?) / (2.0 * h)) };
    let d0 = central(h0)?;
    let d1 = central(h0 / 2.0)?;
    let d2 = central(h0 / 4.0)?;
    let r1 = (4.0 * d1 - d0) / 3.0;
    let r2 = (4.0 * d2 - d1) / 3.0;
    Ok((16.0 * r2 - r1) / 15.0)
}

pub fn derivative_step(phi: f64) -> f64 {
    RICHARDSON_BASE_STEP * phi.abs().max(1.0)
}

pub(crate) fn check_phase(phi: f64) -> Result<()> {
    if !phi.is_finite() {
        return Err(Error::domain(format!("phase must be finite, got {phi}")));
    }
    if phi.abs() < MIN_PHASE {
        return Err(Error::degenerate(format!(
            "|phi| = {:e} is below {MIN_PHASE:e}; the parity signal is stationary at phi = 0, \
             evaluate at a small offset such as phi = 1e-4 instead",
            phi.abs()
        )));
    }
    Ok(())
}

pub(crate) fn check_parity(value: f64) -> Result<f64> {
    if !value.is_finite() || value.abs() > 1.0 + PARITY_TOLERANCE {
        return Err(Error::consistency(format!("parity expectation {value} outside [-1, 1]")));
    }
    Ok(value)
}

/// Value, slope and error-propagation sensitivity of a parity signal at one phase.
#[derive(Debug, Clone, Copy)]
pub struct SensitivityEstimate {
    pub parity: f64,
    pub slope: f64,
    pub sensitivity: f64,
}

/// Error propagation from the parity deficit `d(φ) = 1 − ⟨Π⟩(φ)`.
///
/// Working with the deficit keeps the variance `1 − ⟨Π⟩² = d(2 − d)` and the
/// slope accurate when ⟨Π⟩ is close to one (small φ).
pub fn sensitivity_from_deficit<F>(deficit: F, phi: f64) -> Result<SensitivityEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    check_phase(phi)?;
    let d = deficit(phi)?;
    let parity = check_parity(1.0 - d)?;
    let slope = -richardson_derivative(&deficit, phi, derivative_step(phi))?;
    finish_estimate(parity, (d * (2.0 - d)).max(0.0), slope, phi)
}

/// Error propagation directly from a parity signal.
pub fn sensitivity_from_signal<F>(signal: F, phi: f64) -> Result<SensitivityEstimate>
where
    F: Fn(f64) -> Result<f64>,
{
    check_phase(phi)?;
    let parity = check_parity(signal(phi)?)?;
    let slope = richardson_derivative(&signal, phi, derivative_step(phi))?;
    finish_estimate(parity, (1.0 - parity * parity).max(0.0), slope, phi)
}

fn finish_estimate(parity: f64, variance: f64, slope: f64, phi: f64) -> Result<SensitivityEstimate> {
    if !slope.is_finite() || slope.abs() < MIN_SLOPE {
        return Err(Error::degenerate(format!(
            "parity slope {slope:e} at phi = {phi} is too small (stationary signal)"
        )));
    }
    Ok(SensitivityEstimate {
        parity,
        slope,
        sensitivity: variance.sqrt() / slope.abs(),
    })
}

/// Closed-form parity signal for fixed input parameters, reusable across phases.
#[derive(Debug, Clone)]
pub struct ParitySignal {
    kernel: CatalysisKernel,
    alpha2: f64,
    q: BiSeries,
    one_minus_q: BiSeries,
    w_sum: BiSeries,
    base: BiSeries,
}

impl ParitySignal {
    pub fn new(p: &SystemParams) -> Result<Self> {
        Self::from_kernel(CatalysisKernel::build(p)?, p.alpha)
    }

    pub fn from_kernel(kernel: CatalysisKernel, alpha: f64) -> Result<Self> {
        let q = kernel.coupling();
        let one_minus_q = 1.0 - &q;
        let w_sum = kernel.w() + kernel.w1();
        let base = kernel.coupling_power(-0.5)?;
        Ok(Self {
            kernel,
            alpha2: alpha * alpha,
            q,
            one_minus_q,
            w_sum,
            base,
        })
    }

    pub fn kernel(&self) -> &CatalysisKernel {
        &self.kernel
    }

    /// `1 − ⟨Π_b⟩(φ)`.
    ///
    /// With `Q = 4W₁W` and `u = Q sin²φ / (1 − Q)` the projected integrand is
    /// `ε (1 − Q)^{−1/2} exp(L)` where `L = α² E − ½ ln(1 + u)` and
    /// `E = (−(1 − Q)(1 − cos φ) + (W + W₁ − Q) sin²φ) / (1 − Q cos²φ)`.
    /// Since `D̂[ε (1 − Q)^{−1/2}] = 1`, the deficit is `−D̂[ε (1 − Q)^{−1/2} expm1(L)]`
    /// with no cancellation at small φ.
    pub fn deficit(&self, phi: f64) -> Result<f64> {
        let (s, c) = phi.sin_cos();
        let s2 = s * s;
        let half = (0.5 * phi).sin();
        let vers = 2.0 * half * half;

        let u = (&self.q * &self.one_minus_q.recip()?).scale(s2);
        let den = 1.0 - &self.q.scale(c * c);
        let numer = &self.one_minus_q.scale(-vers) + &(&self.w_sum - &self.q).scale(s2);
        let e = &numer * &den.recip()?;
        let l = &e.scale(self.alpha2) - &u.ln1p()?.scale(0.5);
        let integrand = &self.base * &l.expm1()?;
        Ok(-self.kernel.dhat(&integrand)?)
    }

    pub fn value(&self, phi: f64) -> Result<f64> {
        check_parity(1.0 - self.deficit(phi)?)
    }

    /// The integrand of ⟨Π_b⟩ in its direct form, before projection.
    pub fn integrand(&self, phi: f64) -> Result<BiSeries> {
        let (s, c) = phi.sin_cos();
        let s2 = s * s;
        let den = 1.0 - &self.q.scale(c * c);
        let den_inv = den.recip()?;
        let first = &(&self.one_minus_q.scale(c - 1.0) - &self.q.scale(s2)) * &den_inv;
        let second = &self.w_sum.scale(s2) * &den_inv;
        let exponent = (&first + &second).scale(self.alpha2);
        Ok(&(self.kernel.eps() * &den.pow_real(-0.5)?) * &exponent.exp()?)
    }

    pub fn sensitivity(&self, phi: f64) -> Result<SensitivityEstimate> {
        sensitivity_from_deficit(|x| self.deficit(x), phi)
    }
}

/// ⟨Π_b⟩(φ) for the catalyzed input.
pub fn parity_expectation(p: &SystemParams, phi: f64) -> Result<f64> {
    if !phi.is_finite() {
        return Err(Error::domain("phase must be finite"));
    }
    ParitySignal::new(p)?.value(phi)
}

/// `1 − ⟨Π_b⟩(φ)`.
pub fn parity_deficit(p: &SystemParams, phi: f64) -> Result<f64> {
    ParitySignal::new(p)?.deficit(phi)
}

/// Parity signal for a coherent state mixed with a plain squeezed vacuum.
pub fn parity_svs_closed_form(alpha: f64, r: f64, phi: f64) -> f64 {
    let s2 = phi.sin().powi(2);
    let k = 1.0 + r.sinh().powi(2) * s2;
    let a2 = alpha * alpha;
    let exponent = 2.0 * (phi.cos() - 1.0 - r.sinh().powi(2) * s2) * a2 / (2.0 * k)
        - (2.0 * r).sinh() * s2 * a2 / (2.0 * k);
    exponent.exp() / k.sqrt()
}

/// Δφ = √(1 − ⟨Π⟩²) / |∂⟨Π⟩/∂φ|.
pub fn phase_sensitivity(p: &SystemParams, phi: f64) -> Result<f64> {
    check_phase(phi)?;
    Ok(ParitySignal::new(p)?.sensitivity(phi)?.sensitivity)
}

/// QFI of the state before the second beam splitter, from the closed form
/// `D̂[ε(1−Q)^{−3/2}(4α²(1−W) + 3Q/(1−Q))] + α⁴ − 2α² − N̄²`.
pub fn qfi_from_kernel(kernel: &CatalysisKernel, alpha: f64) -> Result<f64> {
    let a2 = alpha * alpha;
    let q = kernel.coupling();
    let one_minus_q = 1.0 - &q;
    let bracket = &(1.0 - kernel.w()).scale(4.0 * a2) + &(&q.scale(3.0) * &one_minus_q.recip()?);
    let projected = kernel.dhat(&(&kernel.coupling_power(-1.5)? * &bracket))?;
    let nbar = a2 + kernel.mean_photon_b()?;
    let f = projected + a2 * a2 - 2.0 * a2 - nbar * nbar;
    if !f.is_finite() || f < -QFI_TOLERANCE {
        return Err(Error::consistency(format!("negative quantum Fisher information {f}")));
    }
    Ok(f)
}

pub fn qfi(p: &SystemParams) -> Result<f64> {
    qfi_from_kernel(&CatalysisKernel::build(p)?, p.alpha)
}

/// `1/√F` for a Fisher information `F`.
pub fn bound_from_fisher(f: f64) -> Result<f64> {
    if !(f > QFI_FLOOR) {
        return Err(Error::UndefinedBound(format!(
            "Fisher information {f:e} carries no phase information"
        )));
    }
    Ok(1.0 / f.sqrt())
}

pub fn qcrb(p: &SystemParams) -> Result<f64> {
    bound_from_fisher(qfi(p)?)
}

/// Standard quantum limit and Heisenberg limit at total photon number `nbar`.
pub fn benchmarks(nbar: f64) -> Result<(f64, f64)> {
    if !(nbar > 0.0 && nbar.is_finite()) {
        return Err(Error::domain(format!("benchmarks need a positive photon number, got {nbar}")));
    }
    Ok((1.0 / nbar.sqrt(), 1.0 / nbar))
}

/// One fully evaluated lossless operating point.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MetrologyPoint {
    pub phi: f64,
    pub parity: f64,
    pub dparity_dphi: f64,
    pub sensitivity: f64,
    pub qfi: f64,
    pub qcrb: f64,
    pub sql: f64,
    pub hl: f64,
    pub nbar: f64,
}

pub fn evaluate_point(p: &SystemParams, phi: f64) -> Result<MetrologyPoint> {
    let signal = ParitySignal::new(p)?;
    let est = signal.sensitivity(phi)?;
    let f = qfi_from_kernel(signal.kernel(), p.alpha)?;
    let nbar = p.alpha * p.alpha + signal.kernel().mean_photon_b()?;
    let (sql, hl) = benchmarks(nbar)?;
    Ok(MetrologyPoint {
        phi,
        parity: est.parity,
        dparity_dphi: est.slope,
        sensitivity: est.sensitivity,
        qfi: f,
        qcrb: bound_from_fisher(f)?,
        sql,
        hl,
        nbar,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use std::f64::consts::PI;

    fn params(alpha: f64, r: f64, eta: f64, m: u32) -> SystemParams {
        SystemParams::new(alpha, r, eta, m).unwrap()
    }

    #[test]
    fn parity_is_one_at_zero_phase() {
        for &(a, r, eta, m) in &[(1.0, 0.9, 0.2, 2), (0.3, 0.4, 0.5, 1), (0.0, 0.0, 1.0, 0)] {
            assert_abs_diff_eq!(parity_expectation(&params(a, r, eta, m), 0.0).unwrap(), 1.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn pure_svs_at_quarter_turn() {
        let expected = 1.0 / (1.0 + 0.9f64.sinh().powi(2)).sqrt();
        assert_abs_diff_eq!(expected, 0.6978, epsilon = 1e-4);
        let v = parity_expectation(&params(0.0, 0.9, 1.0, 0), PI / 2.0).unwrap();
        assert_abs_diff_eq!(v, expected, epsilon = 1e-14);
        assert_abs_diff_eq!(parity_svs_closed_form(0.0, 0.9, PI / 2.0), expected, epsilon = 1e-15);
        assert_eq!(parity_svs_closed_form(1.0, 0.9, 0.0), 1.0);
    }

    #[test]
    fn deficit_matches_direct_integrand() {
        let sig = ParitySignal::new(&params(1.0, 0.9, 0.2, 3)).unwrap();
        for &phi in &[0.05, 0.3, 1.0, 2.5, -1.7] {
            let direct = sig.kernel().dhat(&sig.integrand(phi).unwrap()).unwrap();
            assert_abs_diff_eq!(1.0 - sig.deficit(phi).unwrap(), direct, epsilon = 1e-13);
        }
    }

    #[test]
    fn reduces_to_svs_closed_form_at_unit_eta() {
        for m in 0..=3 {
            let sig = ParitySignal::new(&params(1.0, 0.9, 1.0, m)).unwrap();
            for i in -10..=10 {
                let phi = 0.3 * i as f64;
                assert_abs_diff_eq!(
                    sig.value(phi).unwrap(),
                    parity_svs_closed_form(1.0, 0.9, phi),
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn parity_is_even_in_phase() {
        let sig = ParitySignal::new(&params(0.7, 0.6, 0.3, 2)).unwrap();
        for &phi in &[0.1, 0.7, 2.0, 3.0] {
            assert_abs_diff_eq!(sig.value(phi).unwrap(), sig.value(-phi).unwrap(), epsilon = 1e-12);
        }
    }

    #[test]
    fn coherent_light_is_shot_noise_limited() {
        let s = phase_sensitivity(&params(1.0, 0.0, 1.0, 0), 1e-4).unwrap();
        assert_relative_eq!(s, 1.0, max_relative = 1e-6);
    }

    #[test]
    fn catalysis_beats_svs_at_fig5_point() {
        let cat = phase_sensitivity(&params(0.45, 0.4, 0.1, 2), 1e-4).unwrap();
        let svs = phase_sensitivity(&params(0.45, 0.4, 1.0, 0), 1e-4).unwrap();
        assert!(cat < svs, "{cat} vs {svs}");
    }

    #[test]
    fn zero_phase_is_degenerate() {
        let p = params(1.0, 0.9, 0.2, 1);
        assert!(matches!(phase_sensitivity(&p, 0.0), Err(Error::Degenerate(_))));
        assert!(matches!(phase_sensitivity(&p, 1e-9), Err(Error::Degenerate(_))));
        // stationary signal: vacuum input
        assert!(matches!(phase_sensitivity(&params(0.0, 0.0, 1.0, 0), 0.3), Err(Error::Degenerate(_))));
    }

    #[test]
    fn qfi_of_vacuum_is_zero() {
        assert_eq!(qfi(&params(0.0, 0.0, 1.0, 0)).unwrap(), 0.0);
        assert!(matches!(qcrb(&params(0.0, 0.0, 1.0, 0)), Err(Error::UndefinedBound(_))));
    }

    #[test]
    fn qfi_of_coherent_light() {
        // |α⟩ split 50:50: 4 Var(n_b) = 4 · α²/2 = 2α²
        assert_relative_eq!(qfi(&params(1.3, 0.0, 1.0, 0)).unwrap(), 2.0 * 1.69, max_relative = 1e-13);
    }

    #[test]
    fn catalysis_raises_qfi_at_low_eta() {
        let cat = qfi(&params(1.0, 0.9, 0.2, 3)).unwrap();
        let svs = qfi(&params(1.0, 0.9, 1.0, 3)).unwrap();
        assert!(cat > svs, "{cat} vs {svs}");
    }

    #[test]
    fn bound_from_fisher_examples() {
        assert_eq!(bound_from_fisher(4.0).unwrap(), 0.5);
        assert!(bound_from_fisher(0.0).is_err());
    }

    #[test]
    fn benchmark_examples() {
        assert_eq!(benchmarks(4.0).unwrap(), (0.5, 0.25));
        assert_eq!(benchmarks(1.0).unwrap(), (1.0, 1.0));
        let (sql, hl) = benchmarks(1.0 + 0.9f64.sinh().powi(2)).unwrap();
        assert_abs_diff_eq!(sql, 0.6978, epsilon = 1e-4);
        assert_abs_diff_eq!(hl, 0.4869, epsilon = 1e-4);
        assert!(matches!(benchmarks(0.0), Err(Error::Domain(_))));
        assert!(benchmarks(-1.0).is_err());
    }

    #[test]
    fn metrology_point_invariants() {
        let pt = evaluate_point(&params(0.6, 0.5, 0.3, 2), 0.4).unwrap();
        assert!(pt.parity.abs() <= 1.0 + 1e-10);
        assert_relative_eq!(pt.qcrb, pt.qfi.powf(-0.5), max_relative = 1e-15);
        assert_relative_eq!(pt.sql, pt.nbar.powf(-0.5), max_relative = 1e-15);
        assert_relative_eq!(pt.hl, 1.0 / pt.nbar, max_relative = 1e-15);
        assert!(pt.sensitivity >= pt.qcrb - 1e-9);
    }

    #[test]
    fn richardson_on_known_function() {
        let d = richardson_derivative(|x| Ok(x.sin()), 0.7, 1e-3).unwrap();
        assert_abs_diff_eq!(d, 0.7f64.cos(), epsilon = 1e-13);
    }
}
