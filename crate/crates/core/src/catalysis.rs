//! Generating-function description of the photon-catalyzed squeezed vacuum.
//!
//! The heralded state is encoded by a prefactor `W₀` and the τ-dependent
//! squeezing coefficient
//!
//! ```text
//! W(τ)  = −η (1 − τ/η)² tanh r / (2 (1 − τ)²)
//! W₁(τ₁) = the same expression in τ₁
//! ε     = 1 / ((1 − τ)(1 − τ₁))
//! ```
//!
//! Every expectation value in the input mode then has the form
//! `D̂[f] = (W₀²/P_m) ∂^{2m}/∂τ^m∂τ₁^m f |₀`, which this module evaluates
//! through [`BiSeries::coeff_mm`].

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::BiSeries;

/// Largest supported catalysis photon number. The `(m!)²` extraction loses
/// precision in double arithmetic past this.
pub const MAX_CATALYSIS_PHOTONS: u32 = 8;
/// Largest supported squeezing parameter.
pub const MAX_SQUEEZING: f64 = 1.5;

/// Tolerance on the imaginary residue of a projected expectation value.
pub const REALITY_TOLERANCE: f64 = 1e-10;

/// Physical configuration of the input state: coherent amplitude `alpha`
/// (phase fixed to zero) in mode `a`, and the catalyzed squeezed vacuum in
/// mode `b` prepared from squeezing `r` with `m` catalysis photons on a beam
/// splitter of transmissivity `eta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    pub alpha: f64,
    pub r: f64,
    pub eta: f64,
    pub m: u32,
}

impl SystemParams {
    pub fn new(alpha: f64, r: f64, eta: f64, m: u32) -> Result<Self> {
        let p = Self { alpha, r, eta, m };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::domain(format!("alpha must be finite and >= 0, got {}", self.alpha)));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::domain(format!("r must be finite and >= 0, got {}", self.r)));
        }
        if self.r > MAX_SQUEEZING {
            return Err(Error::domain(format!(
                "r = {} exceeds the supported ceiling {MAX_SQUEEZING}",
                self.r
            )));
        }
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::domain(format!("eta must lie in (0, 1], got {}", self.eta)));
        }
        if self.m > MAX_CATALYSIS_PHOTONS {
            return Err(Error::domain(format!(
                "m = {} exceeds the supported ceiling {MAX_CATALYSIS_PHOTONS}",
                self.m
            )));
        }
        Ok(())
    }

    /// The same coherent amplitude and squeezing with catalysis switched off
    /// (η = 1, m = 0): the plain squeezed-vacuum reference.
    pub fn svs_baseline(&self) -> Self {
        Self {
            eta: 1.0,
            m: 0,
            ..*self
        }
    }

    pub fn with_alpha(&self, alpha: f64) -> Self {
        Self { alpha, ..*self }
    }

    pub fn with_eta(&self, eta: f64) -> Self {
        Self { eta, ..*self }
    }
}

/// Series data for one `(r, η, m)` configuration. Independent of `alpha`.
#[derive(Debug, Clone)]
pub struct CatalysisKernel {
    params: SystemParams,
    w0: f64,
    w: BiSeries,
    w1: BiSeries,
    eps: BiSeries,
    pm: f64,
}

impl CatalysisKernel {
    pub fn build(p: &SystemParams) -> Result<Self> {
        p.validate()?;
        let order = p.m as usize;
        let m_fact: f64 = (1..=p.m).map(f64::from).product();
        let w0 = p.eta.sqrt().powi(p.m as i32) / (m_fact * p.r.cosh().sqrt());

        // η(1 − τ/η)² = η − 2τ + τ²/η, kept exact as a polynomial.
        let numerator = BiSeries::poly_tau(order, &[p.eta, -2.0, 1.0 / p.eta]);
        let one_minus_tau = 1.0 - &BiSeries::tau(order);
        let inv = one_minus_tau.recip()?;
        let inv_sq = &inv * &inv;
        let w = (&numerator * &inv_sq).scale(-0.5 * p.r.tanh());
        let w1 = w.transpose();
        let eps = &inv * &inv.transpose();

        let mut kernel = Self {
            params: *p,
            w0,
            w,
            w1,
            eps,
            pm: 1.0,
        };
        let norm = kernel.coupling_power(-0.5)?;
        let pm = w0 * w0 * norm.coeff_mm().re;
        if !(pm > 0.0 && pm.is_finite()) {
            return Err(Error::consistency(format!("normalization P_m = {pm} is not positive")));
        }
        if pm > 1.0 + 1e-9 {
            return Err(Error::consistency(format!("normalization P_m = {pm} exceeds one")));
        }
        kernel.pm = pm;
        Ok(kernel)
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn order(&self) -> usize {
        self.params.m as usize
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn w(&self) -> &BiSeries {
        &self.w
    }

    pub fn w1(&self) -> &BiSeries {
        &self.w1
    }

    pub fn eps(&self) -> &BiSeries {
        &self.eps
    }

    /// Normalization of the heralded state, i.e. the catalysis success probability.
    pub fn pm(&self) -> f64 {
        self.pm
    }

    /// `4 W₁ W`, the squeezing coupling that appears in every expectation.
    pub fn coupling(&self) -> BiSeries {
        (&self.w1 * &self.w).scale(4.0)
    }

    /// `ε (1 − 4W₁W)^p`.
    pub fn coupling_power(&self, p: f64) -> Result<BiSeries> {
        let base = 1.0 - &self.coupling();
        Ok(&self.eps * &base.pow_real(p)?)
    }

    /// `D̂[f]` without the reality check.
    pub fn dhat_complex(&self, f: &BiSeries) -> Result<Complex64> {
        if f.order() != self.order() {
            return Err(Error::OrderMismatch {
                left: self.order(),
                right: f.order(),
            });
        }
        Ok(f.coeff_mm() * (self.w0 * self.w0 / self.pm))
    }

    /// `D̂[f]`, which must be real for every physical expectation value.
    pub fn dhat(&self, f: &BiSeries) -> Result<f64> {
        let z = self.dhat_complex(f)?;
        if !z.is_finite() {
            return Err(Error::consistency(format!("projected value {z} is not finite")));
        }
        if z.im.abs() >= REALITY_TOLERANCE {
            return Err(Error::consistency(format!(
                "projected value has imaginary residue {:e}",
                z.im
            )));
        }
        Ok(z.re)
    }

    /// `n̄_b = D̂[ε (1 − 4W₁W)^{−3/2}] − 1`.
    pub fn mean_photon_b(&self) -> Result<f64> {
        let nb = self.dhat(&self.coupling_power(-1.5)?)? - 1.0;
        if nb < -1e-10 {
            return Err(Error::consistency(format!("negative mean photon number {nb}")));
        }
        Ok(nb)
    }
}

pub fn build_kernel(p: &SystemParams) -> Result<CatalysisKernel> {
    CatalysisKernel::build(p)
}

pub fn mean_photon_b(p: &SystemParams) -> Result<f64> {
    CatalysisKernel::build(p)?.mean_photon_b()
}

/// `N̄ = α² + n̄_b`.
pub fn total_mean_photons(p: &SystemParams) -> Result<f64> {
    Ok(p.alpha * p.alpha + mean_photon_b(p)?)
}
