//! Photon loss in mode `b`: dissipation before the parity detector
//! (external, `t1`), between the phase shifter and the second beam splitter
//! (internal, `t2`), and the loss-degraded quantum Fisher information (`t`).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::catalysis::{CatalysisKernel, SystemParams};
use crate::error::{Error, Result};
use crate::ideal::{self, bound_from_fisher, check_parity, SensitivityEstimate};
use crate::series::BiSeries;

/// Transmissivities of the three loss models. A value of one is lossless.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossConfig {
    #[serde(default = "lossless")]
    pub t1: f64,
    #[serde(default = "lossless")]
    pub t2: f64,
    #[serde(default = "lossless")]
    pub t: f64,
}

fn lossless() -> f64 {
    1.0
}

impl Default for LossConfig {
    fn default() -> Self {
        Self { t1: 1.0, t2: 1.0, t: 1.0 }
    }
}

impl LossConfig {
    pub fn new(t1: f64, t2: f64, t: f64) -> Result<Self> {
        let cfg = Self { t1, t2, t };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        check_transmissivity("t1", self.t1)?;
        check_transmissivity("t2", self.t2)?;
        check_transmissivity("t", self.t)
    }

    pub fn transmissivity(&self, channel: LossChannel) -> f64 {
        match channel {
            LossChannel::External => self.t1,
            LossChannel::Internal => self.t2,
        }
    }
}

pub(crate) fn check_transmissivity(name: &str, t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("{name} must lie in (0, 1], got {t}")));
    }
    Ok(())
}

/// Where the lossy beam splitter sits in the interferometer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossChannel {
    External,
    Internal,
}

impl LossChannel {
    pub fn name(self) -> &'static str {
        match self {
            LossChannel::External => "external",
            LossChannel::Internal => "internal",
        }
    }
}

impl std::str::FromStr for LossChannel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "external" => Ok(LossChannel::External),
            "internal" => Ok(LossChannel::Internal),
            other => Err(Error::config(format!("unknown loss channel `{other}`"))),
        }
    }
}

/// Phase-dependent coefficients of the internally lossy interferometer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InternalLossFactors {
    pub x1: f64,
    pub x2: Complex64,
    pub x3: f64,
}

pub fn internal_factors(phi: f64, t2: f64) -> Result<InternalLossFactors> {
    check_transmissivity("t2", t2)?;
    if !phi.is_finite() {
        return Err(Error::domain("phase must be finite"));
    }
    let (s, c) = phi.sin_cos();
    let st = t2.sqrt();
    let x1 = (2.0 * st * c - 1.0 - t2) / 2.0;
    let x3 = -(2.0 * st * c + 1.0 + t2) / 2.0;
    let numer = (1.0 - t2).powi(2) + 4.0 * t2 * s * s;
    let denom = Complex64::new(2.0 * (2.0 * st * s), 2.0 * (t2 - 1.0));
    let x2 = if numer == 0.0 && denom.norm() == 0.0 {
        Complex64::new(0.0, 0.0)
    } else {
        numer / denom
    };
    Ok(InternalLossFactors { x1, x2, x3 })
}

/// Lossy parity signals for fixed input parameters, reusable across phases.
#[derive(Debug, Clone)]
pub struct LossySignal {
    kernel: CatalysisKernel,
    alpha2: f64,
    q: BiSeries,
    w_sum: BiSeries,
}

impl LossySignal {
    pub fn new(p: &SystemParams) -> Result<Self> {
        Ok(Self::from_kernel(CatalysisKernel::build(p)?, p.alpha))
    }

    pub fn from_kernel(kernel: CatalysisKernel, alpha: f64) -> Self {
        let q = kernel.coupling();
        let w_sum = kernel.w() + kernel.w1();
        Self {
            kernel,
            alpha2: alpha * alpha,
            q,
            w_sum,
        }
    }

    pub fn kernel(&self) -> &CatalysisKernel {
        &self.kernel
    }

    /// Parity measured behind a beam splitter of transmissivity `t1`.
    ///
    /// The τ-asymmetric `2W` term is written in its symmetric form `W + W₁`,
    /// which has the same projection and reduces term by term to the lossless signal.
    pub fn external(&self, phi: f64, t1: f64) -> Result<f64> {
        check_transmissivity("t1", t1)?;
        let (s, c) = phi.sin_cos();
        let s2 = s * s;
        let g = t1 * (c + 1.0);
        let a1 = 1.0 - &self.q.scale((1.0 - g).powi(2));
        let a2 = &self.w_sum.scale(t1 * t1 * s2) - &self.q.scale(t1 * t1 * s2 * (g - 1.0));
        let exponent = (&a2 * &a1.recip()?).add_scalar(t1 * (c - 1.0)).scale(self.alpha2);
        let integrand = &(self.kernel.eps() * &a1.pow_real(-0.5)?) * &exponent.exp()?;
        check_parity(self.kernel.dhat(&integrand)?)
    }

    /// Parity with a beam splitter of transmissivity `t2` between the phase
    /// shifter and the second beam splitter.
    pub fn internal(&self, phi: f64, t2: f64) -> Result<f64> {
        let x = internal_factors(phi, t2)?;
        let one_x3 = 1.0 + x.x3;
        let b1 = 1.0 - &self.q.scale(one_x3 * one_x3);
        let b2 = &(&self.kernel.w1().scale(x.x2 * x.x2) + &self.kernel.w().scale(x.x2.conj() * x.x2.conj()))
            + &self.q.scale(x.x2.norm_sqr() * one_x3);
        let exponent = (&b2 * &b1.recip()?).add_scalar(x.x1).scale(self.alpha2);
        let integrand = &(self.kernel.eps() * &b1.pow_real(-0.5)?) * &exponent.exp()?;
        check_parity(self.kernel.dhat(&integrand)?)
    }

    pub fn value(&self, phi: f64, channel: LossChannel, t: f64) -> Result<f64> {
        match channel {
            LossChannel::External => self.external(phi, t),
            LossChannel::Internal => self.internal(phi, t),
        }
    }

    pub fn sensitivity(&self, phi: f64, channel: LossChannel, t: f64) -> Result<SensitivityEstimate> {
        if t == 1.0 {
            let signal = ideal::ParitySignal::from_kernel(self.kernel.clone(), self.alpha2.sqrt())?;
            return signal.sensitivity(phi);
        }
        ideal::sensitivity_from_signal(|x| self.value(x, channel, t), phi)
    }

    /// `w_sum = W + W₁`, exposed for diagnostics.
    pub fn symmetric_coupling(&self) -> &BiSeries {
        &self.w_sum
    }
}

pub fn parity_external(p: &SystemParams, phi: f64, t1: f64) -> Result<f64> {
    check_transmissivity("t1", t1)?;
    LossySignal::new(p)?.external(phi, t1)
}

pub fn parity_internal(p: &SystemParams, phi: f64, t2: f64) -> Result<f64> {
    check_transmissivity("t2", t2)?;
    LossySignal::new(p)?.internal(phi, t2)
}

/// Δφ under loss. A lossless channel falls back to the ideal deficit-based
/// evaluation, which is more accurate at small φ.
pub fn sensitivity_lossy(p: &SystemParams, phi: f64, loss: &LossConfig, which: LossChannel) -> Result<f64> {
    loss.validate()?;
    ideal::check_phase(phi)?;
    let t = loss.transmissivity(which);
    Ok(LossySignal::new(p)?.sensitivity(phi, which, t)?.sensitivity)
}

/// `F_QL = 4F T n / ((1 − T) F + 4 T n)` with `n = N̄/2`.
pub fn lossy_fisher(f: f64, nbar: f64, t: f64) -> Result<f64> {
    check_transmissivity("t", t)?;
    if t == 1.0 {
        return Ok(f);
    }
    let n = nbar / 2.0;
    let den = (1.0 - t) * f + 4.0 * t * n;
    if den == 0.0 {
        return Ok(0.0);
    }
    Ok(4.0 * f * t * n / den)
}

pub fn qfi_lossy(p: &SystemParams, t: f64) -> Result<f64> {
    check_transmissivity("t", t)?;
    let kernel = CatalysisKernel::build(p)?;
    let f = ideal::qfi_from_kernel(&kernel, p.alpha)?;
    let nbar = p.alpha * p.alpha + kernel.mean_photon_b()?;
    lossy_fisher(f, nbar, t)
}

pub fn qcrb_lossy(p: &SystemParams, t: f64) -> Result<f64> {
    bound_from_fisher(qfi_lossy(p, t)?)
}
