//! A common interface over the two evaluation routes: the closed-form series
//! expressions and the Fock-basis simulation.

use serde::{Deserialize, Serialize};

use crate::catalysis::{CatalysisKernel, SystemParams};
use crate::error::{Error, Result};
use crate::ideal::{self, bound_from_fisher, check_parity, sensitivity_from_deficit, sensitivity_from_signal, ParitySignal};
use crate::lossy::{self, check_transmissivity, LossChannel, LossySignal};
use crate::oracle::FockOracle;

pub trait PhaseEngine: Sync {
    fn name(&self) -> &'static str;

    fn success_probability(&self, p: &SystemParams) -> Result<f64>;

    fn mean_photon_b(&self, p: &SystemParams) -> Result<f64>;

    /// `N̄ = α² + n̄_b`.
    fn nbar(&self, p: &SystemParams) -> Result<f64> {
        Ok(p.alpha * p.alpha + self.mean_photon_b(p)?)
    }

    /// `1 − ⟨Π_b⟩(φ)`.
    fn parity_deficit(&self, p: &SystemParams, phi: f64) -> Result<f64>;

    fn parity(&self, p: &SystemParams, phi: f64) -> Result<f64> {
        check_parity(1.0 - self.parity_deficit(p, phi)?)
    }

    fn sensitivity(&self, p: &SystemParams, phi: f64) -> Result<f64> {
        Ok(sensitivity_from_deficit(|x| self.parity_deficit(p, x), phi)?.sensitivity)
    }

    fn parity_lossy(&self, p: &SystemParams, phi: f64, channel: LossChannel, t: f64) -> Result<f64>;

    fn sensitivity_lossy(&self, p: &SystemParams, phi: f64, channel: LossChannel, t: f64) -> Result<f64> {
        check_transmissivity("t", t)?;
        if t == 1.0 {
            return self.sensitivity(p, phi);
        }
        Ok(sensitivity_from_signal(|x| self.parity_lossy(p, x, channel, t), phi)?.sensitivity)
    }

    fn qfi(&self, p: &SystemParams) -> Result<f64>;

    fn qcrb(&self, p: &SystemParams) -> Result<f64> {
        bound_from_fisher(self.qfi(p)?)
    }

    fn qfi_lossy(&self, p: &SystemParams, t: f64) -> Result<f64>;

    fn qcrb_lossy(&self, p: &SystemParams, t: f64) -> Result<f64> {
        bound_from_fisher(self.qfi_lossy(p, t)?)
    }
}

/// The series expressions.
#[derive(Debug, Clone, Copy, Default)]
pub struct ClosedForm;

impl PhaseEngine for ClosedForm {
    fn name(&self) -> &'static str {
        "closed_form"
    }

    fn success_probability(&self, p: &SystemParams) -> Result<f64> {
        Ok(CatalysisKernel::build(p)?.pm())
    }

    fn mean_photon_b(&self, p: &SystemParams) -> Result<f64> {
        CatalysisKernel::build(p)?.mean_photon_b()
    }

    fn parity_deficit(&self, p: &SystemParams, phi: f64) -> Result<f64> {
        ParitySignal::new(p)?.deficit(phi)
    }

    fn sensitivity(&self, p: &SystemParams, phi: f64) -> Result<f64> {
        ideal::check_phase(phi)?;
        Ok(ParitySignal::new(p)?.sensitivity(phi)?.sensitivity)
    }

    fn parity_lossy(&self, p: &SystemParams, phi: f64, channel: LossChannel, t: f64) -> Result<f64> {
        LossySignal::new(p)?.value(phi, channel, t)
    }

    fn sensitivity_lossy(&self, p: &SystemParams, phi: f64, channel: LossChannel, t: f64) -> Result<f64> {
        check_transmissivity("t", t)?;
        ideal::check_phase(phi)?;
        Ok(LossySignal::new(p)?.sensitivity(phi, channel, t)?.sensitivity)
    }

    fn qfi(&self, p: &SystemParams) -> Result<f64> {
        ideal::qfi(p)
    }

    fn qfi_lossy(&self, p: &SystemParams, t: f64) -> Result<f64> {
        lossy::qfi_lossy(p, t)
    }
}

/// Engine selection for command-line and sweep configuration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum EngineKind {
    #[default]
    ClosedForm,
    Oracle,
    Both,
}

impl std::str::FromStr for EngineKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" => Ok(EngineKind::ClosedForm),
            "oracle" => Ok(EngineKind::Oracle),
            "both" => Ok(EngineKind::Both),
            other => Err(Error::config(format!(
                "unknown engine `{other}` (expected closed_form, oracle or both)"
            ))),
        }
    }
}

impl EngineKind {
    pub fn name(self) -> &'static str {
        match self {
            EngineKind::ClosedForm => "closed_form",
            EngineKind::Oracle => "oracle",
            EngineKind::Both => "both",
        }
    }
}

/// Build the single engine behind a non-comparative selection.
pub fn single_engine(kind: EngineKind, n_max: Option<usize>) -> Result<Box<dyn PhaseEngine>> {
    match kind {
        EngineKind::ClosedForm => Ok(Box::new(ClosedForm)),
        EngineKind::Oracle => Ok(Box::new(FockOracle::new(n_max))),
        EngineKind::Both => Err(Error::config("engine `both` has no single evaluation route")),
    }
}
