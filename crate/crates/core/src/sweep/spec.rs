//! Sweep configuration, read from JSON.

use serde::{Deserialize, Serialize};

use crate::catalysis::SystemParams;
use crate::engine::EngineKind;
use crate::error::{Error, Result};
use crate::lossy::{LossChannel, LossConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxisName {
    Alpha,
    R,
    Eta,
    M,
    Phi,
    T1,
    T2,
    T,
    Nbar,
}

impl AxisName {
    pub fn name(self) -> &'static str {
        match self {
            AxisName::Alpha => "alpha",
            AxisName::R => "r",
            AxisName::Eta => "eta",
            AxisName::M => "m",
            AxisName::Phi => "phi",
            AxisName::T1 => "t1",
            AxisName::T2 => "t2",
            AxisName::T => "t",
            AxisName::Nbar => "nbar",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Parity,
    Sensitivity,
    Qfi,
    Qcrb,
    Sql,
    Hl,
    Nbar,
    Pm,
    FQl,
    QcrbL,
    ParityExt,
    ParityInt,
    SensitivityExt,
    SensitivityInt,
}

impl Output {
    pub fn name(self) -> &'static str {
        match self {
            Output::Parity => "parity",
            Output::Sensitivity => "sensitivity",
            Output::Qfi => "qfi",
            Output::Qcrb => "qcrb",
            Output::Sql => "sql",
            Output::Hl => "hl",
            Output::Nbar => "nbar",
            Output::Pm => "pm",
            Output::FQl => "f_ql",
            Output::QcrbL => "qcrb_l",
            Output::ParityExt => "parity_ext",
            Output::ParityInt => "parity_int",
            Output::SensitivityExt => "sensitivity_ext",
            Output::SensitivityInt => "sensitivity_int",
        }
    }

    pub fn needs_phase(self) -> bool {
        matches!(
            self,
            Output::Parity | Output::Sensitivity | Output::ParityExt | Output::ParityInt | Output::SensitivityExt | Output::SensitivityInt
        )
    }

    pub fn channel(self) -> Option<LossChannel> {
        match self {
            Output::ParityExt | Output::SensitivityExt => Some(LossChannel::External),
            Output::ParityInt | Output::SensitivityInt => Some(LossChannel::Internal),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub name: AxisName,
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Axis {
    pub fn values(&self) -> Vec<f64> {
        let n = self.steps;
        (0..n)
            .map(|i| {
                if i + 1 == n {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64
                }
            })
            .collect()
    }
}

/// Parameters held constant over the sweep. Anything swept must be absent here.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FixedParams {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phi: Option<f64>,
}

/// Loss transmissivities as written in the configuration.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LossSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    #[serde(default)]
    pub engine: EngineKind,
    #[serde(default)]
    pub fixed: FixedParams,
    pub swept: Vec<Axis>,
    pub outputs: Vec<Output>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub loss: Option<LossSpec>,
    /// Oracle truncation; chosen per point when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_max: Option<usize>,
}

/// One grid point, fully resolved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridPoint {
    pub alpha: f64,
    pub r: f64,
    pub eta: f64,
    pub m: u32,
    pub phi: Option<f64>,
    pub loss: LossConfig,
    /// Requested total photon number when `nbar` is swept.
    pub nbar_target: Option<f64>,
}

impl GridPoint {
    pub fn params(&self) -> Result<SystemParams> {
        SystemParams::new(self.alpha, self.r, self.eta, self.m)
    }
}

impl SweepSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: SweepSpec = serde_json::from_str(text).map_err(|e| Error::config(e.to_string()))?;
        spec.validate()?;
        Ok(spec)
    }

    fn is_fixed(&self, axis: AxisName) -> bool {
        let f = &self.fixed;
        let l = self.loss.unwrap_or_default();
        match axis {
            AxisName::Alpha => f.alpha.is_some(),
            AxisName::R => f.r.is_some(),
            AxisName::Eta => f.eta.is_some(),
            AxisName::M => f.m.is_some(),
            AxisName::Phi => f.phi.is_some(),
            AxisName::T1 => l.t1.is_some(),
            AxisName::T2 => l.t2.is_some(),
            AxisName::T => l.t.is_some(),
            AxisName::Nbar => f.alpha.is_some(),
        }
    }

    fn is_swept(&self, axis: AxisName) -> bool {
        self.swept.iter().any(|a| a.name == axis)
    }

    pub fn validate(&self) -> Result<()> {
        if self.swept.is_empty() || self.swept.len() > 2 {
            return Err(Error::config("a sweep needs one or two axes"));
        }
        if self.outputs.is_empty() {
            return Err(Error::config("no outputs requested"));
        }
        for (i, axis) in self.swept.iter().enumerate() {
            if axis.steps < 2 {
                return Err(Error::config(format!("axis {} needs at least 2 steps", axis.name.name())));
            }
            if !(axis.start.is_finite() && axis.stop.is_finite()) {
                return Err(Error::config(format!("axis {} has non-finite bounds", axis.name.name())));
            }
            if self.is_fixed(axis.name) {
                return Err(Error::config(format!("{} is both fixed and swept", axis.name.name())));
            }
            if self.swept[..i].iter().any(|a| a.name == axis.name) {
                return Err(Error::config(format!("axis {} appears twice", axis.name.name())));
            }
            if axis.name == AxisName::M {
                for v in axis.values() {
                    if v < 0.0 || v.fract() != 0.0 {
                        return Err(Error::config(format!("m axis produces non-integer value {v}")));
                    }
                }
            }
        }
        if self.is_swept(AxisName::Nbar) && self.is_swept(AxisName::Alpha) {
            return Err(Error::config("nbar and alpha cannot both be swept"));
        }
        let needs_alpha = !self.is_swept(AxisName::Nbar) && !self.is_swept(AxisName::Alpha);
        let missing = |name: &str| Error::config(format!("`{name}` must be fixed or swept"));
        if needs_alpha && self.fixed.alpha.is_none() {
            return Err(missing("alpha"));
        }
        if !self.is_swept(AxisName::R) && self.fixed.r.is_none() {
            return Err(missing("r"));
        }
        if !self.is_swept(AxisName::Eta) && self.fixed.eta.is_none() {
            return Err(missing("eta"));
        }
        if !self.is_swept(AxisName::M) && self.fixed.m.is_none() {
            return Err(missing("m"));
        }
        if self.outputs.iter().any(|o| o.needs_phase()) && !self.is_swept(AxisName::Phi) && self.fixed.phi.is_none() {
            return Err(missing("phi"));
        }
        for (i, o) in self.outputs.iter().enumerate() {
            if self.outputs[..i].contains(o) {
                return Err(Error::config(format!("output {} requested twice", o.name())));
            }
        }
        if let Some(l) = self.loss {
            for (name, v) in [("t1", l.t1), ("t2", l.t2), ("t", l.t)] {
                if let Some(v) = v {
                    if !(v > 0.0 && v <= 1.0) {
                        return Err(Error::config(format!("{name} must lie in (0, 1], got {v}")));
                    }
                }
            }
        }
        if self.n_max == Some(0) {
            return Err(Error::config("n_max must be positive"));
        }
        Ok(())
    }

    /// Grid points in lexicographic axis order (last axis fastest).
    pub fn grid(&self) -> Vec<(Vec<f64>, GridPoint)> {
        let loss = self.loss.unwrap_or_default();
        let base = GridPoint {
            alpha: self.fixed.alpha.unwrap_or(0.0),
            r: self.fixed.r.unwrap_or(0.0),
            eta: self.fixed.eta.unwrap_or(1.0),
            m: self.fixed.m.unwrap_or(0),
            phi: self.fixed.phi,
            loss: LossConfig {
                t1: loss.t1.unwrap_or(1.0),
                t2: loss.t2.unwrap_or(1.0),
                t: loss.t.unwrap_or(1.0),
            },
            nbar_target: None,
        };
        let mut points = vec![(Vec::new(), base)];
        for axis in &self.swept {
            let values = axis.values();
            points = points
                .into_iter()
                .flat_map(|(coords, pt)| {
                    values.iter().map(move |&v| {
                        let mut c = coords.clone();
                        c.push(v);
                        (c, with_axis(pt, axis.name, v))
                    })
                })
                .collect();
        }
        points
    }
}

fn with_axis(mut pt: GridPoint, axis: AxisName, v: f64) -> GridPoint {
    match axis {
        AxisName::Alpha => pt.alpha = v,
        AxisName::R => pt.r = v,
        AxisName::Eta => pt.eta = v,
        AxisName::M => pt.m = v.round() as u32,
        AxisName::Phi => pt.phi = Some(v),
        AxisName::T1 => pt.loss.t1 = v,
        AxisName::T2 => pt.loss.t2 = v,
        AxisName::T => pt.loss.t = v,
        AxisName::Nbar => pt.nbar_target = Some(v),
    }
    pt
}
