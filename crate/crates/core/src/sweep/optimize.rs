//! Choice of the catalysis beam-splitter transmissivity that minimizes Δφ.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::catalysis::SystemParams;
use crate::error::{Error, Result};
use crate::ideal::{check_phase, ParitySignal};

/// Relative margin below which two sensitivities count as tied.
const TIE_MARGIN: f64 = 1e-12;
const GOLDEN: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EtaSearch {
    pub floor: f64,
    pub step: f64,
    /// Final bracket width of the golden-section stage.
    pub refine_width: f64,
    pub refine: bool,
}

impl Default for EtaSearch {
    fn default() -> Self {
        Self {
            floor: 0.01,
            step: 0.005,
            refine_width: 1e-4,
            refine: true,
        }
    }
}

impl EtaSearch {
    /// A 0.1-step grid without refinement.
    pub fn coarse() -> Self {
        Self {
            floor: 0.1,
            step: 0.1,
            refine_width: 1e-4,
            refine: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.floor > 0.0 && self.floor <= 1.0) {
            return Err(Error::domain(format!("eta grid floor must lie in (0, 1], got {}", self.floor)));
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::domain(format!("eta grid step must be positive, got {}", self.step)));
        }
        if self.refine && !(self.refine_width > 0.0) {
            return Err(Error::domain("refinement width must be positive"));
        }
        Ok(())
    }

    /// Ascending grid from the floor, always ending at exactly 1.
    pub fn grid(&self) -> Vec<f64> {
        let mut etas = Vec::new();
        let mut k = 0usize;
        loop {
            let eta = self.floor + k as f64 * self.step;
            if eta >= 1.0 - 1e-9 {
                break;
            }
            etas.push(eta);
            k += 1;
        }
        etas.push(1.0);
        etas
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EtaOptResult {
    pub phi: f64,
    pub eta_opt: f64,
    pub sensitivity_at_opt: f64,
}

/// Reusable search for fixed (α, r, m): the parity signal at each grid η is
/// built once and shared across phases.
#[derive(Debug)]
pub struct EtaOptimizer {
    params: SystemParams,
    search: EtaSearch,
    grid: Vec<f64>,
    signals: Vec<OnceLock<Option<ParitySignal>>>,
}

impl EtaOptimizer {
    pub fn new(params: &SystemParams, search: EtaSearch) -> Result<Self> {
        search.validate()?;
        params.with_eta(1.0).validate()?;
        let grid = search.grid();
        let signals = grid.iter().map(|_| OnceLock::new()).collect();
        Ok(Self {
            params: *params,
            search,
            grid,
            signals,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn search(&self) -> &EtaSearch {
        &self.search
    }

    fn signal(&self, i: usize) -> Option<&ParitySignal> {
        self.signals[i]
            .get_or_init(|| ParitySignal::new(&self.params.with_eta(self.grid[i])).ok())
            .as_ref()
    }

    fn sensitivity_at(&self, eta: f64, phi: f64) -> Option<f64> {
        let s = ParitySignal::new(&self.params.with_eta(eta)).ok()?.sensitivity(phi).ok()?.sensitivity;
        s.is_finite().then_some(s)
    }

    pub fn optimize(&self, phi: f64) -> Result<EtaOptResult> {
        check_phase(phi)?;
        let mut best: Option<(usize, f64)> = None;
        for i in (0..self.grid.len()).rev() {
            let Some(signal) = self.signal(i) else { continue };
            let Ok(est) = signal.sensitivity(phi) else { continue };
            let s = est.sensitivity;
            if !s.is_finite() {
                continue;
            }
            if best.map_or(true, |(_, b)| s < b * (1.0 - TIE_MARGIN)) {
                best = Some((i, s));
            }
        }
        let (i, s) = best.ok_or_else(|| Error::degenerate(format!("no eta on the grid gives a usable sensitivity at phi = {phi}")))?;
        let mut result = EtaOptResult {
            phi,
            eta_opt: self.grid[i],
            sensitivity_at_opt: s,
        };
        if self.search.refine {
            let lo = self.grid[i.saturating_sub(1)];
            let hi = self.grid[(i + 1).min(self.grid.len() - 1)];
            if let Some((eta, s)) = self.golden(lo, hi, phi) {
                let better = s < result.sensitivity_at_opt * (1.0 - TIE_MARGIN);
                let tied_higher = !better && s <= result.sensitivity_at_opt * (1.0 + TIE_MARGIN) && eta > result.eta_opt;
                if better || tied_higher {
                    result.eta_opt = eta;
                    result.sensitivity_at_opt = s;
                }
            }
        }
        Ok(result)
    }

    fn golden(&self, mut a: f64, mut b: f64, phi: f64) -> Option<(f64, f64)> {
        let f = |eta: f64| self.sensitivity_at(eta, phi).unwrap_or(f64::INFINITY);
        let mut c = b - GOLDEN * (b - a);
        let mut d = a + GOLDEN * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > self.search.refine_width {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - GOLDEN * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + GOLDEN * (b - a);
                fd = f(d);
            }
        }
        let (eta, s) = if fc < fd { (c, fc) } else { (d, fd) };
        s.is_finite().then_some((eta, s))
    }
}

/// Minimize Δφ over η at fixed (α, r, m); the `eta` field of `p` is ignored.
pub fn optimize_eta(p: &SystemParams, phi: f64, search: EtaSearch) -> Result<EtaOptResult> {
    EtaOptimizer::new(p, search)?.optimize(phi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ideal::phase_sensitivity;

    fn base(m: u32) -> SystemParams {
        SystemParams::new(1.0, 0.9, 1.0, m).unwrap()
    }

    #[test]
    fn grid_shape() {
        let g = EtaSearch::default().grid();
        assert_eq!(g.len(), 199);
        assert_eq!(g[0], 0.01);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!((g[197] - 0.995).abs() < 1e-12);
        assert_eq!(EtaSearch::coarse().grid().len(), 10);
    }

    #[test]
    fn small_phase_keeps_unit_eta() {
        let r = optimize_eta(&base(1), 0.2, EtaSearch::default()).unwrap();
        assert!((r.eta_opt - 1.0).abs() <= 1e-4, "{r:?}");
    }

    #[test]
    fn larger_phase_moves_below_one() {
        let r = optimize_eta(&base(1), 0.8, EtaSearch::default()).unwrap();
        assert!(r.eta_opt < 1.0);
        let at_one = phase_sensitivity(&base(1), 0.8).unwrap();
        assert!(r.sensitivity_at_opt < at_one);
    }

    #[test]
    fn multi_photon_optimum_is_small() {
        let r = optimize_eta(&base(2), 0.2, EtaSearch::default()).unwrap();
        assert!(r.eta_opt < 0.5, "{r:?}");
    }

    #[test]
    fn optimum_beats_every_grid_point() {
        let opt = EtaOptimizer::new(&base(3), EtaSearch::default()).unwrap();
        let r = opt.optimize(0.6).unwrap();
        for &eta in opt.grid().iter().step_by(7) {
            if let Ok(s) = phase_sensitivity(&base(3).with_eta(eta), 0.6) {
                assert!(r.sensitivity_at_opt <= s * (1.0 + 1e-12), "eta={eta}");
            }
        }
    }

    #[test]
    fn rejects_tiny_phase() {
        assert!(matches!(optimize_eta(&base(1), 0.0, EtaSearch::default()), Err(Error::Degenerate(_) | Error::Domain(_))));
    }
}
