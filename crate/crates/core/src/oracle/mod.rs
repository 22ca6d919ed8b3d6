//! Brute-force Fock-basis simulation of the catalyzed input, the
//! interferometer, photon loss and parity detection. Used as an independent
//! check of the closed-form expressions.

pub mod channel;
pub mod state;
pub mod transform;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::catalysis::SystemParams;
use crate::engine::PhaseEngine;
use crate::error::{Error, Result};
use crate::ideal::{self, bound_from_fisher, sensitivity_from_deficit, sensitivity_from_signal};
use crate::lossy::{check_transmissivity, LossChannel};

pub use channel::{apply_loss_channel, kraus_fisher_bound, kraus_fisher_minimum, KrausMixture};
pub use state::{
    coherent_state, number_moments_b, parity_after_external_loss, parity_b, parity_deficit_b, prepare_pcsvs,
    squeezed_vacuum, SingleModeState, TwoModeState, CERTIFIED_TAIL,
};
pub use transform::{beam_splitter_apply, BlockUnitary, ModeTransform, MziUnitaries};

/// Smallest truncation used when none is requested.
pub const DEFAULT_NMAX: usize = 60;
/// Largest truncation the automatic search will try.
pub const MAX_AUTO_NMAX: usize = 400;
const NMAX_STEP: usize = 10;

fn coherent_floor(alpha: f64) -> usize {
    (alpha * alpha + 7.0 * alpha + 20.0).ceil() as usize
}

/// Input state `|α⟩ ⊗ |PCSVS⟩` restricted to `n_a + n_b ≤ n_max`, with the
/// heralding probability. Not certified.
fn input_state_uncertified(p: &SystemParams, n_max: usize) -> Result<(TwoModeState, f64)> {
    let (pcsvs, prob) = state::prepare_pcsvs_uncertified(p, n_max)?;
    let coh = state::coherent_state_uncertified(p.alpha, n_max)?;
    Ok((TwoModeState::product(&coh, &pcsvs)?, prob))
}

/// Smallest truncation (at least [`DEFAULT_NMAX`] and `α² + 7α + 20`) for
/// which the two-mode input drops less than [`CERTIFIED_TAIL`].
pub fn recommended_nmax(p: &SystemParams) -> Result<usize> {
    p.validate()?;
    let mut n = DEFAULT_NMAX.max(coherent_floor(p.alpha));
    loop {
        let (input, _) = input_state_uncertified(p, n)?;
        if input.norm_tail() < CERTIFIED_TAIL {
            return Ok(n);
        }
        if n >= MAX_AUTO_NMAX {
            return Err(Error::Truncation {
                tail: input.norm_tail(),
                n_max: n,
            });
        }
        n = (n + NMAX_STEP).min(MAX_AUTO_NMAX);
    }
}

fn mzi_unitaries(n_max: usize) -> Arc<MziUnitaries> {
    static CACHE: OnceLock<Mutex<HashMap<usize, Arc<MziUnitaries>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(u) = cache.lock().expect("unitary cache poisoned").get(&n_max) {
        return Arc::clone(u);
    }
    let built = Arc::new(MziUnitaries::new(n_max));
    let mut guard = cache.lock().expect("unitary cache poisoned");
    Arc::clone(guard.entry(n_max).or_insert(built))
}

/// `B₂ U(φ) B₁ (|α⟩ ⊗ pcsvs)`.
pub fn mzi_output(pcsvs: &SingleModeState, alpha: f64, phi: f64, n_max: usize) -> Result<TwoModeState> {
    if pcsvs.n_max() != n_max {
        return Err(Error::domain(format!(
            "state truncated at {} but n_max = {n_max} requested",
            pcsvs.n_max()
        )));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::domain(format!("alpha must be finite and >= 0, got {alpha}")));
    }
    let coh = coherent_state(alpha, n_max.max(1))?;
    let input = TwoModeState::product(&coh, pcsvs)?.certify()?;
    let u = mzi_unitaries(n_max);
    u.finish(&u.first.apply(&input)?, phi)
}

/// `4 Var(b†b)` on `B₁|in⟩`, the Fisher information of the phase generator.
pub fn qfi_numeric(p: &SystemParams, n_max: usize) -> Result<f64> {
    FockOracle::new(Some(n_max)).qfi(p)
}

/// The simulation engine. With no explicit truncation each evaluation uses
/// [`recommended_nmax`].
#[derive(Debug, Clone, Copy, Default)]
pub struct FockOracle {
    n_max: Option<usize>,
}

impl FockOracle {
    pub fn new(n_max: Option<usize>) -> Self {
        Self { n_max }
    }

    pub fn resolve_nmax(&self, p: &SystemParams) -> Result<usize> {
        match self.n_max {
            Some(n) => Ok(n),
            None => recommended_nmax(p),
        }
    }

    /// Certified `|α⟩ ⊗ |PCSVS⟩` and the heralding probability.
    pub fn input_state(&self, p: &SystemParams) -> Result<(TwoModeState, f64)> {
        let n_max = self.resolve_nmax(p)?;
        let (input, prob) = input_state_uncertified(p, n_max)?;
        Ok((input.certify()?, prob))
    }

    pub fn pcsvs(&self, p: &SystemParams) -> Result<(SingleModeState, f64)> {
        prepare_pcsvs(p, self.resolve_nmax(p)?)
    }

    /// State after the first splitter together with the cached splitters.
    pub fn after_first(&self, p: &SystemParams) -> Result<(TwoModeState, Arc<MziUnitaries>)> {
        let (input, _) = self.input_state(p)?;
        let u = mzi_unitaries(input.n_max());
        Ok((u.first.apply(&input)?, u))
    }

    pub fn output(&self, p: &SystemParams, phi: f64) -> Result<TwoModeState> {
        let (mid, u) = self.after_first(p)?;
        u.finish(&mid, phi)
    }

    fn internal_parity(mid: &TwoModeState, u: &MziUnitaries, phi: f64, t: f64) -> Result<f64> {
        let mut s = mid.clone();
        s.apply_phase_b(phi);
        let mixed = apply_loss_channel(&s, t)?.map(|b| u.second.apply(b))?;
        Ok(mixed.parity_b())
    }

    fn lossy_parity_at(mid: &TwoModeState, u: &MziUnitaries, phi: f64, channel: LossChannel, t: f64) -> Result<f64> {
        match channel {
            LossChannel::External => Ok(parity_after_external_loss(&u.finish(mid, phi)?, t)),
            LossChannel::Internal => Self::internal_parity(mid, u, phi, t),
        }
    }
}

impl PhaseEngine for FockOracle {
    fn name(&self) -> &'static str {
        "oracle"
    }

    fn success_probability(&self, p: &SystemParams) -> Result<f64> {
        Ok(self.pcsvs(p)?.1)
    }

    fn mean_photon_b(&self, p: &SystemParams) -> Result<f64> {
        Ok(self.pcsvs(p)?.0.mean_photons())
    }

    fn parity_deficit(&self, p: &SystemParams, phi: f64) -> Result<f64> {
        Ok(parity_deficit_b(&self.output(p, phi)?))
    }

    fn sensitivity(&self, p: &SystemParams, phi: f64) -> Result<f64> {
        ideal::check_phase(phi)?;
        let (mid, u) = self.after_first(p)?;
        let deficit = |x: f64| -> Result<f64> { Ok(parity_deficit_b(&u.finish(&mid, x)?)) };
        Ok(sensitivity_from_deficit(deficit, phi)?.sensitivity)
    }

    fn parity_lossy(&self, p: &SystemParams, phi: f64, channel: LossChannel, t: f64) -> Result<f64> {
        check_transmissivity("t", t)?;
        let (mid, u) = self.after_first(p)?;
        Self::lossy_parity_at(&mid, &u, phi, channel, t)
    }

    fn sensitivity_lossy(&self, p: &SystemParams, phi: f64, channel: LossChannel, t: f64) -> Result<f64> {
        check_transmissivity("t", t)?;
        if t == 1.0 {
            return self.sensitivity(p, phi);
        }
        ideal::check_phase(phi)?;
        let (mid, u) = self.after_first(p)?;
        let signal = |x: f64| Self::lossy_parity_at(&mid, &u, x, channel, t);
        Ok(sensitivity_from_signal(signal, phi)?.sensitivity)
    }

    fn qfi(&self, p: &SystemParams) -> Result<f64> {
        let (mid, _) = self.after_first(p)?;
        Ok(4.0 * number_moments_b(&mid).1)
    }

    fn qcrb(&self, p: &SystemParams) -> Result<f64> {
        bound_from_fisher(self.qfi(p)?)
    }

    fn qfi_lossy(&self, p: &SystemParams, t: f64) -> Result<f64> {
        check_transmissivity("t", t)?;
        let (mid, _) = self.after_first(p)?;
        kraus_fisher_minimum(&mid, t)
    }
}
