//! Passive two-mode transformations in the photon-number basis.
//!
//! A transform `U` is given by the images of the creation operators,
//! `U a† U† = u_aa a† + u_ab b†` and `U b† U† = u_ba a† + u_bb b†`. Since `U`
//! conserves total photon number it acts blockwise, one `(N+1)×(N+1)` matrix
//! per total photon number `N`.

use ndarray::Array2;
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};
use crate::oracle::state::TwoModeState;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeTransform {
    pub u_aa: Complex64,
    pub u_ab: Complex64,
    pub u_ba: Complex64,
    pub u_bb: Complex64,
}

fn re(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

impl ModeTransform {
    pub fn identity() -> Self {
        Self {
            u_aa: re(1.0),
            u_ab: re(0.0),
            u_ba: re(0.0),
            u_bb: re(1.0),
        }
    }

    /// `B(T) = exp[(a†b − ab†) arccos √T]`:
    /// `a† → √T a† − √(1−T) b†`, `b† → √(1−T) a† + √T b†`.
    pub fn beam_splitter(t: f64) -> Self {
        let (st, sr) = (t.sqrt(), (1.0 - t).max(0.0).sqrt());
        Self {
            u_aa: re(st),
            u_ab: re(-sr),
            u_ba: re(sr),
            u_bb: re(st),
        }
    }

    /// First 50:50 splitter of the interferometer, `e^{−iπJ₁/2}`.
    pub fn mzi_first() -> Self {
        let h = FRAC_1_SQRT_2;
        Self {
            u_aa: re(h),
            u_ab: Complex64::new(0.0, -h),
            u_ba: Complex64::new(0.0, -h),
            u_bb: re(h),
        }
    }

    /// Second 50:50 splitter, `e^{iπJ₁/2}`.
    pub fn mzi_second() -> Self {
        let h = FRAC_1_SQRT_2;
        Self {
            u_aa: re(h),
            u_ab: Complex64::new(0.0, h),
            u_ba: Complex64::new(0.0, h),
            u_bb: re(h),
        }
    }

    /// Apply `c_a a† + c_b b†` to a vector of block `N − 1` (indexed by `n_a`).
    fn raise(v: &[Complex64], c_a: Complex64, c_b: Complex64) -> Vec<Complex64> {
        let n = v.len();
        let mut w = vec![re(0.0); n + 1];
        for (na, &z) in v.iter().enumerate() {
            w[na + 1] += c_a * ((na + 1) as f64).sqrt() * z;
            w[na] += c_b * ((n - na) as f64).sqrt() * z;
        }
        w
    }

    pub(crate) fn raise_a(&self, v: &[Complex64]) -> Vec<Complex64> {
        Self::raise(v, self.u_aa, self.u_ab)
    }

    pub(crate) fn raise_b(&self, v: &[Complex64]) -> Vec<Complex64> {
        Self::raise(v, self.u_ba, self.u_bb)
    }

    /// `U|n_a, n_b⟩` from `U|n_a − 1, n_b⟩` and `U|n_a, n_b − 1⟩`:
    ///
    /// `N U|n_a, n_b⟩ = √n_a A† U|n_a − 1, n_b⟩ + √n_b B† U|n_a, n_b − 1⟩`,
    ///
    /// with `A†`, `B†` the images of `a†`, `b†` and `N = n_a + n_b`. Both routes
    /// are averaged rather than following one chain of raisings; the map is a
    /// contraction, so rounding errors do not grow with `N`.
    pub(crate) fn next_column(
        &self,
        na: usize,
        nb: usize,
        left: Option<&[Complex64]>,
        down: Option<&[Complex64]>,
    ) -> Vec<Complex64> {
        let total = na + nb;
        if total == 0 {
            return vec![re(1.0)];
        }
        let mut col = vec![re(0.0); total + 1];
        if na > 0 {
            let v = self.raise_a(left.expect("column n_a - 1 required"));
            let w = (na as f64).sqrt();
            col.iter_mut().zip(v).for_each(|(c, z)| *c += z * w);
        }
        if nb > 0 {
            let v = self.raise_b(down.expect("column n_b - 1 required"));
            let w = (nb as f64).sqrt();
            col.iter_mut().zip(v).for_each(|(c, z)| *c += z * w);
        }
        let scale = total as f64;
        col.iter_mut().for_each(|c| *c /= scale);
        col
    }
}

/// Block matrices of a [`ModeTransform`] up to total photon number `n_max`.
#[derive(Debug, Clone)]
pub struct BlockUnitary {
    blocks: Vec<Array2<Complex64>>,
}

impl BlockUnitary {
    pub fn new(u: &ModeTransform, n_max: usize) -> Self {
        let mut blocks = Vec::with_capacity(n_max + 1);
        blocks.push(Array2::from_elem((1, 1), re(1.0)));
        for n in 1..=n_max {
            let prev: &Array2<Complex64> = &blocks[n - 1];
            let mut block = Array2::from_elem((n + 1, n + 1), re(0.0));
            for k in 0..=n {
                let left = (k > 0).then(|| prev.column(k - 1).to_vec());
                let down = (k < n).then(|| prev.column(k).to_vec());
                let col = u.next_column(k, n - k, left.as_deref(), down.as_deref());
                for (i, z) in col.into_iter().enumerate() {
                    block[(i, k)] = z;
                }
            }
            blocks.push(block);
        }
        Self { blocks }
    }

    pub fn n_max(&self) -> usize {
        self.blocks.len() - 1
    }

    pub fn block(&self, n: usize) -> &Array2<Complex64> {
        &self.blocks[n]
    }

    /// Largest deviation of `M†M` from the identity over all blocks.
    pub fn unitarity_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for b in &self.blocks {
            let prod = b.t().mapv(|z| z.conj()).dot(b);
            for ((i, j), z) in prod.indexed_iter() {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((z - target).norm());
            }
        }
        worst
    }

    pub fn apply(&self, state: &TwoModeState) -> Result<TwoModeState> {
        let n_max = state.n_max();
        if n_max > self.n_max() {
            return Err(Error::domain(format!(
                "transform built for n_max = {} applied to a state with n_max = {n_max}",
                self.n_max()
            )));
        }
        let mut out = state.clone();
        let src = state.amps();
        let dst = out.amps_mut();
        for n in 0..=n_max {
            let v: Vec<Complex64> = (0..=n).map(|na| src[(na, n - na)]).collect();
            let block = &self.blocks[n];
            for i in 0..=n {
                let mut acc = re(0.0);
                for (k, z) in v.iter().enumerate() {
                    acc += block[(i, k)] * z;
                }
                dst[(i, n - i)] = acc;
            }
        }
        Ok(out)
    }
}

/// `B(T)` acting on the two modes of `state`.
pub fn beam_splitter_apply(state: &TwoModeState, transmissivity: f64) -> Result<TwoModeState> {
    if !(0.0..=1.0).contains(&transmissivity) {
        return Err(Error::domain(format!("transmissivity must lie in [0, 1], got {transmissivity}")));
    }
    BlockUnitary::new(&ModeTransform::beam_splitter(transmissivity), state.n_max()).apply(state)
}

/// The two 50:50 splitters of the interferometer, built once per truncation.
#[derive(Debug, Clone)]
pub struct MziUnitaries {
    pub first: BlockUnitary,
    pub second: BlockUnitary,
}

impl MziUnitaries {
    pub fn new(n_max: usize) -> Self {
        Self {
            first: BlockUnitary::new(&ModeTransform::mzi_first(), n_max),
            second: BlockUnitary::new(&ModeTransform::mzi_second(), n_max),
        }
    }

    /// `B₂ U(φ) |ψ⟩` for a state already past the first splitter.
    pub fn finish(&self, after_first: &TwoModeState, phi: f64) -> Result<TwoModeState> {
        let mut s = after_first.clone();
        s.apply_phase_b(phi);
        self.second.apply(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::state::{coherent_state, squeezed_vacuum};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_state(n_max: usize, seed: u64) -> TwoModeState {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut amps = Array2::from_elem((n_max + 1, n_max + 1), re(0.0));
        for na in 0..=n_max {
            for nb in 0..=(n_max - na) {
                amps[(na, nb)] = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
            }
        }
        let norm = amps.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        amps.mapv_inplace(|z| z / norm);
        TwoModeState::from_amps(amps, 0.0).unwrap()
    }

    #[test]
    fn blocks_are_unitary() {
        for u in [ModeTransform::beam_splitter(0.3), ModeTransform::mzi_first(), ModeTransform::mzi_second()] {
            assert!(BlockUnitary::new(&u, 120).unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn beam_splitter_examples() {
        let s = random_state(12, 7);
        let same = beam_splitter_apply(&s, 1.0).unwrap();
        assert!(same.amps().iter().zip(s.amps().iter()).all(|(a, b)| (a - b).norm() < 1e-15));

        let mut amps = Array2::from_elem((4, 4), re(0.0));
        amps[(1, 0)] = re(1.0);
        let one = TwoModeState::from_amps(amps, 0.0).unwrap();
        let out = beam_splitter_apply(&one, 0.3).unwrap();
        assert_abs_diff_eq!(out.amps()[(1, 0)].re, 0.3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(out.amps()[(0, 1)].re, -(0.7f64).sqrt(), epsilon = 1e-15);
        assert!(beam_splitter_apply(&one, 1.5).is_err());

        for seed in 0..5 {
            let s = random_state(15, seed);
            let out = beam_splitter_apply(&s, 0.37).unwrap();
            assert_abs_diff_eq!(out.norm_sqr(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn splitters_are_mutually_inverse() {
        let u = MziUnitaries::new(20);
        let s = random_state(20, 3);
        let back = u.second.apply(&u.first.apply(&s).unwrap()).unwrap();
        assert!(back.amps().iter().zip(s.amps().iter()).all(|(a, b)| (a - b).norm() < 1e-13));
    }

    #[test]
    fn first_splitter_divides_coherent_light() {
        let n_max = 40;
        let input = TwoModeState::product(&coherent_state(1.2, n_max).unwrap(), &squeezed_vacuum(0.0, n_max).unwrap())
            .unwrap();
        let out = MziUnitaries::new(n_max).first.apply(&input).unwrap();
        let (mean, var) = crate::oracle::state::number_moments_b(&out);
        assert_abs_diff_eq!(mean, 0.72, epsilon = 1e-12);
        assert_abs_diff_eq!(var, 0.72, epsilon = 1e-12);
    }
}
