//! Truncated bivariate formal power series in two commuting variables `τ`, `τ₁`.
//!
//! A [`BiSeries`] of order `m` stores the coefficients of `τ^j τ₁^k` for
//! `0 ≤ j, k ≤ m` and drops everything else. Every closed-form expectation
//! value in this crate has the shape "differentiate `m` times in each variable
//! and set both to zero", which is exactly [`BiSeries::coeff_mm`] up to the
//! `(m!)²` factor it already includes.
//!
//! Elementary functions (`recip`, `pow_real`, `exp`, `ln`, ...) are computed by
//! splitting a series into its constant term and a nilpotent remainder `n`.
//! Since `n` has no constant term, `n^k` vanishes at this truncation for every
//! `k > 2m`, so each Taylor expansion around the constant term is a finite sum.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Constant terms with magnitude below this are treated as zero by `recip` and friends.
const SINGULAR_FLOOR: f64 = 1e-300;

#[derive(Clone, PartialEq)]
pub struct BiSeries {
    order: usize,
    coeffs: Vec<Complex64>,
}

impl BiSeries {
    pub fn zero(order: usize) -> Self {
        Self {
            order,
            coeffs: vec![Complex64::new(0.0, 0.0); (order + 1) * (order + 1)],
        }
    }

    pub fn constant(order: usize, value: impl Into<Complex64>) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = value.into();
        s
    }

    pub fn one(order: usize) -> Self {
        Self::constant(order, 1.0)
    }

    /// The formal variable `τ`. At order 0 it truncates to zero.
    pub fn tau(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order > 0 {
            s.set(1, 0, Complex64::new(1.0, 0.0));
        }
        s
    }

    /// The formal variable `τ₁`.
    pub fn tau1(order: usize) -> Self {
        Self::tau(order).transpose()
    }

    /// Builds a series from a coefficient function `(j, k) -> c_jk`.
    pub fn from_fn(order: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut s = Self::zero(order);
        for j in 0..=order {
            for k in 0..=order {
                s.set(j, k, f(j, k));
            }
        }
        s
    }

    /// Row-major coefficients, entry `j * (order + 1) + k` holding `τ^j τ₁^k`.
    pub fn from_coeffs(order: usize, coeffs: Vec<Complex64>) -> Result<Self> {
        let expected = (order + 1) * (order + 1);
        if coeffs.len() != expected {
            return Err(Error::domain(format!(
                "coefficient grid has {} entries, expected {expected} for order {order}",
                coeffs.len()
            )));
        }
        Ok(Self { order, coeffs })
    }

    /// Polynomial in `τ` alone: `poly[j]` is the coefficient of `τ^j`; higher terms are dropped.
    pub fn poly_tau(order: usize, poly: &[f64]) -> Self {
        let mut s = Self::zero(order);
        for (j, &c) in poly.iter().enumerate().take(order + 1) {
            s.set(j, 0, Complex64::new(c, 0.0));
        }
        s
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    fn idx(&self, j: usize, k: usize) -> usize {
        j * (self.order + 1) + k
    }

    /// Coefficient of `τ^j τ₁^k`; zero outside the stored grid.
    pub fn coeff(&self, j: usize, k: usize) -> Complex64 {
        if j > self.order || k > self.order {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[self.idx(j, k)]
    }

    fn set(&mut self, j: usize, k: usize, v: Complex64) {
        let i = self.idx(j, k);
        self.coeffs[i] = v;
    }

    pub fn constant_term(&self) -> Complex64 {
        self.coeffs[0]
    }

    /// Swaps the roles of `τ` and `τ₁`.
    pub fn transpose(&self) -> Self {
        Self::from_fn(self.order, |j, k| self.coeff(k, j))
    }

    /// Largest coefficient difference between `self` and its transpose.
    pub fn asymmetry(&self) -> f64 {
        let t = self.transpose();
        self.coeffs
            .iter()
            .zip(&t.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.order, other.order, "order mismatch in max_abs_diff");
        self.coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    fn check_order(&self, other: &Self) -> Result<()> {
        if self.order != other.order {
            return Err(Error::OrderMismatch {
                left: self.order,
                right: other.order,
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            order: self.order,
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let coeffs = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .map(|(a, b)| a - b)
            .collect();
        Ok(Self {
            order: self.order,
            coeffs,
        })
    }

    /// Truncated Cauchy product.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_order(other)?;
        let n = self.order + 1;
        let mut out = Self::zero(self.order);
        for p in 0..n {
            for q in 0..n {
                let a = self.coeffs[p * n + q];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                for j in p..n {
                    let row_b = (j - p) * n;
                    let row_o = j * n;
                    for k in q..n {
                        out.coeffs[row_o + k] += a * other.coeffs[row_b + k - q];
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: impl Into<Complex64>) -> Self {
        let c = c.into();
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a * c).collect(),
        }
    }

    pub fn add_scalar(&self, c: impl Into<Complex64>) -> Self {
        let mut s = self.clone();
        s.coeffs[0] += c.into();
        s
    }

    /// Complex conjugate of every coefficient.
    pub fn conj(&self) -> Self {
        Self {
            order: self.order,
            coeffs: self.coeffs.iter().map(|a| a.conj()).collect(),
        }
    }

    /// The series with its constant term removed.
    fn nilpotent(&self) -> Self {
        let mut s = self.clone();
        s.coeffs[0] = Complex64::new(0.0, 0.0);
        s
    }

    /// Highest power of a nilpotent series that survives truncation.
    fn nil_degree(&self) -> usize {
        2 * self.order
    }

    /// `Σ_k taylor[k] · n^k` by Horner's rule, for nilpotent `n`.
    fn compose_nilpotent(n: &Self, taylor: &[Complex64]) -> Self {
        let mut acc = Self::zero(n.order);
        for &c in taylor.iter().rev() {
            acc = &acc * n;
            acc.coeffs[0] += c;
        }
        acc
    }

    fn check_invertible(c: Complex64) -> Result<()> {
        if !(c.norm() > SINGULAR_FLOOR) || !c.is_finite() {
            return Err(Error::SingularSeries(c));
        }
        Ok(())
    }

    /// Multiplicative inverse via the coefficient recurrence
    /// `r_jk = -(1/a_00) Σ_{(p,q) ≠ (0,0)} a_pq r_{j-p,k-q}`.
    pub fn recip(&self) -> Result<Self> {
        let a0 = self.constant_term();
        Self::check_invertible(a0)?;
        let inv = 1.0 / a0;
        let n = self.order + 1;
        let mut r = Self::zero(self.order);
        for j in 0..n {
            for k in 0..n {
                if j == 0 && k == 0 {
                    r.coeffs[0] = inv;
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for p in 0..=j {
                    for q in 0..=k {
                        if p == 0 && q == 0 {
                            continue;
                        }
                        acc += self.coeffs[p * n + q] * r.coeffs[(j - p) * n + (k - q)];
                    }
                }
                r.coeffs[j * n + k] = -inv * acc;
            }
        }
        Ok(r)
    }

    pub fn try_div(&self, other: &Self) -> Result<Self> {
        self.try_mul(&other.recip()?)
    }

    /// Real power `a^p = a₀^p (1 + n/a₀)^p`, with the generalized binomial
    /// series for the second factor. `a₀^p` uses the principal branch.
    pub fn pow_real(&self, p: f64) -> Result<Self> {
        let a0 = self.constant_term();
        Self::check_invertible(a0)?;
        let x = self.nilpotent().scale(1.0 / a0);
        let mut taylor = Vec::with_capacity(self.nil_degree() + 1);
        let mut binom = 1.0;
        for k in 0..=self.nil_degree() {
            taylor.push(Complex64::new(binom, 0.0));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        let lead = principal_pow(a0, p);
        Ok(Self::compose_nilpotent(&x, &taylor).scale(lead))
    }

    pub fn sqrt(&self) -> Result<Self> {
        self.pow_real(0.5)
    }

    pub fn exp(&self) -> Result<Self> {
        let a0 = self.constant_term();
        let lead = a0.exp();
        if !lead.is_finite() {
            return Err(Error::Range(format!("exp overflow at constant term {a0}")));
        }
        Ok(Self::compose_nilpotent(&self.nilpotent(), &exp_taylor(self.nil_degree())).scale(lead))
    }

    /// `exp(a) - 1`, accurate when `exp(a)` is close to one.
    pub fn expm1(&self) -> Result<Self> {
        let a0 = self.constant_term();
        let lead = a0.exp();
        if !lead.is_finite() {
            return Err(Error::Range(format!("exp overflow at constant term {a0}")));
        }
        let mut taylor = exp_taylor(self.nil_degree());
        taylor[0] = Complex64::new(0.0, 0.0);
        let mut out = Self::compose_nilpotent(&self.nilpotent(), &taylor).scale(lead);
        out.coeffs[0] = complex_expm1(a0);
        Ok(out)
    }

    /// Principal-branch logarithm.
    pub fn ln(&self) -> Result<Self> {
        let a0 = self.constant_term();
        Self::check_invertible(a0)?;
        let x = self.nilpotent().scale(1.0 / a0);
        let mut out = Self::compose_nilpotent(&x, &ln1p_taylor(self.nil_degree()));
        out.coeffs[0] = a0.ln();
        Ok(out)
    }

    /// `ln(1 + a)`, accurate when the constant term of `a` is small.
    pub fn ln1p(&self) -> Result<Self> {
        let a0 = self.constant_term();
        let base = 1.0 + a0;
        Self::check_invertible(base)?;
        let x = self.nilpotent().scale(1.0 / base);
        let mut out = Self::compose_nilpotent(&x, &ln1p_taylor(self.nil_degree()));
        out.coeffs[0] = complex_ln1p(a0);
        Ok(out)
    }

    /// `(m!)² · [τ^m τ₁^m]`, i.e. `∂^{2m} f / ∂τ^m ∂τ₁^m` at the origin.
    pub fn coeff_mm(&self) -> Complex64 {
        let m = self.order;
        let fact: f64 = (1..=m).map(|i| i as f64).product();
        self.coeff(m, m) * (fact * fact)
    }
}

fn exp_taylor(degree: usize) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(degree + 1);
    let mut c = 1.0;
    for k in 0..=degree {
        out.push(Complex64::new(c, 0.0));
        c /= k as f64 + 1.0;
    }
    out
}

/// Taylor coefficients of `ln(1 + x)`.
fn ln1p_taylor(degree: usize) -> Vec<Complex64> {
    (0..=degree)
        .map(|k| {
            if k == 0 {
                Complex64::new(0.0, 0.0)
            } else {
                let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                Complex64::new(sign / k as f64, 0.0)
            }
        })
        .collect()
}

fn principal_pow(z: Complex64, p: f64) -> Complex64 {
    if z.im == 0.0 && z.re > 0.0 {
        Complex64::new(z.re.powf(p), 0.0)
    } else {
        (z.ln() * p).exp()
    }
}

fn complex_expm1(z: Complex64) -> Complex64 {
    if z.im == 0.0 {
        Complex64::new(z.re.exp_m1(), 0.0)
    } else {
        z.exp() - 1.0
    }
}

fn complex_ln1p(z: Complex64) -> Complex64 {
    if z.im == 0.0 && z.re > -1.0 {
        Complex64::new(z.re.ln_1p(), 0.0)
    } else {
        (1.0 + z).ln()
    }
}

impl fmt::Debug for BiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        write!(f, "BiSeries[{}](", self.order)?;
        for j in 0..=self.order {
            for k in 0..=self.order {
                let c = self.coeff(j, k);
                if c.norm() == 0.0 {
                    continue;
                }
                if !first {
                    write!(f, " + ")?;
                }
                first = false;
                write!(f, "({c})τ^{j}τ₁^{k}")?;
            }
        }
        if first {
            write!(f, "0")?;
        }
        write!(f, ")")
    }
}

// Operator sugar for formula code where all operands come from one kernel.
// Mismatched orders are a programming error here and panic; use the `try_*`
// methods when orders are not known to agree.

impl Add for &BiSeries {
    type Output = BiSeries;
    fn add(self, rhs: &BiSeries) -> BiSeries {
        self.try_add(rhs).expect("BiSeries addition")
    }
}

impl Sub for &BiSeries {
    type Output = BiSeries;
    fn sub(self, rhs: &BiSeries) -> BiSeries {
        self.try_sub(rhs).expect("BiSeries subtraction")
    }
}

impl Mul for &BiSeries {
    type Output = BiSeries;
    fn mul(self, rhs: &BiSeries) -> BiSeries {
        self.try_mul(rhs).expect("BiSeries multiplication")
    }
}

impl Neg for &BiSeries {
    type Output = BiSeries;
    fn neg(self) -> BiSeries {
        self.scale(-1.0)
    }
}

impl Mul<f64> for &BiSeries {
    type Output = BiSeries;
    fn mul(self, rhs: f64) -> BiSeries {
        self.scale(rhs)
    }
}

impl Mul<Complex64> for &BiSeries {
    type Output = BiSeries;
    fn mul(self, rhs: Complex64) -> BiSeries {
        self.scale(rhs)
    }
}

impl Add<f64> for &BiSeries {
    type Output = BiSeries;
    fn add(self, rhs: f64) -> BiSeries {
        self.add_scalar(rhs)
    }
}

impl Sub<&BiSeries> for f64 {
    type Output = BiSeries;
    fn sub(self, rhs: &BiSeries) -> BiSeries {
        (-rhs).add_scalar(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn assert_series_eq(a: &BiSeries, b: &BiSeries, tol: f64) {
        let d = a.max_abs_diff(b);
        assert!(d <= tol, "series differ by {d:e}\n  {a:?}\n  {b:?}");
    }

    #[test]
    fn add_examples() {
        let t = BiSeries::tau(2);
        let t1 = BiSeries::tau1(2);
        let lhs = &t.add_scalar(1.0) + &t1.add_scalar(1.0);
        let rhs = &(&t + &t1) + 2.0;
        assert_series_eq(&lhs, &rhs, 0.0);

        let a = BiSeries::from_fn(2, |j, k| c((j * 3 + k) as f64));
        assert_series_eq(&(&a + &BiSeries::zero(2)), &a, 0.0);

        let tt = &t * &t1;
        assert_series_eq(&(&tt + &tt), &tt.scale(2.0), 0.0);
    }

    #[test]
    fn mul_examples() {
        let t = BiSeries::tau(2);
        let t1 = BiSeries::tau1(2);
        let prod = &t.add_scalar(1.0) * &t1.add_scalar(1.0);
        assert_eq!(prod.coeff(0, 0), c(1.0));
        assert_eq!(prod.coeff(1, 0), c(1.0));
        assert_eq!(prod.coeff(0, 1), c(1.0));
        assert_eq!(prod.coeff(1, 1), c(1.0));
        assert_eq!(prod.coeff(2, 2), c(0.0));

        let a = BiSeries::from_fn(2, |j, k| Complex64::new(j as f64 - 0.5, k as f64));
        assert_series_eq(&(&a * &BiSeries::one(2)), &a, 0.0);

        // τ² is dropped at order 1
        let t = BiSeries::tau(1).add_scalar(1.0);
        let sq = &t * &t;
        assert_eq!(sq.coeff(0, 0), c(1.0));
        assert_eq!(sq.coeff(1, 0), c(2.0));
    }

    #[test]
    fn order_mismatch_is_an_error() {
        let a = BiSeries::one(1);
        let b = BiSeries::one(2);
        assert!(matches!(
            a.try_add(&b),
            Err(Error::OrderMismatch { left: 1, right: 2 })
        ));
        assert!(matches!(a.try_mul(&b), Err(Error::OrderMismatch { .. })));
    }

    #[test]
    fn recip_examples() {
        let g = (1.0 - &BiSeries::tau(3)).recip().unwrap();
        for j in 0..=3 {
            assert_abs_diff_eq!(g.coeff(j, 0).re, 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(g.coeff(j, 1).norm(), 0.0);
        }
        let two = BiSeries::constant(2, 2.0).recip().unwrap();
        assert_eq!(two.coeff(0, 0), c(0.5));

        let a = BiSeries::from_fn(3, |j, k| Complex64::new(1.0 + 0.3 * j as f64, 0.2 * k as f64));
        assert_series_eq(&a.recip().unwrap().recip().unwrap(), &a, 1e-12);
    }

    #[test]
    fn recip_rejects_zero_constant() {
        assert!(matches!(
            BiSeries::tau(2).recip(),
            Err(Error::SingularSeries(_))
        ));
        assert!(matches!(
            BiSeries::tau(2).pow_real(-0.5),
            Err(Error::SingularSeries(_))
        ));
    }

    #[test]
    fn central_binomial_from_inverse_sqrt() {
        let u = &BiSeries::tau(2) * &BiSeries::tau1(2);
        let s = (1.0 - &u.scale(4.0)).pow_real(-0.5).unwrap();
        assert_abs_diff_eq!(s.coeff(0, 0).re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coeff(1, 1).re, 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(s.coeff(2, 2).re, 6.0, epsilon = 1e-13);
        assert_abs_diff_eq!(s.coeff(1, 0).norm(), 0.0);
        assert_abs_diff_eq!(s.coeff(2, 1).norm(), 0.0);
    }

    #[test]
    fn pow_identity_and_inverse() {
        let a = BiSeries::from_fn(3, |j, k| Complex64::new(0.7 + 0.1 * (j + 2 * k) as f64, 0.05 * j as f64));
        assert_series_eq(&a.pow_real(1.0).unwrap(), &a, 1e-14);
        let inv = a.pow_real(-1.0).unwrap();
        let rec = a.recip().unwrap();
        let scale = rec.coeffs.iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(inv.max_abs_diff(&rec) <= 1e-14 * scale);
    }

    #[test]
    fn exp_examples() {
        let z = BiSeries::zero(2).exp().unwrap();
        assert_series_eq(&z, &BiSeries::one(2), 0.0);

        let e = BiSeries::tau(2).exp().unwrap();
        assert_abs_diff_eq!(e.coeff(0, 0).re, 1.0);
        assert_abs_diff_eq!(e.coeff(1, 0).re, 1.0);
        assert_abs_diff_eq!(e.coeff(2, 0).re, 0.5);

        let a = BiSeries::from_fn(3, |j, k| Complex64::new(0.3 * j as f64 - 0.2, 0.1 * k as f64));
        let prod = &a.exp().unwrap() * &(-&a).exp().unwrap();
        assert_series_eq(&prod, &BiSeries::one(3), 1e-14);
    }

    #[test]
    fn exp_overflow_is_range_error() {
        assert!(matches!(
            BiSeries::constant(1, 1000.0).exp(),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn expm1_and_ln1p_match_plain_forms() {
        let a = BiSeries::from_fn(2, |j, k| Complex64::new(1e-3 * (1 + j + k) as f64, 0.0));
        let direct = a.exp().unwrap().add_scalar(-1.0);
        assert_series_eq(&a.expm1().unwrap(), &direct, 1e-15);
        let ln = a.add_scalar(1.0).ln().unwrap();
        assert_series_eq(&a.ln1p().unwrap(), &ln, 1e-15);
        assert_series_eq(&a.ln1p().unwrap().expm1().unwrap(), &a, 1e-15);
    }

    #[test]
    fn coeff_mm_examples() {
        let t = BiSeries::tau(1);
        let t1 = BiSeries::tau1(1);
        let geo = (&(1.0 - &t) * &(1.0 - &t1)).recip().unwrap();
        assert_abs_diff_eq!(geo.coeff_mm().re, 1.0, epsilon = 1e-15);
        assert_eq!(BiSeries::one(3).coeff_mm(), c(0.0));
        // order 3: coefficient 1 times (3!)²
        let geo3 = (&(1.0 - &BiSeries::tau(3)) * &(1.0 - &BiSeries::tau1(3))).recip().unwrap();
        assert_abs_diff_eq!(geo3.coeff_mm().re, 36.0, epsilon = 1e-12);
    }

    #[test]
    fn order_zero_is_plain_complex_arithmetic() {
        let a = BiSeries::constant(0, 0.25);
        assert_eq!(BiSeries::tau(0), BiSeries::zero(0));
        assert_abs_diff_eq!(a.pow_real(-0.5).unwrap().coeff_mm().re, 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(a.exp().unwrap().coeff_mm().re, 0.25f64.exp(), epsilon = 1e-15);
    }

    fn series_strategy(order: usize) -> impl Strategy<Value = BiSeries> {
        proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), (order + 1) * (order + 1)).prop_map(
            move |v| {
                BiSeries::from_coeffs(order, v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect())
                    .unwrap()
            },
        )
    }

    fn positive_series(order: usize) -> impl Strategy<Value = BiSeries> {
        (series_strategy(order), 0.5f64..2.0).prop_map(|(mut s, c0)| {
            s.coeffs[0] = Complex64::new(c0, 0.0);
            s
        })
    }

    fn magnitude(s: &BiSeries) -> f64 {
        s.coeffs().iter().map(|z| z.norm()).fold(1.0, f64::max)
    }

    proptest! {
        #[test]
        fn ring_axioms(a in series_strategy(3), b in series_strategy(3), d in series_strategy(3)) {
            prop_assert!((&a + &b).max_abs_diff(&(&b + &a)) <= 1e-13);
            prop_assert!((&a * &b).max_abs_diff(&(&b * &a)) <= 1e-13);
            prop_assert!((&(&a + &b) + &d).max_abs_diff(&(&a + &(&b + &d))) <= 1e-13);
            prop_assert!((&(&a * &b) * &d).max_abs_diff(&(&a * &(&b * &d))) <= 1e-13);
            prop_assert!((&a * &(&b + &d)).max_abs_diff(&(&(&a * &b) + &(&a * &d))) <= 1e-13);
        }

        #[test]
        fn recip_is_inverse(a in positive_series(3)) {
            let inv = a.recip().unwrap();
            let prod = &a * &inv;
            prop_assert!((prod.constant_term() - 1.0).norm() <= 1e-15);
            prop_assert!(prod.max_abs_diff(&BiSeries::one(3)) <= 1e-13 * magnitude(&inv));
        }

        #[test]
        fn pow_adds_exponents(a in positive_series(2), p in -2.0f64..2.0, q in -2.0f64..2.0) {
            let lhs = a.pow_real(p + q).unwrap();
            let rhs = &a.pow_real(p).unwrap() * &a.pow_real(q).unwrap();
            let scale = lhs.coeffs().iter().map(|z| z.norm()).fold(1.0, f64::max);
            prop_assert!(lhs.max_abs_diff(&rhs) <= 1e-12 * scale);
        }

        #[test]
        fn coeff_mm_is_linear(a in series_strategy(3), b in series_strategy(3), x in -2.0f64..2.0, y in -2.0f64..2.0) {
            let lhs = (&a.scale(x) + &b.scale(y)).coeff_mm();
            let rhs = a.coeff_mm() * x + b.coeff_mm() * y;
            prop_assert!((lhs - rhs).norm() <= 1e-12 * (1.0 + rhs.norm()));
        }

        #[test]
        fn transpose_symmetry_is_preserved(a in positive_series(3)) {
            let s = &a + &a.transpose();
            let s = s.scale(0.5);
            prop_assert!(s.asymmetry() == 0.0);
            let t = BiSeries::tau(3);
            let t1 = BiSeries::tau1(3);
            let other = &(&s * &s) + &(&t * &t1);
            prop_assert!(other.asymmetry() <= 1e-13);
            for f in [other.recip().unwrap(), other.pow_real(-1.5).unwrap(), other.scale(0.1).exp().unwrap()] {
                prop_assert!(f.asymmetry() <= 1e-12 * magnitude(&f));
            }
        }
    }
}
