//! Truncated power series and the transform algebra linking moments to the
//! R- and S-transforms.
//!
//! Conventions:
//! - `R(z) = K(z) - 1/z = Σ_{n≥1} k_n z^{n-1}` where `K` is the functional
//!   inverse of the Cauchy transform and `k_n` are free cumulants.
//! - `ψ(z) = Σ_{k≥1} m_k z^k` and `S(z) = (1 + z)/z · ψ⁻¹(z)`.
//! - The shifted transform `zR(z) = zK(z) - 1` is the compositional inverse
//!   of `zS(z)`; [`s_from_r`] and [`r_from_s`] go through it.
//!
//! A moment sequence of length `M` yields cumulants `k_1..k_M`, an R-series of
//! order `M - 1` and an S-series of order `M - 1`, and back.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_ORDER: usize = 12;
pub const MIN_ORDER: usize = 4;
pub const MAX_ORDER: usize = 24;

/// Checks a user-facing truncation order against the supported range.
pub fn validate_order(order: usize) -> Result<usize> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&order) {
        return Err(Error::range("order", order, "4..=24"));
    }
    Ok(order)
}

/// Coefficients `c_0..c_M` of a power series known up to `z^M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct TruncatedSeries {
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    coeffs: Vec<f64>,
}

impl TryFrom<SeriesRepr> for TruncatedSeries {
    type Error = Error;

    fn try_from(r: SeriesRepr) -> Result<Self> {
        if r.coeffs.len() != r.order + 1 {
            return Err(Error::Parse(format!(
                "series of order {} needs {} coefficients, got {}",
                r.order,
                r.order + 1,
                r.coeffs.len()
            )));
        }
        TruncatedSeries::new(r.coeffs)
    }
}

impl From<TruncatedSeries> for SeriesRepr {
    fn from(s: TruncatedSeries) -> Self {
        SeriesRepr {
            order: s.order(),
            coeffs: s.coeffs,
        }
    }
}

impl TruncatedSeries {
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::invalid("a series needs at least c_0"));
        }
        Ok(TruncatedSeries { coeffs })
    }

    pub fn zero(order: usize) -> Self {
        TruncatedSeries {
            coeffs: vec![0.0; order + 1],
        }
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.coeffs[0] = c;
        s
    }

    /// The series `z`.
    pub fn identity(order: usize) -> Self {
        let mut s = Self::zero(order);
        if order >= 1 {
            s.coeffs[1] = 1.0;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// Coefficient of `z^k`, zero beyond the order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let order = order.min(self.order());
        TruncatedSeries {
            coeffs: self.coeffs[..=order].to_vec(),
        }
    }

    pub fn scale(&self, a: f64) -> Self {
        TruncatedSeries {
            coeffs: self.coeffs.iter().map(|c| c * a).collect(),
        }
    }

    /// `f(a z)`.
    pub fn dilate(&self, a: f64) -> Self {
        let mut p = 1.0;
        TruncatedSeries {
            coeffs: self
                .coeffs
                .iter()
                .map(|c| {
                    let v = c * p;
                    p *= a;
                    v
                })
                .collect(),
        }
    }

    /// `z f(z)`; known one order further.
    pub fn mul_z(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(0.0);
        coeffs.extend_from_slice(&self.coeffs);
        TruncatedSeries { coeffs }
    }

    /// `f(z) / z`; requires `c_0 = 0` and loses one order.
    pub fn div_z(&self) -> Result<Self> {
        if self.coeffs[0] != 0.0 {
            return Err(Error::Undefined("division by z needs c_0 = 0".into()));
        }
        if self.order() == 0 {
            return Err(Error::invalid("series of order 0 cannot be divided by z"));
        }
        Ok(TruncatedSeries {
            coeffs: self.coeffs[1..].to_vec(),
        })
    }

    /// Formal derivative, known to order `M - 1`.
    pub fn derivative(&self) -> Self {
        if self.order() == 0 {
            return Self::zero(0);
        }
        TruncatedSeries {
            coeffs: self.coeffs[1..]
                .iter()
                .enumerate()
                .map(|(k, c)| (k + 1) as f64 * c)
                .collect(),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
    }

    /// `1 / f`; requires `c_0 ≠ 0`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 == 0.0 {
            return Err(Error::Undefined("reciprocal of a series with zero constant term".into()));
        }
        let m = self.order();
        let mut out = vec![0.0; m + 1];
        out[0] = 1.0 / c0;
        for k in 1..=m {
            let s: f64 = (1..=k).map(|j| self.coeffs[j] * out[k - j]).sum();
            out[k] = -s / c0;
        }
        Ok(TruncatedSeries { coeffs: out })
    }

    /// `√f` with positive constant term; requires `c_0 > 0`.
    pub fn sqrt(&self) -> Result<Self> {
        let c0 = self.coeffs[0];
        if c0 <= 0.0 {
            return Err(Error::Undefined("square root needs a positive constant term".into()));
        }
        let m = self.order();
        let mut s = vec![0.0; m + 1];
        s[0] = c0.sqrt();
        for k in 1..=m {
            let cross: f64 = (1..k).map(|j| s[j] * s[k - j]).sum();
            s[k] = (self.coeffs[k] - cross) / (2.0 * s[0]);
        }
        Ok(TruncatedSeries { coeffs: s })
    }

    /// `f ∘ g`; requires `g(0) = 0`.
    pub fn compose(&self, g: &TruncatedSeries) -> Result<Self> {
        if g.coeffs[0] != 0.0 {
            return Err(Error::invalid("composition needs an inner series with g(0) = 0"));
        }
        let m = self.order().min(g.order());
        let g = g.truncate(m);
        let mut acc = TruncatedSeries::constant(self.coeff(m), m);
        for k in (0..m).rev() {
            acc = &acc * &g;
            acc.coeffs[0] += self.coeffs[k];
        }
        Ok(acc)
    }

    /// Compositional inverse `f⁻¹` with `f(f⁻¹(z)) = z` to the order of `f`.
    /// Requires `c_0 = 0` and `c_1 ≠ 0`.
    ///
    /// Newton iteration `g ← g - (f∘g - z) / (f'∘g)`; each step doubles the
    /// number of correct coefficients.
    pub fn revert(&self) -> Result<Self> {
        if self.coeffs[0] != 0.0 {
            return Err(Error::Undefined("reversion needs c_0 = 0".into()));
        }
        let m = self.order();
        if m == 0 || self.coeffs[1] == 0.0 {
            return Err(Error::Undefined("reversion needs c_1 ≠ 0".into()));
        }
        // f' padded back to order m; the missing top coefficient only affects
        // terms beyond z^m once multiplied by the O(z^2) Newton residual
        let mut dcoeffs = self.derivative().coeffs;
        dcoeffs.push(0.0);
        let df = TruncatedSeries { coeffs: dcoeffs };
        let id = TruncatedSeries::identity(m);
        let mut g = id.scale(1.0 / self.coeffs[1]);
        let mut correct = 2;
        while correct <= m {
            let residual = &self.compose(&g)? - &id;
            let slope = df.compose(&g)?.reciprocal()?;
            g = &g - &(&residual * &slope);
            correct *= 2;
        }
        Ok(g)
    }

    pub fn max_abs_diff(&self, other: &TruncatedSeries) -> f64 {
        let m = self.order().min(other.order());
        (0..=m)
            .map(|k| (self.coeffs[k] - other.coeffs[k]).abs())
            .fold(0.0, f64::max)
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let m = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=m).map(|k| self.coeffs[k] + rhs.coeffs[k]).collect(),
        }
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let m = self.order().min(rhs.order());
        TruncatedSeries {
            coeffs: (0..=m).map(|k| self.coeffs[k] - rhs.coeffs[k]).collect(),
        }
    }
}

impl Mul for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        let m = self.order().min(rhs.order());
        let mut out = vec![0.0; m + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(m + 1) {
            if *a == 0.0 {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate().take(m + 1 - i) {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs: out }
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(-1.0)
    }
}

/// Moments `m_1..m_M` of one variable (`m_0 = 1` is implicit).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MomentSequence(Vec<f64>);

impl MomentSequence {
    pub fn new(m: Vec<f64>) -> Self {
        MomentSequence(m)
    }

    /// `m_k`, with `m_0 = 1`. Panics past the stored order.
    pub fn m(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.0[k - 1]
        }
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn truncate(&self, order: usize) -> Self {
        MomentSequence(self.0[..order.min(self.0.len())].to_vec())
    }

    pub fn mean(&self) -> f64 {
        self.m(1)
    }

    pub fn variance(&self) -> f64 {
        self.m(2) - self.m(1) * self.m(1)
    }

    pub fn max_abs_diff(&self, other: &MomentSequence) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// Determinants of the 2×2 and 3×3 Hankel matrices `[m_{i+j}]`, which are
    /// nonnegative for a probability measure.
    pub fn hankel_minors(&self) -> Option<(f64, f64)> {
        if self.order() < 4 {
            return None;
        }
        let h = |i: usize, j: usize| self.m(i + j);
        let d2 = h(0, 0) * h(1, 1) - h(0, 1) * h(1, 0);
        let d3 = h(0, 0) * (h(1, 1) * h(2, 2) - h(1, 2) * h(2, 1))
            - h(0, 1) * (h(1, 0) * h(2, 2) - h(1, 2) * h(2, 0))
            + h(0, 2) * (h(1, 0) * h(2, 1) - h(1, 1) * h(2, 0));
        Some((d2, d3))
    }
}

/// Free cumulants `k_1..k_M`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CumulantSequence(Vec<f64>);

impl CumulantSequence {
    pub fn new(k: Vec<f64>) -> Self {
        CumulantSequence(k)
    }

    /// `k_n` for `n ≥ 1`.
    pub fn k(&self, n: usize) -> f64 {
        self.0[n - 1]
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn max_abs_diff(&self, other: &CumulantSequence) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    /// The R-series `Σ k_{i+1} z^i`.
    pub fn to_r_series(&self) -> TruncatedSeries {
        TruncatedSeries {
            coeffs: self.0.clone(),
        }
    }

    pub fn from_r_series(r: &TruncatedSeries) -> Self {
        CumulantSequence(r.coeffs.clone())
    }
}

fn need_moments(m: &MomentSequence) -> Result<()> {
    if m.order() == 0 {
        return Err(Error::invalid("at least one moment is required"));
    }
    Ok(())
}

/// R-transform coefficients `k_1..k_M` (as `c_0..c_{M-1}`) from `m_1..m_M`.
///
/// With `t = 1/z` the Cauchy transform is `g(t) = t + Σ m_k t^{k+1}`. Its
/// inverse is `t = w·h(w)`, so `K(w) = 1/(w h(w))` and `R = (1/h - 1)/w`.
pub fn moments_to_r(m: &MomentSequence) -> Result<TruncatedSeries> {
    need_moments(m)?;
    let order = m.order();
    let mut g = vec![0.0, 1.0];
    g.extend_from_slice(m.as_slice());
    let inv = TruncatedSeries::new(g)?.revert()?;
    let h = inv.div_z()?;
    let k = h.reciprocal()?;
    Ok(TruncatedSeries {
        coeffs: k.coeffs[1..=order].to_vec(),
    })
}

/// Moments `m_1..m_M` from R-coefficients `c_0..c_{M-1}`; inverse of
/// [`moments_to_r`].
pub fn r_to_moments(r: &TruncatedSeries) -> Result<MomentSequence> {
    let order = r.order() + 1;
    // w K(w) = 1 + w R(w) = 1 / h(w)
    let mut one_plus = r.mul_z();
    one_plus.coeffs[0] = 1.0;
    let h = one_plus.reciprocal()?;
    let g = h.mul_z().revert()?;
    Ok(MomentSequence(g.coeffs[2..=order + 1].to_vec()))
}

/// Free cumulants through the series route.
pub fn cumulants_via_series(m: &MomentSequence) -> Result<CumulantSequence> {
    Ok(CumulantSequence::from_r_series(&moments_to_r(m)?))
}

/// S-transform series `s_0..s_{M-1}` from `m_1..m_M`; requires `m_1 ≠ 0`.
pub fn moments_to_s(m: &MomentSequence) -> Result<TruncatedSeries> {
    need_moments(m)?;
    if m.m(1) == 0.0 {
        return Err(Error::Undefined(
            "S-transform undefined: first moment is zero, ψ cannot be inverted".into(),
        ));
    }
    let mut psi = vec![0.0];
    psi.extend_from_slice(m.as_slice());
    let inv = TruncatedSeries::new(psi)?.revert()?;
    let q = inv.div_z()?;
    let one_plus_z = one_plus_z(q.order());
    Ok(&q * &one_plus_z)
}

/// Moments `m_1..m_M` from S-coefficients `s_0..s_{M-1}`; requires `s_0 ≠ 0`.
pub fn s_to_moments(s: &TruncatedSeries) -> Result<MomentSequence> {
    if s.coeffs[0] == 0.0 {
        return Err(Error::Undefined("S-series with zero constant term".into()));
    }
    let order = s.order() + 1;
    // ψ⁻¹(z) = z S(z) / (1 + z)
    let ratio = s * &one_plus_z(s.order()).reciprocal()?;
    let psi = ratio.mul_z().revert()?;
    Ok(MomentSequence(psi.coeffs[1..=order].to_vec()))
}

/// S-series from the R-series through `(zR)⁻¹(z) = z S(z)`; requires `k_1 ≠ 0`.
pub fn s_from_r(r: &TruncatedSeries) -> Result<TruncatedSeries> {
    if r.coeffs[0] == 0.0 {
        return Err(Error::Undefined(
            "S-transform undefined: first cumulant is zero".into(),
        ));
    }
    r.mul_z().revert()?.div_z()
}

/// R-series from the S-series; inverse of [`s_from_r`].
pub fn r_from_s(s: &TruncatedSeries) -> Result<TruncatedSeries> {
    if s.coeffs[0] == 0.0 {
        return Err(Error::Undefined("S-series with zero constant term".into()));
    }
    s.mul_z().revert()?.div_z()
}

/// For a law with vanishing odd cumulants and `k_2 ≠ 0`, the power series
/// `Q(z) = z·S(z)²`, which is single-valued even though `S` itself is not.
///
/// `zR(z) = P(z²)` with `P(y) = Σ k_{2j} y^j`, and `(zS)² = P⁻¹(z)`, so
/// `Q = P⁻¹(z) / z`. Returns a series of order `⌊M/2⌋ - 1`.
pub fn symmetric_s_square(r: &TruncatedSeries) -> Result<TruncatedSeries> {
    let cumulants = &r.coeffs;
    let tol = 1e-12 * cumulants.iter().fold(1.0f64, |a, c| a.max(c.abs()));
    if cumulants.iter().step_by(2).any(|c| c.abs() > tol) {
        return Err(Error::invalid("odd cumulants must vanish for the symmetric S identity"));
    }
    let half = cumulants.len() / 2;
    if half < 2 {
        return Err(Error::invalid("need at least four cumulants"));
    }
    let mut p = vec![0.0];
    p.extend((1..=half).map(|j| cumulants[2 * j - 1]));
    let pinv = TruncatedSeries::new(p)?.revert()?;
    pinv.div_z()
}

fn one_plus_z(order: usize) -> TruncatedSeries {
    let mut s = TruncatedSeries::constant(1.0, order);
    if order >= 1 {
        s.coeffs[1] = 1.0;
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn series(c: &[f64]) -> TruncatedSeries {
        TruncatedSeries::new(c.to_vec()).unwrap()
    }

    fn catalan_moments(order: usize) -> MomentSequence {
        // semicircle: m_{2k} = C_k, odd moments vanish
        let c = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0, 429.0, 1430.0, 4862.0, 16796.0, 58786.0, 208012.0];
        MomentSequence::new((1..=order).map(|k| if k % 2 == 0 { c[k / 2] } else { 0.0 }).collect())
    }

    #[test]
    fn arithmetic_truncates_to_min_order() {
        let a = series(&[1.0, 2.0, 3.0]);
        let b = series(&[1.0, 1.0]);
        assert_eq!((&a + &b).coeffs(), &[2.0, 3.0]);
        assert_eq!((&a * &b).coeffs(), &[1.0, 3.0]);
        assert_eq!((&a - &a).coeffs(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn reciprocal_of_one_minus_z() {
        let r = series(&[1.0, -1.0, 0.0, 0.0, 0.0]).reciprocal().unwrap();
        assert_eq!(r.coeffs(), &[1.0; 5]);
        assert!(series(&[0.0, 1.0]).reciprocal().is_err());
    }

    #[test]
    fn revert_identity_and_catalan() {
        let id = TruncatedSeries::identity(8);
        assert_eq!(id.revert().unwrap(), id);
        // (z + z²)⁻¹ has signed Catalan coefficients
        let mut c = vec![0.0; 9];
        c[1] = 1.0;
        c[2] = 1.0;
        let inv = series(&c).revert().unwrap();
        let expected = [0.0, 1.0, -1.0, 2.0, -5.0, 14.0, -42.0, 132.0, -429.0];
        assert!(inv.max_abs_diff(&series(&expected)) < 1e-12);
        let back = series(&c).compose(&inv).unwrap();
        assert!(back.max_abs_diff(&TruncatedSeries::identity(8)) < 1e-12);
        assert!(series(&[1.0, 1.0]).revert().is_err());
        assert!(series(&[0.0, 0.0, 1.0]).revert().is_err());
    }

    #[test]
    fn compose_with_zero_is_constant() {
        let f = series(&[3.0, 1.0, 4.0, 1.0]);
        let g = TruncatedSeries::zero(3);
        assert_eq!(f.compose(&g).unwrap(), TruncatedSeries::constant(3.0, 3));
        assert!(f.compose(&series(&[1.0, 1.0, 0.0, 0.0])).is_err());
    }

    #[test]
    fn sqrt_squares_back() {
        let f = series(&[4.0, 1.0, -2.0, 0.5, 3.0]);
        let s = f.sqrt().unwrap();
        assert!((&s * &s).max_abs_diff(&f) < 1e-14);
    }

    #[test]
    fn semicircle_r_is_z() {
        let r = moments_to_r(&catalan_moments(12)).unwrap();
        assert_eq!(r.order(), 11);
        let mut expected = vec![0.0; 12];
        expected[1] = 1.0;
        assert!(r.max_abs_diff(&series(&expected)) < 1e-10);
        let m = r_to_moments(&r).unwrap();
        assert!(m.max_abs_diff(&catalan_moments(12)) < 1e-9);
    }

    #[test]
    fn point_mass_r_is_constant() {
        let x: f64 = 1.7;
        let m = MomentSequence::new((1..=8).map(|k| x.powi(k)).collect());
        let r = moments_to_r(&m).unwrap();
        let mut expected = vec![0.0; 8];
        expected[0] = x;
        assert!(r.max_abs_diff(&series(&expected)) < 1e-9);
    }

    #[test]
    fn free_poisson_r_and_s() {
        // R(z) = λ/(1-z) for λ = 1 gives Catalan moments C_1, C_2, ...
        let r = series(&[1.0; 8]);
        let m = r_to_moments(&r).unwrap();
        let expected = [1.0, 2.0, 5.0, 14.0, 42.0, 132.0, 429.0, 1430.0];
        assert!(m.max_abs_diff(&MomentSequence::new(expected.to_vec())) < 1e-9);
        // S = 1/(1+z)
        let s = moments_to_s(&m).unwrap();
        let alt: Vec<f64> = (0..8).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        assert!(s.max_abs_diff(&series(&alt)) < 1e-9);
        let back = s_to_moments(&s).unwrap();
        assert!(back.max_abs_diff(&m) < 1e-9);
    }

    #[test]
    fn bernoulli_s_transform() {
        let p = 0.3;
        let m = MomentSequence::new(vec![p; 10]);
        let s = moments_to_s(&m).unwrap();
        // (1+z)/(p+z) = (1/p)(1+z) Σ (-z/p)^k
        let geo = series(&(0..10).map(|k| (-1.0 / p).powi(k) / p).collect::<Vec<_>>());
        let expected = &geo * &series(&[1.0, 1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(s.max_abs_diff(&expected) < 1e-6 * expected.coeff(9).abs());
    }

    #[test]
    fn delta_one_s_is_one() {
        let m = MomentSequence::new(vec![1.0; 8]);
        let s = moments_to_s(&m).unwrap();
        assert!(s.max_abs_diff(&TruncatedSeries::constant(1.0, 7)) < 1e-12);
        assert_eq!(s_to_moments(&TruncatedSeries::constant(1.0, 7)).unwrap(), m);
    }

    #[test]
    fn zero_mean_has_no_s() {
        assert!(matches!(
            moments_to_s(&catalan_moments(6)),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn r_s_bridge_free_poisson() {
        let lambda = 2.0;
        let r = series(&[lambda; 10]);
        let s = s_from_r(&r).unwrap();
        let expected: Vec<f64> = (0..10).map(|k| (-1.0f64).powi(k) / lambda.powi(k + 1)).collect();
        assert!(s.max_abs_diff(&series(&expected)) < 1e-12);
        assert!(r_from_s(&s).unwrap().max_abs_diff(&r) < 1e-10);
    }

    #[test]
    fn symmetric_identities() {
        // semicircle: z S² = 1
        let r = moments_to_r(&catalan_moments(12)).unwrap();
        let q = symmetric_s_square(&r).unwrap();
        assert!(q.max_abs_diff(&TruncatedSeries::constant(1.0, q.order())) < 1e-10);
        // symmetric Bernoulli: z S² = 1 + z
        let bern = MomentSequence::new((1..=12).map(|k| if k % 2 == 0 { 1.0 } else { 0.0 }).collect());
        let q = symmetric_s_square(&moments_to_r(&bern).unwrap()).unwrap();
        let mut expected = vec![0.0; q.order() + 1];
        expected[0] = 1.0;
        expected[1] = 1.0;
        assert!(q.max_abs_diff(&series(&expected)) < 1e-10);
    }

    #[test]
    fn serde_carries_order() {
        let s = series(&[1.0, 2.0]);
        let json = serde_json::to_string(&s).unwrap();
        assert_eq!(json, r#"{"order":1,"coeffs":[1.0,2.0]}"#);
        let back: TruncatedSeries = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert!(serde_json::from_str::<TruncatedSeries>(r#"{"order":3,"coeffs":[1.0]}"#).is_err());
    }

    #[test]
    fn scaling_moves_r_and_s() {
        // law of X: free Poisson with rate 2, so R has no vanishing terms
        let base = r_to_moments(&series(&[2.0; 10])).unwrap();
        let r = moments_to_r(&base).unwrap();
        let s = moments_to_s(&base).unwrap();
        for a in [2.0f64, 1.0 / 3.0] {
            let scaled = MomentSequence::new((1..=10).map(|k| a.powi(k as i32) * base.m(k)).collect());
            let ra = moments_to_r(&scaled).unwrap();
            for k in 0..=r.order() {
                let want = a.powi(k as i32 + 1) * r.coeff(k);
                assert!((ra.coeff(k) - want).abs() < 1e-9 * want.abs().max(1.0), "a = {a}, k = {k}");
            }
            let sa = moments_to_s(&scaled).unwrap();
            assert!(sa.max_abs_diff(&s.scale(1.0 / a)) < 1e-9 * a.max(1.0 / a), "a = {a}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        // order 8: at order 12 the inverse of e.g. 0.5z + z² has coefficients
        // near 1e13 and reverting back loses about 1e-8 to cancellation
        #[test]
        fn revert_twice_is_identity(
            c1 in 0.5f64..2.0,
            rest in proptest::collection::vec(-1.0f64..1.0, 7),
        ) {
            let mut c = vec![0.0, c1];
            c.extend(rest);
            let f = series(&c);
            let back = f.revert().unwrap().revert().unwrap();
            prop_assert!(back.max_abs_diff(&f) < 1e-10, "{:?}", back.coeffs());
        }
    }
}
