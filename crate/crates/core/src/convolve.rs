//! Free additive and multiplicative convolution on truncated moment
//! sequences, compression by a free projection, ⊞-semigroups, limit theorems
//! and the growth of the support of ⊠-powers.

use num_complex::Complex64;
use serde::Serialize;

use crate::catalog::DistributionSpec;
use crate::error::{Error, Result};
use crate::series::{self, CumulantSequence, MomentSequence, TruncatedSeries};

/// Moments and free cumulants of a computed law, with a trail of the
/// operations that produced it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvolutionResult {
    pub moments: MomentSequence,
    pub cumulants: CumulantSequence,
    pub provenance: Vec<String>,
}

impl ConvolutionResult {
    fn from_moments(moments: MomentSequence, provenance: Vec<String>) -> Result<Self> {
        let cumulants = series::cumulants_via_series(&moments)?;
        Ok(ConvolutionResult {
            moments,
            cumulants,
            provenance,
        })
    }

    fn from_cumulants(cumulants: CumulantSequence, provenance: Vec<String>) -> Result<Self> {
        let moments = series::r_to_moments(&cumulants.to_r_series())?;
        Ok(ConvolutionResult {
            moments,
            cumulants,
            provenance,
        })
    }

    /// `max |m - moments(cumulants)|`, the consistency residual.
    pub fn residual(&self) -> Result<f64> {
        let back = series::r_to_moments(&self.cumulants.to_r_series())?;
        Ok(back.max_abs_diff(&self.moments))
    }
}

fn take(m: &MomentSequence, order: usize, what: &str) -> Result<MomentSequence> {
    if order == 0 {
        return Err(Error::invalid("order must be at least 1"));
    }
    if m.order() < order {
        return Err(Error::invalid(format!(
            "{what} has {} moments, order {order} requested",
            m.order()
        )));
    }
    Ok(m.truncate(order))
}

fn cumulants_of(m: &MomentSequence, order: usize, what: &str) -> Result<CumulantSequence> {
    series::cumulants_via_series(&take(m, order, what)?)
}

/// `μ ⊞ ν` through `R_{μ⊞ν} = R_μ + R_ν`; returns `order` moments.
pub fn free_add(a: &MomentSequence, b: &MomentSequence, order: usize) -> Result<ConvolutionResult> {
    let ka = cumulants_of(a, order, "first argument")?;
    let kb = cumulants_of(b, order, "second argument")?;
    let k = ka.as_slice().iter().zip(kb.as_slice()).map(|(x, y)| x + y).collect();
    ConvolutionResult::from_cumulants(CumulantSequence::new(k), vec!["free_add".into()])
}

/// `μ ⊠ ν` through `S_{μ⊠ν} = S_μ S_ν`; both means must be nonzero.
pub fn free_mul(a: &MomentSequence, b: &MomentSequence, order: usize) -> Result<ConvolutionResult> {
    let sa = series::moments_to_s(&take(a, order, "first argument")?)?;
    let sb = series::moments_to_s(&take(b, order, "second argument")?)?;
    let m = series::s_to_moments(&(&sa * &sb))?;
    ConvolutionResult::from_moments(m, vec!["free_mul".into()])
}

fn check_t(t: f64) -> Result<()> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::range("t", t, "(0, 1]"));
    }
    Ok(())
}

/// The law of `P A P` inside the compressed algebra with normalized trace
/// `τ/t`, where `P` is a projection of trace `t` free from `A`:
/// `k̃_n = t^{n-1} k_n(A)`.
pub fn compress_rescaled(a: &MomentSequence, t: f64, order: usize) -> Result<ConvolutionResult> {
    check_t(t)?;
    let k = cumulants_of(a, order, "argument")?;
    let scaled = k
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, c)| c * t.powi(i as i32))
        .collect();
    ConvolutionResult::from_cumulants(CumulantSequence::new(scaled), vec![format!("compress_rescaled(t={t})")])
}

/// The law of `P A P` under the original trace, which carries an extra atom
/// of mass `1 - t` at zero.
///
/// When `m_1 ≠ 0` this is `μ ⊠ Bernoulli(t)`, i.e. `S_A(z)(1 + z)/(t + z)`.
/// Otherwise the S-transform does not exist and the moments are taken as
/// `t` times the rescaled moments.
pub fn compress(a: &MomentSequence, t: f64, order: usize) -> Result<ConvolutionResult> {
    check_t(t)?;
    let a = take(a, order, "argument")?;
    if a.mean() != 0.0 {
        let bern = MomentSequence::new(vec![t; order]);
        let mut r = free_mul(&a, &bern, order)?;
        r.provenance = vec![format!("compress(t={t}, route=S)")];
        return Ok(r);
    }
    let rescaled = compress_rescaled(&a, t, order)?;
    let m = rescaled.moments.as_slice().iter().map(|x| t * x).collect();
    ConvolutionResult::from_moments(MomentSequence::new(m), vec![format!("compress(t={t}, route=trace)")])
}

/// `μ_t` with `R_t = t R`, i.e. free cumulants scaled by `t ≥ 0`; for integer
/// `t` this is the `t`-fold free additive power.
pub fn semigroup_mu_t(a: &MomentSequence, t: f64, order: usize) -> Result<ConvolutionResult> {
    if !(t >= 0.0 && t.is_finite()) {
        return Err(Error::range("t", t, "[0, ∞)"));
    }
    let k = cumulants_of(a, order, "argument")?;
    let scaled = k.as_slice().iter().map(|c| c * t).collect();
    ConvolutionResult::from_cumulants(CumulantSequence::new(scaled), vec![format!("semigroup(t={t})")])
}

/// `φ(z) = α + Σ_j w_j (1 + s_j z)/(z - s_j)` for an atomic finite measure
/// `σ = Σ w_j δ_{s_j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhiRepresentation {
    alpha: f64,
    sigma: Vec<(f64, f64)>,
}

impl PhiRepresentation {
    pub fn new(alpha: f64, sigma: Vec<(f64, f64)>) -> Result<Self> {
        if !alpha.is_finite() {
            return Err(Error::invalid("alpha must be finite"));
        }
        if sigma.iter().any(|&(s, w)| !s.is_finite() || !(w >= 0.0 && w.is_finite())) {
            return Err(Error::invalid("sigma needs finite locations and nonnegative weights"));
        }
        Ok(PhiRepresentation { alpha, sigma })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> &[(f64, f64)] {
        &self.sigma
    }

    pub fn total_mass(&self) -> f64 {
        self.sigma.iter().map(|p| p.1).sum()
    }
}

pub fn phi_eval(rep: &PhiRepresentation, z: Complex64) -> Result<Complex64> {
    if z.im <= 0.0 {
        return Err(Error::invalid("phi is evaluated on the upper half-plane"));
    }
    let mut acc = Complex64::new(rep.alpha, 0.0);
    for &(s, w) in &rep.sigma {
        let d = z - s;
        if d.norm() == 0.0 {
            return Err(Error::Undefined(format!("z lies on an atom of sigma at {s}")));
        }
        acc += w * (1.0 + s * z) / d;
    }
    Ok(acc)
}

/// Free cumulants of `S_n/√n` for a sum of `n` free copies of a standardized
/// variable: `k_j n^{1 - j/2}`.
pub fn clt_scaled_cumulants(a: &MomentSequence, n: u64, order: usize) -> Result<CumulantSequence> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let a = take(a, order.max(2), "argument")?;
    if a.mean().abs() > 1e-12 || (a.m(2) - 1.0).abs() > 1e-12 {
        return Err(Error::invalid("the summand must have mean 0 and variance 1"));
    }
    let k = series::cumulants_via_series(&a)?;
    let nf = n as f64;
    Ok(CumulantSequence::new(
        k.as_slice()
            .iter()
            .take(order)
            .enumerate()
            .map(|(i, c)| c * nf.powf(1.0 - (i + 1) as f64 / 2.0))
            .collect(),
    ))
}

/// Moments of `S_n/√n`.
pub fn clt_moments(a: &MomentSequence, n: u64, order: usize) -> Result<MomentSequence> {
    series::r_to_moments(&clt_scaled_cumulants(a, n, order)?.to_r_series())
}

/// `Bernoulli(λ/n)^{⊞n}`, whose cumulants tend to `λ` as `n → ∞`.
pub fn free_poisson_limit(lambda: f64, n: u64, order: usize) -> Result<ConvolutionResult> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::range("lambda", lambda, "(0, ∞)"));
    }
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let p = lambda / n as f64;
    if p >= 1.0 {
        return Err(Error::invalid(format!("lambda/n = {p} must be below 1")));
    }
    let bern = MomentSequence::new(vec![p; order]);
    let mut r = semigroup_mu_t(&bern, n as f64, order)?;
    r.provenance = vec![format!("bernoulli({p})^⊞{n}")];
    Ok(r)
}

/// Access to `ψ` and `ψ⁻¹` of a law on `[0, L]` with mean one.
pub trait PsiInverse {
    fn psi_inverse(&self, u: f64) -> f64;
    /// `d/du log ψ⁻¹(u)`.
    fn psi_inverse_log_derivative(&self, u: f64) -> f64;
    /// `ψ(z) = Σ_{k≥1} m_k z^k` for `0 < z ≤ 1/L`.
    fn psi(&self, z: f64) -> f64;
    /// Right end `L` of the support.
    fn upper_edge(&self) -> f64;
    fn variance(&self) -> f64;
}

/// Uses `ψ⁻¹(u) = u S(u)/(1 + u)` with the closed-form S-transform.
impl PsiInverse for DistributionSpec {
    fn psi_inverse(&self, u: f64) -> f64 {
        u * self.s_eval(u).expect("closed-form S checked by the caller") / (1.0 + u)
    }

    fn psi_inverse_log_derivative(&self, u: f64) -> f64 {
        1.0 / u - 1.0 / (1.0 + u) + self.s_log_derivative(u).expect("closed-form S checked by the caller")
    }

    fn psi(&self, z: f64) -> f64 {
        // ψ(z) = G(1/z)/z - 1
        let w = 1.0 / z;
        (self.cauchy_transform(Complex64::new(w, 0.0)) * w).re - 1.0
    }

    fn upper_edge(&self) -> f64 {
        self.support().1
    }

    fn variance(&self) -> f64 {
        self.moment(2).unwrap_or(f64::NAN) - self.moment(1).unwrap_or(f64::NAN).powi(2)
    }
}

/// Critical point and support edge of `μ^{⊠n}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProductSupport {
    pub n: u64,
    /// Smallest positive root of `(log ψ⁻¹)'(u) = (1 - 1/n)/(u(1 + u))`.
    pub u_n: f64,
    /// Right end of the support of `μ^{⊠n}`.
    pub l_n: f64,
    pub l_n_over_n: f64,
    pub variance: f64,
    /// The limit `e V` of `L_n / n`.
    pub e_v: f64,
}

const BRACKET_PROBES: usize = 200;
const BRACKET_FLOOR: f64 = 1e-12;
const BRACKET_CEILING: f64 = 1e8;

/// Computes `u_n` by a log-spaced bracket search on `(1e-12, ψ(1/L)]`
/// followed by bisection, then `L_n = 1/z_n` with
/// `z_n = ((1 + u_n)/u_n)^{n-1} ψ⁻¹(u_n)^n`, evaluated in logs.
pub fn product_support<P: PsiInverse + ?Sized>(mu: &P, n: u64) -> Result<ProductSupport> {
    if n == 0 {
        return Err(Error::invalid("n must be positive"));
    }
    let variance = mu.variance();
    if !(variance > 0.0) {
        return Err(Error::invalid("the law must have positive variance"));
    }
    let l = mu.upper_edge();
    if !(l > 0.0 && l.is_finite()) {
        return Err(Error::invalid("the law needs a bounded support in [0, ∞)"));
    }
    let target = 1.0 - 1.0 / n as f64;
    let h = |u: f64| u * (1.0 + u) * mu.psi_inverse_log_derivative(u) - target;
    let u_max = {
        let v = mu.psi(1.0 / l);
        if v.is_finite() && v > 0.0 {
            v.min(BRACKET_CEILING)
        } else {
            BRACKET_CEILING
        }
    };
    let ratio = (u_max / BRACKET_FLOOR).powf(1.0 / (BRACKET_PROBES - 1) as f64);
    let mut prev = BRACKET_FLOOR;
    let mut h_prev = h(prev);
    if h_prev <= 0.0 {
        return Err(Error::Numerical("no sign change: h is not positive near zero".into()));
    }
    let mut bracket = None;
    for i in 1..BRACKET_PROBES {
        let u = if i == BRACKET_PROBES - 1 {
            u_max
        } else {
            BRACKET_FLOOR * ratio.powi(i as i32)
        };
        let hu = h(u);
        if hu == 0.0 {
            bracket = Some((u, u));
            break;
        }
        if hu < 0.0 {
            bracket = Some((prev, u));
            break;
        }
        prev = u;
        h_prev = hu;
    }
    let _ = h_prev;
    let (mut lo, mut hi) = bracket.ok_or_else(|| {
        Error::Numerical(format!("no sign change of the critical-point equation on (0, {u_max}]"))
    })?;
    while hi - lo > 1e-15 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let hm = h(mid);
        if hm == 0.0 {
            lo = mid;
            hi = mid;
        } else if hm > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let u = 0.5 * (lo + hi);
    let nf = n as f64;
    let log_z = (nf - 1.0) * ((1.0 + u) / u).ln() + nf * mu.psi_inverse(u).ln();
    let l_n = (-log_z).exp();
    Ok(ProductSupport {
        n,
        u_n: u,
        l_n,
        l_n_over_n: l_n / nf,
        variance,
        e_v: std::f64::consts::E * variance,
    })
}

/// Validates that a catalog law can be fed to [`product_support`].
pub fn product_support_spec(spec: &DistributionSpec, n: u64) -> Result<ProductSupport> {
    let mean = spec.moment(1)?;
    if (mean - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!("the law must have mean 1, has {mean}")));
    }
    if spec.support().0 < 0.0 {
        return Err(Error::invalid("the law must live on [0, ∞)"));
    }
    if spec.s_eval(0.5).is_none() || spec.s_log_derivative(0.5).is_none() {
        return Err(Error::invalid(format!("{spec} has no closed-form S-transform")));
    }
    product_support(spec, n)
}

/// Truncated `ψ` series `Σ_{k=1}^{M} m_k z^k` (constant term zero).
pub fn psi_series(m: &MomentSequence) -> TruncatedSeries {
    let mut c = vec![0.0];
    c.extend_from_slice(m.as_slice());
    TruncatedSeries::new(c).expect("nonempty")
}
