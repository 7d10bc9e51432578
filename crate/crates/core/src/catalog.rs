//! Closed-form laws: densities, atoms, Cauchy transforms, moments and
//! transforms, plus quadrature-based checks and Stieltjes inversion.
//!
//! Every law is a tree of base families combined by affine maps `aX + b`
//! and finite mixtures. Quantities are evaluated recursively on that tree.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::ncpart::catalan;
use crate::series::{self, MomentSequence, TruncatedSeries};

const QUAD_TOL: f64 = 1e-11;
const QUAD_MAX_DEPTH: u32 = 48;

/// The structural description of a law.
#[derive(Clone, Debug, PartialEq)]
pub enum Law {
    /// Density `√(4 - x²)/(2π)` on `[-2, 2]`.
    Semicircle,
    /// Free Poisson law with rate `lambda` (all free cumulants equal `lambda`).
    MarchenkoPastur { lambda: f64 },
    /// `p δ_1 + (1 - p) δ_0`.
    BernoulliI { p: f64 },
    /// `(δ_1 + δ_{-1}) / 2`.
    BernoulliII,
    /// Density `1/(π√(4 - x²))` on `[-2, 2]`.
    Arcsine,
    /// Density `1/(π(1 + x²))`.
    Cauchy,
    PointMass { x: f64 },
    /// Weighted mixture; weights are positive and sum to one.
    Mixture(Vec<(f64, Law)>),
    /// The law of `a X + b`.
    Affine { a: f64, b: f64, base: Box<Law> },
}

/// A named law with its parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct DistributionSpec {
    pub name: String,
    pub params: BTreeMap<String, f64>,
    law: Law,
}

/// Canonical family names accepted by [`catalog_get`].
pub const FAMILIES: &[&str] = &[
    "semicircle",
    "marchenko-pastur",
    "bernoulli1",
    "bernoulli2",
    "arcsine",
    "cauchy",
    "point-mass",
];

fn canonical_name(name: &str) -> Option<&'static str> {
    Some(match name.to_ascii_lowercase().as_str() {
        "semicircle" | "wigner" => "semicircle",
        "marchenko-pastur" | "mp" | "free-poisson" => "marchenko-pastur",
        "bernoulli1" | "bernoulli-i" | "bernoulli" => "bernoulli1",
        "bernoulli2" | "bernoulli-ii" | "symmetric-bernoulli" => "bernoulli2",
        "arcsine" => "arcsine",
        "cauchy" => "cauchy",
        "point-mass" | "delta" | "dirac" => "point-mass",
        _ => return None,
    })
}

/// Looks up a family by name. Besides the family parameters (`lambda` for
/// the free Poisson law, `p` or `t` for Bernoulli I, `x` for a point mass),
/// every family accepts `scale` and `shift`, applied as `scale · X + shift`.
pub fn catalog_get(name: &str, params: &BTreeMap<String, f64>) -> Result<DistributionSpec> {
    let canon = canonical_name(name)
        .ok_or_else(|| Error::invalid(format!("unknown distribution {name:?}")))?;
    let allowed: &[&str] = match canon {
        "marchenko-pastur" => &["lambda"],
        "bernoulli1" => &["p", "t"],
        "point-mass" => &["x"],
        _ => &[],
    };
    for key in params.keys() {
        if !allowed.contains(&key.as_str()) && key != "scale" && key != "shift" {
            return Err(Error::invalid(format!("unknown parameter {key:?} for {canon}")));
        }
    }
    let get = |k: &str, default: Option<f64>| -> Result<f64> {
        params
            .get(k)
            .copied()
            .or(default)
            .ok_or_else(|| Error::invalid(format!("{canon} needs parameter {k}")))
    };
    let law = match canon {
        "semicircle" => Law::Semicircle,
        "marchenko-pastur" => {
            let lambda = get("lambda", Some(1.0))?;
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::range("lambda", lambda, "(0, ∞)"));
            }
            Law::MarchenkoPastur { lambda }
        }
        "bernoulli1" => {
            if params.contains_key("p") && params.contains_key("t") {
                return Err(Error::invalid("give either p or t, not both"));
            }
            let p = match params.get("t") {
                Some(&t) => {
                    if !(t > 0.0 && t <= 1.0) {
                        return Err(Error::range("t", t, "(0, 1]"));
                    }
                    t
                }
                None => {
                    let p = get("p", Some(0.5))?;
                    if !(p > 0.0 && p < 1.0) {
                        return Err(Error::range("p", p, "(0, 1)"));
                    }
                    p
                }
            };
            Law::BernoulliI { p }
        }
        "bernoulli2" => Law::BernoulliII,
        "arcsine" => Law::Arcsine,
        "cauchy" => Law::Cauchy,
        "point-mass" => {
            let x = get("x", Some(0.0))?;
            if !x.is_finite() {
                return Err(Error::range("x", x, "finite reals"));
            }
            Law::PointMass { x }
        }
        _ => unreachable!(),
    };
    let mut spec = DistributionSpec {
        name: canon.to_string(),
        params: params
            .iter()
            .filter(|(k, _)| *k != "scale" && *k != "shift")
            .map(|(k, v)| (k.clone(), *v))
            .collect(),
        law,
    };
    if let Some(&a) = params.get("scale") {
        spec = scale(&spec, a)?;
    }
    if let Some(&b) = params.get("shift") {
        spec = translate(&spec, b)?;
    }
    Ok(spec)
}

/// Parses `name[:key=value,...]`.
impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s.strip_prefix("spec:").unwrap_or(s);
        let (name, rest) = match s.split_once(':') {
            Some((n, r)) => (n, r),
            None => (s, ""),
        };
        let mut params = BTreeMap::new();
        for kv in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got {kv:?}")))?;
            let v: f64 = v
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad number {v:?} for {k}")))?;
            if params.insert(k.trim().to_string(), v).is_some() {
                return Err(Error::Parse(format!("parameter {k} given twice")));
            }
        }
        catalog_get(name, &params)
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if !self.params.is_empty() {
            let parts: Vec<String> = self.params.iter().map(|(k, v)| format!("{k}={v}")).collect();
            write!(f, ":{}", parts.join(","))?;
        }
        Ok(())
    }
}

/// `a X` for `a ≠ 0`.
pub fn scale(spec: &DistributionSpec, a: f64) -> Result<DistributionSpec> {
    if a == 0.0 || !a.is_finite() {
        return Err(Error::invalid("scale factor must be finite and nonzero"));
    }
    let law = match &spec.law {
        Law::Affine { a: a0, b, base } => Law::Affine {
            a: a * a0,
            b: a * b,
            base: base.clone(),
        },
        other => Law::Affine {
            a,
            b: 0.0,
            base: Box::new(other.clone()),
        },
    };
    let mut params = spec.params.clone();
    *params.entry("scale".into()).or_insert(1.0) *= a;
    if let Some(b) = params.get_mut("shift") {
        *b *= a;
    }
    Ok(DistributionSpec {
        name: spec.name.clone(),
        params,
        law,
    })
}

/// `X + b`.
pub fn translate(spec: &DistributionSpec, b: f64) -> Result<DistributionSpec> {
    if !b.is_finite() {
        return Err(Error::invalid("shift must be finite"));
    }
    let law = match &spec.law {
        Law::Affine { a, b: b0, base } => Law::Affine {
            a: *a,
            b: b0 + b,
            base: base.clone(),
        },
        other => Law::Affine {
            a: 1.0,
            b,
            base: Box::new(other.clone()),
        },
    };
    let mut params = spec.params.clone();
    *params.entry("shift".into()).or_insert(0.0) += b;
    Ok(DistributionSpec {
        name: spec.name.clone(),
        params,
        law,
    })
}

/// A finite mixture `Σ w_i μ_i`; weights are normalized.
pub fn mixture(parts: Vec<(f64, DistributionSpec)>) -> Result<DistributionSpec> {
    if parts.is_empty() {
        return Err(Error::invalid("mixture needs at least one component"));
    }
    if parts.iter().any(|(w, _)| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::invalid("mixture weights must be positive"));
    }
    let total: f64 = parts.iter().map(|p| p.0).sum();
    let name = format!(
        "mixture({})",
        parts
            .iter()
            .map(|(w, s)| format!("{}*{}", w / total, s))
            .collect::<Vec<_>>()
            .join(" + ")
    );
    Ok(DistributionSpec {
        name,
        params: BTreeMap::new(),
        law: Law::Mixture(parts.into_iter().map(|(w, s)| (w / total, s.law)).collect()),
    })
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

// Picks the branch of a two-valued closed form that is a Cauchy transform:
// negative imaginary part on the upper half-plane, z·G(z) → 1 otherwise.
fn nevanlinna(z: Complex64, g1: Complex64, g2: Complex64) -> Complex64 {
    if z.im > 0.0 {
        let (ok1, ok2) = (g1.im <= 0.0, g2.im <= 0.0);
        if ok1 && !ok2 {
            return g1;
        }
        if ok2 && !ok1 {
            return g2;
        }
    }
    let score = |g: Complex64| (z * g - 1.0).norm();
    if score(g1) <= score(g2) {
        g1
    } else {
        g2
    }
}

impl Law {
    fn cauchy_transform(&self, z: Complex64) -> Complex64 {
        if z.im < 0.0 {
            return self.cauchy_transform(z.conj()).conj();
        }
        match self {
            Law::Semicircle => {
                let r = (z * z - 4.0).sqrt();
                nevanlinna(z, (z - r) / 2.0, (z + r) / 2.0)
            }
            Law::MarchenkoPastur { lambda } => {
                let a = z + 1.0 - lambda;
                let r = (a * a - 4.0 * z).sqrt();
                nevanlinna(z, (a - r) / (2.0 * z), (a + r) / (2.0 * z))
            }
            Law::BernoulliI { p } => (z - (1.0 - p)) / ((z - 1.0) * z),
            Law::BernoulliII => z / (z * z - 1.0),
            Law::Arcsine => {
                let r = (z * z - 4.0).sqrt();
                nevanlinna(z, 1.0 / r, -1.0 / r)
            }
            // the lower half-plane is handled by conjugation above
            Law::Cauchy => 1.0 / (z + c(0.0, 1.0)),
            Law::PointMass { x } => 1.0 / (z - x),
            Law::Mixture(parts) => parts.iter().map(|(w, l)| *w * l.cauchy_transform(z)).sum(),
            Law::Affine { a, b, base } => base.cauchy_transform((z - b) / a) / a,
        }
    }

    fn heavy_tailed(&self) -> bool {
        match self {
            Law::Cauchy => true,
            Law::Mixture(parts) => parts.iter().any(|(_, l)| l.heavy_tailed()),
            Law::Affine { base, .. } => base.heavy_tailed(),
            _ => false,
        }
    }

    fn moment(&self, k: usize) -> f64 {
        match self {
            Law::Semicircle => {
                if k % 2 == 1 {
                    0.0
                } else {
                    catalan((k / 2) as u32).expect("order within range") as f64
                }
            }
            Law::MarchenkoPastur { lambda } => {
                // Narayana polynomial: Σ_j (1/k) C(k,j) C(k,j-1) λ^j
                if k == 0 {
                    return 1.0;
                }
                (1..=k)
                    .map(|j| binom(k, j) * binom(k, j - 1) / k as f64 * lambda.powi(j as i32))
                    .sum()
            }
            Law::BernoulliI { p } => {
                if k == 0 {
                    1.0
                } else {
                    *p
                }
            }
            Law::BernoulliII => {
                if k % 2 == 0 {
                    1.0
                } else {
                    0.0
                }
            }
            Law::Arcsine => {
                if k % 2 == 1 {
                    0.0
                } else {
                    binom(k, k / 2)
                }
            }
            Law::Cauchy => f64::NAN,
            Law::PointMass { x } => x.powi(k as i32),
            Law::Mixture(parts) => parts.iter().map(|(w, l)| w * l.moment(k)).sum(),
            Law::Affine { a, b, base } => (0..=k)
                .map(|j| binom(k, j) * a.powi(j as i32) * b.powi((k - j) as i32) * base.moment(j))
                .sum(),
        }
    }

    fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            Law::MarchenkoPastur { lambda } if *lambda < 1.0 => vec![(0.0, 1.0 - lambda)],
            Law::BernoulliI { p } => vec![(0.0, 1.0 - p), (1.0, *p)],
            Law::BernoulliII => vec![(-1.0, 0.5), (1.0, 0.5)],
            Law::PointMass { x } => vec![(*x, 1.0)],
            Law::Mixture(parts) => {
                let mut out: Vec<(f64, f64)> = Vec::new();
                for (w, l) in parts {
                    for (x, m) in l.atoms() {
                        match out.iter_mut().find(|(y, _)| *y == x) {
                            Some(e) => e.1 += w * m,
                            None => out.push((x, w * m)),
                        }
                    }
                }
                out.sort_by(|a, b| a.0.total_cmp(&b.0));
                out
            }
            Law::Affine { a, b, base } => {
                let mut out: Vec<(f64, f64)> =
                    base.atoms().into_iter().map(|(x, m)| (a * x + b, m)).collect();
                out.sort_by(|a, b| a.0.total_cmp(&b.0));
                out
            }
            _ => vec![],
        }
    }

    // Interval carrying the absolutely continuous part of a base family.
    fn base_density_support(&self) -> Option<(f64, f64)> {
        match self {
            Law::Semicircle | Law::Arcsine => Some((-2.0, 2.0)),
            Law::MarchenkoPastur { lambda } => {
                let s = lambda.sqrt();
                Some(((1.0 - s).powi(2), (1.0 + s).powi(2)))
            }
            Law::Cauchy => Some((f64::NEG_INFINITY, f64::INFINITY)),
            _ => None,
        }
    }

    fn density(&self, x: f64) -> f64 {
        match self {
            Law::Semicircle => {
                if x.abs() < 2.0 {
                    (4.0 - x * x).sqrt() / (2.0 * PI)
                } else {
                    0.0
                }
            }
            Law::MarchenkoPastur { lambda } => {
                let v = 4.0 * x - (1.0 - lambda + x).powi(2);
                if x > 0.0 && v > 0.0 {
                    v.sqrt() / (2.0 * PI * x)
                } else {
                    0.0
                }
            }
            Law::Arcsine => {
                if x.abs() < 2.0 {
                    1.0 / (PI * (4.0 - x * x).sqrt())
                } else {
                    0.0
                }
            }
            Law::Cauchy => 1.0 / (PI * (1.0 + x * x)),
            Law::Mixture(parts) => parts.iter().map(|(w, l)| w * l.density(x)).sum(),
            Law::Affine { a, b, base } => base.density((x - b) / a) / a.abs(),
            _ => 0.0,
        }
    }

    fn support(&self) -> (f64, f64) {
        match self {
            Law::Semicircle | Law::Arcsine => (-2.0, 2.0),
            Law::MarchenkoPastur { lambda } => {
                let (lo, hi) = self.base_density_support().unwrap();
                (if *lambda < 1.0 { 0.0 } else { lo }, hi)
            }
            Law::BernoulliI { .. } => (0.0, 1.0),
            Law::BernoulliII => (-1.0, 1.0),
            Law::Cauchy => (f64::NEG_INFINITY, f64::INFINITY),
            Law::PointMass { x } => (*x, *x),
            Law::Mixture(parts) => parts.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |acc, (_, l)| {
                let (lo, hi) = l.support();
                (acc.0.min(lo), acc.1.max(hi))
            }),
            Law::Affine { a, b, base } => {
                let (lo, hi) = base.support();
                let (x, y) = (a * lo + b, a * hi + b);
                (x.min(y), x.max(y))
            }
        }
    }

    /// `∫ f dμ` over the whole law.
    fn integrate(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        match self {
            Law::Mixture(parts) => parts.iter().map(|(w, l)| w * l.integrate(f)).sum(),
            Law::Affine { a, b, base } => base.integrate(&|x| f(a * x + b)),
            _ => {
                let atoms: f64 = self.atoms().iter().map(|(x, m)| m * f(*x)).sum();
                let cont = match self.base_density_support() {
                    Some((lo, hi)) if lo.is_finite() => {
                        integrate_interval(&|x| f(x) * self.density(x), lo, hi)
                    }
                    Some(_) => integrate_real_line(&|x| f(x) * self.density(x), f64::INFINITY),
                    None => 0.0,
                };
                atoms + cont
            }
        }
    }

    /// `μ((-∞, x])`.
    fn cdf(&self, x: f64) -> f64 {
        match self {
            Law::Mixture(parts) => parts.iter().map(|(w, l)| w * l.cdf(x)).sum(),
            Law::Affine { a, b, base } => {
                let y = (x - b) / a;
                if *a > 0.0 {
                    base.cdf(y)
                } else {
                    let at: f64 = base.atoms().iter().filter(|(z, _)| *z == y).map(|p| p.1).sum();
                    1.0 - base.cdf(y) + at
                }
            }
            Law::Cauchy => 0.5 + x.atan() / PI,
            Law::Semicircle => {
                let y = x.clamp(-2.0, 2.0);
                0.5 + (y * (4.0 - y * y).sqrt() / 4.0 + (y / 2.0).asin()) / PI
            }
            Law::Arcsine => 0.5 + (x.clamp(-2.0, 2.0) / 2.0).asin() / PI,
            _ => {
                let atoms: f64 = self.atoms().iter().filter(|(z, _)| *z <= x).map(|p| p.1).sum();
                let cont = match self.base_density_support() {
                    Some((lo, hi)) if x > lo => integrate_interval(&|t| self.density(t), lo, x.min(hi)),
                    _ => 0.0,
                };
                atoms + cont
            }
        }
    }

    fn r_series(&self, order: usize) -> Result<TruncatedSeries> {
        let sqrt_quadratic = |c1: f64, c2: f64| -> Result<TruncatedSeries> {
            // √(1 + c1 z + c2 z²) to order + 1
            let mut v = vec![0.0; order + 2];
            v[0] = 1.0;
            if order + 1 >= 1 {
                v[1] = c1;
            }
            if order + 1 >= 2 {
                v[2] = c2;
            }
            TruncatedSeries::new(v)?.sqrt()
        };
        match self {
            Law::Semicircle => {
                let mut v = vec![0.0; order + 1];
                if order >= 1 {
                    v[1] = 1.0;
                }
                TruncatedSeries::new(v)
            }
            Law::MarchenkoPastur { lambda } => TruncatedSeries::new(vec![*lambda; order + 1]),
            Law::PointMass { x } => Ok(TruncatedSeries::constant(*x, order)),
            Law::BernoulliI { p } => {
                // R = (z - 1 + √((1 - z)² + 4pz)) / (2z)
                let mut num = sqrt_quadratic(4.0 * p - 2.0, 1.0)?.into_coeffs();
                num[0] -= 1.0;
                num[1] += 1.0;
                Ok(TruncatedSeries::new(num)?.div_z()?.scale(0.5))
            }
            Law::BernoulliII | Law::Arcsine => {
                // (√(1 + 4z²) - 1) / (2z) and twice that
                let mut num = sqrt_quadratic(0.0, 4.0)?.into_coeffs();
                num[0] -= 1.0;
                let half = TruncatedSeries::new(num)?.div_z()?.scale(0.5);
                Ok(if matches!(self, Law::Arcsine) { half.scale(2.0) } else { half })
            }
            Law::Cauchy => Err(Error::Undefined(
                "heavy-tailed: the R-transform is the constant -i, not a real series".into(),
            )),
            Law::Mixture(_) => {
                let m: Vec<f64> = (1..=order + 1).map(|k| self.moment(k)).collect();
                series::moments_to_r(&MomentSequence::new(m))
            }
            Law::Affine { a, b, base } => {
                // R_{aX+b}(z) = a R_X(a z) + b
                let mut r = base.r_series(order)?.dilate(*a).scale(*a).into_coeffs();
                r[0] += b;
                TruncatedSeries::new(r)
            }
        }
    }

    fn s_eval(&self, u: f64) -> Option<f64> {
        match self {
            Law::MarchenkoPastur { lambda } => Some(1.0 / (lambda + u)),
            Law::BernoulliI { p } => Some((1.0 + u) / (p + u)),
            Law::PointMass { x } if *x != 0.0 => Some(1.0 / x),
            Law::Affine { a, b, base } if *b == 0.0 => base.s_eval(u).map(|s| s / a),
            _ => None,
        }
    }

    fn s_log_derivative(&self, u: f64) -> Option<f64> {
        match self {
            Law::MarchenkoPastur { lambda } => Some(-1.0 / (lambda + u)),
            Law::BernoulliI { p } => Some(1.0 / (1.0 + u) - 1.0 / (p + u)),
            Law::PointMass { x } if *x != 0.0 => Some(0.0),
            Law::Affine { b, base, .. } if *b == 0.0 => base.s_log_derivative(u),
            _ => None,
        }
    }
}

fn binom(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn simpson_rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let m = 0.5 * (a + b);
    let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
    let (flm, frm) = (f(lm), f(rm));
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
        + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
}

/// Adaptive Simpson quadrature of a smooth integrand on `[a, b]`.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // a fixed 16-panel start keeps narrow features from being skipped
    let panels = 16;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let (x0, x1) = (a + i as f64 * h, a + (i + 1) as f64 * h);
            let (f0, fm, f1) = (f(x0), f(0.5 * (x0 + x1)), f(x1));
            let whole = (x1 - x0) / 6.0 * (f0 + 4.0 * fm + f1);
            simpson_rec(f, x0, x1, f0, fm, f1, whole, tol / panels as f64, QUAD_MAX_DEPTH)
        })
        .sum()
}

/// `∫_lo^hi f` allowing inverse-square-root singularities at both ends, via
/// `x = lo + u²` on the left half and `x = hi - u²` on the right half.
pub fn integrate_interval(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64) -> f64 {
    if hi <= lo {
        return 0.0;
    }
    let mid = 0.5 * (lo + hi);
    let w = (mid - lo).sqrt();
    let left = adaptive_simpson(&|u| 2.0 * u * f(lo + u * u), 0.0, w, QUAD_TOL);
    let right = adaptive_simpson(&|u| 2.0 * u * f(hi - u * u), 0.0, w, QUAD_TOL);
    left + right
}

// ∫_{-∞}^{x} f via x = tan θ.
fn integrate_real_line(f: &dyn Fn(f64) -> f64, upper: f64) -> f64 {
    let top = if upper.is_finite() { upper.atan() } else { PI / 2.0 };
    adaptive_simpson(
        &|t| {
            let c = t.cos();
            if c.abs() < 1e-300 {
                0.0
            } else {
                f(t.tan()) / (c * c)
            }
        },
        -PI / 2.0,
        top,
        QUAD_TOL,
    )
}

impl DistributionSpec {
    pub fn law(&self) -> &Law {
        &self.law
    }

    /// Builds a spec directly from a structural law.
    pub fn from_law(name: impl Into<String>, law: Law) -> Self {
        DistributionSpec {
            name: name.into(),
            params: BTreeMap::new(),
            law,
        }
    }

    /// `G(z) = E[(z - X)^{-1}]` with the branch that maps the upper
    /// half-plane to the lower one.
    pub fn cauchy_transform(&self, z: Complex64) -> Complex64 {
        self.law.cauchy_transform(z)
    }

    pub fn is_heavy_tailed(&self) -> bool {
        self.law.heavy_tailed()
    }

    fn check_moments(&self) -> Result<()> {
        if self.is_heavy_tailed() {
            return Err(Error::Undefined(format!(
                "{}: heavy-tailed, moments undefined",
                self.name
            )));
        }
        Ok(())
    }

    /// Closed-form `E(X^k)`.
    pub fn moment(&self, k: usize) -> Result<f64> {
        self.check_moments()?;
        Ok(self.law.moment(k))
    }

    /// Closed-form `m_1..m_upto`.
    pub fn moment_table(&self, upto: usize) -> Result<MomentSequence> {
        self.check_moments()?;
        Ok(MomentSequence::new((1..=upto).map(|k| self.law.moment(k)).collect()))
    }

    /// R-series `c_0..c_order` (free cumulants `k_1..k_{order+1}`), in closed
    /// form for the base families and through the moments for mixtures.
    pub fn r_series(&self, order: usize) -> Result<TruncatedSeries> {
        self.law.r_series(order)
    }

    /// Closed-form `S(u)` for real `u` where the law has one (nonzero mean
    /// and a single-valued expression).
    pub fn s_eval(&self, u: f64) -> Option<f64> {
        self.law.s_eval(u)
    }

    /// `d/du log S(u)` alongside [`Self::s_eval`].
    pub fn s_log_derivative(&self, u: f64) -> Option<f64> {
        self.law.s_log_derivative(u)
    }

    /// Point masses `(location, mass)` sorted by location.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.law.atoms()
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, x: f64) -> f64 {
        self.law.density(x)
    }

    /// Smallest interval containing the support.
    pub fn support(&self) -> (f64, f64) {
        self.law.support()
    }

    /// `∫ f dμ` by adaptive quadrature plus the atoms.
    pub fn integrate(&self, f: &dyn Fn(f64) -> f64) -> f64 {
        self.law.integrate(f)
    }

    pub fn total_mass(&self) -> f64 {
        self.integrate(&|_| 1.0)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.law.cdf(x)
    }

    /// Smallest `x` with `F(x) ≥ q`, by bisection on the support.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0..=1.0).contains(&q) {
            return Err(Error::range("quantile level", q, "[0, 1]"));
        }
        let (mut lo, mut hi) = self.support();
        if !lo.is_finite() || !hi.is_finite() {
            lo = -1e12;
            hi = 1e12;
        }
        if self.cdf(lo) >= q {
            return Ok(lo);
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid) >= q {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Ok(hi)
    }

    /// Quantiles at levels `(i - 1/2)/n`, `i = 1..n`.
    pub fn quantile_grid(&self, n: usize) -> Result<Vec<f64>> {
        (1..=n).map(|i| self.quantile((i as f64 - 0.5) / n as f64)).collect()
    }
}

/// `-(1/π) Im G(x + iε)` at each grid point.
pub fn stieltjes_invert(g: &dyn Fn(Complex64) -> Complex64, grid: &[f64], eps: f64) -> Result<Vec<f64>> {
    if !(1e-6..=1e-1).contains(&eps) {
        return Err(Error::range("eps", eps, "[1e-6, 1e-1]"));
    }
    grid.iter()
        .map(|&x| {
            let v = g(c(x, eps));
            if v.re.is_finite() && v.im.is_finite() {
                Ok(-v.im / PI)
            } else {
                Err(Error::Numerical(format!("Cauchy transform not finite at {x}")))
            }
        })
        .collect()
}

/// Mass of a possible atom at `x`, estimated as `Re[iy · G(x + iy)]`.
pub fn atom_mass_from_g(g: &dyn Fn(Complex64) -> Complex64, x: f64, y: f64) -> f64 {
    (c(0.0, y) * g(c(x, y))).re
}

/// Evenly spaced grid `lo:hi:n` with both endpoints.
pub fn linear_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn spec(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    fn all_specs() -> Vec<DistributionSpec> {
        [
            "semicircle",
            "marchenko-pastur:lambda=0.5",
            "marchenko-pastur:lambda=1",
            "marchenko-pastur:lambda=2",
            "bernoulli1:p=0.3",
            "bernoulli2",
            "arcsine",
            "point-mass:x=1.5",
        ]
        .iter()
        .map(|s| spec(s))
        .collect()
    }

    #[test]
    fn parse_and_validate() {
        assert_eq!(spec("mp:lambda=2").name, "marchenko-pastur");
        assert!("marchenko-pastur:lambda=-1".parse::<DistributionSpec>().is_err());
        assert!("bernoulli1:p=1".parse::<DistributionSpec>().is_err());
        assert!("bernoulli1:t=1".parse::<DistributionSpec>().is_ok());
        assert!("semicircle:foo=1".parse::<DistributionSpec>().is_err());
        assert!("nothing".parse::<DistributionSpec>().is_err());
        assert!("mp:lambda".parse::<DistributionSpec>().is_err());
        assert_eq!(spec("semicircle:scale=2").moment(2).unwrap(), 4.0);
        assert_eq!(spec("spec:semicircle").to_string(), "semicircle");
    }

    #[test]
    fn semicircle_values() {
        let s = spec("semicircle");
        assert!((s.density(0.0) - 1.0 / PI).abs() < 1e-15);
        let z = c(0.3, 0.7);
        let g = s.cauchy_transform(z);
        // G solves G² - zG + 1 = 0
        assert!((g * g - z * g + 1.0).norm() < 1e-14);
        assert!(g.im < 0.0);
        assert_eq!(s.moment_table(6).unwrap().as_slice(), &[0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
    }

    #[test]
    fn arcsine_values() {
        let a = spec("arcsine");
        assert_eq!(a.moment(2).unwrap(), 2.0);
        assert_eq!(a.moment(4).unwrap(), 6.0);
        let z = c(0.0, 1.0);
        let g = a.cauchy_transform(z);
        assert!((g * g * (z * z - 4.0) - 1.0).norm() < 1e-14);
        // K(z) = √(1 + 4z²)/z, so R = (√(1 + 4z²) - 1)/z: k_2 = 2, k_4 = -2
        let r = a.r_series(5).unwrap();
        assert!((r.coeff(1) - 2.0).abs() < 1e-14 && (r.coeff(3) + 2.0).abs() < 1e-14);
    }

    #[test]
    fn free_poisson_atom() {
        let mp = spec("marchenko-pastur:lambda=0.5");
        assert_eq!(mp.atoms(), vec![(0.0, 0.5)]);
        let (lo, hi) = ((1.0 - 0.5f64.sqrt()).powi(2), (1.0 + 0.5f64.sqrt()).powi(2));
        assert!(mp.density(lo - 1e-3) == 0.0 && mp.density(hi + 1e-3) == 0.0);
        assert!((mp.total_mass() - 1.0).abs() < 1e-8);
        let g = |z| mp.cauchy_transform(z);
        assert!((atom_mass_from_g(&g, 0.0, 1e-7) - 0.5).abs() < 1e-5);
    }

    #[test]
    fn bernoulli_tables() {
        let b = spec("bernoulli1:p=0.3");
        assert!(b.moment_table(5).unwrap().as_slice().iter().all(|&m| m == 0.3));
        let b2 = spec("bernoulli2");
        assert_eq!(b2.moment_table(4).unwrap().as_slice(), &[0.0, 1.0, 0.0, 1.0]);
        assert_eq!(b.s_eval(0.5), Some(1.5 / 0.8));
    }

    #[test]
    fn bernoulli2_cumulants_are_signed_catalan() {
        let r = spec("bernoulli2").r_series(11).unwrap();
        for k in 1..=6 {
            let expected = crate::ncpart::signed_catalan(k) as f64;
            assert!((r.coeff(2 * k - 1) - expected).abs() < 1e-12);
            assert_eq!(r.coeff(2 * k - 2), 0.0);
        }
    }

    #[test]
    fn cauchy_is_heavy_tailed() {
        let c0 = spec("cauchy");
        assert!(c0.is_heavy_tailed());
        assert!(matches!(c0.moment(1), Err(Error::Undefined(_))));
        assert!(c0.r_series(4).is_err());
        let d = stieltjes_invert(&|z| c0.cauchy_transform(z), &[0.0], 1e-6).unwrap();
        assert!((d[0] - 1.0 / PI).abs() < 1e-6);
        assert!((c0.total_mass() - 1.0).abs() < 1e-8);
        assert!((c0.cdf(1.0) - 0.75).abs() < 1e-15);
        // scale(Cauchy, t) is the dilation μ(A/t)
        let t = 3.0;
        let s = scale(&c0, t).unwrap();
        assert!((s.density(1.2) - c0.density(1.2 / t) / t).abs() < 1e-15);
        assert!((s.cdf(2.0) - c0.cdf(2.0 / t)).abs() < 1e-12);
    }

    #[test]
    fn normalization_and_moments_by_quadrature() {
        for s in all_specs() {
            assert!((s.total_mass() - 1.0).abs() < 1e-8, "{s}");
            for k in 1..=8 {
                let q = s.integrate(&|x| x.powi(k as i32));
                let exact = s.moment(k).unwrap();
                assert!((q - exact).abs() < 1e-7 * exact.abs().max(1.0), "{s} m_{k}: {q} vs {exact}");
            }
        }
    }

    #[test]
    fn moment_table_matches_r_series() {
        for s in all_specs() {
            let r = s.r_series(7).unwrap();
            let m = series::r_to_moments(&r).unwrap();
            assert!(m.max_abs_diff(&s.moment_table(8).unwrap()) < 1e-10, "{s}");
        }
    }

    #[test]
    fn cauchy_transform_asymptotics() {
        for s in all_specs().into_iter().chain([spec("cauchy")]) {
            let err = |y: f64| {
                let z = c(0.0, y);
                let first = if s.is_heavy_tailed() { 0.0 } else { s.moment(1).unwrap() };
                // iyG(iy) = 1 + m_1/(iy) + O(y⁻²); the m_1 term is removed
                (s.cauchy_transform(z) * z - 1.0 - first / z).norm()
            };
            if s.is_heavy_tailed() {
                assert!(err(1e4) < err(1e3) && err(1e4) < 1e-3, "{s}");
            } else {
                assert!(err(1e3) < 1e-5 && err(1e4) < 1e-5, "{s}: {}", err(1e3));
            }
            for (x, y) in [(0.1, 0.5), (-3.0, 0.01), (1.0, 2.0)] {
                assert!(s.cauchy_transform(c(x, y)).im < 0.0, "{s}");
            }
        }
    }

    #[test]
    fn stieltjes_matches_density() {
        let eps = 1e-4;
        for s in all_specs().into_iter().filter(|s| s.atoms().is_empty() || s.name == "marchenko-pastur") {
            let (lo, hi) = match s.law() {
                Law::MarchenkoPastur { lambda } => ((1.0 - lambda.sqrt()).powi(2), (1.0 + lambda.sqrt()).powi(2)),
                _ => (-2.0, 2.0),
            };
            let grid: Vec<f64> = (1..=50).map(|i| lo + (hi - lo) * i as f64 / 51.0).collect();
            let est = stieltjes_invert(&|z| s.cauchy_transform(z), &grid, eps).unwrap();
            for (x, d) in grid.iter().zip(est) {
                assert!((d - s.density(*x)).abs() < f64::max(1e-2, 5.0 * eps), "{s} at {x}");
            }
        }
        assert!(stieltjes_invert(&|z| z, &[0.0], 1.0).is_err());
        let s = spec("semicircle");
        let out = stieltjes_invert(&|z| s.cauchy_transform(z), &[3.0], 1e-6).unwrap();
        assert!(out[0].abs() < 1e-6);
    }

    #[test]
    fn scaling_and_translation_rules() {
        let s = spec("semicircle");
        let t: f64 = 2.5;
        let dil = scale(&s, t.sqrt()).unwrap();
        let r = dil.r_series(4).unwrap();
        assert!((r.coeff(1) - t).abs() < 1e-12 && r.coeff(0).abs() < 1e-15);
        let z = c(0.4, 1.1);
        for a in [2.0, 1.0 / 3.0, -1.5] {
            let sa = scale(&s, a).unwrap();
            let lhs = sa.cauchy_transform(z);
            let rhs = s.cauchy_transform(z / a) / a;
            assert!((lhs - rhs).norm() < 1e-14);
        }
        let b = 0.7;
        let sb = translate(&s, b).unwrap();
        assert!((sb.cauchy_transform(z) - s.cauchy_transform(z - b)).norm() < 1e-14);
        let rb = sb.r_series(4).unwrap();
        assert!((rb.coeff(0) - b).abs() < 1e-15 && (rb.coeff(1) - 1.0).abs() < 1e-15);
        let d = translate(&spec("point-mass:x=0"), 1.3).unwrap();
        assert_eq!(d.atoms(), vec![(1.3, 1.0)]);
        let mp = spec("mp:lambda=2");
        let scaled = scale(&mp, 0.5).unwrap();
        assert_eq!(scaled.s_eval(0.3), Some(2.0 / 2.3));
        assert!(scale(&s, 0.0).is_err());
    }

    #[test]
    fn mixture_behaves() {
        let m = mixture(vec![(1.0, spec("point-mass:x=0")), (1.0, spec("arcsine:scale=0.5"))]).unwrap();
        assert_eq!(m.atoms(), vec![(0.0, 0.5)]);
        assert!((m.total_mass() - 1.0).abs() < 1e-8);
        assert!((m.moment(2).unwrap() - 0.25).abs() < 1e-15);
        assert!((m.cdf(0.0) - 0.75).abs() < 1e-8);
        let q = m.quantile(0.6).unwrap();
        assert!(q.abs() < 1e-9);
    }

    #[test]
    fn closed_form_cdfs_match_quadrature() {
        for name in ["semicircle", "arcsine"] {
            let s = spec(name);
            for x in [-2.5f64, -1.9, -0.3, 0.0, 0.7, 1.99, 3.0] {
                let q = integrate_interval(&|t| s.density(t), -2.0, x.clamp(-2.0, 2.0));
                let q = if x <= -2.0 { 0.0 } else { q };
                assert!((s.cdf(x) - q).abs() < 1e-8, "{name} at {x}: {} vs {q}", s.cdf(x));
            }
        }
    }

    #[test]
    fn quantiles_invert_cdf() {
        let s = spec("semicircle");
        let q = s.quantile_grid(8).unwrap();
        for (i, x) in q.iter().enumerate() {
            assert!((s.cdf(*x) - (i as f64 + 0.5) / 8.0).abs() < 1e-9);
        }
        assert!(q.windows(2).all(|w| w[0] < w[1]));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(20))]

        #[test]
        fn normalization_random_mp(lambda in 0.05f64..4.0) {
            let s = catalog_get("marchenko-pastur", &BTreeMap::from([("lambda".to_string(), lambda)])).unwrap();
            prop_assert!((s.total_mass() - 1.0).abs() < 1e-8);
            prop_assert!((s.integrate(&|x| x) - lambda).abs() < 1e-8);
        }

        #[test]
        fn normalization_random_bernoulli(p in 0.01f64..0.99) {
            let s = catalog_get("bernoulli1", &BTreeMap::from([("p".to_string(), p)])).unwrap();
            prop_assert!((s.total_mass() - 1.0).abs() < 1e-12);
        }

        #[test]
        fn normalization_random_affine(a in 0.2f64..3.0, b in -2.0f64..2.0, which in 0usize..4) {
            let base = ["semicircle", "arcsine", "bernoulli2", "cauchy"][which];
            let s = translate(&scale(&spec(base), a).unwrap(), b).unwrap();
            prop_assert!((s.total_mass() - 1.0).abs() < 1e-8);
            let x = s.support().0.max(-50.0) + 0.1;
            prop_assert!(s.density(x) >= 0.0);
        }
    }
}
