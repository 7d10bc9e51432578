//! Fuglede–Kadison determinants of matrices, L-functions, and radial Brown
//! measures of R-diagonal elements by the Haagerup–Larsen formula
//! `F⁻¹(t) = 1/√S(t - 1)` for `t ∈ (w, 1]`, where `S` is the S-transform of
//! the law of `X*X` and `w` its atom at zero.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::DistributionSpec;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rmtlab::{ecdf_sup_distance, sample_gue, sample_haar_unitary, DeterministicMatrix, EnsembleConfig, StreamRng};
use crate::series::{self, MomentSequence};

pub const DEFAULT_GRID: usize = 512;

// step of the evaluator-based central difference, and of the one-sided
// difference used at the two ends of the grid
const DIFF_STEP: f64 = 1e-5;
const END_STEP: f64 = 1e-9;
const SERIES_TAIL: f64 = 1e-9;

/// `exp((1/2N) Σ log λ_i(X*X))` with the eigenvalues from Jacobi; zero when
/// `X*X` has a nonpositive eigenvalue.
pub fn fk_det(x: &ComplexMatrix) -> Result<f64> {
    let eig = x.adjoint().mul(x)?.hermitian_eigenvalues()?;
    if eig.iter().any(|&l| l <= 0.0) {
        return Ok(0.0);
    }
    let n = x.n() as f64;
    Ok((eig.iter().map(|l| l.ln()).sum::<f64>() / (2.0 * n)).exp())
}

/// `|Det X|^{1/N}` by LU with partial pivoting.
pub fn fk_det_lu(x: &ComplexMatrix) -> f64 {
    match x.log_abs_det() {
        Some(l) => (l / x.n() as f64).exp(),
        None => 0.0,
    }
}

/// `L(λ) = log det(X - λ) = (1/N) Σ log|λ_i(X) - λ|`, evaluated through the
/// LU determinant; `-∞` when `λ` is an eigenvalue.
pub fn l_function(x: &ComplexMatrix, lambda: Complex64) -> f64 {
    let shifted = x
        .sub(&ComplexMatrix::identity(x.n()).scale(lambda))
        .expect("same size");
    match shifted.log_abs_det() {
        Some(l) => l / x.n() as f64,
        None => f64::NEG_INFINITY,
    }
}

/// Brown mass of the open square `center ± half_width` as `(1/2π)` times the
/// sum of the five-point Laplacian of `L` over an `m × m` grid. The sum
/// telescopes to a discrete boundary flux, so eigenvalues inside the square
/// need not avoid the grid.
pub fn laplacian_mass(x: &ComplexMatrix, center: Complex64, half_width: f64, m: usize) -> Result<f64> {
    if m < 3 {
        return Err(Error::range("m", m, "3.."));
    }
    if !(half_width > 0.0) {
        return Err(Error::invalid("half_width must be positive"));
    }
    let h = 2.0 * half_width / (m - 1) as f64;
    let origin = center - Complex64::new(half_width, half_width);
    let values: Vec<f64> = (0..(m + 2) * (m + 2))
        .into_par_iter()
        .map(|k| {
            let (i, j) = (k / (m + 2), k % (m + 2));
            let p = origin + Complex64::new((i as f64 - 1.0) * h, (j as f64 - 1.0) * h);
            l_function(x, p)
        })
        .collect();
    let at = |i: usize, j: usize| values[i * (m + 2) + j];
    // only differences across the boundary survive the telescoping sum
    let mut flux = 0.0;
    for k in 1..=m {
        flux += at(0, k) - at(1, k) + at(m + 1, k) - at(m, k);
        flux += at(k, 0) - at(k, 1) + at(k, m + 1) - at(k, m);
    }
    if !flux.is_finite() {
        return Err(Error::Numerical("an eigenvalue lies on the boundary of the box".into()));
    }
    Ok(flux / (2.0 * PI))
}

/// A positive S-transform `x ↦ S(x)` on `(w - 1, 0]`.
pub struct STransformEvaluator {
    f: Box<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl STransformEvaluator {
    pub fn new(f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        STransformEvaluator { f: Box::new(f) }
    }

    /// Closed-form S-transform of a catalog law.
    pub fn from_spec(spec: &DistributionSpec) -> Result<Self> {
        if spec.s_eval(-0.5).is_none() {
            return Err(Error::invalid(format!("{spec} has no closed-form S-transform")));
        }
        let spec = spec.clone();
        Ok(STransformEvaluator::new(move |x| spec.s_eval(x).unwrap_or(f64::NAN)))
    }

    pub fn eval(&self, x: f64) -> f64 {
        (self.f)(x)
    }
}

/// Radial distribution `F(r) = μ(|z| ≤ r)` of a rotation-invariant measure,
/// tabulated at `r_i = F⁻¹(t_i)` on a uniform `t`-grid.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RadialMeasure {
    /// Atom at zero.
    pub w: f64,
    pub r: Vec<f64>,
    pub f: Vec<f64>,
    /// `dF/dr`; absent when `F` jumps (flat stretches of `r`).
    pub density: Option<Vec<f64>>,
    pub r_max: f64,
    /// Set when the grid had to stop short of `t = w`.
    pub truncated: bool,
}

impl RadialMeasure {
    /// `F(r)` by monotone linear interpolation of the table.
    pub fn cdf(&self, r: f64) -> f64 {
        if r < self.r[0] {
            return self.w;
        }
        if r >= self.r_max {
            return 1.0;
        }
        let k = self.r.partition_point(|&x| x <= r);
        let (r0, r1) = (self.r[k - 1], self.r[k]);
        let (f0, f1) = (self.f[k - 1], self.f[k]);
        if r1 == r0 {
            f1
        } else {
            f0 + (f1 - f0) * (r - r0) / (r1 - r0)
        }
    }
}

fn radius(s: &dyn Fn(f64) -> f64, t: f64) -> Result<f64> {
    let v = s(t - 1.0);
    if v.is_nan() || v <= 0.0 {
        return Err(Error::invalid(format!("S not admissible: S({}) = {v}", t - 1.0)));
    }
    Ok(1.0 / v.sqrt())
}

fn radial_table(s: &dyn Fn(f64) -> f64, w: f64, t_lo: f64, grid: usize) -> Result<RadialMeasure> {
    if grid < 2 {
        return Err(Error::range("grid", grid, "2.."));
    }
    let ts: Vec<f64> = (0..=grid)
        .map(|i| if i == grid { 1.0 } else { t_lo + (1.0 - t_lo) * i as f64 / grid as f64 })
        .collect();
    let mut r = Vec::with_capacity(ts.len());
    for (i, &t) in ts.iter().enumerate() {
        // a pole of S at w - 1 (possibly crossed by roundoff) is radius zero
        let v = if i == 0 && t_lo == w { s(t - 1.0) } else { f64::NAN };
        if i == 0 && t_lo == w && !v.is_nan() && (v.is_infinite() || v < 0.0) {
            r.push(0.0);
        } else {
            r.push(radius(s, t)?);
        }
    }
    let r_max = r[grid];
    let slack = 1e-12 * r_max.max(1.0);
    if let Some(i) = (1..r.len()).find(|&i| r[i] < r[i - 1] - slack) {
        return Err(Error::invalid(format!(
            "S not admissible: radius decreases between t = {} and t = {}",
            ts[i - 1],
            ts[i]
        )));
    }
    let flat = (1..r.len()).any(|i| r[i] - r[i - 1] <= slack);
    let density = if flat {
        None
    } else {
        let mut rho = Vec::with_capacity(ts.len());
        for (i, &t) in ts.iter().enumerate() {
            let dr_dt = if i == 0 {
                (radius(s, t + END_STEP)? - r[0]) / END_STEP
            } else if i == grid {
                (r[grid] - radius(s, t - END_STEP)?) / END_STEP
            } else {
                let d = DIFF_STEP.min(t - t_lo).min(1.0 - t);
                (radius(s, t + d)? - radius(s, t - d)?) / (2.0 * d)
            };
            rho.push(if dr_dt.is_finite() && dr_dt > 0.0 { 1.0 / dr_dt } else { 0.0 });
        }
        Some(rho)
    };
    Ok(RadialMeasure {
        w,
        r,
        f: ts,
        density,
        r_max,
        truncated: t_lo > w,
    })
}

fn check_w(w: f64) -> Result<()> {
    if !(0.0..1.0).contains(&w) {
        return Err(Error::range("w", w, "[0, 1)"));
    }
    Ok(())
}

/// Haagerup–Larsen radial law from an S-transform of `σ_{X*X}` and the atom
/// `w = σ({0})`. Exact at the tabulated points: `F(r_i) = t_i`.
pub fn hl_radial(s: &STransformEvaluator, w: f64, grid: usize) -> Result<RadialMeasure> {
    check_w(w)?;
    radial_table(&|x| s.eval(x), w, w, grid)
}

/// [`hl_radial`] for a catalog law, with `w` read off its atoms.
pub fn hl_radial_spec(spec: &DistributionSpec, grid: usize) -> Result<RadialMeasure> {
    if spec.support().0 < 0.0 {
        return Err(Error::invalid("σ must live on [0, ∞)"));
    }
    let w = spec
        .atoms()
        .iter()
        .filter(|a| a.0 == 0.0)
        .map(|a| a.1)
        .sum();
    hl_radial(&STransformEvaluator::from_spec(spec)?, w, grid)
}

/// Haagerup–Larsen from the first `m` moments of `σ_{X*X}`: the S-series is
/// evaluated only where its last retained term is below `1e-9`, so the grid
/// may stop short of `t = w` (then `truncated` is set).
pub fn hl_from_moments(sigma: &MomentSequence, w: f64, m: usize) -> Result<RadialMeasure> {
    check_w(w)?;
    if m < 2 || m > sigma.order() {
        return Err(Error::invalid(format!(
            "need 2 ≤ M ≤ {} moments, got M = {m}",
            sigma.order()
        )));
    }
    if !(sigma.mean() > 0.0) {
        return Err(Error::invalid("σ must have positive mean"));
    }
    let s = series::moments_to_s(&sigma.truncate(m))?;
    let last = s.coeffs().iter().rev().find(|c| c.abs() > 0.0).copied();
    let degree = s.coeffs().iter().rposition(|c| c.abs() > 0.0).unwrap_or(0);
    let reach = match last {
        Some(c) if degree > 0 => (SERIES_TAIL / c.abs()).powf(1.0 / degree as f64),
        _ => f64::INFINITY,
    };
    let t_lo = w.max(1.0 - reach);
    if t_lo >= 1.0 {
        return Err(Error::Numerical("S-series has no usable radius".into()));
    }
    let grid = DEFAULT_GRID;
    radial_table(&|x| s.eval(x), w, t_lo, grid)
}

/// Matrix model whose squared singular values are compared to a target law.
#[derive(Clone, Debug)]
pub enum HermitianSampler {
    Gue,
    Fixed(DeterministicMatrix),
}

/// Outcome of [`singular_value_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SingularValueReport {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    /// `sup |F_emp - F_target|` over the pooled eigenvalues of `X*X`.
    pub sup_distance: f64,
    pub eigenvalues: Vec<f64>,
}

/// Squared singular values of `X = U H` (Haar `U`), pooled over reps.
pub fn squared_singular_values(sampler: &HermitianSampler, cfg: &EnsembleConfig) -> Result<Vec<f64>> {
    let parts: Vec<Vec<f64>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut rng = StreamRng::new(cfg.seed, rep as u64);
            let h = match sampler {
                HermitianSampler::Gue => sample_gue(cfg.n, &mut rng)?,
                HermitianSampler::Fixed(d) if d.dim() == cfg.n => d.to_dense(),
                HermitianSampler::Fixed(d) => {
                    return Err(Error::invalid(format!("H has size {}, N = {}", d.dim(), cfg.n)))
                }
            };
            let x = sample_haar_unitary(cfg.n, &mut rng)?.mul(&h)?;
            x.adjoint().mul(&x)?.hermitian_eigenvalues()
        })
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}

/// Compares the squared singular values of `U H` with the law `target`.
pub fn singular_value_check(
    sampler: &HermitianSampler,
    target: &DistributionSpec,
    cfg: &EnsembleConfig,
) -> Result<SingularValueReport> {
    let eigenvalues = squared_singular_values(sampler, cfg)?;
    let sup_distance = ecdf_sup_distance(&eigenvalues, &|x| target.cdf(x));
    Ok(SingularValueReport {
        n: cfg.n,
        reps: cfg.reps,
        seed: cfg.seed,
        sup_distance,
        eigenvalues,
    })
}

/// `|1 - t²|^{1/2}`, the determinant of `1 - tS` for the swap `S` of `ℂ²`.
pub fn swap_det_closed_form(t: Complex64) -> f64 {
    (Complex64::new(1.0, 0.0) - t * t).norm().sqrt()
}

/// The matrix `1 - tS` with `S = [[0, 1], [1, 0]]`.
pub fn one_minus_t_swap(t: Complex64) -> ComplexMatrix {
    let one = Complex64::new(1.0, 0.0);
    ComplexMatrix::from_rows(vec![vec![one, -t], vec![-t, one]]).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ginibre(n: usize, rng: &mut StreamRng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, |_, _| Complex64::new(rng.normal(), rng.normal()))
    }

    fn spec(s: &str) -> DistributionSpec {
        s.parse().unwrap()
    }

    #[test]
    fn fk_det_examples() {
        assert!((fk_det(&ComplexMatrix::identity(5)).unwrap() - 1.0).abs() < 1e-14);
        assert_eq!(fk_det(&ComplexMatrix::zeros(3)).unwrap(), 0.0);
        assert_eq!(fk_det_lu(&ComplexMatrix::zeros(3)), 0.0);
        let d = fk_det(&one_minus_t_swap(Complex64::new(0.5, 0.0))).unwrap();
        assert!((d - 0.5625f64.powf(0.25)).abs() < 1e-12);
    }

    #[test]
    fn fk_det_routes_agree() {
        let mut rng = StreamRng::new(12, 0);
        for k in 0..40 {
            let n = 2 + k % 15;
            let x = ginibre(n, &mut rng);
            let a = fk_det(&x).unwrap();
            let b = fk_det_lu(&x);
            assert!((a / b - 1.0).abs() < 1e-8, "n = {n}: {a} vs {b}");
        }
    }

    #[test]
    fn fk_det_is_multiplicative_and_unitarily_invariant() {
        let mut rng = StreamRng::new(13, 0);
        for _ in 0..5 {
            let x = ginibre(8, &mut rng);
            let y = ginibre(8, &mut rng);
            let xy = fk_det(&x.mul(&y).unwrap()).unwrap();
            assert!((xy / (fk_det(&x).unwrap() * fk_det(&y).unwrap()) - 1.0).abs() < 1e-8);
            let u = sample_haar_unitary(8, &mut rng).unwrap();
            let v = sample_haar_unitary(8, &mut rng).unwrap();
            let uxv = u.mul(&x).unwrap().mul(&v).unwrap();
            assert!((fk_det(&uxv).unwrap() / fk_det(&x).unwrap() - 1.0).abs() < 1e-8);
            let phase = x.scale(Complex64::from_polar(1.0, 0.7));
            assert!((fk_det(&phase).unwrap() / fk_det(&x).unwrap() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn swap_determinant() {
        for k in 0..10 {
            let t = Complex64::new(-0.9 + 0.2 * k as f64, 0.1 * (k % 3) as f64);
            let d = fk_det(&one_minus_t_swap(t)).unwrap();
            assert!((d - swap_det_closed_form(t)).abs() < 1e-10, "{t}");
            if t.im == 0.0 {
                let x = t.re;
                assert!((d - (1.0 - 2.0 * x * x + x.powi(4)).powf(0.25)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn l_function_examples() {
        let z = ComplexMatrix::zeros(3);
        assert!((l_function(&z, Complex64::new(2.0, 0.0)) - 2f64.ln()).abs() < 1e-14);
        let d = ComplexMatrix::from_real_diag(&[1.0, -1.0]);
        assert!(l_function(&d, Complex64::new(0.0, 0.0)).abs() < 1e-14);
        assert_eq!(l_function(&d, Complex64::new(1.0, 0.0)), f64::NEG_INFINITY);
    }

    #[test]
    fn laplacian_recovers_eigenvalue_masses() {
        let eig = [
            Complex64::new(1.0, 0.5),
            Complex64::new(-1.0, 0.7),
            Complex64::new(0.2, -1.0),
            Complex64::new(-0.6, -0.4),
        ];
        let mut rng = StreamRng::new(4, 0);
        let u = sample_haar_unitary(4, &mut rng).unwrap();
        let mut d = ComplexMatrix::zeros(4);
        for (i, &l) in eig.iter().enumerate() {
            d.set(i, i, l);
        }
        let x = u.mul(&d).unwrap().mul(&u.adjoint()).unwrap();
        for &l in &eig {
            let mass = laplacian_mass(&x, l + Complex64::new(0.013, -0.021), 0.3, 60).unwrap();
            assert!((mass - 0.25).abs() < 0.02, "{l}: {mass}");
        }
        let empty = laplacian_mass(&x, Complex64::new(3.0, 3.0), 0.3, 30).unwrap();
        assert!(empty.abs() < 1e-3, "{empty}");
    }

    #[test]
    fn circular_law() {
        let s = STransformEvaluator::new(|z| 1.0 / (1.0 + z));
        let m = hl_radial(&s, 0.0, DEFAULT_GRID).unwrap();
        assert_eq!(m.r.len(), DEFAULT_GRID + 1);
        let f_err = m.r.iter().zip(&m.f).map(|(r, f)| (r * r - f).abs()).fold(0.0, f64::max);
        assert!(f_err < 1e-10);
        let rho = m.density.as_ref().unwrap();
        let rho_err = m.r.iter().zip(rho).map(|(r, d)| (2.0 * r - d).abs()).fold(0.0, f64::max);
        assert!(rho_err < 1e-4, "{rho_err}");
        assert!((m.r_max - 1.0).abs() < 1e-15 && m.f[0] == 0.0 && !m.truncated);
        assert!((m.cdf(0.5) - 0.25).abs() < 1e-3 && m.cdf(2.0) == 1.0);
    }

    #[test]
    fn defining_identity_for_mp() {
        for lambda in [0.3f64, 1.0, 2.5] {
            let sigma = spec(&format!("marchenko-pastur:lambda={lambda}"));
            let m = hl_radial_spec(&sigma, 256).unwrap();
            let w = (1.0 - lambda).max(0.0);
            assert!((m.w - w).abs() < 1e-12);
            for (r, t) in m.r.iter().zip(&m.f) {
                assert!((sigma.s_eval(t - 1.0).unwrap() * r * r - 1.0).abs() < 1e-10 || *r == 0.0);
            }
            assert!(m.f.windows(2).all(|p| p[0] <= p[1]));
            assert!((m.f[m.f.len() - 1] - 1.0).abs() < 1e-8);
            assert!(m.r_max <= sigma.moment(1).unwrap().sqrt() + 1e-6);
        }
    }

    #[test]
    fn haar_unitary_case_jumps_at_one() {
        let s = STransformEvaluator::from_spec(&spec("point-mass:x=1")).unwrap();
        let m = hl_radial(&s, 0.0, 64).unwrap();
        assert!(m.density.is_none());
        assert!(m.r.iter().all(|&r| (r - 1.0).abs() < 1e-15));
        assert_eq!(m.cdf(0.999), 0.0);
        assert_eq!(m.cdf(1.0), 1.0);
    }

    #[test]
    fn projection_times_haar() {
        let p = 0.4;
        let m = hl_radial_spec(&spec(&format!("bernoulli1:p={p}")), 128).unwrap();
        assert!((m.w - 0.6).abs() < 1e-12);
        for (r, t) in m.r.iter().zip(&m.f) {
            assert!((t - (1.0 - p) / (1.0 - r * r)).abs() < 1e-10 || *t == 1.0);
        }
    }

    #[test]
    fn rejects_inadmissible_s() {
        let s = STransformEvaluator::new(|z| 1.0 + z);
        assert!(hl_radial(&s, 0.0, 32).is_err());
        let s = STransformEvaluator::new(|_| -1.0);
        assert!(hl_radial(&s, 0.0, 32).is_err());
        assert!(hl_radial(&STransformEvaluator::new(|_| 1.0), 1.0, 32).is_err());
    }

    #[test]
    fn moments_route_matches_closed_form() {
        let sigma = spec("marchenko-pastur:lambda=1");
        let from_m = hl_from_moments(&sigma.moment_table(24).unwrap(), 0.0, 24).unwrap();
        assert!(from_m.truncated);
        let s = STransformEvaluator::from_spec(&sigma).unwrap();
        for (r, t) in from_m.r.iter().zip(&from_m.f) {
            assert!((r - 1.0 / s.eval(t - 1.0).sqrt()).abs() < 1e-6);
        }
        let delta = hl_from_moments(&MomentSequence::new(vec![1.0; 12]), 0.0, 12).unwrap();
        assert!(delta.density.is_none() && (delta.r_max - 1.0).abs() < 1e-12);
    }

    #[test]
    fn compressed_bernoulli_sigma() {
        // ½δ₀ plus density 1/(2π√(x(1 - x))) on [0, 1]
        let m: Vec<f64> = (1..=20)
            .map(|k| {
                let c = (1..=k).fold(1.0, |acc, i| acc * (k + i) as f64 / i as f64);
                0.5 * c / 4f64.powi(k)
            })
            .collect();
        let r = hl_from_moments(&MomentSequence::new(m), 0.5, 20).unwrap();
        assert!(r.w == 0.5 && r.r_max.is_finite());
        assert!((r.r_max - 0.5).abs() < 1e-12);
        assert!(r.f.iter().all(|&t| t >= 0.5));
    }

    #[test]
    fn squared_singular_values_of_uh() {
        let cfg = EnsembleConfig::new(64, 6, 5).unwrap();
        let report = singular_value_check(&HermitianSampler::Gue, &spec("marchenko-pastur:lambda=1"), &cfg).unwrap();
        assert!(report.sup_distance < 0.06, "{}", report.sup_distance);
        let id = HermitianSampler::Fixed(DeterministicMatrix::identity(16));
        let cfg = EnsembleConfig::new(16, 2, 1).unwrap();
        let ev = squared_singular_values(&id, &cfg).unwrap();
        assert!(ev.iter().all(|&x| (x - 1.0).abs() < 1e-10));
    }

    #[test]
    fn singular_values_invariant_under_left_unitary() {
        let mut rng = StreamRng::new(8, 0);
        let x = ginibre(6, &mut rng);
        let u = sample_haar_unitary(6, &mut rng).unwrap();
        let ux = u.mul(&x).unwrap();
        let a = x.adjoint().mul(&x).unwrap().hermitian_eigenvalues().unwrap();
        let b = ux.adjoint().mul(&ux).unwrap().hermitian_eigenvalues().unwrap();
        for (p, q) in a.iter().zip(&b) {
            assert!((p - q).abs() < 1e-9 * a[a.len() - 1]);
        }
    }
}
