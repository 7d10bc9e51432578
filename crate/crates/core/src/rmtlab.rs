//! Random-matrix Monte Carlo (GUE, Haar unitaries, deterministic diagonal
//! matrices) together with the exact finite-N predictions it is checked
//! against: the genus expansion of Gaussian traces and the Weingarten
//! formula for Haar entries.
//!
//! Every rep draws from its own ChaCha stream `(seed, rep)`, so estimates
//! do not depend on how reps are scheduled across threads.

use std::collections::{BTreeMap, HashMap};
use std::f64::consts::PI;
use std::fmt;
use std::rc::Rc;
use std::str::FromStr;

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::catalog::DistributionSpec;
use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::moments::{geodesic_mixed_moment, haar_moment, HaarLetter};
use crate::ncpart::{
    enumerate_all_pairings, pairing_genus, pairing_times_gamma, signed_catalan,
    IntegerPartitionClass, Permutation,
};
use crate::series::MomentSequence;

/// Largest word length accepted by [`genus_expansion_exact`].
pub const MAX_GENUS_WORD: usize = 10;
/// Largest word length accepted by [`genus_census`].
pub const MAX_CENSUS_WORD: usize = 12;

// reps are processed in blocks of this size; within a block values are kept
// and summed pairwise, blocks are merged in order
const CHUNK: usize = 1024;

/// A reproducible stream of uniforms and standard normals.
pub struct StreamRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl StreamRng {
    pub fn new(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        StreamRng { inner, spare: None }
    }

    /// Uniform on `(0, 1]`.
    pub fn uniform(&mut self) -> f64 {
        ((self.inner.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Standard normal by Box–Muller; the second value of each pair is kept.
    pub fn normal(&mut self) -> f64 {
        if let Some(x) = self.spare.take() {
            return x;
        }
        let r = (-2.0 * self.uniform().ln()).sqrt();
        let theta = 2.0 * PI * self.uniform();
        self.spare = Some(r * theta.sin());
        r * theta.cos()
    }
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::range("N", n, "2.."));
    }
    Ok(())
}

/// GUE with `E|a_ij|² = 1/N`: off-diagonal `(x + iy)/√(2N)`, diagonal `x/√N`.
pub fn sample_gue(n: usize, rng: &mut StreamRng) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let nf = n as f64;
    let off = 1.0 / (2.0 * nf).sqrt();
    let diag = 1.0 / nf.sqrt();
    let mut a = ComplexMatrix::zeros(n);
    for i in 0..n {
        a.set(i, i, Complex64::new(rng.normal() * diag, 0.0));
        for j in i + 1..n {
            let z = Complex64::new(rng.normal(), rng.normal()) * off;
            a.set(i, j, z);
            a.set(j, i, z.conj());
        }
    }
    Ok(a)
}

/// Haar unitary from the QR factorization of a complex Ginibre matrix, with
/// column `j` of `Q` multiplied by the phase of `R_jj`.
pub fn sample_haar_unitary(n: usize, rng: &mut StreamRng) -> Result<ComplexMatrix> {
    check_dim(n)?;
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let g = ComplexMatrix::from_fn(n, |_, _| Complex64::new(rng.normal(), rng.normal()) * s);
    let (mut q, r) = g.householder_qr();
    for j in 0..n {
        let d = r.get(j, j);
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::new(1.0, 0.0) };
        for i in 0..n {
            q.set(i, j, q.get(i, j) * phase);
        }
    }
    Ok(q)
}

/// Deterministic matrix bound to a `D_k` slot.
#[derive(Clone, Debug, PartialEq)]
pub enum DeterministicMatrix {
    Diagonal(Vec<f64>),
    Dense(ComplexMatrix),
}

impl DeterministicMatrix {
    pub fn identity(n: usize) -> Self {
        DeterministicMatrix::Diagonal(vec![1.0; n])
    }

    /// `diag(±1)` with `⌈N/2⌉` entries `+1` followed by `-1`.
    pub fn balanced_signs(n: usize) -> Self {
        DeterministicMatrix::Diagonal((0..n).map(|i| if i < n.div_ceil(2) { 1.0 } else { -1.0 }).collect())
    }

    /// Diagonal matrix of the quantiles of `spec` at `(i - 1/2)/N`.
    pub fn from_quantiles(spec: &DistributionSpec, n: usize) -> Result<Self> {
        Ok(DeterministicMatrix::Diagonal(spec.quantile_grid(n)?))
    }

    pub fn dim(&self) -> usize {
        match self {
            DeterministicMatrix::Diagonal(d) => d.len(),
            DeterministicMatrix::Dense(m) => m.n(),
        }
    }

    pub fn to_dense(&self) -> ComplexMatrix {
        match self {
            DeterministicMatrix::Diagonal(d) => ComplexMatrix::from_real_diag(d),
            DeterministicMatrix::Dense(m) => m.clone(),
        }
    }

    /// Eigenvalues of a Hermitian slot (the diagonal itself when diagonal).
    pub fn spectrum(&self) -> Result<Vec<f64>> {
        match self {
            DeterministicMatrix::Diagonal(d) => Ok(d.clone()),
            DeterministicMatrix::Dense(m) => m.hermitian_eigenvalues(),
        }
    }

    fn as_mat(&self) -> Mat {
        match self {
            DeterministicMatrix::Diagonal(d) => Mat::Diag(d.clone()),
            DeterministicMatrix::Dense(m) => Mat::Dense(m.clone()),
        }
    }
}

// Factor in a product; diagonal factors keep products O(N²).
#[derive(Clone, Debug)]
enum Mat {
    Diag(Vec<f64>),
    Dense(ComplexMatrix),
}

impl Mat {
    fn dim(&self) -> usize {
        match self {
            Mat::Diag(d) => d.len(),
            Mat::Dense(m) => m.n(),
        }
    }

    fn mul(&self, other: &Mat) -> Result<Mat> {
        if self.dim() != other.dim() {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(match (self, other) {
            (Mat::Diag(a), Mat::Diag(b)) => Mat::Diag(a.iter().zip(b).map(|(x, y)| x * y).collect()),
            (Mat::Diag(a), Mat::Dense(b)) => Mat::Dense(b.diag_mul(a)?),
            (Mat::Dense(a), Mat::Diag(b)) => Mat::Dense(a.mul_diag(b)?),
            (Mat::Dense(a), Mat::Dense(b)) => Mat::Dense(a.mul(b)?),
        })
    }

    fn trace(&self) -> Complex64 {
        match self {
            Mat::Diag(d) => Complex64::new(d.iter().sum::<f64>() / d.len() as f64, 0.0),
            Mat::Dense(m) => m.normalized_trace(),
        }
    }

    /// `tr(self · other)`.
    fn trace_with(&self, other: &Mat) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::invalid("dimension mismatch"));
        }
        let n = self.dim() as f64;
        Ok(match (self, other) {
            (Mat::Diag(a), Mat::Diag(b)) => {
                Complex64::new(a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / n, 0.0)
            }
            (Mat::Diag(d), Mat::Dense(m)) | (Mat::Dense(m), Mat::Diag(d)) => {
                d.iter().enumerate().map(|(i, x)| m.get(i, i) * x).sum::<Complex64>() / n
            }
            (Mat::Dense(a), Mat::Dense(b)) => a.normalized_trace_of_product(b)?,
        })
    }
}

/// A letter of a trace word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Symbol {
    /// Independent GUE in slot `k` (1-based).
    Gaussian(usize),
    U,
    UStar,
    /// Deterministic matrix in slot `k` (1-based).
    Deterministic(usize),
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Symbol::Gaussian(k) => write!(f, "A{k}"),
            Symbol::U => f.write_str("U"),
            Symbol::UStar => f.write_str("U*"),
            Symbol::Deterministic(k) => write!(f, "D{k}"),
        }
    }
}

/// A word such as `"A D1 A D2"` or `"A U B U*"` (`B` is not a symbol; use
/// `D1`). A bare `A` or `D` means slot 1.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TraceWord {
    symbols: Vec<Symbol>,
}

impl TraceWord {
    pub fn new(symbols: Vec<Symbol>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid("trace word is empty"));
        }
        if symbols
            .iter()
            .any(|s| matches!(s, Symbol::Gaussian(0) | Symbol::Deterministic(0)))
        {
            return Err(Error::invalid("slot indices start at 1"));
        }
        Ok(TraceWord { symbols })
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    fn gaussian_slots(&self) -> usize {
        self.symbols
            .iter()
            .filter_map(|s| match s {
                Symbol::Gaussian(k) => Some(*k),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn deterministic_slots(&self) -> usize {
        self.symbols
            .iter()
            .filter_map(|s| match s {
                Symbol::Deterministic(k) => Some(*k),
                _ => None,
            })
            .max()
            .unwrap_or(0)
    }

    fn uses_unitary(&self) -> bool {
        self.symbols.iter().any(|s| matches!(s, Symbol::U | Symbol::UStar))
    }

    fn is_random(&self) -> bool {
        self.gaussian_slots() > 0 || self.uses_unitary()
    }
}

impl FromStr for TraceWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let slot = |rest: &str, tok: &str| -> Result<usize> {
            let rest = rest.strip_prefix('_').unwrap_or(rest);
            if rest.is_empty() {
                return Ok(1);
            }
            rest.parse::<usize>()
                .map_err(|_| Error::Parse(format!("bad slot in {tok:?}")))
        };
        let symbols = s
            .split(|c: char| c.is_whitespace() || c == ',' || c == '·')
            .filter(|t| !t.is_empty())
            .map(|tok| match tok {
                "U" | "u" => Ok(Symbol::U),
                "U*" | "u*" => Ok(Symbol::UStar),
                _ if tok.starts_with(['A', 'a']) => slot(&tok[1..], tok).map(Symbol::Gaussian),
                _ if tok.starts_with(['D', 'd']) => slot(&tok[1..], tok).map(Symbol::Deterministic),
                _ => Err(Error::Parse(format!("unknown symbol {tok:?}"))),
            })
            .collect::<Result<Vec<_>>>()?;
        TraceWord::new(symbols)
    }
}

impl fmt::Display for TraceWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.symbols.iter().map(|s| s.to_string()).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Dimension, rep count, seed and the deterministic matrices of a run.
#[derive(Clone, Debug)]
pub struct EnsembleConfig {
    pub n: usize,
    pub reps: usize,
    pub seed: u64,
    pub deterministic: Vec<DeterministicMatrix>,
}

impl EnsembleConfig {
    pub fn new(n: usize, reps: usize, seed: u64) -> Result<Self> {
        check_dim(n)?;
        if reps == 0 {
            return Err(Error::range("reps", reps, "1.."));
        }
        Ok(EnsembleConfig {
            n,
            reps,
            seed,
            deterministic: Vec::new(),
        })
    }

    pub fn with_deterministic(mut self, d: Vec<DeterministicMatrix>) -> Result<Self> {
        if let Some(bad) = d.iter().find(|m| m.dim() != self.n) {
            return Err(Error::invalid(format!(
                "deterministic matrix of size {} in an ensemble with N = {}",
                bad.dim(),
                self.n
            )));
        }
        self.deterministic = d;
        Ok(self)
    }
}

/// Sample mean with `stderr = sd / √reps`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MCEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub reps: usize,
    pub seed: u64,
}

impl MCEstimate {
    /// `(mean - target) / stderr`; zero when both the gap and the stderr are.
    pub fn z_score(&self, target: f64) -> f64 {
        let gap = self.mean - target;
        if self.stderr == 0.0 {
            if gap == 0.0 {
                0.0
            } else {
                f64::INFINITY * gap.signum()
            }
        } else {
            gap / self.stderr
        }
    }

    pub fn within(&self, target: f64, sigmas: f64) -> bool {
        (self.mean - target).abs() <= sigmas * self.stderr + 1e-12 * target.abs().max(1.0)
    }
}

pub fn pairwise_sum(x: &[f64]) -> f64 {
    if x.len() <= 8 {
        return x.iter().sum();
    }
    let (a, b) = x.split_at(x.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

// Runs `f` once per rep on stream (seed, rep) and returns one estimate per
// output coordinate. The result is independent of the thread count.
fn monte_carlo<F>(reps: usize, seed: u64, width: usize, f: F) -> Result<Vec<MCEstimate>>
where
    F: Fn(&mut StreamRng) -> Result<Vec<f64>> + Sync,
{
    if reps < 2 {
        return Err(Error::range("reps", reps, "2.."));
    }
    // running (count, mean, M2) per coordinate, merged chunk by chunk
    let mut count = 0.0f64;
    let mut mean = vec![0.0; width];
    let mut m2 = vec![0.0; width];
    let mut start = 0;
    while start < reps {
        let end = (start + CHUNK).min(reps);
        let rows: Vec<Vec<f64>> = (start..end)
            .into_par_iter()
            .map(|rep| f(&mut StreamRng::new(seed, rep as u64)))
            .collect::<Result<_>>()?;
        let nb = (end - start) as f64;
        let mut column = vec![0.0; rows.len()];
        for c in 0..width {
            for (slot, row) in column.iter_mut().zip(&rows) {
                *slot = row[c];
            }
            let mb = pairwise_sum(&column) / nb;
            for slot in column.iter_mut() {
                *slot = (*slot - mb).powi(2);
            }
            let m2b = pairwise_sum(&column);
            let total = count + nb;
            let delta = mb - mean[c];
            mean[c] += delta * nb / total;
            m2[c] += m2b + delta * delta * count * nb / total;
        }
        count += nb;
        start = end;
    }
    Ok(mean
        .into_iter()
        .zip(m2)
        .map(|(mean, m2)| MCEstimate {
            mean,
            stderr: (m2 / (count - 1.0)).max(0.0).sqrt() / count.sqrt(),
            reps,
            seed,
        })
        .collect())
}

// Product of a word's matrices, splitting in halves and reusing repeated
// sub-words (A A A A costs one multiplication).
struct WordEvaluator<'a> {
    base: &'a dyn Fn(Symbol) -> Mat,
    memo: HashMap<Vec<Symbol>, Rc<Mat>>,
}

impl WordEvaluator<'_> {
    fn product(&mut self, w: &[Symbol]) -> Result<Rc<Mat>> {
        if let Some(m) = self.memo.get(w) {
            return Ok(m.clone());
        }
        let m = if w.len() == 1 {
            Rc::new((self.base)(w[0]))
        } else {
            let h = w.len() / 2;
            let left = self.product(&w[..h])?;
            let right = self.product(&w[h..])?;
            Rc::new(left.mul(&right)?)
        };
        self.memo.insert(w.to_vec(), m.clone());
        Ok(m)
    }

    fn trace(&mut self, w: &[Symbol]) -> Result<Complex64> {
        if w.len() == 1 {
            return Ok(self.product(w)?.trace());
        }
        let h = w.len() / 2;
        let left = self.product(&w[..h])?;
        let right = self.product(&w[h..])?;
        left.trace_with(&right)
    }
}

fn check_word(word: &TraceWord, cfg: &EnsembleConfig) -> Result<()> {
    let need = word.deterministic_slots();
    if need > cfg.deterministic.len() {
        return Err(Error::invalid(format!(
            "word uses D{need} but only {} deterministic matrices are bound",
            cfg.deterministic.len()
        )));
    }
    if let Some(bad) = cfg.deterministic.iter().find(|m| m.dim() != cfg.n) {
        return Err(Error::invalid(format!(
            "deterministic matrix of size {} in an ensemble with N = {}",
            bad.dim(),
            cfg.n
        )));
    }
    Ok(())
}

fn evaluate_word(
    word: &TraceWord,
    cfg: &EnsembleConfig,
    gaussians: &[ComplexMatrix],
    u: Option<&ComplexMatrix>,
) -> Result<Complex64> {
    let u_star = u.map(|u| u.adjoint());
    let base = |s: Symbol| match s {
        Symbol::Gaussian(k) => Mat::Dense(gaussians[k - 1].clone()),
        Symbol::U => Mat::Dense(u.expect("sampled").clone()),
        Symbol::UStar => Mat::Dense(u_star.clone().expect("sampled")),
        Symbol::Deterministic(k) => cfg.deterministic[k - 1].as_mat(),
    };
    let mut ev = WordEvaluator {
        base: &base,
        memo: HashMap::new(),
    };
    ev.trace(word.symbols())
}

/// Monte Carlo estimate of `⟨tr(word)⟩` (real part) with `tr = Tr/N` and
/// fresh GUE/Haar samples per rep. Words without random letters are
/// evaluated once and reported with zero stderr.
pub fn mc_trace(word: &TraceWord, cfg: &EnsembleConfig) -> Result<MCEstimate> {
    check_word(word, cfg)?;
    if !word.is_random() {
        let v = evaluate_word(word, cfg, &[], None)?;
        return Ok(MCEstimate {
            mean: v.re,
            stderr: 0.0,
            reps: cfg.reps,
            seed: cfg.seed,
        });
    }
    let slots = word.gaussian_slots();
    let unitary = word.uses_unitary();
    let est = monte_carlo(cfg.reps, cfg.seed, 1, |rng| {
        let gaussians = (0..slots)
            .map(|_| sample_gue(cfg.n, rng))
            .collect::<Result<Vec<_>>>()?;
        let u = if unitary { Some(sample_haar_unitary(cfg.n, rng)?) } else { None };
        Ok(vec![evaluate_word(word, cfg, &gaussians, u.as_ref())?.re])
    })?;
    Ok(est[0])
}

/// `Σ_π N^{#(πγ) - n/2 - 1} tr_{πγ}(D¹, …, Dⁿ)` over all pairings of
/// `{1..n}`: the exact value of `E tr(A D¹ A D² ⋯ A Dⁿ)` for a GUE `A`.
/// Each cycle `(r, πγ(r), …)` contributes `tr(D^r D^{πγ(r)} ⋯)`.
pub fn genus_expansion_exact(ds: &[DeterministicMatrix], n: usize) -> Result<f64> {
    if ds.len() != n {
        return Err(Error::invalid(format!("{n} slots need {n} matrices, got {}", ds.len())));
    }
    if n == 0 || n > MAX_GENUS_WORD {
        return Err(Error::range("n", n, "1..=10"));
    }
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let dim = ds[0].dim();
    if ds.iter().any(|d| d.dim() != dim) || dim == 0 {
        return Err(Error::invalid("deterministic matrices must share one dimension"));
    }
    let nf = dim as f64;
    let mats: Vec<Mat> = ds.iter().map(DeterministicMatrix::as_mat).collect();
    let mut cache: HashMap<Vec<usize>, Complex64> = HashMap::new();
    let mut acc = 0.0;
    for p in enumerate_all_pairings(n)? {
        let sigma = pairing_times_gamma(&p)?;
        let cycles = sigma.cycles();
        let mut value = Complex64::new(1.0, 0.0);
        for c in &cycles {
            let t = match cache.get(c) {
                Some(t) => *t,
                None => {
                    let mut prod = mats[c[0] - 1].clone();
                    for &r in &c[1..] {
                        prod = prod.mul(&mats[r - 1])?;
                    }
                    let t = prod.trace();
                    cache.insert(c.clone(), t);
                    t
                }
            };
            value *= t;
        }
        acc += value.re * nf.powi(cycles.len() as i32 - n as i32 / 2 - 1);
    }
    Ok(acc)
}

/// Number of pairings of `{1..n}` of each genus.
pub fn genus_census(n: usize) -> Result<BTreeMap<usize, u64>> {
    if n == 0 || n % 2 == 1 || n > MAX_CENSUS_WORD {
        return Err(Error::range("n", n, "even, 2..=12"));
    }
    let mut out = BTreeMap::new();
    for p in enumerate_all_pairings(n)? {
        *out.entry(pairing_genus(&p)?).or_insert(0) += 1;
    }
    Ok(out)
}

/// `⟨tr(Aⁿ)⟩ = Σ_g census(g) N^{-2g}` for a GUE of size `N`.
pub fn gue_moment_exact(n: usize, dim: usize) -> Result<f64> {
    if n % 2 == 1 {
        return Ok(0.0);
    }
    let nf = dim as f64;
    Ok(genus_census(n)?
        .into_iter()
        .map(|(g, c)| c as f64 * nf.powi(-2 * g as i32))
        .sum())
}

/// Leading behavior `Wg(N, α) ≈ φ(α) N^{#(α) - 2q}` with
/// `φ(α) = Π_i (-1)^{λ_i - 1} C_{λ_i - 1}`.
pub fn weingarten_leading(alpha: &IntegerPartitionClass) -> (i32, f64) {
    let q = alpha.size() as i32;
    let phi = alpha.parts().iter().map(|&l| signed_catalan(l) as f64).product();
    (alpha.cycle_count() as i32 - 2 * q, phi)
}

/// Exact `Wg(N, α)` for `q = |α| ≤ 3`.
pub fn weingarten_exact_smallq(n: usize, alpha: &IntegerPartitionClass) -> Result<f64> {
    let q = alpha.size();
    if q == 0 || q > 3 {
        return Err(Error::range("q", q, "1..=3"));
    }
    if n < q {
        return Err(Error::invalid(format!("Wg(N, ·) with q = {q} needs N ≥ {q}, got {n}")));
    }
    let nf = n as f64;
    let a = nf * nf - 1.0;
    let b = nf * nf - 4.0;
    Ok(match alpha.parts() {
        [1] => 1.0 / nf,
        [1, 1] => 1.0 / a,
        [2] => -1.0 / (nf * a),
        [1, 1, 1] => (nf * nf - 2.0) / (nf * a * b),
        [2, 1] => -1.0 / (a * b),
        [3] => 2.0 / (nf * a * b),
        other => unreachable!("partition {other:?} of q ≤ 3"),
    })
}

/// An entry moment `E u_{i₁j₁}⋯u_{i_qj_q} conj(u_{i'₁j'₁})⋯conj(u_{i'_qj'_q})`
/// with 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryPattern {
    pub i: Vec<usize>,
    pub j: Vec<usize>,
    pub i_bar: Vec<usize>,
    pub j_bar: Vec<usize>,
}

impl EntryPattern {
    pub fn new(i: Vec<usize>, j: Vec<usize>, i_bar: Vec<usize>, j_bar: Vec<usize>) -> Result<Self> {
        let q = i.len();
        if j.len() != q || i_bar.len() != q || j_bar.len() != q {
            return Err(Error::invalid("index lists must have equal length"));
        }
        if [&i, &j, &i_bar, &j_bar].iter().any(|v| v.contains(&0)) {
            return Err(Error::invalid("indices are 1-based"));
        }
        Ok(EntryPattern { i, j, i_bar, j_bar })
    }

    pub fn q(&self) -> usize {
        self.i.len()
    }

    fn max_index(&self) -> usize {
        [&self.i, &self.j, &self.i_bar, &self.j_bar]
            .iter()
            .flat_map(|v| v.iter().copied())
            .max()
            .unwrap_or(0)
    }

    fn sample(&self, u: &ComplexMatrix) -> f64 {
        let mut acc = Complex64::new(1.0, 0.0);
        for k in 0..self.q() {
            acc *= u.get(self.i[k] - 1, self.j[k] - 1);
            acc *= u.get(self.i_bar[k] - 1, self.j_bar[k] - 1).conj();
        }
        acc.re
    }
}

/// `Σ_{σ,τ ∈ S_q} δ(i_k = i'_{σ(k)}) δ(j_k = j'_{τ(k)}) Wg(N, τσ⁻¹)` using
/// the exact small-q values.
pub fn weingarten_entry_moment(n: usize, p: &EntryPattern) -> Result<f64> {
    let q = p.q();
    if p.max_index() > n {
        return Err(Error::invalid(format!("index exceeds N = {n}")));
    }
    if q == 0 {
        return Ok(1.0);
    }
    let perms = Permutation::all(q);
    let matches = |a: &[usize], b: &[usize], s: &Permutation| (1..=q).all(|k| a[k - 1] == b[s.apply(k) - 1]);
    let mut acc = 0.0;
    for sigma in perms.iter().filter(|s| matches(&p.i, &p.i_bar, s)) {
        for tau in perms.iter().filter(|t| matches(&p.j, &p.j_bar, t)) {
            let class = tau.multiply(&sigma.inverse())?.cycle_type();
            acc += weingarten_exact_smallq(n, &class)?;
        }
    }
    Ok(acc)
}

/// Monte Carlo estimates of several entry moments from the same Haar samples.
pub fn haar_entry_moments_mc(patterns: &[EntryPattern], cfg: &EnsembleConfig) -> Result<Vec<MCEstimate>> {
    if let Some(p) = patterns.iter().find(|p| p.max_index() > cfg.n) {
        return Err(Error::invalid(format!("pattern {p:?} exceeds N = {}", cfg.n)));
    }
    monte_carlo(cfg.reps, cfg.seed, patterns.len(), |rng| {
        let u = sample_haar_unitary(cfg.n, rng)?;
        Ok(patterns.iter().map(|p| p.sample(&u)).collect())
    })
}

/// Comparison of a conjugation Monte Carlo run with the free prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConjugationReport {
    pub estimate: MCEstimate,
    /// Geodesic-sum prediction from the empirical moments of `A` and `B`.
    pub prediction: f64,
    pub z: f64,
}

/// `⟨tr((A U B U*)ⁿ)⟩` by Monte Carlo against the infinite-N prediction.
pub fn conjugation_experiment(
    a: &DeterministicMatrix,
    b: &DeterministicMatrix,
    n: usize,
    cfg: &EnsembleConfig,
) -> Result<ConjugationReport> {
    if a.dim() != cfg.n || b.dim() != cfg.n {
        return Err(Error::invalid(format!(
            "matrices of sizes {} and {} in an ensemble with N = {}",
            a.dim(),
            b.dim(),
            cfg.n
        )));
    }
    if n == 0 {
        return Err(Error::invalid("word length must be positive"));
    }
    let ma = empirical_moments(&a.spectrum()?, n);
    let mb = empirical_moments(&b.spectrum()?, n);
    let prediction = geodesic_mixed_moment(&ma, &mb, n)?;
    let word: TraceWord = "D1 U D2 U*".repeat(n).replace("U*D1", "U* D1").parse()?;
    let cfg = cfg.clone().with_deterministic(vec![a.clone(), b.clone()])?;
    let estimate = mc_trace(&word, &cfg)?;
    Ok(ConjugationReport {
        estimate,
        prediction,
        z: estimate.z_score(prediction),
    })
}

/// Exact finite-N value of `E tr(A U B U* A U B U*)` from the q = 2
/// Weingarten formula:
/// `[N²(a₂b₁² + a₁²b₂) - a₂b₂ - N²a₁²b₁²] / (N² - 1)`.
pub fn exyxy_finite_n(a: &MomentSequence, b: &MomentSequence, n: usize) -> f64 {
    let n2 = (n * n) as f64;
    let (a1, a2, b1, b2) = (a.m(1), a.m(2), b.m(1), b.m(2));
    (n2 * (a2 * b1 * b1 + a1 * a1 * b2) - a2 * b2 - n2 * a1 * a1 * b1 * b1) / (n2 - 1.0)
}

/// `m_k = (1/N) Σ λ_i^k` for `k = 1..=order`.
pub fn empirical_moments(eigenvalues: &[f64], order: usize) -> MomentSequence {
    let n = eigenvalues.len() as f64;
    MomentSequence::new(
        (1..=order)
            .map(|k| eigenvalues.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n)
            .collect(),
    )
}

/// A reference value for a trace word and how it was obtained.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Prediction {
    pub value: f64,
    /// `"exact"` at the ensemble's N, or `"free"` for the N → ∞ limit.
    pub kind: &'static str,
}

/// The prediction available for `word`, if any:
/// deterministic words are evaluated, words in `A` (slot 1) and `D_k` use the
/// genus expansion, words in `U, U*` use the Haar moments (exact at every N),
/// and `(D_a U D_b U*)ⁿ` uses the free geodesic sum.
pub fn exact_prediction(word: &TraceWord, cfg: &EnsembleConfig) -> Result<Option<Prediction>> {
    check_word(word, cfg)?;
    let syms = word.symbols();
    if !word.is_random() {
        let v = evaluate_word(word, cfg, &[], None)?;
        return Ok(Some(Prediction { value: v.re, kind: "exact" }));
    }
    let gaussian_only = syms
        .iter()
        .all(|s| matches!(s, Symbol::Gaussian(1) | Symbol::Deterministic(_)));
    if gaussian_only {
        let start = syms.iter().position(|s| *s == Symbol::Gaussian(1)).expect("random word");
        let rotated: Vec<Symbol> = syms[start..].iter().chain(&syms[..start]).copied().collect();
        let mut slots: Vec<Vec<usize>> = Vec::new();
        for s in rotated {
            match s {
                Symbol::Gaussian(_) => slots.push(Vec::new()),
                Symbol::Deterministic(k) => slots.last_mut().expect("starts with A").push(k),
                _ => unreachable!(),
            }
        }
        if slots.len() > MAX_GENUS_WORD {
            return Ok(None);
        }
        let ds = slots
            .iter()
            .map(|ks| {
                let mut m = Mat::Diag(vec![1.0; cfg.n]);
                for &k in ks {
                    m = m.mul(&cfg.deterministic[k - 1].as_mat())?;
                }
                Ok(match m {
                    Mat::Diag(d) => DeterministicMatrix::Diagonal(d),
                    Mat::Dense(d) => DeterministicMatrix::Dense(d),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let n = ds.len();
        return Ok(Some(Prediction {
            value: genus_expansion_exact(&ds, n)?,
            kind: "exact",
        }));
    }
    if syms.iter().all(|s| matches!(s, Symbol::U | Symbol::UStar)) {
        if syms.len() > crate::moments::MAX_HAAR_WORD {
            return Ok(None);
        }
        let letters: Vec<HaarLetter> = syms
            .iter()
            .map(|s| if *s == Symbol::U { HaarLetter::U } else { HaarLetter::UStar })
            .collect();
        return Ok(Some(Prediction {
            value: haar_moment(&letters)?,
            kind: "exact",
        }));
    }
    if syms.len() % 4 == 0 {
        if let (Symbol::Deterministic(a), Symbol::Deterministic(b)) = (syms[0], syms[2]) {
            let period = [Symbol::Deterministic(a), Symbol::U, Symbol::Deterministic(b), Symbol::UStar];
            let n = syms.len() / 4;
            if syms.chunks(4).all(|c| c == period) && n <= crate::moments::MAX_GEODESIC_ORDER {
                let ma = empirical_moments(&cfg.deterministic[a - 1].spectrum()?, n);
                let mb = empirical_moments(&cfg.deterministic[b - 1].spectrum()?, n);
                return Ok(Some(Prediction {
                    value: geodesic_mixed_moment(&ma, &mb, n)?,
                    kind: "free",
                }));
            }
        }
    }
    Ok(None)
}

/// Equal-width histogram; `density` is normalized to integrate to one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub density: Vec<f64>,
}

impl Histogram {
    pub fn from_values(values: &[f64], bins: usize, lo: f64, hi: f64) -> Result<Self> {
        if bins == 0 {
            return Err(Error::invalid("bins must be positive"));
        }
        if !(hi > lo) {
            return Err(Error::invalid("histogram range is empty"));
        }
        let width = (hi - lo) / bins as f64;
        let mut counts = vec![0u64; bins];
        for &x in values {
            if x < lo || x > hi {
                continue;
            }
            let k = (((x - lo) / width) as usize).min(bins - 1);
            counts[k] += 1;
        }
        let total = values.len().max(1) as f64;
        let density = counts.iter().map(|&c| c as f64 / total / width).collect();
        Ok(Histogram { lo, hi, counts, density })
    }

    pub fn bin_centers(&self) -> Vec<f64> {
        let bins = self.counts.len();
        let width = (self.hi - self.lo) / bins as f64;
        (0..bins).map(|k| self.lo + (k as f64 + 0.5) * width).collect()
    }
}

/// Eigenvalues of a Hermitian matrix histogrammed over their own range.
pub fn empirical_spectrum(h: &ComplexMatrix, bins: usize) -> Result<(Vec<f64>, Histogram)> {
    let eig = h.hermitian_eigenvalues()?;
    let (lo, hi) = (eig[0], eig[eig.len() - 1]);
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let hist = Histogram::from_values(&eig, bins, lo, hi)?;
    Ok((eig, hist))
}

/// `sup_x |F_emp(x) - F(x)|` for samples and a continuous CDF `F`.
pub fn ecdf_sup_distance(samples: &[f64], cdf: &dyn Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Eigenvalues of `reps` independent GUE samples, concatenated in rep order.
pub fn gue_spectra(n: usize, reps: usize, seed: u64) -> Result<Vec<f64>> {
    let parts: Vec<Vec<f64>> = (0..reps)
        .into_par_iter()
        .map(|rep| sample_gue(n, &mut StreamRng::new(seed, rep as u64))?.hermitian_eigenvalues())
        .collect::<Result<_>>()?;
    Ok(parts.concat())
}
