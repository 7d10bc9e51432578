//! Moment–cumulant conversion on the non-crossing partition lattice, mixed
//! moments of free pairs, semicircular families and Haar-unitary cumulants.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::symmetric_eigenvalues;
use crate::ncpart::{
    enumerate_nc, enumerate_nc_pairings, geodesic_test, kreweras, mobius_nc, signed_catalan,
    Permutation, SetPartition,
};
use crate::series::{self, CumulantSequence, MomentSequence};

/// Largest order handled by lattice enumeration.
pub const MAX_LATTICE_ORDER: usize = 9;
pub const MAX_MIXED_ORDER: usize = 7;
pub const MAX_GEODESIC_ORDER: usize = 6;
pub const MAX_FAMILY_WORD: usize = 12;
pub const MAX_HAAR_WORD: usize = 16;
const HAAR_LATTICE_LIMIT: usize = 12;

fn lattice_order(upto: usize, limit: usize) -> Result<()> {
    if upto == 0 || upto > limit {
        return Err(Error::Range {
            what: "order",
            value: upto.to_string(),
            range: match limit {
                7 => "1..=7",
                6 => "1..=6",
                _ => "1..=9",
            },
        });
    }
    Ok(())
}

fn need_moments(m: &MomentSequence, upto: usize) -> Result<()> {
    if m.order() < upto {
        return Err(Error::invalid(format!(
            "need {upto} moments, sequence has {}",
            m.order()
        )));
    }
    Ok(())
}

/// Product over blocks of `eval(block)`, where `eval` receives the 1-based
/// positions of a block. Joint moments of words are expressed this way by
/// closing over the word.
pub fn generalized_moment_with(p: &SetPartition, mut eval: impl FnMut(&[usize]) -> f64) -> f64 {
    p.blocks().iter().map(|b| eval(b)).product()
}

/// `E_p(X, …, X) = Π_blocks m_{|B|}` for a single variable.
pub fn generalized_moment(m: &MomentSequence, p: &SetPartition) -> Result<f64> {
    let largest = p.blocks().iter().map(Vec::len).max().unwrap_or(0);
    need_moments(m, largest)?;
    Ok(generalized_moment_with(p, |b| m.m(b.len())))
}

/// Free cumulant of a word of length `n` by Möbius inversion over NC(n),
/// given per-block joint moments.
pub fn word_cumulant(n: usize, mut eval: impl FnMut(&[usize]) -> f64) -> Result<f64> {
    lattice_order(n, MAX_LATTICE_ORDER)?;
    let full = SetPartition::full(n);
    let mut acc = 0.0;
    for lambda in enumerate_nc(n)? {
        let mu = mobius_nc(&lambda, &full)?;
        acc += mu as f64 * generalized_moment_with(&lambda, &mut eval);
    }
    Ok(acc)
}

/// Joint moment of a word of length `n` from per-block cumulants.
pub fn word_moment(n: usize, mut cumulant: impl FnMut(&[usize]) -> f64) -> Result<f64> {
    let mut acc = 0.0;
    for pi in enumerate_nc(n)? {
        acc += generalized_moment_with(&pi, &mut cumulant);
    }
    Ok(acc)
}

/// `k_1..k_upto` by Möbius inversion on NC(n).
pub fn cumulants_from_moments(m: &MomentSequence, upto: usize) -> Result<CumulantSequence> {
    lattice_order(upto, MAX_LATTICE_ORDER)?;
    need_moments(m, upto)?;
    let k = (1..=upto)
        .map(|n| word_cumulant(n, |b| m.m(b.len())))
        .collect::<Result<Vec<_>>>()?;
    Ok(CumulantSequence::new(k))
}

/// `m_1..m_upto` as sums over NC(n) of products of cumulants.
pub fn moments_from_cumulants(k: &CumulantSequence, upto: usize) -> Result<MomentSequence> {
    lattice_order(upto, MAX_LATTICE_ORDER)?;
    if k.order() < upto {
        return Err(Error::invalid(format!(
            "need {upto} cumulants, sequence has {}",
            k.order()
        )));
    }
    let m = (1..=upto)
        .map(|n| word_moment(n, |b| k.k(b.len())))
        .collect::<Result<Vec<_>>>()?;
    Ok(MomentSequence::new(m))
}

/// Cumulants through the R-transform; no order cap.
pub fn cumulants_from_moments_series(m: &MomentSequence) -> Result<CumulantSequence> {
    series::cumulants_via_series(m)
}

/// Moments through the R-transform; no order cap.
pub fn moments_from_cumulants_series(k: &CumulantSequence) -> Result<MomentSequence> {
    series::r_to_moments(&k.to_r_series())
}

/// Largest absolute difference between lattice and series cumulants.
pub fn route_agreement(m: &MomentSequence, upto: usize) -> Result<f64> {
    let lattice = cumulants_from_moments(m, upto)?;
    let series = cumulants_from_moments_series(&m.truncate(upto))?;
    Ok(lattice.max_abs_diff(&series))
}

/// `E(a b a b ⋯ a b)` with `n` copies of each, for free `a` and `b`:
/// `Σ_{π ∈ NC(n)} k_π(a) · E_{K(π)}(b)`.
pub fn mixed_moment_free(a: &MomentSequence, b: &MomentSequence, n: usize) -> Result<f64> {
    lattice_order(n, MAX_MIXED_ORDER)?;
    need_moments(a, n)?;
    need_moments(b, n)?;
    let ka = series::cumulants_via_series(&a.truncate(n))?;
    let mut acc = 0.0;
    for pi in enumerate_nc(n)? {
        let k_pi: f64 = pi.blocks().iter().map(|v| ka.k(v.len())).product();
        if k_pi == 0.0 {
            continue;
        }
        let comp = kreweras(&pi)?;
        acc += k_pi * generalized_moment(b, &comp)?;
    }
    Ok(acc)
}

/// Product over the cycles of `sigma` of `m_{Σ powers in the cycle}`.
fn cycle_moment(m: &MomentSequence, sigma: &Permutation, powers: &[usize]) -> f64 {
    sigma
        .cycles()
        .iter()
        .map(|c| m.m(c.iter().map(|&i| powers[i - 1]).sum()))
        .product()
}

/// `φ(σ) = Π_cycles (-1)^{ℓ-1} C_{ℓ-1}`, the leading Weingarten coefficient.
pub fn moebius_weight(sigma: &Permutation) -> f64 {
    sigma
        .cycles()
        .iter()
        .map(|c| signed_catalan(c.len()) as f64)
        .product()
}

/// `E(a^{p_1} b^{q_1} a^{p_2} b^{q_2} ⋯)` for free `a`, `b` as the sum over
/// geodesic pairs `α ≤ β` in `S_n`:
/// `Σ E_α(a) · E_{β⁻¹γ}(b) · φ(α⁻¹β)` over `|α| + |α⁻¹β| + |β⁻¹γ| = n - 1`.
pub fn geodesic_mixed_moment_powers(
    a: &MomentSequence,
    b: &MomentSequence,
    pa: &[usize],
    pb: &[usize],
) -> Result<f64> {
    let n = pa.len();
    if pb.len() != n {
        return Err(Error::invalid("power lists must have equal length"));
    }
    lattice_order(n, MAX_GEODESIC_ORDER)?;
    need_moments(a, pa.iter().sum())?;
    need_moments(b, pb.iter().sum())?;
    let gamma = Permutation::long_cycle(n);
    let geodesic: Vec<Permutation> = Permutation::all(n)
        .into_iter()
        .filter(geodesic_test)
        .collect();
    let mut acc = 0.0;
    for alpha in &geodesic {
        let ea = cycle_moment(a, alpha, pa);
        let alpha_inv = alpha.inverse();
        for beta in &geodesic {
            let step = alpha_inv.multiply(beta)?;
            let rest = beta.inverse().multiply(&gamma)?;
            if alpha.length() + step.length() + rest.length() != n - 1 {
                continue;
            }
            acc += ea * cycle_moment(b, &rest, pb) * moebius_weight(&step);
        }
    }
    Ok(acc)
}

/// [`geodesic_mixed_moment_powers`] with all powers 1.
pub fn geodesic_mixed_moment(a: &MomentSequence, b: &MomentSequence, n: usize) -> Result<f64> {
    let ones = vec![1; n];
    geodesic_mixed_moment_powers(a, b, &ones, &ones)
}

/// `E(xyxy)` for free `x`, `y`: `E(x²)E(y²) - Var(x)Var(y)`.
pub fn exyxy_closed_form(x: &MomentSequence, y: &MomentSequence) -> f64 {
    x.m(2) * y.m(2) - x.variance() * y.variance()
}

/// Symmetric nonnegative-definite covariance of a semicircular family.
#[derive(Clone, Debug, PartialEq)]
pub struct CovarianceMatrix {
    c: Vec<Vec<f64>>,
}

impl CovarianceMatrix {
    pub fn new(c: Vec<Vec<f64>>) -> Result<Self> {
        let r = c.len();
        if r == 0 || c.iter().any(|row| row.len() != r) {
            return Err(Error::invalid("covariance must be a nonempty square matrix"));
        }
        for i in 0..r {
            for j in 0..i {
                if (c[i][j] - c[j][i]).abs() > 1e-12 {
                    return Err(Error::invalid("covariance must be symmetric"));
                }
            }
        }
        let smallest = symmetric_eigenvalues(&c)?[0];
        if smallest < -1e-10 {
            return Err(Error::invalid(format!(
                "covariance is not nonnegative-definite (smallest eigenvalue {smallest:e})"
            )));
        }
        Ok(CovarianceMatrix { c })
    }

    pub fn identity(r: usize) -> Self {
        CovarianceMatrix {
            c: (0..r)
                .map(|i| (0..r).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.c.len()
    }

    /// Entry `c_ij` with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.c[i - 1][j - 1]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.c
    }
}

/// `E(s_{i_1} ⋯ s_{i_n}) = Σ_{π ∈ NC₂(n)} Π_{(p,q) ∈ π} c_{i_p i_q}` for a
/// semicircular family; `word` holds 1-based variable indices.
pub fn semicircle_family_moment(c: &CovarianceMatrix, word: &[usize]) -> Result<f64> {
    if word.len() > MAX_FAMILY_WORD {
        return Err(Error::range("word length", word.len(), "0..=12"));
    }
    if let Some(&bad) = word.iter().find(|&&i| i == 0 || i > c.dim()) {
        return Err(Error::range("variable index", bad, "1..=dim"));
    }
    if word.is_empty() {
        return Ok(1.0);
    }
    Ok(enumerate_nc_pairings(word.len())
        .iter()
        .map(|pi| {
            pi.blocks()
                .iter()
                .map(|b| c.get(word[b[0] - 1], word[b[1] - 1]))
                .product::<f64>()
        })
        .sum())
}

/// A letter of a word in a Haar unitary and its adjoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HaarLetter {
    U,
    UStar,
}

/// A word over `{u, u*}`, written e.g. `"u u* u u*"` or `"u,u*"`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HaarWord(pub Vec<HaarLetter>);

impl FromStr for HaarWord {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .map(|t| match t {
                "u" | "U" => Ok(HaarLetter::U),
                "u*" | "U*" => Ok(HaarLetter::UStar),
                other => Err(Error::Parse(format!("unknown letter {other:?}"))),
            })
            .collect::<Result<Vec<_>>>()
            .map(HaarWord)
    }
}

impl fmt::Display for HaarWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|l| match l {
                HaarLetter::U => "u",
                HaarLetter::UStar => "u*",
            })
            .collect();
        f.write_str(&parts.join(" "))
    }
}

/// Free cumulant of `(u, u*)`-entries: `(-1)^{n-1} C_{n-1}` for alternating
/// words of length `2n`, zero otherwise.
pub fn haar_cumulant(word: &[HaarLetter]) -> Result<f64> {
    if word.len() > MAX_HAAR_WORD {
        return Err(Error::range("word length", word.len(), "0..=16"));
    }
    let len = word.len();
    if len == 0 || len % 2 == 1 || word.windows(2).any(|w| w[0] == w[1]) {
        return Ok(0.0);
    }
    Ok(signed_catalan(len / 2) as f64)
}

/// `E(word)` for a Haar unitary, by summing Haar cumulants over NC(n) for
/// short words and by the unitary relation `uu* = u*u = 1` beyond that.
pub fn haar_moment(word: &[HaarLetter]) -> Result<f64> {
    let n = word.len();
    if n == 0 {
        return Ok(1.0);
    }
    let ups = word.iter().filter(|&&l| l == HaarLetter::U).count();
    if 2 * ups != n {
        return Ok(0.0);
    }
    if n > HAAR_LATTICE_LIMIT {
        return Ok(1.0);
    }
    let mut sub = Vec::with_capacity(n);
    word_moment(n, |block| {
        sub.clear();
        sub.extend(block.iter().map(|&i| word[i - 1]));
        haar_cumulant(&sub).expect("length checked")
    })
}

/// Cumulants `k_n(X*X, …, X*X) = Σ_{π ∈ NC(n)} Π a_{|V|}` of an R-diagonal
/// element from its alternating cumulants `a_s = k_{2s}(X, X*, …, X, X*)`.
pub fn xxstar_cumulants_from_alternating(a: &[f64]) -> Result<CumulantSequence> {
    let n = a.len();
    lattice_order(n, MAX_LATTICE_ORDER)?;
    let k = (1..=n)
        .map(|j| word_moment(j, |b| a[b.len() - 1]))
        .collect::<Result<Vec<_>>>()?;
    Ok(CumulantSequence::new(k))
}

/// Inverse of [`xxstar_cumulants_from_alternating`], solved triangularly.
pub fn alternating_from_xxstar_cumulants(k: &CumulantSequence) -> Result<Vec<f64>> {
    let n = k.order();
    lattice_order(n, MAX_LATTICE_ORDER)?;
    let mut a: Vec<f64> = Vec::with_capacity(n);
    for j in 1..=n {
        // every partition except 1_j only involves a_1..a_{j-1}
        let mut rest = 0.0;
        for pi in enumerate_nc(j)? {
            if pi.block_count() == 1 {
                continue;
            }
            rest += generalized_moment_with(&pi, |b| a[b.len() - 1]);
        }
        a.push(k.k(j) - rest);
    }
    Ok(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::freeness_oracle::FreeOracle;
    use proptest::prelude::*;

    fn ms(v: &[f64]) -> MomentSequence {
        MomentSequence::new(v.to_vec())
    }

    fn semicircle(order: usize) -> MomentSequence {
        let cat = [1.0, 1.0, 2.0, 5.0, 14.0, 42.0, 132.0];
        MomentSequence::new((1..=order).map(|k| if k % 2 == 0 { cat[k / 2] } else { 0.0 }).collect())
    }

    fn bell_like(lambda: f64, n: usize) -> f64 {
        // Σ_{π ∈ NC(n)} λ^{#blocks} by brute enumeration
        enumerate_nc(n).unwrap().iter().map(|p| lambda.powi(p.block_count() as i32)).sum()
    }

    #[test]
    fn semicircle_cumulants() {
        let k = cumulants_from_moments(&semicircle(9), 9).unwrap();
        for n in 1..=9 {
            let expected = if n == 2 { 1.0 } else { 0.0 };
            assert!((k.k(n) - expected).abs() < 1e-12, "k_{n}");
        }
        let m = moments_from_cumulants(&k, 6).unwrap();
        assert_eq!(m.as_slice(), &[0.0, 1.0, 0.0, 2.0, 0.0, 5.0]);
    }

    #[test]
    fn free_poisson_cumulants() {
        for lambda in [0.5, 1.0, 2.0] {
            let m = MomentSequence::new((1..=8).map(|n| bell_like(lambda, n)).collect());
            let k = cumulants_from_moments(&m, 8).unwrap();
            assert!(k.as_slice().iter().all(|c| (c - lambda).abs() < 1e-10));
        }
        let m = moments_from_cumulants(&CumulantSequence::new(vec![1.0; 4]), 4).unwrap();
        assert_eq!(m.as_slice(), &[1.0, 2.0, 5.0, 14.0]);
    }

    #[test]
    fn low_order_identities() {
        let m = ms(&[0.3, 1.7, -0.2, 4.0]);
        let k = cumulants_from_moments(&m, 4).unwrap();
        assert!((k.k(1) - 0.3).abs() < 1e-15);
        assert!((k.k(2) - m.variance()).abs() < 1e-15);
        let x: f64 = 1.5;
        let delta = moments_from_cumulants(&CumulantSequence::new(vec![x, 0.0, 0.0, 0.0, 0.0]), 5).unwrap();
        for n in 1..=5 {
            assert!((delta.m(n) - x.powi(n as i32)).abs() < 1e-12);
        }
    }

    #[test]
    fn order_limits() {
        let m = MomentSequence::new(vec![1.0; 10]);
        assert!(matches!(cumulants_from_moments(&m, 10), Err(Error::Range { .. })));
        assert!(cumulants_from_moments(&ms(&[1.0, 2.0]), 3).is_err());
        assert!(mixed_moment_free(&m, &m, 8).is_err());
        assert!(geodesic_mixed_moment(&m, &m, 7).is_err());
    }

    #[test]
    fn generalized_moments() {
        let m = semicircle(4);
        assert_eq!(generalized_moment(&m, &"{1,4}{2,3}".parse().unwrap()).unwrap(), 1.0);
        assert_eq!(generalized_moment(&m, &SetPartition::full(4)).unwrap(), 2.0);
        let b = ms(&[0.5, 1.0, 1.0]);
        assert_eq!(generalized_moment(&b, &SetPartition::discrete(3)).unwrap(), 0.125);
    }

    #[test]
    fn exyxy_three_ways() {
        let x = ms(&[0.4, 1.1, 0.9, 2.5]);
        let y = ms(&[-0.7, 2.0, -1.3, 6.0]);
        let closed = exyxy_closed_form(&x, &y);
        let lattice = mixed_moment_free(&x, &y, 2).unwrap();
        let mut oracle = FreeOracle::new(vec![x.as_slice().to_vec(), y.as_slice().to_vec()]);
        let direct = oracle.moment(&[0, 1, 0, 1]);
        assert!((closed - lattice).abs() < 1e-12);
        assert!((closed - direct).abs() < 1e-12);
        assert!((mixed_moment_free(&x, &y, 1).unwrap() - 0.4 * -0.7).abs() < 1e-15);
    }

    #[test]
    fn symmetric_bernoulli_odd_word_vanishes() {
        let b = ms(&[0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        assert!(mixed_moment_free(&b, &b, 3).unwrap().abs() < 1e-14);
    }

    #[test]
    fn geodesic_two_term_example() {
        let a = ms(&[0.5, 1.5]);
        let b = ms(&[-1.0, 3.0]);
        let expected = 0.25 * 3.0 + 1.5 * 1.0 - 0.25 * 1.0;
        assert!((geodesic_mixed_moment(&a, &b, 2).unwrap() - expected).abs() < 1e-14);
        assert!((geodesic_mixed_moment(&a, &b, 1).unwrap() + 0.5).abs() < 1e-15);
    }

    #[test]
    fn geodesic_matches_lattice_semicircle_mp() {
        let mp = ms(&[1.0, 2.0, 5.0, 14.0, 42.0, 132.0]);
        let s = semicircle(6);
        for n in 1..=6 {
            let g = geodesic_mixed_moment(&s, &mp, n).unwrap();
            let l = mixed_moment_free(&s, &mp, n).unwrap();
            assert!((g - l).abs() < 1e-9, "n = {n}: {g} vs {l}");
        }
    }

    #[test]
    fn geodesic_powers_match_oracle() {
        let a = ms(&[0.3, 1.2, 0.5, 2.0, 1.1, 4.0]);
        let b = ms(&[1.0, 2.0, 5.0, 14.0, 42.0, 132.0]);
        let g = geodesic_mixed_moment_powers(&a, &b, &[2, 1, 1], &[1, 1, 1]).unwrap();
        let mut oracle = FreeOracle::new(vec![a.as_slice().to_vec(), b.as_slice().to_vec()]);
        let o = oracle.moment(&[0, 0, 1, 0, 1, 0, 1]);
        assert!((g - o).abs() < 1e-10, "{g} vs {o}");
    }

    #[test]
    fn mixed_moment_matches_oracle() {
        let a = ms(&[0.2, 1.3, -0.4, 2.9, 0.7, 8.0, -1.0]);
        let b = ms(&[-0.5, 0.9, 0.3, 1.8, -0.6, 4.4, 1.5]);
        let mut oracle = FreeOracle::new(vec![a.as_slice().to_vec(), b.as_slice().to_vec()]);
        for n in 1..=5 {
            let word: Vec<usize> = (0..2 * n).map(|i| i % 2).collect();
            let o = oracle.moment(&word);
            let l = mixed_moment_free(&a, &b, n).unwrap();
            assert!((o - l).abs() < 1e-9, "n = {n}: {o} vs {l}");
        }
    }

    #[test]
    fn mixed_cumulants_vanish() {
        let a = [0.2, 1.3, -0.4, 2.9, 0.7];
        let b = [-0.5, 0.9, 0.3, 1.8, -0.6];
        let mut oracle = FreeOracle::new(vec![a.to_vec(), b.to_vec()]);
        for n in 2..=5 {
            for mask in 1..(1u32 << n) - 1 {
                let word: Vec<usize> = (0..n).map(|i| ((mask >> i) & 1) as usize).collect();
                let k = word_cumulant(n, |blk| {
                    let sub: Vec<usize> = blk.iter().map(|&i| word[i - 1]).collect();
                    oracle.moment(&sub)
                })
                .unwrap();
                assert!(k.abs() < 1e-9, "word {word:?}: {k}");
            }
        }
    }

    #[test]
    fn semicircle_family_examples() {
        let id = CovarianceMatrix::identity(2);
        assert_eq!(semicircle_family_moment(&id, &[1, 2, 1, 2]).unwrap(), 0.0);
        assert_eq!(semicircle_family_moment(&id, &[1, 2, 2, 1]).unwrap(), 1.0);
        assert_eq!(semicircle_family_moment(&id, &[1, 1, 1, 1]).unwrap(), 2.0);
        assert_eq!(semicircle_family_moment(&id, &[1, 1, 2]).unwrap(), 0.0);
        let c = CovarianceMatrix::new(vec![vec![2.0, 0.5], vec![0.5, 1.0]]).unwrap();
        assert_eq!(semicircle_family_moment(&c, &[1, 2]).unwrap(), 0.5);
        assert!(semicircle_family_moment(&c, &[3]).is_err());
        let one = CovarianceMatrix::identity(1);
        for k in 1..=6 {
            let v = semicircle_family_moment(&one, &vec![1; 2 * k]).unwrap();
            assert_eq!(v, crate::ncpart::catalan(k as u32).unwrap() as f64);
        }
    }

    #[test]
    fn covariance_validation() {
        assert!(CovarianceMatrix::new(vec![vec![1.0, 2.0], vec![2.0, 1.0]]).is_err());
        assert!(CovarianceMatrix::new(vec![vec![1.0, 0.1], vec![0.0, 1.0]]).is_err());
        assert!(CovarianceMatrix::new(vec![vec![1.0, 1.0], vec![1.0, 1.0]]).is_ok());
    }

    #[test]
    fn linear_transform_of_family() {
        // x = A s with s standard: moments of x follow C = A Aᵀ
        let a = [[1.0, 0.5], [-0.3, 2.0]];
        let c: Vec<Vec<f64>> = (0..2)
            .map(|i| (0..2).map(|j| (0..2).map(|k| a[i][k] * a[j][k]).sum()).collect())
            .collect();
        let cov = CovarianceMatrix::new(c).unwrap();
        let id = CovarianceMatrix::identity(2);
        let word = [1usize, 2, 2, 1, 1, 2];
        let mut expanded = 0.0;
        for choice in 0..(1usize << word.len()) {
            let sub: Vec<usize> = (0..word.len()).map(|p| (choice >> p) & 1).collect();
            let coeff: f64 = word.iter().zip(&sub).map(|(&i, &k)| a[i - 1][k]).product();
            let s_word: Vec<usize> = sub.iter().map(|k| k + 1).collect();
            expanded += coeff * semicircle_family_moment(&id, &s_word).unwrap();
        }
        let direct = semicircle_family_moment(&cov, &word).unwrap();
        assert!((expanded - direct).abs() < 1e-12);
    }

    #[test]
    fn haar_cumulant_examples() {
        let w = |s: &str| s.parse::<HaarWord>().unwrap().0;
        assert_eq!(haar_cumulant(&w("u u*")).unwrap(), 1.0);
        assert_eq!(haar_cumulant(&w("u u* u u*")).unwrap(), -1.0);
        assert_eq!(haar_cumulant(&w("u u u* u*")).unwrap(), 0.0);
        assert_eq!(haar_cumulant(&w("u* u u* u u* u")).unwrap(), 2.0);
        assert_eq!(haar_moment(&w("u u* u u*")).unwrap(), 1.0);
        assert_eq!(haar_moment(&w("u u u* u*")).unwrap(), 1.0);
        assert_eq!(haar_moment(&w("u u")).unwrap(), 0.0);
        assert_eq!(haar_moment(&[]).unwrap(), 1.0);
        assert!("u v".parse::<HaarWord>().is_err());
    }

    #[test]
    fn haar_moments_of_balanced_words_are_one() {
        // every balanced word of length ≤ 8 through the lattice sum
        for len in (2..=8).step_by(2) {
            for mask in 0u32..(1 << len) {
                if mask.count_ones() as usize * 2 != len {
                    continue;
                }
                let word: Vec<HaarLetter> = (0..len)
                    .map(|i| if mask >> i & 1 == 1 { HaarLetter::U } else { HaarLetter::UStar })
                    .collect();
                assert!((haar_moment(&word).unwrap() - 1.0).abs() < 1e-12, "{}", HaarWord(word));
            }
        }
    }

    #[test]
    fn xxstar_examples() {
        let k = xxstar_cumulants_from_alternating(&[0.7, 0.2]).unwrap();
        assert!((k.k(1) - 0.7).abs() < 1e-15);
        assert!((k.k(2) - (0.2 + 0.49)).abs() < 1e-15);
        let haar: Vec<f64> = (1..=8).map(|s| signed_catalan(s) as f64).collect();
        let k = xxstar_cumulants_from_alternating(&haar).unwrap();
        assert!((k.k(1) - 1.0).abs() < 1e-12);
        assert!(k.as_slice()[1..].iter().all(|c| c.abs() < 1e-12));
        let back = alternating_from_xxstar_cumulants(&k).unwrap();
        assert!(back.iter().zip(&haar).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn moebius_weight_values() {
        let w = |s: &str| moebius_weight(&s.parse().unwrap());
        assert_eq!(w("(1)(2)"), 1.0);
        assert_eq!(w("(1 2)"), -1.0);
        assert_eq!(w("(1 2 3)"), 2.0);
        assert_eq!(w("(1 2)(3 4)"), 1.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn cumulant_round_trip(
            atoms in proptest::collection::vec((-1.0f64..1.0, 0.05f64..1.0), 1..6),
        ) {
            // moments of a random atomic probability measure
            let total: f64 = atoms.iter().map(|a| a.1).sum();
            let m = MomentSequence::new(
                (1..=9)
                    .map(|k| atoms.iter().map(|(x, w)| w / total * x.powi(k)).sum())
                    .collect(),
            );
            let k = cumulants_from_moments(&m, 9).unwrap();
            let back = moments_from_cumulants(&k, 9).unwrap();
            prop_assert!(back.max_abs_diff(&m) < 1e-10);
            prop_assert!(route_agreement(&m, 9).unwrap() < 1e-9);
        }

        #[test]
        fn moment_round_trip(v in proptest::collection::vec(-1.0f64..1.0, 9)) {
            let k = CumulantSequence::new(v);
            let m = moments_from_cumulants(&k, 9).unwrap();
            let back = cumulants_from_moments(&m, 9).unwrap();
            prop_assert!(back.max_abs_diff(&k) < 1e-10);
        }

        #[test]
        fn geodesic_equals_kreweras(
            a in proptest::collection::vec(-1.5f64..1.5, 5),
            b in proptest::collection::vec(-1.5f64..1.5, 5),
            n in 1usize..=5,
        ) {
            let (a, b) = (MomentSequence::new(a), MomentSequence::new(b));
            let g = geodesic_mixed_moment(&a, &b, n).unwrap();
            let l = mixed_moment_free(&a, &b, n).unwrap();
            prop_assert!((g - l).abs() < 1e-9);
        }
    }
}
