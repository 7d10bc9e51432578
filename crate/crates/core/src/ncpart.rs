//! Non-crossing partitions, pairings and permutations.
//!
//! Ground sets are `{1..n}` throughout. Partitions are kept canonical: each
//! block is increasing and blocks are ordered by their minimum, so structural
//! equality is partition equality.
//!
//! Permutations compose right to left: `multiply(s, r)` is `s ∘ r`, i.e. `r`
//! acts first. With this convention the Kreweras complement of a non-crossing
//! partition `p` is the cycle decomposition of `p⁻¹γ` where `γ = (1 2 … n)`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest `k` for which `catalan(k)` is computed in exact 64-bit arithmetic.
pub const MAX_CATALAN: u32 = 30;
/// Largest ground set accepted by [`enumerate_nc`].
pub const MAX_NC_ENUM: usize = 14;
/// Largest ground set accepted by [`enumerate_all_pairings`].
pub const MAX_PAIRING_ENUM: usize = 16;

/// Catalan number `C_k = binom(2k, k) / (k + 1)`.
pub fn catalan(k: u32) -> Result<u64> {
    if k > MAX_CATALAN {
        return Err(Error::range("k", k, "0..=30"));
    }
    // C_{j+1} = C_j * 2(2j+1) / (j+2); the division is exact at every step.
    let mut c: u64 = 1;
    for j in 0..k as u64 {
        c = c * 2 * (2 * j + 1) / (j + 2);
    }
    Ok(c)
}

/// `(-1)^(k-1) C_(k-1)`, the Möbius value μ(0_k, 1_k) of NC(k). Requires `k ≥ 1`.
pub(crate) fn signed_catalan(k: usize) -> i64 {
    debug_assert!(k >= 1);
    let c = catalan((k - 1) as u32).expect("block size within exact range") as i64;
    if k % 2 == 1 {
        c
    } else {
        -c
    }
}

/// `(n-1)!!` for even `n`, the number of pairings of `n` points.
pub fn pairing_count(n: usize) -> u64 {
    if n % 2 == 1 {
        return 0;
    }
    (1..n as u64).step_by(2).product()
}

/// A partition of `{1..n}` in canonical form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SetPartition {
    n: usize,
    blocks: Vec<Vec<usize>>,
}

impl SetPartition {
    /// Builds a partition from arbitrary blocks, canonicalizing the order.
    pub fn new(n: usize, blocks: Vec<Vec<usize>>) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("ground set must be nonempty"));
        }
        let mut seen = vec![false; n];
        let mut blocks = blocks;
        for block in blocks.iter_mut() {
            if block.is_empty() {
                return Err(Error::invalid("empty block"));
            }
            block.sort_unstable();
            for &e in block.iter() {
                if e == 0 || e > n {
                    return Err(Error::invalid(format!("element {e} outside 1..={n}")));
                }
                if seen[e - 1] {
                    return Err(Error::invalid(format!("element {e} appears twice")));
                }
                seen[e - 1] = true;
            }
        }
        if let Some(missing) = seen.iter().position(|s| !s) {
            return Err(Error::invalid(format!("element {} not covered", missing + 1)));
        }
        blocks.sort_unstable_by_key(|b| b[0]);
        Ok(SetPartition { n, blocks })
    }

    /// Builds a partition from a block label per element (`labels[i]` is the
    /// label of element `i + 1`). Labels need not be contiguous.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map: Vec<(usize, Vec<usize>)> = Vec::new();
        for (i, &l) in labels.iter().enumerate() {
            match map.iter_mut().find(|(k, _)| *k == l) {
                Some((_, b)) => b.push(i + 1),
                None => map.push((l, vec![i + 1])),
            }
        }
        // first-occurrence order is already sorted by block minimum
        SetPartition {
            n: labels.len(),
            blocks: map.into_iter().map(|(_, b)| b).collect(),
        }
    }

    /// The minimal element `0_n` (all singletons).
    pub fn discrete(n: usize) -> Self {
        SetPartition {
            n,
            blocks: (1..=n).map(|i| vec![i]).collect(),
        }
    }

    /// The maximal element `1_n` (one block).
    pub fn full(n: usize) -> Self {
        SetPartition {
            n,
            blocks: vec![(1..=n).collect()],
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<usize>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    /// Block index of each element; `labels()[i]` belongs to element `i + 1`.
    pub fn labels(&self) -> Vec<usize> {
        let mut labels = vec![0; self.n];
        for (k, block) in self.blocks.iter().enumerate() {
            for &e in block {
                labels[e - 1] = k;
            }
        }
        labels
    }

    pub fn is_noncrossing(&self) -> bool {
        is_noncrossing(self)
    }

    pub fn is_pairing(&self) -> bool {
        self.blocks.iter().all(|b| b.len() == 2)
    }
}

impl fmt::Display for SetPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for block in &self.blocks {
            write!(f, "{{")?;
            for (i, e) in block.iter().enumerate() {
                if i > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{e}")?;
            }
            write!(f, "}}")?;
        }
        Ok(())
    }
}

impl FromStr for SetPartition {
    type Err = Error;

    /// Parses block notation such as `{1,4}{2,3}`; `n` is the largest element.
    fn from_str(s: &str) -> Result<Self> {
        let mut blocks = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('{')
                .ok_or_else(|| Error::Parse(format!("expected '{{' in {s:?}")))?;
            let close = open
                .find('}')
                .ok_or_else(|| Error::Parse(format!("unclosed block in {s:?}")))?;
            let block = open[..close]
                .split(',')
                .map(|t| {
                    t.trim()
                        .parse::<usize>()
                        .map_err(|_| Error::Parse(format!("bad element {t:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            blocks.push(block);
            rest = open[close + 1..].trim_start();
        }
        let n = blocks.iter().flatten().copied().max().unwrap_or(0);
        SetPartition::new(n, blocks)
    }
}

/// True iff no `i < j < k < l` has `i, k` in one block and `j, l` in another.
pub fn is_noncrossing(p: &SetPartition) -> bool {
    let labels = p.labels();
    // Two blocks cross iff some element lying between consecutive members of
    // one block belongs to a block reaching outside that gap.
    for (a, ba) in p.blocks.iter().enumerate() {
        for w in ba.windows(2) {
            // elements strictly between consecutive members of block a must
            // belong to blocks nested inside (w[0], w[1])
            for e in w[0] + 1..w[1] {
                let b = labels[e - 1];
                if b == a {
                    continue;
                }
                let bb = &p.blocks[b];
                if bb[0] < w[0] || *bb.last().unwrap() > w[1] {
                    return false;
                }
            }
        }
    }
    true
}

/// All non-crossing partitions of `{1..n}` in restricted-growth order.
pub fn enumerate_nc(n: usize) -> Result<Vec<SetPartition>> {
    if n == 0 || n > MAX_NC_ENUM {
        return Err(Error::range("n", n, "1..=14"));
    }
    let mut out = Vec::new();
    let mut labels = Vec::with_capacity(n);
    let mut last: Vec<usize> = Vec::with_capacity(n);
    let mut first: Vec<usize> = Vec::with_capacity(n);
    nc_dfs(n, &mut labels, &mut first, &mut last, &mut out);
    Ok(out)
}

fn nc_dfs(
    n: usize,
    labels: &mut Vec<usize>,
    first: &mut Vec<usize>,
    last: &mut Vec<usize>,
    out: &mut Vec<SetPartition>,
) {
    let i = labels.len(); // 0-based element being placed
    if i == n {
        out.push(SetPartition::from_labels(labels));
        return;
    }
    for b in 0..last.len() {
        // joining block b is allowed iff every element after b's last one
        // belongs to a block that starts after it
        let l = last[b];
        if (l + 1..i).all(|j| first[labels[j]] > l) {
            let prev = last[b];
            last[b] = i;
            labels.push(b);
            nc_dfs(n, labels, first, last, out);
            labels.pop();
            last[b] = prev;
        }
    }
    first.push(i);
    last.push(i);
    labels.push(last.len() - 1);
    nc_dfs(n, labels, first, last, out);
    labels.pop();
    last.pop();
    first.pop();
}

/// Non-crossing pairings of `{1..n}`; empty for odd `n`.
pub fn enumerate_nc_pairings(n: usize) -> Vec<SetPartition> {
    if n == 0 || n % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut pairs = Vec::with_capacity(n / 2);
    nc_pairings_rec(&(1..=n).collect::<Vec<_>>(), &mut pairs, &mut Vec::new(), &mut out, n);
    out.sort();
    out
}

// Pairs the first element of `seg` with a partner that leaves an even gap,
// then recurses on the inside and the remainder. `pending` holds outer
// segments still to be paired.
fn nc_pairings_rec(
    seg: &[usize],
    pairs: &mut Vec<Vec<usize>>,
    pending: &mut Vec<Vec<usize>>,
    out: &mut Vec<SetPartition>,
    n: usize,
) {
    if seg.is_empty() {
        match pending.pop() {
            None => out.push(SetPartition::new(n, pairs.clone()).expect("valid pairing")),
            Some(next) => {
                nc_pairings_rec(&next, pairs, pending, out, n);
                pending.push(next);
            }
        }
        return;
    }
    for k in (1..seg.len()).step_by(2) {
        pairs.push(vec![seg[0], seg[k]]);
        pending.push(seg[k + 1..].to_vec());
        nc_pairings_rec(&seg[1..k], pairs, pending, out, n);
        pending.pop();
        pairs.pop();
    }
}

/// Every pairing of `{1..n}`; empty for odd `n`. There are `(n-1)!!`.
pub fn enumerate_all_pairings(n: usize) -> Result<Vec<SetPartition>> {
    if n > MAX_PAIRING_ENUM {
        return Err(Error::range("n", n, "0..=16"));
    }
    if n == 0 || n % 2 == 1 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(pairing_count(n) as usize);
    let mut free: Vec<usize> = (1..=n).collect();
    let mut pairs = Vec::with_capacity(n / 2);
    all_pairings_rec(&mut free, &mut pairs, &mut out, n);
    Ok(out)
}

fn all_pairings_rec(
    free: &mut Vec<usize>,
    pairs: &mut Vec<Vec<usize>>,
    out: &mut Vec<SetPartition>,
    n: usize,
) {
    if free.is_empty() {
        out.push(SetPartition::new(n, pairs.clone()).expect("valid pairing"));
        return;
    }
    let a = free.remove(0);
    for k in 0..free.len() {
        let b = free.remove(k);
        pairs.push(vec![a, b]);
        all_pairings_rec(free, pairs, out, n);
        pairs.pop();
        free.insert(k, b);
    }
    free.insert(0, a);
}

fn same_n(a: &SetPartition, b: &SetPartition) -> Result<()> {
    if a.n != b.n {
        return Err(Error::invalid(format!(
            "partitions of different ground sets ({} vs {})",
            a.n, b.n
        )));
    }
    Ok(())
}

/// True iff every block of `a` lies inside a block of `b` (`a ≼ b`).
pub fn refines(a: &SetPartition, b: &SetPartition) -> Result<bool> {
    same_n(a, b)?;
    let lb = b.labels();
    Ok(a
        .blocks
        .iter()
        .all(|block| block.iter().all(|&e| lb[e - 1] == lb[block[0] - 1])))
}

/// Greatest lower bound: the common refinement.
pub fn meet(a: &SetPartition, b: &SetPartition) -> Result<SetPartition> {
    same_n(a, b)?;
    let (la, lb) = (a.labels(), b.labels());
    let keys: Vec<usize> = la.iter().zip(&lb).map(|(x, y)| x * a.n + y).collect();
    Ok(SetPartition::from_labels(&keys))
}

/// Least upper bound in NC(n): overlap closure followed by merging crossing
/// blocks until the result is non-crossing.
pub fn join(a: &SetPartition, b: &SetPartition) -> Result<SetPartition> {
    same_n(a, b)?;
    let n = a.n;
    let mut uf = UnionFind::new(n);
    for block in a.blocks.iter().chain(&b.blocks) {
        for &e in &block[1..] {
            uf.union(block[0] - 1, e - 1);
        }
    }
    loop {
        let labels: Vec<usize> = (0..n).map(|i| uf.find(i)).collect();
        let p = SetPartition::from_labels(&labels);
        match first_crossing(&p) {
            None => return Ok(p),
            Some((x, y)) => uf.union(x - 1, y - 1),
        }
    }
}

// Returns representatives of two crossing blocks, if any.
fn first_crossing(p: &SetPartition) -> Option<(usize, usize)> {
    let labels = p.labels();
    for block in &p.blocks {
        for w in block.windows(2) {
            for e in w[0] + 1..w[1] {
                let other = &p.blocks[labels[e - 1]];
                if other[0] < w[0] || *other.last().unwrap() > w[1] {
                    return Some((w[0], e));
                }
            }
        }
    }
    None
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.parent[r] != r {
            r = self.parent[r];
        }
        let mut c = x;
        while self.parent[c] != r {
            let next = self.parent[c];
            self.parent[c] = r;
            c = next;
        }
        r
    }

    fn union(&mut self, x: usize, y: usize) {
        let (rx, ry) = (self.find(x), self.find(y));
        if rx != ry {
            // keep the smaller root so labels stay stable
            let (lo, hi) = if rx < ry { (rx, ry) } else { (ry, rx) };
            self.parent[hi] = lo;
        }
    }
}

/// Kreweras complement, relabeled from the barred points back onto `{1..n}`
/// (point `ī`, which sits between `i` and `i + 1`, becomes `i`).
pub fn kreweras(p: &SetPartition) -> Result<SetPartition> {
    if !p.is_noncrossing() {
        return Err(Error::invalid(format!("{p} is crossing")));
    }
    let sigma = nc_to_geodesic_perm(p);
    let k = sigma.inverse().multiply(&Permutation::long_cycle(p.n))?;
    Ok(k.to_partition())
}

/// Möbius function μ(a, b) of the lattice NC(n).
///
/// The interval `[a, b]` factors over the blocks of `b`; on each block the
/// interval `[a|B, 1_B]` is isomorphic to `[0, K(a|B)]`, which is a product of
/// full lattices NC(|V|) over the blocks `V` of the complement.
pub fn mobius_nc(a: &SetPartition, b: &SetPartition) -> Result<i64> {
    if !a.is_noncrossing() || !b.is_noncrossing() {
        return Err(Error::invalid("mobius_nc needs non-crossing arguments"));
    }
    if !refines(a, b)? {
        return Err(Error::invalid(format!("{a} is not below {b}")));
    }
    let la = a.labels();
    let mut mu = 1i64;
    for block in &b.blocks {
        let restricted: Vec<usize> = block.iter().map(|&e| la[e - 1]).collect();
        let sub = SetPartition::from_labels(&restricted);
        for v in kreweras(&sub)?.blocks() {
            mu *= signed_catalan(v.len());
        }
    }
    Ok(mu)
}

/// A permutation of `{1..n}`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    // 0-based images: map[i] = σ(i + 1) - 1
    map: Vec<usize>,
}

impl Permutation {
    /// Builds from 1-based images: `images[i - 1] = σ(i)`.
    pub fn new(images: &[usize]) -> Result<Self> {
        let n = images.len();
        let mut seen = vec![false; n];
        let mut map = Vec::with_capacity(n);
        for &x in images {
            if x == 0 || x > n || seen[x - 1] {
                return Err(Error::invalid(format!("{images:?} is not a permutation")));
            }
            seen[x - 1] = true;
            map.push(x - 1);
        }
        Ok(Permutation { map })
    }

    pub fn identity(n: usize) -> Self {
        Permutation {
            map: (0..n).collect(),
        }
    }

    /// `γ = (1 2 … n)`.
    pub fn long_cycle(n: usize) -> Self {
        Permutation {
            map: (0..n).map(|i| (i + 1) % n).collect(),
        }
    }

    /// Builds from disjoint 1-based cycles; unlisted points are fixed.
    pub fn from_cycles(n: usize, cycles: &[Vec<usize>]) -> Result<Self> {
        let mut images: Vec<usize> = (1..=n).collect();
        let mut used = vec![false; n];
        for c in cycles {
            for (k, &x) in c.iter().enumerate() {
                if x == 0 || x > n || used[x - 1] {
                    return Err(Error::invalid(format!("bad cycle {c:?}")));
                }
                used[x - 1] = true;
                images[x - 1] = c[(k + 1) % c.len()];
            }
        }
        Permutation::new(&images)
    }

    pub fn n(&self) -> usize {
        self.map.len()
    }

    /// 1-based image of the 1-based point `i`.
    pub fn apply(&self, i: usize) -> usize {
        self.map[i - 1] + 1
    }

    pub fn images(&self) -> Vec<usize> {
        self.map.iter().map(|x| x + 1).collect()
    }

    /// `self ∘ other` (`other` acts first).
    pub fn multiply(&self, other: &Permutation) -> Result<Permutation> {
        if self.n() != other.n() {
            return Err(Error::invalid("permutations of different sizes"));
        }
        Ok(Permutation {
            map: other.map.iter().map(|&i| self.map[i]).collect(),
        })
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.n()];
        for (i, &x) in self.map.iter().enumerate() {
            inv[x] = i;
        }
        Permutation { map: inv }
    }

    /// Disjoint cycles (1-based), each starting at its smallest element,
    /// ordered by that element. Fixed points are included.
    pub fn cycles(&self) -> Vec<Vec<usize>> {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut cycle = Vec::new();
            let mut i = start;
            while !seen[i] {
                seen[i] = true;
                cycle.push(i + 1);
                i = self.map[i];
            }
            out.push(cycle);
        }
        out
    }

    pub fn cycle_count(&self) -> usize {
        let n = self.n();
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if !seen[start] {
                count += 1;
                let mut i = start;
                while !seen[i] {
                    seen[i] = true;
                    i = self.map[i];
                }
            }
        }
        count
    }

    /// Minimal number of transpositions: `n - #cycles`.
    pub fn length(&self) -> usize {
        self.n() - self.cycle_count()
    }

    /// Cycle lengths in non-increasing order (the conjugacy class).
    pub fn cycle_type(&self) -> IntegerPartitionClass {
        let mut parts: Vec<usize> = self.cycles().iter().map(Vec::len).collect();
        parts.sort_unstable_by(|a, b| b.cmp(a));
        IntegerPartitionClass { parts }
    }

    /// The partition of `{1..n}` into the cycles of this permutation.
    pub fn to_partition(&self) -> SetPartition {
        SetPartition::new(self.n(), self.cycles()).expect("cycles cover the ground set")
    }

    /// All `n!` permutations, in lexicographic order of images.
    pub fn all(n: usize) -> Vec<Permutation> {
        let mut out = Vec::new();
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Permutation { map: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else {
                break;
            };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in self.cycles() {
            write!(f, "(")?;
            for (k, x) in c.iter().enumerate() {
                if k > 0 {
                    write!(f, " ")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    /// Parses cycle notation such as `(1 3)(2)`; `n` is the largest point.
    fn from_str(s: &str) -> Result<Self> {
        let mut cycles = Vec::new();
        let mut rest = s.trim();
        while !rest.is_empty() {
            let open = rest
                .strip_prefix('(')
                .ok_or_else(|| Error::Parse(format!("expected '(' in {s:?}")))?;
            let close = open
                .find(')')
                .ok_or_else(|| Error::Parse(format!("unclosed cycle in {s:?}")))?;
            let cycle = open[..close]
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse::<usize>().map_err(|_| Error::Parse(format!("bad point {t:?}"))))
                .collect::<Result<Vec<_>>>()?;
            cycles.push(cycle);
            rest = open[close + 1..].trim_start();
        }
        let n = cycles.iter().flatten().copied().max().unwrap_or(0);
        Permutation::from_cycles(n, &cycles)
    }
}

/// Conjugacy class of a permutation, as a partition `λ ⊢ q`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct IntegerPartitionClass {
    parts: Vec<usize>,
}

impl IntegerPartitionClass {
    pub fn new(mut parts: Vec<usize>) -> Result<Self> {
        if parts.contains(&0) {
            return Err(Error::invalid("partition parts must be positive"));
        }
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Ok(IntegerPartitionClass { parts })
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }

    /// `q`, the size of the permuted set.
    pub fn size(&self) -> usize {
        self.parts.iter().sum()
    }

    /// Number of cycles `#(α)`.
    pub fn cycle_count(&self) -> usize {
        self.parts.len()
    }
}

impl fmt::Display for IntegerPartitionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for p in &self.parts {
            write!(f, "{p}")?;
        }
        Ok(())
    }
}

impl FromStr for IntegerPartitionClass {
    type Err = Error;

    /// Accepts exponent notation (`1^3`, `21`, `2^2`) or comma lists (`2,1`).
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut parts = Vec::new();
        if s.contains(',') {
            for t in s.split(',') {
                parts.push(t.trim().parse().map_err(|_| Error::Parse(format!("bad part {t:?}")))?);
            }
        } else {
            let chars: Vec<char> = s.chars().collect();
            let mut i = 0;
            while i < chars.len() {
                let d = chars[i]
                    .to_digit(10)
                    .ok_or_else(|| Error::Parse(format!("bad class {s:?}")))? as usize;
                if chars.get(i + 1) == Some(&'^') {
                    let e = chars
                        .get(i + 2)
                        .and_then(|c| c.to_digit(10))
                        .ok_or_else(|| Error::Parse(format!("bad exponent in {s:?}")))?;
                    parts.extend(std::iter::repeat_n(d, e as usize));
                    i += 3;
                } else {
                    parts.push(d);
                    i += 1;
                }
            }
        }
        IntegerPartitionClass::new(parts)
    }
}

/// `#(πγ)` for a pairing `π` of `{1..n}`, with `γ = (1 2 … n)`.
pub fn genus_cycle_count(pairing: &SetPartition) -> Result<usize> {
    Ok(pairing_times_gamma(pairing)?.cycle_count())
}

/// The permutation `πγ` for a pairing `π`.
pub fn pairing_times_gamma(pairing: &SetPartition) -> Result<Permutation> {
    if !pairing.is_pairing() {
        return Err(Error::invalid(format!("{pairing} is not a pairing")));
    }
    let pi = Permutation::from_cycles(pairing.n(), pairing.blocks())?;
    pi.multiply(&Permutation::long_cycle(pairing.n()))
}

/// Genus `(1 + n/2 - #(πγ)) / 2` of the surface glued by the pairing.
pub fn pairing_genus(pairing: &SetPartition) -> Result<usize> {
    let cycles = genus_cycle_count(pairing)?;
    let twice = 1 + pairing.n() / 2 - cycles;
    debug_assert!(twice % 2 == 0);
    Ok(twice / 2)
}

/// Permutation whose cycles are the blocks of `p`, each in increasing order.
pub fn nc_to_geodesic_perm(p: &SetPartition) -> Permutation {
    Permutation::from_cycles(p.n(), p.blocks()).expect("blocks are disjoint cycles")
}

/// True iff `|σ| + |σ⁻¹γ| = n - 1`, i.e. `σ` lies on a geodesic from the
/// identity to `γ`.
pub fn geodesic_test(sigma: &Permutation) -> bool {
    let n = sigma.n();
    if n == 0 {
        return true;
    }
    let rest = sigma
        .inverse()
        .multiply(&Permutation::long_cycle(n))
        .expect("same size");
    sigma.length() + rest.length() == n - 1
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: &str) -> SetPartition {
        s.parse().unwrap()
    }

    #[test]
    fn catalan_table() {
        let table: Vec<u64> = (0..7).map(|k| catalan(k).unwrap()).collect();
        assert_eq!(table, vec![1, 1, 2, 5, 14, 42, 132]);
        assert_eq!(catalan(30).unwrap(), 3_814_986_502_092_304);
        assert!(catalan(31).is_err());
    }

    #[test]
    fn catalan_recursion() {
        for n in 1..=20u32 {
            let rhs: u64 = (0..n)
                .map(|j| catalan(n - 1 - j).unwrap() * catalan(j).unwrap())
                .sum();
            assert_eq!(catalan(n).unwrap(), rhs);
        }
    }

    #[test]
    fn crossing_examples() {
        assert!(!p("{1,3}{2,4}").is_noncrossing());
        assert!(p("{1,4}{2,3}").is_noncrossing());
        assert!(SetPartition::discrete(7).is_noncrossing());
        assert!(!p("{1,4}{2,5}{3}").is_noncrossing());
        assert!(p("{1,5}{2,3,4}").is_noncrossing());
    }

    #[test]
    fn validation() {
        assert!(SetPartition::new(3, vec![vec![1, 2]]).is_err());
        assert!(SetPartition::new(3, vec![vec![1, 2], vec![2, 3]]).is_err());
        assert!(SetPartition::new(2, vec![vec![1, 3]]).is_err());
        let q = SetPartition::new(4, vec![vec![3, 2], vec![4, 1]]).unwrap();
        assert_eq!(q.to_string(), "{1,4}{2,3}");
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_nc(1).unwrap().len(), 1);
        assert_eq!(enumerate_nc(3).unwrap().len(), 5);
        assert_eq!(enumerate_nc(4).unwrap().len(), 14);
        assert!(enumerate_nc(15).is_err());
        let four: Vec<String> = enumerate_nc_pairings(4).iter().map(|x| x.to_string()).collect();
        assert_eq!(four, vec!["{1,2}{3,4}", "{1,4}{2,3}"]);
        assert!(enumerate_nc_pairings(5).is_empty());
        assert_eq!(enumerate_nc_pairings(6).len(), 5);
        let all4: Vec<String> = enumerate_all_pairings(4)
            .unwrap()
            .iter()
            .map(|x| x.to_string())
            .collect();
        assert_eq!(all4, vec!["{1,2}{3,4}", "{1,3}{2,4}", "{1,4}{2,3}"]);
        assert_eq!(enumerate_all_pairings(2).unwrap().len(), 1);
        assert_eq!(enumerate_all_pairings(6).unwrap().len(), 15);
        assert!(enumerate_all_pairings(5).unwrap().is_empty());
    }

    #[test]
    fn refinement_examples() {
        assert!(refines(&p("{1}{2,3}"), &p("{1,2,3}")).unwrap());
        assert!(!refines(&p("{1,2,3}"), &p("{1}{2,3}")).unwrap());
        assert!(refines(&p("{1,3}{2}"), &p("{1,3}{2}")).unwrap());
        assert!(refines(&p("{1}{2}"), &p("{1,2,3}")).is_err());
    }

    #[test]
    fn join_meet_examples() {
        let a = p("{1,2}{3}{4}");
        let b = p("{1}{2,3}{4}");
        assert_eq!(join(&a, &b).unwrap(), p("{1,2,3}{4}"));
        assert_eq!(join(&SetPartition::discrete(4), &b).unwrap(), b);
        assert_eq!(meet(&SetPartition::full(4), &b).unwrap(), b);
        // crossing pair closes up to a single block in NC(4)
        assert_eq!(join(&p("{1,3}{2}{4}"), &p("{1}{2,4}{3}")).unwrap(), SetPartition::full(4));
    }

    #[test]
    fn kreweras_examples() {
        assert_eq!(kreweras(&p("{1,4,5}{2,3}")).unwrap(), p("{1,3}{2}{4}{5}"));
        assert_eq!(kreweras(&SetPartition::discrete(5)).unwrap(), SetPartition::full(5));
        assert_eq!(kreweras(&SetPartition::full(5)).unwrap(), SetPartition::discrete(5));
        assert!(kreweras(&p("{1,3}{2,4}")).is_err());
    }

    #[test]
    fn mobius_examples() {
        assert_eq!(mobius_nc(&SetPartition::discrete(2), &SetPartition::full(2)).unwrap(), -1);
        assert_eq!(mobius_nc(&p("{1,4}{2,3}"), &SetPartition::full(4)).unwrap(), -1);
        assert_eq!(mobius_nc(&p("{1}{2}{3,4}"), &SetPartition::full(4)).unwrap(), 2);
        assert!(mobius_nc(&SetPartition::full(3), &SetPartition::discrete(3)).is_err());
    }

    #[test]
    fn permutation_examples() {
        let pi = p("{1,4}{2,3}{5,6}");
        let pg = pairing_times_gamma(&pi).unwrap();
        assert_eq!(pg.to_string(), "(1 3)(2)(4 6)(5)");
        assert_eq!(genus_cycle_count(&pi).unwrap(), 4);
        assert_eq!(genus_cycle_count(&p("{1,3}{2,4}")).unwrap(), 1);
        let s: Permutation = "(1 3)(2)(4)".parse().unwrap();
        assert_eq!(s.length(), 1);
        assert!(geodesic_test(&s));
        assert!(!geodesic_test(&"(1 3)(2 4)".parse().unwrap()));
        assert!(geodesic_test(&Permutation::identity(4)));
        let inv = s.inverse();
        assert_eq!(s.multiply(&inv).unwrap(), Permutation::identity(4));
        assert_eq!(Permutation::all(4).len(), 24);
    }

    #[test]
    fn class_parsing() {
        let c: IntegerPartitionClass = "1^3".parse().unwrap();
        assert_eq!(c.parts(), &[1, 1, 1]);
        let c: IntegerPartitionClass = "21".parse().unwrap();
        assert_eq!(c.parts(), &[2, 1]);
        let c: IntegerPartitionClass = "2^2".parse().unwrap();
        assert_eq!((c.size(), c.cycle_count()), (4, 2));
    }
}
