//! Pair partitions of `[2ℓ]` and their genus.
//!
//! A pair partition `π` is stored as its partner involution. Indices in the
//! public API are 1-based, matching the usual `(1,5)(2,8)…` notation. The full
//! cycle `γ = (1, 2, …, 2ℓ)` is fixed, and `γ∘π` means "apply `π`, then `γ`".

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// Largest `ℓ` enumerated unless a caller raises the cap: `(2·8−1)!! = 2 027 025`.
pub const DEFAULT_CAP: usize = 8;

const UNPAIRED: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PairPartition {
    /// 0-based partner of each 0-based position.
    partner: Vec<usize>,
}

impl PairPartition {
    /// Builds a partition from a 1-based partner table (`partner[i-1]` is the
    /// block-mate of `i`).
    pub fn from_partner(partner: &[usize]) -> Result<Self> {
        let n = partner.len();
        if n == 0 || !n.is_multiple_of(2) {
            return Err(Error::InvalidArgument(format!("a pair partition needs a positive even number of points, got {n}")));
        }
        let mut zero_based = Vec::with_capacity(n);
        for (i, &p) in partner.iter().enumerate() {
            if p == 0 || p > n {
                return Err(Error::InvalidArgument(format!("partner {p} of {} is out of range", i + 1)));
            }
            if p == i + 1 {
                return Err(Error::InvalidArgument(format!("{p} is paired with itself")));
            }
            zero_based.push(p - 1);
        }
        for (i, &p) in zero_based.iter().enumerate() {
            if zero_based[p] != i {
                return Err(Error::InvalidArgument(format!("partner table is not an involution at {}", i + 1)));
            }
        }
        Ok(Self { partner: zero_based })
    }

    /// Builds a partition from 1-based blocks, e.g. `[(1,5),(2,8),(3,7),(4,6)]`.
    pub fn from_blocks(blocks: &[(usize, usize)]) -> Result<Self> {
        let n = 2 * blocks.len();
        let mut partner = vec![0usize; n];
        for &(a, b) in blocks {
            for x in [a, b] {
                if x == 0 || x > n {
                    return Err(Error::InvalidArgument(format!("index {x} outside [1, {n}]")));
                }
                if partner[x - 1] != 0 {
                    return Err(Error::InvalidArgument(format!("index {x} appears in two blocks")));
                }
            }
            partner[a - 1] = b;
            partner[b - 1] = a;
        }
        Self::from_partner(&partner)
    }

    /// The one-crossing partition `(1,3)(2,4)(5,6)(7,8)…(2ℓ−1,2ℓ)`, `ℓ ≥ 2`.
    pub fn star(ell: usize) -> Result<Self> {
        if ell < 2 {
            return Err(Error::InvalidArgument("the star partition needs ell >= 2".into()));
        }
        let mut blocks = vec![(1, 3), (2, 4)];
        blocks.extend((2..ell).map(|k| (2 * k + 1, 2 * k + 2)));
        Self::from_blocks(&blocks)
    }

    pub fn ell(&self) -> usize {
        self.partner.len() / 2
    }

    /// Number of points, `2ℓ`.
    pub fn size(&self) -> usize {
        self.partner.len()
    }

    /// 1-based partner of the 1-based point `i`.
    pub fn partner(&self, i: usize) -> usize {
        self.partner[i - 1] + 1
    }

    /// Blocks `(a, b)` with `a < b`, sorted by `a`; 1-based.
    pub fn blocks(&self) -> Vec<(usize, usize)> {
        self.partner.iter().enumerate().filter(|&(i, &p)| i < p).map(|(i, &p)| (i + 1, p + 1)).collect()
    }

    /// `(γ∘π)(i)` on 0-based indices.
    #[inline]
    pub(crate) fn gamma_pi0(&self, i: usize) -> usize {
        let next = self.partner[i] + 1;
        if next == self.partner.len() {
            0
        } else {
            next
        }
    }
}

impl fmt::Display for PairPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (a, b) in self.blocks() {
            write!(f, "({a},{b})")?;
        }
        Ok(())
    }
}

impl FromStr for PairPartition {
    type Err = Error;

    /// Parses `"(1,5)(2,8)(3,7)(4,6)"`; whitespace is ignored.
    fn from_str(s: &str) -> Result<Self> {
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        let bad = || Error::InvalidArgument(format!("cannot parse pair partition {s:?}"));
        let inner = compact.strip_prefix('(').and_then(|r| r.strip_suffix(')')).ok_or_else(bad)?;
        let mut blocks = Vec::new();
        for block in inner.split(")(") {
            let (a, b) = block.split_once(',').ok_or_else(bad)?;
            let a: usize = a.parse().map_err(|_| bad())?;
            let b: usize = b.parse().map_err(|_| bad())?;
            blocks.push((a.min(b), a.max(b)));
        }
        Self::from_blocks(&blocks)
    }
}

/// Lazily enumerates every pair partition of `[2ℓ]`.
///
/// Order: the smallest unpaired point is matched with each larger unpaired
/// point in increasing order, recursively. For `ℓ = 2` this yields
/// `(1,2)(3,4)`, `(1,3)(2,4)`, `(1,4)(2,3)`.
#[derive(Debug, Clone)]
pub struct PairPartitions {
    partner: Vec<usize>,
    stack: Vec<(usize, usize)>,
    started: bool,
}

impl PairPartitions {
    fn new(ell: usize) -> Self {
        Self { partner: vec![UNPAIRED; 2 * ell], stack: Vec::with_capacity(ell), started: false }
    }

    fn next_unpaired(&self, from: usize) -> Option<usize> {
        (from..self.partner.len()).find(|&j| self.partner[j] == UNPAIRED)
    }

    fn link(&mut self, a: usize, b: usize) {
        self.partner[a] = b;
        self.partner[b] = a;
        self.stack.push((a, b));
    }

    fn fill(&mut self) {
        while let Some(a) = self.next_unpaired(0) {
            let b = self.next_unpaired(a + 1).expect("even number of unpaired points");
            self.link(a, b);
        }
    }

    fn current(&self) -> PairPartition {
        PairPartition { partner: self.partner.clone() }
    }
}

impl Iterator for PairPartitions {
    type Item = PairPartition;

    fn next(&mut self) -> Option<PairPartition> {
        if !self.started {
            self.started = true;
            self.fill();
            return Some(self.current());
        }
        while let Some((a, b)) = self.stack.pop() {
            self.partner[a] = UNPAIRED;
            self.partner[b] = UNPAIRED;
            if let Some(c) = self.next_unpaired(b + 1) {
                self.link(a, c);
                self.fill();
                return Some(self.current());
            }
        }
        None
    }
}

/// Enumerates `P₂(2ℓ)` under the default cap.
pub fn enumerate_pair_partitions(ell: usize) -> Result<PairPartitions> {
    enumerate_pair_partitions_capped(ell, DEFAULT_CAP)
}

pub fn enumerate_pair_partitions_capped(ell: usize, cap: usize) -> Result<PairPartitions> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be at least 1".into()));
    }
    if ell > cap {
        return Err(Error::EnumerationTooLarge { ell, cap });
    }
    Ok(PairPartitions::new(ell))
}

/// Cycles of `γ∘π`, each starting at its smallest element and listed in the
/// order `i, (γ∘π)(i), …`; cycles are sorted by their first element.
pub fn cycles_gamma_pi(pp: &PairPartition) -> Vec<Vec<usize>> {
    let n = pp.size();
    let mut seen = vec![false; n];
    let mut cycles = Vec::new();
    for start in 0..n {
        if seen[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            cycle.push(i + 1);
            i = pp.gamma_pi0(i);
        }
        cycles.push(cycle);
    }
    cycles
}

/// `#(γ∘π)` without materialising the cycles.
pub fn cycle_count(pp: &PairPartition) -> usize {
    let n = pp.size();
    let mut seen = vec![false; n];
    let mut count = 0;
    for start in 0..n {
        if seen[start] {
            continue;
        }
        count += 1;
        let mut i = start;
        while !seen[i] {
            seen[i] = true;
            i = pp.gamma_pi0(i);
        }
    }
    count
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenusProfile {
    pub ell: usize,
    pub cycle_count: usize,
    pub genus: usize,
}

pub fn genus(pp: &PairPartition) -> GenusProfile {
    let ell = pp.ell();
    let cycle_count = cycle_count(pp);
    assert!(
        cycle_count <= ell + 1 && (ell + 1 - cycle_count).is_multiple_of(2),
        "Euler relation violated for {pp}: {cycle_count} cycles at ell = {ell}"
    );
    GenusProfile { ell, cycle_count, genus: (ell + 1 - cycle_count) / 2 }
}

pub fn is_noncrossing(pp: &PairPartition) -> bool {
    cycle_count(pp) == pp.ell() + 1
}

fn binomial(n: u64, k: u64) -> BigUint {
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

fn factorial(n: u64) -> BigUint {
    (1..=n).fold(BigUint::one(), |acc, k| acc * k)
}

/// `Cat(ℓ) = binom(2ℓ, ℓ)/(ℓ+1)`.
pub fn catalan(ell: u64) -> BigUint {
    binomial(2 * ell, ell) / (ell + 1)
}

/// `(2ℓ−1)!! = |P₂(2ℓ)|`.
pub fn pair_partition_count(ell: u64) -> BigUint {
    (1..=ell).fold(BigUint::one(), |acc, k| acc * (2 * k - 1))
}

/// Closed form of the genus-one count, `(2ℓ−1)!/(6(ℓ−2)!(ℓ−1)!)`; zero for `ℓ < 2`.
pub fn epsilon_one_closed_form(ell: u64) -> BigUint {
    if ell < 2 {
        return BigUint::zero();
    }
    factorial(2 * ell - 1) / (factorial(ell - 2) * factorial(ell - 1) * 6u32)
}

/// `ε_g(ℓ)` for every `g`, by exhaustive enumeration. Index `g` of the result
/// holds `ε_g(ℓ)`; the vector has length `⌊ℓ/2⌋ + 1`.
pub fn genus_census(ell: usize, cap: usize) -> Result<Vec<u64>> {
    let mut census = vec![0u64; ell / 2 + 1];
    for pp in enumerate_pair_partitions_capped(ell, cap)? {
        census[genus(&pp).genus] += 1;
    }
    Ok(census)
}

/// `ε_g(ℓ) = #{π ∈ P₂(2ℓ) : #(γ∘π) − ℓ − 1 = −2g}` under the default cap.
pub fn epsilon_g(ell: usize, g: usize) -> Result<u64> {
    Ok(genus_census(ell, DEFAULT_CAP)?.get(g).copied().unwrap_or(0))
}
