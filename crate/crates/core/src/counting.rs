//! Band-admissible labelings of quotient graphs.
//!
//! `Q(ℓ, N, b, π)` counts maps `η: V → [N]` from the quotient vertices (the
//! cycles of `γ∘π`) such that every non-loop quotient edge joins labels at
//! distance at most `b`. The exact counter walks a spanning tree: vertices
//! touched by a non-tree edge (and their tree ancestors) are enumerated with
//! candidate intervals intersected across labeled neighbours, while the
//! remaining subtrees are summed out in closed form (periodic mode) or by a
//! prefix-sum pass (regular mode).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{genus, PairPartition};
use crate::quotient::{build_quotient, underlying_simple, SimpleGraph};
use crate::{rng, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DistanceMode {
    /// `min(|j−k|, N−|j−k|)`
    Periodic,
    /// `|j−k|`
    Regular,
}

impl std::fmt::Display for DistanceMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            DistanceMode::Periodic => "periodic",
            DistanceMode::Regular => "regular",
        })
    }
}

impl std::str::FromStr for DistanceMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "periodic" => Ok(DistanceMode::Periodic),
            "regular" => Ok(DistanceMode::Regular),
            other => Err(Error::InvalidArgument(format!("unknown distance mode {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BandGeometry {
    pub n: usize,
    pub b: usize,
    pub mode: DistanceMode,
}

impl BandGeometry {
    pub fn new(n: usize, b: usize, mode: DistanceMode) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
        }
        Ok(Self { n, b, mode })
    }

    pub fn periodic(n: usize, b: usize) -> Result<Self> {
        Self::new(n, b, DistanceMode::Periodic)
    }

    pub fn regular(n: usize, b: usize) -> Result<Self> {
        Self::new(n, b, DistanceMode::Regular)
    }

    /// Effective band width `ξ = min(2b+1, N)`.
    pub fn xi(&self) -> usize {
        band_width(self.b, self.n)
    }

    /// Distance between 0-based (or 1-based, consistently) indices.
    pub fn dist(&self, j: usize, k: usize) -> usize {
        let d = j.abs_diff(k);
        match self.mode {
            DistanceMode::Periodic => d.min(self.n - d),
            DistanceMode::Regular => d,
        }
    }

    pub fn in_band(&self, j: usize, k: usize) -> bool {
        self.dist(j, k) <= self.b
    }
}

fn band_width(b: usize, n: usize) -> usize {
    b.saturating_mul(2).saturating_add(1).min(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LabelCount {
    pub value: u128,
}

/// Default cap on enumerated labels per count.
pub const DEFAULT_NODE_BUDGET: u64 = 2_000_000_000;

/// Labeling constraints: vertices `0..k`, edges `(u, v, b)` demanding
/// `dist(η(u), η(v)) ≤ b`. Parallel edges collapse to their tightest band.
#[derive(Debug, Clone)]
pub(crate) struct ConstraintGraph {
    k: usize,
    adj: Vec<Vec<(usize, usize)>>,
}

impl ConstraintGraph {
    pub(crate) fn new(k: usize) -> Self {
        Self { k, adj: vec![Vec::new(); k] }
    }

    pub(crate) fn add_edge(&mut self, u: usize, v: usize, b: usize) {
        if u == v {
            return;
        }
        if let Some(slot) = self.adj[u].iter_mut().find(|(w, _)| *w == v) {
            slot.1 = slot.1.min(b);
            let back = self.adj[v].iter_mut().find(|(w, _)| *w == u).expect("symmetric");
            back.1 = back.1.min(b);
        } else {
            self.adj[u].push((v, b));
            self.adj[v].push((u, b));
        }
    }

    fn from_simple(sg: &SimpleGraph, b: usize) -> Self {
        let mut cg = Self::new(sg.vertex_count());
        for &(u, v) in sg.edges.keys() {
            cg.add_edge(u, v, b);
        }
        cg
    }

    fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.k];
        let mut out = Vec::new();
        for s in 0..self.k {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            let mut comp = vec![s];
            let mut head = 0;
            while head < comp.len() {
                let u = comp[head];
                head += 1;
                let mut next: Vec<usize> = self.adj[u].iter().map(|&(v, _)| v).filter(|&v| !seen[v]).collect();
                next.sort_unstable();
                for v in next {
                    if !seen[v] {
                        seen[v] = true;
                        comp.push(v);
                    }
                }
            }
            out.push(comp);
        }
        out
    }
}

fn overflow() -> Error {
    Error::Resource("label count exceeds the exact 128-bit range".into())
}

/// Sorted disjoint closed intervals inside `[0, n)`.
type Intervals = Vec<(usize, usize)>;

fn band_intervals(center: usize, b: usize, n: usize, mode: DistanceMode) -> Intervals {
    match mode {
        DistanceMode::Regular => vec![(center.saturating_sub(b), (center + b).min(n - 1))],
        DistanceMode::Periodic => {
            if 2 * b + 1 >= n {
                vec![(0, n - 1)]
            } else if center < b {
                vec![(0, center + b), (n + center - b, n - 1)]
            } else if center + b >= n {
                vec![(0, center + b - n), (center - b, n - 1)]
            } else {
                vec![(center - b, center + b)]
            }
        }
    }
}

fn intersect(a: &[(usize, usize)], b: &[(usize, usize)]) -> Intervals {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        let lo = a[i].0.max(b[j].0);
        let hi = a[i].1.min(b[j].1);
        if lo <= hi {
            out.push((lo, hi));
        }
        if a[i].1 < b[j].1 {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

struct Enumeration<'a> {
    n: usize,
    mode: DistanceMode,
    /// For each enumerated position: earlier positions it is constrained to.
    back: Vec<Vec<(usize, usize)>>,
    /// Regular mode: label-dependent weight of each enumerated vertex.
    weights: Option<&'a [Vec<u128>]>,
    labels: Vec<usize>,
    nodes: u64,
    budget: u64,
}

impl Enumeration<'_> {
    fn weight(&self, pos: usize, x: usize) -> u128 {
        self.weights.map_or(1, |w| w[pos][x])
    }

    fn candidates(&self, pos: usize) -> Intervals {
        let mut set = vec![(0, self.n - 1)];
        for &(earlier, b) in &self.back[pos] {
            set = intersect(&set, &band_intervals(self.labels[earlier], b, self.n, self.mode));
            if set.is_empty() {
                break;
            }
        }
        set
    }

    fn descend(&mut self, pos: usize) -> Result<u128> {
        let set = self.candidates(pos);
        let last = pos + 1 == self.back.len();
        if last && self.weights.is_none() {
            return Ok(set.iter().map(|&(lo, hi)| (hi - lo + 1) as u128).sum());
        }
        let mut total = 0u128;
        for (lo, hi) in set {
            for x in lo..=hi {
                self.nodes += 1;
                if self.nodes > self.budget {
                    return Err(Error::Resource(format!("labeling enumeration exceeded the budget of {} nodes", self.budget)));
                }
                let w = self.weight(pos, x);
                if w == 0 {
                    continue;
                }
                let sub = if last {
                    1
                } else {
                    self.labels[pos] = x;
                    self.descend(pos + 1)?
                };
                total = w.checked_mul(sub).and_then(|t| total.checked_add(t)).ok_or_else(overflow)?;
            }
        }
        Ok(total)
    }
}

fn count_component(cg: &ConstraintGraph, comp: &[usize], n: usize, mode: DistanceMode, budget: u64) -> Result<u128> {
    let k = comp.len();
    let mut local = vec![usize::MAX; cg.k];
    for (i, &v) in comp.iter().enumerate() {
        local[v] = i;
    }
    // comp is in BFS order from its smallest vertex; rebuild the BFS tree.
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; k];
    let mut in_tree = vec![false; k];
    in_tree[0] = true;
    let mut non_tree: Vec<(usize, usize, usize)> = Vec::new();
    for (i, &v) in comp.iter().enumerate() {
        let mut nbrs: Vec<(usize, usize)> = cg.adj[v].iter().map(|&(w, b)| (local[w], b)).collect();
        nbrs.sort_unstable();
        for (j, b) in nbrs {
            if !in_tree[j] {
                in_tree[j] = true;
                parent[j] = Some((i, b));
            } else if j > i && parent[j].map(|p| p.0) != Some(i) {
                non_tree.push((i, j, b));
            }
        }
    }
    let mut enumerated = vec![false; k];
    enumerated[0] = true;
    for &(u, v, _) in &non_tree {
        for start in [u, v] {
            let mut x = start;
            while !enumerated[x] {
                enumerated[x] = true;
                x = parent[x].expect("non-root vertex has a parent").0;
            }
        }
    }
    let order: Vec<usize> = (0..k).filter(|&i| enumerated[i]).collect();
    let mut pos_of = vec![usize::MAX; k];
    for (p, &i) in order.iter().enumerate() {
        pos_of[i] = p;
    }
    let mut back = vec![Vec::new(); order.len()];
    for &i in &order[1..] {
        let (p, b) = parent[i].expect("non-root");
        back[pos_of[i]].push((pos_of[p], b));
    }
    for &(u, v, b) in &non_tree {
        let (pu, pv) = (pos_of[u], pos_of[v]);
        back[pu.max(pv)].push((pu.min(pv), b));
    }

    match mode {
        DistanceMode::Periodic => {
            // free subtrees contribute their band width per vertex
            let mut free_factor = 1u128;
            for i in 0..k {
                if !enumerated[i] {
                    let b = parent[i].expect("non-root").1;
                    free_factor = free_factor.checked_mul(band_width(b, n) as u128).ok_or_else(overflow)?;
                }
            }
            // translation invariance: fix the root label, multiply by n
            let restricted = if order.len() == 1 {
                1
            } else {
                let mut e = Enumeration { n, mode, back, weights: None, labels: vec![0; order.len()], nodes: 0, budget };
                e.descend(1)?
            };
            restricted.checked_mul(free_factor).and_then(|x| x.checked_mul(n as u128)).ok_or_else(overflow)
        }
        DistanceMode::Regular => {
            let mut children = vec![Vec::new(); k];
            for i in 1..k {
                children[parent[i].expect("non-root").0].push(i);
            }
            // messages from free vertices to their parents, leaves first
            let mut msg: Vec<Option<Vec<u128>>> = vec![None; k];
            for i in (1..k).rev() {
                if enumerated[i] {
                    continue;
                }
                let prod = child_product(&children[i], &msg, n)?;
                let b = parent[i].expect("non-root").1;
                msg[i] = Some(window_sums(&prod, b)?);
            }
            let weights: Vec<Vec<u128>> = order
                .iter()
                .map(|&i| {
                    let free: Vec<usize> = children[i].iter().copied().filter(|&c| !enumerated[c]).collect();
                    child_product(&free, &msg, n)
                })
                .collect::<Result<_>>()?;
            let mut e = Enumeration { n, mode, back, weights: Some(&weights), labels: vec![0; order.len()], nodes: 0, budget };
            let mut total = 0u128;
            for (root, &w) in weights[0].iter().enumerate() {
                e.nodes += 1;
                if w == 0 {
                    continue;
                }
                let sub = if order.len() == 1 {
                    1
                } else {
                    e.labels[0] = root;
                    e.descend(1)?
                };
                total = w.checked_mul(sub).and_then(|t| total.checked_add(t)).ok_or_else(overflow)?;
            }
            Ok(total)
        }
    }
}

fn child_product(children: &[usize], msg: &[Option<Vec<u128>>], n: usize) -> Result<Vec<u128>> {
    let mut prod = vec![1u128; n];
    for &c in children {
        let m = msg[c].as_ref().expect("child message computed first");
        for (p, &v) in prod.iter_mut().zip(m) {
            *p = p.checked_mul(v).ok_or_else(overflow)?;
        }
    }
    Ok(prod)
}

/// `out[p] = Σ_{|x−p| ≤ b, 0 ≤ x < n} f[x]`.
fn window_sums(f: &[u128], b: usize) -> Result<Vec<u128>> {
    let n = f.len();
    let mut prefix = vec![0u128; n + 1];
    for (i, &v) in f.iter().enumerate() {
        prefix[i + 1] = prefix[i].checked_add(v).ok_or_else(overflow)?;
    }
    Ok((0..n).map(|p| prefix[(p + b + 1).min(n)] - prefix[p.saturating_sub(b)]).collect())
}

pub(crate) fn count_constraint_graph(cg: &ConstraintGraph, n: usize, mode: DistanceMode, budget: u64) -> Result<u128> {
    let mut total = 1u128;
    for comp in cg.components() {
        let c = count_component(cg, &comp, n, mode, budget)?;
        total = total.checked_mul(c).ok_or_else(overflow)?;
    }
    Ok(total)
}

/// Exact `Q(ℓ, N, b, π)` with the default node budget.
pub fn count_admissible(pp: &PairPartition, geom: &BandGeometry) -> Result<LabelCount> {
    count_admissible_with_budget(pp, geom, DEFAULT_NODE_BUDGET)
}

pub fn count_admissible_with_budget(pp: &PairPartition, geom: &BandGeometry, budget: u64) -> Result<LabelCount> {
    let sg = underlying_simple(&build_quotient(pp));
    let cg = ConstraintGraph::from_simple(&sg, geom.b);
    Ok(LabelCount { value: count_constraint_graph(&cg, geom.n, geom.mode, budget)? })
}

/// Checks `N·⌊ξ/(k−1)⌋^{k−1} ≤ Q ≤ N·ξ^{k−1}` with `k = #(γ∘π)`, periodic mode.
pub fn check_bounds(pp: &PairPartition, geom: &BandGeometry) -> Result<bool> {
    if geom.mode != DistanceMode::Periodic {
        return Err(Error::InvalidArgument("the label sandwich is stated for periodic bands".into()));
    }
    let q = count_admissible(pp, geom)?.value;
    let k = genus(pp).cycle_count as u32;
    let (n, xi) = (geom.n as u128, geom.xi() as u128);
    let upper = xi.checked_pow(k - 1).and_then(|x| x.checked_mul(n)).ok_or_else(overflow)?;
    let lower = if k == 1 { n } else { (xi / (k as u128 - 1)).checked_pow(k - 1).and_then(|x| x.checked_mul(n)).ok_or_else(overflow)? };
    Ok(lower <= q && q <= upper)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegralEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub samples: u64,
}

/// Independent streams per estimate; fixed so results do not depend on the
/// number of worker threads.
const STREAMS: u64 = 64;

#[derive(Debug, Clone, Copy, Default)]
struct Welford {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Welford {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Welford) -> Welford {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64) * (other.n as f64) / n as f64;
        Welford { n, mean, m2 }
    }
}

fn periodic_dist(x: f64, period: f64) -> f64 {
    let d = x.abs() % period;
    d.min(period - d)
}

/// Monte Carlo estimate of the genus-one limit integral `I_ℓ^π`.
///
/// Vertex `root` (a quotient vertex id, default: the vertex containing 1) is
/// pinned at 0; the others are uniform on `[0, 2(ℓ−2))` and every simple edge
/// requires periodic distance at most 1 on the circle of length `2(ℓ−2)`.
pub fn integral_i(pp: &PairPartition, samples: u64, seed: u64, root: Option<usize>) -> Result<IntegralEstimate> {
    let profile = genus(pp);
    if profile.genus != 1 {
        return Err(Error::Domain(format!("the limit integral is defined for genus one, {pp} has genus {}", profile.genus)));
    }
    let ell = pp.ell();
    if ell == 2 {
        return Ok(IntegralEstimate { mean: 1.0, stderr: 0.0, samples });
    }
    if samples == 0 {
        return Err(Error::InvalidArgument("at least one sample is required for ell > 2".into()));
    }
    let sg = underlying_simple(&build_quotient(pp));
    let root_pos = match root {
        None => 0,
        Some(id) => sg
            .vertex_ids
            .iter()
            .position(|&v| v == id)
            .ok_or_else(|| Error::InvalidArgument(format!("{id} is not a quotient vertex id of {pp}")))?,
    };
    let edges = sg.edge_list();
    let k = sg.vertex_count();
    let side = 2.0 * (ell - 2) as f64;
    let volume = side.powi(k as i32 - 1);
    let per_stream = samples / STREAMS;
    let extra = samples % STREAMS;
    let parts: Vec<Welford> = (0..STREAMS)
        .into_par_iter()
        .map(|s| {
            let count = per_stream + u64::from(s < extra);
            let mut gen = rng::stream(seed, s);
            let mut t = vec![0.0f64; k];
            let mut acc = Welford::default();
            for _ in 0..count {
                for (v, tv) in t.iter_mut().enumerate() {
                    *tv = if v == root_pos { 0.0 } else { gen.random::<f64>() * side };
                }
                let inside = edges.iter().all(|&(u, v)| periodic_dist(t[u] - t[v], side) <= 1.0);
                acc.push(if inside { volume } else { 0.0 });
            }
            acc
        })
        .collect();
    let total = parts.into_iter().fold(Welford::default(), Welford::merge);
    let variance = if total.n > 1 { total.m2 / (total.n - 1) as f64 } else { 0.0 };
    Ok(IntegralEstimate { mean: total.mean, stderr: (variance / total.n as f64).sqrt(), samples })
}
