//! Trace moments of banded GUE matrices from the genus expansion.
//!
//! `E[Tr Ξ^{2ℓ}] = σ^{2ℓ} ξ^{−ℓ} Σ_π Q(ℓ, N, b, π)`. Finite-N values are kept
//! as exact rationals at `σ = 1`; the `σ^{2ℓ}` factor is applied only when a
//! float is requested.

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::combinat::{catalan, enumerate_pair_partitions, genus, genus_census, PairPartition, DEFAULT_CAP};
use crate::counting::{
    count_admissible, count_constraint_graph, integral_i, BandGeometry, ConstraintGraph, DistanceMode, DEFAULT_NODE_BUDGET,
};
use crate::quotient::build_quotient;
use crate::{rng, Error, Result};

fn ratio(num: BigUint, den: BigUint) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn to_f64(r: &BigRational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MomentResult {
    /// Moment order `k` of `E[Tr Ξ^k]`.
    pub order: usize,
    pub geom: BandGeometry,
    pub sigma2: f64,
    /// `E[Tr Ξ^k]` at `σ = 1`.
    pub exact: BigRational,
    /// `N·Cat(k/2)` for even `k`, 0 otherwise.
    pub catalan_term: BigRational,
}

impl MomentResult {
    fn scale(&self) -> f64 {
        self.sigma2.powi(self.order as i32 / 2)
    }

    /// `E[Tr Ξ^k]` at the stored variance.
    pub fn value(&self) -> f64 {
        to_f64(&self.exact) * self.scale()
    }

    pub fn catalan_value(&self) -> f64 {
        to_f64(&self.catalan_term) * self.scale()
    }

    /// `Δ = E[Tr Ξ^k] − N·σ^k·Cat(k/2)`, exact at `σ = 1`.
    pub fn correction_exact(&self) -> BigRational {
        &self.exact - &self.catalan_term
    }

    pub fn correction(&self) -> f64 {
        to_f64(&self.correction_exact()) * self.scale()
    }
}

fn check_sigma2(sigma2: f64) -> Result<()> {
    if sigma2.is_finite() && sigma2 > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("variance must be positive, got {sigma2}")))
    }
}

/// `Σ_π Q(ℓ, N, b, π)` over all of `P₂(2ℓ)`.
pub fn total_label_count(ell: usize, geom: &BandGeometry) -> Result<BigUint> {
    let partitions: Vec<PairPartition> = enumerate_pair_partitions(ell)?.collect();
    let counts: Vec<u128> = partitions.par_iter().map(|pp| count_admissible(pp, geom).map(|c| c.value)).collect::<Result<_>>()?;
    Ok(counts.into_iter().fold(BigUint::zero(), |acc, c| acc + BigUint::from(c)))
}

/// `E[Tr Ξ^k]` for any order `k`; odd orders vanish.
pub fn trace_moment(order: usize, geom: &BandGeometry, sigma2: f64) -> Result<MomentResult> {
    check_sigma2(sigma2)?;
    if order == 0 {
        return Err(Error::InvalidArgument("moment order must be positive".into()));
    }
    if order % 2 == 1 {
        return Ok(MomentResult { order, geom: *geom, sigma2, exact: BigRational::zero(), catalan_term: BigRational::zero() });
    }
    let ell = order / 2;
    let total = total_label_count(ell, geom)?;
    let exact = ratio(total, BigUint::from(geom.xi()).pow(ell as u32));
    let catalan_term = BigRational::from_integer(BigInt::from(catalan(ell as u64) * geom.n));
    Ok(MomentResult { order, geom: *geom, sigma2, exact, catalan_term })
}

/// `E[Tr Ξ^{2ℓ}]`.
pub fn exact_trace_moment(ell: usize, geom: &BandGeometry, sigma2: f64) -> Result<MomentResult> {
    if ell == 0 {
        return Err(Error::InvalidArgument("ell must be at least 1".into()));
    }
    trace_moment(2 * ell, geom, sigma2)
}

/// `Σ_g ε_g(ℓ) N^{1−2g}` at `σ = 1`: the moment with no band constraint.
pub fn full_band_moment(ell: usize, n: usize) -> Result<BigRational> {
    if n == 0 {
        return Err(Error::InvalidArgument("matrix dimension must be positive".into()));
    }
    let census = genus_census(ell, DEFAULT_CAP)?;
    let n = BigInt::from(n);
    let mut total = BigRational::zero();
    for (g, &eps) in census.iter().enumerate() {
        let term = BigRational::new(BigInt::from(eps) * &n, n.pow(2 * g as u32));
        total += term;
    }
    Ok(total)
}

/// Exact check of `(N/ℓ^ℓ) Σ_{g≥1} ε_g ξ^{−2g} ≤ Δ_{2ℓ} ≤ N Σ_{g≥1} ε_g ξ^{−2g}`
/// at `σ = 1`.
pub fn correction_sandwich_holds(ell: usize, geom: &BandGeometry) -> Result<bool> {
    let delta = exact_trace_moment(ell, geom, 1.0)?.correction_exact();
    let census = genus_census(ell, DEFAULT_CAP)?;
    let xi = BigInt::from(geom.xi());
    let mut s = BigRational::zero();
    for (g, &eps) in census.iter().enumerate().skip(1) {
        s += BigRational::new(BigInt::from(eps), xi.pow(2 * g as u32));
    }
    let upper = s * BigInt::from(geom.n);
    let lower = &upper / BigInt::from(ell).pow(ell as u32);
    Ok(lower <= delta && delta <= upper)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitTerm {
    pub partition: String,
    pub integral: f64,
    pub stderr: f64,
    /// `σ^{2ℓ} I / (2^ℓ c²)`.
    pub contribution: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitCorrection {
    pub ell: usize,
    pub c: f64,
    pub sigma2: f64,
    pub value: f64,
    pub stderr: f64,
    pub terms: Vec<LimitTerm>,
}

impl LimitCorrection {
    /// `(ε₁σ^{2ℓ}/(4c²ℓ^ℓ), ε₁σ^{2ℓ}/(4c²))`.
    pub fn sandwich(&self) -> Result<(f64, f64)> {
        let eps1 = genus_census(self.ell, DEFAULT_CAP)?.get(1).copied().unwrap_or(0) as f64;
        let hi = eps1 * self.sigma2.powi(self.ell as i32) / (4.0 * self.c * self.c);
        Ok((hi / (self.ell as f64).powi(self.ell as i32), hi))
    }
}

/// `m_{2ℓ}(σ², c) = σ^{2ℓ}/(2^ℓ c²) Σ_{g(π)=1} I_ℓ^π`, the limit of `Δ_{2ℓ}`
/// when `b ~ c√N`. Each partition's integral uses its own seed derived from
/// `seed` and the partition's enumeration index.
pub fn infinitesimal_correction_limit(ell: usize, c: f64, sigma2: f64, samples: u64, seed: u64) -> Result<LimitCorrection> {
    check_sigma2(sigma2)?;
    if !(c.is_finite() && c > 0.0) {
        return Err(Error::InvalidArgument(format!("band ratio must be positive, got {c}")));
    }
    let partitions: Vec<(u64, PairPartition)> =
        enumerate_pair_partitions(ell)?.enumerate().filter(|(_, pp)| genus(pp).genus == 1).map(|(i, pp)| (i as u64, pp)).collect();
    let factor = sigma2.powi(ell as i32) / (2f64.powi(ell as i32) * c * c);
    let terms: Vec<LimitTerm> = partitions
        .iter()
        .map(|(i, pp)| {
            let est = integral_i(pp, samples, rng::mix(seed, *i), None)?;
            Ok(LimitTerm { partition: pp.to_string(), integral: est.mean, stderr: est.stderr, contribution: factor * est.mean })
        })
        .collect::<Result<_>>()?;
    let value = terms.iter().fold(0.0, |acc, t| acc + t.contribution);
    let stderr = factor * terms.iter().map(|t| t.stderr * t.stderr).sum::<f64>().sqrt();
    Ok(LimitCorrection { ell, c, sigma2, value, stderr, terms })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Trend {
    ToZero,
    Diverging,
    /// Settling near the last tabulated value.
    Stabilizing(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeRow {
    pub n: usize,
    pub b: usize,
    pub correction: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegimeReport {
    pub ell: usize,
    pub rows: Vec<RegimeRow>,
    pub trend: Trend,
}

/// Tabulates `Δ_{2ℓ}` along increasing `(N, b)` (periodic bands) and labels
/// the trend: strictly decreasing to below half its first value is `ToZero`,
/// strictly increasing to above twice its first value is `Diverging`, anything
/// else is `Stabilizing` at the last value.
pub fn regime_classify(ell: usize, sequence: &[(usize, usize)], sigma2: f64) -> Result<RegimeReport> {
    if sequence.len() < 2 {
        return Err(Error::InvalidArgument("a trend needs at least two (N, b) pairs".into()));
    }
    if sequence.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::InvalidArgument("N must increase along the sequence".into()));
    }
    let rows: Vec<RegimeRow> = sequence
        .iter()
        .map(|&(n, b)| {
            let m = exact_trace_moment(ell, &BandGeometry::periodic(n, b)?, sigma2)?;
            Ok(RegimeRow { n, b, correction: m.correction() })
        })
        .collect::<Result<_>>()?;
    let values: Vec<f64> = rows.iter().map(|r| r.correction).collect();
    let (first, last) = (values[0], values[values.len() - 1]);
    let decreasing = values.windows(2).all(|w| w[1] < w[0]);
    let increasing = values.windows(2).all(|w| w[1] > w[0]);
    let trend = if decreasing && last < 0.5 * first {
        Trend::ToZero
    } else if increasing && last > 2.0 * first {
        Trend::Diverging
    } else {
        Trend::Stabilizing(last)
    };
    Ok(RegimeReport { ell, rows, trend })
}

/// Exact `E[Tr(Ξ^{(c₁)} ⋯ Ξ^{(c_{2ℓ})})]` at `σ = 1` for independent banded GUE
/// matrices sharing `N` and the distance mode. `colors` are 1-based indices
/// into `geoms`. Only pairings joining equal colors contribute; every quotient
/// edge carries the band of its color.
pub fn mixed_trace_moment_exact(colors: &[usize], geoms: &[BandGeometry]) -> Result<BigRational> {
    let first = geoms.first().ok_or_else(|| Error::InvalidArgument("at least one band geometry is required".into()))?;
    if geoms.iter().any(|g| g.n != first.n || g.mode != first.mode) {
        return Err(Error::InvalidArgument("all colors must share N and the distance mode".into()));
    }
    if colors.is_empty() {
        return Err(Error::InvalidArgument("the word must be non-empty".into()));
    }
    if let Some(&c) = colors.iter().find(|&&c| c == 0 || c > geoms.len()) {
        return Err(Error::InvalidArgument(format!("color {c} has no band geometry")));
    }
    let mut multiplicity = vec![0usize; geoms.len()];
    for &c in colors {
        multiplicity[c - 1] += 1;
    }
    if multiplicity.iter().any(|m| m % 2 == 1) {
        return Ok(BigRational::zero());
    }
    let ell = colors.len() / 2;
    let matching: Vec<PairPartition> =
        enumerate_pair_partitions(ell)?.filter(|pp| pp.blocks().iter().all(|&(j, k)| colors[j - 1] == colors[k - 1])).collect();
    let counts: Vec<u128> = matching
        .par_iter()
        .map(|pp| {
            let q = build_quotient(pp);
            let mut cg = ConstraintGraph::new(q.vertex_count());
            for e in &q.edges {
                cg.add_edge(e.source, e.target, geoms[colors[e.index - 1] - 1].b);
            }
            count_constraint_graph(&cg, first.n, first.mode, DEFAULT_NODE_BUDGET)
        })
        .collect::<Result<_>>()?;
    let total = counts.into_iter().fold(BigUint::zero(), |acc, c| acc + BigUint::from(c));
    let mut den = BigUint::one();
    for (g, &m) in geoms.iter().zip(&multiplicity) {
        den *= BigUint::from(g.xi()).pow((m / 2) as u32);
    }
    Ok(ratio(total, den))
}

/// [`mixed_trace_moment_exact`] scaled by `σ^{2ℓ}`.
pub fn mixed_trace_moment(colors: &[usize], geoms: &[BandGeometry], sigma2: f64) -> Result<f64> {
    check_sigma2(sigma2)?;
    let exact = mixed_trace_moment_exact(colors, geoms)?;
    Ok(to_f64(&exact) * sigma2.powi((colors.len() / 2) as i32))
}

/// Convenience: both colors on the same band geometry.
pub fn two_color_geoms(n: usize, b1: usize, b2: usize, mode: DistanceMode) -> Result<[BandGeometry; 2]> {
    Ok([BandGeometry::new(n, b1, mode)?, BandGeometry::new(n, b2, mode)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn second_moment_periodic_is_n() {
        for (n, b) in [(10, 1), (25, 3), (7, 10)] {
            let m = exact_trace_moment(1, &BandGeometry::periodic(n, b).unwrap(), 1.0).unwrap();
            assert_eq!(m.exact, rat(n as i64, 1));
            assert!(m.correction_exact().is_zero());
        }
    }

    #[test]
    fn fourth_moment_periodic() {
        let (n, b) = (20i64, 3i64);
        let xi = 2 * b + 1;
        let m = exact_trace_moment(2, &BandGeometry::periodic(20, 3).unwrap(), 1.0).unwrap();
        assert_eq!(m.exact, rat(2 * n, 1) + rat(n, xi * xi));
        assert_eq!(m.correction_exact(), rat(n, xi * xi));
        let scaled = exact_trace_moment(2, &BandGeometry::periodic(20, 3).unwrap(), 2.0).unwrap();
        assert!((scaled.value() - 4.0 * (40.0 + 20.0 / 49.0)).abs() < 1e-12);
    }

    #[test]
    fn regular_second_moment() {
        for (n, b) in [(50i64, 5i64), (100, 10), (9, 2)] {
            let m = exact_trace_moment(1, &BandGeometry::regular(n as usize, b as usize).unwrap(), 1.0).unwrap();
            assert_eq!(m.exact, rat(n, 1) - rat(b * (b + 1), 2 * b + 1));
        }
    }

    #[test]
    fn odd_moments_vanish() {
        let m = trace_moment(5, &BandGeometry::periodic(10, 2).unwrap(), 1.0).unwrap();
        assert!(m.exact.is_zero());
        assert_eq!(m.value(), 0.0);
    }

    #[test]
    fn full_band_examples() {
        assert_eq!(full_band_moment(1, 9).unwrap(), rat(9, 1));
        assert_eq!(full_band_moment(2, 9).unwrap(), rat(18, 1) + rat(1, 9));
        assert_eq!(full_band_moment(3, 9).unwrap(), rat(45, 1) + rat(10, 9));
        for ell in 1..=4 {
            for n in [5usize, 8, 13] {
                let m = exact_trace_moment(ell, &BandGeometry::periodic(n, n / 2).unwrap(), 1.0).unwrap();
                assert_eq!(m.exact, full_band_moment(ell, n).unwrap(), "ell={ell} n={n}");
            }
        }
    }

    #[test]
    fn sandwich_small_cases() {
        for ell in 2..=4 {
            for (n, b) in [(40, 3), (100, 10), (31, 15)] {
                assert!(correction_sandwich_holds(ell, &BandGeometry::periodic(n, b).unwrap()).unwrap());
            }
        }
    }

    #[test]
    fn limit_small_ell() {
        let m2 = infinitesimal_correction_limit(1, 1.0, 1.0, 1000, 0).unwrap();
        assert_eq!(m2.value, 0.0);
        assert!(m2.terms.is_empty());
        let m4 = infinitesimal_correction_limit(2, 1.0, 1.0, 1000, 0).unwrap();
        assert_eq!(m4.value, 0.25);
        assert_eq!(m4.stderr, 0.0);
        let m4 = infinitesimal_correction_limit(2, 2.0, 3.0, 10, 0).unwrap();
        assert!((m4.value - 9.0 / 16.0).abs() < 1e-15);
    }

    #[test]
    fn limit_contains_worked_term() {
        let m8 = infinitesimal_correction_limit(4, 1.0, 1.0, 20_000, 5).unwrap();
        assert_eq!(m8.terms.len(), 70);
        let t = m8.terms.iter().find(|t| t.partition == "(1,5)(2,8)(3,7)(4,6)").unwrap();
        assert!((t.contribution - 3.0 / 16.0).abs() <= 3.0 * t.stderr / 16.0 + 1e-3);
        let (lo, hi) = m8.sandwich().unwrap();
        assert!(lo <= m8.value + 3.0 * m8.stderr && m8.value - 3.0 * m8.stderr <= hi);
    }

    #[test]
    fn regime_trends() {
        let pow = |n: usize, e: f64| (n as f64).powf(e).round() as usize;
        let ns = [100usize, 400, 1600, 6400];
        let fast: Vec<_> = ns.iter().map(|&n| (n, pow(n, 0.7))).collect();
        assert_eq!(regime_classify(2, &fast, 1.0).unwrap().trend, Trend::ToZero);
        let slow: Vec<_> = ns.iter().map(|&n| (n, pow(n, 0.3))).collect();
        assert_eq!(regime_classify(2, &slow, 1.0).unwrap().trend, Trend::Diverging);
        let crit: Vec<_> = ns.iter().map(|&n| (n, pow(n, 0.5))).collect();
        match regime_classify(2, &crit, 1.0).unwrap().trend {
            Trend::Stabilizing(v) => assert!((v - 0.25).abs() < 0.01),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn mixed_moments() {
        let g = two_color_geoms(10_000, 100, 100, DistanceMode::Periodic).unwrap();
        let v = mixed_trace_moment(&[1, 2, 1, 2], &g, 1.0).unwrap();
        assert!((v - 10_000.0 / (201.0 * 201.0)).abs() < 1e-12);
        let full = two_color_geoms(30, 15, 15, DistanceMode::Periodic).unwrap();
        assert_eq!(mixed_trace_moment_exact(&[1, 1, 2, 2], &full).unwrap(), rat(30, 1));
        assert!(mixed_trace_moment_exact(&[1, 2, 1], &full).unwrap().is_zero());
        assert!(mixed_trace_moment_exact(&[1, 2, 2, 2], &full).unwrap().is_zero());
        let single = [BandGeometry::periodic(12, 2).unwrap()];
        assert_eq!(mixed_trace_moment_exact(&[1, 1], &single).unwrap(), rat(12, 1));
        // single color reduces to the pure moment
        let pure = exact_trace_moment(3, &single[0], 1.0).unwrap().exact;
        assert_eq!(mixed_trace_moment_exact(&[1; 6], &single).unwrap(), pure);
        assert!(mixed_trace_moment_exact(&[1, 3], &full).is_err());
    }
}
