//! Monte Carlo for banded GUE matrices and their rank-one deformations.
//!
//! `Ξ = ξ^{−1/2} B ∘ X` where `X` is GUE with entry variance `σ²` and `B`
//! keeps the entries with `dist(j, k) ≤ b`.

mod matrix;

pub use matrix::{eigenvalues, esd_moments, largest_eigenvalue, HermitianMatrix, DENSE_LIMIT};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

use crate::counting::BandGeometry;
use crate::{rng, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "theta", rename_all = "lowercase")]
pub enum Perturbation {
    None,
    /// `Σ_j θ_j E^{(j,j)}`.
    Diagonal(Vec<f64>),
    /// `(θ/N) J_N`.
    Delocalized(f64),
}

impl Perturbation {
    /// The single strength `θ` used to normalise the F statistics.
    pub fn theta(&self) -> Result<f64> {
        match self {
            Perturbation::Diagonal(t) if t.len() == 1 => Ok(t[0]),
            Perturbation::Delocalized(t) => Ok(*t),
            other => Err(Error::InvalidArgument(format!("the F statistic needs exactly one strength, got {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub band: BandGeometry,
    pub sigma2: f64,
    pub perturbation: Perturbation,
    pub seed: u64,
    pub reps: usize,
}

impl EnsembleSpec {
    pub fn n(&self) -> usize {
        self.band.n
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma2.is_finite() && self.sigma2 > 0.0) {
            return Err(Error::InvalidArgument(format!("variance must be positive, got {}", self.sigma2)));
        }
        if let Perturbation::Diagonal(t) = &self.perturbation {
            if t.len() > self.band.n {
                return Err(Error::InvalidArgument("more diagonal strengths than rows".into()));
            }
        }
        Ok(())
    }
}

/// Draws `Ξ`: upper-triangle entries in row-major order, only inside the band.
/// Diagonal entries are `N(0, σ²)`, off-diagonal ones have independent real
/// and imaginary parts `N(0, σ²/2)`; everything is scaled by `ξ^{−1/2}`.
pub fn sample_banded_gue<R: Rng + ?Sized>(spec: &EnsembleSpec, gen: &mut R) -> HermitianMatrix {
    let (n, band) = (spec.n(), spec.band);
    let scale = (spec.sigma2 / band.xi() as f64).sqrt();
    let off = scale * std::f64::consts::FRAC_1_SQRT_2;
    let mut m = HermitianMatrix::zeros(n);
    for j in 0..n {
        let d: f64 = gen.sample(StandardNormal);
        m.set(j, j, Complex64::new(scale * d, 0.0));
        for k in j + 1..n {
            if band.in_band(j, k) {
                let (x, y): (f64, f64) = (gen.sample(StandardNormal), gen.sample(StandardNormal));
                m.set(j, k, Complex64::new(off * x, off * y));
            }
        }
    }
    m
}

pub fn deform(m: &HermitianMatrix, pert: &Perturbation) -> Result<HermitianMatrix> {
    let n = m.n();
    let mut out = m.clone();
    match pert {
        Perturbation::None => {}
        Perturbation::Diagonal(thetas) => {
            if thetas.len() > n {
                return Err(Error::InvalidArgument(format!("{} strengths for a {n}×{n} matrix", thetas.len())));
            }
            for (j, &t) in thetas.iter().enumerate() {
                out.add_real(j, j, t);
            }
        }
        Perturbation::Delocalized(theta) => {
            let v = theta / n as f64;
            for j in 0..n {
                for k in 0..n {
                    out.add_real(j, k, v);
                }
            }
        }
    }
    Ok(out)
}

/// `F_{N,1}` (kind 1, prefactor `√ξ`) or `F_{N,2}` (kind 2, prefactor `√N`):
/// `prefactor/(σ√((θ²−σ²)/θ²)) · (λ₁ − θ − σ²/θ)`.
pub fn f_statistic(kind: u8, lambda1: f64, spec: &EnsembleSpec) -> Result<f64> {
    let theta = spec.perturbation.theta()?;
    let sigma2 = spec.sigma2;
    if theta * theta <= sigma2 {
        return Err(Error::Domain(format!("the F statistic needs |θ| > σ, got θ = {theta}, σ² = {sigma2}")));
    }
    let prefactor = match kind {
        1 => (spec.band.xi() as f64).sqrt(),
        2 => (spec.n() as f64).sqrt(),
        other => return Err(Error::InvalidArgument(format!("F statistic kind must be 1 or 2, got {other}"))),
    };
    let norm = (sigma2 * (theta * theta - sigma2) / (theta * theta)).sqrt();
    Ok(prefactor / norm * (lambda1 - theta - sigma2 / theta))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Realization {
    pub rep: usize,
    pub lambda1: f64,
    #[serde(rename = "F")]
    pub f: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aggregates {
    pub lambda1_mean: f64,
    pub f_mean: f64,
    /// Sample variance (divisor `reps − 1`); zero for a single rep.
    pub f_variance: f64,
    /// Kolmogorov–Smirnov distance of the F values to `N(0, 1)`.
    pub ks_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: EnsembleSpec,
    pub kind: u8,
    pub seed: u64,
    pub version: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub records: Vec<Realization>,
    /// `None` when there are no realizations.
    pub aggregates: Option<Aggregates>,
    pub manifest: RunManifest,
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

pub fn ks_distance_to_normal(samples: &[f64]) -> f64 {
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let phi = standard_normal();
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let c = phi.cdf(x);
            ((i + 1) as f64 / n - c).max(c - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Runs `reps` independent realizations, realization `i` drawing from stream
/// `(seed, i)`. Results are ordered by realization index regardless of the
/// thread count.
pub fn run_experiment(spec: &EnsembleSpec, kind: u8) -> Result<RunSummary> {
    spec.validate()?;
    // validate the normalisation before spending time on samples
    f_statistic(kind, 0.0, spec)?;
    let records: Vec<Realization> = (0..spec.reps)
        .into_par_iter()
        .map(|rep| {
            let mut gen = rng::stream(spec.seed, rep as u64);
            let m = deform(&sample_banded_gue(spec, &mut gen), &spec.perturbation)?;
            let lambda1 = largest_eigenvalue(&m)?;
            Ok(Realization { rep, lambda1, f: f_statistic(kind, lambda1, spec)? })
        })
        .collect::<Result<_>>()?;
    let aggregates = (!records.is_empty()).then(|| {
        let n = records.len() as f64;
        let f: Vec<f64> = records.iter().map(|r| r.f).collect();
        let f_mean = f.iter().sum::<f64>() / n;
        let f_variance = if records.len() > 1 { f.iter().map(|x| (x - f_mean).powi(2)).sum::<f64>() / (n - 1.0) } else { 0.0 };
        Aggregates {
            lambda1_mean: records.iter().map(|r| r.lambda1).sum::<f64>() / n,
            f_mean,
            f_variance,
            ks_distance: ks_distance_to_normal(&f),
        }
    });
    Ok(RunSummary {
        records,
        aggregates,
        manifest: RunManifest { spec: spec.clone(), kind, seed: spec.seed, version: crate::VERSION.to_string() },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub bin_lo: f64,
    pub bin_hi: f64,
    pub count: u64,
    /// `φ(centre)·width·n`.
    pub normal_ref: f64,
}

/// Equal-width bins on `[lo, hi]`; the last bin is closed on the right and
/// samples outside the range are not counted.
pub fn histogram(samples: &[f64], lo: f64, hi: f64, bins: usize) -> Result<Vec<HistogramBin>> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("histogram of an empty sample".into()));
    }
    if !(lo < hi) || bins == 0 {
        return Err(Error::InvalidArgument(format!("histogram needs lo < hi and at least one bin, got [{lo}, {hi}], {bins}")));
    }
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0u64; bins];
    for &x in samples {
        if x < lo || x > hi || x.is_nan() {
            continue;
        }
        let i = (((x - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    let phi = standard_normal();
    let n = samples.len() as f64;
    Ok(counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| {
            let bin_lo = lo + i as f64 * width;
            let bin_hi = if i + 1 == bins { hi } else { lo + (i + 1) as f64 * width };
            HistogramBin { bin_lo, bin_hi, count, normal_ref: phi.pdf(0.5 * (bin_lo + bin_hi)) * width * n }
        })
        .collect())
}
