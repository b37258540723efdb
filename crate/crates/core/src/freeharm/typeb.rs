//! Infinitesimal (type B) distributions, finite-rank deformations and outliers.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::measure::{Atom, Density, Measure, SignedMeasure, Transform, C};
use super::quad::GaussLegendre;
use super::stieltjes::{detect_atoms, stieltjes_invert, DensityPoint, GridSpec};
use super::subordination::FreeSum;
use crate::{Error, Result};

/// A pair `(μ, ν)`: a probability law and a signed infinitesimal correction.
#[derive(Clone)]
pub struct TypeBDistribution {
    pub mu: Arc<dyn Transform>,
    pub nu: Arc<dyn Transform>,
}

impl std::fmt::Debug for TypeBDistribution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("TypeBDistribution")
    }
}

impl TypeBDistribution {
    pub fn new(mu: Measure, nu: SignedMeasure) -> Self {
        Self { mu: Arc::new(mu), nu: Arc::new(nu) }
    }
}

/// `G_{ν_{a+b}}(z) = G_{ν_a}(ω_a)ω_a′ + G_{ν_b}(ω_b)ω_b′`.
pub struct TypeBNu {
    sum: FreeSum,
    nu_a: Arc<dyn Transform>,
    nu_b: Arc<dyn Transform>,
}

impl Transform for TypeBNu {
    fn cauchy_at(&self, z: C) -> Result<C> {
        let p = self.sum.checked_point(z)?;
        Ok(self.nu_a.cauchy_at(p.omega1)? * p.omega1_prime + self.nu_b.cauchy_at(p.omega2)? * p.omega2_prime)
    }
}

pub fn typeb_convolve(a: &TypeBDistribution, b: &TypeBDistribution) -> TypeBDistribution {
    let sum = FreeSum::new(a.mu.clone(), b.mu.clone());
    let nu = TypeBNu { sum: sum.clone(), nu_a: a.nu.clone(), nu_b: b.nu.clone() };
    TypeBDistribution { mu: Arc::new(sum), nu: Arc::new(nu) }
}

/// Diagonal spikes `θ_j` plus an optional delocalized `(θ/N)J_N` term.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationSpec {
    pub thetas: Vec<f64>,
    pub delocalized: Option<f64>,
}

impl PerturbationSpec {
    pub fn new(thetas: Vec<f64>, delocalized: Option<f64>) -> Result<Self> {
        let spec = Self { thetas, delocalized };
        if spec.all_thetas().iter().any(|t| *t == 0.0 || !t.is_finite()) {
            return Err(Error::InvalidArgument("perturbation strengths must be finite and nonzero".into()));
        }
        Ok(spec)
    }

    /// Every strength, the delocalized one last; both kinds enter alike.
    pub fn all_thetas(&self) -> Vec<f64> {
        self.thetas.iter().copied().chain(self.delocalized).collect()
    }
}

/// `ρ_θ = θ + σ²/θ` if `|θ| ≥ σ`.
pub fn outlier_position(sigma: f64, theta: f64) -> Option<f64> {
    (theta.abs() >= sigma).then(|| theta + sigma * sigma / theta)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Outlier {
    pub theta: f64,
    pub position: Option<f64>,
}

pub fn bbp_outliers(sigma: f64, pert: &PerturbationSpec) -> Result<Vec<Outlier>> {
    check_sigma(sigma)?;
    let pert = PerturbationSpec::new(pert.thetas.clone(), pert.delocalized)?;
    Ok(pert.all_thetas().into_iter().map(|theta| Outlier { theta, position: outlier_position(sigma, theta) }).collect())
}

fn check_sigma(sigma: f64) -> Result<()> {
    if sigma.is_finite() && sigma > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("σ must be positive, got {sigma}")))
    }
}

fn check_theta(theta: f64) -> Result<()> {
    if theta.is_finite() && theta != 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("θ must be finite and nonzero, got {theta}")))
    }
}

/// `ν_θ` as a signed measure.
pub fn nu_j(theta: f64, sigma: f64) -> Result<SignedMeasure> {
    check_sigma(sigma)?;
    check_theta(theta)?;
    Ok(SignedMeasure::from_density(1.0, Density::OutlierCompensator { theta, sigma }))
}

/// Density of `ν_θ` at `t ∈ (−2σ, 2σ)`.
pub fn nu_j_density(theta: f64, sigma: f64, t: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_theta(theta)?;
    if !(t.abs() < 2.0 * sigma) {
        return Err(Error::Domain(format!("ν_θ has support (−2σ, 2σ); t = {t} is outside")));
    }
    Ok(Density::OutlierCompensator { theta, sigma }.eval(t))
}

/// `ν_θ(ℝ)` by Gauss–Legendre quadrature under `t = 2σ sin u`.
pub fn nu_j_mass(theta: f64, sigma: f64) -> Result<f64> {
    check_sigma(sigma)?;
    check_theta(theta)?;
    Ok(Density::OutlierCompensator { theta, sigma }.mass_by_quadrature(GaussLegendre::standard()))
}

/// Sign pattern of `ν_θ`: intervals where the density is positive and negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JordanSplit {
    pub positive: Option<(f64, f64)>,
    pub negative: Option<(f64, f64)>,
}

pub fn nu_j_jordan(theta: f64, sigma: f64) -> Result<JordanSplit> {
    check_sigma(sigma)?;
    check_theta(theta)?;
    let (lo, hi) = (-2.0 * sigma, 2.0 * sigma);
    if theta.abs() >= sigma {
        return Ok(JordanSplit { positive: Some((lo, hi)), negative: None });
    }
    let cut = 2.0 * theta;
    Ok(if theta > 0.0 {
        JordanSplit { positive: Some((lo, cut)), negative: Some((cut, hi)) }
    } else {
        JordanSplit { positive: Some((cut, hi)), negative: Some((lo, cut)) }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WignerMomentParams {
    pub beta: u8,
    pub sigma2: f64,
    /// Diagonal variance.
    pub s2: f64,
    /// Off-diagonal fourth moment.
    pub alpha: f64,
}

impl WignerMomentParams {
    pub fn gue(sigma2: f64) -> Self {
        Self { beta: 2, sigma2, s2: sigma2, alpha: 2.0 * sigma2 * sigma2 }
    }

    pub fn goe(sigma2: f64) -> Self {
        Self { beta: 1, sigma2, s2: 2.0 * sigma2, alpha: 3.0 * sigma2 * sigma2 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.beta != 1 && self.beta != 2 {
            return Err(Error::InvalidArgument(format!("β must be 1 or 2, got {}", self.beta)));
        }
        if !(self.sigma2 > 0.0) || !(self.s2 >= 0.0) {
            return Err(Error::InvalidArgument("variances must be positive".into()));
        }
        if self.alpha < self.sigma2 * self.sigma2 * (1.0 - 1e-12) {
            return Err(Error::InvalidArgument("the fourth moment must be at least σ⁴".into()));
        }
        Ok(())
    }
}

/// Infinitesimal distribution of a Wigner matrix with the given entry moments:
/// `½[(1{β=1}/2)(δ_{−2σ} + δ_{2σ}) + p(t/σ)/(π√(4σ²−t²)) dt]`.
pub fn wigner_nu(params: &WignerMomentParams) -> Result<SignedMeasure> {
    params.validate()?;
    let sigma = params.sigma2.sqrt();
    let a = params.alpha / (params.sigma2 * params.sigma2);
    let s = params.s2 / params.sigma2;
    let beta = f64::from(params.beta);
    let c4 = a + beta - 4.0;
    let c2 = s - 4.0 * a - 3.0 * beta + 13.0;
    let c0 = 2.0 * (a - s - 2.0) + beta;
    let mut nu = SignedMeasure::zero();
    if params.beta == 1 {
        nu.atoms = vec![Atom { loc: -2.0 * sigma, weight: 0.25 }, Atom { loc: 2.0 * sigma, weight: 0.25 }];
    }
    if [c0, c2, c4].iter().any(|c| *c != 0.0) {
        nu.parts.push(super::measure::Component { coef: 0.5, density: Density::ArcsinePoly { sigma, coeffs: vec![c0, 0.0, c2, 0.0, c4] } });
    }
    Ok(nu)
}

/// Numeric densities and atoms of a type B law over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeBReport {
    pub mu_density: Vec<DensityPoint>,
    pub nu_density: Vec<DensityPoint>,
    pub nu_atoms: Vec<Atom>,
}

/// Points per unit length when scanning for atoms.
const ATOM_SCAN_DENSITY: f64 = 500.0;

pub fn evaluate_typeb(dist: &TypeBDistribution, grid: &GridSpec) -> Result<TypeBReport> {
    let xs = grid.points();
    let mu = dist.mu.clone();
    let nu = dist.nu.clone();
    let mu_density = stieltjes_invert(&|z| mu.cauchy_at(z), &xs, &grid.ladder)?;
    let nu_density = stieltjes_invert(&|z| nu.cauchy_at(z), &xs, &grid.ladder)?;
    let scan = ((grid.hi - grid.lo) * ATOM_SCAN_DENSITY).ceil().max(16.0) as usize;
    let nu_atoms = detect_atoms(&|z| nu.cauchy_at(z), grid.lo, grid.hi, scan)?;
    Ok(TypeBReport { mu_density, nu_density, nu_atoms })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DeformedReport {
    pub sigma: f64,
    pub perturbation: PerturbationSpec,
    /// `base_ν + Σ_{|θ|≥σ} δ_{ρ_θ} − Σ ν_θ`.
    pub closed_form: SignedMeasure,
    pub outliers: Vec<Outlier>,
    /// Numeric ν density by inversion, with the closed-form value alongside.
    pub grid: Vec<DeformedPoint>,
    pub atoms: Vec<Atom>,
    /// Largest `|numeric − closed form|` over grid points at least
    /// [`ATOM_EXCLUSION`] away from every predicted atom.
    pub max_discrepancy: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeformedPoint {
    pub x: f64,
    pub density: f64,
    pub err: f64,
    pub closed_form: f64,
}

/// Grid points closer than this to a predicted atom are left out of the
/// discrepancy, since inversion at finite `η` smears the atom there.
pub const ATOM_EXCLUSION: f64 = 0.05;

/// Tolerance for matching a detected atom to a predicted location.
pub const ATOM_MATCH_TOLERANCE: f64 = 1e-6;

/// Type B law of `semicircle(σ) + Σ θ_j E^{(j,j)} (+ (θ/N)J_N)` with base
/// infinitesimal part `base_nu`, computed by convolving the semicircle with
/// one `(δ₀, δ_θ − δ₀)` factor per strength, and compared with the closed form.
pub fn deformed_typeb(sigma: f64, base_nu: &SignedMeasure, pert: &PerturbationSpec, grid: &GridSpec) -> Result<DeformedReport> {
    check_sigma(sigma)?;
    let pert = PerturbationSpec::new(pert.thetas.clone(), pert.delocalized)?;
    let outliers = bbp_outliers(sigma, &pert)?;
    let mut closed_form = base_nu.clone();
    for o in &outliers {
        if let Some(rho) = o.position {
            closed_form.atoms.push(Atom { loc: rho, weight: 1.0 });
        }
        closed_form = closed_form.plus(&nu_j(o.theta, sigma)?.scaled(-1.0));
    }
    let mut dist = TypeBDistribution::new(Measure::semicircle(sigma)?, base_nu.clone());
    for &theta in &pert.all_thetas() {
        let spike = TypeBDistribution::new(Measure::dirac(0.0), SignedMeasure::from_atoms(&[(theta, 1.0), (0.0, -1.0)]));
        dist = typeb_convolve(&dist, &spike);
    }
    let report = evaluate_typeb(&dist, grid)?;
    let predicted: Vec<f64> = closed_form.atoms.iter().map(|a| a.loc).collect();
    let mut max_discrepancy = 0.0f64;
    let points: Vec<DeformedPoint> = report
        .nu_density
        .iter()
        .map(|p| {
            let closed = closed_form.density(p.x);
            if predicted.iter().all(|a| (a - p.x).abs() >= ATOM_EXCLUSION) {
                max_discrepancy = max_discrepancy.max((p.density - closed).abs());
            }
            DeformedPoint { x: p.x, density: p.density, err: p.err, closed_form: closed }
        })
        .collect();
    Ok(DeformedReport { sigma, perturbation: pert, closed_form, outliers, grid: points, atoms: report.nu_atoms, max_discrepancy })
}
