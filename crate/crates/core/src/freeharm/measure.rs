//! Measures, signed measures and their Cauchy transforms `G(z) = ∫ μ(dt)/(z−t)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::quad::GaussLegendre;
use crate::{Error, Result};

pub type C = Complex64;

/// Anything with a Cauchy transform on the upper half-plane.
pub trait Transform: Send + Sync {
    fn cauchy_at(&self, z: C) -> Result<C>;

    /// `G'(z)`; defaults to a central difference with step `1e−6(1+|z|)`.
    fn cauchy_derivative_at(&self, z: C) -> Result<C> {
        let h = 1e-6 * (1.0 + z.norm());
        let h = h.min(0.5 * z.im);
        Ok((self.cauchy_at(z + h)? - self.cauchy_at(z - h)?) / (2.0 * h))
    }

    /// `Some(a)` if this is the point mass `δ_a`.
    fn as_dirac(&self) -> Option<f64> {
        None
    }
}

/// `√(z−r)·√(z+r)`: the branch of `√(z²−r²)` that behaves like `z` at infinity
/// with its cut on `[−r, r]`.
pub fn edge_root(z: C, r: f64) -> C {
    (z - r).sqrt() * (z + r).sqrt()
}

/// Absolutely continuous parts with closed-form transforms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    /// `√(4σ²−t²)/(2πσ²)` on `(−2σ, 2σ)`.
    Semicircle { sigma: f64 },
    /// `p(t/σ)/(π√(4σ²−t²))` on `(−2σ, 2σ)` with `p(u) = Σ coeffs[k] u^k`.
    ArcsinePoly { sigma: f64, coeffs: Vec<f64> },
    /// `θ(t−2θ)/(2π(θ(t−θ)−σ²)√(4σ²−t²))` on `(−2σ, 2σ)`.
    OutlierCompensator { theta: f64, sigma: f64 },
}

/// `binom(m, m/2)` for even `m`: the `m`-th moment of `t/σ` under the arcsine
/// law on `(−2σ, 2σ)`; zero for odd `m`.
fn arcsine_moment(m: usize) -> f64 {
    if m % 2 == 1 {
        return 0.0;
    }
    (0..m / 2).fold(1.0, |acc, i| acc * (m - i) as f64 / (i + 1) as f64)
}

impl Density {
    pub fn sigma(&self) -> f64 {
        match self {
            Density::Semicircle { sigma } | Density::ArcsinePoly { sigma, .. } | Density::OutlierCompensator { sigma, .. } => *sigma,
        }
    }

    /// Support `(−2σ, 2σ)`.
    pub fn support(&self) -> (f64, f64) {
        let s = self.sigma();
        (-2.0 * s, 2.0 * s)
    }

    /// Pointwise density; zero outside the open support.
    pub fn eval(&self, t: f64) -> f64 {
        let s = self.sigma();
        let gap = (2.0 * s - t) * (2.0 * s + t);
        if gap <= 0.0 {
            return 0.0;
        }
        match self {
            Density::Semicircle { sigma } => gap.sqrt() / (2.0 * PI * sigma * sigma),
            Density::ArcsinePoly { sigma, coeffs } => poly(coeffs, t / sigma) / (PI * gap.sqrt()),
            Density::OutlierCompensator { theta, sigma } => {
                theta * (t - 2.0 * theta) / (2.0 * PI * (theta * (t - theta) - sigma * sigma) * gap.sqrt())
            }
        }
    }

    /// Total mass from the closed forms.
    pub fn mass(&self) -> f64 {
        match self {
            Density::Semicircle { .. } => 1.0,
            Density::ArcsinePoly { coeffs, .. } => coeffs.iter().enumerate().map(|(k, c)| c * arcsine_moment(k)).sum(),
            Density::OutlierCompensator { theta, sigma } => {
                let rho = theta + sigma * sigma / theta;
                if (theta.abs() - sigma).abs() <= f64::EPSILON * sigma {
                    return 0.5;
                }
                let r = edge_root(C::new(rho, 0.0), 2.0 * sigma).re;
                0.5 * (1.0 - (rho - 2.0 * theta) / r)
            }
        }
    }

    /// Mass by Gauss–Legendre quadrature under `t = 2σ sin u`.
    pub fn mass_by_quadrature(&self, rule: &GaussLegendre) -> f64 {
        rule.integrate_sin(0.0, 2.0 * self.sigma(), |t| self.eval(t))
    }

    pub fn cauchy(&self, z: C) -> C {
        match self {
            Density::Semicircle { sigma } => (z - edge_root(z, 2.0 * sigma)) / (2.0 * sigma * sigma),
            Density::ArcsinePoly { sigma, coeffs } => {
                let r = edge_root(z, 2.0 * sigma);
                let u = z / sigma;
                // p(t/σ)/(z−t) = p(z/σ)/(z−t) − (p(z/σ) − p(t/σ))/(z−t), the latter a polynomial in t
                let mut correction = C::new(0.0, 0.0);
                for (k, &c) in coeffs.iter().enumerate().skip(1) {
                    // (u^k − v^k)/(u − v) = Σ_{i<k} u^{k−1−i} v^i, with z−t = σ(u−v)
                    let mut inner = C::new(0.0, 0.0);
                    for i in 0..k {
                        inner += u.powu((k - 1 - i) as u32) * arcsine_moment(i);
                    }
                    correction += inner * (c / sigma);
                }
                cpoly(coeffs, u) / r - correction
            }
            Density::OutlierCompensator { theta, sigma } => {
                let (rho, two_s) = (theta + sigma * sigma / theta, 2.0 * sigma);
                let g_arc = edge_root(z, two_s).inv();
                if (rho - 2.0 * theta).abs() < 1e-15 * rho.abs() {
                    return 0.5 * g_arc;
                }
                let g_rho = 1.0 / edge_root(C::new(rho, 0.0), two_s).re;
                0.5 * g_arc + 0.5 * (rho - 2.0 * theta) * (g_arc - g_rho) / (z - rho)
            }
        }
    }

    pub fn cauchy_derivative(&self, z: C) -> C {
        match self {
            Density::Semicircle { sigma } => (1.0 - z / edge_root(z, 2.0 * sigma)) / (2.0 * sigma * sigma),
            Density::ArcsinePoly { sigma, coeffs } => {
                let r = edge_root(z, 2.0 * sigma);
                let u = z / sigma;
                let dp: Vec<f64> = coeffs.iter().enumerate().skip(1).map(|(k, c)| k as f64 * c).collect();
                let mut correction = C::new(0.0, 0.0);
                for (k, &c) in coeffs.iter().enumerate().skip(2) {
                    let mut inner = C::new(0.0, 0.0);
                    for i in 0..k - 1 {
                        inner += u.powu((k - 2 - i) as u32) * ((k - 1 - i) as f64 * arcsine_moment(i));
                    }
                    correction += inner * (c / (sigma * sigma));
                }
                cpoly(&dp, u) / (sigma * r) - cpoly(coeffs, u) * z / (r * r * r) - correction
            }
            Density::OutlierCompensator { theta, sigma } => {
                let (rho, two_s) = (theta + sigma * sigma / theta, 2.0 * sigma);
                let r = edge_root(z, two_s);
                let g_arc = r.inv();
                let dg_arc = -z / (r * r * r);
                if (rho - 2.0 * theta).abs() < 1e-15 * rho.abs() {
                    return 0.5 * dg_arc;
                }
                let g_rho = 1.0 / edge_root(C::new(rho, 0.0), two_s).re;
                let d = z - rho;
                0.5 * dg_arc + 0.5 * (rho - 2.0 * theta) * (dg_arc * d - (g_arc - g_rho)) / (d * d)
            }
        }
    }

    /// `∫ density(t)/(z−t) dt` by quadrature; an oracle for [`Density::cauchy`].
    pub fn cauchy_by_quadrature(&self, z: C, rule: &GaussLegendre) -> C {
        rule.integrate_sin_complex(0.0, 2.0 * self.sigma(), |t| self.eval(t) / (z - t))
    }
}

fn poly(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

fn cpoly(coeffs: &[f64], x: C) -> C {
    coeffs.iter().rev().fold(C::new(0.0, 0.0), |acc, &c| acc * x + c)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub coef: f64,
    pub density: Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub loc: f64,
    pub weight: f64,
}

/// Finite combination of atoms and closed-form densities; weights may be
/// negative.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SignedMeasure {
    pub atoms: Vec<Atom>,
    pub parts: Vec<Component>,
}

impl SignedMeasure {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn dirac(loc: f64) -> Self {
        Self { atoms: vec![Atom { loc, weight: 1.0 }], parts: Vec::new() }
    }

    pub fn from_atoms(atoms: &[(f64, f64)]) -> Self {
        Self { atoms: atoms.iter().map(|&(loc, weight)| Atom { loc, weight }).collect(), parts: Vec::new() }
    }

    pub fn semicircle(sigma: f64) -> Self {
        Self::from_density(1.0, Density::Semicircle { sigma })
    }

    pub fn from_density(coef: f64, density: Density) -> Self {
        Self { atoms: Vec::new(), parts: vec![Component { coef, density }] }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            atoms: self.atoms.iter().map(|a| Atom { loc: a.loc, weight: factor * a.weight }).collect(),
            parts: self.parts.iter().map(|c| Component { coef: factor * c.coef, density: c.density.clone() }).collect(),
        }
    }

    pub fn plus(&self, other: &SignedMeasure) -> Self {
        let mut out = self.clone();
        out.atoms.extend_from_slice(&other.atoms);
        out.parts.extend(other.parts.iter().cloned());
        out
    }

    pub fn is_zero(&self) -> bool {
        self.atoms.iter().all(|a| a.weight == 0.0) && self.parts.iter().all(|c| c.coef == 0.0)
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum::<f64>() + self.parts.iter().map(|c| c.coef * c.density.mass()).sum::<f64>()
    }

    /// Density of the absolutely continuous part.
    pub fn density(&self, t: f64) -> f64 {
        self.parts.iter().map(|c| c.coef * c.density.eval(t)).sum()
    }

    /// Convex hull of atoms and supports.
    pub fn hull(&self) -> Option<(f64, f64)> {
        let points = self.atoms.iter().map(|a| (a.loc, a.loc)).chain(self.parts.iter().map(|c| c.density.support()));
        points.fold(None, |acc, (lo, hi)| match acc {
            None => Some((lo, hi)),
            Some((a, b)) => Some((a.min(lo), b.max(hi))),
        })
    }

    pub fn cauchy_unchecked(&self, z: C) -> C {
        let atoms: C = self.atoms.iter().map(|a| a.weight / (z - a.loc)).sum();
        atoms + self.parts.iter().map(|c| c.coef * c.density.cauchy(z)).sum::<C>()
    }

    pub fn cauchy_derivative_unchecked(&self, z: C) -> C {
        let atoms: C = self.atoms.iter().map(|a| -a.weight / ((z - a.loc) * (z - a.loc))).sum();
        atoms + self.parts.iter().map(|c| c.coef * c.density.cauchy_derivative(z)).sum::<C>()
    }
}

fn check_upper(z: C) -> Result<()> {
    if z.im > 0.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("Cauchy transforms are evaluated at Im z > 0, got {z}")))
    }
}

impl Transform for SignedMeasure {
    fn cauchy_at(&self, z: C) -> Result<C> {
        check_upper(z)?;
        Ok(self.cauchy_unchecked(z))
    }

    fn cauchy_derivative_at(&self, z: C) -> Result<C> {
        check_upper(z)?;
        Ok(self.cauchy_derivative_unchecked(z))
    }

    fn as_dirac(&self) -> Option<f64> {
        match (self.atoms.as_slice(), self.parts.is_empty()) {
            ([a], true) if a.weight == 1.0 => Some(a.loc),
            _ => None,
        }
    }
}

/// Probability measure: non-negative parts and unit total mass.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SignedMeasure", into = "SignedMeasure")]
pub struct Measure(SignedMeasure);

/// Mass tolerance for probability measures.
pub const MASS_TOLERANCE: f64 = 1e-8;

impl Measure {
    pub fn new(inner: SignedMeasure) -> Result<Self> {
        if inner.atoms.iter().any(|a| !(a.weight > 0.0) || !a.loc.is_finite()) {
            return Err(Error::InvalidArgument("probability atoms need positive weights and finite locations".into()));
        }
        for c in &inner.parts {
            if !(c.coef > 0.0) || !(c.density.sigma() > 0.0) {
                return Err(Error::InvalidArgument("probability densities need positive coefficients and scales".into()));
            }
            match &c.density {
                Density::Semicircle { .. } => {}
                other => {
                    let (lo, hi) = other.support();
                    let rule = GaussLegendre::new(64);
                    let negative = rule.nodes.iter().any(|&x| other.eval(0.5 * (lo + hi) + 0.5 * (hi - lo) * x) < 0.0);
                    if negative {
                        return Err(Error::InvalidArgument("probability density takes negative values".into()));
                    }
                }
            }
        }
        let mass = inner.total_mass();
        if (mass - 1.0).abs() > MASS_TOLERANCE {
            return Err(Error::InvalidArgument(format!("probability measure has total mass {mass}")));
        }
        Ok(Self(inner))
    }

    pub fn dirac(loc: f64) -> Self {
        Self(SignedMeasure::dirac(loc))
    }

    pub fn semicircle(sigma: f64) -> Result<Self> {
        Self::new(SignedMeasure::semicircle(sigma))
    }

    /// `½δ_{−1} + ½δ_{1}`.
    pub fn rademacher() -> Self {
        Self(SignedMeasure::from_atoms(&[(-1.0, 0.5), (1.0, 0.5)]))
    }

    pub fn from_atoms(atoms: &[(f64, f64)]) -> Result<Self> {
        Self::new(SignedMeasure::from_atoms(atoms))
    }

    pub fn as_signed(&self) -> &SignedMeasure {
        &self.0
    }
}

impl TryFrom<SignedMeasure> for Measure {
    type Error = Error;

    fn try_from(value: SignedMeasure) -> Result<Self> {
        Measure::new(value)
    }
}

impl From<Measure> for SignedMeasure {
    fn from(value: Measure) -> Self {
        value.0
    }
}

impl Transform for Measure {
    fn cauchy_at(&self, z: C) -> Result<C> {
        self.0.cauchy_at(z)
    }

    fn cauchy_derivative_at(&self, z: C) -> Result<C> {
        self.0.cauchy_derivative_at(z)
    }

    fn as_dirac(&self) -> Option<f64> {
        self.0.as_dirac()
    }
}

/// `G_μ(z)`, rejecting `Im z ≤ 0`.
pub fn cauchy(m: &dyn Transform, z: C) -> Result<C> {
    m.cauchy_at(z)
}
