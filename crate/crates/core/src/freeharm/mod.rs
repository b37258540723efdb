//! Cauchy transforms, free and type B additive convolution, and the
//! infinitesimal laws attached to finite-rank deformations of semicircular
//! matrices.

pub mod measure;
pub mod quad;
pub mod stieltjes;
pub mod subordination;
pub mod typeb;

pub use measure::{cauchy, Atom, Component, Density, Measure, SignedMeasure, Transform, C};
pub use stieltjes::{detect_atoms, stieltjes_invert, DensityPoint, GridSpec};
pub use subordination::{FreeSum, SubordinationPoint};
pub use typeb::{
    bbp_outliers, deformed_typeb, evaluate_typeb, nu_j, nu_j_density, nu_j_jordan, nu_j_mass, outlier_position, typeb_convolve, wigner_nu,
    DeformedReport, Outlier, PerturbationSpec, TypeBDistribution, TypeBReport, WignerMomentParams,
};

use std::sync::Arc;

use crate::Result;

/// `μ₁ ⊞ μ₂` evaluated on a grid.
#[derive(Debug, Clone)]
pub struct FreeConvolution {
    pub sum: FreeSum,
    pub density: Vec<DensityPoint>,
    pub atoms: Vec<Atom>,
    /// Largest subordination residual met on the grid and ladder.
    pub max_residual: f64,
}

pub fn free_convolve(mu1: &Measure, mu2: &Measure, grid: &GridSpec) -> Result<FreeConvolution> {
    use rayon::prelude::*;

    let sum = FreeSum::new(Arc::new(mu1.clone()), Arc::new(mu2.clone()));
    let xs = grid.points();
    let density = stieltjes_invert(&|z| sum.cauchy_at(z), &xs, &grid.ladder)?;
    let max_residual = xs
        .par_iter()
        .flat_map_iter(|&x| grid.ladder.iter().map(move |&eta| C::new(x, eta)))
        .map(|z| sum.checked_point(z).map(|p| p.residual_g.max(p.residual_sum)))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    let scan = ((grid.hi - grid.lo) * 500.0).ceil().max(16.0) as usize;
    let atoms = detect_atoms(&|z| sum.cauchy_at(z), grid.lo, grid.hi, scan)?;
    Ok(FreeConvolution { sum, density, atoms, max_residual })
}
