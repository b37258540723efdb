//! Recovering densities and atoms from a Cauchy transform near the real axis.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::measure::{Atom, C};
use crate::{Error, Result};

/// Default heights for `x + iη`, largest first.
pub const DEFAULT_LADDER: [f64; 3] = [1e-3, 5e-4, 2.5e-4];
/// Heights used to confirm an atom's weight.
const ATOM_LADDER: [f64; 3] = [1e-6, 5e-7, 2.5e-7];
pub const ATOM_THRESHOLD: f64 = 1e-3;
const ATOM_STABILITY: f64 = 1e-2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub ladder: Vec<f64>,
}

impl GridSpec {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        Self::with_ladder(lo, hi, n, DEFAULT_LADDER.to_vec())
    }

    pub fn with_ladder(lo: f64, hi: f64, n: usize, ladder: Vec<f64>) -> Result<Self> {
        if !(lo < hi) || n == 0 {
            return Err(Error::InvalidArgument(format!("grid needs lo < hi and n > 0, got [{lo}, {hi}] with {n} points")));
        }
        if ladder.is_empty() || ladder.iter().any(|&e| !(e > 0.0)) {
            return Err(Error::InvalidArgument("the η ladder needs positive heights".into()));
        }
        Ok(Self { lo, hi, n, ladder })
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / self.n as f64
    }

    /// Cell midpoints `lo + (i + ½)(hi − lo)/n`.
    pub fn points(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..self.n).map(|i| self.lo + (i as f64 + 0.5) * h).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityPoint {
    pub x: f64,
    pub density: f64,
    pub err: f64,
}

/// Value at 0 of the polynomial through `(xs[i], ys[i])` (Neville).
pub fn extrapolate_to_zero(xs: &[f64], ys: &[f64]) -> f64 {
    let mut p = ys.to_vec();
    let n = xs.len();
    for level in 1..n {
        for i in 0..n - level {
            let (a, b) = (xs[i], xs[i + level]);
            p[i] = (b * p[i] - a * p[i + 1]) / (b - a);
        }
    }
    p[0]
}

/// `−(1/π) lim Im G(x + iη)` by polynomial extrapolation over the ladder;
/// the error estimate compares against the extrapolation through the two
/// smallest heights only.
pub fn invert_at<F>(g: &F, x: f64, ladder: &[f64]) -> Result<DensityPoint>
where
    F: Fn(C) -> Result<C> + ?Sized,
{
    let ys: Vec<f64> = ladder.iter().map(|&eta| g(C::new(x, eta)).map(|v| -v.im / PI)).collect::<Result<_>>()?;
    let density = extrapolate_to_zero(ladder, &ys);
    let err = if ladder.len() >= 3 {
        let k = ladder.len();
        (density - extrapolate_to_zero(&ladder[k - 2..], &ys[k - 2..])).abs()
    } else if ladder.len() == 2 {
        (density - ys[1]).abs()
    } else {
        0.0
    };
    Ok(DensityPoint { x, density, err })
}

pub fn stieltjes_invert<F>(g: &F, xs: &[f64], ladder: &[f64]) -> Result<Vec<DensityPoint>>
where
    F: Fn(C) -> Result<C> + Sync + ?Sized,
{
    xs.par_iter().map(|&x| invert_at(g, x, ladder)).collect()
}

/// Scans `[lo, hi]` for point masses of the measure behind `g`.
///
/// Candidates are local maxima of `|η Im G(x+iη)|` above [`ATOM_THRESHOLD`]
/// at `η` equal to the scan spacing. Each is located by bisection on the sign
/// of `Re(1/G)` close to the axis and kept only if `−η Im G` is stable across
/// a ladder of very small heights, which separates atoms from square-root or
/// inverse-square-root edges.
pub fn detect_atoms<F>(g: &F, lo: f64, hi: f64, scan_points: usize) -> Result<Vec<Atom>>
where
    F: Fn(C) -> Result<C> + Sync + ?Sized,
{
    let h = (hi - lo) / scan_points as f64;
    let xs: Vec<f64> = (0..=scan_points).map(|i| lo + i as f64 * h).collect();
    let scan: Vec<f64> = xs.par_iter().map(|&x| g(C::new(x, h)).map(|v| (h * v.im).abs())).collect::<Result<_>>()?;
    let mut candidates = Vec::new();
    for i in 0..scan.len() {
        let left = if i == 0 { 0.0 } else { scan[i - 1] };
        let right = if i + 1 == scan.len() { 0.0 } else { scan[i + 1] };
        if scan[i] > ATOM_THRESHOLD && scan[i] >= left && scan[i] > right {
            candidates.push(xs[i]);
        }
    }
    let mut atoms: Vec<Atom> = Vec::new();
    for xc in candidates {
        let loc = locate(g, xc, h)?;
        let ws: Vec<f64> = ATOM_LADDER.iter().map(|&eta| g(C::new(loc, eta)).map(|v| -eta * v.im)).collect::<Result<_>>()?;
        let weight = extrapolate_to_zero(&ATOM_LADDER, &ws);
        let spread = ws.iter().map(|w| (w - weight).abs()).fold(0.0, f64::max);
        if weight.abs() > ATOM_THRESHOLD && spread < ATOM_STABILITY * weight.abs() {
            if atoms.last().is_some_and(|a| (a.loc - loc).abs() < h) {
                continue;
            }
            atoms.push(Atom { loc, weight });
        }
    }
    Ok(atoms)
}

/// Root of `Re(1/G(x + iη))` near `xc`, or `xc` if no sign change brackets it.
fn locate<F>(g: &F, xc: f64, h: f64) -> Result<f64>
where
    F: Fn(C) -> Result<C> + ?Sized,
{
    const ETA: f64 = 1e-9;
    let f = |x: f64| g(C::new(x, ETA)).map(|v| v.inv().re);
    let (mut a, mut b) = (xc - h, xc + h);
    let (mut fa, fb) = (f(a)?, f(b)?);
    if fa.signum() == fb.signum() {
        return Ok(xc);
    }
    for _ in 0..80 {
        let m = 0.5 * (a + b);
        let fm = f(m)?;
        if fm.signum() == fa.signum() {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
        if b - a < 1e-14 * (1.0 + m.abs()) {
            break;
        }
    }
    Ok(0.5 * (a + b))
}
