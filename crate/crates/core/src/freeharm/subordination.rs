//! Free additive convolution through subordination.
//!
//! For `μ₁ ⊞ μ₂` there are analytic `ω₁, ω₂` on the upper half-plane with
//! `G_{μ₁}(ω₁) = G_{μ₂}(ω₂) = G_{μ₁⊞μ₂}(z)` and `ω₁ + ω₂ = z + F_{μ₁}(ω₁)`,
//! `F = 1/G`. With `H_i(w) = F_{μ_i}(w) − w + z`, `ω₂` is the fixed point of
//! `w ↦ H₁(H₂(w))` and `ω₁ = H₂(ω₂)`.

use std::sync::Arc;

use super::measure::{Transform, C};
use crate::{Error, Result};

pub const MAX_ITERATIONS: usize = 10_000;
pub const STEP_TOLERANCE: f64 = 1e-13;
pub const RESIDUAL_TOLERANCE: f64 = 1e-10;
/// Points with `Im z` at least this large are solved by plain iteration;
/// closer to the axis the solution is continued down from this height.
const DIRECT_HEIGHT: f64 = 0.5;
const CONTINUATION_RATIO: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubordinationPoint {
    pub z: C,
    pub omega1: C,
    pub omega2: C,
    pub omega1_prime: C,
    pub omega2_prime: C,
    /// `G_{μ₁⊞μ₂}(z)`.
    pub g: C,
    pub g_prime: C,
    /// `|G₁(ω₁) − G₂(ω₂)|`.
    pub residual_g: f64,
    /// `|ω₁ + ω₂ − z − F₁(ω₁)|`.
    pub residual_sum: f64,
}

/// `μ₁ ⊞ μ₂` as a lazily evaluated transform.
#[derive(Clone)]
pub struct FreeSum {
    pub mu1: Arc<dyn Transform>,
    pub mu2: Arc<dyn Transform>,
}

impl std::fmt::Debug for FreeSum {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("FreeSum")
    }
}

struct Eval {
    f: C,
    /// `F'(w) = −G'/G²`.
    df: C,
    g: C,
    dg: C,
}

fn eval(m: &dyn Transform, w: C) -> Result<Eval> {
    let g = m.cauchy_at(w)?;
    let dg = m.cauchy_derivative_at(w)?;
    if g.norm() == 0.0 || !g.is_finite() {
        return Err(Error::Solver(format!("Cauchy transform degenerate at {w}")));
    }
    Ok(Eval { f: g.inv(), df: -dg / (g * g), g, dg })
}

impl FreeSum {
    pub fn new(mu1: Arc<dyn Transform>, mu2: Arc<dyn Transform>) -> Self {
        Self { mu1, mu2 }
    }

    fn h1(&self, w: C, z: C) -> Result<(C, C)> {
        let e = eval(self.mu1.as_ref(), w)?;
        Ok((e.f - w + z, e.df - 1.0))
    }

    fn h2(&self, w: C, z: C) -> Result<(C, C)> {
        let e = eval(self.mu2.as_ref(), w)?;
        Ok((e.f - w + z, e.df - 1.0))
    }

    /// `w ↦ H₁(H₂(w))` with its derivative; `None` when an intermediate
    /// point leaves the upper half-plane.
    fn composite(&self, w: C, z: C) -> Option<(C, C)> {
        if w.im <= 0.0 {
            return None;
        }
        let (u, du) = self.h2(w, z).ok()?;
        if u.im <= 0.0 {
            return None;
        }
        let (v, dv) = self.h1(u, z).ok()?;
        Some((v, dv * du))
    }

    /// Damped fixed-point iteration from `w`.
    fn iterate(&self, mut w: C, z: C, max_iter: usize) -> Option<C> {
        let mut damping = 1.0;
        let mut last_step = f64::INFINITY;
        for _ in 0..max_iter {
            let (next, _) = self.composite(w, z)?;
            let step = (next - w).norm();
            if step < STEP_TOLERANCE * (1.0 + w.norm()) {
                return Some(next);
            }
            if step >= last_step {
                damping = 0.5;
            }
            last_step = step;
            w += (next - w) * damping;
        }
        None
    }

    /// Newton on `f(w) = w − H₁(H₂(w))`; accepted only inside `Im w ≥ Im z`.
    fn newton(&self, mut w: C, z: C) -> Option<C> {
        for _ in 0..60 {
            let (v, dv) = self.composite(w, z)?;
            let f = w - v;
            let step = f / (C::new(1.0, 0.0) - dv);
            if !step.is_finite() {
                return None;
            }
            let mut next = w - step;
            let mut tries = 0;
            while next.im <= 0.0 && tries < 40 {
                next = w - step * 0.5f64.powi(tries + 1);
                tries += 1;
            }
            if next.im <= 0.0 {
                return None;
            }
            let done = step.norm() < STEP_TOLERANCE * (1.0 + w.norm());
            w = next;
            if done {
                return Some(w);
            }
        }
        None
    }

    fn solve_omega2(&self, z: C) -> Result<C> {
        let fail = |detail: &str| Error::Convergence { z, detail: detail.to_string() };
        if z.im >= DIRECT_HEIGHT {
            let w = self.iterate(z, z, MAX_ITERATIONS).ok_or_else(|| fail("fixed-point iteration did not settle"))?;
            return self.newton(w, z).ok_or_else(|| fail("Newton polish failed"));
        }
        let start = C::new(z.re, DIRECT_HEIGHT);
        let mut w = self.solve_omega2(start)?;
        let mut height = DIRECT_HEIGHT;
        while height > z.im {
            height = (height * CONTINUATION_RATIO).max(z.im);
            let zh = C::new(z.re, height);
            w = match self.newton(w, zh) {
                Some(next) if next.im >= zh.im * (1.0 - 1e-9) => next,
                _ => {
                    let it = self.iterate(w, zh, MAX_ITERATIONS).ok_or_else(|| fail("continuation step did not converge"))?;
                    self.newton(it, zh).unwrap_or(it)
                }
            };
        }
        Ok(w)
    }

    /// `(ω₁, ω₂)` at `z`. A point mass `δ_a` only translates, so one function
    /// is `z − a` and the other `F(z − a) + a`, written without `− w + z` to
    /// keep precision where `F` is small.
    fn solve(&self, z: C) -> Result<(C, C)> {
        if let Some(a) = self.mu2.as_dirac() {
            return Ok((z - a, eval(self.mu1.as_ref(), z - a)?.f + a));
        }
        if let Some(a) = self.mu1.as_dirac() {
            return Ok((eval(self.mu2.as_ref(), z - a)?.f + a, z - a));
        }
        let omega2 = self.solve_omega2(z)?;
        Ok((self.h2(omega2, z)?.0, omega2))
    }

    /// Solves the subordination system at `z` and reports residuals.
    pub fn point(&self, z: C) -> Result<SubordinationPoint> {
        if !(z.im > 0.0) {
            return Err(Error::Domain(format!("subordination is solved for Im z > 0, got {z}")));
        }
        let (omega1, omega2) = self.solve(z)?;
        let e1 = eval(self.mu1.as_ref(), omega1)?;
        let e2 = eval(self.mu2.as_ref(), omega2)?;
        let residual_g = (e1.g - e2.g).norm();
        let residual_sum = (omega1 + omega2 - z - e1.f).norm();
        let (h1p, h2p) = (e1.df - 1.0, e2.df - 1.0);
        let denom = C::new(1.0, 0.0) - h1p * h2p;
        let omega2_prime = e1.df / denom;
        let omega1_prime = e2.df / denom;
        Ok(SubordinationPoint {
            z,
            omega1,
            omega2,
            omega1_prime,
            omega2_prime,
            g: e1.g,
            g_prime: e1.dg * omega1_prime,
            residual_g,
            residual_sum,
        })
    }

    /// [`FreeSum::point`] that additionally enforces the residual tolerance and
    /// `Im ω_i ≥ Im z`.
    pub fn checked_point(&self, z: C) -> Result<SubordinationPoint> {
        let p = self.point(z)?;
        let scale = 1.0 + p.g.norm();
        // the sum residual inherits rounding from both ω, amplified where F is steep
        let sum_scale = 1.0 + p.omega1.norm() + p.omega2.norm();
        if p.residual_g > RESIDUAL_TOLERANCE * scale || p.residual_sum > RESIDUAL_TOLERANCE * sum_scale {
            return Err(Error::Convergence {
                z,
                detail: format!("residuals {:.3e}, {:.3e} above tolerance", p.residual_g, p.residual_sum),
            });
        }
        // rounding in Im ω is relative to |ω|, which matters very close to the axis
        let slack = |w: C| 1e-9 * z.im + 1e-13 * (1.0 + w.norm());
        if p.omega1.im < z.im - slack(p.omega1) || p.omega2.im < z.im - slack(p.omega2) {
            return Err(Error::Convergence { z, detail: "subordination left the region Im ω ≥ Im z".into() });
        }
        Ok(p)
    }
}

impl Transform for FreeSum {
    fn cauchy_at(&self, z: C) -> Result<C> {
        Ok(self.checked_point(z)?.g)
    }

    fn cauchy_derivative_at(&self, z: C) -> Result<C> {
        Ok(self.checked_point(z)?.g_prime)
    }
}
