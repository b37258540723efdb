//! Dense Hermitian matrices and their spectra.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

/// Row-major Hermitian matrix with split real and imaginary parts.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix {
    n: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

/// Largest dimension handled by a full eigendecomposition in
/// [`largest_eigenvalue`].
pub const DENSE_LIMIT: usize = 256;
const LANCZOS_TOLERANCE: f64 = 1e-10;

impl HermitianMatrix {
    pub fn zeros(n: usize) -> Self {
        Self { n, re: vec![0.0; n * n], im: vec![0.0; n * n] }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (j, &d) in diag.iter().enumerate() {
            m.re[j * m.n + j] = d;
        }
        m
    }

    /// Builds from a real symmetric row-major array; panics if not symmetric.
    pub fn from_real_rows(rows: &[Vec<f64>]) -> Self {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (j, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), n, "matrix must be square");
            for (k, &v) in row.iter().enumerate() {
                assert_eq!(v, rows[k][j], "matrix must be symmetric");
                m.re[j * n + k] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, j: usize, k: usize) -> Complex64 {
        Complex64::new(self.re[j * self.n + k], self.im[j * self.n + k])
    }

    /// Sets entry `(j, k)` and its mirror `(k, j)`; diagonal entries keep only
    /// the real part.
    pub fn set(&mut self, j: usize, k: usize, v: Complex64) {
        let n = self.n;
        if j == k {
            self.re[j * n + j] = v.re;
            self.im[j * n + j] = 0.0;
        } else {
            self.re[j * n + k] = v.re;
            self.im[j * n + k] = v.im;
            self.re[k * n + j] = v.re;
            self.im[k * n + j] = -v.im;
        }
    }

    pub fn add_real(&mut self, j: usize, k: usize, v: f64) {
        self.re[j * self.n + k] += v;
    }

    pub fn is_hermitian(&self) -> bool {
        (0..self.n).all(|j| {
            (j..self.n).all(|k| {
                let (a, b) = (self.get(j, k), self.get(k, j));
                a == b.conj()
            })
        })
    }

    /// `Tr(A²) = Σ |a_jk|²`.
    pub fn frobenius_sq(&self) -> f64 {
        self.re.iter().zip(&self.im).map(|(r, i)| r * r + i * i).sum()
    }

    /// `y = A x` for complex `x` given as split parts.
    pub fn matvec(&self, xr: &[f64], xi: &[f64], yr: &mut [f64], yi: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            let (ar, ai) = (&self.re[j * n..(j + 1) * n], &self.im[j * n..(j + 1) * n]);
            let (mut sr, mut si) = (0.0, 0.0);
            for k in 0..n {
                sr += ar[k] * xr[k] - ai[k] * xi[k];
                si += ar[k] * xi[k] + ai[k] * xr[k];
            }
            yr[j] = sr;
            yi[j] = si;
        }
    }

    pub fn to_dmatrix(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.n, self.n, |j, k| self.get(j, k))
    }
}

/// All eigenvalues in decreasing order, by full eigendecomposition.
pub fn eigenvalues(m: &HermitianMatrix) -> Result<Vec<f64>> {
    if m.n == 0 {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = m.to_dmatrix().symmetric_eigenvalues().iter().copied().collect();
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::Solver(format!("eigensolver returned non-finite values for a {0}×{0} matrix", m.n)));
    }
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// `λ₁`. Small matrices use a full eigendecomposition; larger ones use Lanczos
/// with full reorthogonalisation, stopping once the Ritz residual certifies
/// the top value to `1e−10·max(1, |λ₁|)`.
pub fn largest_eigenvalue(m: &HermitianMatrix) -> Result<f64> {
    if m.n == 0 {
        return Err(Error::InvalidArgument("empty matrix has no eigenvalues".into()));
    }
    if m.n <= DENSE_LIMIT {
        return Ok(eigenvalues(m)?[0]);
    }
    lanczos_top(m)
}

fn dot(ar: &[f64], ai: &[f64], br: &[f64], bi: &[f64]) -> (f64, f64) {
    // ⟨a, b⟩ = Σ conj(a) b
    let mut re = 0.0;
    let mut im = 0.0;
    for k in 0..ar.len() {
        re += ar[k] * br[k] + ai[k] * bi[k];
        im += ar[k] * bi[k] - ai[k] * br[k];
    }
    (re, im)
}

pub(crate) fn lanczos_top(m: &HermitianMatrix) -> Result<f64> {
    let n = m.n;
    let max_steps = n.min(400);
    let mut gen = ChaCha8Rng::seed_from_u64(0x01a2_c705);
    let mut vr: Vec<f64> = (0..n).map(|_| gen.sample(StandardNormal)).collect();
    let mut vi: Vec<f64> = (0..n).map(|_| gen.sample(StandardNormal)).collect();
    let norm = dot(&vr, &vi, &vr, &vi).0.sqrt();
    vr.iter_mut().chain(vi.iter_mut()).for_each(|x| *x /= norm);
    let mut basis: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let (mut wr, mut wi) = (vec![0.0; n], vec![0.0; n]);
    let mut last_theta = f64::NAN;
    for step in 0..max_steps {
        m.matvec(&vr, &vi, &mut wr, &mut wi);
        let a = dot(&vr, &vi, &wr, &wi).0;
        alpha.push(a);
        basis.push((vr.clone(), vi.clone()));
        // two passes of classical Gram–Schmidt against the whole basis
        for _ in 0..2 {
            for (br, bi) in &basis {
                let (cr, ci) = dot(br, bi, &wr, &wi);
                for k in 0..n {
                    wr[k] -= cr * br[k] - ci * bi[k];
                    wi[k] -= cr * bi[k] + ci * br[k];
                }
            }
        }
        let b = dot(&wr, &wi, &wr, &wi).0.sqrt();
        let k = alpha.len();
        let check = step + 1 == max_steps || b < 1e-300 || (k >= 8 && k.is_multiple_of(4));
        if check {
            let t = DMatrix::from_fn(k, k, |i, j| {
                if i == j {
                    alpha[i]
                } else if i + 1 == j {
                    beta[i]
                } else if j + 1 == i {
                    beta[j]
                } else {
                    0.0
                }
            });
            let eig = SymmetricEigen::new(t);
            let (top, theta) =
                eig.eigenvalues.iter().enumerate().fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            let residual = b * eig.eigenvectors[(k - 1, top)].abs();
            if residual <= LANCZOS_TOLERANCE * theta.abs().max(1.0) || b <= 1e-12 * theta.abs().max(1.0) {
                return Ok(theta);
            }
            last_theta = theta;
        }
        if b <= 1e-300 {
            break;
        }
        beta.push(b);
        for k in 0..n {
            vr[k] = wr[k] / b;
            vi[k] = wi[k] / b;
        }
    }
    Err(Error::Solver(format!(
        "Lanczos did not certify the top eigenvalue of a {n}×{n} matrix in {max_steps} steps (last Ritz value {last_theta})"
    )))
}

/// `Tr(A^k)` for `k = 1..=max_order`, from the eigenvalues.
pub fn esd_moments(m: &HermitianMatrix, max_order: usize) -> Result<Vec<f64>> {
    let values = eigenvalues(m)?;
    Ok((1..=max_order).map(|k| values.iter().map(|v| v.powi(k as i32)).sum()).collect())
}
