//! Dense complex matrices with the few factorizations the toolkit needs:
//! cyclic Jacobi for Hermitian spectra, Householder QR and LU with partial
//! pivoting.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const JACOBI_MAX_SWEEPS: usize = 100;

/// A square complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(n: usize) -> Self {
        ComplexMatrix {
            n,
            data: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_real_diag(&vec![1.0; n])
    }

    pub fn from_real_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, &x) in d.iter().enumerate() {
            m.data[i * m.n + i] = Complex64::new(x, 0.0);
        }
        m
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { n, data }
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self> {
        let n = rows.len();
        if n == 0 || rows.iter().any(|r| r.len() != n) {
            return Err(Error::invalid("matrix must be square and nonempty"));
        }
        Ok(ComplexMatrix {
            n,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: Complex64) {
        self.data[i * self.n + j] = v;
    }

    fn same_size(&self, other: &ComplexMatrix) -> Result<()> {
        if self.n != other.n {
            return Err(Error::invalid(format!(
                "dimension mismatch: {} vs {}",
                self.n, other.n
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.same_size(other)?;
        let n = self.n;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            let row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == 0.0 && a.im == 0.0 {
                    continue;
                }
                let brow = &other.data[k * n..(k + 1) * n];
                for (o, b) in row.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self · diag(d)`.
    pub fn mul_diag(&self, d: &[f64]) -> Result<ComplexMatrix> {
        if d.len() != self.n {
            return Err(Error::invalid("dimension mismatch with diagonal"));
        }
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.n) {
            for (x, s) in row.iter_mut().zip(d) {
                *x *= s;
            }
        }
        Ok(out)
    }

    /// `diag(d) · self`.
    pub fn diag_mul(&self, d: &[f64]) -> Result<ComplexMatrix> {
        if d.len() != self.n {
            return Err(Error::invalid("dimension mismatch with diagonal"));
        }
        let mut out = self.clone();
        for (row, s) in out.data.chunks_mut(self.n).zip(d) {
            for x in row.iter_mut() {
                *x *= s;
            }
        }
        Ok(out)
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.n, |i, j| self.get(j, i).conj())
    }

    pub fn add(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.same_size(other)?;
        Ok(ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }

    pub fn sub(&self, other: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.same_size(other)?;
        Ok(ComplexMatrix {
            n: self.n,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        })
    }

    pub fn scale(&self, s: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            n: self.n,
            data: self.data.iter().map(|a| a * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    /// `(1/N) Tr`.
    pub fn normalized_trace(&self) -> Complex64 {
        self.trace() / self.n as f64
    }

    /// `(1/N) Tr(self · other)` without forming the product.
    pub fn normalized_trace_of_product(&self, other: &ComplexMatrix) -> Result<Complex64> {
        self.same_size(other)?;
        let n = self.n;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for j in 0..n {
                acc += self.data[i * n + j] * other.data[j * n + i];
            }
        }
        Ok(acc / n as f64)
    }

    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |a_ij - conj(a_ji)|`.
    pub fn hermitian_residual(&self) -> f64 {
        let mut r: f64 = 0.0;
        for i in 0..self.n {
            for j in i..self.n {
                r = r.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        r
    }

    /// `max |U*U - I|`.
    pub fn unitarity_residual(&self) -> f64 {
        let p = self.adjoint().mul(self).expect("square");
        p.max_abs_diff(&ComplexMatrix::identity(self.n))
    }

    /// Eigenvalues of a Hermitian matrix in ascending order, by cyclic Jacobi
    /// rotations until the off-diagonal Frobenius norm drops below
    /// `1e-10 · ‖H‖_F`.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let scale = self.frobenius_norm().max(f64::MIN_POSITIVE);
        if self.hermitian_residual() > 1e-8 * scale {
            return Err(Error::invalid("matrix is not Hermitian"));
        }
        let n = self.n;
        let mut a = self.data.clone();
        let off = |a: &[Complex64]| -> f64 {
            let mut s = 0.0;
            for i in 0..n {
                for j in i + 1..n {
                    s += a[i * n + j].norm_sqr();
                }
            }
            (2.0 * s).sqrt()
        };
        let target = 1e-10 * scale;
        let mut sweeps = 0;
        while off(&a) > target {
            if sweeps == JACOBI_MAX_SWEEPS {
                return Err(Error::Numerical(format!(
                    "Jacobi eigensolver did not converge in {JACOBI_MAX_SWEEPS} sweeps"
                )));
            }
            sweeps += 1;
            for p in 0..n {
                for q in p + 1..n {
                    jacobi_rotate(&mut a, n, p, q, target / n as f64);
                }
            }
        }
        let mut eig: Vec<f64> = (0..n).map(|i| a[i * n + i].re).collect();
        eig.sort_by(f64::total_cmp);
        Ok(eig)
    }

    /// Householder QR: returns `(Q, R)` with `Q` unitary and `R` upper
    /// triangular, `self = Q R`.
    pub fn householder_qr(&self) -> (ComplexMatrix, ComplexMatrix) {
        let n = self.n;
        let mut r = self.clone();
        let mut q = ComplexMatrix::identity(n);
        let mut v = vec![Complex64::new(0.0, 0.0); n];
        for k in 0..n.saturating_sub(1) {
            let norm: f64 = (k..n).map(|i| r.get(i, k).norm_sqr()).sum::<f64>().sqrt();
            if norm == 0.0 {
                continue;
            }
            let x0 = r.get(k, k);
            let phase = if x0.norm() == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                x0 / x0.norm()
            };
            let alpha = -phase * norm;
            for i in k..n {
                v[i] = r.get(i, k);
            }
            v[k] -= alpha;
            let vnorm: f64 = (k..n).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt();
            if vnorm == 0.0 {
                continue;
            }
            for vi in v[k..n].iter_mut() {
                *vi /= vnorm;
            }
            // R ← (I - 2vv*) R on rows k.., columns k..
            for j in k..n {
                let dot: Complex64 = (k..n).map(|i| v[i].conj() * r.get(i, j)).sum();
                for i in k..n {
                    let val = r.get(i, j) - 2.0 * v[i] * dot;
                    r.set(i, j, val);
                }
            }
            // Q ← Q (I - 2vv*) on columns k..
            for i in 0..n {
                let dot: Complex64 = (k..n).map(|j| q.get(i, j) * v[j]).sum();
                for j in k..n {
                    let val = q.get(i, j) - 2.0 * dot * v[j].conj();
                    q.set(i, j, val);
                }
            }
        }
        for i in 1..n {
            for j in 0..i {
                r.set(i, j, Complex64::new(0.0, 0.0));
            }
        }
        (q, r)
    }

    /// `log |Det|` by LU with partial pivoting; `None` for a singular matrix.
    pub fn log_abs_det(&self) -> Option<f64> {
        let n = self.n;
        let mut a = self.data.clone();
        let mut log_det = 0.0;
        for k in 0..n {
            let (piv, pmag) = (k..n)
                .map(|i| (i, a[i * n + k].norm()))
                .max_by(|x, y| x.1.total_cmp(&y.1))
                .expect("nonempty range");
            if pmag == 0.0 {
                return None;
            }
            if piv != k {
                for j in 0..n {
                    a.swap(k * n + j, piv * n + j);
                }
            }
            let pivot = a[k * n + k];
            log_det += pivot.norm().ln();
            for i in k + 1..n {
                let factor = a[i * n + k] / pivot;
                if factor.norm() == 0.0 {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= factor * akj;
                }
            }
        }
        Some(log_det)
    }
}

// One rotation zeroing a[p][q] of a Hermitian matrix, applied as a unitary
// similarity. Skips entries already below `skip`.
fn jacobi_rotate(a: &mut [Complex64], n: usize, p: usize, q: usize, skip: f64) {
    let apq = a[p * n + q];
    let r = apq.norm();
    if r <= skip {
        return;
    }
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let e = apq / r;
    let theta = (aqq - app) / (2.0 * r);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    // rescaling the q-th basis vector by conj(e) makes a[p][q] real, then a real
    // rotation in the (p, q) plane finishes the job
    for k in 0..n {
        if k == p || k == q {
            continue;
        }
        let akp = a[k * n + p];
        let akq = a[k * n + q] * e.conj();
        let new_kp = akp * c - akq * s;
        let new_kq = akp * s + akq * c;
        a[k * n + p] = new_kp;
        a[k * n + q] = new_kq;
        a[p * n + k] = new_kp.conj();
        a[q * n + k] = new_kq.conj();
    }
    a[p * n + p] = Complex64::new(app - t * r, 0.0);
    a[q * n + q] = Complex64::new(aqq + t * r, 0.0);
    a[p * n + q] = Complex64::new(0.0, 0.0);
    a[q * n + p] = Complex64::new(0.0, 0.0);
}

/// Eigenvalues of a real symmetric matrix in ascending order.
pub fn symmetric_eigenvalues(rows: &[Vec<f64>]) -> Result<Vec<f64>> {
    let m = ComplexMatrix::from_rows(
        rows.iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect(),
    )?;
    m.hermitian_eigenvalues()
}

/// JSON form of a matrix: real and optional imaginary parts as row lists.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl TryFrom<MatrixJson> for ComplexMatrix {
    type Error = Error;

    fn try_from(m: MatrixJson) -> Result<Self> {
        let n = m.re.len();
        if let Some(im) = &m.im {
            if im.len() != n || im.iter().zip(&m.re).any(|(a, b)| a.len() != b.len()) {
                return Err(Error::Parse("real and imaginary parts differ in shape".into()));
            }
        }
        let rows = m
            .re
            .iter()
            .enumerate()
            .map(|(i, row)| {
                row.iter()
                    .enumerate()
                    .map(|(j, &x)| {
                        let y = m.im.as_ref().map_or(0.0, |im| im[i][j]);
                        Complex64::new(x, y)
                    })
                    .collect()
            })
            .collect();
        ComplexMatrix::from_rows(rows)
    }
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let n = m.n;
        MatrixJson {
            re: (0..n).map(|i| (0..n).map(|j| m.get(i, j).re).collect()).collect(),
            im: Some((0..n).map(|i| (0..n).map(|j| m.get(i, j).im).collect()).collect()),
        }
    }
}
