//! Dense complex matrices and a cyclic Jacobi eigensolver for Hermitian input.
//!
//! Matrices here are small (the spread formula and state extraction work on
//! operators of dimension at most a few dozen), so everything is row-major
//! `Vec<Complex64>` with no blocking.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};

pub type C64 = Complex64;

/// Entrywise tolerance on Hermiticity.
pub const TOL_HERM: f64 = 1e-9;
/// Tolerance on eigenvalues below zero for positive semidefiniteness.
pub const TOL_PSD: f64 = 1e-10;
/// Tolerance on unit trace.
pub const TOL_TRACE: f64 = 1e-9;

const JACOBI_MAX_SWEEPS: usize = 100;

/// Square complex matrix, row-major.
///
/// Serialized as nested rows with each entry a `[re, im]` pair; a bare number
/// is accepted as a real entry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<Entry>>", into = "Vec<Vec<Entry>>")]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

#[derive(Clone, Copy, Serialize, Deserialize)]
#[serde(untagged)]
enum Entry {
    Complex([f64; 2]),
    Real(f64),
}

impl TryFrom<Vec<Vec<Entry>>> for ComplexMatrix {
    type Error = Error;

    fn try_from(rows: Vec<Vec<Entry>>) -> Result<Self> {
        Self::from_rows(
            rows.into_iter()
                .map(|row| {
                    row.into_iter()
                        .map(|e| match e {
                            Entry::Complex([re, im]) => C64::new(re, im),
                            Entry::Real(re) => C64::new(re, 0.0),
                        })
                        .collect()
                })
                .collect(),
        )
    }
}

impl From<ComplexMatrix> for Vec<Vec<Entry>> {
    fn from(m: ComplexMatrix) -> Self {
        m.rows()
            .into_iter()
            .map(|row| row.into_iter().map(|z| Entry::Complex([z.re, z.im])).collect())
            .collect()
    }
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![C64::new(0.0, 0.0); dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = C64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries; rejects non-square or non-finite data.
    pub fn from_rows(rows: Vec<Vec<C64>>) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(structural("matrix must have at least one row"));
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != dim {
                return Err(structural(format!(
                    "row {i} has length {} but matrix has {dim} rows",
                    row.len()
                )));
            }
            data.extend(row);
        }
        Self::from_data(dim, data)
    }

    pub fn from_data(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 || data.len() != dim * dim {
            return Err(structural(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(domain("matrix entries must be finite"));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &v) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(v, 0.0);
        }
        m
    }

    /// `|v⟩⟨v|`.
    pub fn outer(v: &[C64]) -> Self {
        let dim = v.len();
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        self.data.chunks(self.dim).map(|r| r.to_vec()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn add(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|a| a * k).collect(),
        }
    }

    pub fn scale_real(&self, k: f64) -> Self {
        self.scale(C64::new(k, 0.0))
    }

    pub fn matmul(&self, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.data[k * n + j];
                }
            }
        }
        out
    }

    /// Kronecker product `self ⊗ other`.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        let n = a * b;
        let mut out = Self::zeros(n);
        for i1 in 0..a {
            for j1 in 0..a {
                let x = self[(i1, j1)];
                if x == C64::new(0.0, 0.0) {
                    continue;
                }
                for i2 in 0..b {
                    for j2 in 0..b {
                        out.data[(i1 * b + i2) * n + j1 * b + j2] = x * other[(i2, j2)];
                    }
                }
            }
        }
        out
    }

    /// `Re tr(self · other)` without forming the product.
    pub fn trace_product_re(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                let b = other.data[k * n + i];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    /// `Re ⟨v| self |v⟩`.
    pub fn expectation(&self, v: &[C64]) -> f64 {
        let n = self.dim;
        let mut acc = C64::new(0.0, 0.0);
        for i in 0..n {
            let mut row = C64::new(0.0, 0.0);
            for j in 0..n {
                row += self.data[i * n + j] * v[j];
            }
            acc += v[i].conj() * row;
        }
        acc.re
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max_ij |m_ij − conj(m_ji)|`.
    pub fn hermitian_deviation(&self) -> f64 {
        let n = self.dim;
        let mut dev: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Conjugation `U · self · U†`.
    pub fn conjugate_by(&self, u: &Self) -> Self {
        u.matmul(self).matmul(&u.adjoint())
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;

    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

/// Spectral decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Eigenvalues in descending order.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors as columns, in the order of `values`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }

    /// `V Λ V†`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.values.len();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let v = self.vectors.column(k);
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj() * lam;
                }
            }
        }
        out
    }
}

/// Cyclic Jacobi diagonalisation of a Hermitian matrix.
///
/// Sweeps visit pairs `(p, q)` with `p < q` in row order. Eigenvalues come
/// back sorted descending; exact ties keep their diagonal order.
pub fn eig_hermitian(m: &ComplexMatrix) -> Result<HermitianEigen> {
    let dev = m.hermitian_deviation();
    if dev > TOL_HERM {
        return Err(domain(format!(
            "eigensolver needs a Hermitian matrix, deviation {dev:e}"
        )));
    }
    let n = m.dim();
    // symmetrise so the rotation algebra sees an exactly Hermitian matrix
    let mut a = m.add(&m.adjoint()).scale_real(0.5);
    for i in 0..n {
        a[(i, i)] = C64::new(a[(i, i)].re, 0.0);
    }
    let mut v = ComplexMatrix::identity(n);

    let scale = a.max_abs().max(f64::MIN_POSITIVE);
    for _ in 0..JACOBI_MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-15 * scale {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&x, &y| diag[y].total_cmp(&diag[x]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors[(i, col)] = v[(i, src)];
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// One Jacobi rotation annihilating `a[p][q]`.
///
/// With `a_pq = |b| e^{iφ}`, the unitary is `U = diag(1, e^{-iφ})` on `(p, q)`
/// followed by the real rotation of the resulting symmetric block.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b < 1e-300 {
        return;
    }
    let n = a.dim();
    let phase = apq / b; // e^{iφ}
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * b);
    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
    let t = if theta == 0.0 { 1.0 } else { t };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;
    let ph_c = phase.conj();

    // columns: A ← A U
    for i in 0..n {
        let aip = a[(i, p)];
        let aiq = a[(i, q)];
        a[(i, p)] = aip * c - aiq * ph_c * s;
        a[(i, q)] = aip * s + aiq * ph_c * c;
        let vip = v[(i, p)];
        let viq = v[(i, q)];
        v[(i, p)] = vip * c - viq * ph_c * s;
        v[(i, q)] = vip * s + viq * ph_c * c;
    }
    // rows: A ← U† A
    for j in 0..n {
        let apj = a[(p, j)];
        let aqj = a[(q, j)];
        a[(p, j)] = apj * c - aqj * phase * s;
        a[(q, j)] = apj * s + aqj * phase * c;
    }
    a[(p, q)] = C64::new(0.0, 0.0);
    a[(q, p)] = C64::new(0.0, 0.0);
    a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
    a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
}

/// Hermitian square root of the inverse of a positive definite matrix.
pub fn inverse_sqrt_psd(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = eig_hermitian(m)?;
    let n = m.dim();
    let mut out = ComplexMatrix::zeros(n);
    for (k, &lam) in eig.values.iter().enumerate() {
        if lam <= 0.0 {
            return Err(domain("inverse square root of a singular matrix"));
        }
        let w = 1.0 / lam.sqrt();
        let v = eig.vector(k);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] += v[i] * v[j].conj() * w;
            }
        }
    }
    Ok(out)
}
