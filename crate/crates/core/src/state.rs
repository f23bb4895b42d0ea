//! Density matrices, Bloch vectors and POVMs.

use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Error, Result};
use crate::linalg::{eig_hermitian, ComplexMatrix, C64, TOL_HERM, TOL_PSD, TOL_TRACE};

/// Entrywise tolerance on `Σ_k E_k = I`.
pub const TOL_COMPLETE: f64 = 1e-9;

/// Largest Hilbert-space dimension for explicit n-fold product operators.
pub const MAX_PRODUCT_DIM: usize = 1024;

/// A Hermitian, positive semidefinite, unit-trace matrix.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ComplexMatrix", into = "ComplexMatrix")]
pub struct DensityMatrix {
    mat: ComplexMatrix,
}

impl DensityMatrix {
    pub fn new(mat: ComplexMatrix) -> Result<Self> {
        let herm = mat.hermitian_deviation();
        if herm > TOL_HERM {
            return Err(domain(format!("state is not Hermitian (deviation {herm:e})")));
        }
        let tr = mat.trace().re;
        if (tr - 1.0).abs() > TOL_TRACE {
            return Err(domain(format!("state trace is {tr}, expected 1")));
        }
        let min_eig = eig_hermitian(&mat)?
            .values
            .last()
            .copied()
            .unwrap_or(0.0);
        if min_eig < -TOL_PSD {
            return Err(domain(format!("state has negative eigenvalue {min_eig:e}")));
        }
        Ok(Self { mat })
    }

    /// `|ψ⟩⟨ψ|/⟨ψ|ψ⟩`.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|z| z.norm_sqr()).sum();
        if psi.is_empty() || !(norm2 > 0.0) || !norm2.is_finite() {
            return Err(domain("pure state vector must be nonzero and finite"));
        }
        let scaled: Vec<C64> = psi.iter().map(|z| z / norm2.sqrt()).collect();
        Ok(Self {
            mat: ComplexMatrix::outer(&scaled),
        })
    }

    /// Computational basis projector `|k⟩⟨k|`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut diag = vec![0.0; dim];
        diag[k] = 1.0;
        Self {
            mat: ComplexMatrix::from_real_diag(&diag),
        }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            mat: ComplexMatrix::identity(dim).scale_real(1.0 / dim as f64),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.mat
    }

    /// Bloch vector of a qubit state.
    pub fn bloch(&self) -> Result<BlochVector> {
        if self.dim() != 2 {
            return Err(structural("Bloch vector requires a qubit state"));
        }
        let off = self.mat[(0, 1)];
        let x = 2.0 * off.re;
        let y = -2.0 * off.im;
        let z = self.mat[(0, 0)].re - self.mat[(1, 1)].re;
        Ok(BlochVector { x, y, z })
    }

    pub fn kron(&self, other: &Self) -> Self {
        Self {
            mat: self.mat.kron(&other.mat),
        }
    }

    pub(crate) fn from_matrix_unchecked(mat: ComplexMatrix) -> Self {
        Self { mat }
    }
}

impl TryFrom<ComplexMatrix> for DensityMatrix {
    type Error = Error;

    fn try_from(mat: ComplexMatrix) -> Result<Self> {
        Self::new(mat)
    }
}

impl From<DensityMatrix> for ComplexMatrix {
    fn from(d: DensityMatrix) -> Self {
        d.mat
    }
}

/// Qubit Bloch vector, norm at most one.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let b = Self { x, y, z };
        let n = b.norm();
        if !n.is_finite() || n > 1.0 + 1e-12 {
            return Err(domain(format!("Bloch vector norm {n} exceeds 1")));
        }
        Ok(b)
    }

    /// Unit vector from polar and azimuthal angles.
    pub fn from_angles(theta: f64, phi: f64) -> Self {
        Self {
            x: theta.sin() * phi.cos(),
            y: theta.sin() * phi.sin(),
            z: theta.cos(),
        }
    }

    pub fn norm(&self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn dot(&self, o: &Self) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn neg(&self) -> Self {
        Self {
            x: -self.x,
            y: -self.y,
            z: -self.z,
        }
    }

    /// Angle between two nonzero Bloch vectors.
    pub fn angle_to(&self, o: &Self) -> f64 {
        (self.dot(o) / (self.norm() * o.norm())).clamp(-1.0, 1.0).acos()
    }
}

/// `(I + b·σ)/2`.
pub fn bloch_to_density(b: BlochVector) -> Result<DensityMatrix> {
    let b = BlochVector::new(b.x, b.y, b.z)?;
    Ok(DensityMatrix::from_matrix_unchecked(pauli_combination(0.5, 0.5 * b.x, 0.5 * b.y, 0.5 * b.z)))
}

/// `a·I + x·σx + y·σy + z·σz`.
pub(crate) fn pauli_combination(a: f64, x: f64, y: f64, z: f64) -> ComplexMatrix {
    let mut m = ComplexMatrix::zeros(2);
    m[(0, 0)] = C64::new(a + z, 0.0);
    m[(1, 1)] = C64::new(a - z, 0.0);
    m[(0, 1)] = C64::new(x, -y);
    m[(1, 0)] = C64::new(x, y);
    m
}

/// A finite-outcome quantum measurement `{E_1, …, E_m}`.
///
/// Serialized as `{"dim": d, "elements": [...]}`; deserializing validates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PovmRepr", into = "PovmRepr")]
pub struct Povm {
    dim: usize,
    elements: Vec<ComplexMatrix>,
}

/// On-disk layout of a POVM, before validation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PovmRepr {
    pub dim: usize,
    pub elements: Vec<ComplexMatrix>,
}

impl PovmRepr {
    /// Elements, after checking they all match `dim`.
    pub fn checked_elements(self) -> Result<Vec<ComplexMatrix>> {
        if let Some(e) = self.elements.iter().find(|e| e.dim() != self.dim) {
            return Err(structural(format!(
                "element of dimension {} in a POVM declared on dimension {}",
                e.dim(),
                self.dim
            )));
        }
        Ok(self.elements)
    }
}

impl TryFrom<PovmRepr> for Povm {
    type Error = Error;

    fn try_from(r: PovmRepr) -> Result<Self> {
        Povm::new(r.checked_elements()?)
    }
}

impl From<Povm> for PovmRepr {
    fn from(p: Povm) -> Self {
        Self {
            dim: p.dim,
            elements: p.elements,
        }
    }
}

/// Per-element validation data.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ElementCheck {
    pub hermitian_deviation: f64,
    pub min_eigenvalue: f64,
    pub trace: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValidationReport {
    pub dim: usize,
    pub num_elements: usize,
    pub elements: Vec<ElementCheck>,
    /// `max_ij |(Σ_k E_k − I)_ij|`.
    pub completeness_residual: f64,
    /// Failed checks; empty iff the POVM is valid.
    pub issues: Vec<String>,
    /// Non-fatal observations such as zero elements.
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.issues.is_empty()
    }
}

/// Checks Hermiticity, positivity and completeness of candidate POVM elements.
///
/// Only a dimension mismatch (or an empty list) is an `Err`; everything else
/// is recorded in the report.
pub fn validate_povm(elements: &[ComplexMatrix]) -> Result<ValidationReport> {
    let Some(first) = elements.first() else {
        return Err(structural("POVM has no elements"));
    };
    let dim = first.dim();
    if let Some((k, e)) = elements.iter().enumerate().find(|(_, e)| e.dim() != dim) {
        return Err(structural(format!(
            "element {k} has dimension {} but element 0 has {dim}",
            e.dim()
        )));
    }
    let mut issues = Vec::new();
    let mut warnings = Vec::new();
    if elements.len() < 2 {
        issues.push(format!("a POVM needs at least 2 elements, got {}", elements.len()));
    }
    let mut checks = Vec::with_capacity(elements.len());
    let mut sum = ComplexMatrix::zeros(dim);
    for (k, e) in elements.iter().enumerate() {
        let herm = e.hermitian_deviation();
        let min_eig = if herm <= TOL_HERM {
            eig_hermitian(e)?.values.last().copied().unwrap_or(0.0)
        } else {
            f64::NAN
        };
        if herm > TOL_HERM {
            issues.push(format!("element {k} is not Hermitian (deviation {herm:e})"));
        } else if min_eig < -TOL_PSD {
            issues.push(format!("element {k} has negative eigenvalue {min_eig:e}"));
        }
        if e.max_abs() == 0.0 {
            warnings.push(format!("element {k} is zero; its outcome never occurs"));
        }
        checks.push(ElementCheck {
            hermitian_deviation: herm,
            min_eigenvalue: min_eig,
            trace: e.trace().re,
        });
        sum = sum.add(e);
    }
    let residual = sum.max_abs_diff(&ComplexMatrix::identity(dim));
    if residual > TOL_COMPLETE {
        issues.push(format!("elements do not sum to identity (residual {residual:e})"));
    }
    Ok(ValidationReport {
        dim,
        num_elements: elements.len(),
        elements: checks,
        completeness_residual: residual,
        issues,
        warnings,
    })
}

impl Povm {
    /// Validates and wraps the elements.
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        let report = validate_povm(&elements)?;
        if !report.is_valid() {
            return Err(domain(format!("invalid POVM: {}", report.issues.join("; "))));
        }
        Ok(Self {
            dim: report.dim,
            elements,
        })
    }

    /// POVM with diagonal elements, one slice of diagonal entries per element.
    pub fn diagonal(diags: &[Vec<f64>]) -> Result<Self> {
        Self::new(diags.iter().map(|d| ComplexMatrix::from_real_diag(d)).collect())
    }

    /// Two-element qubit POVM `{diag(p, q), diag(1−p, 1−q)}`.
    pub fn commuting_qubit(p: f64, q: f64) -> Result<Self> {
        Self::diagonal(&[vec![p, q], vec![1.0 - p, 1.0 - q]])
    }

    /// Projective measurement in the computational basis.
    pub fn computational(dim: usize) -> Self {
        let elements = (0..dim)
            .map(|k| DensityMatrix::basis(dim, k).into_matrix())
            .collect();
        Self { dim, elements }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    pub fn element(&self, k: usize) -> &ComplexMatrix {
        &self.elements[k]
    }

    pub fn validate(&self) -> ValidationReport {
        validate_povm(&self.elements).expect("constructed POVMs are structurally sound")
    }

    /// `Σ_{k ∈ a} E_k`.
    pub fn grouped(&self, mask: &[bool]) -> ComplexMatrix {
        let mut acc = ComplexMatrix::zeros(self.dim);
        for (e, _) in self.elements.iter().zip(mask).filter(|(_, &inc)| inc) {
            acc = acc.add(e);
        }
        acc
    }

    /// `U E_k U†` for every element.
    pub fn conjugated(&self, u: &ComplexMatrix) -> Self {
        Self {
            dim: self.dim,
            elements: self.elements.iter().map(|e| e.conjugate_by(u)).collect(),
        }
    }

    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self {
            dim: self.dim,
            elements: perm.iter().map(|&i| self.elements[i].clone()).collect(),
        }
    }

    /// True when every element is diagonal in the computational basis.
    pub fn is_diagonal(&self) -> bool {
        self.elements.iter().all(|e| {
            (0..self.dim).all(|i| (0..self.dim).all(|j| i == j || e[(i, j)].norm() <= TOL_HERM))
        })
    }
}

/// `E_{k_1} ⊗ … ⊗ E_{k_n}` for a 0-based outcome sequence.
pub fn sequence_operator(p: &Povm, seq: &[usize]) -> Result<ComplexMatrix> {
    if seq.is_empty() {
        return Err(structural("outcome sequence must be nonempty"));
    }
    if let Some(&k) = seq.iter().find(|&&k| k >= p.len()) {
        return Err(domain(format!("outcome {k} out of range for {} elements", p.len())));
    }
    check_product_dim(p.dim(), seq.len())?;
    let mut acc = p.element(seq[0]).clone();
    for &k in &seq[1..] {
        acc = acc.kron(p.element(k));
    }
    Ok(acc)
}

pub(crate) fn check_product_dim(d: usize, n: usize) -> Result<usize> {
    let total = (d as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > MAX_PRODUCT_DIM as u128 {
        return Err(Error::Resource {
            cap: "max_product_dim",
            detail: format!("{d}^{n} exceeds {MAX_PRODUCT_DIM}"),
        });
    }
    Ok(total as usize)
}
