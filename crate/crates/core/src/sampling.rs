//! Random states, unitaries and POVMs for search restarts and tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{inverse_sqrt_psd, ComplexMatrix, C64};
use crate::state::{DensityMatrix, Povm};

fn gaussian<R: Rng + ?Sized>(rng: &mut R) -> C64 {
    C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Unit vector drawn from the unitarily invariant measure on `C^d`.
pub fn random_pure_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<C64> {
    loop {
        let v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-12 {
            return v.into_iter().map(|z| z / n).collect();
        }
    }
}

pub fn random_pure_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    DensityMatrix::from_pure(&random_pure_vector(d, rng)).expect("unit vector")
}

/// Haar-distributed unitary: Gram–Schmidt on a complex Ginibre matrix.
pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let mut cols: Vec<Vec<C64>> = Vec::with_capacity(d);
    while cols.len() < d {
        let mut v: Vec<C64> = (0..d).map(|_| gaussian(rng)).collect();
        for c in &cols {
            let proj: C64 = c.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ci) in v.iter_mut().zip(c) {
                *vi -= proj * ci;
            }
        }
        let n: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n > 1e-8 {
            cols.push(v.into_iter().map(|z| z / n).collect());
        }
    }
    let mut u = ComplexMatrix::zeros(d);
    for (j, c) in cols.iter().enumerate() {
        for (i, z) in c.iter().enumerate() {
            u[(i, j)] = *z;
        }
    }
    u
}

/// Random `m`-element POVM: `E_k = S^{-1/2} A_k S^{-1/2}` with `A_k = G_k G_k†`
/// and `S = Σ A_k`.
pub fn random_povm<R: Rng + ?Sized>(d: usize, m: usize, rng: &mut R) -> Povm {
    let raw: Vec<ComplexMatrix> = (0..m)
        .map(|_| {
            let mut g = ComplexMatrix::zeros(d);
            for i in 0..d {
                for j in 0..d {
                    g[(i, j)] = gaussian(rng);
                }
            }
            g.matmul(&g.adjoint())
        })
        .collect();
    let mut s = ComplexMatrix::zeros(d);
    for a in &raw {
        s = s.add(a);
    }
    let w = inverse_sqrt_psd(&s).expect("sum of Wishart matrices is positive definite");
    let elements: Vec<ComplexMatrix> = raw
        .iter()
        .map(|a| {
            let e = w.matmul(a).matmul(&w);
            // drop the anti-Hermitian round-off
            e.add(&e.adjoint()).scale_real(0.5)
        })
        .collect();
    Povm::new(elements).expect("normalised Wishart POVM is valid")
}

/// Random two-element diagonal qubit POVM `{diag(p, q), diag(1−p, 1−q)}`.
pub fn random_diagonal_qubit_povm<R: Rng + ?Sized>(rng: &mut R) -> Povm {
    let p: f64 = rng.random_range(0.01..0.99);
    let q: f64 = rng.random_range(0.01..0.99);
    Povm::commuting_qubit(p, q).expect("entries in (0, 1)")
}
