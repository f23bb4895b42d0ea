//! Analytic benchmarks: the covariant qubit POVM, noisy Stern-Gerlach
//! detectors, two-outcome commuting qubit detectors, and bounds for mixtures
//! of two detectors.

use std::f64::consts::PI;

use serde::Serialize;

use crate::channel::{chernoff_raw, relative_entropy_raw};
use crate::error::{domain, structural, Error, Result};
use crate::optimizer::{coordinate_ascent, zeta_chernoff, SearchOptions};
use crate::state::{pauli_combination, BlochVector, Povm};

/// Unit-norm tolerance on discretization nodes.
pub const TOL_NODE_NORM: f64 = 1e-12;
/// Allowed mismatch between `ζ` and `−ln C` in [`mixing_bounds`].
pub const TOL_CONSISTENCY: f64 = 1e-9;

const GOLDEN_ANGLE: f64 = 2.399_963_229_728_653; // π(3 − √5)

/// `C_s = s(1−s)π / sin(sπ)` for the covariant qubit POVM at antipodal inputs,
/// with the removable endpoints set to 1.
pub fn covariant_c_s(s: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("s = {s} outside [0, 1]")));
    }
    if s == 0.0 || s == 1.0 {
        return Ok(1.0);
    }
    Ok(s * (1.0 - s) * PI / (s * PI).sin())
}

/// `M` Bloch directions closed under `n → −n`; measuring with elements
/// `(I + n_i·σ)/M` discretizes the covariant qubit POVM.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovariantDiscretization {
    nodes: Vec<BlochVector>,
}

impl CovariantDiscretization {
    /// Fibonacci lattice of `M/2` points on the upper hemisphere, starting at
    /// the pole, each followed by its antipode.
    pub fn new(m: usize) -> Result<Self> {
        if m < 2 || !m.is_multiple_of(2) {
            return Err(domain(format!("discretization size {m} must be even and at least 2")));
        }
        let half = m / 2;
        let mut nodes = Vec::with_capacity(m);
        for i in 0..half {
            let z = 1.0 - i as f64 / half as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let az = i as f64 * GOLDEN_ANGLE;
            let n = BlochVector {
                x: r * az.cos(),
                y: r * az.sin(),
                z,
            };
            nodes.push(n);
            nodes.push(n.neg());
        }
        Self::from_nodes(nodes)
    }

    pub fn from_nodes(nodes: Vec<BlochVector>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(structural("a discretization needs at least two nodes"));
        }
        if let Some(n) = nodes.iter().find(|n| (n.norm() - 1.0).abs() > TOL_NODE_NORM) {
            return Err(domain(format!("node {n:?} is not a unit vector")));
        }
        let disc = Self { nodes };
        let sum = disc.node_sum();
        if sum.norm() != 0.0 {
            return Err(structural(format!(
                "nodes sum to ({}, {}, {}), not zero",
                sum.x, sum.y, sum.z
            )));
        }
        Ok(disc)
    }

    pub fn nodes(&self) -> &[BlochVector] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_sum(&self) -> BlochVector {
        self.nodes.iter().fold(BlochVector { x: 0.0, y: 0.0, z: 0.0 }, |acc, n| BlochVector {
            x: acc.x + n.x,
            y: acc.y + n.y,
            z: acc.z + n.z,
        })
    }

    pub fn to_povm(&self) -> Result<Povm> {
        let m = self.nodes.len() as f64;
        Povm::new(
            self.nodes
                .iter()
                .map(|n| pauli_combination(1.0 / m, n.x / m, n.y / m, n.z / m))
                .collect(),
        )
    }

    /// `P_i` for the pure state with Bloch vector `dir`.
    fn probs(&self, dir: &BlochVector) -> Vec<f64> {
        let m = self.nodes.len() as f64;
        self.nodes
            .iter()
            .map(|n| ((1.0 + n.dot(dir)) / m).max(0.0))
            .collect()
    }
}

/// Best antipodal pair found for a discretization.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct CovariantOptimum {
    pub value: f64,
    /// Bloch vector of `ρ`; `σ` has the opposite one.
    pub direction: BlochVector,
    pub s_star: Option<f64>,
}

/// Chernoff exponent of the discretized covariant POVM, maximised over
/// antipodal pure pairs `(n, −n)`.
///
/// Node sets closed under inversion make `φ` symmetric about `s = 1/2`, so the
/// direction search uses the Bhattacharyya sum; the reported value is the exact
/// exponent at the winning direction.
pub fn covariant_zeta_numeric(disc: &CovariantDiscretization) -> Result<CovariantOptimum> {
    let sum = disc.node_sum();
    if sum.norm() != 0.0 {
        return Err(structural("discretization nodes do not sum to zero"));
    }
    let m = disc.len() as f64;
    let bhattacharyya = |x: &[f64]| {
        let dir = BlochVector::from_angles(x[0], x[1]);
        let total: f64 = disc
            .nodes
            .iter()
            .map(|n| {
                let c = n.dot(&dir);
                (1.0 - c * c).max(0.0).sqrt()
            })
            .sum();
        -(total / m).ln()
    };
    let seeds = [[0.0, 0.0], [PI / 2.0, 0.0], [PI / 2.0, PI / 2.0], [1.0, 1.0]];
    let bounds = [None, None];
    let mut best: Option<(f64, Vec<f64>)> = None;
    for seed in seeds {
        let (x, v) = coordinate_ascent(bhattacharyya, seed.to_vec(), &bounds, PI / 2.0, 1e-14);
        if best.as_ref().is_none_or(|b| v > b.0) {
            best = Some((v, x));
        }
        if v.is_infinite() {
            break;
        }
    }
    let (_, x) = best.expect("at least one seed");
    let direction = BlochVector::from_angles(x[0], x[1]);
    let exact = chernoff_raw(&disc.probs(&direction), &disc.probs(&direction.neg()));
    Ok(CovariantOptimum {
        value: exact.value,
        direction,
        s_star: exact.optimizer_s,
    })
}

/// Two-outcome detector `{(I ± r σ_z)/2}`.
pub fn noisy_sg_povm(r: f64) -> Result<Povm> {
    check_purity(r)?;
    Povm::new(vec![
        pauli_combination(0.5, 0.0, 0.0, 0.5 * r),
        pauli_combination(0.5, 0.0, 0.0, -0.5 * r),
    ])
}

/// `−½ ln(1 − r²)`.
pub fn noisy_sg_zeta(r: f64) -> Result<f64> {
    check_purity(r)?;
    if r == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok(-0.5 * (-r * r).ln_1p())
}

/// Purity `r = √(1 − e^{−2ζ})` of the noisy Stern-Gerlach detector with
/// exponent `ζ`.
pub fn equivalent_sg_purity(zeta: f64) -> Result<f64> {
    if !(zeta >= 0.0) {
        return Err(domain(format!("exponent {zeta} must be nonnegative")));
    }
    Ok((-(-2.0 * zeta).exp_m1()).sqrt().min(1.0))
}

fn check_purity(r: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&r) {
        return Err(domain(format!("purity r = {r} outside [0, 1]")));
    }
    Ok(())
}

fn check_commuting(p: f64, q: f64) -> Result<(f64, f64)> {
    for x in [p, q] {
        if !(x > 0.0 && x < 1.0) {
            return Err(domain(format!("click probability {x} outside (0, 1)")));
        }
    }
    if p == q {
        return Err(Error::Degenerate(p));
    }
    Ok(if p > q { (p, q) } else { (q, p) })
}

/// `γ = ln((1−q)/(1−p)) / [ln((1−q)/(1−p)) + ln(p/q)]`, the click frequency
/// at which both hypotheses are equally likely. Symmetric in `(p, q)`.
pub fn commuting_gamma(p: f64, q: f64) -> Result<f64> {
    let (p, q) = check_commuting(p, q)?;
    let a = ((1.0 - q) / (1.0 - p)).ln();
    let b = (p / q).ln();
    Ok(a / (a + b))
}

/// `D(γ‖p)` between binary distributions: the Chernoff exponent of the
/// detector with click probabilities `p` and `q` on its eigenbasis.
pub fn commuting_zeta(p: f64, q: f64) -> Result<f64> {
    let g = commuting_gamma(p, q)?;
    let (p, _) = check_commuting(p, q)?;
    Ok(relative_entropy_raw(&[g, 1.0 - g], &[p, 1.0 - p]))
}

/// `C = exp(−ζ_CB)` from the state-pair search.
pub fn c_functional(p: &Povm, opts: &SearchOptions) -> Result<f64> {
    Ok((-zeta_chernoff(p, opts)?.value).exp())
}

/// Bounds on an exponent of a mixed detector.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MixingBounds {
    pub lower: f64,
    pub upper: f64,
    pub p: f64,
}

fn check_weight(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(domain(format!("mixing weight {p} outside [0, 1]")));
    }
    Ok(())
}

/// Chernoff exponent of `p·E ⊕ (1−p)·G`:
/// `−ln min{p C_E + 1 − p, p + (1−p) C_G} ≤ ζ ≤ p ζ_E + (1−p) ζ_G`.
pub fn mixing_bounds(c_e: f64, c_g: f64, z_e: f64, z_g: f64, p: f64) -> Result<MixingBounds> {
    check_weight(p)?;
    for (c, z) in [(c_e, z_e), (c_g, z_g)] {
        if !(c > 0.0 && c <= 1.0) {
            return Err(domain(format!("C = {c} outside (0, 1]")));
        }
        if !((z + c.ln()).abs() <= TOL_CONSISTENCY) {
            return Err(domain(format!("ζ = {z} does not match −ln C = {}", -c.ln())));
        }
    }
    let lower = -(p * c_e + (1.0 - p)).min(p + (1.0 - p) * c_g).ln();
    Ok(MixingBounds {
        lower,
        upper: p * z_e + (1.0 - p) * z_g,
        p,
    })
}

/// Stein exponent of the mixture: `max{p ζ_E, (1−p) ζ_G} ≤ ζ ≤ p ζ_E + (1−p) ζ_G`.
pub fn stein_mixing_bounds(z_e: f64, z_g: f64, p: f64) -> Result<MixingBounds> {
    check_weight(p)?;
    if !(z_e >= 0.0 && z_g >= 0.0) {
        return Err(domain("Stein exponents must be nonnegative"));
    }
    Ok(MixingBounds {
        lower: (p * z_e).max((1.0 - p) * z_g),
        upper: p * z_e + (1.0 - p) * z_g,
        p,
    })
}

/// `p ζ_E + (1−p) ζ_G`; only this side is known for the Hoeffding exponent.
pub fn hoeffding_mixing_upper(z_e: f64, z_g: f64, p: f64) -> Result<f64> {
    check_weight(p)?;
    if !(z_e >= 0.0 && z_g >= 0.0) {
        return Err(domain("Hoeffding exponents must be nonnegative"));
    }
    Ok(p * z_e + (1.0 - p) * z_g)
}

/// Elements `p E_i` followed by `(1−p) G_j`.
pub fn mix_povms(e: &Povm, g: &Povm, p: f64) -> Result<Povm> {
    check_weight(p)?;
    if e.dim() != g.dim() {
        return Err(structural(format!(
            "cannot mix detectors on dimensions {} and {}",
            e.dim(),
            g.dim()
        )));
    }
    let mut els: Vec<_> = e.elements().iter().map(|x| x.scale_real(p)).collect();
    els.extend(g.elements().iter().map(|x| x.scale_real(1.0 - p)));
    Povm::new(els)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{chernoff_exponent, ClassicalDistribution};
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    // ½ ∫_{-1}^{1} (1+c)^s (1−c)^{1−s} dc, midpoint rule
    fn c_s_quadrature(s: f64) -> f64 {
        let n = 2_000_000;
        let h = 2.0 / n as f64;
        let total: f64 = (0..n)
            .map(|i| {
                let c = -1.0 + (i as f64 + 0.5) * h;
                (1.0 + c).powf(s) * (1.0 - c).powf(1.0 - s)
            })
            .sum();
        0.5 * total * h
    }

    #[test]
    fn c_s_examples() {
        assert_abs_diff_eq!(covariant_c_s(0.5).unwrap(), PI / 4.0, epsilon = 1e-15);
        assert_eq!(covariant_c_s(0.0).unwrap(), 1.0);
        assert_abs_diff_eq!(covariant_c_s(1e-9).unwrap(), 1.0, epsilon = 1e-8);
        let quarter = covariant_c_s(0.25).unwrap();
        assert_abs_diff_eq!(quarter, 3.0 / 16.0 * PI / (PI / 4.0).sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(quarter, c_s_quadrature(0.25), epsilon = 1e-8);
        assert_abs_diff_eq!(quarter, 0.8330, epsilon = 1e-4);
        assert!(covariant_c_s(1.5).is_err());
    }

    #[test]
    fn c_s_minimum_at_half() {
        let grid: Vec<f64> = (0..=1000).map(|i| covariant_c_s(i as f64 / 1000.0).unwrap()).collect();
        let (arg, min) = grid
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
        assert_eq!(arg, 500);
        assert_abs_diff_eq!(min, PI / 4.0, epsilon = 1e-15);
    }

    #[test]
    fn discretization_is_closed() {
        for m in [2, 10, 1000] {
            let d = CovariantDiscretization::new(m).unwrap();
            assert_eq!(d.len(), m);
            let s = d.node_sum();
            assert_eq!((s.x, s.y, s.z), (0.0, 0.0, 0.0));
            assert!(d.nodes().iter().all(|n| (n.norm() - 1.0).abs() <= 1e-12));
            assert!(d.to_povm().unwrap().validate().is_valid());
        }
        assert!(CovariantDiscretization::new(3).is_err());
        let lopsided = vec![BlochVector::from_angles(0.0, 0.0), BlochVector::from_angles(1.0, 0.0)];
        assert!(matches!(CovariantDiscretization::from_nodes(lopsided), Err(Error::Structural(_))));
    }

    #[test]
    fn covariant_numeric() {
        let two = covariant_zeta_numeric(&CovariantDiscretization::new(2).unwrap()).unwrap();
        assert!(two.value.is_infinite());
        let big = covariant_zeta_numeric(&CovariantDiscretization::new(10_000).unwrap()).unwrap();
        assert_abs_diff_eq!(big.value, (4.0 / PI).ln(), epsilon = 1e-3);
        assert_abs_diff_eq!(big.s_star.unwrap(), 0.5, epsilon = 1e-6);
    }

    #[test]
    fn covariant_converges_under_doubling() {
        let exact = (4.0 / PI).ln();
        let errs: Vec<f64> = [1_000, 2_000, 4_000, 8_000, 16_000, 32_000, 64_000, 100_000]
            .iter()
            .map(|&m| {
                let d = CovariantDiscretization::new(m).unwrap();
                (covariant_zeta_numeric(&d).unwrap().value - exact).abs()
            })
            .collect();
        assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
    }

    #[test]
    fn noisy_sg() {
        assert_eq!(noisy_sg_zeta(0.0).unwrap(), 0.0);
        assert!(noisy_sg_zeta(1.0).unwrap().is_infinite());
        let z = noisy_sg_zeta(0.62).unwrap();
        assert_abs_diff_eq!(z, 0.24263, epsilon = 1e-4);
        assert!((z / (4.0 / PI).ln() - 1.0).abs() < 5e-3);
        assert!(noisy_sg_zeta(1.1).is_err());
        assert!(noisy_sg_povm(-0.1).is_err());
    }

    #[test]
    fn purity_inverse() {
        assert_eq!(equivalent_sg_purity(0.0).unwrap(), 0.0);
        assert_abs_diff_eq!(equivalent_sg_purity((4.0 / PI).ln()).unwrap(), 0.62, epsilon = 1e-2);
        assert_eq!(equivalent_sg_purity(f64::INFINITY).unwrap(), 1.0);
        for z in [1e-6, 0.01, 0.3, 1.0, 2.0] {
            let r = equivalent_sg_purity(z).unwrap();
            assert_abs_diff_eq!(noisy_sg_zeta(r).unwrap(), z, epsilon = 1e-12 * z.max(1.0));
        }
    }

    fn binary_d(g: f64, p: f64) -> f64 {
        g * (g / p).ln() + (1.0 - g) * ((1.0 - g) / (1.0 - p)).ln()
    }

    // bisection on D(g‖p) − D(g‖q) over (q, p)
    fn gamma_root(p: f64, q: f64) -> f64 {
        let (mut lo, mut hi) = (q, p);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if binary_d(mid, p) - binary_d(mid, q) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    }

    #[test]
    fn gamma_examples() {
        let g = commuting_gamma(0.4, 0.2).unwrap();
        assert_abs_diff_eq!(g, 0.29330, epsilon = 1e-5);
        assert_abs_diff_eq!(g, gamma_root(0.4, 0.2), epsilon = 1e-12);
        assert_abs_diff_eq!(commuting_gamma(0.7, 0.3).unwrap(), 0.5, epsilon = 1e-15);
        assert!(matches!(commuting_gamma(0.3, 0.3), Err(Error::Degenerate(_))));
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let (a, b): (f64, f64) = (rng.random_range(0.001..0.999), rng.random_range(0.001..0.999));
            if a == b {
                continue;
            }
            let (p, q) = (a.max(b), a.min(b));
            let g = commuting_gamma(p, q).unwrap();
            assert!(q < g && g < p);
        }
    }

    #[test]
    fn commuting_zeta_matches_chernoff() {
        let bin = |x: f64| ClassicalDistribution::binary(x).unwrap();
        let z = commuting_zeta(0.4, 0.2).unwrap();
        assert_abs_diff_eq!(z, 0.0246661, epsilon = 1e-7);
        // dense grid oracle
        let grid = (0..=100_000)
            .map(|i| {
                let s = i as f64 / 100_000.0;
                -(0.4f64.powf(s) * 0.2f64.powf(1.0 - s) + 0.6f64.powf(s) * 0.8f64.powf(1.0 - s)).ln()
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert_abs_diff_eq!(z, grid, epsilon = 1e-9);
        assert_abs_diff_eq!(
            commuting_zeta(0.8, 0.2).unwrap(),
            chernoff_exponent(&bin(0.8), &bin(0.2)).unwrap().value,
            epsilon = 1e-9
        );
        assert!(commuting_zeta(0.2 + 1e-6, 0.2).unwrap() < 1e-10);
    }

    #[test]
    fn mixing_examples() {
        let b = mixing_bounds(0.9, 0.7, -(0.9f64.ln()), -(0.7f64.ln()), 1.0).unwrap();
        assert_abs_diff_eq!(b.lower, -(0.9f64.ln()), epsilon = 1e-15);
        assert_abs_diff_eq!(b.upper, -(0.9f64.ln()), epsilon = 1e-15);
        let b0 = mixing_bounds(0.9, 0.7, -(0.9f64.ln()), -(0.7f64.ln()), 0.0).unwrap();
        assert_abs_diff_eq!(b0.lower, -(0.7f64.ln()), epsilon = 1e-15);
        assert_abs_diff_eq!(b0.upper, -(0.7f64.ln()), epsilon = 1e-15);
        assert!(mixing_bounds(0.9, 0.7, 0.5, -(0.7f64.ln()), 0.5).is_err());
        assert!(mixing_bounds(0.0, 0.7, 0.5, -(0.7f64.ln()), 0.5).is_err());
    }

    #[test]
    fn mixed_povm_shape() {
        let e = Povm::commuting_qubit(0.4, 0.2).unwrap();
        let g = Povm::commuting_qubit(0.3, 0.1).unwrap();
        let mixed = mix_povms(&e, &g, 0.5).unwrap();
        assert_eq!(mixed.len(), 4);
        assert!(mixed.validate().is_valid());
        assert!(mix_povms(&e, &Povm::computational(3), 0.5).is_err());
    }

    #[test]
    fn c_functional_examples() {
        let opts = SearchOptions {
            restarts: 4,
            ..SearchOptions::default()
        };
        let useless = Povm::diagonal(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(c_functional(&useless, &opts).unwrap(), 1.0);
        let r = 0.5;
        assert_abs_diff_eq!(
            c_functional(&noisy_sg_povm(r).unwrap(), &opts).unwrap(),
            (1.0 - r * r).sqrt(),
            epsilon = 1e-9
        );
    }
}
