//! Optimisation over input state pairs `(ρ, σ)` for a fixed detector.
//!
//! The single-shot minimum error has a closed form through the spread of the
//! grouped elements `E^a`. The asymptotic exponents need a search: every
//! exponent here is jointly convex in `(P, P̄)`, so the maximum over pairs sits
//! on pure states, and the search runs over pure pairs by default.
//!
//! Search stages, in this order:
//! 1. orthogonal pairs of eigenvectors of the grouped elements (on large
//!    detectors only those ranking best under a cheap bound),
//! 2. coordinate-wise golden-section refinement of the best stage-1 pair and
//!    of `restarts` random pure pairs (seeded, one RNG stream per restart),
//! 3. optionally, the same refinement over mixed states.
//!
//! Candidates are compared in that order with a strict `>`, so parallel and
//! serial runs select the same optimum.

use std::collections::HashSet;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::{chernoff_raw, hoeffding_raw, relative_entropy_raw, ExponentValue, LogPair};
use crate::error::{domain, Error, Result};
use crate::grouping::GroupingMask;
use crate::linalg::{eig_hermitian, ComplexMatrix, C64};
use crate::sampling::random_pure_vector;
use crate::scalar::golden_section;
use crate::state::{DensityMatrix, Povm};

/// Largest outcome count for the exhaustive single-shot grouping scan.
pub const MAX_SINGLE_SHOT_OUTCOMES: usize = 24;
/// Above this outcome count the eigenpair stage uses single elements only.
pub const MAX_ENUMERATED_GROUPINGS_OUTCOMES: usize = 12;

/// Above `pairs × outcomes` of this size the eigenpair stage is screened.
const SCREEN_WORK: usize = 1 << 16;
const SCREEN_KEEP: usize = 16;
const MAX_SWEEPS: usize = 200;
const COORD_XTOL: f64 = 1e-9;
const MIN_WINDOW: f64 = 1e-7;

/// Knobs for the state-pair search.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOptions {
    pub restarts: usize,
    pub seed: u64,
    /// Also refine over mixed states after the pure-state search.
    pub mixed: bool,
    /// Stop a refinement once a full sweep gains less than this.
    pub tol: f64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self {
            restarts: 64,
            seed: 0,
            mixed: false,
            tol: 1e-10,
        }
    }
}

/// Exponent maximised over state pairs.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum Objective {
    Chernoff,
    Stein,
    Hoeffding { rate: f64 },
}

impl Objective {
    /// Exact exponent of one distribution pair.
    pub fn evaluate(&self, p: &[f64], q: &[f64]) -> ExponentValue {
        match *self {
            Objective::Chernoff => chernoff_raw(p, q),
            Objective::Stein => ExponentValue {
                value: relative_entropy_raw(p, q),
                optimizer_s: None,
            },
            Objective::Hoeffding { rate } => hoeffding_raw(p, q, rate),
        }
    }

    fn swap_symmetric(&self) -> bool {
        matches!(self, Objective::Chernoff)
    }

    /// Whether `s` is searched jointly with the state coordinates.
    fn joint_s(&self) -> bool {
        matches!(self, Objective::Chernoff)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StatePair {
    pub rho: DensityMatrix,
    pub sigma: DensityMatrix,
}

impl StatePair {
    pub fn new(rho: DensityMatrix, sigma: DensityMatrix) -> Result<Self> {
        if rho.dim() != sigma.dim() {
            return Err(Error::Structural(format!(
                "pair dimensions differ: {} vs {}",
                rho.dim(),
                sigma.dim()
            )));
        }
        Ok(Self { rho, sigma })
    }
}

/// Outcome of a discrimination-power computation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerReport {
    pub value: f64,
    pub optimizer: StatePair,
    /// Optimal grouping `a` (single-shot only).
    pub grouping: Option<GroupingMask>,
    pub s_star: Option<f64>,
    pub restarts_used: usize,
    /// Best value over orthogonal eigenvector pairs alone (exponents only).
    pub orthogonal_value: Option<f64>,
}

/// `p*_err = 1/2 − max_a (λ^a_max − λ^a_min)/2`.
///
/// Groupings fix the last outcome in `ā`, which visits every unordered
/// partition once; the empty set is skipped. Ties keep the first grouping.
pub fn single_shot_power(p: &Povm) -> Result<PowerReport> {
    let m = p.len();
    if m > MAX_SINGLE_SHOT_OUTCOMES {
        return Err(Error::Resource {
            cap: "max_single_shot_outcomes",
            detail: format!(
                "{m} outcomes means 2^{} groupings; use the exponent search heuristics instead",
                m - 1
            ),
        });
    }
    let mut best: Option<(f64, u64, Vec<C64>, Vec<C64>)> = None;
    for word in 1u64..(1u64 << (m - 1)) {
        let mask = GroupingMask::from_word(m, word);
        let ea = p.grouped(mask.bits());
        let eig = eig_hermitian(&ea)?;
        let spread = eig.values[0] - eig.values[eig.values.len() - 1];
        if best.as_ref().is_none_or(|b| spread > b.0) {
            let top = eig.vector(0);
            let bottom = eig.vector(eig.values.len() - 1);
            best = Some((spread, word, top, bottom));
        }
    }
    let (spread, word, top, bottom) = best.expect("a POVM has at least two outcomes");
    Ok(PowerReport {
        value: (0.5 - 0.5 * spread).clamp(0.0, 0.5),
        optimizer: StatePair {
            rho: DensityMatrix::from_pure(&top)?,
            sigma: DensityMatrix::from_pure(&bottom)?,
        },
        grouping: Some(GroupingMask::from_word(m, word)),
        s_star: None,
        restarts_used: 0,
        orthogonal_value: None,
    })
}

/// Dual Chernoff exponent `max_{(ρ,σ)} −min_s φ(s|P‖P̄)`.
pub fn zeta_chernoff(p: &Povm, opts: &SearchOptions) -> Result<PowerReport> {
    optimize_state_pair(Objective::Chernoff, p, opts)
}

/// Dual Stein exponent `max_{(ρ,σ)} D(P‖P̄)`.
pub fn zeta_stein(p: &Povm, opts: &SearchOptions) -> Result<PowerReport> {
    optimize_state_pair(Objective::Stein, p, opts)
}

/// Dual Hoeffding exponent at rate `r`.
pub fn zeta_hoeffding(p: &Povm, r: f64, opts: &SearchOptions) -> Result<PowerReport> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain(format!("rate r = {r} must be finite and nonnegative")));
    }
    optimize_state_pair(Objective::Hoeffding { rate: r }, p, opts)
}

#[derive(Clone, Debug)]
struct Candidate {
    rho: StateParams,
    sigma: StateParams,
    value: ExponentValue,
}

#[derive(Clone, Debug)]
enum StateParams {
    Pure(Vec<C64>),
    Mixed(ComplexMatrix),
}

impl StateParams {
    fn probs(&self, p: &Povm) -> Vec<f64> {
        match self {
            StateParams::Pure(v) => p.elements().iter().map(|e| e.expectation(v).max(0.0)).collect(),
            StateParams::Mixed(rho) => p
                .elements()
                .iter()
                .map(|e| e.trace_product_re(rho).max(0.0))
                .collect(),
        }
    }

    fn to_density(&self) -> Result<DensityMatrix> {
        match self {
            StateParams::Pure(v) => DensityMatrix::from_pure(v),
            StateParams::Mixed(rho) => Ok(DensityMatrix::from_matrix_unchecked(rho.clone())),
        }
    }
}

/// Maximises `objective` over state pairs; see the module docs for the stages.
pub fn optimize_state_pair(objective: Objective, p: &Povm, opts: &SearchOptions) -> Result<PowerReport> {
    let d = p.dim();
    let eval = |rho: &StateParams, sigma: &StateParams| objective.evaluate(&rho.probs(p), &sigma.probs(p));

    // stage 1: orthogonal eigenvector pairs
    let pairs = eigen_pairs(p, objective.swap_symmetric())?;
    let mut best: Option<Candidate> = None;
    for idx in screened(objective, p, &pairs) {
        let (a, b) = &pairs[idx];
        let (rho, sigma) = (StateParams::Pure(a.clone()), StateParams::Pure(b.clone()));
        let value = eval(&rho, &sigma);
        if best.as_ref().is_none_or(|c| value.value > c.value.value) {
            let done = value.is_infinite();
            best = Some(Candidate { rho, sigma, value });
            if done {
                break;
            }
        }
    }
    let mut best = best.expect("every POVM yields at least one eigenvector pair");
    let orthogonal_value = best.value.value;
    let mut restarts_used = 0;

    if !best.value.is_infinite() {
        // stage 2: refine the eigenpair winner, then random restarts
        let seeded = match (&best.rho, &best.sigma) {
            (StateParams::Pure(a), StateParams::Pure(b)) => refine_pure(objective, p, a, b, opts.tol),
            _ => unreachable!("stage 1 only produces pure pairs"),
        };
        consider(&mut best, seeded);

        let restarts: Vec<Candidate> = (0..opts.restarts)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
                rng.set_stream(i as u64 + 1);
                let a = random_pure_vector(d, &mut rng);
                let b = random_pure_vector(d, &mut rng);
                refine_pure(objective, p, &a, &b, opts.tol)
            })
            .collect();
        restarts_used = restarts.len();
        for c in restarts {
            if best.value.is_infinite() {
                break;
            }
            consider(&mut best, c);
        }

        // stage 3
        if opts.mixed && !best.value.is_infinite() {
            let refined = refine_mixed(objective, p, &best, opts.tol);
            consider(&mut best, refined);
        }
    }

    Ok(PowerReport {
        value: best.value.value,
        optimizer: StatePair {
            rho: best.rho.to_density()?,
            sigma: best.sigma.to_density()?,
        },
        grouping: None,
        s_star: best.value.optimizer_s,
        restarts_used,
        orthogonal_value: Some(orthogonal_value),
    })
}

/// Indices of the eigenpairs that get an exact evaluation, in their original
/// order. Large detectors rank pairs by a cheap lower bound on the objective
/// and keep the best `SCREEN_KEEP`.
fn screened(objective: Objective, p: &Povm, pairs: &[(Vec<C64>, Vec<C64>)]) -> Vec<usize> {
    if pairs.len() * p.len() <= SCREEN_WORK {
        return (0..pairs.len()).collect();
    }
    let scores: Vec<f64> = pairs
        .par_iter()
        .map(|(a, b)| {
            let pa = StateParams::Pure(a.clone()).probs(p);
            let pb = StateParams::Pure(b.clone()).probs(p);
            let lp = LogPair::new(&pa, &pb);
            let half = if lp.disjoint() { f64::NEG_INFINITY } else { lp.phi(0.5) };
            match objective {
                Objective::Chernoff => -half,
                Objective::Stein => relative_entropy_raw(&pa, &pb),
                Objective::Hoeffding { rate } => -rate - 2.0 * half,
            }
        })
        .collect();
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_by(|&i, &j| scores[j].total_cmp(&scores[i]).then(i.cmp(&j)));
    order.truncate(SCREEN_KEEP);
    order.sort_unstable();
    order
}

fn consider(best: &mut Candidate, c: Candidate) {
    if c.value.value > best.value.value {
        *best = c;
    }
}

/// Ordered (or, for swap-symmetric objectives, unordered) pairs of distinct
/// eigenvectors of every grouped element, deduplicated by projector.
fn eigen_pairs(p: &Povm, symmetric: bool) -> Result<Vec<(Vec<C64>, Vec<C64>)>> {
    let m = p.len();
    let masks: Vec<GroupingMask> = if m <= MAX_ENUMERATED_GROUPINGS_OUTCOMES {
        (1u64..(1u64 << (m - 1)))
            .map(|w| GroupingMask::from_word(m, w))
            .collect()
    } else {
        (0..m).map(|k| GroupingMask::from_members(m, &[k])).collect()
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for mask in masks {
        let eig = eig_hermitian(&p.grouped(mask.bits()))?;
        let d = eig.values.len();
        let vecs: Vec<Vec<C64>> = (0..d).map(|k| eig.vector(k)).collect();
        let keys: Vec<Vec<i64>> = vecs.iter().map(|v| projector_key(v)).collect();
        for i in 0..d {
            for j in 0..d {
                if i == j {
                    continue;
                }
                let key = if symmetric && keys[j] < keys[i] {
                    (keys[j].clone(), keys[i].clone())
                } else {
                    (keys[i].clone(), keys[j].clone())
                };
                if seen.insert(key) {
                    out.push((vecs[i].clone(), vecs[j].clone()));
                }
            }
        }
    }
    Ok(out)
}

fn projector_key(v: &[C64]) -> Vec<i64> {
    let proj = ComplexMatrix::outer(v);
    proj.data()
        .iter()
        .flat_map(|z| [(z.re * 1e9).round() as i64, (z.im * 1e9).round() as i64])
        .collect()
}

/// Hyperspherical magnitudes plus relative phases: `2d − 2` reals.
fn pure_from_params(d: usize, x: &[f64]) -> Vec<C64> {
    let (angles, phases) = x.split_at(d - 1);
    let mut out = Vec::with_capacity(d);
    let mut tail = 1.0;
    for k in 0..d {
        let r = if k + 1 < d { tail * angles[k].cos() } else { tail };
        if k + 1 < d {
            tail *= angles[k].sin();
        }
        let ph = if k == 0 { 0.0 } else { phases[k - 1] };
        out.push(C64::from_polar(r, ph));
    }
    out
}

fn params_from_pure(v: &[C64]) -> Vec<f64> {
    let d = v.len();
    let mags: Vec<f64> = v.iter().map(|z| z.norm()).collect();
    let mut x = Vec::with_capacity(2 * d - 2);
    for k in 0..d - 1 {
        let tail: f64 = mags[k + 1..].iter().map(|m| m * m).sum::<f64>().sqrt();
        x.push(tail.atan2(mags[k]));
    }
    let ref_phase = v[0].arg();
    for z in &v[1..] {
        x.push(z.arg() - ref_phase);
    }
    x
}

/// Coordinate-wise golden-section ascent.
///
/// Each coordinate is searched on a window around its current value; the
/// window tracks the last accepted step. `bounds[k] = None` means the
/// coordinate is periodic or unconstrained.
pub(crate) fn coordinate_ascent<F: FnMut(&[f64]) -> f64>(
    mut f: F,
    mut x: Vec<f64>,
    bounds: &[Option<(f64, f64)>],
    initial_window: f64,
    tol: f64,
) -> (Vec<f64>, f64) {
    let mut fx = f(&x);
    let mut windows: Vec<f64> = bounds
        .iter()
        .map(|b| b.map_or(initial_window, |(lo, hi)| hi - lo))
        .collect();
    for _ in 0..MAX_SWEEPS {
        if fx.is_infinite() {
            break;
        }
        let before = fx;
        for k in 0..x.len() {
            let (mut lo, mut hi) = (x[k] - windows[k], x[k] + windows[k]);
            if let Some((blo, bhi)) = bounds[k] {
                lo = lo.max(blo);
                hi = hi.min(bhi);
            }
            let mut trial = x.clone();
            let m = golden_section(
                |t| {
                    trial[k] = t;
                    -f(&trial)
                },
                lo,
                hi,
                COORD_XTOL,
            );
            let cap = bounds[k].map_or(initial_window, |(blo, bhi)| bhi - blo);
            if -m.value > fx {
                let step = (m.x - x[k]).abs();
                x[k] = m.x;
                fx = -m.value;
                windows[k] = (4.0 * step).clamp(MIN_WINDOW, cap);
            } else {
                windows[k] = (0.25 * windows[k]).max(MIN_WINDOW);
            }
            if fx.is_infinite() {
                break;
            }
        }
        if fx - before <= tol * fx.abs().max(1.0) && windows.iter().all(|&w| w <= 1e-3) {
            break;
        }
    }
    (x, fx)
}

/// Surrogate maximised during refinement: for Chernoff the parameter `s` is
/// an extra coordinate (both maximisations commute), otherwise the exact
/// exponent.
fn surrogate(objective: Objective, p: &[f64], q: &[f64], s: Option<f64>) -> f64 {
    match (objective, s) {
        (Objective::Chernoff, Some(s)) => {
            let lp = LogPair::new(p, q);
            if lp.disjoint() {
                f64::INFINITY
            } else {
                -lp.phi(s)
            }
        }
        _ => objective.evaluate(p, q).value,
    }
}

fn refine_pure(objective: Objective, p: &Povm, a: &[C64], b: &[C64], tol: f64) -> Candidate {
    let d = p.dim();
    let np = 2 * d - 2;
    let mut x0 = params_from_pure(a);
    x0.extend(params_from_pure(b));
    let mut bounds = vec![None; 2 * np];
    if objective.joint_s() {
        x0.push(0.5);
        bounds.push(Some((0.0, 1.0)));
    }
    let probs = |x: &[f64]| {
        let va = pure_from_params(d, &x[..np]);
        let vb = pure_from_params(d, &x[np..2 * np]);
        (
            StateParams::Pure(va).probs(p),
            StateParams::Pure(vb).probs(p),
        )
    };
    let (x, _) = coordinate_ascent(
        |x| {
            let (pa, pb) = probs(x);
            surrogate(objective, &pa, &pb, x.get(2 * np).copied())
        },
        x0,
        &bounds,
        std::f64::consts::FRAC_PI_2,
        tol,
    );
    let rho = StateParams::Pure(pure_from_params(d, &x[..np]));
    let sigma = StateParams::Pure(pure_from_params(d, &x[np..2 * np]));
    let value = objective.evaluate(&rho.probs(p), &sigma.probs(p));
    Candidate { rho, sigma, value }
}

/// `ρ = A A†/tr(A A†)` with `A` a free complex matrix.
fn mixed_from_params(d: usize, x: &[f64]) -> ComplexMatrix {
    let mut a = ComplexMatrix::zeros(d);
    for i in 0..d {
        for j in 0..d {
            let k = 2 * (i * d + j);
            a[(i, j)] = C64::new(x[k], x[k + 1]);
        }
    }
    let rho = a.matmul(&a.adjoint());
    let tr = rho.trace().re;
    rho.scale_real(1.0 / tr)
}

fn mixed_seed(state: &StateParams, d: usize) -> Vec<f64> {
    let mut x = vec![0.0; 2 * d * d];
    match state {
        StateParams::Pure(v) => {
            for i in 0..d {
                x[2 * (i * d)] = v[i].re;
                x[2 * (i * d) + 1] = v[i].im;
            }
        }
        StateParams::Mixed(_) => unreachable!("mixed refinement starts from a pure pair"),
    }
    // a little weight on the other columns so the rank can grow
    for (k, xi) in x.iter_mut().enumerate() {
        if *xi == 0.0 {
            *xi = 1e-3 * ((k % 7) as f64 - 3.0);
        }
    }
    x
}

fn refine_mixed(objective: Objective, p: &Povm, start: &Candidate, tol: f64) -> Candidate {
    let d = p.dim();
    let np = 2 * d * d;
    let mut x0 = mixed_seed(&start.rho, d);
    x0.extend(mixed_seed(&start.sigma, d));
    let mut bounds = vec![None; 2 * np];
    if objective.joint_s() {
        x0.push(start.value.optimizer_s.unwrap_or(0.5));
        bounds.push(Some((0.0, 1.0)));
    }
    let (x, _) = coordinate_ascent(
        |x| {
            let pa = StateParams::Mixed(mixed_from_params(d, &x[..np])).probs(p);
            let pb = StateParams::Mixed(mixed_from_params(d, &x[np..2 * np])).probs(p);
            surrogate(objective, &pa, &pb, x.get(2 * np).copied())
        },
        x0,
        &bounds,
        0.5,
        tol,
    );
    let rho = StateParams::Mixed(mixed_from_params(d, &x[..np]));
    let sigma = StateParams::Mixed(mixed_from_params(d, &x[np..2 * np]));
    let value = objective.evaluate(&rho.probs(p), &sigma.probs(p));
    Candidate { rho, sigma, value }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{chernoff_exponent, induced_distribution, relative_entropy};
    use crate::sampling::random_povm;
    use approx::assert_abs_diff_eq;

    fn diag_povm() -> Povm {
        Povm::commuting_qubit(0.4, 0.2).unwrap()
    }

    fn quick() -> SearchOptions {
        SearchOptions {
            restarts: 8,
            ..SearchOptions::default()
        }
    }

    #[test]
    fn param_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for d in 2..5 {
            let v = random_pure_vector(d, &mut rng);
            let w = pure_from_params(d, &params_from_pure(&v));
            let overlap: C64 = v.iter().zip(&w).map(|(a, b)| a.conj() * b).sum();
            assert_abs_diff_eq!(overlap.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn single_shot_examples() {
        let r = single_shot_power(&diag_povm()).unwrap();
        assert_abs_diff_eq!(r.value, 0.4, epsilon = 1e-15);
        assert_eq!(r.grouping.unwrap().members(), vec![0]);
        assert_abs_diff_eq!(r.optimizer.rho.matrix()[(0, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r.optimizer.sigma.matrix()[(1, 1)].re, 1.0, epsilon = 1e-15);

        assert_eq!(single_shot_power(&Povm::computational(2)).unwrap().value, 0.0);
        let useless = Povm::diagonal(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(single_shot_power(&useless).unwrap().value, 0.5);
    }

    // 10^4-point grid over Bloch pairs on the xz great circle, minimising the
    // grouping objective directly
    #[test]
    fn single_shot_matches_bloch_grid() {
        let povm = diag_povm();
        let mut best = f64::INFINITY;
        for i in 0..100 {
            for j in 0..100 {
                let t1 = std::f64::consts::PI * i as f64 / 99.0;
                let t2 = std::f64::consts::PI * j as f64 / 99.0;
                let rho = crate::state::bloch_to_density(crate::state::BlochVector::from_angles(t1, 0.0)).unwrap();
                let sig = crate::state::bloch_to_density(crate::state::BlochVector::from_angles(t2, 0.0)).unwrap();
                let a = povm.element(0).trace_product_re(&sig.matrix().sub(rho.matrix()));
                let b = povm.element(1).trace_product_re(&sig.matrix().sub(rho.matrix()));
                best = best.min(0.5 * (1.0 + a.min(b).min(0.0)));
            }
        }
        assert_abs_diff_eq!(single_shot_power(&povm).unwrap().value, best, epsilon = 1e-12);
    }

    #[test]
    fn too_many_outcomes() {
        let els: Vec<ComplexMatrix> = (0..25)
            .map(|_| ComplexMatrix::from_real_diag(&[1.0 / 25.0, 1.0 / 25.0]))
            .collect();
        let p = Povm::new(els).unwrap();
        assert!(matches!(single_shot_power(&p), Err(Error::Resource { .. })));
    }

    #[test]
    fn chernoff_on_diag_povm() {
        let r = zeta_chernoff(&diag_povm(), &quick()).unwrap();
        let oracle = chernoff_exponent(
            &induced_distribution(&diag_povm(), &DensityMatrix::basis(2, 0)).unwrap(),
            &induced_distribution(&diag_povm(), &DensityMatrix::basis(2, 1)).unwrap(),
        )
        .unwrap();
        assert_abs_diff_eq!(r.value, oracle.value, epsilon = 1e-9);
        assert_abs_diff_eq!(r.orthogonal_value.unwrap(), oracle.value, epsilon = 1e-12);
        // optimal pair is the computational basis, in either order
        let z_rho = r.optimizer.rho.bloch().unwrap().z;
        let z_sig = r.optimizer.sigma.bloch().unwrap().z;
        assert_abs_diff_eq!(z_rho * z_sig, -1.0, epsilon = 1e-6);
    }

    #[test]
    fn stein_on_diag_povm() {
        let r = zeta_stein(&diag_povm(), &quick()).unwrap();
        let p0 = induced_distribution(&diag_povm(), &DensityMatrix::basis(2, 0)).unwrap();
        let p1 = induced_distribution(&diag_povm(), &DensityMatrix::basis(2, 1)).unwrap();
        assert_abs_diff_eq!(r.value, relative_entropy(&p0, &p1).unwrap(), epsilon = 1e-9);
    }

    #[test]
    fn useless_and_projective() {
        let useless = Povm::diagonal(&[vec![0.5, 0.5], vec![0.5, 0.5]]).unwrap();
        assert_eq!(zeta_stein(&useless, &quick()).unwrap().value, 0.0);
        assert_eq!(zeta_hoeffding(&useless, 0.3, &quick()).unwrap().value, 0.0);
        assert_eq!(zeta_chernoff(&useless, &quick()).unwrap().value, 0.0);
        let proj = Povm::computational(2);
        let c = zeta_chernoff(&proj, &quick()).unwrap();
        assert!(c.value.is_infinite());
        assert_eq!(c.restarts_used, 0);
        assert!(zeta_stein(&proj, &quick()).unwrap().value.is_infinite());
    }

    #[test]
    fn hoeffding_limits() {
        let p = diag_povm();
        let stein = zeta_stein(&p, &quick()).unwrap().value;
        let h0 = zeta_hoeffding(&p, 0.0, &quick()).unwrap().value;
        assert_abs_diff_eq!(h0, stein, epsilon = 1e-6);
        let h = zeta_hoeffding(&p, 0.2, &quick()).unwrap().value;
        assert!((0.0..=stein + 1e-12).contains(&h));
        assert!(zeta_hoeffding(&p, -0.1, &quick()).is_err());
    }

    #[test]
    fn deterministic_given_seed() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = random_povm(2, 3, &mut rng);
        let a = zeta_chernoff(&p, &quick()).unwrap();
        let b = zeta_chernoff(&p, &quick()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn mixed_refinement_never_loses() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = random_povm(2, 3, &mut rng);
        let pure = zeta_chernoff(&p, &quick()).unwrap();
        let mixed = zeta_chernoff(&p, &SearchOptions { mixed: true, ..quick() }).unwrap();
        assert!(mixed.value >= pure.value);
        assert!(mixed.value - pure.value < 1e-8);
    }
}
