//! Classical distributions induced by measuring a state, and the exponent
//! functionals evaluated on pairs of them.
//!
//! All logarithms are natural, so exponents are in nats.

use serde::{Deserialize, Serialize};

use crate::error::{domain, structural, Result};
use crate::scalar::{golden_section, grid_scan};
use crate::state::{DensityMatrix, Povm};

/// Tolerance on the total mass of a distribution.
pub const TOL_SUM: f64 = 1e-9;
/// Entries above `-NEG_CLAMP` are clamped to zero; anything lower is rejected.
pub const NEG_CLAMP: f64 = 1e-12;
/// Golden-section stopping width on the Chernoff parameter `s`.
pub const S_TOL: f64 = 1e-12;

const CONVEXITY_PROBES: usize = 21;
const FALLBACK_GRID: usize = 10_000;
const ROUNDING_FLOOR: f64 = 1e-14;

/// Probability vector over measurement outcomes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassicalDistribution {
    probs: Vec<f64>,
}

impl ClassicalDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(structural("distribution must be nonempty"));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < -NEG_CLAMP) {
            return Err(domain("probabilities must be finite and nonnegative"));
        }
        let probs: Vec<f64> = probs.into_iter().map(|p| p.max(0.0)).collect();
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > TOL_SUM {
            return Err(domain(format!("probabilities sum to {total}, expected 1")));
        }
        Ok(Self { probs })
    }

    /// Binary distribution `(p, 1 − p)`.
    pub fn binary(p: f64) -> Result<Self> {
        Self::new(vec![p, 1.0 - p])
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub(crate) fn from_clamped(probs: Vec<f64>) -> Self {
        Self { probs }
    }
}

/// `P_k = Re tr(E_k ρ)`, clamped at zero.
pub fn induced_distribution(p: &Povm, rho: &DensityMatrix) -> Result<ClassicalDistribution> {
    if p.dim() != rho.dim() {
        return Err(structural(format!(
            "POVM acts on dimension {} but state has dimension {}",
            p.dim(),
            rho.dim()
        )));
    }
    Ok(ClassicalDistribution::from_clamped(induced_probs(p, rho)))
}

pub(crate) fn induced_probs(p: &Povm, rho: &DensityMatrix) -> Vec<f64> {
    p.elements()
        .iter()
        .map(|e| e.trace_product_re(rho.matrix()).max(0.0))
        .collect()
}

/// An exponent with the parameter `s` that realises it, when one applies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ExponentValue {
    /// Nonnegative, possibly `+∞`.
    pub value: f64,
    pub optimizer_s: Option<f64>,
}

impl ExponentValue {
    pub fn is_infinite(&self) -> bool {
        self.value.is_infinite()
    }

    fn finite(value: f64, s: f64) -> Self {
        // identical distributions leave a few ulps of rounding in φ
        let value = if value.abs() <= ROUNDING_FLOOR { 0.0 } else { value };
        Self {
            value: value.max(0.0),
            optimizer_s: Some(s),
        }
    }

    fn infinite() -> Self {
        Self {
            value: f64::INFINITY,
            optimizer_s: None,
        }
    }
}

fn check_pair(p: &[f64], q: &[f64]) -> Result<()> {
    if p.len() != q.len() {
        return Err(structural(format!(
            "distributions have lengths {} and {}",
            p.len(),
            q.len()
        )));
    }
    Ok(())
}

/// Precomputed logarithms of a distribution pair, so `φ(s)` costs one `exp`
/// per shared outcome.
pub(crate) struct LogPair {
    /// `(ln P_k, ln P̄_k)` over outcomes where both are positive.
    shared: Vec<(f64, f64)>,
    /// `Σ P̄_k` over `P_k > 0`.
    mass0: f64,
    /// `Σ P_k` over `P̄_k > 0`.
    mass1: f64,
    /// `Σ P_k` over `P̄_k = 0`.
    p_outside: f64,
}

impl LogPair {
    pub(crate) fn new(p: &[f64], q: &[f64]) -> Self {
        let mut shared = Vec::new();
        let (mut mass0, mut mass1, mut p_outside) = (0.0, 0.0, 0.0);
        for (&a, &b) in p.iter().zip(q) {
            if b <= 0.0 {
                p_outside += a;
            }
            if a > 0.0 {
                mass0 += b;
            }
            if b > 0.0 {
                mass1 += a;
            }
            if a > 0.0 && b > 0.0 {
                shared.push((a.ln(), b.ln()));
            }
        }
        Self {
            shared,
            mass0,
            mass1,
            p_outside,
        }
    }

    pub(crate) fn disjoint(&self) -> bool {
        self.shared.is_empty()
    }

    pub(crate) fn phi(&self, s: f64) -> f64 {
        if s <= 0.0 {
            return self.mass0.ln();
        }
        if s >= 1.0 {
            return self.mass1.ln();
        }
        if self.shared.is_empty() {
            return f64::NEG_INFINITY;
        }
        let mut mx = f64::NEG_INFINITY;
        for &(lp, lq) in &self.shared {
            mx = mx.max(s * lp + (1.0 - s) * lq);
        }
        let sum: f64 = self
            .shared
            .iter()
            .map(|&(lp, lq)| (s * lp + (1.0 - s) * lq - mx).exp())
            .sum();
        mx + sum.ln()
    }

    /// `φ'(1) = Σ_{shared} P_k ln(P_k/P̄_k) / Σ_{shared} P_k`.
    fn slope_at_one(&self) -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(lp, lq) in &self.shared {
            let pk = lp.exp();
            num += pk * (lp - lq);
            den += pk;
        }
        num / den
    }

    /// `(1 + u) φ(s)` at `s = u/(1+u)`, written through `expm1`/`ln_1p` so it
    /// stays accurate as `s → 1`. With `normalized`, `φ(1)` is taken as zero.
    fn scaled_phi(&self, u: f64, normalized: bool) -> f64 {
        let t = 1.0 / (1.0 + u);
        let mut acc = 0.0;
        for &(lp, lq) in &self.shared {
            acc += (lp - self.mass1.ln()).exp() * (-(lp - lq) * t).exp_m1();
        }
        let base = if normalized { 0.0 } else { self.mass1.ln() };
        (base + acc.ln_1p()) / t
    }
}

/// `φ(s|P‖P̄) = ln Σ_k P_k^s P̄_k^{1−s}`.
///
/// At `s = 0` only outcomes with `P_k > 0` contribute, at `s = 1` only those
/// with `P̄_k > 0`. Disjoint supports give `−∞` on the open interval.
pub fn phi(s: f64, p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<f64> {
    check_pair(p.probs(), q.probs())?;
    if !(0.0..=1.0).contains(&s) {
        return Err(domain(format!("s = {s} outside [0, 1]")));
    }
    Ok(LogPair::new(p.probs(), q.probs()).phi(s))
}

/// `−min_{0≤s≤1} φ(s|P‖P̄)`.
pub fn chernoff_exponent(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<ExponentValue> {
    check_pair(p.probs(), q.probs())?;
    Ok(chernoff_raw(p.probs(), q.probs()))
}

pub(crate) fn chernoff_raw(p: &[f64], q: &[f64]) -> ExponentValue {
    let lp = LogPair::new(p, q);
    if lp.disjoint() {
        return ExponentValue::infinite();
    }
    chernoff_logpair(&lp)
}

pub(crate) fn chernoff_logpair(lp: &LogPair) -> ExponentValue {
    let mut best = golden_section(|s| lp.phi(s), 0.0, 1.0, S_TOL);
    if !looks_convex(|s| lp.phi(s)) {
        let coarse = grid_scan(|s| lp.phi(s), 0.0, 1.0, FALLBACK_GRID);
        let h = 1.0 / (FALLBACK_GRID - 1) as f64;
        let lo = (coarse.x - h).max(0.0);
        let hi = (coarse.x + h).min(1.0);
        let refined = golden_section(|s| lp.phi(s), lo, hi, S_TOL);
        for cand in [coarse, refined] {
            if cand.value < best.value {
                best = cand;
            }
        }
    }
    ExponentValue::finite(-best.value, best.x)
}

fn looks_convex<F: Fn(f64) -> f64>(f: F) -> bool {
    let vals: Vec<f64> = (0..CONVEXITY_PROBES)
        .map(|i| f(i as f64 / (CONVEXITY_PROBES - 1) as f64))
        .collect();
    vals.windows(3).all(|w| w[0] - 2.0 * w[1] + w[2] >= -1e-10)
}

/// `D(P‖P̄) = Σ_k P_k ln(P_k/P̄_k)`, `+∞` when `P` charges an outcome `P̄` misses.
pub fn relative_entropy(p: &ClassicalDistribution, q: &ClassicalDistribution) -> Result<f64> {
    check_pair(p.probs(), q.probs())?;
    Ok(relative_entropy_raw(p.probs(), q.probs()))
}

pub(crate) fn relative_entropy_raw(p: &[f64], q: &[f64]) -> f64 {
    let mut d = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a > 0.0 {
            if b <= 0.0 {
                return f64::INFINITY;
            }
            d += a * (a / b).ln();
        }
    }
    if d <= ROUNDING_FLOOR {
        0.0
    } else {
        d
    }
}

/// `sup_{0≤s<1} [−s r − φ(s)]/(1 − s)`, clamped below at zero.
///
/// The supremum is searched in `u = s/(1−s) ∈ [0, ∞)`, where the objective is
/// concave (perspective of the convex `φ`). The `s → 1` limit is handled in
/// closed form: `D(P‖P̄)` for `r = 0` when `supp P ⊆ supp P̄`.
pub fn hoeffding_exponent(
    p: &ClassicalDistribution,
    q: &ClassicalDistribution,
    r: f64,
) -> Result<ExponentValue> {
    check_pair(p.probs(), q.probs())?;
    if !(r >= 0.0) || !r.is_finite() {
        return Err(domain(format!("rate r = {r} must be finite and nonnegative")));
    }
    Ok(hoeffding_raw(p.probs(), q.probs(), r))
}

pub(crate) fn hoeffding_raw(p: &[f64], q: &[f64], r: f64) -> ExponentValue {
    let lp = LogPair::new(p, q);
    if lp.disjoint() {
        return ExponentValue::infinite();
    }
    // P has mass outside supp P̄: rejecting only there has α-rate −φ(1) and β = 0
    let contained = lp.p_outside == 0.0;
    if !contained && r < -lp.phi(1.0) {
        return ExponentValue::infinite();
    }
    let g = |u: f64| -> f64 { -u * r - lp.scaled_phi(u, contained) };
    // bracket the concave maximum by doubling
    let mut hi = 1.0;
    let mut prev = g(0.0);
    loop {
        let v = g(hi);
        if v < prev || hi >= 1e15 {
            break;
        }
        prev = v;
        hi *= 2.0;
    }
    let m = golden_section(|u| -g(u), 0.0, hi, 1e-12 * (1.0 + hi));
    let mut best_val = -m.value;
    let mut best_s = m.x / (1.0 + m.x);
    if r == 0.0 && contained {
        let limit = lp.slope_at_one();
        if limit >= best_val {
            best_val = limit;
            best_s = 1.0;
        }
    }
    ExponentValue::finite(best_val, best_s)
}
