//! Error probabilities for `n` uses of the detector on product inputs.
//!
//! Dense sequence distributions cover general POVMs at small `n`. For a
//! two-outcome qubit detector the error depends only on outcome counts per
//! block, which [`sweep_x`] and [`empirical_rate`] exploit to reach large `n`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::induced_probs;
use crate::error::{structural, Error, Result};
use crate::grouping::GroupingMask;
use crate::linalg::eig_hermitian;
use crate::state::{DensityMatrix, Povm};

/// Largest number of outcome sequences held densely.
pub const MAX_SEQUENCES: usize = 1 << 20;
/// Largest number of sequences for the exhaustive grouping oracle.
pub const MAX_BRUTE_FORCE_SEQUENCES: usize = 20;
/// Cap on `|candidates|^{2n} · m^n` for the product-pattern search.
pub const MAX_PATTERN_WORK: usize = 1 << 26;
/// Largest `n` for a full x-sweep.
pub const MAX_SWEEP_N: usize = 1000;
/// Largest `n` for a single aggregated error evaluation.
pub const MAX_RATE_N: usize = 100_000;

/// Ties between patterns within this margin keep the earlier pattern.
const PATTERN_IMPROVEMENT: f64 = 1e-12;

/// Tensor product `ρ_1 ⊗ … ⊗ ρ_n`, one factor per use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProductInput {
    factors: Vec<DensityMatrix>,
}

impl ProductInput {
    pub fn new(factors: Vec<DensityMatrix>) -> Result<Self> {
        let Some(first) = factors.first() else {
            return Err(structural("product input needs at least one factor"));
        };
        let d = first.dim();
        if factors.iter().any(|f| f.dim() != d) {
            return Err(structural("product factors have different dimensions"));
        }
        Ok(Self { factors })
    }

    pub fn iid(rho: &DensityMatrix, n: usize) -> Result<Self> {
        Self::new(vec![rho.clone(); n])
    }

    /// Factor `i` is `candidates[pattern[i]]`.
    pub fn from_pattern(candidates: &[DensityMatrix], pattern: &[usize]) -> Result<Self> {
        let factors = pattern
            .iter()
            .map(|&k| {
                candidates
                    .get(k)
                    .cloned()
                    .ok_or_else(|| structural(format!("pattern index {k} has no candidate")))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(factors)
    }

    pub fn factors(&self) -> &[DensityMatrix] {
        &self.factors
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.factors[0].dim()
    }
}

/// Distribution over outcome sequences `k^n`, indexed lexicographically with
/// the first use as the most significant digit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceDistribution {
    outcomes: usize,
    uses: usize,
    probs: Vec<f64>,
}

impl SequenceDistribution {
    pub fn outcomes(&self) -> usize {
        self.outcomes
    }

    pub fn uses(&self) -> usize {
        self.uses
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

    /// Probability of a sequence of 0-based outcomes.
    pub fn prob(&self, seq: &[usize]) -> f64 {
        self.probs[sequence_index(self.outcomes, seq)]
    }

    /// Outcome sequence at lexicographic index `idx`.
    pub fn sequence(&self, idx: usize) -> Vec<usize> {
        index_sequence(self.outcomes, self.uses, idx)
    }
}

pub fn sequence_index(m: usize, seq: &[usize]) -> usize {
    seq.iter().fold(0, |acc, &k| acc * m + k)
}

pub fn index_sequence(m: usize, n: usize, mut idx: usize) -> Vec<usize> {
    let mut seq = vec![0; n];
    for slot in (0..n).rev() {
        seq[slot] = idx % m;
        idx /= m;
    }
    seq
}

fn sequence_count(m: usize, n: usize, cap: usize, cap_name: &'static str) -> Result<usize> {
    let mut total: usize = 1;
    for _ in 0..n {
        total = match total.checked_mul(m) {
            Some(t) if t <= cap => t,
            _ => {
                return Err(Error::Resource {
                    cap: cap_name,
                    detail: format!("{m}^{n} outcome sequences exceed the cap of {cap}"),
                })
            }
        };
    }
    Ok(total)
}

/// `P(k^n) = Π_i tr(E_{k_i} ρ_i)`.
pub fn sequence_distribution(p: &Povm, input: &ProductInput) -> Result<SequenceDistribution> {
    if input.dim() != p.dim() {
        return Err(structural(format!(
            "POVM acts on dimension {} but inputs have dimension {}",
            p.dim(),
            input.dim()
        )));
    }
    let slots: Vec<Vec<f64>> = input.factors().iter().map(|f| induced_probs(p, f)).collect();
    product_distribution(p.len(), &slots)
}

fn product_distribution(m: usize, slots: &[Vec<f64>]) -> Result<SequenceDistribution> {
    sequence_count(m, slots.len(), MAX_SEQUENCES, "max_sequences")?;
    let mut probs = vec![1.0];
    for slot in slots {
        probs = probs
            .iter()
            .flat_map(|&acc| slot.iter().map(move |&pk| acc * pk))
            .collect();
    }
    Ok(SequenceDistribution {
        outcomes: m,
        uses: slots.len(),
        probs,
    })
}

/// Minimum error probability and the grouping that realises it. Sequences in
/// the grouping are assigned to H0.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GroupingOutcome {
    pub p_err: f64,
    pub grouping: GroupingMask,
}

fn check_same_index(p: &SequenceDistribution, q: &SequenceDistribution) -> Result<()> {
    if p.outcomes != q.outcomes || p.uses != q.uses {
        return Err(structural(format!(
            "sequence distributions over {}^{} and {}^{} outcomes",
            p.outcomes, p.uses, q.outcomes, q.uses
        )));
    }
    Ok(())
}

/// `½ Σ min(P, P̄)`, grouping `{k^n : P ≥ P̄}`.
pub fn ml_error_probability(p: &SequenceDistribution, q: &SequenceDistribution) -> Result<GroupingOutcome> {
    check_same_index(p, q)?;
    let mut total = 0.0;
    let mut bits = Vec::with_capacity(p.len());
    for (&a, &b) in p.probs.iter().zip(&q.probs) {
        total += a.min(b);
        bits.push(a >= b);
    }
    Ok(GroupingOutcome {
        p_err: 0.5 * total,
        grouping: GroupingMask::new(bits),
    })
}

/// Minimum of `(α + β)/2` over all `2^{m^n}` groupings. First minimum in
/// mask order wins.
pub fn brute_force_grouping(p: &SequenceDistribution, q: &SequenceDistribution) -> Result<GroupingOutcome> {
    check_same_index(p, q)?;
    let len = sequence_count(p.outcomes, p.uses, MAX_BRUTE_FORCE_SEQUENCES, "max_brute_force_sequences")?;
    let mut best = (f64::INFINITY, 0u64);
    for word in 0u64..(1u64 << len) {
        let mut cost = 0.0;
        for k in 0..len {
            cost += if word >> k & 1 == 1 { q.probs[k] } else { p.probs[k] };
        }
        if cost < best.0 {
            best = (cost, word);
        }
    }
    Ok(GroupingOutcome {
        p_err: 0.5 * best.0,
        grouping: GroupingMask::from_word(len, best.1),
    })
}

/// Winner of [`best_product_pair`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PatternSearch {
    pub p_err: f64,
    /// Candidate index per use under H0.
    pub rho_pattern: Vec<usize>,
    /// Candidate index per use under H1.
    pub sigma_pattern: Vec<usize>,
    /// Set when the detector elements do not commute: the candidate set then
    /// need not contain the optimal factors.
    pub heuristic: bool,
}

/// Exhaustive minimum of the ML error over assignments of candidate states to
/// the `n` uses, independently for both hypotheses. Patterns are visited in
/// lexicographic order and a later one must win by more than `1e-12`.
pub fn best_product_pair(p: &Povm, n: usize, candidates: &[DensityMatrix]) -> Result<PatternSearch> {
    if n == 0 {
        return Err(structural("n must be at least 1"));
    }
    if candidates.is_empty() {
        return Err(structural("no candidate states"));
    }
    if let Some(c) = candidates.iter().find(|c| c.dim() != p.dim()) {
        return Err(structural(format!(
            "candidate of dimension {} for a POVM on dimension {}",
            c.dim(),
            p.dim()
        )));
    }
    let c = candidates.len();
    let patterns = sequence_count(c, n, MAX_PATTERN_WORK, "max_pattern_work")?;
    let seqs = sequence_count(p.len(), n, MAX_SEQUENCES, "max_sequences")?;
    if patterns
        .checked_mul(patterns)
        .and_then(|w| w.checked_mul(seqs))
        .is_none_or(|w| w > MAX_PATTERN_WORK)
    {
        return Err(Error::Resource {
            cap: "max_pattern_work",
            detail: format!("{c}^{} patterns times {seqs} sequences", 2 * n),
        });
    }
    let single: Vec<Vec<f64>> = candidates.iter().map(|c| induced_probs(p, c)).collect();
    let dists: Vec<SequenceDistribution> = (0..patterns)
        .map(|idx| {
            let slots: Vec<Vec<f64>> = index_sequence(c, n, idx)
                .into_iter()
                .map(|k| single[k].clone())
                .collect();
            product_distribution(p.len(), &slots)
        })
        .collect::<Result<_>>()?;
    let mut best = (f64::INFINITY, 0, 0);
    for (i, a) in dists.iter().enumerate() {
        for (j, b) in dists.iter().enumerate() {
            let e = ml_error_probability(a, b)?.p_err;
            if e < best.0 - PATTERN_IMPROVEMENT {
                best = (e, i, j);
            }
        }
    }
    Ok(PatternSearch {
        p_err: best.0,
        rho_pattern: index_sequence(c, n, best.1),
        sigma_pattern: index_sequence(c, n, best.2),
        heuristic: !elements_commute(p),
    })
}

fn elements_commute(p: &Povm) -> bool {
    let els = p.elements();
    els.iter().enumerate().all(|(i, a)| {
        els[i + 1..]
            .iter()
            .all(|b| a.matmul(b).max_abs_diff(&b.matmul(a)) <= 1e-9)
    })
}

/// One point of the x-sweep: `m` of the `n` uses carry `ρ0` under H0 (and
/// `ρ1` under H1), the remaining uses the other way round.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPoint {
    pub m: usize,
    pub x: f64,
    pub p_err: f64,
    pub ln_p_err: f64,
    /// `−ln(p_err)/n`.
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Sweep {
    pub n: usize,
    pub points: Vec<SweepPoint>,
}

impl Sweep {
    /// CSV with columns `x,p_err,rate`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,p_err,rate\n");
        for pt in &self.points {
            // p_err spans hundreds of decades at large n
            out.push_str(&format!("{},{:e},{}\n", pt.x, pt.p_err, pt.rate));
        }
        out
    }
}

/// Eigenvalues `p ≥ q` of `E_1` for a two-outcome qubit detector; `ρ0` and
/// `ρ1` are the matching eigenvectors.
struct BinaryDetector {
    p: f64,
    q: f64,
}

impl BinaryDetector {
    fn from_povm(p: &Povm) -> Result<Self> {
        if p.dim() != 2 || p.len() != 2 {
            return Err(Error::Unsupported(format!(
                "count aggregation needs a two-outcome qubit detector, got {} outcomes on dimension {}",
                p.len(),
                p.dim()
            )));
        }
        let eig = eig_hermitian(p.element(0))?;
        Ok(Self {
            p: eig.values[0].clamp(0.0, 1.0),
            q: eig.values[1].clamp(0.0, 1.0),
        })
    }

    /// `ln p_err` for `m` uses of `(ρ0, ρ1)` followed by `n − m` of `(ρ1, ρ0)`.
    ///
    /// With `i` clicks of outcome 1 in the first block and `j` in the second,
    /// both likelihoods depend only on `(i, j)`, so
    /// `p_err = ½ Σ C(m,i) C(n−m,j) min(P0(i,j), P1(i,j))`.
    fn ln_error(&self, n: usize, m: usize, ln_fact: &[f64]) -> f64 {
        let (lp, lp_) = (ln_or_neg_inf(self.p), ln_or_neg_inf(1.0 - self.p));
        let (lq, lq_) = (ln_or_neg_inf(self.q), ln_or_neg_inf(1.0 - self.q));
        let ln_choose = |a: usize, b: usize| ln_fact[a] - ln_fact[b] - ln_fact[a - b];
        let r = n - m;
        let mut terms = Vec::with_capacity((m + 1) * (r + 1));
        for i in 0..=m {
            for j in 0..=r {
                let l0 = xlog(i, lp) + xlog(m - i, lp_) + xlog(j, lq) + xlog(r - j, lq_);
                let l1 = xlog(i, lq) + xlog(m - i, lq_) + xlog(j, lp) + xlog(r - j, lp_);
                let t = ln_choose(m, i) + ln_choose(r, j) + l0.min(l1);
                if t > f64::NEG_INFINITY {
                    terms.push(t);
                }
            }
        }
        log_sum_exp(&terms) - std::f64::consts::LN_2
    }
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x <= 0.0 {
        f64::NEG_INFINITY
    } else {
        x.ln()
    }
}

/// `k ln x` with `0 · ln 0 = 0`.
fn xlog(k: usize, lnx: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * lnx
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let mx = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if mx == f64::NEG_INFINITY {
        return mx;
    }
    mx + terms.iter().map(|t| (t - mx).exp()).sum::<f64>().ln()
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..=n {
        acc += (k as f64).ln();
        out.push(acc);
    }
    out
}

fn point(n: usize, m: usize, ln_p: f64) -> SweepPoint {
    SweepPoint {
        m,
        x: m as f64 / n as f64,
        p_err: ln_p.exp(),
        ln_p_err: ln_p,
        rate: -ln_p / n as f64,
    }
}

/// Exact error for every split `m = 0..=n` of the inputs
/// `(ρ0^{⊗m} ⊗ ρ1^{⊗(n−m)}, ρ1^{⊗m} ⊗ ρ0^{⊗(n−m)})`.
pub fn sweep_x(p: &Povm, n: usize) -> Result<Sweep> {
    let det = BinaryDetector::from_povm(p)?;
    check_n(n, MAX_SWEEP_N, "max_sweep_n")?;
    let ln_fact = ln_factorials(n);
    let points = (0..=n)
        .into_par_iter()
        .map(|m| point(n, m, det.ln_error(n, m, &ln_fact)))
        .collect();
    Ok(Sweep { n, points })
}

/// `−(1/n) ln p_err` for the i.i.d. eigenbasis pair `(ρ0^{⊗n}, ρ1^{⊗n})`.
pub fn empirical_rate(p: &Povm, n: usize) -> Result<f64> {
    let det = BinaryDetector::from_povm(p)?;
    check_n(n, MAX_RATE_N, "max_rate_n")?;
    let ln_fact = ln_factorials(n);
    Ok(point(n, n, det.ln_error(n, n, &ln_fact)).rate)
}

fn check_n(n: usize, cap: usize, name: &'static str) -> Result<()> {
    if n == 0 {
        return Err(structural("n must be at least 1"));
    }
    if n > cap {
        return Err(Error::Resource {
            cap: name,
            detail: format!("n = {n} exceeds {cap}"),
        });
    }
    Ok(())
}
