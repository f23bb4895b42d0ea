//! Protocols where the state pair sent at each use depends on the outcomes
//! observed so far.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channel::induced_probs;
use crate::error::{domain, structural, Error, Result};
use crate::finite::{index_sequence, sequence_index, ProductInput, MAX_SEQUENCES};
use crate::grouping::GroupingMask;
use crate::linalg::{ComplexMatrix, C64};
use crate::state::{check_product_dim, sequence_operator, DensityMatrix, Povm};

/// Cap on `(|candidates|² · m)^n`, the size of the strategy-tree search.
pub const MAX_TREE_WORK: usize = 1 << 20;
/// Conditional states with weight at or below this are reported as unreachable.
pub const ZERO_WEIGHT: f64 = 1e-15;

/// Outcome history, 0-based outcome per use.
pub type History = Vec<usize>;

/// `(ρ index, σ index)` chosen after each history.
pub type Choices = BTreeMap<History, (usize, usize)>;

/// Input state on the `n`-fold product space.
#[derive(Clone, Debug, PartialEq)]
pub struct JointState {
    rho: DensityMatrix,
    site_dim: usize,
    sites: usize,
}

impl JointState {
    pub fn new(rho: DensityMatrix, site_dim: usize, sites: usize) -> Result<Self> {
        if sites == 0 || site_dim == 0 {
            return Err(structural("joint state needs at least one site of positive dimension"));
        }
        let total = check_product_dim(site_dim, sites)?;
        if rho.dim() != total {
            return Err(structural(format!(
                "state of dimension {} is not on {site_dim}^{sites}",
                rho.dim()
            )));
        }
        Ok(Self { rho, site_dim, sites })
    }

    pub fn from_product(input: &ProductInput) -> Result<Self> {
        check_product_dim(input.dim(), input.len())?;
        let mut acc = input.factors()[0].clone();
        for f in &input.factors()[1..] {
            acc = acc.kron(f);
        }
        Self::new(acc, input.dim(), input.len())
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.rho
    }

    pub fn site_dim(&self) -> usize {
        self.site_dim
    }

    pub fn sites(&self) -> usize {
        self.sites
    }
}

/// State of use `s` given the first `s − 1` outcomes.
#[derive(Clone, Debug, PartialEq)]
pub struct Conditional {
    /// `None` when the history has (numerically) zero probability.
    pub state: Option<DensityMatrix>,
    /// `P(k^{s−1} | ρ^n)`.
    pub weight: f64,
}

impl Conditional {
    pub fn is_zero_weight(&self) -> bool {
        self.state.is_none()
    }
}

/// `tr_{[n]∖s}[(E_{k^{s−1}} ⊗ I) ρ^n]`, normalised, for `s = |history| + 1`.
pub fn conditional_state(joint: &JointState, p: &Povm, history: &[usize]) -> Result<Conditional> {
    let d = joint.site_dim;
    if p.dim() != d {
        return Err(structural(format!(
            "POVM acts on dimension {} but sites have dimension {d}",
            p.dim()
        )));
    }
    let s = history.len() + 1;
    if s > joint.sites {
        return Err(domain(format!(
            "history of length {} leaves no use among {}",
            history.len(),
            joint.sites
        )));
    }
    let past = d.pow(history.len() as u32);
    let rest = d.pow((joint.sites - s) as u32);
    let e_hist = if history.is_empty() {
        ComplexMatrix::identity(1)
    } else {
        sequence_operator(p, history)?
    };
    let rho = joint.rho.matrix();
    let idx = |a: usize, b: usize, c: usize| (a * d + b) * rest + c;
    let mut cond = ComplexMatrix::zeros(d);
    for b in 0..d {
        for b2 in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..past {
                for a2 in 0..past {
                    let e = e_hist[(a, a2)];
                    if e == C64::new(0.0, 0.0) {
                        continue;
                    }
                    let mut x = C64::new(0.0, 0.0);
                    for c in 0..rest {
                        x += rho[(idx(a2, b, c), idx(a, b2, c))];
                    }
                    acc += e * x;
                }
            }
            cond[(b, b2)] = acc;
        }
    }
    let weight = cond.trace().re;
    if weight <= ZERO_WEIGHT {
        return Ok(Conditional {
            state: None,
            weight: weight.max(0.0),
        });
    }
    Ok(Conditional {
        state: Some(DensityMatrix::from_matrix_unchecked(cond.scale_real(1.0 / weight))),
        weight,
    })
}

/// Feedback strategy: for every history, which candidates are sent under
/// H0 and H1 at the next use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StrategyRepr", into = "StrategyRepr")]
pub struct AdaptiveStrategy {
    depth: usize,
    candidates: Vec<DensityMatrix>,
    choices: Choices,
    /// Full-length histories accepted as H0; `None` means the ML rule.
    grouping: Option<Vec<History>>,
}

impl AdaptiveStrategy {
    pub fn new(
        depth: usize,
        candidates: Vec<DensityMatrix>,
        choices: Choices,
        grouping: Option<Vec<History>>,
    ) -> Result<Self> {
        if depth == 0 {
            return Err(structural("strategy depth must be at least 1"));
        }
        let Some(first) = candidates.first() else {
            return Err(structural("strategy needs at least one candidate state"));
        };
        if candidates.iter().any(|c| c.dim() != first.dim()) {
            return Err(structural("candidate states have different dimensions"));
        }
        for (h, &(i, j)) in &choices {
            if h.len() >= depth {
                return Err(structural(format!("history of length {} at depth {depth}", h.len())));
            }
            if i >= candidates.len() || j >= candidates.len() {
                return Err(structural(format!("choice ({i}, {j}) has no candidate")));
            }
        }
        if let Some(g) = &grouping {
            if g.iter().any(|h| h.len() != depth) {
                return Err(structural("grouped histories must have full length"));
            }
        }
        Ok(Self {
            depth,
            candidates,
            choices,
            grouping,
        })
    }

    /// Same pair at every use regardless of outcomes.
    pub fn non_adaptive(candidates: Vec<DensityMatrix>, rho_pattern: &[usize], sigma_pattern: &[usize], m: usize) -> Result<Self> {
        if rho_pattern.len() != sigma_pattern.len() {
            return Err(structural("patterns have different lengths"));
        }
        let depth = rho_pattern.len();
        let mut choices = BTreeMap::new();
        for s in 0..depth {
            for idx in 0..m.pow(s as u32) {
                choices.insert(index_sequence(m, s, idx), (rho_pattern[s], sigma_pattern[s]));
            }
        }
        Self::new(depth, candidates, choices, None)
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn candidates(&self) -> &[DensityMatrix] {
        &self.candidates
    }

    pub fn choices(&self) -> &Choices {
        &self.choices
    }

    pub fn choice(&self, history: &[usize]) -> Option<(usize, usize)> {
        self.choices.get(history).copied()
    }

    pub fn grouping(&self) -> Option<&[History]> {
        self.grouping.as_deref()
    }

    pub fn with_grouping(mut self, grouping: Option<Vec<History>>) -> Result<Self> {
        if let Some(g) = &grouping {
            if g.iter().any(|h| h.len() != self.depth) {
                return Err(structural("grouped histories must have full length"));
            }
        }
        self.grouping = grouping;
        Ok(self)
    }
}

/// History as 1-based outcome labels: `"12"`, or `"1,12"` once any label
/// needs two digits.
pub fn history_to_string(h: &[usize]) -> String {
    if h.iter().all(|&k| k < 9) {
        h.iter().map(|k| char::from(b'1' + *k as u8)).collect()
    } else {
        h.iter().map(|k| (k + 1).to_string()).collect::<Vec<_>>().join(",")
    }
}

pub fn history_from_string(s: &str) -> Result<History> {
    let parse = |tok: &str| -> Result<usize> {
        match tok.parse::<usize>() {
            Ok(k) if k >= 1 => Ok(k - 1),
            _ => Err(Error::Parse(format!("bad outcome label {tok:?} in history {s:?}"))),
        }
    };
    if s.contains(',') {
        s.split(',').map(parse).collect()
    } else {
        s.chars().map(|c| parse(&c.to_string())).collect()
    }
}

#[derive(Serialize, Deserialize)]
struct StrategyRepr {
    depth: usize,
    candidates: Vec<DensityMatrix>,
    choices: BTreeMap<String, [usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    grouping: Option<Vec<String>>,
}

impl From<AdaptiveStrategy> for StrategyRepr {
    fn from(s: AdaptiveStrategy) -> Self {
        Self {
            depth: s.depth,
            candidates: s.candidates,
            choices: s
                .choices
                .iter()
                .map(|(h, &(i, j))| (history_to_string(h), [i, j]))
                .collect(),
            grouping: s
                .grouping
                .map(|g| g.iter().map(|h| history_to_string(h)).collect()),
        }
    }
}

impl TryFrom<StrategyRepr> for AdaptiveStrategy {
    type Error = Error;

    fn try_from(r: StrategyRepr) -> Result<Self> {
        let choices = r
            .choices
            .iter()
            .map(|(h, &[i, j])| Ok((history_from_string(h)?, (i, j))))
            .collect::<Result<_>>()?;
        let grouping = r
            .grouping
            .map(|g| g.iter().map(|h| history_from_string(h)).collect::<Result<Vec<_>>>())
            .transpose()?;
        Self::new(r.depth, r.candidates, choices, grouping)
    }
}

/// Both hypotheses' distributions over full histories, and the error.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StrategyEvaluation {
    pub p_err: f64,
    /// Histories decided as H0, indexed lexicographically.
    pub grouping: GroupingMask,
    pub probs_h0: Vec<f64>,
    pub probs_h1: Vec<f64>,
}

/// Forward recursion over histories, then ML or the strategy's own grouping.
pub fn evaluate_strategy(p: &Povm, strat: &AdaptiveStrategy) -> Result<StrategyEvaluation> {
    if strat.candidates[0].dim() != p.dim() {
        return Err(structural(format!(
            "candidates have dimension {} but the POVM acts on {}",
            strat.candidates[0].dim(),
            p.dim()
        )));
    }
    let m = p.len();
    let total = (m as u128).checked_pow(strat.depth as u32).unwrap_or(u128::MAX);
    if total > MAX_SEQUENCES as u128 {
        return Err(Error::Resource {
            cap: "max_sequences",
            detail: format!("{m}^{} histories", strat.depth),
        });
    }
    let single: Vec<Vec<f64>> = strat.candidates.iter().map(|c| induced_probs(p, c)).collect();
    let (mut w0, mut w1) = (vec![1.0], vec![1.0]);
    for s in 0..strat.depth {
        let mut n0 = Vec::with_capacity(w0.len() * m);
        let mut n1 = Vec::with_capacity(w1.len() * m);
        for idx in 0..w0.len() {
            let (a, b) = (w0[idx], w1[idx]);
            let (i, j) = match strat.choice(&index_sequence(m, s, idx)) {
                Some(c) => c,
                None if a == 0.0 && b == 0.0 => (0, 0),
                None => {
                    return Err(structural(format!(
                        "no choice for reachable history {:?}",
                        history_to_string(&index_sequence(m, s, idx))
                    )))
                }
            };
            for k in 0..m {
                n0.push(a * single[i][k]);
                n1.push(b * single[j][k]);
            }
        }
        w0 = n0;
        w1 = n1;
    }
    let (p_err, grouping) = match &strat.grouping {
        None => {
            let mut total = 0.0;
            let mut bits = Vec::with_capacity(w0.len());
            for (&a, &b) in w0.iter().zip(&w1) {
                total += a.min(b);
                bits.push(a >= b);
            }
            (0.5 * total, GroupingMask::new(bits))
        }
        Some(hs) => {
            let members: Vec<usize> = hs.iter().map(|h| sequence_index(m, h)).collect();
            if let Some(h) = hs.iter().find(|h| h.iter().any(|&k| k >= m)) {
                return Err(domain(format!("grouped history {h:?} has outcomes beyond {m}")));
            }
            let mask = GroupingMask::from_members(w0.len(), &members);
            let mut total = 0.0;
            for (k, (&a, &b)) in w0.iter().zip(&w1).enumerate() {
                total += if mask.contains(k) { b } else { a };
            }
            (0.5 * total, mask)
        }
    };
    Ok(StrategyEvaluation {
        p_err,
        grouping,
        probs_h0: w0,
        probs_h1: w1,
    })
}

/// Result of the exhaustive strategy search.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AdaptiveSearch {
    pub p_err: f64,
    pub strategy: AdaptiveStrategy,
}

/// Exact minimum error over all strategy trees on `candidates` with an ML
/// final decision.
///
/// The optimal subtree at a history depends only on the two hypothesis
/// weights reaching it, so the search recurses on those weights. Choice
/// pairs are tried in lexicographic order and the first minimum is kept.
pub fn optimal_adaptive(p: &Povm, candidates: &[DensityMatrix], n: usize) -> Result<AdaptiveSearch> {
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
    let branching = (c * c * p.len()) as u128;
    if branching.checked_pow(n as u32).is_none_or(|w| w > MAX_TREE_WORK as u128) {
        return Err(Error::Resource {
            cap: "max_tree_work",
            detail: format!("({c}^2 · {})^{n} tree nodes", p.len()),
        });
    }
    let search = TreeSearch {
        single: candidates.iter().map(|s| induced_probs(p, s)).collect(),
        m: p.len(),
        depth: n,
    };
    let pairs: Vec<(usize, usize)> = (0..c).flat_map(|i| (0..c).map(move |j| (i, j))).collect();
    // root level in parallel, assembled in pair order
    let roots: Vec<(f64, Choices)> = pairs
        .par_iter()
        .map(|&pair| {
            let mut choices = BTreeMap::new();
            let v = search.children(&[], pair, 1.0, 1.0, &mut choices);
            choices.insert(Vec::new(), pair);
            (v, choices)
        })
        .collect();
    let (value, choices) = roots
        .into_iter()
        .reduce(|best, cand| if cand.0 < best.0 { cand } else { best })
        .expect("at least one candidate pair");
    let strategy = AdaptiveStrategy::new(n, candidates.to_vec(), choices, None)?;
    Ok(AdaptiveSearch {
        p_err: 0.5 * value,
        strategy,
    })
}

struct TreeSearch {
    single: Vec<Vec<f64>>,
    m: usize,
    depth: usize,
}

impl TreeSearch {
    /// Best value of the subtree at `history` given its weights; records the
    /// winning choices of all descendants.
    fn node(&self, history: &[usize], w0: f64, w1: f64, out: &mut Choices) -> f64 {
        if history.len() == self.depth {
            return w0.min(w1);
        }
        if w0 == 0.0 && w1 == 0.0 {
            self.fill_unreachable(history, out);
            return 0.0;
        }
        let c = self.single.len();
        let mut best: Option<(f64, Choices, (usize, usize))> = None;
        for i in 0..c {
            for j in 0..c {
                let mut sub = BTreeMap::new();
                let v = self.children(history, (i, j), w0, w1, &mut sub);
                if best.as_ref().is_none_or(|b| v < b.0) {
                    best = Some((v, sub, (i, j)));
                }
            }
        }
        let (v, sub, pair) = best.expect("nonempty candidates");
        out.extend(sub);
        out.insert(history.to_vec(), pair);
        v
    }

    fn children(
        &self,
        history: &[usize],
        (i, j): (usize, usize),
        w0: f64,
        w1: f64,
        out: &mut Choices,
    ) -> f64 {
        let mut total = 0.0;
        let mut child = history.to_vec();
        child.push(0);
        for k in 0..self.m {
            *child.last_mut().expect("child history is nonempty") = k;
            total += self.node(&child, w0 * self.single[i][k], w1 * self.single[j][k], out);
        }
        total
    }

    fn fill_unreachable(&self, history: &[usize], out: &mut Choices) {
        if history.len() == self.depth {
            return;
        }
        out.insert(history.to_vec(), (0, 0));
        let mut child = history.to_vec();
        child.push(0);
        for k in 0..self.m {
            *child.last_mut().expect("child history is nonempty") = k;
            self.fill_unreachable(&child, out);
        }
    }
}
