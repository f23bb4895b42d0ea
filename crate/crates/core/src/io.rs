//! JSON input files: POVMs, states, candidate lists and strategies.
//!
//! Matrices are nested rows of `[re, im]` pairs. States sit under `"state"`,
//! candidate lists under `"states"`.

use serde::{Deserialize, Serialize};

use crate::adaptive::AdaptiveStrategy;
use crate::error::{structural, Error, Result};
use crate::linalg::ComplexMatrix;
use crate::state::{DensityMatrix, Povm, PovmRepr};

fn from_json<'a, T: Deserialize<'a>>(text: &'a str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))
}

/// Parses a POVM file without validating the operators.
pub fn parse_povm_repr(text: &str) -> Result<PovmRepr> {
    from_json(text)
}

/// Parses and validates a POVM file.
pub fn parse_povm(text: &str) -> Result<Povm> {
    Povm::new(parse_povm_repr(text)?.checked_elements()?)
}

#[derive(Deserialize)]
struct StatesFile {
    state: Option<ComplexMatrix>,
    states: Option<Vec<ComplexMatrix>>,
}

/// States listed under `"states"`, or the single one under `"state"`.
pub fn parse_states(text: &str) -> Result<Vec<DensityMatrix>> {
    let file: StatesFile = from_json(text)?;
    let mats = match (file.state, file.states) {
        (Some(s), None) => vec![s],
        (None, Some(list)) if !list.is_empty() => list,
        (None, Some(_)) => return Err(structural("\"states\" is empty")),
        (Some(_), Some(_)) => return Err(Error::Parse("give either \"state\" or \"states\", not both".into())),
        (None, None) => return Err(Error::Parse("expected a \"state\" or \"states\" field".into())),
    };
    mats.into_iter().map(DensityMatrix::new).collect()
}

pub fn parse_strategy(text: &str) -> Result<AdaptiveStrategy> {
    from_json(text)
}

#[derive(Serialize)]
struct StatesOut<'a> {
    states: &'a [DensityMatrix],
}

pub fn states_to_json(states: &[DensityMatrix]) -> String {
    serde_json::to_string_pretty(&StatesOut { states }).expect("states serialize")
}

pub fn povm_to_json(p: &Povm) -> String {
    serde_json::to_string_pretty(p).expect("POVM serializes")
}
