//! JSON model files.
//!
//! ```json
//! {
//!   "settings": { "a": 0.0, "a_prime": 1.3, "b": 0.7, "b_prime": 2.8, "mode": "sequential" },
//!   "context": { "weights": ["a", "b"], "particle1": ["a", "a_prime"], "particle2": ["b", "b_prime"] },
//!   "atoms": [
//!     { "id": "(+1,+1)", "weight": 0.125, "side1": [0.6, 0.4, 0.0, 0.0], "side2": [0.3, 0.7, 0.0, 0.0] }
//!   ],
//!   "probes": [
//!     { "settings": { ... }, "side1": [[...], ...], "side2": [[...], ...] }
//!   ]
//! }
//! ```
//!
//! Angles are radians. Side tables are ordered `(++, +-, -+, --)` over the
//! particle's `(t1, t2)` outcomes. Numbers are written in shortest
//! round-trip form, so save followed by load is value-exact.

use std::fs;
use std::path::Path;

use serde::Deserialize;

use super::{ContextDescriptor, HVModel, LambdaAtom, ResponseProbe};
use crate::quantum::Scenario;
use crate::{Error, Result};

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    settings: Scenario,
    context: ContextDescriptor,
    atoms: Vec<LambdaAtom>,
    #[serde(default)]
    probes: Vec<ResponseProbe>,
}

impl HVModel {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        HVModel::new(doc.settings, doc.context, doc.atoms, doc.probes)
    }
}

pub fn save_model(m: &HVModel, path: impl AsRef<Path>) -> Result<()> {
    let mut text = m.to_json()?;
    text.push('\n');
    fs::write(path, text).map_err(Error::from)
}

pub fn load_model(path: impl AsRef<Path>) -> Result<HVModel> {
    HVModel::from_json(&fs::read_to_string(path)?)
}
