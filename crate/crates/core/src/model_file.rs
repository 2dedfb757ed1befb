//! JSON model files.
//!
//! ```json
//! {
//!   "schema": "blamescope/scm/1",
//!   "exogenous":  [{"id": "E1", "values": ["0", "1"], "probs": [0.5, 0.5]}],
//!   "endogenous": [{"id": "X", "values": ["0", "1"], "parents": ["E1"],
//!                   "table": {"0": "0", "1": "1"}}],
//!   "outcomes": {"x1": [[{"var": "X", "op": "eq", "value": "1"}]]},
//!   "actions":  {"flip": [{"var": "X", "parents": ["E1"], "table": {"0": "1", "1": "0"}}]},
//!   "costs":    {"ops": [{"when": [{"var": "X", "op": "eq", "value": "1"}], "cost": 2.0}]},
//!   "discount": {"kind": "cost_ratio", "epsilon": 1e-9}
//! }
//! ```
//!
//! `outcomes`, `actions`, `costs` and `discount` are optional. Loading checks
//! every named outcome, action and cost model against the model.

use std::collections::BTreeMap;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blame::{apply_action, Action, BlameError, CostModel, DiscountSpec, Override};
use crate::caselog::{open, FormatError};
use crate::scm::{EndogenousVar, ExogenousVar, OutcomeSpec, Scm, ScmError};

pub const SCM_SCHEMA: &str = "blamescope/scm/1";

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelFileError {
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error("{context}: {source}")]
    Named { context: String, source: Box<ModelFileError> },
    #[error(transparent)]
    Blame(#[from] BlameError),
}

impl ModelFileError {
    fn named(context: String, e: impl Into<ModelFileError>) -> Self {
        ModelFileError::Named { context, source: Box::new(e.into()) }
    }

    /// The innermost error, skipping naming context.
    pub fn root(&self) -> &ModelFileError {
        match self {
            ModelFileError::Named { source, .. } => source.root(),
            other => other,
        }
    }
}

/// On-disk shape of a model file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDocument {
    pub schema: String,
    pub exogenous: Vec<ExogenousVar>,
    pub endogenous: Vec<EndogenousVar>,
    #[serde(default)]
    pub outcomes: BTreeMap<String, OutcomeSpec>,
    #[serde(default)]
    pub actions: BTreeMap<String, Vec<Override>>,
    #[serde(default)]
    pub costs: BTreeMap<String, CostModel>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub discount: Option<DiscountSpec>,
}

/// A validated model file.
#[derive(Debug, Clone)]
pub struct ModelFile {
    pub scm: Scm,
    pub outcomes: BTreeMap<String, OutcomeSpec>,
    pub actions: BTreeMap<String, Action>,
    pub costs: BTreeMap<String, CostModel>,
    pub discount: Option<DiscountSpec>,
}

impl ModelFile {
    pub fn from_document(doc: ModelDocument) -> Result<Self, ModelFileError> {
        if doc.schema != SCM_SCHEMA {
            return Err(FormatError::Schema { found: doc.schema, expected: SCM_SCHEMA.into() }.into());
        }
        let scm = Scm::new(doc.exogenous, doc.endogenous)?;
        for (name, phi) in &doc.outcomes {
            phi.compile(&scm).map_err(|e| ModelFileError::named(format!("outcome `{name}`"), e))?;
        }
        let actions: BTreeMap<String, Action> = doc
            .actions
            .into_iter()
            .map(|(name, overrides)| {
                let action = Action::new(name.clone(), overrides);
                apply_action(&scm, &action).map_err(|e| ModelFileError::named(format!("action `{name}`"), e))?;
                Ok((name, action))
            })
            .collect::<Result<_, ModelFileError>>()?;
        for (name, cost) in &doc.costs {
            cost.check_against(&scm).map_err(|e| ModelFileError::named(format!("cost `{name}`"), e))?;
        }
        if let Some(d) = &doc.discount {
            d.check()?;
        }
        Ok(Self { scm, outcomes: doc.outcomes, actions, costs: doc.costs, discount: doc.discount })
    }

    pub fn from_reader<R: Read>(input: R) -> Result<Self, ModelFileError> {
        let doc: ModelDocument = serde_json::from_reader(input).map_err(|e| FormatError::Json(e.to_string()))?;
        Self::from_document(doc)
    }

    pub fn from_json(json: &str) -> Result<Self, ModelFileError> {
        Self::from_reader(json.as_bytes())
    }

    pub fn from_path(path: &Path) -> Result<Self, ModelFileError> {
        Self::from_reader(std::io::BufReader::new(open(path)?))
    }

    pub fn outcome(&self, name: &str) -> Option<&OutcomeSpec> {
        self.outcomes.get(name)
    }

    pub fn action(&self, name: &str) -> Option<&Action> {
        self.actions.get(name)
    }

    pub fn cost(&self, name: &str) -> Option<&CostModel> {
        self.costs.get(name)
    }
}
