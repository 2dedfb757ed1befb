//! Blameworthiness of one decision policy relative to another.
//!
//! An [`Action`] rewrites some mechanisms of a model, producing the modified
//! system `M^a`. For an undesired outcome `phi`:
//!
//! ```text
//! δ(a, a')  = max(0, P(phi = 1 | M^a) - P(phi = 1 | M^a'))
//! γ(a, a')  = τ(E[C | M^a], E[C | M^a'])
//! DB(a, a') = γ(a, a') · δ(a, a')
//! ```
//!
//! `τ` is selected by a [`DiscountSpec`].

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scm::{
    self, event_probability_capped, event_probability_mc, Literal, OutcomeSpec, Scm, ScmError, DEFAULT_STATE_CAP,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum BlameError {
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error("invalid cost model: {0}")]
    InvalidCost(String),
    #[error("invalid discount: {0}")]
    InvalidDiscount(String),
}

/// Replacement mechanism for one endogenous variable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Override {
    pub var: String,
    #[serde(default)]
    pub parents: Vec<String>,
    pub table: BTreeMap<String, String>,
}

/// A named modification of the decision policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Action {
    pub label: String,
    pub overrides: Vec<Override>,
}

impl Action {
    /// The action that changes nothing.
    pub fn identity(label: impl Into<String>) -> Self {
        Self { label: label.into(), overrides: Vec::new() }
    }

    pub fn new(label: impl Into<String>, overrides: Vec<Override>) -> Self {
        Self { label: label.into(), overrides }
    }
}

/// Builds the modified model `M^a`. The input model is left untouched.
pub fn apply_action(scm: &Scm, action: &Action) -> Result<Scm, ScmError> {
    let overrides: Vec<_> =
        action.overrides.iter().map(|o| (o.var.clone(), o.parents.clone(), o.table.clone())).collect();
    scm.replace_mechanisms(&overrides)
}

/// One additive cost term, charged when every literal in `when` holds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostTerm {
    #[serde(default)]
    pub when: Vec<Literal>,
    pub cost: f64,
}

/// Decision cost `C(x)` as the sum of the matching terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostModel {
    pub terms: Vec<CostTerm>,
}

/// Literals of one cost term, compiled against an SCM, and its cost.
type CompiledTerm = (Vec<(usize, bool, usize)>, f64);

impl CostModel {
    pub fn new(terms: Vec<CostTerm>) -> Result<Self, BlameError> {
        let model = Self { terms };
        model.check()?;
        Ok(model)
    }

    /// A cost of `cost` on every assignment.
    pub fn constant(cost: f64) -> Self {
        Self { terms: vec![CostTerm { when: Vec::new(), cost }] }
    }

    pub fn check(&self) -> Result<(), BlameError> {
        for t in &self.terms {
            if !(t.cost.is_finite() && t.cost >= 0.0) {
                return Err(BlameError::InvalidCost(format!(
                    "term cost {} is not a finite non-negative number",
                    t.cost
                )));
            }
        }
        Ok(())
    }

    /// Multiplies every term by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self { terms: self.terms.iter().map(|t| CostTerm { when: t.when.clone(), cost: t.cost * k }).collect() }
    }

    /// Checks the costs and that every literal names an endogenous variable
    /// and a value of its domain.
    pub fn check_against(&self, scm: &Scm) -> Result<(), BlameError> {
        self.compile(scm).map(|_| ())
    }

    fn compile(&self, scm: &Scm) -> Result<Vec<CompiledTerm>, BlameError> {
        self.check()?;
        self.terms
            .iter()
            .map(|t| {
                let lits = t.when.iter().map(|l| scm::outcome_literal(scm, l)).collect::<Result<Vec<_>, _>>()?;
                Ok((lits, t.cost))
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiscountKind {
    /// `γ = 1`.
    Unit,
    /// `γ = clamp(cost_a / cost_a', ε, 1)`, and `γ = 1` when `cost_a' = 0`.
    CostRatio,
}

pub const DEFAULT_DISCOUNT_EPSILON: f64 = 1e-9;

fn default_epsilon() -> f64 {
    DEFAULT_DISCOUNT_EPSILON
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiscountSpec {
    pub kind: DiscountKind,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
}

impl Default for DiscountSpec {
    fn default() -> Self {
        Self::cost_ratio()
    }
}

impl DiscountSpec {
    pub fn unit() -> Self {
        Self { kind: DiscountKind::Unit, epsilon: DEFAULT_DISCOUNT_EPSILON }
    }

    pub fn cost_ratio() -> Self {
        Self { kind: DiscountKind::CostRatio, epsilon: DEFAULT_DISCOUNT_EPSILON }
    }

    pub fn check(&self) -> Result<(), BlameError> {
        if !(self.epsilon > 0.0 && self.epsilon <= 1.0) {
            return Err(BlameError::InvalidDiscount(format!("epsilon {} is not in (0, 1]", self.epsilon)));
        }
        Ok(())
    }
}

/// The discount function `τ`. Always returns a value in `(0, 1]` for
/// non-negative costs and a valid `epsilon`.
pub fn discount(spec: &DiscountSpec, cost_a: f64, cost_aprime: f64) -> f64 {
    match spec.kind {
        DiscountKind::Unit => 1.0,
        DiscountKind::CostRatio => {
            if cost_aprime <= 0.0 {
                1.0
            } else {
                (cost_a / cost_aprime).clamp(spec.epsilon, 1.0)
            }
        }
    }
}

/// How outcome probabilities and expected costs are computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Estimator {
    Exact { state_cap: u64 },
    MonteCarlo { samples: u64, seed: u64 },
}

impl Default for Estimator {
    fn default() -> Self {
        Estimator::Exact { state_cap: DEFAULT_STATE_CAP }
    }
}

impl Estimator {
    fn probability(&self, scm: &Scm, phi: &OutcomeSpec) -> Result<f64, ScmError> {
        match *self {
            Estimator::Exact { state_cap } => event_probability_capped(scm, phi, state_cap),
            Estimator::MonteCarlo { samples, seed } => event_probability_mc(scm, phi, samples, seed),
        }
    }

    fn expectation<F: Fn(&[usize]) -> f64>(&self, scm: &Scm, f: F) -> Result<f64, ScmError> {
        match *self {
            Estimator::Exact { state_cap } => scm::expectation_exact(scm, state_cap, f),
            Estimator::MonteCarlo { samples, seed } => scm::expectation_mc(scm, samples, seed, f),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlameReport {
    pub p_a: f64,
    pub p_aprime: f64,
    pub delta: f64,
    pub cost_a: f64,
    pub cost_aprime: f64,
    pub gamma: f64,
    pub db: f64,
    /// `model` when computed from an SCM, `empirical` when counted over a log.
    pub measure: String,
}

impl BlameReport {
    /// Assembles a report from the two outcome probabilities and the two
    /// expected costs.
    pub fn from_parts(p_a: f64, p_aprime: f64, cost_a: f64, cost_aprime: f64, spec: &DiscountSpec) -> Self {
        let delta = (p_a - p_aprime).max(0.0);
        let gamma = discount(spec, cost_a, cost_aprime);
        Self { p_a, p_aprime, delta, cost_a, cost_aprime, gamma, db: gamma * delta, measure: "model".into() }
    }
}

/// `δ(a, a')` computed exactly.
pub fn delta(scm: &Scm, a: &Action, a_prime: &Action, phi: &OutcomeSpec) -> Result<f64, BlameError> {
    delta_with(scm, a, a_prime, phi, Estimator::default())
}

/// `δ(a, a')` with both probabilities taken from the same estimator.
pub fn delta_with(
    scm: &Scm,
    a: &Action,
    a_prime: &Action,
    phi: &OutcomeSpec,
    estimator: Estimator,
) -> Result<f64, BlameError> {
    let p_a = estimator.probability(&apply_action(scm, a)?, phi)?;
    let p_aprime = estimator.probability(&apply_action(scm, a_prime)?, phi)?;
    Ok((p_a - p_aprime).max(0.0))
}

/// `E[C | M^a]` computed exactly.
pub fn expected_cost(scm: &Scm, action: &Action, cost: &CostModel) -> Result<f64, BlameError> {
    expected_cost_with(scm, action, cost, Estimator::default())
}

pub fn expected_cost_with(
    scm: &Scm,
    action: &Action,
    cost: &CostModel,
    estimator: Estimator,
) -> Result<f64, BlameError> {
    let modified = apply_action(scm, action)?;
    let terms = cost.compile(&modified)?;
    if terms.is_empty() {
        return Ok(0.0);
    }
    let c = estimator.expectation(&modified, |v| {
        terms
            .iter()
            .filter(|(lits, _)| lits.iter().all(|&(slot, eq, val)| (v[slot] == val) == eq))
            .map(|(_, c)| c)
            .sum()
    })?;
    Ok(c)
}

/// Full report for `DB(a, a')` computed exactly.
pub fn discounted_blame(
    scm: &Scm,
    a: &Action,
    a_prime: &Action,
    phi: &OutcomeSpec,
    cost: &CostModel,
    spec: &DiscountSpec,
) -> Result<BlameReport, BlameError> {
    discounted_blame_with(scm, a, a_prime, phi, cost, spec, Estimator::default())
}

pub fn discounted_blame_with(
    scm: &Scm,
    a: &Action,
    a_prime: &Action,
    phi: &OutcomeSpec,
    cost: &CostModel,
    spec: &DiscountSpec,
    estimator: Estimator,
) -> Result<BlameReport, BlameError> {
    spec.check()?;
    let m_a = apply_action(scm, a)?;
    let m_aprime = apply_action(scm, a_prime)?;
    let p_a = estimator.probability(&m_a, phi)?;
    let p_aprime = estimator.probability(&m_aprime, phi)?;
    let cost_a = expected_cost_with(scm, a, cost, estimator)?;
    let cost_aprime = expected_cost_with(scm, a_prime, cost, estimator)?;
    Ok(BlameReport::from_parts(p_a, p_aprime, cost_a, cost_aprime, spec))
}
