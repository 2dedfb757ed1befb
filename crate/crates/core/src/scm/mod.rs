//! Finite discrete acyclic structural causal models.
//!
//! A model is a set of mutually independent exogenous variables, each with an
//! explicit distribution, and a set of endogenous variables whose mechanisms
//! are total lookup tables over the values of their parents. Mechanisms are
//! keyed by the `|`-joined parent values, exactly as they appear in model
//! files, so a model can always be serialized back to the form it was read
//! from.
//!
//! [`Scm::new`] validates and compiles a model: it checks every structural
//! invariant, computes a topological order and flattens each table into a
//! mixed-radix index so that [`Scm::solve`] is a single pass over the
//! endogenous variables.

mod builder;
mod infer;
mod outcome;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use builder::ScmBuilder;
pub use infer::{
    abduct, abduct_capped, counterfactual_from_posterior, counterfactual_probability, event_probability,
    event_probability_capped, event_probability_mc, NoisePosterior, DEFAULT_STATE_CAP,
};
pub(crate) use infer::{expectation_exact, expectation_mc};
pub(crate) use outcome::compile_literal as outcome_literal;
pub use outcome::{Comparator, Literal, OutcomeSpec};

/// Absolute tolerance used when checking that a distribution sums to one.
pub const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Separator between parent values in mechanism table keys.
pub const KEY_SEPARATOR: char = '|';

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ScmError {
    #[error("duplicate variable id `{0}`")]
    DuplicateId(String),
    #[error("invalid domain for `{var}`: {reason}")]
    InvalidDomain { var: String, reason: String },
    #[error("distribution of `{var}` is not normalized (sums to {sum})")]
    NonNormalizedDistribution { var: String, sum: f64 },
    #[error("invalid probability for `{var}`: {reason}")]
    InvalidProbability { var: String, reason: String },
    #[error("variable `{var}` references unknown parent `{parent}`")]
    DanglingParent { var: String, parent: String },
    #[error("cyclic dependency among variables {}", .vars.join(", "))]
    CyclicGraph { vars: Vec<String> },
    #[error("mechanism of `{var}` has no entry for parent values `{key}`")]
    PartialMechanism { var: String, key: String },
    #[error("mechanism of `{var}` is malformed: {reason}")]
    MalformedMechanism { var: String, reason: String },
    #[error("value `{value}` is not in the domain of `{var}`")]
    ValueOutOfDomain { var: String, value: String },
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
    #[error("`{0}` is not an endogenous variable")]
    NotEndogenous(String),
    #[error("`{0}` is not an exogenous variable")]
    NotExogenous(String),
    #[error("exogenous assignment is missing `{0}`")]
    IncompleteExogenousAssignment(String),
    #[error("exogenous state space has {states} joint states, above the cap of {cap}")]
    StateSpaceTooLarge { states: u128, cap: u64 },
    #[error("observation {0} has zero probability under the model")]
    ZeroProbabilityObservation(String),
    #[error("sample count must be at least 1")]
    InvalidSampleCount,
}

/// Ordered finite set of symbolic values.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<String>", into = "Vec<String>")]
pub struct Domain(Vec<String>);

impl Domain {
    pub fn new<I, S>(values: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let values: Vec<String> = values.into_iter().map(Into::into).collect();
        if values.is_empty() {
            return Err("domain must have at least one value".into());
        }
        let mut seen = BTreeSet::new();
        for v in &values {
            if v.is_empty() || v.contains(KEY_SEPARATOR) {
                return Err(format!("value `{v}` is empty or contains `{KEY_SEPARATOR}`"));
            }
            if !seen.insert(v.as_str()) {
                return Err(format!("duplicate value `{v}`"));
            }
        }
        Ok(Self(values))
    }

    /// The two-valued domain `["0", "1"]`.
    pub fn binary() -> Self {
        Self(vec!["0".into(), "1".into()])
    }

    pub fn values(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn index_of(&self, value: &str) -> Option<usize> {
        self.0.iter().position(|v| v == value)
    }

    pub fn contains(&self, value: &str) -> bool {
        self.index_of(value).is_some()
    }
}

impl TryFrom<Vec<String>> for Domain {
    type Error = String;

    fn try_from(values: Vec<String>) -> Result<Self, Self::Error> {
        Domain::new(values)
    }
}

impl From<Domain> for Vec<String> {
    fn from(d: Domain) -> Self {
        d.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousVar {
    pub id: String,
    pub values: Domain,
    pub probs: Vec<f64>,
}

/// Endogenous variable with a lookup-table mechanism.
///
/// `table` maps the `|`-joined values of `parents` (in order) to a value of
/// `values`. A variable without parents has the single key `""`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EndogenousVar {
    pub id: String,
    pub values: Domain,
    #[serde(default)]
    pub parents: Vec<String>,
    pub table: BTreeMap<String, String>,
}

impl EndogenousVar {
    /// A parentless variable fixed to `value`.
    pub fn constant(id: impl Into<String>, values: Domain, value: impl Into<String>) -> Self {
        let mut table = BTreeMap::new();
        table.insert(String::new(), value.into());
        Self { id: id.into(), values, parents: Vec::new(), table }
    }
}

/// Joins parent values into a mechanism table key.
pub fn table_key<S: AsRef<str>>(parent_values: &[S]) -> String {
    let mut key = String::new();
    for (i, v) in parent_values.iter().enumerate() {
        if i > 0 {
            key.push(KEY_SEPARATOR);
        }
        key.push_str(v.as_ref());
    }
    key
}

/// Bindings from variable id to value.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Assignment(pub BTreeMap<String, String>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<String>, value: impl Into<String>) -> Self {
        self.0.insert(var.into(), value.into());
        self
    }

    pub fn insert(&mut self, var: impl Into<String>, value: impl Into<String>) {
        self.0.insert(var.into(), value.into());
    }

    pub fn get(&self, var: &str) -> Option<&str> {
        self.0.get(var).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &str)> {
        self.0.iter().map(|(k, v)| (k.as_str(), v.as_str()))
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (i, (k, v)) in self.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{k}={v}")?;
        }
        f.write_str(")")
    }
}

impl<K: Into<String>, V: Into<String>> FromIterator<(K, V)> for Assignment {
    fn from_iter<T: IntoIterator<Item = (K, V)>>(iter: T) -> Self {
        Self(iter.into_iter().map(|(k, v)| (k.into(), v.into())).collect())
    }
}

/// Compiled mechanism of one endogenous variable.
#[derive(Debug, Clone)]
struct Node {
    /// Slot of each parent in the joint value vector.
    parents: Vec<usize>,
    /// Mixed-radix stride of each parent; the first parent is most significant.
    strides: Vec<usize>,
    /// Output value index per flattened parent tuple.
    table: Vec<usize>,
}

/// A validated structural causal model.
///
/// Values are addressed internally by *slot*: exogenous variable `i` lives in
/// slot `i`, endogenous variable `j` in slot `n_exogenous + j`.
#[derive(Debug, Clone)]
pub struct Scm {
    exogenous: Vec<ExogenousVar>,
    endogenous: Vec<EndogenousVar>,
    slots: HashMap<String, usize>,
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl PartialEq for Scm {
    fn eq(&self, other: &Self) -> bool {
        self.exogenous == other.exogenous && self.endogenous == other.endogenous
    }
}

impl Scm {
    /// Validates the declarative model and compiles it for evaluation.
    pub fn new(exogenous: Vec<ExogenousVar>, endogenous: Vec<EndogenousVar>) -> Result<Self, ScmError> {
        let mut slots = HashMap::new();
        for (slot, id) in exogenous.iter().map(|v| &v.id).chain(endogenous.iter().map(|v| &v.id)).enumerate() {
            if slots.insert(id.clone(), slot).is_some() {
                return Err(ScmError::DuplicateId(id.clone()));
            }
        }

        for var in &exogenous {
            check_distribution(var)?;
        }

        let n_exo = exogenous.len();
        let domain_of = |slot: usize| -> &Domain {
            if slot < n_exo {
                &exogenous[slot].values
            } else {
                &endogenous[slot - n_exo].values
            }
        };

        let mut nodes = Vec::with_capacity(endogenous.len());
        for var in &endogenous {
            let parents = var
                .parents
                .iter()
                .map(|p| {
                    slots
                        .get(p)
                        .copied()
                        .ok_or_else(|| ScmError::DanglingParent { var: var.id.clone(), parent: p.clone() })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut seen = BTreeSet::new();
            for p in &var.parents {
                if !seen.insert(p) {
                    return Err(ScmError::MalformedMechanism {
                        var: var.id.clone(),
                        reason: format!("parent `{p}` listed twice"),
                    });
                }
            }
            let domains: Vec<&Domain> = parents.iter().map(|&s| domain_of(s)).collect();
            nodes.push(compile_table(var, &parents, &domains)?);
        }

        let order = topological_order(&endogenous, &slots, n_exo)?;

        Ok(Self { exogenous, endogenous, slots, order, nodes })
    }

    pub fn builder() -> ScmBuilder {
        ScmBuilder::new()
    }

    pub fn exogenous(&self) -> &[ExogenousVar] {
        &self.exogenous
    }

    pub fn endogenous(&self) -> &[EndogenousVar] {
        &self.endogenous
    }

    /// Endogenous variable ids in evaluation order.
    pub fn topological_order(&self) -> Vec<&str> {
        self.order.iter().map(|&j| self.endogenous[j].id.as_str()).collect()
    }

    pub fn endogenous_var(&self, id: &str) -> Option<&EndogenousVar> {
        self.endogenous_index(id).map(|j| &self.endogenous[j])
    }

    pub fn domain(&self, id: &str) -> Option<&Domain> {
        self.slot(id).map(|s| self.slot_domain(s))
    }

    /// Number of joint exogenous settings, saturating at `u128::MAX`.
    pub fn state_count(&self) -> u128 {
        self.exogenous.iter().fold(1u128, |acc, v| acc.saturating_mul(v.values.len() as u128))
    }

    /// Evaluates every mechanism under a total exogenous assignment.
    pub fn solve(&self, exogenous: &Assignment) -> Result<Assignment, ScmError> {
        let mut exo = Vec::with_capacity(self.exogenous.len());
        for var in &self.exogenous {
            let value =
                exogenous.get(&var.id).ok_or_else(|| ScmError::IncompleteExogenousAssignment(var.id.clone()))?;
            let idx = var
                .values
                .index_of(value)
                .ok_or_else(|| ScmError::ValueOutOfDomain { var: var.id.clone(), value: value.to_string() })?;
            exo.push(idx);
        }
        for (id, _) in exogenous.iter() {
            match self.slot(id) {
                Some(s) if s < self.exogenous.len() => {}
                Some(_) => return Err(ScmError::NotExogenous(id.to_string())),
                None => return Err(ScmError::UnknownVariable(id.to_string())),
            }
        }
        let mut values = self.new_slots();
        values[..exo.len()].copy_from_slice(&exo);
        self.solve_slots(&mut values);
        Ok(self.endogenous_assignment(&values))
    }

    /// Returns a copy of the model with `var`'s mechanism replaced by the
    /// constant `value` (the `do(var = value)` operation).
    pub fn intervene(&self, var: &str, value: &str) -> Result<Scm, ScmError> {
        let j = self.require_endogenous(var)?;
        let target = &self.endogenous[j];
        if !target.values.contains(value) {
            return Err(ScmError::ValueOutOfDomain { var: var.into(), value: value.into() });
        }
        let mut endogenous = self.endogenous.clone();
        endogenous[j] = EndogenousVar::constant(var, target.values.clone(), value);
        Scm::new(self.exogenous.clone(), endogenous)
    }

    /// Applies a sequence of interventions in order.
    pub fn intervene_all<S: AsRef<str>>(&self, interventions: &[(S, S)]) -> Result<Scm, ScmError> {
        let mut endogenous = self.endogenous.clone();
        for (var, value) in interventions {
            let (var, value) = (var.as_ref(), value.as_ref());
            let j = self.require_endogenous(var)?;
            if !self.endogenous[j].values.contains(value) {
                return Err(ScmError::ValueOutOfDomain { var: var.into(), value: value.into() });
            }
            endogenous[j] = EndogenousVar::constant(var, self.endogenous[j].values.clone(), value);
        }
        Scm::new(self.exogenous.clone(), endogenous)
    }

    /// Replaces the parents and tables of the given variables, keeping their
    /// domains, and revalidates the result.
    pub fn replace_mechanisms(
        &self,
        overrides: &[(String, Vec<String>, BTreeMap<String, String>)],
    ) -> Result<Scm, ScmError> {
        let mut endogenous = self.endogenous.clone();
        for (var, parents, table) in overrides {
            let j = self.require_endogenous(var)?;
            endogenous[j].parents = parents.clone();
            endogenous[j].table = table.clone();
        }
        Scm::new(self.exogenous.clone(), endogenous)
    }

    // ── slot-level helpers used by inference ───────────────────────────

    pub(crate) fn n_exogenous(&self) -> usize {
        self.exogenous.len()
    }

    pub(crate) fn new_slots(&self) -> Vec<usize> {
        vec![0; self.exogenous.len() + self.endogenous.len()]
    }

    pub(crate) fn slot(&self, id: &str) -> Option<usize> {
        self.slots.get(id).copied()
    }

    pub(crate) fn slot_domain(&self, slot: usize) -> &Domain {
        let n = self.exogenous.len();
        if slot < n {
            &self.exogenous[slot].values
        } else {
            &self.endogenous[slot - n].values
        }
    }

    pub(crate) fn endogenous_index(&self, id: &str) -> Option<usize> {
        self.slot(id).filter(|&s| s >= self.exogenous.len()).map(|s| s - self.exogenous.len())
    }

    pub(crate) fn require_endogenous(&self, id: &str) -> Result<usize, ScmError> {
        match self.slot(id) {
            None => Err(ScmError::UnknownVariable(id.into())),
            Some(s) if s < self.exogenous.len() => Err(ScmError::NotEndogenous(id.into())),
            Some(s) => Ok(s - self.exogenous.len()),
        }
    }

    /// Fills the endogenous slots from the exogenous ones.
    pub(crate) fn solve_slots(&self, values: &mut [usize]) {
        let n = self.exogenous.len();
        for &j in &self.order {
            let node = &self.nodes[j];
            let mut idx = 0;
            for (&p, &stride) in node.parents.iter().zip(&node.strides) {
                idx += values[p] * stride;
            }
            values[n + j] = node.table[idx];
        }
    }

    pub(crate) fn endogenous_assignment(&self, values: &[usize]) -> Assignment {
        let n = self.exogenous.len();
        self.endogenous
            .iter()
            .enumerate()
            .map(|(j, v)| (v.id.clone(), v.values.values()[values[n + j]].clone()))
            .collect()
    }

    pub(crate) fn exogenous_assignment(&self, values: &[usize]) -> Assignment {
        self.exogenous.iter().enumerate().map(|(i, v)| (v.id.clone(), v.values.values()[values[i]].clone())).collect()
    }
}

impl Serialize for Scm {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Raw<'a> {
            exogenous: &'a [ExogenousVar],
            endogenous: &'a [EndogenousVar],
        }
        Raw { exogenous: &self.exogenous, endogenous: &self.endogenous }.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Scm {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            exogenous: Vec<ExogenousVar>,
            endogenous: Vec<EndogenousVar>,
        }
        let raw = Raw::deserialize(deserializer)?;
        Scm::new(raw.exogenous, raw.endogenous).map_err(serde::de::Error::custom)
    }
}

fn check_distribution(var: &ExogenousVar) -> Result<(), ScmError> {
    if var.probs.len() != var.values.len() {
        return Err(ScmError::InvalidProbability {
            var: var.id.clone(),
            reason: format!("{} probabilities for {} values", var.probs.len(), var.values.len()),
        });
    }
    if let Some(p) = var.probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(ScmError::InvalidProbability { var: var.id.clone(), reason: format!("{p} is outside [0, 1]") });
    }
    let sum: f64 = var.probs.iter().sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(ScmError::NonNormalizedDistribution { var: var.id.clone(), sum });
    }
    Ok(())
}

fn compile_table(var: &EndogenousVar, parents: &[usize], domains: &[&Domain]) -> Result<Node, ScmError> {
    let mut strides = vec![1usize; domains.len()];
    let mut size = 1usize;
    for i in (0..domains.len()).rev() {
        strides[i] = size;
        size = size.checked_mul(domains[i].len()).ok_or_else(|| ScmError::MalformedMechanism {
            var: var.id.clone(),
            reason: "parent state space overflows".into(),
        })?;
    }
    if var.table.len() > size {
        return Err(ScmError::MalformedMechanism {
            var: var.id.clone(),
            reason: format!("{} table entries for {} parent tuples", var.table.len(), size),
        });
    }

    let mut table = vec![usize::MAX; size];
    for (key, out) in &var.table {
        let parts: Vec<&str> = if domains.is_empty() {
            if !key.is_empty() {
                return Err(ScmError::MalformedMechanism {
                    var: var.id.clone(),
                    reason: format!("key `{key}` given for a parentless mechanism"),
                });
            }
            Vec::new()
        } else {
            key.split(KEY_SEPARATOR).collect()
        };
        if parts.len() != domains.len() {
            return Err(ScmError::MalformedMechanism {
                var: var.id.clone(),
                reason: format!("key `{key}` does not have {} parent values", domains.len()),
            });
        }
        let mut idx = 0;
        for ((part, domain), stride) in parts.iter().zip(domains).zip(&strides) {
            let v = domain.index_of(part).ok_or_else(|| ScmError::MalformedMechanism {
                var: var.id.clone(),
                reason: format!("key `{key}` uses value `{part}` outside its parent's domain"),
            })?;
            idx += v * stride;
        }
        table[idx] = var
            .values
            .index_of(out)
            .ok_or_else(|| ScmError::ValueOutOfDomain { var: var.id.clone(), value: out.clone() })?;
    }

    if let Some(missing) = table.iter().position(|&v| v == usize::MAX) {
        let mut rest = missing;
        let key: Vec<&str> = domains
            .iter()
            .zip(&strides)
            .map(|(d, &s)| {
                let v = rest / s;
                rest %= s;
                d.values()[v].as_str()
            })
            .collect();
        return Err(ScmError::PartialMechanism { var: var.id.clone(), key: table_key(&key) });
    }

    Ok(Node { parents: parents.to_vec(), strides, table })
}

/// Kahn's algorithm over endogenous-to-endogenous parent edges.
fn topological_order(
    endogenous: &[EndogenousVar],
    slots: &HashMap<String, usize>,
    n_exo: usize,
) -> Result<Vec<usize>, ScmError> {
    let n = endogenous.len();
    let mut indegree = vec![0usize; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (j, var) in endogenous.iter().enumerate() {
        for p in &var.parents {
            let s = slots[p];
            if s >= n_exo {
                indegree[j] += 1;
                children[s - n_exo].push(j);
            }
        }
    }
    let mut ready: Vec<usize> = (0..n).rev().filter(|&j| indegree[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(j) = ready.pop() {
        order.push(j);
        for &c in children[j].iter().rev() {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                ready.push(c);
            }
        }
    }
    if order.len() < n {
        let vars = (0..n).filter(|&j| indegree[j] > 0).map(|j| endogenous[j].id.clone()).collect();
        return Err(ScmError::CyclicGraph { vars });
    }
    Ok(order)
}
