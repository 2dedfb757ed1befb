//! Outcome indicators over endogenous assignments, written in disjunctive
//! normal form.

use serde::{Deserialize, Serialize};

use super::{Assignment, Scm, ScmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Comparator {
    Eq,
    Neq,
}

/// One conjunct: `var == value` or `var != value`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: String,
    pub op: Comparator,
    pub value: String,
}

impl Literal {
    pub fn eq(var: impl Into<String>, value: impl Into<String>) -> Self {
        Self { var: var.into(), op: Comparator::Eq, value: value.into() }
    }

    pub fn neq(var: impl Into<String>, value: impl Into<String>) -> Self {
        Self { var: var.into(), op: Comparator::Neq, value: value.into() }
    }

    fn holds(&self, a: &Assignment) -> bool {
        match (self.op, a.get(&self.var)) {
            (Comparator::Eq, Some(v)) => v == self.value,
            (Comparator::Neq, Some(v)) => v != self.value,
            (_, None) => false,
        }
    }
}

/// A disjunction of conjunctions of literals. The empty disjunction never
/// holds; an empty conjunction always holds.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct OutcomeSpec {
    pub clauses: Vec<Vec<Literal>>,
}

impl OutcomeSpec {
    /// The unsatisfiable outcome.
    pub fn never() -> Self {
        Self::default()
    }

    pub fn literal(lit: Literal) -> Self {
        Self { clauses: vec![vec![lit]] }
    }

    pub fn var_eq(var: impl Into<String>, value: impl Into<String>) -> Self {
        Self::literal(Literal::eq(var, value))
    }

    pub fn conjunction(lits: Vec<Literal>) -> Self {
        Self { clauses: vec![lits] }
    }

    /// Disjunction of `self` and `other`.
    pub fn or(mut self, other: OutcomeSpec) -> Self {
        self.clauses.extend(other.clauses);
        self
    }

    /// Evaluates the indicator on a (possibly partial) assignment; literals on
    /// unbound variables are false.
    pub fn holds(&self, a: &Assignment) -> bool {
        self.clauses.iter().any(|c| c.iter().all(|l| l.holds(a)))
    }

    pub(crate) fn compile(&self, scm: &Scm) -> Result<CompiledClauses, ScmError> {
        let clauses = self
            .clauses
            .iter()
            .map(|c| c.iter().map(|l| compile_literal(scm, l)).collect())
            .collect::<Result<_, _>>()?;
        Ok(CompiledClauses { clauses })
    }
}

pub(crate) fn compile_literal(scm: &Scm, lit: &Literal) -> Result<(usize, bool, usize), ScmError> {
    let j = scm.require_endogenous(&lit.var)?;
    let slot = scm.n_exogenous() + j;
    let value = scm
        .slot_domain(slot)
        .index_of(&lit.value)
        .ok_or_else(|| ScmError::ValueOutOfDomain { var: lit.var.clone(), value: lit.value.clone() })?;
    Ok((slot, lit.op == Comparator::Eq, value))
}

/// Outcome resolved to slot indices of a particular model.
#[derive(Debug, Clone)]
pub(crate) struct CompiledClauses {
    clauses: Vec<Vec<(usize, bool, usize)>>,
}

impl CompiledClauses {
    pub(crate) fn eval(&self, values: &[usize]) -> bool {
        self.clauses.iter().any(|c| c.iter().all(|&(slot, eq, v)| (values[slot] == v) == eq))
    }
}
