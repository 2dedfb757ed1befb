//! Exact SCM encoding of the HITL pipeline.
//!
//! One exogenous variable `case` ranges over the atoms of a joint
//! distribution of (truth, AI decision, confidence bin, human decision). The
//! endogenous variables are wired as
//!
//! ```text
//! truth, ai, confidence, human := lookup(case)
//! flag     := bin midpoint of `confidence` lies in [l, u]
//! decision := human if flag = 1 else ai
//! error    := decision != truth
//! ```
//!
//! The HITL action leaves the model as is; the human-only action overrides
//! `flag := 1`, so every decision goes through the human.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{Case, FlagPolicy, HitlError};
use crate::blame::{self, Action, BlameReport, CostModel, CostTerm, DiscountSpec, Override};
use crate::scm::{table_key, Domain, EndogenousVar, ExogenousVar, Literal, OutcomeSpec, Scm, NORMALIZATION_TOLERANCE};

pub const DEFAULT_BINS: usize = 10;

/// How confidences are discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "bins", rename_all = "snake_case")]
pub enum Binning {
    /// `k` bins of width `1/k`; `p` falls in bin `min(floor(p·k), k-1)`.
    EqualWidth(usize),
    /// Three bins `[0, l)`, `[l, u]`, `(u, 1]` matching the flag band exactly.
    PolicyAligned,
}

impl Default for Binning {
    fn default() -> Self {
        Binning::EqualWidth(DEFAULT_BINS)
    }
}

impl Binning {
    pub fn count(&self) -> usize {
        match *self {
            Binning::EqualWidth(k) => k,
            Binning::PolicyAligned => 3,
        }
    }

    pub fn bin_of(&self, p: f64, policy: &FlagPolicy) -> usize {
        match *self {
            Binning::EqualWidth(k) => ((p * k as f64).floor() as usize).min(k - 1),
            Binning::PolicyAligned => {
                if p < policy.lower() {
                    0
                } else if p <= policy.upper() {
                    1
                } else {
                    2
                }
            }
        }
    }

    pub fn midpoint(&self, bin: usize, policy: &FlagPolicy) -> f64 {
        match *self {
            Binning::EqualWidth(k) => (bin as f64 + 0.5) / k as f64,
            Binning::PolicyAligned => match bin {
                0 => policy.lower() / 2.0,
                1 => (policy.lower() + policy.upper()) / 2.0,
                _ => (policy.upper() + 1.0) / 2.0,
            },
        }
    }

    /// Flag value of a whole bin, decided at its midpoint.
    pub fn flagged(&self, bin: usize, policy: &FlagPolicy) -> bool {
        policy.flag(self.midpoint(bin, policy))
    }
}

/// One atom of the joint distribution behind a decision.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointAtom {
    pub truth: String,
    pub ai_decision: String,
    pub bin: usize,
    pub human_decision: String,
    pub prob: f64,
}

/// Empirical joint frequencies of a case log, in a fixed order.
pub fn empirical_joint(cases: &[Case], binning: Binning, policy: &FlagPolicy) -> Result<Vec<JointAtom>, HitlError> {
    if cases.is_empty() {
        return Err(HitlError::EmptyCaseList);
    }
    let mut counts: BTreeMap<(&str, &str, usize, &str), usize> = BTreeMap::new();
    for c in cases {
        c.check()?;
        let bin = binning.bin_of(c.ai_confidence, policy);
        *counts.entry((&c.truth, &c.ai_decision, bin, &c.human_decision)).or_default() += 1;
    }
    let n = cases.len() as f64;
    Ok(counts
        .into_iter()
        .map(|((truth, ai, bin, human), k)| JointAtom {
            truth: truth.into(),
            ai_decision: ai.into(),
            bin,
            human_decision: human.into(),
            prob: k as f64 / n,
        })
        .collect())
}

/// A HITL decision system as an SCM, with the two policies as actions.
#[derive(Debug, Clone)]
pub struct HitlScm {
    pub scm: Scm,
    /// `error = 1`.
    pub error_outcome: OutcomeSpec,
    pub hitl: Action,
    pub human_only: Action,
}

impl HitlScm {
    /// Exact `δ(hitl, human_only)`.
    pub fn delta(&self) -> Result<f64, HitlError> {
        Ok(blame::delta(&self.scm, &self.hitl, &self.human_only, &self.error_outcome)?)
    }

    /// Two-rate cost: `human_cost` when the case is flagged, `ai_cost` otherwise.
    pub fn cost_model(ai_cost: f64, human_cost: f64) -> Result<CostModel, HitlError> {
        Ok(CostModel::new(vec![
            CostTerm { when: vec![Literal::eq("flag", "1")], cost: human_cost },
            CostTerm { when: vec![Literal::eq("flag", "0")], cost: ai_cost },
        ])?)
    }

    /// Exact `DB(hitl, human_only)` under the two-rate cost model.
    pub fn blame(&self, ai_cost: f64, human_cost: f64, discount: &DiscountSpec) -> Result<BlameReport, HitlError> {
        let cost = Self::cost_model(ai_cost, human_cost)?;
        Ok(blame::discounted_blame(&self.scm, &self.hitl, &self.human_only, &self.error_outcome, &cost, discount)?)
    }
}

fn lookup(id: &str, values: Domain, f: impl Fn(usize) -> String, atoms: usize) -> EndogenousVar {
    EndogenousVar {
        id: id.into(),
        values,
        parents: vec!["case".into()],
        table: (0..atoms).map(|i| (atom_name(i), f(i))).collect(),
    }
}

fn atom_name(i: usize) -> String {
    format!("atom{i}")
}

/// Builds the SCM of a HITL system from a joint distribution over
/// (truth, AI decision, confidence bin, human decision).
pub fn build_hitl_scm(
    labels: &Domain,
    binning: Binning,
    joint: &[JointAtom],
    policy: &FlagPolicy,
) -> Result<HitlScm, HitlError> {
    if joint.is_empty() {
        return Err(HitlError::InvalidJoint("no atoms".into()));
    }
    if binning.count() == 0 {
        return Err(HitlError::InvalidJoint("binning has no bins".into()));
    }
    for a in joint {
        for label in [&a.truth, &a.ai_decision, &a.human_decision] {
            if !labels.contains(label) {
                return Err(HitlError::InvalidJoint(format!("label `{label}` is not in the label domain")));
            }
        }
        if a.bin >= binning.count() {
            return Err(HitlError::InvalidJoint(format!("bin {} out of range", a.bin)));
        }
        if !(0.0..=1.0).contains(&a.prob) {
            return Err(HitlError::InvalidJoint(format!("probability {} outside [0, 1]", a.prob)));
        }
    }
    let sum: f64 = joint.iter().map(|a| a.prob).sum();
    if (sum - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(HitlError::NonNormalizedDistribution(sum));
    }

    let n = joint.len();
    let bins = Domain::new((0..binning.count()).map(|b| format!("b{b}"))).expect("bin names are distinct");
    let binary = Domain::binary();
    let bit = |b: bool| if b { "1".to_string() } else { "0".to_string() };

    let exogenous = vec![ExogenousVar {
        id: "case".into(),
        values: Domain::new((0..n).map(atom_name)).expect("atom names are distinct"),
        probs: joint.iter().map(|a| a.prob).collect(),
    }];

    let flag_table = (0..binning.count()).map(|b| (format!("b{b}"), bit(binning.flagged(b, policy)))).collect();

    let mut decision_table = BTreeMap::new();
    let mut error_table = BTreeMap::new();
    for ai in labels.values() {
        for human in labels.values() {
            decision_table.insert(table_key(&["0", ai, human]), ai.clone());
            decision_table.insert(table_key(&["1", ai, human]), human.clone());
        }
        for truth in labels.values() {
            error_table.insert(table_key(&[ai, truth]), bit(ai != truth));
        }
    }

    let endogenous = vec![
        lookup("truth", labels.clone(), |i| joint[i].truth.clone(), n),
        lookup("ai", labels.clone(), |i| joint[i].ai_decision.clone(), n),
        lookup("confidence", bins, |i| format!("b{}", joint[i].bin), n),
        lookup("human", labels.clone(), |i| joint[i].human_decision.clone(), n),
        EndogenousVar {
            id: "flag".into(),
            values: binary.clone(),
            parents: vec!["confidence".into()],
            table: flag_table,
        },
        EndogenousVar {
            id: "decision".into(),
            values: labels.clone(),
            parents: vec!["flag".into(), "ai".into(), "human".into()],
            table: decision_table,
        },
        EndogenousVar {
            id: "error".into(),
            values: binary.clone(),
            parents: vec!["decision".into(), "truth".into()],
            table: error_table,
        },
    ];

    let scm = Scm::new(exogenous, endogenous)?;
    let human_only = Action::new(
        "human_only",
        vec![Override { var: "flag".into(), parents: vec![], table: [(String::new(), "1".to_string())].into() }],
    );
    Ok(HitlScm { scm, error_outcome: OutcomeSpec::var_eq("error", "1"), hitl: Action::identity("hitl"), human_only })
}
