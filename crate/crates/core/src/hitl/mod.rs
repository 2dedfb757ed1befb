//! Human-in-the-loop decision pipelines over recorded case logs.
//!
//! In the HITL policy the AI decides on its own when its confidence `p` is
//! outside the band `[l, u]`, and defers to the human reviewer when
//! `l <= p <= u`. The human-only policy always uses the human's decision.
//! Replaying both policies over a log gives empirical error rates, from which
//! [`hitl_blame`] builds a [`BlameReport`] for "deploy HITL" versus "deploy
//! human-only".
//!
//! [`build_hitl_scm`] encodes the same pipeline as an exact SCM so the blame
//! module can compute the report by enumeration instead of counting.

mod model;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::blame::{BlameError, BlameReport, DiscountSpec};
use crate::scm::ScmError;

pub use model::{build_hitl_scm, empirical_joint, Binning, HitlScm, JointAtom};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HitlError {
    #[error("flag thresholds must satisfy 0 <= l < u <= 1 (got l={l}, u={u})")]
    InvalidPolicy { l: f64, u: f64 },
    #[error("case `{case}` has confidence {value} outside [0, 1]")]
    InvalidConfidence { case: String, value: f64 },
    #[error("duplicate case id `{0}`")]
    DuplicateCaseId(String),
    #[error("trace list is empty")]
    EmptyTraceList,
    #[error("case list is empty")]
    EmptyCaseList,
    #[error("decision costs must be finite and non-negative (ai={ai}, human={human})")]
    InvalidCost { ai: f64, human: f64 },
    #[error("joint distribution is not normalized (sums to {0})")]
    NonNormalizedDistribution(f64),
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),
    #[error(transparent)]
    Scm(#[from] ScmError),
    #[error(transparent)]
    Blame(#[from] BlameError),
}

/// One recorded decision instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Case {
    #[serde(rename = "case_id")]
    pub id: String,
    /// Probability the AI assigns to the positive class.
    pub ai_confidence: f64,
    pub ai_decision: String,
    pub human_decision: String,
    /// The optimal decision.
    pub truth: String,
}

impl Case {
    pub fn check(&self) -> Result<(), HitlError> {
        if !(0.0..=1.0).contains(&self.ai_confidence) {
            return Err(HitlError::InvalidConfidence { case: self.id.clone(), value: self.ai_confidence });
        }
        Ok(())
    }
}

/// Deferral band `[l, u]`, closed at both ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlagPolicy {
    l: f64,
    u: f64,
}

impl FlagPolicy {
    pub fn new(l: f64, u: f64) -> Result<Self, HitlError> {
        if !(0.0 <= l && l < u && u <= 1.0) {
            return Err(HitlError::InvalidPolicy { l, u });
        }
        Ok(Self { l, u })
    }

    /// The policy that defers every case.
    pub fn flag_everything() -> Self {
        Self { l: 0.0, u: 1.0 }
    }

    pub fn lower(&self) -> f64 {
        self.l
    }

    pub fn upper(&self) -> f64 {
        self.u
    }

    /// `ψ = 1` iff `l <= p <= u`.
    pub fn flag(&self, p: f64) -> bool {
        self.l <= p && p <= self.u
    }
}

/// Execution record of one case under one policy.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Trace {
    pub case_id: String,
    pub flagged: bool,
    pub final_decision: String,
    pub error: bool,
}

pub fn decide_hitl(case: &Case, policy: &FlagPolicy) -> Trace {
    let flagged = policy.flag(case.ai_confidence);
    let final_decision = if flagged { &case.human_decision } else { &case.ai_decision };
    Trace {
        case_id: case.id.clone(),
        flagged,
        error: *final_decision != case.truth,
        final_decision: final_decision.clone(),
    }
}

/// Human-only execution; `flagged` is set since the human always decides.
pub fn decide_human_only(case: &Case) -> Trace {
    Trace {
        case_id: case.id.clone(),
        flagged: true,
        final_decision: case.human_decision.clone(),
        error: case.human_decision != case.truth,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Mode {
    Hitl(FlagPolicy),
    HumanOnly,
}

/// Replays every case under `mode`, preserving order.
pub fn run(cases: &[Case], mode: Mode) -> Result<Vec<Trace>, HitlError> {
    let mut seen = HashSet::with_capacity(cases.len());
    for c in cases {
        c.check()?;
        if !seen.insert(c.id.as_str()) {
            return Err(HitlError::DuplicateCaseId(c.id.clone()));
        }
    }
    Ok(cases
        .iter()
        .map(|c| match mode {
            Mode::Hitl(policy) => decide_hitl(c, &policy),
            Mode::HumanOnly => decide_human_only(c),
        })
        .collect())
}

pub fn error_count(traces: &[Trace]) -> usize {
    traces.iter().filter(|t| t.error).count()
}

/// Fraction of traces whose final decision is wrong.
pub fn error_rate(traces: &[Trace]) -> Result<f64, HitlError> {
    if traces.is_empty() {
        return Err(HitlError::EmptyTraceList);
    }
    Ok(error_count(traces) as f64 / traces.len() as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct HitlBlameInput {
    pub cases: Vec<Case>,
    pub policy: FlagPolicy,
    /// Cost of a decision the AI makes alone.
    pub ai_cost: f64,
    /// Cost of a decision reviewed by the human.
    pub human_cost: f64,
    pub discount: DiscountSpec,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HitlBlame {
    #[serde(flatten)]
    pub blame: BlameReport,
    pub n_cases: usize,
    pub n_flagged: usize,
    pub flagged_fraction: f64,
    pub errors_hitl: usize,
    pub errors_human_only: usize,
}

/// Expected per-decision cost when `n_flagged` of `n` cases go to the human.
pub fn mixed_cost(n_flagged: usize, n: usize, ai_cost: f64, human_cost: f64) -> f64 {
    (n_flagged as f64 * human_cost + (n - n_flagged) as f64 * ai_cost) / n as f64
}

/// Empirical `DB(hitl, human_only)` over a case log.
pub fn hitl_blame(input: &HitlBlameInput) -> Result<HitlBlame, HitlError> {
    if input.cases.is_empty() {
        return Err(HitlError::EmptyCaseList);
    }
    let (ai, human) = (input.ai_cost, input.human_cost);
    if !(ai.is_finite() && ai >= 0.0 && human.is_finite() && human >= 0.0) {
        return Err(HitlError::InvalidCost { ai, human });
    }
    input.discount.check()?;
    let hitl = run(&input.cases, Mode::Hitl(input.policy))?;
    let human_only = run(&input.cases, Mode::HumanOnly)?;
    let n = hitl.len();
    let n_flagged = hitl.iter().filter(|t| t.flagged).count();
    let cost_a = mixed_cost(n_flagged, n, ai, human);
    let mut blame =
        BlameReport::from_parts(error_rate(&hitl)?, error_rate(&human_only)?, cost_a, human, &input.discount);
    blame.measure = "empirical".into();
    Ok(HitlBlame {
        blame,
        n_cases: n,
        n_flagged,
        flagged_fraction: n_flagged as f64 / n as f64,
        errors_hitl: error_count(&hitl),
        errors_human_only: error_count(&human_only),
    })
}
