//! Per-case responsibility attribution for HITL errors.
//!
//! Each HITL error is compared with the human-only counterfactual for the same
//! case: if the human alone would also have erred the error is inevitable,
//! otherwise avoidable. Inevitable errors are further split by whether the AI
//! flagged the case.
//!
//! | class                 | responsible parties  |
//! |-----------------------|----------------------|
//! | inevitable, flagged   | human                |
//! | inevitable, unflagged | AI, flag designer    |
//! | avoidable             | AI, flag designer    |

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hitl::{decide_hitl, run, Case, FlagPolicy, HitlError, Mode, Trace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttributionError {
    #[error("trace for `{trace}` does not match case `{case}`: {reason}")]
    TraceCaseMismatch { trace: String, case: String, reason: String },
    #[error(transparent)]
    Hitl(#[from] HitlError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutcomeClass {
    Avoidable,
    InevitableFlagged,
    InevitableUnflagged,
}

impl OutcomeClass {
    pub const ALL: [OutcomeClass; 3] =
        [OutcomeClass::Avoidable, OutcomeClass::InevitableFlagged, OutcomeClass::InevitableUnflagged];
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Human,
    #[serde(rename = "ai")]
    AI,
    FlagDesigner,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionRecord {
    pub id: String,
    pub class: OutcomeClass,
    pub parties: BTreeSet<Party>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionSummary {
    pub avoidable: usize,
    pub inevitable_flagged: usize,
    pub inevitable_unflagged: usize,
    pub party_counts: BTreeMap<Party, usize>,
    pub total_errors: usize,
    pub total_cases: usize,
}

pub const ATTRIBUTION_SCHEMA: &str = "blamescope/attr/1";

/// Per-case records and their summary, as written to reports.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AttributionReport {
    pub schema: String,
    pub per_case: Vec<AttributionRecord>,
    pub summary: AttributionSummary,
}

impl AttributionReport {
    pub fn new(per_case: Vec<AttributionRecord>, total_cases: usize) -> Self {
        let summary = summarize(&per_case, total_cases);
        Self { schema: ATTRIBUTION_SCHEMA.into(), per_case, summary }
    }
}

/// Classifies a HITL trace against its case. Returns `None` when the trace is
/// not an error.
pub fn classify(trace: &Trace, case: &Case) -> Result<Option<OutcomeClass>, AttributionError> {
    let mismatch = |reason: &str| AttributionError::TraceCaseMismatch {
        trace: trace.case_id.clone(),
        case: case.id.clone(),
        reason: reason.into(),
    };
    if trace.case_id != case.id {
        return Err(mismatch("ids differ"));
    }
    let expected = if trace.flagged { &case.human_decision } else { &case.ai_decision };
    if trace.final_decision != *expected {
        return Err(mismatch("final decision disagrees with the flag"));
    }
    if trace.error != (trace.final_decision != case.truth) {
        return Err(mismatch("error bit disagrees with the truth"));
    }
    if !trace.error {
        return Ok(None);
    }
    let human_only_errs = case.human_decision != case.truth;
    Ok(Some(match (human_only_errs, trace.flagged) {
        (false, _) => OutcomeClass::Avoidable,
        (true, true) => OutcomeClass::InevitableFlagged,
        (true, false) => OutcomeClass::InevitableUnflagged,
    }))
}

pub fn attribute(class: OutcomeClass) -> BTreeSet<Party> {
    match class {
        OutcomeClass::InevitableFlagged => BTreeSet::from([Party::Human]),
        OutcomeClass::InevitableUnflagged | OutcomeClass::Avoidable => BTreeSet::from([Party::AI, Party::FlagDesigner]),
    }
}

pub fn summarize(records: &[AttributionRecord], total_cases: usize) -> AttributionSummary {
    let mut s = AttributionSummary {
        total_errors: records.len(),
        total_cases,
        party_counts: [Party::Human, Party::AI, Party::FlagDesigner].into_iter().map(|p| (p, 0)).collect(),
        ..Default::default()
    };
    for r in records {
        match r.class {
            OutcomeClass::Avoidable => s.avoidable += 1,
            OutcomeClass::InevitableFlagged => s.inevitable_flagged += 1,
            OutcomeClass::InevitableUnflagged => s.inevitable_unflagged += 1,
        }
        for p in &r.parties {
            *s.party_counts.entry(*p).or_default() += 1;
        }
    }
    s
}

/// Runs the HITL policy over a log and attributes every error.
pub fn attribute_log(cases: &[Case], policy: &FlagPolicy) -> Result<Vec<AttributionRecord>, AttributionError> {
    let traces = run(cases, Mode::Hitl(*policy))?;
    let mut records = Vec::new();
    for (trace, case) in traces.iter().zip(cases) {
        if let Some(class) = classify(trace, case)? {
            records.push(AttributionRecord { id: case.id.clone(), class, parties: attribute(class) });
        }
    }
    Ok(records)
}

/// Classifies one case directly; convenience over [`decide_hitl`] + [`classify`].
pub fn classify_case(case: &Case, policy: &FlagPolicy) -> Option<OutcomeClass> {
    classify(&decide_hitl(case, policy), case).expect("trace derived from its own case")
}
