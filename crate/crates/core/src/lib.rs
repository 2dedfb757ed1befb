//! Causal blameworthiness and responsibility attribution for human-AI
//! decision systems.
//!
//! The crate is organised bottom-up:
//!
//! - [`scm`]: finite discrete acyclic structural causal models with exact
//!   enumeration, Monte Carlo estimation, interventions, abduction and
//!   counterfactual queries.
//! - [`blame`]: blameworthiness `δ(a, a')`, expected decision cost, discount
//!   factor `γ` and discounted blameworthiness `DB = γ·δ` for pairs of actions.
//! - [`hitl`]: confidence-thresholded human-in-the-loop pipelines replayed over
//!   recorded case logs, plus an exact SCM encoding of the same pipeline.
//! - [`attribution`]: avoidable / inevitable classification of individual
//!   errors and the parties responsible for each.
//! - [`metrics`]: quadratic weighted kappa, precision / recall / F1 and the
//!   metric-based blame conversions.
//! - [`caselog`], [`model_file`], [`synthetic`], [`report`]: file formats,
//!   the seeded scenario generator and canonical JSON emission.

pub mod attribution;
pub mod blame;
pub mod caselog;
pub mod hitl;
pub mod metrics;
pub mod model_file;
pub mod report;
pub mod scm;
pub mod synthetic;

pub use attribution::{AttributionRecord, AttributionReport, AttributionSummary, OutcomeClass, Party};
pub use blame::{Action, BlameReport, CostModel, DiscountKind, DiscountSpec, Estimator};
pub use hitl::{Case, FlagPolicy, Trace};
pub use scm::{Assignment, Domain, EndogenousVar, ExogenousVar, OutcomeSpec, Scm, ScmError};
