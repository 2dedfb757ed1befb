//! Seeded synthetic case logs.
//!
//! Each case draws a binary truth with prevalence 1/2, an AI decision that is
//! right with probability `ai_accuracy` and an independent human decision that
//! is right with probability `human_accuracy`. The AI's self-confidence `q`
//! in its own decision depends on whether it was right, per the profile, and
//! is reported as the probability of class `1`: `q` if the AI said `1`,
//! otherwise `1 - q`. Confidences are rounded to 4 decimals.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::hitl::Case;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SyntheticError {
    #[error("n_cases must be at least 1")]
    NoCases,
    #[error("{name} = {value} is outside [0, 1]")]
    InvalidAccuracy { name: &'static str, value: f64 },
}

/// How the AI's confidence relates to its correctness.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConfidenceProfile {
    /// Right: `q ~ U(0.6, 1)`. Wrong: `q ~ U(0.5, 0.8)`.
    #[default]
    Calibrated,
    /// Right: `q ~ U(0.85, 1)`. Wrong: `q ~ U(0.75, 1)`.
    Overconfident,
    /// `q ~ U(0.5, 1)` regardless of correctness.
    Uninformative,
}

impl ConfidenceProfile {
    fn range(self, correct: bool) -> (f64, f64) {
        match (self, correct) {
            (ConfidenceProfile::Calibrated, true) => (0.6, 1.0),
            (ConfidenceProfile::Calibrated, false) => (0.5, 0.8),
            (ConfidenceProfile::Overconfident, true) => (0.85, 1.0),
            (ConfidenceProfile::Overconfident, false) => (0.75, 1.0),
            (ConfidenceProfile::Uninformative, _) => (0.5, 1.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SyntheticConfig {
    pub seed: u64,
    pub n_cases: usize,
    pub ai_accuracy: f64,
    pub human_accuracy: f64,
    #[serde(default)]
    pub profile: ConfidenceProfile,
}

impl SyntheticConfig {
    pub fn new(seed: u64, n_cases: usize) -> Self {
        Self { seed, n_cases, ai_accuracy: 0.85, human_accuracy: 0.9, profile: ConfidenceProfile::Calibrated }
    }

    pub fn check(&self) -> Result<(), SyntheticError> {
        if self.n_cases == 0 {
            return Err(SyntheticError::NoCases);
        }
        for (name, value) in [("ai_accuracy", self.ai_accuracy), ("human_accuracy", self.human_accuracy)] {
            if !(0.0..=1.0).contains(&value) {
                return Err(SyntheticError::InvalidAccuracy { name, value });
            }
        }
        Ok(())
    }
}

fn round4(x: f64) -> f64 {
    (x * 10_000.0).round() / 10_000.0
}

fn flip(label: &str) -> &'static str {
    if label == "1" {
        "0"
    } else {
        "1"
    }
}

pub fn generate(config: &SyntheticConfig) -> Result<Vec<Case>, SyntheticError> {
    config.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let ranges: Vec<Uniform<f64>> = [true, false]
        .iter()
        .map(|&c| {
            let (lo, hi) = config.profile.range(c);
            Uniform::new_inclusive(lo, hi)
        })
        .collect();
    let width = config.n_cases.to_string().len().max(5);
    let mut cases = Vec::with_capacity(config.n_cases);
    for i in 1..=config.n_cases {
        let truth = if rng.gen_bool(0.5) { "1" } else { "0" };
        let ai_right = rng.gen_bool(config.ai_accuracy);
        let human_right = rng.gen_bool(config.human_accuracy);
        let q = ranges[usize::from(!ai_right)].sample(&mut rng);
        let ai = if ai_right { truth } else { flip(truth) };
        let human = if human_right { truth } else { flip(truth) };
        let p = if ai == "1" { q } else { 1.0 - q };
        cases.push(Case {
            id: format!("c{i:0width$}"),
            ai_confidence: round4(p),
            ai_decision: ai.into(),
            human_decision: human.into(),
            truth: truth.into(),
        });
    }
    Ok(cases)
}
