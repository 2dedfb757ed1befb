//! Exact and sampled inference over a validated [`Scm`].
//!
//! Exact routines enumerate the joint exogenous space in a fixed odometer
//! order (last exogenous variable fastest), so every sum is accumulated in the
//! same order on every run.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::outcome::compile_literal;
use super::{Assignment, OutcomeSpec, Scm, ScmError};

/// Largest exogenous joint space enumerated by default (2^24 states).
pub const DEFAULT_STATE_CAP: u64 = 1 << 24;

fn check_cap(scm: &Scm, cap: u64) -> Result<(), ScmError> {
    let states = scm.state_count();
    if states > cap as u128 {
        return Err(ScmError::StateSpaceTooLarge { states, cap });
    }
    Ok(())
}

/// Calls `visit(values, probability)` for every joint exogenous setting with
/// positive probability, after solving the model for it.
fn for_each_setting<F>(scm: &Scm, cap: u64, mut visit: F) -> Result<(), ScmError>
where
    F: FnMut(&[usize], f64),
{
    check_cap(scm, cap)?;
    let exo = scm.exogenous();
    let n = exo.len();
    let mut values = scm.new_slots();
    loop {
        let p: f64 = (0..n).map(|i| exo[i].probs[values[i]]).product();
        if p > 0.0 {
            scm.solve_slots(&mut values);
            visit(&values, p);
        }
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            values[pos] += 1;
            if values[pos] < exo[pos].values.len() {
                break;
            }
            values[pos] = 0;
        }
    }
}

/// Exact `P(phi = 1)` with the default state cap.
pub fn event_probability(scm: &Scm, phi: &OutcomeSpec) -> Result<f64, ScmError> {
    event_probability_capped(scm, phi, DEFAULT_STATE_CAP)
}

/// The sum is clamped to `[0, 1]` to absorb rounding in the weights.
pub fn event_probability_capped(scm: &Scm, phi: &OutcomeSpec, cap: u64) -> Result<f64, ScmError> {
    let phi = phi.compile(scm)?;
    Ok(expectation_exact(scm, cap, |v| if phi.eval(v) { 1.0 } else { 0.0 })?.clamp(0.0, 1.0))
}

/// Monte Carlo estimate of `P(phi = 1)` from `samples` independent draws of
/// the exogenous variables. The estimate is a pure function of the seed.
pub fn event_probability_mc(scm: &Scm, phi: &OutcomeSpec, samples: u64, seed: u64) -> Result<f64, ScmError> {
    let phi = phi.compile(scm)?;
    expectation_mc(scm, samples, seed, |v| if phi.eval(v) { 1.0 } else { 0.0 })
}

/// `Σ_e P(e) · f(solve(e))`.
pub(crate) fn expectation_exact<F>(scm: &Scm, cap: u64, f: F) -> Result<f64, ScmError>
where
    F: Fn(&[usize]) -> f64,
{
    let mut total = 0.0;
    for_each_setting(scm, cap, |v, p| {
        let x = f(v);
        if x != 0.0 {
            total += p * x;
        }
    })?;
    Ok(total)
}

pub(crate) fn expectation_mc<F>(scm: &Scm, samples: u64, seed: u64, f: F) -> Result<f64, ScmError>
where
    F: Fn(&[usize]) -> f64,
{
    if samples == 0 {
        return Err(ScmError::InvalidSampleCount);
    }
    let sampler = Sampler::new(scm);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut values = scm.new_slots();
    let mut total = 0.0;
    for _ in 0..samples {
        sampler.draw(&mut rng, &mut values);
        scm.solve_slots(&mut values);
        total += f(&values);
    }
    Ok(total / samples as f64)
}

/// Inverse-CDF sampler for the exogenous product distribution.
struct Sampler {
    cumulative: Vec<Vec<f64>>,
    last_positive: Vec<usize>,
}

impl Sampler {
    fn new(scm: &Scm) -> Self {
        let mut cumulative = Vec::new();
        let mut last_positive = Vec::new();
        for var in scm.exogenous() {
            let mut acc = 0.0;
            cumulative.push(
                var.probs
                    .iter()
                    .map(|p| {
                        acc += p;
                        acc
                    })
                    .collect(),
            );
            last_positive.push(var.probs.iter().rposition(|&p| p > 0.0).unwrap_or(0));
        }
        Self { cumulative, last_positive }
    }

    fn draw<R: Rng>(&self, rng: &mut R, values: &mut [usize]) {
        for (i, cum) in self.cumulative.iter().enumerate() {
            let u: f64 = rng.gen();
            values[i] = cum.iter().position(|&c| u < c).unwrap_or(self.last_positive[i]);
        }
    }
}

/// Posterior over joint exogenous settings given an observation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoisePosterior {
    pub support: Vec<(Assignment, f64)>,
    #[serde(skip)]
    settings: Vec<Vec<usize>>,
}

impl NoisePosterior {
    pub fn len(&self) -> usize {
        self.support.len()
    }

    pub fn is_empty(&self) -> bool {
        self.support.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.support.iter().map(|(_, p)| p).sum()
    }
}

fn compile_observation(scm: &Scm, observation: &Assignment) -> Result<CompiledObservation, ScmError> {
    let lits = observation
        .iter()
        .map(|(var, value)| compile_literal(scm, &super::Literal::eq(var, value)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(CompiledObservation(lits.into_iter().map(|(slot, _, v)| (slot, v)).collect()))
}

struct CompiledObservation(Vec<(usize, usize)>);

impl CompiledObservation {
    fn consistent(&self, values: &[usize]) -> bool {
        self.0.iter().all(|&(slot, v)| values[slot] == v)
    }
}

/// Conditions the exogenous distribution on an observation of endogenous
/// variables by enumerating every setting and keeping the consistent ones.
pub fn abduct(scm: &Scm, observation: &Assignment) -> Result<NoisePosterior, ScmError> {
    abduct_capped(scm, observation, DEFAULT_STATE_CAP)
}

pub fn abduct_capped(scm: &Scm, observation: &Assignment, cap: u64) -> Result<NoisePosterior, ScmError> {
    let obs = compile_observation(scm, observation)?;
    let n = scm.n_exogenous();
    let mut settings = Vec::new();
    let mut weights = Vec::new();
    for_each_setting(scm, cap, |v, p| {
        if obs.consistent(v) {
            settings.push(v[..n].to_vec());
            weights.push(p);
        }
    })?;
    let total: f64 = weights.iter().sum();
    if settings.is_empty() || total <= 0.0 {
        return Err(ScmError::ZeroProbabilityObservation(observation.to_string()));
    }
    let support = settings.iter().zip(&weights).map(|(s, w)| (scm.exogenous_assignment(s), w / total)).collect();
    Ok(NoisePosterior { support, settings })
}

/// `P(phi = 1)` in the model obtained by conditioning the noise on
/// `observation` and then applying `interventions` in order.
pub fn counterfactual_probability<S: AsRef<str>>(
    scm: &Scm,
    observation: &Assignment,
    interventions: &[(S, S)],
    phi: &OutcomeSpec,
) -> Result<f64, ScmError> {
    let posterior = abduct(scm, observation)?;
    counterfactual_from_posterior(scm, &posterior, interventions, phi)
}

/// Prediction step on an already abducted posterior.
pub fn counterfactual_from_posterior<S: AsRef<str>>(
    scm: &Scm,
    posterior: &NoisePosterior,
    interventions: &[(S, S)],
    phi: &OutcomeSpec,
) -> Result<f64, ScmError> {
    let modified = scm.intervene_all(interventions)?;
    let phi = phi.compile(&modified)?;
    let n = modified.n_exogenous();
    let mut values = modified.new_slots();
    let mut total = 0.0;
    for (setting, (_, p)) in posterior.settings.iter().zip(&posterior.support) {
        values[..n].copy_from_slice(setting);
        modified.solve_slots(&mut values);
        if phi.eval(&values) {
            total += p;
        }
    }
    Ok(total.clamp(0.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scm::tests::xor_model;
    use crate::scm::Literal;
    use proptest::prelude::*;

    /// Independent check: walk the four settings by hand.
    fn xor_y1_by_hand(p1: f64, p2: f64) -> f64 {
        let mut total = 0.0;
        for (e1, w1) in [(0, 1.0 - p1), (1, p1)] {
            for (e2, w2) in [(0, 1.0 - p2), (1, p2)] {
                if (e1 ^ e2) == 1 {
                    total += w1 * w2;
                }
            }
        }
        total
    }

    #[test]
    fn xor_event_probability() {
        let m = xor_model(0.5, 0.3);
        let p = event_probability(&m, &OutcomeSpec::var_eq("Y", "1")).unwrap();
        assert!((p - xor_y1_by_hand(0.5, 0.3)).abs() < 1e-15);
        assert!((p - 0.5).abs() < 1e-15);
    }

    #[test]
    fn empty_and_exhaustive_events() {
        let m = xor_model(0.5, 0.3);
        assert_eq!(event_probability(&m, &OutcomeSpec::never()).unwrap(), 0.0);
        let all = OutcomeSpec::var_eq("X", "0").or(OutcomeSpec::var_eq("X", "1"));
        assert!((event_probability(&m, &all).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn state_cap_is_enforced() {
        let m = xor_model(0.5, 0.3);
        let err = event_probability_capped(&m, &OutcomeSpec::never(), 3).unwrap_err();
        assert_eq!(err, ScmError::StateSpaceTooLarge { states: 4, cap: 3 });
    }

    #[test]
    fn mc_is_seeded_and_close() {
        let m = xor_model(0.5, 0.3);
        let phi = OutcomeSpec::var_eq("Y", "1");
        let a = event_probability_mc(&m, &phi, 100_000, 11).unwrap();
        let b = event_probability_mc(&m, &phi, 100_000, 11).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        assert!((a - 0.5).abs() <= 0.01);
        assert_eq!(event_probability_mc(&m, &OutcomeSpec::never(), 500, 3).unwrap(), 0.0);
        let one = event_probability_mc(&m, &phi, 1, 5).unwrap();
        assert!(one == 0.0 || one == 1.0);
        assert_eq!(event_probability_mc(&m, &phi, 0, 5).unwrap_err(), ScmError::InvalidSampleCount);
    }

    #[test]
    fn mc_never_draws_zero_probability_values() {
        let m = xor_model(1.0, 0.0);
        let p = event_probability_mc(&m, &OutcomeSpec::var_eq("X", "1"), 1000, 1).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn do_forces_value() {
        let m = xor_model(0.5, 0.3).intervene("X", "1").unwrap();
        assert_eq!(event_probability(&m, &OutcomeSpec::var_eq("X", "1")).unwrap(), 1.0);
    }

    #[test]
    fn abduct_xor_observation() {
        let m = xor_model(0.5, 0.3);
        let post = abduct(&m, &Assignment::new().with("X", "1").with("Y", "0")).unwrap();
        assert_eq!(post.len(), 1);
        assert_eq!(post.support[0].0, Assignment::new().with("E1", "1").with("E2", "1"));
        assert!((post.support[0].1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn abduct_without_evidence_is_prior() {
        let m = xor_model(0.4, 0.3);
        let post = abduct(&m, &Assignment::new()).unwrap();
        assert_eq!(post.len(), 4);
        for (e, p) in &post.support {
            let w1 = if e.get("E1") == Some("1") { 0.4 } else { 0.6 };
            let w2 = if e.get("E2") == Some("1") { 0.3 } else { 0.7 };
            assert!((p - w1 * w2).abs() < 1e-15);
        }
    }

    #[test]
    fn impossible_evidence_is_an_error() {
        let m = xor_model(0.0, 0.3);
        let err = abduct(&m, &Assignment::new().with("X", "1")).unwrap_err();
        assert!(matches!(err, ScmError::ZeroProbabilityObservation(_)));
    }

    #[test]
    fn xor_counterfactuals() {
        let m = xor_model(0.5, 0.3);
        let obs = Assignment::new().with("X", "1").with("Y", "0");
        let p = counterfactual_probability(&m, &obs, &[("X", "0")], &OutcomeSpec::var_eq("Y", "1")).unwrap();
        assert_eq!(p, 1.0);
        let p = counterfactual_probability(&m, &obs, &[("X", "1")], &OutcomeSpec::var_eq("Y", "0")).unwrap();
        assert_eq!(p, 1.0);
    }

    #[test]
    fn counterfactual_collapses_to_factual() {
        let m = xor_model(0.5, 0.3);
        let obs = Assignment::new().with("X", "0").with("Y", "1");
        let phi = OutcomeSpec::conjunction(vec![Literal::eq("X", "0"), Literal::eq("Y", "1")]);
        let none: &[(&str, &str)] = &[];
        assert_eq!(counterfactual_probability(&m, &obs, none, &phi).unwrap(), 1.0);
    }

    proptest! {
        #[test]
        fn event_probability_matches_hand_enumeration(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0) {
            let m = xor_model(p1, p2);
            let p = event_probability(&m, &OutcomeSpec::var_eq("Y", "1")).unwrap();
            prop_assert!((p - xor_y1_by_hand(p1, p2)).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&p));
        }

        #[test]
        fn adding_a_disjunct_never_decreases(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, x in 0..2u8, y in 0..2u8) {
            let m = xor_model(p1, p2);
            let base = OutcomeSpec::var_eq("Y", y.to_string());
            let wider = base.clone().or(OutcomeSpec::var_eq("X", x.to_string()));
            let a = event_probability(&m, &base).unwrap();
            let b = event_probability(&m, &wider).unwrap();
            prop_assert!(b >= a - 1e-15);
        }

        #[test]
        fn collapse_law(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, y in 0..2u8) {
            let m = xor_model(p1, p2);
            let phi = OutcomeSpec::var_eq("Y", y.to_string());
            let none: &[(&str, &str)] = &[];
            let cf = counterfactual_probability(&m, &Assignment::new(), none, &phi).unwrap();
            prop_assert!((cf - event_probability(&m, &phi).unwrap()).abs() <= 1e-12);
        }

        #[test]
        fn posterior_is_normalized_and_consistent(p1 in 0.01f64..0.99, p2 in 0.01f64..0.99, y in 0..2u8) {
            let m = xor_model(p1, p2);
            let obs = Assignment::new().with("Y", y.to_string());
            let post = abduct(&m, &obs).unwrap();
            prop_assert!((post.total() - 1.0).abs() <= 1e-9);
            for (e, p) in &post.support {
                prop_assert!(*p > 0.0);
                let solved = m.solve(e).unwrap();
                prop_assert_eq!(solved.get("Y").map(str::to_string), Some(y.to_string()));
            }
        }
    }
}
