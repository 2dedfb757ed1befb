use std::path::Path;

use blamescope::attribution::{attribute_log, AttributionReport};
use blamescope::blame::{apply_action, discounted_blame_with, Action, CostModel, DiscountSpec, Estimator};
use blamescope::caselog::{cases_to_csv, read_cases_path, read_ratings_path};
use blamescope::hitl::{
    build_hitl_scm, empirical_joint, hitl_blame, run, Binning, Case, FlagPolicy, HitlBlameInput, Mode, Trace,
};
use blamescope::metrics::{
    blame_from_agreement, blame_from_f1_drop, precision_recall_f1, qwk, raw_blame_from_agreement, BinaryCounts,
    OrdinalConfusion,
};
use blamescope::model_file::ModelFile;
use blamescope::report::Report;
use blamescope::scm::{abduct, counterfactual_from_posterior, event_probability_capped, event_probability_mc};
use blamescope::synthetic::{generate, ConfidenceProfile, SyntheticConfig};
use blamescope::{Assignment, Domain, OutcomeSpec, Scm};
use serde::Serialize;
use serde_json::{json, Value};

use crate::{Cli, CliError, Command, DiscountArg, Opts, ProfileArg};

/// Runs a parsed command line and returns the text to emit.
pub fn execute(cli: &Cli) -> Result<String, CliError> {
    let o = &cli.opts;
    let (config, result) = match cli.command {
        Command::Validate => validate(o)?,
        Command::Prob => prob(o)?,
        Command::Counterfactual => counterfactual(o)?,
        Command::Blame => blame(o)?,
        Command::Hitl => hitl(o)?,
        Command::Metrics => metrics(o)?,
        Command::Gen => return gen(o),
    };
    let report = Report::new(cli.command.name(), &config, &result)
        .map_err(|e| CliError::data("Serialization", e.to_string()))?;
    Ok(report.to_canonical_json())
}

type Output = (Value, Value);

fn require<'a, T>(value: &'a Option<T>, flag: &str) -> Result<&'a T, CliError> {
    value.as_ref().ok_or_else(|| CliError::config("MissingFlag", format!("--{flag} is required")))
}

fn path_str(p: &Path) -> String {
    p.display().to_string()
}

fn load_model(path: &Path) -> Result<ModelFile, CliError> {
    ModelFile::from_path(path).map_err(|e| CliError::from(e).with_context(path_str(path)))
}

fn load_cases(path: &Path) -> Result<Vec<Case>, CliError> {
    read_cases_path(path).map_err(|e| CliError::from(e).with_context(path_str(path)))
}

fn outcome<'m>(model: &'m ModelFile, o: &Opts) -> Result<&'m OutcomeSpec, CliError> {
    let name = require(&o.outcome, "outcome")?;
    model
        .outcome(name)
        .ok_or_else(|| CliError::config("UnknownOutcome", format!("no outcome named `{name}` in the model file")))
}

fn action<'m>(model: &'m ModelFile, name: &str) -> Result<&'m Action, CliError> {
    model
        .action(name)
        .ok_or_else(|| CliError::config("UnknownAction", format!("no action named `{name}` in the model file")))
}

fn estimator(o: &Opts) -> Result<Estimator, CliError> {
    match (o.samples, o.exact) {
        (Some(0), false) => Err(CliError::config("InvalidSampleCount", "--samples must be at least 1")),
        (Some(samples), false) => Ok(Estimator::MonteCarlo { samples, seed: o.seed }),
        _ => Ok(Estimator::default()),
    }
}

/// Parses `VAR=VAL,VAR=VAL`.
fn parse_pairs(raw: &str, flag: &str) -> Result<Vec<(String, String)>, CliError> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|item| match item.split_once('=') {
            Some((k, v)) if !k.trim().is_empty() && !v.trim().is_empty() => {
                Ok((k.trim().to_string(), v.trim().to_string()))
            }
            _ => Err(CliError::config("InvalidAssignment", format!("--{flag}: expected VAR=VALUE, got `{item}`"))),
        })
        .collect()
}

fn interventions(o: &Opts) -> Result<Vec<(String, String)>, CliError> {
    o.intervene.as_deref().map_or(Ok(Vec::new()), |raw| parse_pairs(raw, "do"))
}

fn policy(o: &Opts) -> Result<FlagPolicy, CliError> {
    let l = *require(&o.l, "l")?;
    let u = *require(&o.u, "u")?;
    Ok(FlagPolicy::new(l, u)?)
}

fn probability(scm: &Scm, phi: &OutcomeSpec, est: Estimator) -> Result<f64, CliError> {
    Ok(match est {
        Estimator::Exact { state_cap } => event_probability_capped(scm, phi, state_cap)?,
        Estimator::MonteCarlo { samples, seed } => event_probability_mc(scm, phi, samples, seed)?,
    })
}

fn validate(o: &Opts) -> Result<Output, CliError> {
    if o.scm.is_none() && o.cases.is_none() && o.ratings.is_none() {
        return Err(CliError::config("MissingFlag", "give at least one of --scm, --cases, --ratings"));
    }
    let mut files = Vec::new();
    if let Some(p) = &o.scm {
        let m = load_model(p)?;
        files.push(json!({
            "kind": "scm",
            "path": path_str(p),
            "status": "ok",
            "exogenous": m.scm.exogenous().len(),
            "endogenous": m.scm.endogenous().len(),
            "topological_order": m.scm.topological_order(),
            "outcomes": m.outcomes.keys().collect::<Vec<_>>(),
            "actions": m.actions.keys().collect::<Vec<_>>(),
            "costs": m.costs.keys().collect::<Vec<_>>(),
        }));
    }
    if let Some(p) = &o.cases {
        let cases = load_cases(p)?;
        // Replaying catches duplicate ids and bad confidences.
        run(&cases, Mode::HumanOnly).map_err(|e| CliError::from(e).with_context(path_str(p)))?;
        files.push(json!({"kind": "cases", "path": path_str(p), "status": "ok", "rows": cases.len()}));
    }
    if let Some(p) = &o.ratings {
        let r = read_ratings_path(p).map_err(|e| CliError::from(e).with_context(path_str(p)))?;
        files.push(json!({"kind": "ratings", "path": path_str(p), "status": "ok", "rows": r.len()}));
    }
    let config = json!({"scm": o.scm, "cases": o.cases, "ratings": o.ratings});
    Ok((config, json!({ "files": files })))
}

fn prob(o: &Opts) -> Result<Output, CliError> {
    let model = load_model(require(&o.scm, "scm")?)?;
    let phi = outcome(&model, o)?;
    let est = estimator(o)?;
    let mut scm = model.scm.clone();
    if let Some(name) = &o.action {
        scm = apply_action(&scm, action(&model, name)?)?;
    }
    let dos = interventions(o)?;
    let scm = scm.intervene_all(&dos)?;
    let p = probability(&scm, phi, est)?;
    let config = json!({
        "scm": o.scm, "outcome": o.outcome, "action": o.action, "do": o.intervene, "estimator": est,
    });
    Ok((config, json!({ "probability": p })))
}

fn counterfactual(o: &Opts) -> Result<Output, CliError> {
    if o.samples.is_some() && !o.exact {
        return Err(CliError::config(
            "UnsupportedEstimator",
            "counterfactual queries are computed exactly; drop --samples",
        ));
    }
    let model = load_model(require(&o.scm, "scm")?)?;
    let phi = outcome(&model, o)?;
    let observation: Assignment =
        o.observe.as_deref().map_or(Ok(Vec::new()), |raw| parse_pairs(raw, "observe"))?.into_iter().collect();
    let dos = interventions(o)?;
    let posterior = abduct(&model.scm, &observation)?;
    let p = counterfactual_from_posterior(&model.scm, &posterior, &dos, phi)?;
    let config = json!({"scm": o.scm, "outcome": o.outcome, "observe": observation, "do": dos});
    let support: Vec<Value> =
        posterior.support.iter().map(|(noise, prob)| json!({"noise": noise, "prob": prob})).collect();
    let result = json!({"probability": p, "posterior_support": posterior.len(), "posterior": support});
    Ok((config, result))
}

fn discount_spec(arg: Option<DiscountArg>, fallback: Option<DiscountSpec>) -> DiscountSpec {
    match arg {
        Some(DiscountArg::Unit) => DiscountSpec::unit(),
        Some(DiscountArg::CostRatio) => DiscountSpec::cost_ratio(),
        None => fallback.unwrap_or_default(),
    }
}

fn blame(o: &Opts) -> Result<Output, CliError> {
    let model = load_model(require(&o.scm, "scm")?)?;
    let phi = outcome(&model, o)?;
    let a = action(&model, require(&o.action, "action")?)?;
    let a_prime = action(&model, require(&o.baseline, "baseline")?)?;
    let spec = discount_spec(o.discount, model.discount);
    let cost = match &o.cost {
        Some(name) => model.cost(name).cloned().ok_or_else(|| {
            CliError::config("UnknownCost", format!("no cost model named `{name}` in the model file"))
        })?,
        None if spec.kind == blamescope::DiscountKind::CostRatio => {
            return Err(CliError::config("MissingCostModel", "the cost_ratio discount needs --cost"))
        }
        None => CostModel::default(),
    };
    let est = estimator(o)?;
    let report = discounted_blame_with(&model.scm, a, a_prime, phi, &cost, &spec, est)?;
    let config = json!({
        "scm": o.scm, "outcome": o.outcome, "action": o.action, "baseline": o.baseline,
        "cost": o.cost, "discount": spec, "estimator": est,
    });
    Ok((config, serde_json::to_value(report).expect("report serializes")))
}

fn label_domain(cases: &[Case]) -> Result<Domain, CliError> {
    let labels: std::collections::BTreeSet<&str> =
        cases.iter().flat_map(|c| [c.truth.as_str(), c.ai_decision.as_str(), c.human_decision.as_str()]).collect();
    Domain::new(labels.into_iter().map(str::to_string)).map_err(|e| CliError::data("InvalidLabel", e.to_string()))
}

fn hitl(o: &Opts) -> Result<Output, CliError> {
    let policy = policy(o)?;
    let spec = discount_spec(o.discount, None);
    let path = require(&o.cases, "cases")?;
    let cases = load_cases(path)?;
    let input = HitlBlameInput { cases, policy, ai_cost: o.ai_cost, human_cost: o.human_cost, discount: spec };
    let counted = hitl_blame(&input)?;
    let attribution = AttributionReport::new(attribute_log(&input.cases, &policy)?, input.cases.len());
    let mut result = json!({"blame": counted, "attribution": attribution});
    if o.exact {
        let joint = empirical_joint(&input.cases, Binning::PolicyAligned, &policy)?;
        let m = build_hitl_scm(&label_domain(&input.cases)?, Binning::PolicyAligned, &joint, &policy)?;
        result["exact"] = serde_json::to_value(m.blame(o.ai_cost, o.human_cost, &spec)?).expect("report serializes");
    }
    let config = json!({
        "cases": o.cases, "l": policy.lower(), "u": policy.upper(), "ai_cost": o.ai_cost,
        "human_cost": o.human_cost, "discount": spec, "exact": o.exact,
    });
    Ok((config, result))
}

#[derive(Serialize)]
struct Evaluation {
    counts: BinaryCounts,
    precision: f64,
    recall: f64,
    f1: f64,
}

fn evaluate(traces: &[Trace], cases: &[Case], positive: &str) -> Result<Evaluation, CliError> {
    let predicted: Vec<&str> = traces.iter().map(|t| t.final_decision.as_str()).collect();
    let truth: Vec<&str> = cases.iter().map(|c| c.truth.as_str()).collect();
    let counts = BinaryCounts::from_predictions(&predicted, &truth, positive);
    let r = precision_recall_f1(&counts)?;
    Ok(Evaluation { counts, precision: r.precision, recall: r.recall, f1: r.f1 })
}

fn unit_interval(v: f64, flag: &str) -> Result<f64, CliError> {
    if (0.0..=1.0).contains(&v) {
        Ok(v)
    } else {
        Err(CliError::config("OutOfRange", format!("--{flag} must lie in [0, 1], got {v}")))
    }
}

fn metrics(o: &Opts) -> Result<Output, CliError> {
    let f1_pair = o.f1_hitl.is_some() || o.f1_human.is_some();
    let modes = [o.ratings.is_some(), o.kappa.is_some(), o.cases.is_some(), f1_pair];
    if modes.iter().filter(|&&m| m).count() != 1 {
        return Err(CliError::config(
            "MissingFlag",
            "give exactly one of --ratings, --kappa, --cases, or --f1-hitl with --f1-human",
        ));
    }
    if let Some(path) = &o.ratings {
        let ratings = read_ratings_path(path).map_err(|e| CliError::from(e).with_context(path_str(path)))?;
        let pairs: Vec<(usize, usize)> = ratings.iter().map(|r| (r.rater_a, r.rater_b)).collect();
        let seen = pairs.iter().map(|&(a, b)| a.max(b)).max().unwrap_or(0);
        let k = o.k.unwrap_or(seen.max(2));
        let table = OrdinalConfusion::from_pairs(&pairs, k)?;
        let kappa = qwk(&table)?;
        let result = json!({
            "metric": "qwk", "k": k, "n": table.total(), "confusion": table.counts(),
            "kappa": kappa, "blame_raw": raw_blame_from_agreement(kappa), "blame": blame_from_agreement(kappa),
        });
        return Ok((json!({"ratings": o.ratings, "k": o.k}), result));
    }
    if let Some(kappa) = o.kappa {
        if !(-1.0..=1.0).contains(&kappa) {
            return Err(CliError::config("OutOfRange", format!("--kappa must lie in [-1, 1], got {kappa}")));
        }
        let result = json!({
            "metric": "qwk", "kappa": kappa,
            "blame_raw": raw_blame_from_agreement(kappa), "blame": blame_from_agreement(kappa),
        });
        return Ok((json!({"kappa": kappa}), result));
    }
    if let Some(path) = &o.cases {
        let policy = policy(o)?;
        let cases = load_cases(path)?;
        let hitl = evaluate(&run(&cases, Mode::Hitl(policy))?, &cases, &o.positive)?;
        let human = evaluate(&run(&cases, Mode::HumanOnly)?, &cases, &o.positive)?;
        let blame = blame_from_f1_drop(hitl.f1, human.f1);
        let config = json!({"cases": o.cases, "l": policy.lower(), "u": policy.upper(), "positive": o.positive});
        let result = json!({"metric": "f1", "hitl": hitl, "human_only": human, "blame": blame});
        return Ok((config, result));
    }
    let f1_hitl = unit_interval(*require(&o.f1_hitl, "f1-hitl")?, "f1-hitl")?;
    let f1_human = unit_interval(*require(&o.f1_human, "f1-human")?, "f1-human")?;
    let result = json!({
        "metric": "f1", "f1_hitl": f1_hitl, "f1_human_only": f1_human,
        "blame": blame_from_f1_drop(f1_hitl, f1_human),
    });
    Ok((json!({"f1_hitl": f1_hitl, "f1_human": f1_human}), result))
}

fn gen(o: &Opts) -> Result<String, CliError> {
    let profile = match o.profile {
        ProfileArg::Calibrated => ConfidenceProfile::Calibrated,
        ProfileArg::Overconfident => ConfidenceProfile::Overconfident,
        ProfileArg::Uninformative => ConfidenceProfile::Uninformative,
    };
    let config = SyntheticConfig {
        seed: o.seed,
        n_cases: o.n,
        ai_accuracy: o.ai_accuracy,
        human_accuracy: o.human_accuracy,
        profile,
    };
    Ok(cases_to_csv(&generate(&config)?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairs() {
        assert_eq!(
            parse_pairs("X=1, Y = 0", "observe").unwrap(),
            vec![("X".to_string(), "1".to_string()), ("Y".to_string(), "0".to_string())]
        );
        assert!(parse_pairs("", "do").unwrap().is_empty());
        assert_eq!(parse_pairs("X", "do").unwrap_err().type_, "InvalidAssignment");
        assert_eq!(parse_pairs("=1", "do").unwrap_err().type_, "InvalidAssignment");
    }

    #[test]
    fn estimator_choice() {
        let mut o = Opts::default();
        assert_eq!(estimator(&o).unwrap(), Estimator::default());
        o.samples = Some(10);
        o.seed = 3;
        assert_eq!(estimator(&o).unwrap(), Estimator::MonteCarlo { samples: 10, seed: 3 });
        o.exact = true;
        assert_eq!(estimator(&o).unwrap(), Estimator::default());
        o.exact = false;
        o.samples = Some(0);
        assert_eq!(estimator(&o).unwrap_err().exit_code(), 2);
    }
}
