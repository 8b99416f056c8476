//! Running one algorithm on one instance and reporting on it.

use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;

use serde::Serialize;

use crate::baselines::{exact_opt, Scored};
use crate::curvature::{dual_bound, dual_run, ratio_bound, DualSchedule, ZELKE_CURVED_GAMMA};
use crate::error::{Error, Result};
use crate::framework::checks::{self, leq, CheckOutcome, CheckPlan};
use crate::framework::{improve_solution, AugmentPolicy, PassOptions, Proposal, StateView, WeightMode};
use crate::model::{Element, ElementId, IndependentSet, InstanceHeader, Kind, StreamSource};
use crate::multipass::{default_config, run_multipass, CheckOptions, Mode, PassRecord, StopReason};
use crate::oracle::{total_curvature, ValueOracle};
use crate::policy::{PolicyKind, SimplePolicy, ZelkePolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Algo {
    Zelke,
    Mcgregor1p,
    Hypergraph1p,
    Matroid1p,
    Multipass,
    DualZelke,
    DualSimple,
}

impl Algo {
    pub const ALL: [Algo; 7] = [
        Algo::Zelke,
        Algo::Mcgregor1p,
        Algo::Hypergraph1p,
        Algo::Matroid1p,
        Algo::Multipass,
        Algo::DualZelke,
        Algo::DualSimple,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algo::Zelke => "zelke",
            Algo::Mcgregor1p => "mcgregor1p",
            Algo::Hypergraph1p => "hypergraph1p",
            Algo::Matroid1p => "matroid1p",
            Algo::Multipass => "multipass",
            Algo::DualZelke => "dual-zelke",
            Algo::DualSimple => "dual-simple",
        }
    }

    pub fn policy(self) -> PolicyKind {
        match self {
            Algo::Zelke | Algo::DualZelke => PolicyKind::Zelke,
            _ => PolicyKind::Simple,
        }
    }

    /// Whether the algorithm runs on instances of this kind.
    pub fn supports(self, kind: Kind) -> bool {
        match self {
            Algo::Zelke | Algo::Mcgregor1p | Algo::DualZelke => kind == Kind::Graph,
            Algo::Hypergraph1p => kind.is_matching(),
            Algo::Matroid1p => !kind.is_matching(),
            Algo::Multipass => true,
            Algo::DualSimple => kind.p() >= 2,
        }
    }
}

impl fmt::Display for Algo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algo {
    type Err = Error;

    fn from_str(s: &str) -> Result<Algo> {
        Algo::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::parameter(format!("unknown algorithm {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CheckLevel {
    #[default]
    Fast,
    /// Adds the optimum-side check of every pass against an exact optimum.
    Full,
}

/// Deliberate breakage, for testing that failures surface.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Fault {
    /// A policy that ignores the acceptance threshold.
    BadAugment,
    /// An oracle whose guard is missing the last element.
    Guard,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub algo: Algo,
    /// Multi-pass mode name (`graph_msm`, ...); defaults to the submodular
    /// mode of the instance kind.
    pub mode: Option<String>,
    pub gamma: Option<f64>,
    pub eps: f64,
    pub pass_cap: Option<usize>,
    pub check_level: CheckLevel,
    /// Compute the exact optimum when the instance has at most this many elements.
    pub exact_cap: usize,
    pub fault: Option<Fault>,
}

impl RunConfig {
    pub fn new(algo: Algo) -> Self {
        RunConfig {
            algo,
            mode: None,
            gamma: None,
            eps: 0.5,
            pass_cap: None,
            check_level: CheckLevel::Fast,
            exact_cap: 20,
            fault: None,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InstanceSummary {
    pub kind: Kind,
    pub n: usize,
    pub m: usize,
    pub oracle: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct Parameters {
    /// γ of each pass (or of each run of a dual run).
    pub gammas: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub kappa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass_cap: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pass_bound: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DualSummary {
    pub schedule: DualSchedule,
    pub values: [f64; 2],
    pub chosen: usize,
    /// Which single run the curvature bound alone would have needed.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sufficient_run: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub algo: Algo,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
    pub instance: InstanceSummary,
    pub parameters: Parameters,
    pub passes: Vec<PassRecord>,
    pub run_checks: Vec<CheckOutcome>,
    pub pass_count: usize,
    pub final_value: f64,
    pub solution: Vec<ElementId>,
    pub oracle_calls: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stop: Option<StopReason>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub dual: Option<DualSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<Scored>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curvature: Option<f64>,
    /// Approximation guarantee that applies to this run.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio_bound: Option<f64>,
    pub anomalies: Vec<String>,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

impl RunReport {
    pub fn failed_checks(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.passes
            .iter()
            .flat_map(|p| &p.checks)
            .chain(&self.run_checks)
            .filter(|c| !c.passed)
    }

    /// Exit status for a CLI: 0 on success, 1 when the run failed.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Failed => 1,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invariant(format!("report serialization failed: {e}")))
    }
}

/// Writes the report next to its final path and renames it into place.
pub fn write_report(report: &RunReport, path: &Path) -> Result<()> {
    let io = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let mut text = report.to_json()?;
    text.push('\n');
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    fs::write(&tmp, text).map_err(io)?;
    fs::rename(&tmp, path).map_err(io)
}

/// The γ a one-pass algorithm uses when none is given: the modular-ratio
/// minimizer for modular objectives, 1 otherwise.
pub fn default_gamma(policy: PolicyKind, p: usize, modular: bool) -> f64 {
    match (policy, modular) {
        (_, false) => 1.0,
        (PolicyKind::Zelke, true) => ZELKE_CURVED_GAMMA,
        (PolicyKind::Simple, true) if p >= 2 => ((p as f64 - 1.0) / p as f64).sqrt(),
        (PolicyKind::Simple, true) => 1.0,
    }
}

/// Guarantee of the multi-pass algorithm in `mode` at accuracy ε.
pub fn multipass_bound(mode: Mode, eps: f64) -> f64 {
    let p = mode.p() as f64;
    match mode {
        Mode::GraphMsm => 3.0 + eps,
        Mode::GraphMwm => 2.0 + 2.0 * eps,
        Mode::HypergraphMwm { .. } | Mode::MatroidMwm { .. } => p + eps,
        Mode::HypergraphMsm { .. } | Mode::MatroidMsm { .. } => p + 1.0 + eps,
    }
}

/// Ignores the threshold; used for fault injection.
struct Reckless;

impl AugmentPolicy for Reckless {
    fn name(&self) -> &'static str {
        "reckless"
    }

    fn begin_pass(&mut self, _: &InstanceHeader) -> Result<()> {
        Ok(())
    }

    fn propose(&mut self, e: &Element, view: &StateView<'_>) -> Result<Proposal> {
        // evicts everything, heavy or not
        Ok(Proposal::new([e.id], view.solution.id_vec()))
    }

    fn update_shadows(&mut self, _: &Proposal, _: &StateView<'_>, _: &[Element]) -> Result<BTreeSet<ElementId>> {
        Ok(BTreeSet::new())
    }
}

struct Outcome {
    mode: Option<String>,
    parameters: Parameters,
    passes: Vec<PassRecord>,
    run_checks: Vec<CheckOutcome>,
    solution: IndependentSet,
    value: f64,
    stop: Option<StopReason>,
    dual: Option<DualSummary>,
    anomalies: Vec<String>,
    bound: Option<f64>,
}

/// Runs one configured experiment. Misconfiguration is an `Err`; a guard
/// breach or invariant violation yields a report with status `failed`.
pub fn run_experiment(source: &dyn StreamSource, oracle: &ValueOracle, config: &RunConfig) -> Result<RunReport> {
    let header = source.header();
    if !config.algo.supports(header.kind) {
        return Err(Error::parameter(format!(
            "{} does not run on {} instances",
            config.algo,
            header.kind.name()
        )));
    }
    let one_pass = matches!(config.algo, Algo::Zelke | Algo::Mcgregor1p | Algo::Hypergraph1p | Algo::Matroid1p);
    if config.fault == Some(Fault::BadAugment) && !one_pass {
        return Err(Error::parameter(format!("the bad-augment fault needs a one-pass algorithm, not {}", config.algo)));
    }
    let family = oracle.family();
    let ground = oracle.ground_vec();
    let summary = InstanceSummary {
        kind: header.kind,
        n: header.n,
        m: header.m,
        oracle: family.name(),
    };

    // offline side information, computed on a separate counter
    let offline = oracle.fresh();
    let exact = if header.m <= config.exact_cap {
        Some(exact_opt(&materialize(source)?, &offline, config.exact_cap)?)
    } else {
        None
    };
    if config.check_level == CheckLevel::Full && exact.is_none() {
        return Err(Error::parameter(format!(
            "check level full needs an exact optimum, but {} elements exceed the cap of {}",
            header.m, config.exact_cap
        )));
    }
    let curvature = if ground.len() <= 4096 { Some(total_curvature(&offline, &ground)?) } else { None };
    let optimum = match config.check_level {
        CheckLevel::Full => exact.as_ref().map(|e| e.ids.as_slice()),
        CheckLevel::Fast => None,
    };

    let run_oracle = match config.fault {
        Some(Fault::Guard) => ValueOracle::new(family.clone(), ground.iter().copied().take(ground.len().saturating_sub(1))),
        _ => oracle.fresh(),
    };
    let result = execute(source, &run_oracle, config, curvature, optimum);

    let (outcome, failure) = match result {
        Ok(o) => (Some(o), None),
        Err(e) if e.is_run_failure() => (None, Some(e.to_string())),
        Err(e) => return Err(e),
    };
    let mut report = RunReport {
        algo: config.algo,
        mode: None,
        instance: summary,
        parameters: Parameters {
            gammas: Vec::new(),
            epsilon: None,
            kappa: None,
            pass_cap: None,
            pass_bound: None,
        },
        passes: Vec::new(),
        run_checks: Vec::new(),
        pass_count: 0,
        final_value: 0.0,
        solution: Vec::new(),
        oracle_calls: run_oracle.call_count(),
        stop: None,
        dual: None,
        exact,
        ratio: None,
        curvature,
        ratio_bound: None,
        anomalies: Vec::new(),
        status: Status::Failed,
        failure,
    };
    if let Some(o) = outcome {
        report.mode = o.mode;
        report.parameters = o.parameters;
        report.pass_count = o.passes.len();
        report.passes = o.passes;
        report.run_checks = o.run_checks;
        report.final_value = o.value;
        report.solution = o.solution.id_vec();
        report.stop = o.stop;
        report.dual = o.dual;
        report.anomalies = o.anomalies;
        report.ratio_bound = o.bound;
        if let Some(ex) = &report.exact {
            report.ratio = if o.value > 0.0 {
                Some(ex.value / o.value)
            } else if ex.value == 0.0 {
                Some(1.0)
            } else {
                report.anomalies.push("zero value against a positive optimum".into());
                None
            };
            report.run_checks.push(CheckOutcome::at_most("value_at_most_optimum", o.value, ex.value));
            if let (Some(bound), Some(ratio)) = (o.bound, report.ratio) {
                report.run_checks.push(CheckOutcome::at_most("ratio_within_bound", ratio, bound));
            }
        }
        report.status = if report.failed_checks().next().is_none() {
            Status::Ok
        } else {
            Status::Failed
        };
        if report.status == Status::Failed {
            let names: Vec<&str> = report.failed_checks().map(|c| c.name.as_str()).collect();
            report.failure = Some(format!("failed checks: {}", names.join(", ")));
        }
    }
    Ok(report)
}

fn materialize(source: &dyn StreamSource) -> Result<crate::model::Instance> {
    let h = source.header();
    let mut els = Vec::with_capacity(h.m);
    source.replay(&mut |e| {
        els.push(e);
        Ok(())
    })?;
    crate::model::Instance::new(h.kind, h.n, els, h.matroids().to_vec())
}

fn execute(
    source: &dyn StreamSource,
    oracle: &ValueOracle,
    config: &RunConfig,
    curvature: Option<f64>,
    optimum: Option<&[ElementId]>,
) -> Result<Outcome> {
    let header = source.header();
    let p = header.kind.p();
    let family = oracle.family();
    let modular = family.is_modular();
    let plan = |trails| CheckPlan {
        trails,
        space_limit: 2 * header.n,
        calls_per_element: 3.0,
        optimum,
    };
    match config.algo {
        Algo::Zelke | Algo::Mcgregor1p | Algo::Hypergraph1p | Algo::Matroid1p => {
            let policy_kind = config.algo.policy();
            let gamma = config.gamma.unwrap_or_else(|| default_gamma(policy_kind, p, modular));
            let mut zelke = ZelkePolicy::default();
            let mut simple = SimplePolicy;
            let mut reckless = Reckless;
            let policy: &mut dyn AugmentPolicy = match (config.fault, policy_kind) {
                (Some(Fault::BadAugment), _) => &mut reckless,
                (_, PolicyKind::Zelke) => &mut zelke,
                (_, PolicyKind::Simple) => &mut simple,
            };
            let opts = PassOptions {
                gamma,
                weight_mode: WeightMode::Marginal,
                record_assigned: optimum.is_some(),
            };
            let empty = IndependentSet::new(header.constraint.clone());
            let out = improve_solution(source, &empty, policy, oracle, opts)?;
            let value = oracle.value(&out.ids())?;
            let checks = checks::pass_checks(&out, family, plan(policy_kind == PolicyKind::Simple));
            let bound = curvature.map(|c| ratio_bound(policy_kind, p, gamma, c)).transpose()?;
            Ok(Outcome {
                mode: None,
                parameters: Parameters {
                    gammas: vec![gamma],
                    epsilon: None,
                    kappa: None,
                    pass_cap: None,
                    pass_bound: None,
                },
                passes: vec![PassRecord::new(1, &out, family.eval(&out.ids()), None, checks)],
                run_checks: Vec::new(),
                solution: out.solution,
                value,
                stop: None,
                dual: None,
                anomalies: Vec::new(),
                bound,
            })
        }
        Algo::Multipass => {
            let mode = match &config.mode {
                Some(name) => Mode::parse(name, p)?,
                None => Mode::msm_for(header.kind),
            };
            let mut cfg = default_config(mode, config.eps)?;
            if let Some(g) = config.gamma {
                cfg.gamma_rest = g;
                cfg.kappa = crate::multipass::kappa(mode, g)?;
            }
            if let Some(cap) = config.pass_cap {
                cfg = cfg.with_pass_cap(cap)?;
            }
            let run = run_multipass(source, oracle, &cfg, CheckOptions { optimum })?;
            let mut gammas = vec![cfg.gamma_first];
            gammas.extend(std::iter::repeat_n(cfg.gamma_rest, run.passes.len() - 1));
            let bound = crate::multipass::pass_bound(cfg.kappa, crate::multipass::first_pass_ratio(mode, cfg.gamma_first));
            let mut run_checks = run.checks;
            run_checks.push(CheckOutcome::at_most("pass_count_within_cap", run.passes.len() as f64, cfg.pass_cap as f64));
            Ok(Outcome {
                mode: Some(mode.to_string()),
                parameters: Parameters {
                    gammas,
                    epsilon: Some(cfg.epsilon),
                    kappa: Some(cfg.kappa),
                    pass_cap: Some(cfg.pass_cap),
                    pass_bound: Some(bound),
                },
                passes: run.passes,
                run_checks,
                solution: run.solution,
                value: run.value,
                stop: Some(run.stop),
                dual: None,
                anomalies: run.anomalies,
                bound: (config.gamma.is_none()).then(|| multipass_bound(mode, config.eps)),
            })
        }
        Algo::DualZelke | Algo::DualSimple => {
            let policy_kind = config.algo.policy();
            let schedule = DualSchedule::Interleaved;
            let d = dual_run(source, oracle, policy_kind, schedule, optimum.is_some())?;
            let trails = policy_kind == PolicyKind::Simple;
            let passes = d
                .runs
                .iter()
                .enumerate()
                .map(|(i, out)| {
                    PassRecord::new(i + 1, out, family.eval(&out.ids()), None, checks::pass_checks(out, family, plan(trails)))
                })
                .collect();
            let bound = curvature.map(|c| dual_bound(policy_kind, p, c)).transpose()?;
            let sufficient_run = match curvature {
                Some(c) => {
                    let curved = ratio_bound(policy_kind, p, d.gammas[0], c)?;
                    let plain = ratio_bound(policy_kind, p, d.gammas[1], c)?;
                    Some(if leq(curved, plain) { 0 } else { 1 })
                }
                None => None,
            };
            let solution = d.solution().clone();
            Ok(Outcome {
                mode: None,
                parameters: Parameters {
                    gammas: d.gammas.to_vec(),
                    epsilon: None,
                    kappa: None,
                    pass_cap: None,
                    pass_bound: None,
                },
                passes,
                run_checks: vec![CheckOutcome::at_most(
                    "dual_value_is_max_of_runs",
                    (d.value() - d.values[0].max(d.values[1])).abs(),
                    0.0,
                )],
                solution,
                value: d.value(),
                stop: None,
                dual: Some(DualSummary {
                    schedule,
                    values: d.values,
                    chosen: d.chosen,
                    sufficient_run,
                }),
                anomalies: Vec::new(),
                bound,
            })
        }
    }
}
