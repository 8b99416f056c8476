//! The multi-pass driver.
//!
//! The first pass runs the single-element policy from scratch. Every later
//! pass primes itself with the previous solution and re-reads the stream
//! with a small γ, until a pass improves the objective by at most a factor
//! `1 + κ`. Repeat passes are where the approximation factor drops from the
//! one-pass ratio to roughly `p + ε` (weighted) or `p + 1 + ε` (submodular).

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::curvature::simple_ratio;
use crate::error::{Error, Result};
use crate::framework::checks::{self, leq, CheckOutcome, CheckPlan};
use crate::framework::{improve_solution, PassOptions, PassOutcome, WeightMode};
use crate::model::{ElementId, IndependentSet, Kind, StreamSource};
use crate::oracle::ValueOracle;
use crate::policy::SimplePolicy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum Mode {
    GraphMsm,
    GraphMwm,
    HypergraphMsm { p: usize },
    HypergraphMwm { p: usize },
    MatroidMsm { p: usize },
    MatroidMwm { p: usize },
}

impl Mode {
    /// Parses `graph_msm`, `hypergraph_mwm`, ... with `p` taken from the instance.
    pub fn parse(name: &str, p: usize) -> Result<Mode> {
        Ok(match name {
            "graph_msm" => Mode::GraphMsm,
            "graph_mwm" => Mode::GraphMwm,
            "hypergraph_msm" => Mode::HypergraphMsm { p },
            "hypergraph_mwm" => Mode::HypergraphMwm { p },
            "matroid_msm" => Mode::MatroidMsm { p },
            "matroid_mwm" => Mode::MatroidMwm { p },
            other => return Err(Error::parameter(format!("unknown mode {other:?}"))),
        })
    }

    /// The submodular mode matching an instance kind.
    pub fn msm_for(kind: Kind) -> Mode {
        match kind {
            Kind::Graph => Mode::GraphMsm,
            Kind::Hypergraph { p } => Mode::HypergraphMsm { p },
            Kind::MatroidIntersection { p } => Mode::MatroidMsm { p },
        }
    }

    /// The weighted mode matching an instance kind.
    pub fn mwm_for(kind: Kind) -> Mode {
        match kind {
            Kind::Graph => Mode::GraphMwm,
            Kind::Hypergraph { p } => Mode::HypergraphMwm { p },
            Kind::MatroidIntersection { p } => Mode::MatroidMwm { p },
        }
    }

    pub fn p(self) -> usize {
        match self {
            Mode::GraphMsm | Mode::GraphMwm => 2,
            Mode::HypergraphMsm { p }
            | Mode::HypergraphMwm { p }
            | Mode::MatroidMsm { p }
            | Mode::MatroidMwm { p } => p,
        }
    }

    /// True for the modes that use the elements' given weights.
    pub fn is_weighted(self) -> bool {
        matches!(self, Mode::GraphMwm | Mode::HypergraphMwm { .. } | Mode::MatroidMwm { .. })
    }

    pub fn weight_mode(self) -> WeightMode {
        if self.is_weighted() {
            WeightMode::Given
        } else {
            WeightMode::Marginal
        }
    }

    /// Rejects a mode that does not fit the instance kind.
    pub fn check_kind(self, kind: Kind) -> Result<()> {
        let ok = match self {
            Mode::GraphMsm | Mode::GraphMwm => kind == Kind::Graph,
            Mode::HypergraphMsm { p } | Mode::HypergraphMwm { p } => kind.is_matching() && kind.p() <= p,
            Mode::MatroidMsm { p } | Mode::MatroidMwm { p } => kind == Kind::MatroidIntersection { p },
        };
        if ok {
            Ok(())
        } else {
            Err(Error::parameter(format!("mode {self} does not apply to a {} instance", kind.name())))
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mode::GraphMsm => f.write_str("graph_msm"),
            Mode::GraphMwm => f.write_str("graph_mwm"),
            Mode::HypergraphMsm { p } => write!(f, "hypergraph_msm(p={p})"),
            Mode::HypergraphMwm { p } => write!(f, "hypergraph_mwm(p={p})"),
            Mode::MatroidMsm { p } => write!(f, "matroid_msm(p={p})"),
            Mode::MatroidMwm { p } => write!(f, "matroid_mwm(p={p})"),
        }
    }
}

/// The stopping threshold κ for a mode at parameter γ.
///
/// Submodular modes use `γ³/(p + (2p-1)γ + (p-1)γ² - γ³)`, weighted modes
/// `γ³/((p-1)(1+γ)² - γ³)`, both with `p = 2` for graphs.
pub fn kappa(mode: Mode, gamma: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::parameter(format!("gamma must be positive, got {gamma}")));
    }
    let p = mode.p() as f64;
    let g3 = gamma * gamma * gamma;
    let denom = if mode.is_weighted() {
        (p - 1.0) * (1.0 + gamma) * (1.0 + gamma) - g3
    } else {
        p + (2.0 * p - 1.0) * gamma + (p - 1.0) * gamma * gamma - g3
    };
    if denom <= 0.0 {
        return Err(Error::parameter(format!(
            "kappa undefined for {mode} at gamma = {gamma} (epsilon too large)"
        )));
    }
    Ok(g3 / denom)
}

/// Ratio guaranteed by the first pass, which the pass bound starts from.
pub fn first_pass_ratio(mode: Mode, gamma_first: f64) -> f64 {
    let r = simple_ratio(mode.p(), gamma_first);
    if mode.is_weighted() {
        r
    } else {
        r + 1.0 + 1.0 / gamma_first
    }
}

/// `2 + log_{1+κ}(ratio)`, the largest pass count the stopping rule allows
/// when the first pass is within `ratio` of the optimum.
pub fn pass_bound(kappa: f64, first_ratio: f64) -> f64 {
    2.0 + first_ratio.ln() / kappa.ln_1p()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MultiPassConfig {
    pub mode: Mode,
    pub epsilon: f64,
    pub gamma_first: f64,
    pub gamma_rest: f64,
    pub kappa: f64,
    pub pass_cap: usize,
}

/// Standard parameters for a mode and accuracy ε.
pub fn default_config(mode: Mode, epsilon: f64) -> Result<MultiPassConfig> {
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(Error::parameter(format!("epsilon must be positive, got {epsilon}")));
    }
    let p = mode.p();
    if p == 0 {
        return Err(Error::parameter("p must be at least 1"));
    }
    if mode.is_weighted() && p < 2 {
        return Err(Error::parameter("weighted modes need p >= 2"));
    }
    let pf = p as f64;
    let (gamma_first, gamma_rest) = match mode {
        Mode::GraphMsm => (1.0, epsilon / 3.0),
        Mode::GraphMwm => (1.0 / 2f64.sqrt(), 2.0 * epsilon / 3.0),
        Mode::HypergraphMsm { .. } | Mode::MatroidMsm { .. } => (1.0, epsilon / (pf + 1.0)),
        Mode::HypergraphMwm { .. } | Mode::MatroidMwm { .. } => {
            (((pf - 1.0) / pf).sqrt(), epsilon / (pf + 1.0))
        }
    };
    let kappa = kappa(mode, gamma_rest)?;
    let bound = pass_bound(kappa, first_pass_ratio(mode, gamma_first));
    let pass_cap = (bound.ceil() as usize).max(2) + 2;
    Ok(MultiPassConfig {
        mode,
        epsilon,
        gamma_first,
        gamma_rest,
        kappa,
        pass_cap,
    })
}

impl MultiPassConfig {
    pub fn with_pass_cap(mut self, cap: usize) -> Result<Self> {
        if cap < 2 {
            return Err(Error::parameter(format!("pass cap must be at least 2, got {cap}")));
        }
        self.pass_cap = cap;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for g in [self.gamma_first, self.gamma_rest] {
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::parameter(format!("gamma must be positive, got {g}")));
            }
        }
        if self.pass_cap < 2 {
            return Err(Error::parameter("pass cap must be at least 2"));
        }
        let k = kappa(self.mode, self.gamma_rest)?;
        if (k - self.kappa).abs() > 1e-12 * k.max(1e-300) {
            return Err(Error::parameter(format!(
                "kappa {} does not match gamma_rest (expected {k})",
                self.kappa
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    /// `w(M)/w_prev <= 1 + κ`.
    Converged,
    /// `w_prev = 0` and the pass found nothing either.
    Zero,
    PassCap,
}

/// Measurements of one pass, with the checks that apply to it.
#[derive(Debug, Clone, Serialize)]
pub struct PassRecord {
    pub pass: usize,
    pub gamma: f64,
    /// `f(M)` of the pass output, computed outside the oracle's accounting.
    pub value: f64,
    /// Sum of this pass's weights over its output.
    pub weight: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_prev: Option<f64>,
    pub primed_weight: f64,
    pub sum_removed_weight: f64,
    pub augmentations: u64,
    pub kills: usize,
    pub killed_weight: f64,
    pub oracle_calls: u64,
    pub calls_per_element: f64,
    pub peak_stored: usize,
    pub peak_shadows: usize,
    pub solution: Vec<ElementId>,
    pub checks: Vec<CheckOutcome>,
}

impl PassRecord {
    pub fn new(pass: usize, out: &PassOutcome, value: f64, w_prev: Option<f64>, checks: Vec<CheckOutcome>) -> Self {
        let s = &out.stats;
        PassRecord {
            pass,
            gamma: s.gamma,
            value,
            weight: out.solution_weight(),
            w_prev,
            primed_weight: s.primed_weight,
            sum_removed_weight: s.sum_removed_weight,
            augmentations: s.augmentations,
            kills: s.killed.len(),
            killed_weight: s.killed_weight(),
            oracle_calls: s.oracle_calls,
            calls_per_element: s.calls_per_element(),
            peak_stored: s.peak_stored,
            peak_shadows: s.peak_shadows,
            solution: out.ids(),
            checks,
        }
    }
}

/// Options that do not change the algorithm, only what gets checked.
#[derive(Debug, Clone, Copy, Default)]
pub struct CheckOptions<'a> {
    /// A maximizer for the optimum-side check of every pass.
    pub optimum: Option<&'a [ElementId]>,
}

#[derive(Debug, Clone)]
pub struct MultiPassRun {
    pub config: MultiPassConfig,
    pub solution: IndependentSet,
    pub value: f64,
    pub passes: Vec<PassRecord>,
    pub stop: StopReason,
    /// Checks that span passes (priming, monotonicity, final-pass retention).
    pub checks: Vec<CheckOutcome>,
    pub anomalies: Vec<String>,
    /// Lowest observed `w_τ(B_τ)/w_τ(M_τ)`, when defined.
    pub retained_fraction: Option<f64>,
}

/// Runs passes until the stopping rule or the pass cap.
pub fn run_multipass(
    source: &dyn StreamSource,
    oracle: &ValueOracle,
    config: &MultiPassConfig,
    check: CheckOptions<'_>,
) -> Result<MultiPassRun> {
    config.validate()?;
    let header = source.header();
    config.mode.check_kind(header.kind)?;
    let mode = config.mode;
    let weight_mode = mode.weight_mode();
    let family = oracle.family();
    let plan = CheckPlan {
        trails: true,
        space_limit: 2 * header.n,
        calls_per_element: 3.0,
        optimum: check.optimum,
    };
    let pass_opts = |gamma| PassOptions {
        gamma,
        weight_mode,
        record_assigned: check.optimum.is_some(),
    };

    let mut policy = SimplePolicy;
    let empty = IndependentSet::new(header.constraint.clone());
    let first = improve_solution(source, &empty, &mut policy, oracle, pass_opts(config.gamma_first))?;
    let mut passes = vec![PassRecord::new(
        1,
        &first,
        family.eval(&first.ids()),
        None,
        checks::pass_checks(&first, family, plan),
    )];
    let mut run_checks = Vec::new();
    let mut prev = first;
    loop {
        let w_prev = match weight_mode {
            WeightMode::Marginal => {
                if prev.solution.is_empty() {
                    0.0
                } else {
                    oracle.value(&prev.ids())?
                }
            }
            WeightMode::Given => prev
                .solution
                .elements()
                .map(|e| e.given_weight.unwrap_or(0.0))
                .sum(),
        };
        let out = improve_solution(source, &prev.solution, &mut policy, oracle, pass_opts(config.gamma_rest))?;
        let index = passes.len() + 1;
        run_checks.push(
            CheckOutcome::at_most("primed_weight_equals_previous_value", (out.stats.primed_weight - w_prev).abs(), 0.0)
                .with_detail(format!("pass {index}")),
        );
        let w = out.solution_weight();
        passes.push(PassRecord::new(
            index,
            &out,
            family.eval(&out.ids()),
            Some(w_prev),
            checks::pass_checks(&out, family, plan),
        ));
        let stop = if w_prev == 0.0 {
            (w == 0.0).then_some(StopReason::Zero)
        } else {
            leq(w / w_prev, 1.0 + config.kappa).then_some(StopReason::Converged)
        };
        let stop = stop.or_else(|| (passes.len() >= config.pass_cap).then_some(StopReason::PassCap));
        if let Some(reason) = stop {
            let retained = final_pass_checks(&prev, &out, config, &mut run_checks);
            let value = oracle.value(&out.ids())?;
            monotonicity_checks(&passes, config.kappa, weight_mode, &mut run_checks);
            let mut anomalies = Vec::new();
            if reason == StopReason::PassCap {
                anomalies.push(format!(
                    "pass cap {} reached before the stopping rule held",
                    config.pass_cap
                ));
            }
            return Ok(MultiPassRun {
                config: *config,
                solution: out.solution,
                value,
                passes,
                stop: reason,
                checks: run_checks,
                anomalies,
                retained_fraction: retained,
            });
        }
        prev = out;
    }
}

/// Final-pass checks: retained weight and empty trails of retained elements.
fn final_pass_checks(
    prev: &PassOutcome,
    last: &PassOutcome,
    config: &MultiPassConfig,
    out: &mut Vec<CheckOutcome>,
) -> Option<f64> {
    let both: BTreeSet<ElementId> = last.solution.ids().filter(|id| prev.solution.contains(*id)).collect();
    let empty_trails = both.iter().all(|&id| last.stats.trail(id).is_empty());
    out.push(CheckOutcome::flag(
        "retained_elements_have_empty_trails",
        empty_trails,
        format!("{} retained", both.len()),
    ));
    let w_total = last.solution_weight();
    if w_total <= 0.0 {
        return None;
    }
    let w_both: f64 = both.iter().map(|id| last.weights[id]).sum();
    let fraction = w_both / w_total;
    let (g, k) = (config.gamma_rest, config.kappa);
    let bound = (g - k) / (g + g * k);
    out.push(CheckOutcome::at_most("retained_weight_fraction", bound, fraction));
    Some(fraction)
}

/// Every repeat pass that did not stop improved by more than `1 + κ`.
fn monotonicity_checks(passes: &[PassRecord], kappa: f64, mode: WeightMode, out: &mut Vec<CheckOutcome>) {
    let objective = |r: &PassRecord| match mode {
        WeightMode::Marginal => r.value,
        WeightMode::Given => r.weight,
    };
    for i in 1..passes.len().saturating_sub(1) {
        let (before, after) = (objective(&passes[i - 1]), objective(&passes[i]));
        out.push(
            CheckOutcome::exceeds("repeat_pass_improves_by_kappa", after, (1.0 + kappa) * before)
                .with_detail(format!("pass {}", i + 1)),
        );
    }
}
