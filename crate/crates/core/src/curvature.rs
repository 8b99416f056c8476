//! Curvature-dependent approximation bounds and the two-parameter dual run.
//!
//! A compliant algorithm with modular ratio `R(γ)` is an
//! `min{R(γ) + 1 + 1/γ, R(γ) / (1 - curv)}`-approximation for a submodular
//! objective of total curvature `curv`. The first term is minimized by one
//! γ and the second by another, so running both and keeping the better
//! solution is within the smaller bound without knowing `curv` in advance.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::framework::{improve_solution, PassOptions, PassOutcome, PassRunner, WeightMode};
use crate::model::{IndependentSet, StreamSource};
use crate::oracle::ValueOracle;
use crate::policy::PolicyKind;

/// The γ minimizing the shadow-edge policy's modular ratio, as fixed in the
/// literature (the true minimizer is about 0.7165).
pub const ZELKE_CURVED_GAMMA: f64 = 0.717;

/// Modular ratio of the shadow-edge policy:
/// `2(1 + γ) + (1/γ + 1) - γ/(1 + γ)²`.
pub fn zelke_ratio(gamma: f64) -> f64 {
    2.0 * (1.0 + gamma) + (1.0 / gamma + 1.0) - gamma / ((1.0 + gamma) * (1.0 + gamma))
}

/// Modular ratio of the single-element policy on rank-`p` systems:
/// `(1 + γ)((p - 1)/γ + p)`. At `p = 2` this is `1/γ + 3 + 2γ`.
pub fn simple_ratio(p: usize, gamma: f64) -> f64 {
    let p = p as f64;
    (1.0 + gamma) * ((p - 1.0) / gamma + p)
}

/// `R(γ)` for a policy on a rank-`p` system.
pub fn modular_ratio(policy: PolicyKind, p: usize, gamma: f64) -> f64 {
    match policy {
        PolicyKind::Zelke => zelke_ratio(gamma),
        PolicyKind::Simple => simple_ratio(p, gamma),
    }
}

/// Ratio of the f-extension regardless of curvature: `R(γ) + 1 + 1/γ`.
pub fn submodular_ratio(policy: PolicyKind, p: usize, gamma: f64) -> f64 {
    modular_ratio(policy, p, gamma) + 1.0 + 1.0 / gamma
}

/// `min{R(γ) + 1 + 1/γ, R(γ)/(1 - curv)}`; the second term is infinite at `curv = 1`.
pub fn ratio_bound(policy: PolicyKind, p: usize, gamma: f64, curv: f64) -> Result<f64> {
    if !(gamma.is_finite() && gamma > 0.0) {
        return Err(Error::parameter(format!("gamma must be positive, got {gamma}")));
    }
    if !(0.0..=1.0).contains(&curv) {
        return Err(Error::parameter(format!("curvature must lie in [0, 1], got {curv}")));
    }
    let r = modular_ratio(policy, p, gamma);
    let curved = if curv < 1.0 { r / (1.0 - curv) } else { f64::INFINITY };
    Ok((r + 1.0 + 1.0 / gamma).min(curved))
}

/// The two parameters of a dual run: the `R`-minimizer, then the
/// `(R + 1 + 1/γ)`-minimizer.
pub fn dual_gammas(policy: PolicyKind, p: usize) -> Result<(f64, f64)> {
    match policy {
        PolicyKind::Zelke => Ok((ZELKE_CURVED_GAMMA, 1.0)),
        PolicyKind::Simple => {
            if p < 2 {
                return Err(Error::parameter("the single-element dual run needs p >= 2"));
            }
            Ok((((p as f64 - 1.0) / p as f64).sqrt(), 1.0))
        }
    }
}

/// `min{R(γ_sub) + 1 + 1/γ_sub, R(γ_mod)/(1 - curv)}`, the guarantee of a dual run.
pub fn dual_bound(policy: PolicyKind, p: usize, curv: f64) -> Result<f64> {
    let (g_mod, g_sub) = dual_gammas(policy, p)?;
    let curved = ratio_bound(policy, p, g_mod, curv)?;
    let plain = ratio_bound(policy, p, g_sub, curv)?;
    Ok(curved.min(plain))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DualSchedule {
    /// Both runs advance on each element of a single read of the stream.
    Interleaved,
    /// Two replays of the stream, one per run.
    Sequential,
}

#[derive(Debug, Clone)]
pub struct DualRun {
    pub gammas: [f64; 2],
    pub runs: [PassOutcome; 2],
    pub values: [f64; 2],
    /// Index of the returned run; ties go to the first.
    pub chosen: usize,
}

impl DualRun {
    pub fn solution(&self) -> &IndependentSet {
        &self.runs[self.chosen].solution
    }

    pub fn value(&self) -> f64 {
        self.values[self.chosen]
    }
}

/// Runs `policy` at both dual parameters and keeps the solution of larger value.
pub fn dual_run(
    source: &dyn StreamSource,
    oracle: &ValueOracle,
    policy: PolicyKind,
    schedule: DualSchedule,
    record_assigned: bool,
) -> Result<DualRun> {
    let header = source.header();
    let (g0, g1) = dual_gammas(policy, header.kind.p())?;
    let mut p0 = policy.build();
    let mut p1 = policy.build();
    let empty = IndependentSet::new(header.constraint.clone());
    let opts = |g| PassOptions {
        record_assigned,
        ..PassOptions::new(g, WeightMode::Marginal)
    };
    let (out0, out1) = match schedule {
        DualSchedule::Interleaved => {
            let mut r0 = PassRunner::new(header, oracle, p0.as_mut(), opts(g0))?;
            let mut r1 = PassRunner::new(header, oracle, p1.as_mut(), opts(g1))?;
            source.replay(&mut |e| {
                r0.process(e.clone())?;
                r1.process(e)
            })?;
            (r0.finish()?, r1.finish()?)
        }
        DualSchedule::Sequential => {
            let a = improve_solution(source, &empty, p0.as_mut(), oracle, opts(g0))?;
            let b = improve_solution(source, &empty, p1.as_mut(), oracle, opts(g1))?;
            (a, b)
        }
    };
    let v0 = oracle.value(&out0.ids())?;
    let v1 = oracle.value(&out1.ids())?;
    Ok(DualRun {
        gammas: [g0, g1],
        chosen: if v1 > v0 { 1 } else { 0 },
        values: [v0, v1],
        runs: [out0, out1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Element, ElementId, Instance};
    use crate::oracle::OracleFamily;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn zelke_bound_without_curvature_help() {
        assert_eq!(ratio_bound(PolicyKind::Zelke, 2, 1.0, 1.0).unwrap(), 7.75);
    }

    #[test]
    fn zelke_modular_bound() {
        let r = ratio_bound(PolicyKind::Zelke, 2, ZELKE_CURVED_GAMMA, 0.0).unwrap();
        assert!(close(r, 5.585, 1e-3), "{r}");
    }

    #[test]
    fn simple_modular_bound_at_inverse_sqrt2() {
        let r = ratio_bound(PolicyKind::Simple, 2, 1.0 / 2f64.sqrt(), 0.0).unwrap();
        assert!(close(r, 3.0 + 8f64.sqrt(), 1e-12), "{r}");
    }

    #[test]
    fn simple_ratio_at_p2_matches_closed_form() {
        for k in 1..=20 {
            let g = k as f64 / 10.0;
            assert!(close(simple_ratio(2, g), 1.0 / g + 3.0 + 2.0 * g, 1e-12));
        }
    }

    #[test]
    fn simple_optimal_gamma_gives_table_values() {
        for p in 2..=5 {
            let (g, _) = dual_gammas(PolicyKind::Simple, p).unwrap();
            let pf = p as f64;
            assert!(close(simple_ratio(p, g), 2.0 * (pf + (pf * (pf - 1.0)).sqrt()) - 1.0, 1e-9));
            assert!(close(submodular_ratio(PolicyKind::Simple, p, 1.0), 4.0 * pf, 1e-12));
        }
    }

    #[test]
    fn half_curvature_dual_bound() {
        let b = dual_bound(PolicyKind::Zelke, 2, 0.5).unwrap();
        assert!(close(b, 7.75, 1e-12), "{b}");
    }

    #[test]
    fn parameter_errors() {
        assert!(matches!(ratio_bound(PolicyKind::Zelke, 2, 0.0, 0.0), Err(Error::Parameter(_))));
        assert!(matches!(dual_gammas(PolicyKind::Simple, 1), Err(Error::Parameter(_))));
    }

    #[test]
    fn single_edge_dual_run() {
        let inst = Instance::graph(2, vec![Element::edge(0, 1, 2)]).unwrap();
        let oracle = ValueOracle::new(OracleFamily::modular([(ElementId(0), 2.0)]).unwrap(), inst.ids());
        for schedule in [DualSchedule::Interleaved, DualSchedule::Sequential] {
            let d = dual_run(&inst, &oracle, PolicyKind::Zelke, schedule, false).unwrap();
            assert_eq!(d.runs[0].ids(), vec![ElementId(0)]);
            assert_eq!(d.runs[1].ids(), vec![ElementId(0)]);
            assert_eq!(d.value(), 2.0);
        }
    }
}
