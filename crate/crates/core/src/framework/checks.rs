//! Runtime checks of the per-pass invariants of compliant algorithms.
//!
//! Each check returns a [`CheckOutcome`] instead of failing, so a harness can
//! collect all of them into a report. Comparisons allow a relative slack of
//! [`REL_TOL`] for floating-point accumulation.

use serde::Serialize;

use super::PassOutcome;
use crate::model::ElementId;
use crate::oracle::OracleFamily;

pub const REL_TOL: f64 = 1e-9;

/// `lhs <= rhs` up to relative tolerance.
pub fn leq(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + REL_TOL * lhs.abs().max(rhs.abs()).max(1.0)
}

#[derive(Debug, Clone, Serialize, PartialEq)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    pub lhs: f64,
    pub rhs: f64,
    #[serde(skip_serializing_if = "String::is_empty")]
    pub detail: String,
}

impl CheckOutcome {
    /// `lhs <= rhs` (with tolerance).
    pub fn at_most(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: leq(lhs, rhs),
            lhs,
            rhs,
            detail: String::new(),
        }
    }

    /// `lhs > rhs`, strictly.
    pub fn exceeds(name: impl Into<String>, lhs: f64, rhs: f64) -> Self {
        CheckOutcome {
            name: name.into(),
            passed: lhs > rhs,
            lhs,
            rhs,
            detail: String::new(),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = detail.into();
        self
    }

    pub fn flag(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        CheckOutcome {
            name: name.into(),
            passed,
            lhs: if passed { 1.0 } else { 0.0 },
            rhs: 1.0,
            detail: detail.into(),
        }
    }
}

/// `w(I) <= f(I)` for the final solution of a pass.
pub fn weight_at_most_value(out: &PassOutcome, f: &OracleFamily) -> CheckOutcome {
    CheckOutcome::at_most("weight_at_most_value", out.solution_weight(), f.eval(&out.ids()))
}

/// `Σ_e w(J_e) <= w(I)/γ` and `w(K) <= Σ_e w(J_e)`.
pub fn removed_weight_bounds(out: &PassOutcome) -> Vec<CheckOutcome> {
    let s = &out.stats;
    vec![
        CheckOutcome::at_most(
            "removed_weight_at_most_solution_over_gamma",
            s.sum_removed_weight,
            out.solution_weight() / s.gamma,
        ),
        CheckOutcome::at_most("killed_weight_at_most_removed_weight", s.killed_weight(), s.sum_removed_weight),
    ]
}

/// For every root `e` of the final solution, `w(trail(e)) <= w(e)/γ`.
/// Reported as the worst root (largest `lhs - rhs`).
pub fn trail_bounds(out: &PassOutcome) -> CheckOutcome {
    let s = &out.stats;
    let mut worst = CheckOutcome::at_most("trail_weight_at_most_root_over_gamma", 0.0, 0.0);
    let mut worst_gap = f64::NEG_INFINITY;
    for (&root, &w) in &out.weights {
        let trail = s.trail(root);
        let lhs: f64 = trail.iter().map(|id| s.born[id]).sum();
        let rhs = w / s.gamma;
        if lhs - rhs > worst_gap {
            worst_gap = lhs - rhs;
            worst = CheckOutcome::at_most("trail_weight_at_most_root_over_gamma", lhs, rhs)
                .with_detail(format!("root {root}, trail size {}", trail.len()));
        }
    }
    worst
}

/// The killing relation is a forest whose roots are final members and whose
/// nodes are all born this pass.
pub fn kill_forest(out: &PassOutcome) -> CheckOutcome {
    let s = &out.stats;
    for &child in s.kill_parent.keys() {
        let mut steps = 0usize;
        let mut x = child;
        while let Some(&p) = s.kill_parent.get(&x) {
            if !s.born.contains_key(&p) {
                return CheckOutcome::flag("kill_forest", false, format!("{p} kills but was never born"));
            }
            x = p;
            steps += 1;
            if steps > s.kill_parent.len() {
                return CheckOutcome::flag("kill_forest", false, format!("cycle through {child}"));
            }
        }
        if !out.solution.contains(x) && !s.killed.contains_key(&x) {
            return CheckOutcome::flag("kill_forest", false, format!("tree of {child} ends at unknown {x}"));
        }
    }
    for id in s.killed.keys() {
        if !s.kill_parent.contains_key(id) {
            return CheckOutcome::flag("kill_forest", false, format!("killed {id} has no parent"));
        }
    }
    CheckOutcome::flag("kill_forest", true, "")
}

/// `f(I*) <= (1/γ + 1) f(I) + w(I*)` with `w` the weights this pass assigned.
/// Needs the pass to have recorded all assigned weights.
pub fn optimum_side_bound(out: &PassOutcome, f: &OracleFamily, optimum: &[ElementId]) -> CheckOutcome {
    let name = "optimum_at_most_scaled_value_plus_weight";
    let Some(assigned) = &out.stats.assigned else {
        return CheckOutcome::flag(name, false, "pass did not record assigned weights");
    };
    let w_opt: f64 = optimum.iter().map(|id| assigned.get(id).copied().unwrap_or(0.0)).sum();
    let gamma = out.stats.gamma;
    CheckOutcome::at_most(name, f.eval(optimum), (1.0 / gamma + 1.0) * f.eval(&out.ids()) + w_opt)
}

/// Peak stored elements `<= limit`.
pub fn space_bound(out: &PassOutcome, limit: usize) -> CheckOutcome {
    CheckOutcome::at_most("peak_stored_elements", out.stats.peak_stored as f64, limit as f64)
}

/// Amortized oracle calls per processed element `<= limit`.
pub fn oracle_call_bound(out: &PassOutcome, limit: f64) -> CheckOutcome {
    CheckOutcome::at_most("oracle_calls_per_element", out.stats.calls_per_element(), limit)
}

/// Which of the optional checks apply to a pass.
#[derive(Debug, Clone, Copy)]
pub struct CheckPlan<'a> {
    /// The per-root trail bound only holds for single-element policies.
    pub trails: bool,
    pub space_limit: usize,
    pub calls_per_element: f64,
    /// A maximizer for the optimum-side check; needs recorded weights.
    pub optimum: Option<&'a [ElementId]>,
}

/// Every check that applies to a finished pass.
pub fn pass_checks(out: &PassOutcome, f: &OracleFamily, plan: CheckPlan<'_>) -> Vec<CheckOutcome> {
    let mut v = vec![weight_at_most_value(out, f)];
    v.extend(removed_weight_bounds(out));
    v.push(kill_forest(out));
    if plan.trails {
        v.push(trail_bounds(out));
    }
    v.push(space_bound(out, plan.space_limit));
    v.push(oracle_call_bound(out, plan.calls_per_element));
    if let Some(opt) = plan.optimum {
        v.push(optimum_side_bound(out, f, opt));
    }
    v
}
