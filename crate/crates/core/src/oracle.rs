//! Value oracles for monotone, proper, submodular set functions.
//!
//! [`OracleFamily`] holds the immutable parameters of a set function;
//! [`ValueOracle`] wraps one with a ground-set guard and a call counter.
//! Every query of a streaming run goes through a `ValueOracle`, so a run
//! that asks about an element outside the ground set aborts with
//! [`Error::GuardViolation`].

use std::cell::Cell;
use std::collections::BTreeSet;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::model::ElementId;

/// Parameters of a built-in set function. Per-element data is indexed by
/// element id; ids without data contribute nothing.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleFamily {
    /// `f(S) = Σ_{e∈S} w(e)`.
    Modular { weights: Vec<f64> },
    /// `f(S) = |⋃_{e∈S} U(e)|` for subsets `U(e)` of a finite universe.
    Coverage { sets: Vec<Vec<u32>>, masks: Option<Vec<u128>> },
    /// `f(S) = min(B, Σ_{e∈S} w(e))`.
    SaturatedAdditive { weights: Vec<f64>, cap: f64 },
}

fn dense<T: Clone + Default>(items: impl IntoIterator<Item = (ElementId, T)>) -> Vec<T> {
    let mut out: Vec<T> = Vec::new();
    for (id, x) in items {
        if out.len() <= id.index() {
            out.resize(id.index() + 1, T::default());
        }
        out[id.index()] = x;
    }
    out
}

fn check_weights(weights: &[f64]) -> Result<()> {
    match weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
        Some(w) => Err(Error::input(format!("oracle weight {w} must be finite and nonnegative"))),
        None => Ok(()),
    }
}

impl OracleFamily {
    pub fn modular(weights: impl IntoIterator<Item = (ElementId, f64)>) -> Result<Self> {
        let weights = dense(weights);
        check_weights(&weights)?;
        Ok(OracleFamily::Modular { weights })
    }

    pub fn coverage(sets: impl IntoIterator<Item = (ElementId, Vec<u32>)>) -> Self {
        let mut sets = dense(sets);
        for s in &mut sets {
            s.sort_unstable();
            s.dedup();
        }
        let masks = if sets.iter().flatten().all(|&x| x < 128) {
            Some(
                sets.iter()
                    .map(|s| s.iter().fold(0u128, |m, &x| m | (1u128 << x)))
                    .collect(),
            )
        } else {
            None
        };
        OracleFamily::Coverage { sets, masks }
    }

    pub fn saturated_additive(
        weights: impl IntoIterator<Item = (ElementId, f64)>,
        cap: f64,
    ) -> Result<Self> {
        let weights = dense(weights);
        check_weights(&weights)?;
        if !(cap.is_finite() && cap >= 0.0) {
            return Err(Error::input(format!("saturation cap {cap} must be finite and nonnegative")));
        }
        Ok(OracleFamily::SaturatedAdditive { weights, cap })
    }

    pub fn name(&self) -> &'static str {
        match self {
            OracleFamily::Modular { .. } => "modular",
            OracleFamily::Coverage { .. } => "coverage",
            OracleFamily::SaturatedAdditive { .. } => "saturated_additive",
        }
    }

    pub fn is_modular(&self) -> bool {
        matches!(self, OracleFamily::Modular { .. })
    }

    /// Per-element weight of a modular function.
    pub fn modular_weight(&self, e: ElementId) -> Option<f64> {
        match self {
            OracleFamily::Modular { weights } => Some(weights.get(e.index()).copied().unwrap_or(0.0)),
            _ => None,
        }
    }

    /// Evaluates on a sorted, duplicate-free id slice.
    fn eval_sorted(&self, ids: &[ElementId]) -> f64 {
        let sum = |weights: &[f64]| -> f64 {
            ids.iter()
                .map(|e| weights.get(e.index()).copied().unwrap_or(0.0))
                .sum()
        };
        match self {
            OracleFamily::Modular { weights } => sum(weights),
            OracleFamily::SaturatedAdditive { weights, cap } => sum(weights).min(*cap),
            OracleFamily::Coverage { sets, masks } => {
                if let Some(masks) = masks {
                    let m = ids
                        .iter()
                        .filter_map(|e| masks.get(e.index()))
                        .fold(0u128, |acc, m| acc | m);
                    m.count_ones() as f64
                } else {
                    let mut covered: Vec<u32> = ids
                        .iter()
                        .filter_map(|e| sets.get(e.index()))
                        .flatten()
                        .copied()
                        .collect();
                    covered.sort_unstable();
                    covered.dedup();
                    covered.len() as f64
                }
            }
        }
    }

    /// Evaluates `f(S)` without any guard or accounting.
    pub fn eval(&self, set: &[ElementId]) -> f64 {
        let mut ids = set.to_vec();
        ids.sort_unstable();
        ids.dedup();
        self.eval_sorted(&ids)
    }
}

/// A guarded, call-counted evaluator of a set function.
///
/// The counter is per-wrapper state: use [`ValueOracle::fresh`] to hand an
/// independent counter to each concurrent run while sharing the parameters.
#[derive(Debug)]
pub struct ValueOracle {
    family: Arc<OracleFamily>,
    ground: Arc<BTreeSet<ElementId>>,
    calls: Cell<u64>,
}

impl ValueOracle {
    pub fn new(family: OracleFamily, ground: impl IntoIterator<Item = ElementId>) -> Self {
        ValueOracle {
            family: Arc::new(family),
            ground: Arc::new(ground.into_iter().collect()),
            calls: Cell::new(0),
        }
    }

    /// Same function and guard, new zeroed counter.
    pub fn fresh(&self) -> Self {
        ValueOracle {
            family: Arc::clone(&self.family),
            ground: Arc::clone(&self.ground),
            calls: Cell::new(0),
        }
    }

    pub fn family(&self) -> &OracleFamily {
        &self.family
    }

    pub fn ground(&self) -> &BTreeSet<ElementId> {
        &self.ground
    }

    pub fn ground_vec(&self) -> Vec<ElementId> {
        self.ground.iter().copied().collect()
    }

    /// `f(S)`. Counts one call; aborts if `S` leaves the ground set.
    pub fn value(&self, set: &[ElementId]) -> Result<f64> {
        self.calls.set(self.calls.get() + 1);
        let mut ids = set.to_vec();
        ids.sort_unstable();
        ids.dedup();
        if let Some(bad) = ids.iter().find(|e| !self.ground.contains(e)) {
            return Err(Error::GuardViolation(*bad));
        }
        Ok(self.family.eval_sorted(&ids))
    }

    /// `f(S + e) - f(S)`, using `cached_base = f(S)` when supplied.
    pub fn marginal(&self, set: &[ElementId], e: ElementId, cached_base: Option<f64>) -> Result<f64> {
        if set.contains(&e) {
            return Err(Error::input(format!("marginal of {e} on a set already containing it")));
        }
        let base = match cached_base {
            Some(v) => v,
            None => self.value(set)?,
        };
        let mut with = set.to_vec();
        with.push(e);
        Ok(self.value(&with)? - base)
    }

    pub fn call_count(&self) -> u64 {
        self.calls.get()
    }

    pub fn reset_calls(&self) {
        self.calls.set(0);
    }
}

/// Total curvature `1 - min_e (f(E) - f(E - e)) / f({e})` over `ground`.
///
/// Diminishing returns makes `A = E - e` the minimizing set in the curvature
/// definition, so this needs `2|E| + 1` queries instead of an enumeration.
/// Elements with `f({e}) = 0` are skipped; if all are, the result is 0.
pub fn total_curvature(oracle: &ValueOracle, ground: &[ElementId]) -> Result<f64> {
    let full = oracle.value(ground)?;
    let mut min_ratio: Option<f64> = None;
    for (i, &e) in ground.iter().enumerate() {
        let single = oracle.value(&[e])?;
        if single <= 0.0 {
            continue;
        }
        let without: Vec<ElementId> = ground
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, &x)| x)
            .collect();
        let ratio = (full - oracle.value(&without)?) / single;
        min_ratio = Some(min_ratio.map_or(ratio, |r: f64| r.min(ratio)));
    }
    Ok(min_ratio.map_or(0.0, |r| (1.0 - r).clamp(0.0, 1.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn e(i: u32) -> ElementId {
        ElementId(i)
    }

    fn coverage_pair() -> ValueOracle {
        ValueOracle::new(
            OracleFamily::coverage([(e(1), vec![1, 2]), (e(2), vec![2, 3])]),
            [e(1), e(2)],
        )
    }

    fn saturated() -> ValueOracle {
        ValueOracle::new(
            OracleFamily::saturated_additive([(e(1), 3.0), (e(2), 4.0)], 5.0).unwrap(),
            [e(1), e(2)],
        )
    }

    #[test]
    fn coverage_value_is_union_size() {
        assert_eq!(coverage_pair().value(&[e(1), e(2)]).unwrap(), 3.0);
    }

    #[test]
    fn empty_set_is_zero() {
        assert_eq!(coverage_pair().value(&[]).unwrap(), 0.0);
        assert_eq!(saturated().value(&[]).unwrap(), 0.0);
        let m = ValueOracle::new(OracleFamily::modular([(e(0), 2.0)]).unwrap(), [e(0)]);
        assert_eq!(m.value(&[]).unwrap(), 0.0);
    }

    #[test]
    fn saturated_caps_the_sum() {
        assert_eq!(saturated().value(&[e(1), e(2)]).unwrap(), 5.0);
    }

    #[test]
    fn marginals() {
        assert_eq!(coverage_pair().marginal(&[e(1)], e(2), None).unwrap(), 1.0);
        let m = ValueOracle::new(OracleFamily::modular([(e(0), 5.0)]).unwrap(), [e(0)]);
        assert_eq!(m.marginal(&[], e(0), None).unwrap(), 5.0);
        assert_eq!(saturated().marginal(&[e(1)], e(2), None).unwrap(), 2.0);
    }

    #[test]
    fn call_counting() {
        let o = coverage_pair();
        assert_eq!(o.call_count(), 0);
        o.value(&[e(1)]).unwrap();
        assert_eq!(o.call_count(), 1);
        o.reset_calls();
        o.marginal(&[e(1)], e(2), None).unwrap();
        assert_eq!(o.call_count(), 2);
        o.marginal(&[e(1)], e(2), Some(2.0)).unwrap();
        assert_eq!(o.call_count(), 3);
        assert_eq!(o.fresh().call_count(), 0);
    }

    #[test]
    fn guard_violation() {
        let o = coverage_pair();
        match o.value(&[e(1), e(7)]) {
            Err(Error::GuardViolation(id)) => assert_eq!(id, e(7)),
            other => panic!("expected guard violation, got {other:?}"),
        }
    }

    #[test]
    fn curvature_examples() {
        let m = ValueOracle::new(
            OracleFamily::modular([(e(0), 1.0), (e(1), 2.5), (e(2), 4.0)]).unwrap(),
            [e(0), e(1), e(2)],
        );
        assert_eq!(total_curvature(&m, &m.ground_vec()).unwrap(), 0.0);
        let c = coverage_pair();
        assert_eq!(total_curvature(&c, &c.ground_vec()).unwrap(), 0.5);
        let s = ValueOracle::new(
            OracleFamily::saturated_additive([(e(1), 3.0), (e(2), 4.0)], 7.0).unwrap(),
            [e(1), e(2)],
        );
        assert_eq!(total_curvature(&s, &s.ground_vec()).unwrap(), 0.0);
    }

    #[test]
    fn curvature_skips_zero_singletons() {
        let c = ValueOracle::new(OracleFamily::coverage([(e(0), vec![])]), [e(0)]);
        assert_eq!(total_curvature(&c, &c.ground_vec()).unwrap(), 0.0);
    }

    #[test]
    fn rejects_negative_weights() {
        assert!(OracleFamily::modular([(e(0), -1.0)]).is_err());
        assert!(OracleFamily::saturated_additive([(e(0), 1.0)], f64::NAN).is_err());
    }
}
