use std::collections::BTreeSet;

use crate::error::Result;
use crate::framework::{accepts, AugmentPolicy, Proposal, StateView};
use crate::model::{Constraint, Element, ElementId, IndependentSet, InstanceHeader};

/// Single-element augmentation with no shadow set.
///
/// `A` is `{e}` or empty. For matchings `J` is every member sharing a vertex
/// with `e`; for matroid intersections `J` holds, for each matroid where
/// `I + e` is dependent, the lightest element of that circuit other than `e`.
/// The pair is taken when `w(e) >= (1 + γ) w(J)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct SimplePolicy;

/// The simple policy's decision for `e`, with weights looked up through `weight`.
pub fn simple_proposal(
    e: &Element,
    solution: &IndependentSet,
    weight: impl Fn(ElementId) -> f64,
    gamma: f64,
) -> Result<Proposal> {
    let w_e = weight(e.id);
    let removed: BTreeSet<ElementId> = match solution.constraint() {
        Constraint::Matching => solution.conflicts([e])?,
        Constraint::Matroids(ms) => {
            let mut removed = BTreeSet::new();
            for i in 0..ms.len() {
                let circuit = solution.circuit(i, e.id)?;
                if circuit.is_empty() {
                    continue;
                }
                let lightest = circuit
                    .iter()
                    .copied()
                    .filter(|&x| x != e.id)
                    .map(|x| (weight(x), x))
                    .min_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
                match lightest {
                    Some((_, x)) => {
                        removed.insert(x);
                    }
                    None => return Ok(Proposal::none()),
                }
            }
            removed
        }
    };
    let w_removed: f64 = removed.iter().map(|&x| weight(x)).sum();
    if !accepts(w_e, w_removed, gamma) {
        return Ok(Proposal::none());
    }
    if let Constraint::Matroids(_) = solution.constraint() {
        let mut after = solution.clone();
        for x in &removed {
            after.remove(*x);
        }
        if !after.can_insert(e) {
            return Ok(Proposal::none());
        }
    }
    Ok(Proposal::new([e.id], removed))
}

impl AugmentPolicy for SimplePolicy {
    fn name(&self) -> &'static str {
        "simple"
    }

    fn begin_pass(&mut self, _header: &InstanceHeader) -> Result<()> {
        Ok(())
    }

    fn propose(&mut self, e: &Element, view: &StateView<'_>) -> Result<Proposal> {
        simple_proposal(e, view.solution, |id| view.weight(id), view.gamma)
    }

    fn update_shadows(
        &mut self,
        _accepted: &Proposal,
        _view: &StateView<'_>,
        _killed: &[Element],
    ) -> Result<BTreeSet<ElementId>> {
        Ok(BTreeSet::new())
    }
}
