//! Shadow-edge policy for graph matchings.
//!
//! Every matched edge `uv` owns up to two shadow slots, `s(uv, u)` and
//! `s(uv, v)`, each holding a previously matched edge through that endpoint.
//! An arriving edge `y1y2` looks at a neighborhood of at most seven edges:
//! itself, the matched edges `g1y1`, `g2y2` it touches, their shadows
//! `a1g1 = s(g1y1, g1)`, `a2g2 = s(g2y2, g2)`, and the matched edges `a1c1`,
//! `a2c2` touching those shadows. The augmenting set is the matching
//! `A` inside that neighborhood maximizing `w(A) - (1 + γ) w(M ⇒ A)`, taken
//! only when the gain is strictly positive.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::framework::{AugmentPolicy, Proposal, StateView};
use crate::model::{Element, ElementId, IndependentSet, InstanceHeader, Kind, Vertex};

/// Shadow slots keyed by (matched edge, endpoint).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ShadowTable {
    slots: BTreeMap<(ElementId, Vertex), ElementId>,
}

impl ShadowTable {
    pub fn get(&self, matched: ElementId, v: Vertex) -> Option<ElementId> {
        self.slots.get(&(matched, v)).copied()
    }

    pub fn set(&mut self, matched: ElementId, v: Vertex, shadow: ElementId) {
        self.slots.insert((matched, v), shadow);
    }

    pub fn slot_count(&self) -> usize {
        self.slots.len()
    }

    pub fn shadow_ids(&self) -> BTreeSet<ElementId> {
        self.slots.values().copied().collect()
    }

    pub fn slots(&self) -> impl Iterator<Item = (ElementId, Vertex, ElementId)> + '_ {
        self.slots.iter().map(|(&(m, v), &s)| (m, v, s))
    }

    pub fn clear(&mut self) {
        self.slots.clear();
    }
}

/// The (at most seven) edges around the arriving edge `e`, sorted by id.
pub fn neighborhood(
    e: &Element,
    matching: &IndependentSet,
    table: &ShadowTable,
    shadows: &BTreeMap<ElementId, Element>,
) -> Vec<Element> {
    let mut t: BTreeMap<ElementId, Element> = BTreeMap::new();
    t.insert(e.id, e.clone());
    for &y in &e.vertices {
        let Some(gy) = matching.occupant(y).and_then(|id| matching.get(id)) else {
            continue;
        };
        t.insert(gy.id, gy.clone());
        let Some(g) = gy.other_endpoint(y) else { continue };
        let Some(ag) = table.get(gy.id, g).and_then(|id| shadows.get(&id)) else {
            continue;
        };
        t.insert(ag.id, ag.clone());
        let Some(a) = ag.other_endpoint(g) else { continue };
        if let Some(ac) = matching.occupant(a).and_then(|id| matching.get(id)) {
            t.insert(ac.id, ac.clone());
        }
    }
    t.into_values().collect()
}

fn pairwise_disjoint(set: &[&Element]) -> bool {
    set.iter()
        .enumerate()
        .all(|(i, a)| set[i + 1..].iter().all(|b| !a.shares_vertex(b)))
}

/// Best augmenting set inside `t`: over all matchings `A ⊆ t \ M`, maximize
/// `w(A) - (1 + γ) w(M ⇒ A)`. Ties go to the lexicographically smallest id
/// sequence of `A`. Returns the proposal (empty unless the best gain is
/// strictly positive) and the best gain.
pub fn best_augmenting_set(
    t: &[Element],
    matching: &IndependentSet,
    weight: impl Fn(ElementId) -> f64,
    gamma: f64,
) -> Result<(Proposal, f64)> {
    let candidates: Vec<&Element> = t.iter().filter(|x| !matching.contains(x.id)).collect();
    if candidates.len() > 16 {
        return Err(Error::invariant("neighborhood too large to enumerate"));
    }
    let mut best: Option<(f64, Vec<ElementId>, Vec<ElementId>)> = None;
    for mask in 1u32..(1 << candidates.len()) {
        let chosen: Vec<&Element> = (0..candidates.len())
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| candidates[i])
            .collect();
        if !pairwise_disjoint(&chosen) {
            continue;
        }
        let removed: Vec<ElementId> = matching.conflicts(chosen.iter().copied())?.into_iter().collect();
        let w_add: f64 = chosen.iter().map(|x| weight(x.id)).sum();
        let w_removed: f64 = removed.iter().map(|&x| weight(x)).sum();
        let gain = w_add - (1.0 + gamma) * w_removed;
        let mut add: Vec<ElementId> = chosen.iter().map(|x| x.id).collect();
        add.sort_unstable();
        let better = match &best {
            None => true,
            Some((g, a, _)) => gain > *g || (gain == *g && add < *a),
        };
        if better {
            best = Some((gain, add, removed));
        }
    }
    match best {
        Some((gain, add, removed)) if gain > 0.0 => Ok((Proposal::new(add, removed), gain)),
        Some((gain, _, _)) => Ok((Proposal::none(), gain)),
        None => Ok((Proposal::none(), 0.0)),
    }
}

/// Applies the shadow update after `(A, J)` was used on the matching, which
/// is now `matching_after`.
///
/// Shadows of the killed edges and every element of `A` leave the shadow
/// set. Each killed edge then becomes the shadow of the new matched edge at
/// every vertex they share; a killed edge sharing no vertex with the new
/// matching is dropped. Returns the new shadow set.
pub fn update_shadows(
    table: &mut ShadowTable,
    added: &[ElementId],
    killed: &[Element],
    matching_after: &IndependentSet,
) -> BTreeSet<ElementId> {
    let mut evicted: BTreeSet<ElementId> = added.iter().copied().collect();
    for x in killed {
        for &v in &x.vertices {
            if let Some(s) = table.slots.remove(&(x.id, v)) {
                evicted.insert(s);
            }
        }
    }
    table.slots.retain(|_, s| !evicted.contains(s));
    for x in killed {
        for &v in &x.vertices {
            if let Some(owner) = matching_after.occupant(v) {
                table.set(owner, v, x.id);
            }
        }
    }
    // a slot may only be keyed by a live matched edge
    table.slots.retain(|(m, _), _| matching_after.contains(*m));
    table.shadow_ids()
}

#[derive(Debug, Clone, Default)]
pub struct ZelkePolicy {
    table: ShadowTable,
}

impl ZelkePolicy {
    pub fn table(&self) -> &ShadowTable {
        &self.table
    }
}

impl AugmentPolicy for ZelkePolicy {
    fn name(&self) -> &'static str {
        "zelke"
    }

    fn begin_pass(&mut self, header: &InstanceHeader) -> Result<()> {
        if header.kind != Kind::Graph {
            return Err(Error::parameter(format!(
                "the shadow-edge policy needs a graph instance, got {}",
                header.kind.name()
            )));
        }
        self.table.clear();
        Ok(())
    }

    fn propose(&mut self, e: &Element, view: &StateView<'_>) -> Result<Proposal> {
        let t = neighborhood(e, view.solution, &self.table, view.shadows);
        let (proposal, _gain) = best_augmenting_set(&t, view.solution, |id| view.weight(id), view.gamma)?;
        Ok(proposal)
    }

    fn update_shadows(
        &mut self,
        accepted: &Proposal,
        view: &StateView<'_>,
        killed: &[Element],
    ) -> Result<BTreeSet<ElementId>> {
        if accepted.is_empty() {
            return Ok(view.shadows.keys().copied().collect());
        }
        Ok(update_shadows(&mut self.table, &accepted.add, killed, view.solution))
    }
}
