//! Offline reference solutions: exhaustive optimum and greedy.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{Element, ElementId, IndependentSet, Instance};
use crate::oracle::ValueOracle;

pub const DEFAULT_EXACT_CAP: usize = 22;
/// Full enumeration visits every subset; keep it small.
pub const BITMASK_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scored {
    pub ids: Vec<ElementId>,
    pub value: f64,
}

impl Scored {
    fn improves_on(&self, best: &Option<Scored>) -> bool {
        match best {
            None => true,
            Some(b) => self.value > b.value || (self.value == b.value && self.ids < b.ids),
        }
    }
}

fn sorted_elements(instance: &Instance) -> Vec<Element> {
    let mut els = instance.elements().to_vec();
    els.sort_by_key(|e| e.id);
    els
}

/// An `f`-maximizing independent set, by branch-and-prune over independent
/// prefixes in id order. Only maximal sets are evaluated, which is enough
/// for a monotone `f`. Ties go to the smallest id sequence among them.
pub fn exact_opt(instance: &Instance, oracle: &ValueOracle, cap: usize) -> Result<Scored> {
    if instance.len() > cap {
        return Err(Error::SizeLimit {
            size: instance.len(),
            cap,
        });
    }
    let els = sorted_elements(instance);
    let mut set = instance.new_independent_set();
    let mut best = None;
    branch(&els, 0, &mut set, oracle, &mut best)?;
    Ok(best.unwrap_or(Scored {
        ids: Vec::new(),
        value: 0.0,
    }))
}

fn branch(
    els: &[Element],
    i: usize,
    set: &mut IndependentSet,
    oracle: &ValueOracle,
    best: &mut Option<Scored>,
) -> Result<()> {
    if i == els.len() {
        if els.iter().any(|e| !set.contains(e.id) && set.can_insert(e)) {
            return Ok(());
        }
        let ids = set.id_vec();
        let cand = Scored {
            value: oracle.value(&ids)?,
            ids,
        };
        if cand.improves_on(best) {
            *best = Some(cand);
        }
        return Ok(());
    }
    if set.can_insert(&els[i]) {
        set.insert(els[i].clone())?;
        branch(els, i + 1, set, oracle, best)?;
        set.remove(els[i].id);
    }
    branch(els, i + 1, set, oracle, best)
}

/// Tests every subset for independence and evaluates all independent ones.
/// A second implementation to check [`exact_opt`] against; ties go to the
/// smallest id sequence.
pub fn exact_opt_bitmask(instance: &Instance, oracle: &ValueOracle) -> Result<Scored> {
    let m = instance.len();
    if m > BITMASK_CAP {
        return Err(Error::SizeLimit { size: m, cap: BITMASK_CAP });
    }
    let els = sorted_elements(instance);
    let constraint = instance.constraint();
    let mut best: Option<Scored> = None;
    for mask in 0u32..(1u32 << m) {
        let chosen: Vec<&Element> = (0..m).filter(|i| mask & (1 << i) != 0).map(|i| &els[i]).collect();
        if !constraint.is_independent(chosen.iter().copied()) {
            continue;
        }
        let ids: Vec<ElementId> = chosen.iter().map(|e| e.id).collect();
        let cand = Scored {
            value: oracle.value(&ids)?,
            ids,
        };
        if cand.improves_on(&best) {
            best = Some(cand);
        }
    }
    Ok(best.expect("the empty set is independent"))
}

/// Offline greedy: repeatedly add the feasible element of largest marginal
/// gain (ties to the smaller id) while some gain is positive.
pub fn offline_greedy(instance: &Instance, oracle: &ValueOracle) -> Result<Scored> {
    let els = sorted_elements(instance);
    let mut set = instance.new_independent_set();
    let mut value = 0.0;
    loop {
        let mut pick: Option<(f64, f64, usize)> = None;
        for (i, e) in els.iter().enumerate() {
            if set.contains(e.id) || !set.can_insert(e) {
                continue;
            }
            let mut with = set.id_vec();
            with.push(e.id);
            let v = oracle.value(&with)?;
            let gain = v - value;
            if gain > 0.0 && pick.is_none_or(|(g, _, _)| gain > g) {
                pick = Some((gain, v, i));
            }
        }
        match pick {
            Some((_, v, i)) => {
                set.insert(els[i].clone())?;
                value = v;
            }
            None => break,
        }
    }
    Ok(Scored {
        ids: set.id_vec(),
        value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Element;
    use crate::oracle::OracleFamily;

    fn modular(inst: &Instance, w: &[f64]) -> ValueOracle {
        ValueOracle::new(
            OracleFamily::modular(w.iter().enumerate().map(|(i, &x)| (ElementId(i as u32), x))).unwrap(),
            inst.ids(),
        )
    }

    fn path() -> Instance {
        Instance::graph(4, vec![Element::edge(0, 1, 2), Element::edge(1, 2, 3), Element::edge(2, 3, 4)]).unwrap()
    }

    #[test]
    fn triangle_admits_one_edge() {
        let inst = Instance::graph(3, vec![Element::edge(0, 1, 2), Element::edge(1, 2, 3), Element::edge(2, 1, 3)])
            .unwrap();
        let r = exact_opt(&inst, &modular(&inst, &[1.0, 1.0, 1.0]), DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.ids, vec![ElementId(0)]);
    }

    #[test]
    fn path_optimum_is_the_middle_edge() {
        let inst = path();
        let o = modular(&inst, &[1.0, 3.0, 1.0]);
        let r = exact_opt(&inst, &o, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(r, Scored { ids: vec![ElementId(1)], value: 3.0 });
        assert_eq!(exact_opt_bitmask(&inst, &o).unwrap(), r);
    }

    #[test]
    fn coverage_star() {
        let inst = Instance::graph(4, vec![Element::edge(0, 1, 2), Element::edge(1, 1, 3), Element::edge(2, 1, 4)])
            .unwrap();
        let o = ValueOracle::new(
            OracleFamily::coverage((0..3).map(|i| (ElementId(i), vec![i]))),
            inst.ids(),
        );
        let r = exact_opt(&inst, &o, DEFAULT_EXACT_CAP).unwrap();
        assert_eq!(r.value, 1.0);
        assert_eq!(r.ids.len(), 1);
    }

    #[test]
    fn size_cap_is_enforced() {
        let inst = path();
        let r = exact_opt(&inst, &modular(&inst, &[1.0, 1.0, 1.0]), 2);
        assert!(matches!(r, Err(Error::SizeLimit { size: 3, cap: 2 })));
    }

    #[test]
    fn greedy_examples() {
        let inst = path();
        let r = offline_greedy(&inst, &modular(&inst, &[1.0, 3.0, 1.0])).unwrap();
        assert_eq!(r, Scored { ids: vec![ElementId(1)], value: 3.0 });

        let empty = Instance::graph(2, vec![]).unwrap();
        let r = offline_greedy(&empty, &modular(&empty, &[])).unwrap();
        assert!(r.ids.is_empty());
        assert_eq!(r.value, 0.0);
    }
}
