//! The generic one-pass improvement loop shared by every algorithm.
//!
//! A pass starts from a previous solution `P`, inserts `P`'s elements first
//! (ascending id, each weighted by its telescoping marginal `f(I + e) - f(I)`),
//! then processes the rest of the stream in arrival order. For each arriving
//! element `e` the runner
//!
//! 1. assigns `w(e) = f(I ∪ S + e) - f(I ∪ S)` (or the given weight in
//!    weighted mode),
//! 2. asks the [`AugmentPolicy`] for an augmenting pair `(A, J)` and checks
//!    the pair contract (`A ⊆ I ∪ S + e`, `J ⊆ I`, `(I \ J) ∪ A` independent,
//!    `w(A) >= (1 + γ) w(J)`),
//! 3. applies it and lets the policy pick the new shadow set from
//!    `(S \ A) ∪ J`.
//!
//! Only weights of `I ∪ S` are kept as algorithm state. Killed elements and
//! their weights are recorded in [`PassStats`] for the runtime checks and are
//! not part of the space accounting.

pub mod checks;

pub use checks::{CheckOutcome, CheckPlan};

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::{Constraint, Element, ElementId, IndependentSet, InstanceHeader, StreamSource};
use crate::oracle::ValueOracle;

/// Where element weights come from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// Streaming marginal gains of the value oracle.
    Marginal,
    /// Weights carried by the elements themselves; the oracle is not queried.
    Given,
}

#[derive(Debug, Clone, Copy)]
pub struct PassOptions {
    pub gamma: f64,
    pub weight_mode: WeightMode,
    /// Keep the weight assigned to every processed element (needed for the
    /// optimum-side check; costs memory proportional to the stream).
    pub record_assigned: bool,
}

impl PassOptions {
    pub fn new(gamma: f64, weight_mode: WeightMode) -> Self {
        PassOptions {
            gamma,
            weight_mode,
            record_assigned: false,
        }
    }
}

/// The augmenting-pair acceptance test `w(A) >= (1 + γ) w(J)`.
pub fn accepts(w_add: f64, w_remove: f64, gamma: f64) -> bool {
    w_add >= (1.0 + gamma) * w_remove
}

/// An augmenting pair: insert `add`, remove `remove`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Proposal {
    pub add: Vec<ElementId>,
    pub remove: Vec<ElementId>,
}

impl Proposal {
    pub fn none() -> Self {
        Proposal::default()
    }

    pub fn new(add: impl IntoIterator<Item = ElementId>, remove: impl IntoIterator<Item = ElementId>) -> Self {
        let mut p = Proposal {
            add: add.into_iter().collect(),
            remove: remove.into_iter().collect(),
        };
        p.add.sort_unstable();
        p.add.dedup();
        p.remove.sort_unstable();
        p.remove.dedup();
        p
    }

    pub fn is_empty(&self) -> bool {
        self.add.is_empty() && self.remove.is_empty()
    }
}

/// Read-only view of the pass state handed to policies.
pub struct StateView<'a> {
    pub header: &'a InstanceHeader,
    pub solution: &'a IndependentSet,
    pub shadows: &'a BTreeMap<ElementId, Element>,
    pub weights: &'a HashMap<ElementId, f64>,
    pub gamma: f64,
}

impl StateView<'_> {
    /// Weight of a stored element. Panics if the element is not stored,
    /// which would mean a policy looked at something it cannot know.
    pub fn weight(&self, id: ElementId) -> f64 {
        match self.weights.get(&id) {
            Some(w) => *w,
            None => panic!("policy read the weight of unstored element {id}"),
        }
    }

    pub fn weight_of(&self, ids: impl IntoIterator<Item = ElementId>) -> f64 {
        ids.into_iter().map(|id| self.weight(id)).sum()
    }
}

/// The two choices a compliant algorithm makes per element.
pub trait AugmentPolicy {
    fn name(&self) -> &'static str;

    /// Resets per-pass state; rejects instance kinds the policy cannot handle.
    fn begin_pass(&mut self, header: &InstanceHeader) -> Result<()>;

    /// Chooses `(A, J)` for the arriving element `e`, whose weight is already
    /// in `view.weights`. Returning [`Proposal::none`] rejects `e`.
    fn propose(&mut self, e: &Element, view: &StateView<'_>) -> Result<Proposal>;

    /// Chooses the new shadow set, a subset of `(S \ A) ∪ J`. `view` shows the
    /// updated solution and the old shadow set; `killed` holds the elements of
    /// `J` that left the solution.
    fn update_shadows(
        &mut self,
        accepted: &Proposal,
        view: &StateView<'_>,
        killed: &[Element],
    ) -> Result<BTreeSet<ElementId>>;
}

/// Mutable algorithm state: solution `I` and shadow set `S`, with `w` kept on `I ∪ S`.
#[derive(Debug, Clone)]
pub struct SolutionState {
    pub solution: IndependentSet,
    pub shadows: BTreeMap<ElementId, Element>,
    pub weights: HashMap<ElementId, f64>,
    pub gamma: f64,
}

impl SolutionState {
    fn stored_ids(&self) -> Vec<ElementId> {
        let mut ids: Vec<ElementId> = self
            .solution
            .ids()
            .chain(self.shadows.keys().copied())
            .collect();
        ids.sort_unstable();
        ids
    }
}

/// Per-pass instrumentation.
#[derive(Debug, Clone, Default)]
pub struct PassStats {
    pub gamma: f64,
    /// `Σ_e w(J_e)` over all augmentations.
    pub sum_removed_weight: f64,
    pub augmentations: u64,
    /// Every element that entered the solution this pass, with its weight.
    pub born: BTreeMap<ElementId, f64>,
    /// Killed elements (born but not in the final solution), with weights.
    pub killed: BTreeMap<ElementId, f64>,
    /// Killing-tree edges: child -> the element whose insertion evicted it.
    pub kill_parent: BTreeMap<ElementId, ElementId>,
    /// Max number of elements held at once (solution, shadows, current element).
    pub peak_stored: usize,
    pub peak_shadows: usize,
    pub oracle_calls: u64,
    pub elements_processed: u64,
    pub max_calls_per_element: u64,
    /// The primed solution, in insertion order.
    pub primed: Vec<ElementId>,
    /// `Σ w(P)`; equals `f(P)` in marginal mode.
    pub primed_weight: f64,
    pub assigned: Option<BTreeMap<ElementId, f64>>,
}

impl PassStats {
    pub fn killed_weight(&self) -> f64 {
        self.killed.values().sum()
    }

    /// Strict descendants of `root` in its killing tree.
    pub fn trail(&self, root: ElementId) -> Vec<ElementId> {
        let mut children: BTreeMap<ElementId, Vec<ElementId>> = BTreeMap::new();
        for (&c, &p) in &self.kill_parent {
            children.entry(p).or_default().push(c);
        }
        let mut out = Vec::new();
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            if let Some(cs) = children.get(&x) {
                for &c in cs {
                    out.push(c);
                    stack.push(c);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Oracle calls per element handled, primed elements included.
    pub fn calls_per_element(&self) -> f64 {
        let handled = self.elements_processed + self.primed.len() as u64;
        if handled == 0 {
            0.0
        } else {
            self.oracle_calls as f64 / handled as f64
        }
    }
}

/// Result of one pass.
#[derive(Debug, Clone)]
pub struct PassOutcome {
    pub solution: IndependentSet,
    /// Weights of the final solution's members, as assigned in this pass.
    pub weights: BTreeMap<ElementId, f64>,
    pub stats: PassStats,
}

impl PassOutcome {
    pub fn solution_weight(&self) -> f64 {
        self.weights.values().sum()
    }

    pub fn ids(&self) -> Vec<ElementId> {
        self.solution.id_vec()
    }
}

/// Drives one pass element by element. [`improve_solution`] is the usual
/// entry point; the runner is public so two passes can be interleaved over a
/// single read of the stream.
pub struct PassRunner<'a> {
    header: &'a InstanceHeader,
    oracle: &'a ValueOracle,
    policy: &'a mut dyn AugmentPolicy,
    opts: PassOptions,
    state: SolutionState,
    stats: PassStats,
    /// `f(I ∪ S)` in marginal mode.
    cached_value: f64,
    primed: BTreeSet<ElementId>,
    primed_seen: usize,
}

impl<'a> PassRunner<'a> {
    pub fn new(
        header: &'a InstanceHeader,
        oracle: &'a ValueOracle,
        policy: &'a mut dyn AugmentPolicy,
        opts: PassOptions,
    ) -> Result<Self> {
        if !(opts.gamma.is_finite() && opts.gamma > 0.0) {
            return Err(Error::parameter(format!("gamma must be positive, got {}", opts.gamma)));
        }
        policy.begin_pass(header)?;
        let stats = PassStats {
            gamma: opts.gamma,
            assigned: opts.record_assigned.then(BTreeMap::new),
            ..PassStats::default()
        };
        Ok(PassRunner {
            header,
            oracle,
            policy,
            opts,
            state: SolutionState {
                solution: IndependentSet::new(header.constraint.clone()),
                shadows: BTreeMap::new(),
                weights: HashMap::new(),
                gamma: opts.gamma,
            },
            stats,
            cached_value: 0.0,
            primed: BTreeSet::new(),
            primed_seen: 0,
        })
    }

    pub fn state(&self) -> &SolutionState {
        &self.state
    }

    fn given_weight(e: &Element) -> Result<f64> {
        e.given_weight
            .ok_or_else(|| Error::input(format!("{} has no weight but the run uses given weights", e.id)))
    }

    fn record_assigned(&mut self, id: ElementId, w: f64) {
        if let Some(log) = &mut self.stats.assigned {
            log.insert(id, w);
        }
    }

    /// Inserts the previous solution `p` in ascending id order with
    /// telescoping weights. Must be called before any stream element.
    pub fn prime(&mut self, p: &IndependentSet) -> Result<()> {
        if self.stats.elements_processed > 0 || !self.state.solution.is_empty() {
            return Err(Error::invariant("prime() after the pass started"));
        }
        if !self.header.constraint.is_independent(p.elements()) {
            return Err(Error::input("primed solution is not independent"));
        }
        let calls_before = self.oracle.call_count();
        for e in p.elements() {
            let w = match self.opts.weight_mode {
                WeightMode::Given => Self::given_weight(e)?,
                WeightMode::Marginal => {
                    let mut with: Vec<ElementId> = self.state.solution.id_vec();
                    with.push(e.id);
                    let v = self.oracle.value(&with)?;
                    let w = (v - self.cached_value).max(0.0);
                    self.cached_value = v;
                    w
                }
            };
            self.state.solution.insert(e.clone())?;
            self.state.weights.insert(e.id, w);
            self.stats.born.insert(e.id, w);
            self.stats.primed.push(e.id);
            self.stats.primed_weight += w;
            self.record_assigned(e.id, w);
            self.primed.insert(e.id);
        }
        self.stats.peak_stored = self.stats.peak_stored.max(p.len());
        self.stats.oracle_calls += self.oracle.call_count() - calls_before;
        Ok(())
    }

    /// Feeds one stream element. Members of the primed solution are skipped.
    pub fn process(&mut self, e: Element) -> Result<()> {
        if self.primed.contains(&e.id) {
            self.primed_seen += 1;
            return Ok(());
        }
        self.process_element(e)
    }

    fn process_element(&mut self, e: Element) -> Result<()> {
        self.header.validate_element(&e)?;
        if self.state.weights.contains_key(&e.id) {
            return Err(Error::input(format!("{} arrived twice in one pass", e.id)));
        }
        let calls_before = self.oracle.call_count();
        let before = self.state.stored_ids();
        self.stats.peak_stored = self.stats.peak_stored.max(before.len() + 1);

        // 1. weight
        let (w, value_with_e) = match self.opts.weight_mode {
            WeightMode::Given => (Self::given_weight(&e)?, None),
            WeightMode::Marginal => {
                let mut with = before.clone();
                with.push(e.id);
                let v = self.oracle.value(&with)?;
                ((v - self.cached_value).max(0.0), Some(v))
            }
        };
        self.state.weights.insert(e.id, w);
        self.record_assigned(e.id, w);

        // 2. augmenting pair
        let view = StateView {
            header: self.header,
            solution: &self.state.solution,
            shadows: &self.state.shadows,
            weights: &self.state.weights,
            gamma: self.opts.gamma,
        };
        let mut proposal = self.policy.propose(&e, &view)?;
        proposal = Proposal::new(proposal.add, proposal.remove);
        self.check_proposal(&e, &proposal)?;
        let w_add: f64 = proposal.add.iter().map(|id| self.state.weights[id]).sum();
        let w_remove: f64 = proposal.remove.iter().map(|id| self.state.weights[id]).sum();
        if proposal.remove.is_empty() && w_add == 0.0 {
            // no zero-gain insertions
            proposal = Proposal::none();
        }

        let mut killed = Vec::new();
        if !proposal.is_empty() {
            let mut add_elems = Vec::with_capacity(proposal.add.len());
            for id in &proposal.add {
                let el = if *id == e.id {
                    e.clone()
                } else if let Some(s) = self.state.shadows.get(id) {
                    s.clone()
                } else {
                    self.state.solution.get(*id).cloned().ok_or_else(|| {
                        Error::invariant(format!("augmenting set names unknown {id}"))
                    })?
                };
                add_elems.push(el);
            }
            for id in &proposal.remove {
                if let Some(x) = self.state.solution.get(*id) {
                    if !proposal.add.contains(id) {
                        killed.push(x.clone());
                    }
                }
            }
            self.state
                .solution
                .apply_augment(add_elems.clone(), &proposal.remove)?;
            self.stats.sum_removed_weight += w_remove;
            self.stats.augmentations += 1;
            for a in &add_elems {
                self.stats.born.insert(a.id, self.state.weights[&a.id]);
                self.stats.kill_parent.remove(&a.id);
            }
            let matching = matches!(self.header.constraint, Constraint::Matching);
            for x in &killed {
                let killer = add_elems
                    .iter()
                    .filter(|a| !matching || a.shares_vertex(x))
                    .map(|a| a.id)
                    .min()
                    .or_else(|| add_elems.iter().map(|a| a.id).min())
                    .expect("nonempty proposal with removals has additions or is rejected earlier");
                self.stats.kill_parent.insert(x.id, killer);
            }
        }

        // 3. shadows
        let view = StateView {
            header: self.header,
            solution: &self.state.solution,
            shadows: &self.state.shadows,
            weights: &self.state.weights,
            gamma: self.opts.gamma,
        };
        let new_shadows = self.policy.update_shadows(&proposal, &view, &killed)?;
        let mut shadows = BTreeMap::new();
        for id in new_shadows {
            if proposal.add.contains(&id) {
                return Err(Error::invariant(format!("shadow set keeps {id}, which was just inserted")));
            }
            let el = match self.state.shadows.get(&id) {
                Some(s) => s.clone(),
                None => killed
                    .iter()
                    .find(|k| k.id == id)
                    .cloned()
                    .ok_or_else(|| {
                        Error::invariant(format!("shadow {id} is not in (S \\ A) ∪ J"))
                    })?,
            };
            if self.state.solution.contains(id) {
                return Err(Error::invariant(format!("{id} is both a member and a shadow")));
            }
            shadows.insert(id, el);
        }
        self.state.shadows = shadows;
        self.stats.peak_shadows = self.stats.peak_shadows.max(self.state.shadows.len());

        // forget weights of everything no longer stored
        let after = self.state.stored_ids();
        {
            let keep: BTreeSet<ElementId> = after.iter().copied().collect();
            self.state.weights.retain(|id, _| keep.contains(id));
        }

        if self.opts.weight_mode == WeightMode::Marginal && after != before {
            let mut grown = before.clone();
            grown.push(e.id);
            grown.sort_unstable();
            self.cached_value = if after == grown {
                value_with_e.expect("marginal mode")
            } else if after.is_empty() {
                0.0
            } else {
                self.oracle.value(&after)?
            };
        }

        let calls = self.oracle.call_count() - calls_before;
        self.stats.oracle_calls += calls;
        self.stats.max_calls_per_element = self.stats.max_calls_per_element.max(calls);
        self.stats.elements_processed += 1;
        Ok(())
    }

    fn check_proposal(&self, e: &Element, p: &Proposal) -> Result<()> {
        if p.is_empty() {
            return Ok(());
        }
        for id in &p.remove {
            if !self.state.solution.contains(*id) {
                return Err(Error::invariant(format!(
                    "policy {} removes {id}, which is not in the solution",
                    self.policy.name()
                )));
            }
        }
        for id in &p.add {
            let known = *id == e.id
                || self.state.solution.contains(*id)
                || self.state.shadows.contains_key(id);
            if !known {
                return Err(Error::invariant(format!(
                    "policy {} adds {id}, which is outside I ∪ S + e",
                    self.policy.name()
                )));
            }
        }
        let w_add: f64 = p.add.iter().map(|id| self.state.weights[id]).sum();
        let w_remove: f64 = p.remove.iter().map(|id| self.state.weights[id]).sum();
        if !accepts(w_add, w_remove, self.opts.gamma) {
            return Err(Error::invariant(format!(
                "policy {} proposed w(A) = {w_add} < (1 + γ) w(J) = {}",
                self.policy.name(),
                (1.0 + self.opts.gamma) * w_remove
            )));
        }
        Ok(())
    }

    pub fn finish(self) -> Result<PassOutcome> {
        if self.primed_seen != self.primed.len() {
            return Err(Error::input(format!(
                "{} primed elements never appeared in the stream",
                self.primed.len() - self.primed_seen
            )));
        }
        let mut stats = self.stats;
        let solution = self.state.solution;
        let weights: BTreeMap<ElementId, f64> = solution
            .ids()
            .map(|id| (id, self.state.weights[&id]))
            .collect();
        stats.killed = stats
            .born
            .iter()
            .filter(|(id, _)| !solution.contains(**id))
            .map(|(id, w)| (*id, *w))
            .collect();
        Ok(PassOutcome {
            solution,
            weights,
            stats,
        })
    }
}

/// One pass of the generic improvement loop, primed with `p`.
pub fn improve_solution(
    source: &dyn StreamSource,
    p: &IndependentSet,
    policy: &mut dyn AugmentPolicy,
    oracle: &ValueOracle,
    opts: PassOptions,
) -> Result<PassOutcome> {
    let mut runner = PassRunner::new(source.header(), oracle, policy, opts)?;
    runner.prime(p)?;
    source.replay(&mut |e| runner.process(e))?;
    runner.finish()
}

/// The order in which a primed pass processes elements: `p`'s members by
/// ascending id, then every other element in stream order.
pub fn pretend_order(p: &IndependentSet, source: &dyn StreamSource) -> Result<Vec<Element>> {
    let mut out: Vec<Element> = p.elements().cloned().collect();
    source.replay(&mut |e| {
        if !p.contains(e.id) {
            out.push(e);
        }
        Ok(())
    })?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Instance;
    use crate::oracle::OracleFamily;
    use crate::policy::SimplePolicy;

    fn ids(v: &[u32]) -> Vec<ElementId> {
        v.iter().map(|&i| ElementId(i)).collect()
    }

    fn stream(v: &[u32]) -> Instance {
        let elements = v
            .iter()
            .enumerate()
            .map(|(k, &id)| Element::edge(id, 2 * k as u32 + 1, 2 * k as u32 + 2))
            .collect();
        Instance::graph(2 * v.len(), elements).unwrap()
    }

    fn order(p: &[u32], s: &Instance) -> Vec<ElementId> {
        let mut set = s.new_independent_set();
        for id in p {
            set.insert(s.element(ElementId(*id)).unwrap().clone()).unwrap();
        }
        pretend_order(&set, s).unwrap().into_iter().map(|e| e.id).collect()
    }

    #[test]
    fn pretend_order_examples() {
        let s = stream(&[1, 5, 9]);
        assert_eq!(order(&[], &s), ids(&[1, 5, 9]));
        assert_eq!(order(&[5], &s), ids(&[5, 1, 9]));
        assert_eq!(order(&[9, 1], &s), ids(&[1, 9, 5]));
    }

    fn path() -> (Instance, ValueOracle) {
        let inst = Instance::graph(
            4,
            vec![
                Element::edge(0, 1, 2).with_weight(1.0),
                Element::edge(1, 2, 3).with_weight(3.0),
                Element::edge(2, 3, 4).with_weight(1.0),
            ],
        )
        .unwrap();
        let oracle = ValueOracle::new(
            OracleFamily::modular([(ElementId(0), 1.0), (ElementId(1), 3.0), (ElementId(2), 1.0)]).unwrap(),
            inst.ids(),
        );
        (inst, oracle)
    }

    #[test]
    fn empty_stream_gives_empty_solution() {
        let inst = Instance::graph(3, vec![]).unwrap();
        let oracle = ValueOracle::new(OracleFamily::modular([]).unwrap(), []);
        let out = improve_solution(
            &inst,
            &inst.new_independent_set(),
            &mut SimplePolicy,
            &oracle,
            PassOptions::new(1.0, WeightMode::Marginal),
        )
        .unwrap();
        assert!(out.solution.is_empty());
        assert_eq!(out.stats.augmentations, 0);
        assert_eq!(out.stats.oracle_calls, 0);
        assert_eq!(out.stats.peak_stored, 0);
    }

    #[test]
    fn path_walkthrough() {
        let (inst, oracle) = path();
        let header = inst.header().clone();
        let mut policy = SimplePolicy;
        let mut runner = PassRunner::new(&header, &oracle, &mut policy, PassOptions::new(1.0, WeightMode::Marginal)).unwrap();
        let els = inst.elements().to_vec();

        runner.process(els[0].clone()).unwrap();
        assert_eq!(runner.state().solution.id_vec(), ids(&[0]));
        assert_eq!(runner.state().weights[&ElementId(0)], 1.0);

        // 3 >= 2 * 1: middle edge kills the first
        runner.process(els[1].clone()).unwrap();
        assert_eq!(runner.state().solution.id_vec(), ids(&[1]));

        // 1 < 2 * 3: rejected
        runner.process(els[2].clone()).unwrap();
        assert_eq!(runner.state().solution.id_vec(), ids(&[1]));

        let out = runner.finish().unwrap();
        assert_eq!(out.solution_weight(), 3.0);
        assert_eq!(out.stats.kill_parent.get(&ElementId(0)), Some(&ElementId(1)));
        assert_eq!(out.stats.killed.keys().copied().collect::<Vec<_>>(), ids(&[0]));
        assert_eq!(out.stats.sum_removed_weight, 1.0);
    }

    #[test]
    fn priming_assigns_telescoping_weight() {
        let (inst, oracle) = path();
        let mut p = inst.new_independent_set();
        p.insert(inst.elements()[1].clone()).unwrap();
        let out = improve_solution(&inst, &p, &mut SimplePolicy, &oracle, PassOptions::new(1.0, WeightMode::Marginal)).unwrap();
        assert_eq!(out.stats.primed, ids(&[1]));
        assert_eq!(out.stats.primed_weight, 3.0);
        assert_eq!(out.solution.id_vec(), ids(&[1]));
    }

    #[test]
    fn first_element_into_empty_state() {
        let inst = Instance::graph(2, vec![Element::edge(0, 1, 2)]).unwrap();
        let oracle = ValueOracle::new(OracleFamily::modular([(ElementId(0), 5.0)]).unwrap(), inst.ids());
        let out = improve_solution(&inst, &inst.new_independent_set(), &mut SimplePolicy, &oracle, PassOptions::new(1.0, WeightMode::Marginal)).unwrap();
        assert_eq!(out.weights[&ElementId(0)], 5.0);
        assert_eq!(out.solution.id_vec(), ids(&[0]));
        // one marginal query, cache reused afterwards
        assert_eq!(out.stats.oracle_calls, 1);
    }

    #[test]
    fn zero_weight_elements_are_not_inserted() {
        let inst = Instance::graph(2, vec![Element::edge(0, 1, 2)]).unwrap();
        let oracle = ValueOracle::new(OracleFamily::modular([(ElementId(0), 0.0)]).unwrap(), inst.ids());
        let out = improve_solution(&inst, &inst.new_independent_set(), &mut SimplePolicy, &oracle, PassOptions::new(1.0, WeightMode::Marginal)).unwrap();
        assert!(out.solution.is_empty());
    }

    #[test]
    fn given_mode_requires_weights() {
        let inst = Instance::graph(2, vec![Element::edge(0, 1, 2)]).unwrap();
        let oracle = ValueOracle::new(OracleFamily::modular([(ElementId(0), 1.0)]).unwrap(), inst.ids());
        let err = improve_solution(&inst, &inst.new_independent_set(), &mut SimplePolicy, &oracle, PassOptions::new(1.0, WeightMode::Given)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn rejects_nonpositive_gamma() {
        let (inst, oracle) = path();
        let r = improve_solution(&inst, &inst.new_independent_set(), &mut SimplePolicy, &oracle, PassOptions::new(0.0, WeightMode::Marginal));
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn dependent_priming_set_is_an_input_error() {
        let (inst, oracle) = path();
        // bypass insert checks by building the set under a looser constraint
        let mut p = IndependentSet::new(Constraint::Matroids(
            vec![crate::matroid::PartitionMatroid::uniform(inst.ids(), 3).unwrap()].into(),
        ));
        p.insert(inst.elements()[0].clone()).unwrap();
        p.insert(inst.elements()[1].clone()).unwrap();
        let r = improve_solution(&inst, &p, &mut SimplePolicy, &oracle, PassOptions::new(1.0, WeightMode::Marginal));
        assert!(matches!(r, Err(Error::InvalidInput(_))));
    }

    struct Greedy;
    impl AugmentPolicy for Greedy {
        fn name(&self) -> &'static str {
            "bad"
        }
        fn begin_pass(&mut self, _: &InstanceHeader) -> Result<()> {
            Ok(())
        }
        fn propose(&mut self, e: &Element, view: &StateView<'_>) -> Result<Proposal> {
            // ignores the threshold
            let j = view.solution.conflicts([e])?;
            Ok(Proposal::new([e.id], j))
        }
        fn update_shadows(&mut self, _: &Proposal, _: &StateView<'_>, _: &[Element]) -> Result<BTreeSet<ElementId>> {
            Ok(BTreeSet::new())
        }
    }

    #[test]
    fn contract_violations_are_caught() {
        let (inst, oracle) = path();
        let r = improve_solution(&inst, &inst.new_independent_set(), &mut Greedy, &oracle, PassOptions::new(1.0, WeightMode::Marginal));
        assert!(matches!(r, Err(Error::Invariant(_))));
    }
}
