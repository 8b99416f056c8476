//! Stream elements and instances, with the independent sets built from them.
//!
//! An [`Instance`] is a ground set in stream order plus an independence
//! structure: matchings on a graph or `p`-hypergraph, or the intersection of
//! `p` partition matroids. [`IndependentSet`] is the mutable solution type
//! shared by every policy; it keeps the vertex occupancy map (matching kinds)
//! or per-part usage (matroid kind) in sync with its members.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matroid::PartitionMatroid;

pub type Vertex = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ElementId(pub u32);

impl ElementId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ElementId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "e{}", self.0)
    }
}

/// A stream item. Edges and hyperedges carry vertices; matroid elements carry none.
#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub id: ElementId,
    /// Sorted, distinct vertex ids. Empty for matroid elements.
    pub vertices: Vec<Vertex>,
    /// Present when the instance carries explicit weights (weighted mode).
    pub given_weight: Option<f64>,
}

impl Element {
    pub fn new(id: u32, vertices: impl IntoIterator<Item = Vertex>) -> Self {
        let mut vertices: Vec<Vertex> = vertices.into_iter().collect();
        vertices.sort_unstable();
        vertices.dedup();
        Element {
            id: ElementId(id),
            vertices,
            given_weight: None,
        }
    }

    pub fn edge(id: u32, u: Vertex, v: Vertex) -> Self {
        Element::new(id, [u, v])
    }

    pub fn with_weight(mut self, weight: f64) -> Self {
        self.given_weight = Some(weight);
        self
    }

    pub fn shares_vertex(&self, other: &Element) -> bool {
        // both sides are sorted
        let (mut i, mut j) = (0, 0);
        while i < self.vertices.len() && j < other.vertices.len() {
            match self.vertices[i].cmp(&other.vertices[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// For a graph edge, the endpoint that is not `v`.
    pub fn other_endpoint(&self, v: Vertex) -> Option<Vertex> {
        match self.vertices.as_slice() {
            [a, b] if *a == v => Some(*b),
            [a, b] if *b == v => Some(*a),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Kind {
    Graph,
    Hypergraph { p: usize },
    MatroidIntersection { p: usize },
}

impl Kind {
    /// Rank of the independence system: 2 for graphs, `p` otherwise.
    pub fn p(self) -> usize {
        match self {
            Kind::Graph => 2,
            Kind::Hypergraph { p } | Kind::MatroidIntersection { p } => p,
        }
    }

    pub fn is_matching(self) -> bool {
        !matches!(self, Kind::MatroidIntersection { .. })
    }

    pub fn name(self) -> &'static str {
        match self {
            Kind::Graph => "graph",
            Kind::Hypergraph { .. } => "hypergraph",
            Kind::MatroidIntersection { .. } => "matroid_intersection",
        }
    }
}

/// The independence structure behind an [`IndependentSet`].
#[derive(Debug, Clone)]
pub enum Constraint {
    Matching,
    Matroids(Arc<[PartitionMatroid]>),
}

impl Constraint {
    /// Independence test for an arbitrary collection of elements.
    pub fn is_independent<'a>(&self, elements: impl IntoIterator<Item = &'a Element>) -> bool {
        let mut set = IndependentSet::new(self.clone());
        elements
            .into_iter()
            .all(|e| set.insert(e.clone()).is_ok())
    }
}

/// Everything about an instance except its element sequence.
#[derive(Debug, Clone)]
pub struct InstanceHeader {
    pub kind: Kind,
    /// Vertex count, or an upper bound on independent-set size for matroid kinds.
    pub n: usize,
    pub m: usize,
    pub constraint: Constraint,
}

impl InstanceHeader {
    pub fn matroids(&self) -> &[PartitionMatroid] {
        match &self.constraint {
            Constraint::Matching => &[],
            Constraint::Matroids(ms) => ms,
        }
    }

    pub fn validate_element(&self, e: &Element) -> Result<()> {
        let in_range = |v: &Vertex| *v >= 1 && (*v as usize) <= self.n;
        match self.kind {
            Kind::Graph => {
                if e.vertices.len() != 2 {
                    return Err(Error::input(format!(
                        "{} must have two distinct endpoints",
                        e.id
                    )));
                }
                if !e.vertices.iter().all(in_range) {
                    return Err(Error::input(format!(
                        "{} has an endpoint outside [1, {}]",
                        e.id, self.n
                    )));
                }
            }
            Kind::Hypergraph { p } => {
                if e.vertices.is_empty() || e.vertices.len() > p {
                    return Err(Error::input(format!(
                        "{} has {} vertices, expected 1..={p}",
                        e.id,
                        e.vertices.len()
                    )));
                }
                if !e.vertices.iter().all(in_range) {
                    return Err(Error::input(format!(
                        "{} has a vertex outside [1, {}]",
                        e.id, self.n
                    )));
                }
            }
            Kind::MatroidIntersection { .. } => {
                if !e.vertices.is_empty() {
                    return Err(Error::input(format!(
                        "matroid element {} must not carry vertices",
                        e.id
                    )));
                }
                for (i, m) in self.matroids().iter().enumerate() {
                    if m.part_of(e.id).is_none() {
                        return Err(Error::input(format!(
                            "{} is not covered by matroid {i}",
                            e.id
                        )));
                    }
                }
            }
        }
        if let Some(w) = e.given_weight {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::input(format!("{} has invalid weight {w}", e.id)));
            }
        }
        Ok(())
    }
}

/// Sequential access to an instance's elements, one pass at a time.
///
/// Multi-pass algorithms call [`StreamSource::replay`] once per pass; a
/// file-backed source re-reads its file each time.
pub trait StreamSource {
    fn header(&self) -> &InstanceHeader;
    fn replay(&self, visit: &mut dyn FnMut(Element) -> Result<()>) -> Result<()>;
}

/// A fully materialized instance. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Instance {
    header: InstanceHeader,
    elements: Vec<Element>,
}

impl Instance {
    pub fn new(
        kind: Kind,
        n: usize,
        elements: Vec<Element>,
        matroids: Vec<PartitionMatroid>,
    ) -> Result<Self> {
        let constraint = match kind {
            Kind::MatroidIntersection { p } => {
                if matroids.len() != p {
                    return Err(Error::input(format!(
                        "expected {p} matroids, got {}",
                        matroids.len()
                    )));
                }
                Constraint::Matroids(matroids.into())
            }
            _ => {
                if !matroids.is_empty() {
                    return Err(Error::input("matching instances take no matroids"));
                }
                Constraint::Matching
            }
        };
        if let Kind::Hypergraph { p } | Kind::MatroidIntersection { p } = kind {
            if p == 0 {
                return Err(Error::input("p must be at least 1"));
            }
        }
        let header = InstanceHeader {
            kind,
            n,
            m: elements.len(),
            constraint,
        };
        let mut ids = BTreeSet::new();
        let mut edge_keys = BTreeSet::new();
        for e in &elements {
            if !ids.insert(e.id) {
                return Err(Error::input(format!("duplicate element id {}", e.id)));
            }
            header.validate_element(e)?;
            if kind.is_matching() && !edge_keys.insert(e.vertices.clone()) {
                return Err(Error::input(format!(
                    "duplicate edge {:?} at {}",
                    e.vertices, e.id
                )));
            }
        }
        Ok(Instance { header, elements })
    }

    pub fn graph(n: usize, elements: Vec<Element>) -> Result<Self> {
        Instance::new(Kind::Graph, n, elements, Vec::new())
    }

    pub fn elements(&self) -> &[Element] {
        &self.elements
    }

    pub fn element(&self, id: ElementId) -> Option<&Element> {
        self.elements.iter().find(|e| e.id == id)
    }

    pub fn ids(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.elements.iter().map(|e| e.id)
    }

    pub fn kind(&self) -> Kind {
        self.header.kind
    }

    pub fn n(&self) -> usize {
        self.header.n
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn constraint(&self) -> &Constraint {
        &self.header.constraint
    }

    pub fn new_independent_set(&self) -> IndependentSet {
        IndependentSet::new(self.header.constraint.clone())
    }
}

impl StreamSource for Instance {
    fn header(&self) -> &InstanceHeader {
        &self.header
    }

    fn replay(&self, visit: &mut dyn FnMut(Element) -> Result<()>) -> Result<()> {
        for e in &self.elements {
            visit(e.clone())?;
        }
        Ok(())
    }
}

/// A set of elements that is independent in its [`Constraint`].
#[derive(Debug, Clone)]
pub struct IndependentSet {
    constraint: Constraint,
    members: BTreeMap<ElementId, Element>,
    occupancy: HashMap<Vertex, ElementId>,
    /// Per matroid: part index -> members lying in that part.
    usage: Vec<HashMap<u32, BTreeSet<ElementId>>>,
}

impl IndependentSet {
    pub fn new(constraint: Constraint) -> Self {
        let usage = match &constraint {
            Constraint::Matching => Vec::new(),
            Constraint::Matroids(ms) => vec![HashMap::new(); ms.len()],
        };
        IndependentSet {
            constraint,
            members: BTreeMap::new(),
            occupancy: HashMap::new(),
            usage,
        }
    }

    pub fn constraint(&self) -> &Constraint {
        &self.constraint
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: ElementId) -> bool {
        self.members.contains_key(&id)
    }

    pub fn get(&self, id: ElementId) -> Option<&Element> {
        self.members.get(&id)
    }

    /// Member ids in ascending order.
    pub fn ids(&self) -> impl Iterator<Item = ElementId> + '_ {
        self.members.keys().copied()
    }

    pub fn id_vec(&self) -> Vec<ElementId> {
        self.ids().collect()
    }

    pub fn elements(&self) -> impl Iterator<Item = &Element> + '_ {
        self.members.values()
    }

    /// The member occupying vertex `v`, if any (matching kinds).
    pub fn occupant(&self, v: Vertex) -> Option<ElementId> {
        self.occupancy.get(&v).copied()
    }

    pub fn can_insert(&self, e: &Element) -> bool {
        if self.members.contains_key(&e.id) {
            return false;
        }
        match &self.constraint {
            Constraint::Matching => e.vertices.iter().all(|v| !self.occupancy.contains_key(v)),
            Constraint::Matroids(ms) => ms.iter().zip(&self.usage).all(|(m, usage)| {
                match m.part_of(e.id) {
                    Some(part) => {
                        let used = usage.get(&part).map_or(0, BTreeSet::len);
                        used < m.capacity(part) as usize
                    }
                    None => false,
                }
            }),
        }
    }

    pub fn insert(&mut self, e: Element) -> Result<()> {
        if !self.can_insert(&e) {
            return Err(Error::invariant(format!(
                "inserting {} would break independence",
                e.id
            )));
        }
        match &self.constraint {
            Constraint::Matching => {
                for &v in &e.vertices {
                    self.occupancy.insert(v, e.id);
                }
            }
            Constraint::Matroids(ms) => {
                for (m, usage) in ms.iter().zip(self.usage.iter_mut()) {
                    let part = m.part_of(e.id).expect("checked by can_insert");
                    usage.entry(part).or_default().insert(e.id);
                }
            }
        }
        self.members.insert(e.id, e);
        Ok(())
    }

    pub fn remove(&mut self, id: ElementId) -> Option<Element> {
        let e = self.members.remove(&id)?;
        match &self.constraint {
            Constraint::Matching => {
                for v in &e.vertices {
                    self.occupancy.remove(v);
                }
            }
            Constraint::Matroids(ms) => {
                for (m, usage) in ms.iter().zip(self.usage.iter_mut()) {
                    if let Some(part) = m.part_of(id) {
                        if let Some(members) = usage.get_mut(&part) {
                            members.remove(&id);
                            if members.is_empty() {
                                usage.remove(&part);
                            }
                        }
                    }
                }
            }
        }
        Some(e)
    }

    /// Members sharing at least one vertex with some element of `a`.
    ///
    /// Only defined for matching kinds; matroid conflicts go through circuits.
    pub fn conflicts<'a>(
        &self,
        a: impl IntoIterator<Item = &'a Element>,
    ) -> Result<BTreeSet<ElementId>> {
        if !matches!(self.constraint, Constraint::Matching) {
            return Err(Error::invariant(
                "conflicts() is only defined for matching constraints",
            ));
        }
        let mut out = BTreeSet::new();
        for e in a {
            for v in &e.vertices {
                if let Some(&id) = self.occupancy.get(v) {
                    out.insert(id);
                }
            }
        }
        Ok(out)
    }

    /// The unique circuit of `self + e` in matroid `index`, or empty if
    /// `self + e` is independent there.
    pub fn circuit(&self, index: usize, e: ElementId) -> Result<Vec<ElementId>> {
        let ms = match &self.constraint {
            Constraint::Matroids(ms) => ms,
            Constraint::Matching => {
                return Err(Error::invariant("circuit() needs a matroid constraint"))
            }
        };
        let m = ms
            .get(index)
            .ok_or_else(|| Error::input(format!("no matroid {index}")))?;
        let part = m
            .part_of(e)
            .ok_or_else(|| Error::input(format!("{e} is in no part of matroid {index}")))?;
        let in_part = self.usage[index].get(&part);
        let used = in_part.map_or(0, BTreeSet::len);
        if used < m.capacity(part) as usize {
            return Ok(Vec::new());
        }
        let mut c: Vec<ElementId> = in_part.into_iter().flatten().copied().collect();
        c.push(e);
        c.sort_unstable();
        Ok(c)
    }

    /// Replaces `remove` (which must be a subset of the members) by `add`.
    ///
    /// The caller guarantees the result is independent; a violation is
    /// reported as an invariant error.
    pub fn apply_augment(&mut self, add: Vec<Element>, remove: &[ElementId]) -> Result<()> {
        for id in remove {
            if !self.contains(*id) {
                return Err(Error::invariant(format!(
                    "augment removes {id}, which is not a member"
                )));
            }
        }
        for id in remove {
            self.remove(*id);
        }
        for e in add {
            let id = e.id;
            self.insert(e).map_err(|_| {
                Error::invariant(format!("augmenting with {id} leaves a dependent set"))
            })?;
        }
        Ok(())
    }

    /// Rebuilds the bookkeeping from scratch and compares it with the
    /// incrementally maintained maps.
    pub fn validate(&self) -> Result<()> {
        let mut fresh = IndependentSet::new(self.constraint.clone());
        for e in self.members.values() {
            fresh.insert(e.clone())?;
        }
        if fresh.occupancy != self.occupancy {
            return Err(Error::invariant("occupancy map out of sync with members"));
        }
        if fresh.usage != self.usage {
            return Err(Error::invariant("matroid usage out of sync with members"));
        }
        for (id, e) in &self.members {
            if *id != e.id {
                return Err(Error::invariant(format!("member keyed {id} has id {}", e.id)));
            }
        }
        Ok(())
    }
}
