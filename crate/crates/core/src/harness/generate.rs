//! Seeded random instances.

use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::format::FamilyKind;
use crate::error::{Error, Result};
use crate::matroid::PartitionMatroid;
use crate::model::{Constraint, Element, ElementId, Instance, Kind};
use crate::oracle::OracleFamily;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GenKind {
    Graph,
    Hypergraph { p: usize },
    /// Intersection of `p` random partition matroids.
    Matroid { p: usize },
    /// A bipartite graph written as the intersection of two partition
    /// matroids, one per side, each vertex a capacity-1 part.
    Bipartite,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GenSpec {
    pub kind: GenKind,
    /// Vertex count (graph kinds, bipartite: both sides together) or the
    /// number of parts per matroid.
    pub n: usize,
    pub m: usize,
    pub family: FamilyKind,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct Generated {
    pub instance: Instance,
    pub family: OracleFamily,
    /// For bipartite encodings, the same elements as graph edges.
    pub graph: Option<Instance>,
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

/// Generates an instance. Output is a pure function of `spec`.
pub fn generate(spec: &GenSpec) -> Result<Generated> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (instance, graph) = match spec.kind {
        GenKind::Graph => (random_matching_instance(&mut rng, spec.n, spec.m, 2, true)?, None),
        GenKind::Hypergraph { p } => {
            if p == 0 {
                return Err(Error::parameter("p must be at least 1"));
            }
            (random_matching_instance(&mut rng, spec.n, spec.m, p, false)?, None)
        }
        GenKind::Matroid { p } => (random_matroid_instance(&mut rng, spec.n, spec.m, p)?, None),
        GenKind::Bipartite => {
            let (inst, g) = random_bipartite(&mut rng, spec.n, spec.m)?;
            (inst, Some(g))
        }
    };
    let family = random_family(&mut rng, spec.family, instance.len(), instance.n());
    // modular weights double as given weights on the elements
    let (instance, graph) = if family.is_modular() {
        let graph = graph.map(|g| with_given_weights(&g, &family)).transpose()?;
        (with_given_weights(&instance, &family)?, graph)
    } else {
        (instance, graph)
    };
    Ok(Generated { instance, family, graph })
}

fn with_given_weights(instance: &Instance, family: &OracleFamily) -> Result<Instance> {
    let elements = instance
        .elements()
        .iter()
        .map(|e| e.clone().with_weight(family.modular_weight(e.id).unwrap_or(0.0)))
        .collect();
    Instance::new(instance.kind(), instance.n(), elements, match instance.constraint() {
        Constraint::Matching => Vec::new(),
        Constraint::Matroids(ms) => ms.to_vec(),
    })
}

fn random_matching_instance(rng: &mut ChaCha8Rng, n: usize, m: usize, p: usize, graph: bool) -> Result<Instance> {
    let max = if graph {
        binomial(n, 2)
    } else {
        (1..=p).map(|k| binomial(n, k)).fold(0usize, usize::saturating_add)
    };
    if m > max {
        return Err(Error::parameter(format!("{m} distinct edges do not fit on {n} vertices")));
    }
    let mut edges: Vec<Vec<u32>> = Vec::with_capacity(m);
    if graph {
        let pairs: Vec<(u32, u32)> = (1..=n as u32)
            .flat_map(|u| ((u + 1)..=n as u32).map(move |v| (u, v)))
            .collect();
        for i in index::sample(rng, pairs.len(), m) {
            edges.push(vec![pairs[i].0, pairs[i].1]);
        }
    } else {
        let mut seen = std::collections::BTreeSet::new();
        while edges.len() < m {
            let size = rng.gen_range(1..=p.min(n));
            let mut vs: Vec<u32> = index::sample(rng, n, size).into_iter().map(|v| v as u32 + 1).collect();
            vs.sort_unstable();
            if seen.insert(vs.clone()) {
                edges.push(vs);
            }
        }
    }
    edges.shuffle(rng);
    let elements = edges
        .into_iter()
        .enumerate()
        .map(|(i, vs)| Element::new(i as u32, vs))
        .collect();
    let kind = if graph { Kind::Graph } else { Kind::Hypergraph { p } };
    Instance::new(kind, n, elements, Vec::new())
}

fn random_matroid_instance(rng: &mut ChaCha8Rng, parts: usize, m: usize, p: usize) -> Result<Instance> {
    if p == 0 || parts == 0 {
        return Err(Error::parameter("matroid instances need p >= 1 and at least one part"));
    }
    let mut matroids = Vec::with_capacity(p);
    for _ in 0..p {
        let mut buckets: Vec<Vec<ElementId>> = vec![Vec::new(); parts];
        for e in 0..m {
            buckets[rng.gen_range(0..parts)].push(ElementId(e as u32));
        }
        buckets.retain(|b| !b.is_empty());
        let caps = buckets.iter().map(|_| rng.gen_range(1..=2)).collect();
        matroids.push(PartitionMatroid::from_parts(buckets, caps)?);
    }
    let n = matroids.iter().map(|m| m.rank_bound()).min().unwrap_or(0);
    let elements = (0..m as u32).map(|i| Element::new(i, [])).collect();
    Instance::new(Kind::MatroidIntersection { p }, n, elements, matroids)
}

fn random_bipartite(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Result<(Instance, Instance)> {
    let left = n / 2;
    let right = n - left;
    if m > left * right {
        return Err(Error::parameter(format!("{m} edges do not fit in a {left}x{right} bipartite graph")));
    }
    let mut pairs: Vec<(u32, u32)> = index::sample(rng, left * right, m)
        .into_iter()
        .map(|k| ((k / right) as u32 + 1, (k % right) as u32 + 1))
        .collect();
    pairs.shuffle(rng);
    let side = |pick: fn(&(u32, u32)) -> u32, count: usize| {
        let mut parts = vec![Vec::new(); count];
        for (i, pr) in pairs.iter().enumerate() {
            parts[pick(pr) as usize - 1].push(ElementId(i as u32));
        }
        parts.retain(|p: &Vec<ElementId>| !p.is_empty());
        let caps = vec![1; parts.len()];
        PartitionMatroid::from_parts(parts, caps)
    };
    let matroids = vec![side(|p| p.0, left)?, side(|p| p.1, right)?];
    let elements = (0..m as u32).map(|i| Element::new(i, [])).collect();
    let k = left.min(right);
    let inst = Instance::new(Kind::MatroidIntersection { p: 2 }, k, elements, matroids)?;
    let edges = pairs
        .iter()
        .enumerate()
        .map(|(i, &(l, r))| Element::edge(i as u32, l, left as u32 + r))
        .collect();
    let graph = Instance::graph(n, edges)?;
    Ok((inst, graph))
}

fn random_family(rng: &mut ChaCha8Rng, family: FamilyKind, m: usize, n: usize) -> OracleFamily {
    let ids = (0..m as u32).map(ElementId);
    match family {
        FamilyKind::Modular => {
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=20) as f64).collect();
            OracleFamily::modular(ids.zip(w)).expect("generated weights are valid")
        }
        FamilyKind::Coverage => {
            let universe = (2 * n.max(2)).min(128) as u32;
            let sets: Vec<Vec<u32>> = (0..m)
                .map(|_| {
                    let k = rng.gen_range(1..=4usize.min(universe as usize));
                    index::sample(rng, universe as usize, k).into_iter().map(|x| x as u32).collect()
                })
                .collect();
            OracleFamily::coverage(ids.zip(sets))
        }
        FamilyKind::SaturatedAdditive => {
            let w: Vec<f64> = (0..m).map(|_| rng.gen_range(1..=10) as f64).collect();
            let total: f64 = w.iter().sum();
            let cap = (total * rng.gen_range(0.2..0.8)).round().max(1.0);
            OracleFamily::saturated_additive(ids.zip(w), cap).expect("generated weights are valid")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::format::write_instance;

    fn spec(kind: GenKind, n: usize, m: usize, family: FamilyKind, seed: u64) -> GenSpec {
        GenSpec { kind, n, m, family, seed }
    }

    #[test]
    fn same_seed_same_bytes() {
        let s = spec(GenKind::Graph, 8, 12, FamilyKind::Modular, 7);
        let a = generate(&s).unwrap();
        let b = generate(&s).unwrap();
        assert_eq!(
            write_instance(&a.instance, &a.family).unwrap(),
            write_instance(&b.instance, &b.family).unwrap()
        );
        let c = generate(&GenSpec { seed: 8, ..s }).unwrap();
        assert_ne!(
            write_instance(&a.instance, &a.family).unwrap(),
            write_instance(&c.instance, &c.family).unwrap()
        );
    }

    #[test]
    fn hyperedges_respect_p() {
        let g = generate(&spec(GenKind::Hypergraph { p: 3 }, 9, 15, FamilyKind::Coverage, 1)).unwrap();
        assert!(g.instance.elements().iter().all(|e| (1..=3).contains(&e.vertices.len())));
    }

    #[test]
    fn infeasible_edge_count() {
        let r = generate(&spec(GenKind::Graph, 4, 7, FamilyKind::Modular, 0));
        assert!(matches!(r, Err(Error::Parameter(_))));
    }

    #[test]
    fn bipartite_encoding_matches_graph() {
        let g = generate(&spec(GenKind::Bipartite, 6, 7, FamilyKind::Modular, 3)).unwrap();
        let graph = g.graph.unwrap();
        let m = g.instance.len();
        for mask in 0u32..(1 << m) {
            let chosen = |inst: &Instance| -> Vec<Element> {
                (0..m).filter(|i| mask & (1 << i) != 0).map(|i| inst.elements()[i].clone()).collect()
            };
            let a = g.instance.constraint().is_independent(chosen(&g.instance).iter());
            let b = graph.constraint().is_independent(chosen(&graph).iter());
            assert_eq!(a, b, "mask {mask:b}");
        }
    }
}
