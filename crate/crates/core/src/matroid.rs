//! Partition matroids (uniform matroids are the single-part case) and their
//! circuit oracle.

use std::collections::{BTreeSet, HashMap};

use crate::error::{Error, Result};
use crate::model::ElementId;

/// `I` is independent iff `|I ∩ E^j| <= k^j` for every part `j`.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionMatroid {
    parts: Vec<Vec<ElementId>>,
    capacities: Vec<u32>,
    /// Dense lookup indexed by element id.
    part_of: Vec<Option<u32>>,
}

impl PartitionMatroid {
    pub fn from_parts(parts: Vec<Vec<ElementId>>, capacities: Vec<u32>) -> Result<Self> {
        if parts.len() != capacities.len() {
            return Err(Error::input(format!(
                "{} parts but {} capacities",
                parts.len(),
                capacities.len()
            )));
        }
        if let Some(j) = capacities.iter().position(|&k| k == 0) {
            return Err(Error::input(format!("part {j} has capacity 0")));
        }
        let max_id = parts.iter().flatten().map(|e| e.index()).max();
        let mut part_of = vec![None; max_id.map_or(0, |m| m + 1)];
        for (j, part) in parts.iter().enumerate() {
            for e in part {
                if let Some(prev) = part_of[e.index()] {
                    return Err(Error::input(format!(
                        "element {e} lies in parts {prev} and {j}"
                    )));
                }
                part_of[e.index()] = Some(j as u32);
            }
        }
        let parts = parts
            .into_iter()
            .map(|mut p| {
                p.sort_unstable();
                p
            })
            .collect();
        Ok(PartitionMatroid {
            parts,
            capacities,
            part_of,
        })
    }

    /// The uniform matroid of rank `k` on `ground`.
    pub fn uniform(ground: impl IntoIterator<Item = ElementId>, k: u32) -> Result<Self> {
        PartitionMatroid::from_parts(vec![ground.into_iter().collect()], vec![k])
    }

    pub fn part_of(&self, e: ElementId) -> Option<u32> {
        self.part_of.get(e.index()).copied().flatten()
    }

    pub fn capacity(&self, part: u32) -> u32 {
        self.capacities[part as usize]
    }

    pub fn parts(&self) -> &[Vec<ElementId>] {
        &self.parts
    }

    pub fn capacities(&self) -> &[u32] {
        &self.capacities
    }

    /// Largest possible independent set: `Σ_j min(k^j, |E^j|)`.
    pub fn rank_bound(&self) -> usize {
        self.parts
            .iter()
            .zip(&self.capacities)
            .map(|(p, &k)| p.len().min(k as usize))
            .sum()
    }

    pub fn is_independent(&self, set: impl IntoIterator<Item = ElementId>) -> bool {
        let mut used: HashMap<u32, u32> = HashMap::new();
        for e in set {
            let Some(part) = self.part_of(e) else {
                return false;
            };
            let c = used.entry(part).or_insert(0);
            *c += 1;
            if *c > self.capacity(part) {
                return false;
            }
        }
        true
    }

    /// Circuit of `independent + e`, or empty when `independent + e` is
    /// independent. For a partition matroid the circuit is unique: `e` plus
    /// the `k^j` members of `independent` in `e`'s part.
    pub fn circuit(&self, independent: &BTreeSet<ElementId>, e: ElementId) -> Result<Vec<ElementId>> {
        let part = self
            .part_of(e)
            .ok_or_else(|| Error::input(format!("{e} is in no part of this matroid")))?;
        if independent.contains(&e) {
            return Err(Error::input(format!("{e} is already in the set")));
        }
        let mut same_part: Vec<ElementId> = independent
            .iter()
            .copied()
            .filter(|&x| self.part_of(x) == Some(part))
            .collect();
        let k = self.capacity(part) as usize;
        if same_part.len() > k {
            return Err(Error::input("circuit() called with a dependent set"));
        }
        if same_part.len() < k {
            return Ok(Vec::new());
        }
        same_part.push(e);
        same_part.sort_unstable();
        Ok(same_part)
    }
}

pub fn is_independent_intersection(
    matroids: &[PartitionMatroid],
    set: &BTreeSet<ElementId>,
) -> bool {
    matroids.iter().all(|m| m.is_independent(set.iter().copied()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ids(v: &[u32]) -> Vec<ElementId> {
        v.iter().map(|&i| ElementId(i)).collect()
    }

    fn set(v: &[u32]) -> BTreeSet<ElementId> {
        v.iter().map(|&i| ElementId(i)).collect()
    }

    #[test]
    fn circuit_capacity_exceeded_by_one() {
        let m = PartitionMatroid::from_parts(vec![ids(&[0, 1])], vec![1]).unwrap();
        assert_eq!(m.circuit(&set(&[0]), ElementId(1)).unwrap(), ids(&[0, 1]));
    }

    #[test]
    fn circuit_of_independent_extension_is_empty() {
        let m = PartitionMatroid::from_parts(vec![ids(&[0, 1])], vec![1]).unwrap();
        assert!(m.circuit(&set(&[]), ElementId(0)).unwrap().is_empty());
    }

    #[test]
    fn circuit_uniform_rank_two() {
        let m = PartitionMatroid::uniform(ids(&[0, 1, 2]), 2).unwrap();
        assert_eq!(m.circuit(&set(&[0, 1]), ElementId(2)).unwrap(), ids(&[0, 1, 2]));
    }

    #[test]
    fn circuit_unknown_element() {
        let m = PartitionMatroid::uniform(ids(&[0, 1]), 1).unwrap();
        assert!(m.circuit(&set(&[]), ElementId(7)).is_err());
    }

    #[test]
    fn rejects_overlap_and_zero_capacity() {
        assert!(PartitionMatroid::from_parts(vec![ids(&[0, 1]), ids(&[1])], vec![1, 1]).is_err());
        assert!(PartitionMatroid::from_parts(vec![ids(&[0])], vec![0]).is_err());
        assert!(PartitionMatroid::from_parts(vec![ids(&[0])], vec![1, 2]).is_err());
    }

    #[test]
    fn bipartite_encoding_independence() {
        // edges: 0=(L1,R1) 1=(L1,R2) 2=(L2,R2)
        let left = PartitionMatroid::from_parts(vec![ids(&[0, 1]), ids(&[2])], vec![1, 1]).unwrap();
        let right = PartitionMatroid::from_parts(vec![ids(&[0]), ids(&[1, 2])], vec![1, 1]).unwrap();
        let ms = [left, right];
        assert!(is_independent_intersection(&ms, &set(&[])));
        assert!(is_independent_intersection(&ms, &set(&[0, 2])));
        assert!(!is_independent_intersection(&ms, &set(&[0, 1])));
    }

    #[test]
    fn rank_bound_sums_capped_parts() {
        let m = PartitionMatroid::from_parts(vec![ids(&[0, 1, 2]), ids(&[3])], vec![2, 5]).unwrap();
        assert_eq!(m.rank_bound(), 3);
    }
}
