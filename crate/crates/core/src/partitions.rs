//! Integer partitions and the partition invariants used throughout the crate:
//! weight, length, union, the componentwise order, refinement, `π_q` and `ρ_q`.
//!
//! Partitions are stored as weakly decreasing vectors of positive parts. The
//! canonical order (the `Ord` impl) sorts by weight first and then reverse
//! lexicographically, so `(4) < (3,1) < (2,2) < (2,1,1) < (1,1,1,1)`; this is
//! the order used for enumeration, JSON output and linear systems.

use std::cmp::Ordering;
use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::fpring::np_contains;

/// Default cap on the weight accepted by [`partitions_of`].
pub const DEFAULT_WEIGHT_CAP: u32 = 64;

#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Partition(Vec<u32>);

impl Partition {
    pub fn empty() -> Self {
        Partition(Vec::new())
    }

    /// Builds a partition from parts in any order. Zero parts are dropped.
    pub fn new(mut parts: Vec<u32>) -> Self {
        parts.retain(|&x| x > 0);
        parts.sort_unstable_by(|a, b| b.cmp(a));
        Partition(parts)
    }

    pub fn single(part: u32) -> Self {
        Partition::new(vec![part])
    }

    pub fn parts(&self) -> &[u32] {
        &self.0
    }

    pub fn weight(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn largest(&self) -> Option<u32> {
        self.0.first().copied()
    }

    pub fn union(&self, other: &Partition) -> Partition {
        let mut parts = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            if self.0[i] >= other.0[j] {
                parts.push(self.0[i]);
                i += 1;
            } else {
                parts.push(other.0[j]);
                j += 1;
            }
        }
        parts.extend_from_slice(&self.0[i..]);
        parts.extend_from_slice(&other.0[j..]);
        Partition(parts)
    }

    /// Removes one occurrence of `part`, if present.
    pub fn remove_part(&self, part: u32) -> Option<Partition> {
        let pos = self.0.iter().position(|&x| x == part)?;
        let mut parts = self.0.clone();
        parts.remove(pos);
        Some(Partition(parts))
    }

    /// Distinct part values, largest first.
    pub fn distinct_parts(&self) -> Vec<u32> {
        let mut out: Vec<u32> = self.0.clone();
        out.dedup();
        out
    }

    /// `(value, multiplicity)` pairs, largest value first.
    pub fn multiplicities(&self) -> Vec<(u32, usize)> {
        let mut out: Vec<(u32, usize)> = Vec::new();
        for &x in &self.0 {
            match out.last_mut() {
                Some((v, m)) if *v == x => *m += 1,
                _ => out.push((x, 1)),
            }
        }
        out
    }

    pub fn count_part(&self, part: u32) -> usize {
        self.0.iter().filter(|&&x| x == part).count()
    }

    /// `α ≥ β`: at least as many parts, and `α_j ≥ β_j` for every part of `β`.
    pub fn dominates(&self, beta: &Partition) -> bool {
        self.len() >= beta.len() && self.0.iter().zip(beta.0.iter()).all(|(a, b)| a >= b)
    }

    /// `α ⪰ β`: `α` splits as `α¹ ∪ ⋯ ∪ αˢ` with `|αⁱ| = β_i`.
    pub fn refines(&self, beta: &Partition) -> bool {
        if self.weight() != beta.weight() || self.len() < beta.len() {
            return false;
        }
        let mut failed = HashSet::new();
        fill_bins(&self.0, 0, beta.0.clone(), &mut failed)
    }

    /// `π_q(α) = Σ ⌊α_j / q⌋`.
    pub fn pi_q(&self, q: u32) -> u32 {
        assert!(q >= 1, "pi_q needs q >= 1");
        self.0.iter().map(|&x| x / q).sum()
    }

    /// Every pair `(β, γ)` of partitions with `β ∪ γ = α`, each exactly once.
    pub fn splittings(&self) -> Vec<(Partition, Partition)> {
        let mults = self.multiplicities();
        let mut out = Vec::new();
        let mut choice = vec![0usize; mults.len()];
        loop {
            let mut left = Vec::new();
            let mut right = Vec::new();
            for (&(v, m), &k) in mults.iter().zip(&choice) {
                left.extend(std::iter::repeat(v).take(k));
                right.extend(std::iter::repeat(v).take(m - k));
            }
            out.push((Partition(left), Partition(right)));
            // odometer over multiplicity choices
            let mut pos = 0;
            loop {
                if pos == mults.len() {
                    out.sort();
                    return out;
                }
                if choice[pos] < mults[pos].1 {
                    choice[pos] += 1;
                    break;
                }
                choice[pos] = 0;
                pos += 1;
            }
        }
    }
}

fn fill_bins(parts: &[u32], idx: usize, mut caps: Vec<u32>, failed: &mut HashSet<(usize, Vec<u32>)>) -> bool {
    if idx == parts.len() {
        return caps.iter().all(|&c| c == 0);
    }
    caps.sort_unstable();
    if failed.contains(&(idx, caps.clone())) {
        return false;
    }
    let part = parts[idx];
    let mut tried = BTreeSet::new();
    for b in 0..caps.len() {
        if caps[b] >= part && tried.insert(caps[b]) {
            let mut next = caps.clone();
            next[b] -= part;
            if fill_bins(parts, idx + 1, next, failed) {
                return true;
            }
        }
    }
    failed.insert((idx, caps));
    false
}

impl Ord for Partition {
    fn cmp(&self, other: &Self) -> Ordering {
        self.weight()
            .cmp(&other.weight())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for Partition {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, x) in self.0.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        write!(f, ")")
    }
}

impl From<&[u32]> for Partition {
    fn from(parts: &[u32]) -> Self {
        Partition::new(parts.to_vec())
    }
}

impl<const N: usize> From<[u32; N]> for Partition {
    fn from(parts: [u32; N]) -> Self {
        Partition::new(parts.to_vec())
    }
}

impl Serialize for Partition {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Partition {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let parts = Vec::<u32>::deserialize(d)?;
        if parts.contains(&0) {
            return Err(serde::de::Error::custom("partition parts must be positive"));
        }
        Ok(Partition::new(parts))
    }
}

/// A set of positive integers: either explicit and finite, or `N_p` minus a
/// finite exclusion set.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum IndexSet {
    Finite { elements: BTreeSet<u32> },
    NpMinus { p: u32, excluded: BTreeSet<u32> },
}

impl IndexSet {
    pub fn finite(elements: impl IntoIterator<Item = u32>) -> Self {
        IndexSet::Finite { elements: elements.into_iter().filter(|&i| i > 0).collect() }
    }

    pub fn np(p: u32) -> Self {
        IndexSet::NpMinus { p, excluded: BTreeSet::new() }
    }

    pub fn np_minus(p: u32, excluded: impl IntoIterator<Item = u32>) -> Self {
        IndexSet::NpMinus { p, excluded: excluded.into_iter().collect() }
    }

    pub fn contains(&self, i: u32) -> bool {
        match self {
            IndexSet::Finite { elements } => elements.contains(&i),
            IndexSet::NpMinus { p, excluded } => np_contains(i, *p) && !excluded.contains(&i),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            IndexSet::Finite { elements } => elements.is_empty(),
            IndexSet::NpMinus { .. } => false,
        }
    }

    /// `N_p ∖ self`.
    pub fn complement_in_np(&self, p: u32) -> IndexSet {
        match self {
            IndexSet::Finite { elements } => IndexSet::np_minus(p, elements.iter().copied()),
            IndexSet::NpMinus { p: q, excluded } => {
                assert_eq!(*q, p, "index set over a different prime");
                IndexSet::finite(excluded.iter().copied().filter(|&i| np_contains(i, p)))
            }
        }
    }

    /// Smallest member congruent to `r` mod `q`, if any.
    fn min_in_class(&self, r: u32, q: u32) -> Option<u32> {
        match self {
            IndexSet::Finite { elements } => elements.iter().copied().find(|&i| i % q == r),
            IndexSet::NpMinus { excluded, .. } => {
                let max_excluded = excluded.iter().copied().max().unwrap_or(0);
                let bound = max_excluded + q * (q + 1) + 64 * q;
                let start = if r == 0 { q } else { r };
                (start..=bound).step_by(q as usize).find(|&i| self.contains(i))
            }
        }
    }
}

/// `ρ_q(I) = inf_{i ∈ I} ⌊i/q⌋ / i`, and `1/q` for the empty set.
///
/// Within a residue class mod `q` the ratio is increasing, so only the
/// smallest member of each class has to be inspected.
pub fn rho_q(set: &IndexSet, q: u32) -> Ratio<u64> {
    assert!(q >= 1, "rho_q needs q >= 1");
    let candidates: Vec<Ratio<u64>> = (0..q)
        .filter_map(|r| set.min_in_class(r, q))
        .map(|i| Ratio::new(u64::from(i / q), u64::from(i)))
        .collect();
    candidates.into_iter().min().unwrap_or_else(|| Ratio::new(1, u64::from(q)))
}

/// All partitions of `n`, in reverse lexicographic order, optionally with
/// every part restricted to `allowed`.
pub fn partitions_of(n: u32, allowed: Option<&IndexSet>) -> Result<Vec<Partition>> {
    partitions_of_capped(n, allowed, DEFAULT_WEIGHT_CAP)
}

pub fn partitions_of_capped(n: u32, allowed: Option<&IndexSet>, cap: u32) -> Result<Vec<Partition>> {
    if n > cap {
        return Err(Error::WeightCap { weight: n, cap });
    }
    let parts: Vec<u32> = (1..=n).rev().filter(|&i| allowed.map_or(true, |s| s.contains(i))).collect();
    let mut out = Vec::new();
    let mut current = Vec::new();
    enumerate(n, &parts, &mut current, &mut out);
    Ok(out)
}

fn enumerate(rest: u32, parts: &[u32], current: &mut Vec<u32>, out: &mut Vec<Partition>) {
    if rest == 0 {
        out.push(Partition(current.clone()));
        return;
    }
    for (k, &part) in parts.iter().enumerate() {
        if part <= rest {
            current.push(part);
            enumerate(rest - part, &parts[k..], current, out);
            current.pop();
        }
    }
}

/// Dense numbering of every partition of weight at most `max_weight`, in
/// canonical order, with precomputed "remove one part" links.
#[derive(Debug)]
pub struct PartitionIndex {
    max_weight: u32,
    partitions: Vec<Partition>,
    lookup: HashMap<Partition, usize>,
    removals: Vec<Vec<(u32, usize)>>,
}

impl PartitionIndex {
    pub fn new(max_weight: u32) -> Self {
        let mut partitions = Vec::new();
        for w in 0..=max_weight {
            partitions.extend(partitions_of_capped(w, None, u32::MAX).expect("uncapped"));
        }
        let lookup: HashMap<Partition, usize> =
            partitions.iter().cloned().enumerate().map(|(k, a)| (a, k)).collect();
        let removals = partitions
            .iter()
            .map(|a| {
                a.distinct_parts()
                    .into_iter()
                    .map(|v| (v, lookup[&a.remove_part(v).expect("part present")]))
                    .collect()
            })
            .collect();
        PartitionIndex { max_weight, partitions, lookup, removals }
    }

    pub fn max_weight(&self) -> u32 {
        self.max_weight
    }

    pub fn len(&self) -> usize {
        self.partitions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.partitions.is_empty()
    }

    pub fn get(&self, k: usize) -> &Partition {
        &self.partitions[k]
    }

    pub fn position(&self, alpha: &Partition) -> Option<usize> {
        self.lookup.get(alpha).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Partition> {
        self.partitions.iter()
    }

    /// `(part, index of α minus that part)` for each distinct part of `α`.
    pub fn removals(&self, k: usize) -> &[(u32, usize)] {
        &self.removals[k]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(parts: &[u32]) -> Partition {
        Partition::from(parts)
    }

    #[test]
    fn weight_and_union() {
        assert_eq!(Partition::empty().weight(), 0);
        assert_eq!(p(&[4, 2, 1]).weight(), 7);
        assert_eq!(p(&[5, 5]).weight(), 10);
        assert_eq!(p(&[3, 1]).union(&p(&[2])), p(&[3, 2, 1]));
        assert_eq!(p(&[3, 1]).union(&Partition::empty()), p(&[3, 1]));
        assert_eq!(p(&[2, 1]).union(&p(&[2, 1])), p(&[2, 2, 1, 1]));
    }

    #[test]
    fn dominates_examples() {
        assert!(p(&[3, 2]).dominates(&p(&[2, 2])));
        assert!(!p(&[3]).dominates(&p(&[1, 1])));
        assert!(p(&[3, 2]).dominates(&Partition::empty()));
    }

    #[test]
    fn refines_examples() {
        assert!(p(&[2, 1, 1]).refines(&p(&[2, 2])));
        assert!(!p(&[3]).refines(&p(&[2, 1])));
        assert!(p(&[4, 2, 1]).refines(&p(&[4, 2, 1])));
        assert!(p(&[3, 3, 2, 2]).refines(&p(&[5, 5])));
        assert!(!p(&[4, 4, 2]).refines(&p(&[5, 5])));
    }

    #[test]
    fn pi_q_examples() {
        assert_eq!(p(&[4, 2, 1]).pi_q(2), 3);
        assert_eq!(p(&[5, 3, 1]).pi_q(3), 2);
        assert_eq!(Partition::empty().pi_q(7), 0);
    }

    #[test]
    fn rho_examples() {
        assert_eq!(rho_q(&IndexSet::np(2), 2), Ratio::new(2, 5));
        assert_eq!(rho_q(&IndexSet::finite([]), 3), Ratio::new(1, 3));
        assert_eq!(rho_q(&IndexSet::finite([6, 8]), 3), Ratio::new(1, 4));
        // 7 ∉ N_2, so the smallest odd member is 9
        let r = rho_q(&IndexSet::np_minus(2, [5]), 2);
        assert_eq!(r, Ratio::new(4, 9));
        assert!(r >= Ratio::new(3, 7));
    }

    #[test]
    fn enumeration_order() {
        let all = partitions_of(4, None).unwrap();
        let expected: Vec<Partition> =
            vec![p(&[4]), p(&[3, 1]), p(&[2, 2]), p(&[2, 1, 1]), p(&[1, 1, 1, 1])];
        assert_eq!(all, expected);
        assert_eq!(partitions_of(0, None).unwrap(), vec![Partition::empty()]);
        assert_eq!(partitions_of(4, Some(&IndexSet::np(2))).unwrap(), vec![p(&[4]), p(&[2, 2])]);
        let mut sorted = all.clone();
        sorted.sort();
        assert_eq!(sorted, all);
        assert!(matches!(partitions_of(65, None), Err(Error::WeightCap { .. })));
    }

    #[test]
    fn splitting_examples() {
        let s = p(&[2, 2]).splittings();
        assert_eq!(s.len(), 3);
        assert!(s.contains(&(p(&[2]), p(&[2]))));
        assert_eq!(Partition::empty().splittings(), vec![(Partition::empty(), Partition::empty())]);
        let s = p(&[2, 1]).splittings();
        assert_eq!(s.len(), 4);
        assert!(s.contains(&(p(&[2]), p(&[1]))) && s.contains(&(p(&[1]), p(&[2]))));
    }

    #[test]
    fn index_removals() {
        let idx = PartitionIndex::new(6);
        let k = idx.position(&p(&[3, 2, 1])).unwrap();
        let targets: Vec<Partition> = idx.removals(k).iter().map(|&(_, j)| idx.get(j).clone()).collect();
        assert_eq!(targets, vec![p(&[2, 1]), p(&[3, 1]), p(&[3, 2])]);
        assert_eq!(idx.len(), 1 + 1 + 2 + 3 + 5 + 7 + 11);
    }

    #[test]
    fn json_form() {
        assert_eq!(serde_json::to_string(&p(&[4, 2, 1])).unwrap(), "[4,2,1]");
        assert_eq!(serde_json::to_string(&Partition::empty()).unwrap(), "[]");
        let back: Partition = serde_json::from_str("[1,4,2]").unwrap();
        assert_eq!(back, p(&[4, 2, 1]));
    }
}
