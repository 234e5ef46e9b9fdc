//! Occurrence distributions with incrementally maintained Shannon entropy.
//!
//! Entropy (in nats) is kept in the form `H = ln(N) - S / N`, where `N` is
//! the total count and `S = Σ c·ln c` is cached. Adding or removing a
//! document only touches the terms of the entities it mentions.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::corpus::Document;
use crate::error::{Error, Result};

/// Accumulators are recomputed from the counts after this many mutations.
pub const REBUILD_INTERVAL: u32 = 4096;

#[inline]
fn xlogx(c: u64) -> f64 {
    if c == 0 {
        0.0
    } else {
        let c = c as f64;
        c * c.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntityDistribution<K: Ord = String> {
    counts: BTreeMap<K, u64>,
    total: u64,
    sum_c_log_c: f64,
    mutations: u32,
}

impl<K: Ord> Default for EntityDistribution<K> {
    fn default() -> Self {
        EntityDistribution {
            counts: BTreeMap::new(),
            total: 0,
            sum_c_log_c: 0.0,
            mutations: 0,
        }
    }
}

impl<K: Ord + Clone> EntityDistribution<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a distribution from raw counts; zero counts are skipped and
    /// repeated keys accumulate.
    pub fn from_counts(counts: impl IntoIterator<Item = (K, u64)>) -> Self {
        let mut map = BTreeMap::new();
        for (k, c) in counts {
            if c > 0 {
                *map.entry(k).or_insert(0) += c;
            }
        }
        let mut dist = EntityDistribution {
            counts: map,
            total: 0,
            sum_c_log_c: 0.0,
            mutations: 0,
        };
        dist.rebuild();
        dist
    }

    pub fn counts(&self) -> &BTreeMap<K, u64> {
        &self.counts
    }

    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn sum_c_log_c(&self) -> f64 {
        self.sum_c_log_c
    }

    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }

    pub fn count(&self, key: &K) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }

    /// Recomputes `Σ c·ln c` from the counts in key order.
    pub fn recomputed_sum_c_log_c(&self) -> f64 {
        self.counts.values().map(|&c| xlogx(c)).sum()
    }

    /// Restores the accumulators from the counts.
    pub fn rebuild(&mut self) {
        self.total = self.counts.values().sum();
        self.sum_c_log_c = self.recomputed_sum_c_log_c();
        self.mutations = 0;
    }

    /// Shannon entropy in nats.
    pub fn entropy(&self) -> Result<f64> {
        entropy_from_parts(self.total, self.sum_c_log_c, self.counts.len())
    }

    /// Entropy computed directly from `-Σ p·ln p`, ignoring the cache.
    pub fn entropy_from_scratch(&self) -> Result<f64> {
        if self.total == 0 {
            return Err(Error::EmptyDistribution);
        }
        let n = self.total as f64;
        Ok(-self
            .counts
            .values()
            .map(|&c| {
                let p = c as f64 / n;
                p * p.ln()
            })
            .sum::<f64>())
    }

    fn delta_add(&self, additions: &[(K, u64)]) -> (f64, u64, usize) {
        let mut delta = 0.0;
        let mut added = 0;
        let mut new_keys = 0;
        for (k, m) in additions {
            let c = self.count(k);
            if c == 0 && *m > 0 {
                new_keys += 1;
            }
            delta += xlogx(c + m) - xlogx(c);
            added += m;
        }
        (delta, added, new_keys)
    }

    /// Entropy after adding `additions`, without mutating the distribution.
    ///
    /// `additions` must not repeat a key.
    pub fn entropy_after(&self, additions: &[(K, u64)]) -> Result<f64> {
        let (delta, added, new_keys) = self.delta_add(additions);
        entropy_from_parts(
            self.total + added,
            self.sum_c_log_c + delta,
            self.counts.len() + new_keys,
        )
    }

    /// Adds counts; `additions` must not repeat a key.
    pub fn add(&mut self, additions: &[(K, u64)]) {
        let (delta, added, _) = self.delta_add(additions);
        self.sum_c_log_c += delta;
        self.total += added;
        for (k, m) in additions {
            if *m > 0 {
                *self.counts.entry(k.clone()).or_insert(0) += m;
            }
        }
        self.bump();
    }

    /// Removes counts previously added. Fails without mutating when a
    /// count would become negative.
    pub fn remove(&mut self, removals: &[(K, u64)]) -> Result<()> {
        let mut delta = 0.0;
        let mut removed = 0;
        for (k, m) in removals {
            let c = self.count(k);
            if c < *m {
                return Err(Error::Data(
                    "cannot remove more occurrences than recorded".into(),
                ));
            }
            delta += xlogx(c - m) - xlogx(c);
            removed += m;
        }
        self.sum_c_log_c += delta;
        self.total -= removed;
        for (k, m) in removals {
            if *m == 0 {
                continue;
            }
            let slot = self.counts.get_mut(k).expect("checked above");
            *slot -= m;
            if *slot == 0 {
                self.counts.remove(k);
            }
        }
        self.bump();
        Ok(())
    }

    fn bump(&mut self) {
        self.mutations += 1;
        if self.mutations >= REBUILD_INTERVAL {
            self.rebuild();
        }
    }
}

fn entropy_from_parts(total: u64, sum_c_log_c: f64, distinct: usize) -> Result<f64> {
    if total == 0 {
        return Err(Error::EmptyDistribution);
    }
    if distinct == 1 {
        return Ok(0.0);
    }
    let n = total as f64;
    Ok((n.ln() - sum_c_log_c / n).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPair {
    pub h_organisms: f64,
    pub h_chemicals: f64,
}

/// Euclidean distance between `h` and the utopian point `(max_o, max_c)`.
pub fn utopian_distance(h: EntropyPair, max_o: f64, max_c: f64) -> f64 {
    (h.h_organisms - max_o).hypot(h.h_chemicals - max_c)
}

/// Per-entity relation counts contributed by one document, keys sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct DocProfile<K> {
    pub organisms: Vec<(K, u64)>,
    pub chemicals: Vec<(K, u64)>,
}

impl<K: Ord + Clone> DocProfile<K> {
    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a K, &'a K)>) -> Self
    where
        K: 'a,
    {
        let mut organisms: BTreeMap<K, u64> = BTreeMap::new();
        let mut chemicals: BTreeMap<K, u64> = BTreeMap::new();
        for (o, c) in pairs {
            *organisms.entry(o.clone()).or_insert(0) += 1;
            *chemicals.entry(c.clone()).or_insert(0) += 1;
        }
        DocProfile {
            organisms: organisms.into_iter().collect(),
            chemicals: chemicals.into_iter().collect(),
        }
    }

    pub fn n_relations(&self) -> u64 {
        self.organisms.iter().map(|(_, c)| c).sum()
    }
}

impl DocProfile<String> {
    pub fn from_document(doc: &Document) -> Self {
        DocProfile::from_pairs(
            doc.relations
                .iter()
                .map(|r| (&r.organism.id, &r.chemical.id)),
        )
    }
}

/// Organism and chemical distributions of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistributionPair<K: Ord = String> {
    pub organisms: EntityDistribution<K>,
    pub chemicals: EntityDistribution<K>,
}

impl<K: Ord> Default for DistributionPair<K> {
    fn default() -> Self {
        DistributionPair {
            organisms: EntityDistribution::default(),
            chemicals: EntityDistribution::default(),
        }
    }
}

impl<K: Ord + Clone> DistributionPair<K> {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn apply(&mut self, doc: &DocProfile<K>) {
        self.organisms.add(&doc.organisms);
        self.chemicals.add(&doc.chemicals);
    }

    pub fn remove(&mut self, doc: &DocProfile<K>) -> Result<()> {
        // Validate both sides before touching either.
        for (dist, part) in [(&self.organisms, &doc.organisms), (&self.chemicals, &doc.chemicals)] {
            if part.iter().any(|(k, m)| dist.count(k) < *m) {
                return Err(Error::Data(
                    "document was not applied to this distribution".into(),
                ));
            }
        }
        self.organisms.remove(&doc.organisms)?;
        self.chemicals.remove(&doc.chemicals)
    }

    pub fn entropy(&self) -> Result<EntropyPair> {
        Ok(EntropyPair {
            h_organisms: self.organisms.entropy()?,
            h_chemicals: self.chemicals.entropy()?,
        })
    }

    pub fn peek(&self, doc: &DocProfile<K>) -> Result<EntropyPair> {
        Ok(EntropyPair {
            h_organisms: self.organisms.entropy_after(&doc.organisms)?,
            h_chemicals: self.chemicals.entropy_after(&doc.chemicals)?,
        })
    }
}

pub fn apply_document(pair: &mut DistributionPair, doc: &Document) {
    pair.apply(&DocProfile::from_document(doc));
}

pub fn remove_document(pair: &mut DistributionPair, doc: &Document) -> Result<()> {
    pair.remove(&DocProfile::from_document(doc))
}

/// `(H_{S+d}(O), H_{S+d}(C))` without mutating the sample.
pub fn peek_entropy_after(pair: &DistributionPair, doc: &Document) -> Result<EntropyPair> {
    pair.peek(&DocProfile::from_document(doc))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::test_doc;

    fn dist(counts: &[(&str, u64)]) -> EntityDistribution {
        EntityDistribution::from_counts(counts.iter().map(|(k, c)| (k.to_string(), *c)))
    }

    /// Independent evaluation of -Σ p ln p.
    fn scalar_entropy(counts: &[u64]) -> f64 {
        let n: u64 = counts.iter().sum();
        counts
            .iter()
            .map(|&c| {
                let p = c as f64 / n as f64;
                -p * p.ln()
            })
            .sum()
    }

    #[test]
    fn singleton_is_zero() {
        assert_eq!(dist(&[("o1", 5)]).entropy().unwrap(), 0.0);
        assert_eq!(dist(&[("o1", 1)]).entropy().unwrap(), 0.0);
    }

    #[test]
    fn uniform_is_ln_k() {
        let h = dist(&[("a", 1), ("b", 1), ("c", 1), ("d", 1)]).entropy().unwrap();
        assert!((h - 4f64.ln()).abs() < 1e-12);
        assert!((h - 1.386294).abs() < 1e-6);
    }

    #[test]
    fn skewed_matches_scalar_evaluation() {
        let h = dist(&[("a", 2), ("b", 1), ("c", 1)]).entropy().unwrap();
        let expected = scalar_entropy(&[2, 1, 1]);
        assert!((h - expected).abs() < 1e-12);
        assert!((h - 1.039721).abs() < 1e-6);
    }

    #[test]
    fn empty_distribution_errors() {
        assert!(matches!(
            EntityDistribution::<String>::new().entropy(),
            Err(Error::EmptyDistribution)
        ));
    }

    #[test]
    fn apply_counts_each_relation() {
        let mut pair = DistributionPair::new();
        let d = test_doc("d", "Fungi", &[("o1", "c1"), ("o1", "c2")]);
        apply_document(&mut pair, &d);
        assert_eq!(pair.organisms.counts().len(), 1);
        assert_eq!(pair.organisms.count(&"o1".to_string()), 2);
        assert_eq!(pair.chemicals.count(&"c1".to_string()), 1);
        assert_eq!(pair.chemicals.count(&"c2".to_string()), 1);
        assert_eq!(pair.organisms.total(), 2);
    }

    #[test]
    fn apply_then_remove_restores() {
        let mut pair = DistributionPair::new();
        apply_document(&mut pair, &test_doc("a", "F", &[("o1", "c1"), ("o2", "c1")]));
        let before = pair.clone();
        let d = test_doc("b", "F", &[("o1", "c3"), ("o3", "c1")]);
        apply_document(&mut pair, &d);
        remove_document(&mut pair, &d).unwrap();
        assert_eq!(pair.organisms.counts(), before.organisms.counts());
        assert_eq!(pair.chemicals.counts(), before.chemicals.counts());
        assert!((pair.organisms.sum_c_log_c() - before.organisms.sum_c_log_c()).abs() < 1e-12);
        assert!((pair.chemicals.sum_c_log_c() - before.chemicals.sum_c_log_c()).abs() < 1e-12);
    }

    #[test]
    fn remove_unknown_document_fails_cleanly() {
        let mut pair = DistributionPair::new();
        apply_document(&mut pair, &test_doc("a", "F", &[("o1", "c1")]));
        let snapshot = pair.clone();
        assert!(remove_document(&mut pair, &test_doc("b", "F", &[("o1", "c9")])).is_err());
        assert_eq!(pair, snapshot);
    }

    #[test]
    fn peek_equals_apply_exactly() {
        let mut pair = DistributionPair::new();
        apply_document(&mut pair, &test_doc("a", "F", &[("o1", "c1"), ("o2", "c2")]));
        let d = test_doc("b", "F", &[("o1", "c3"), ("o3", "c1"), ("o1", "c4")]);
        let peeked = peek_entropy_after(&pair, &d).unwrap();
        apply_document(&mut pair, &d);
        assert_eq!(peeked, pair.entropy().unwrap());
    }

    #[test]
    fn peek_touches_only_mentioned_terms() {
        let base = dist(&[("a", 3), ("b", 2), ("c", 1)]);
        let before = base.sum_c_log_c();
        let mut after = base.clone();
        after.add(&[("b".to_string(), 1)]);
        let expected_delta = xlogx(3) - xlogx(2);
        assert!((after.sum_c_log_c() - before - expected_delta).abs() < 1e-12);
    }

    #[test]
    fn peek_does_not_mutate() {
        let mut pair = DistributionPair::new();
        apply_document(&mut pair, &test_doc("a", "F", &[("o1", "c1")]));
        let before = serde_json::to_string(&pair).unwrap();
        peek_entropy_after(&pair, &test_doc("b", "F", &[("o2", "c2")])).unwrap();
        assert_eq!(before, serde_json::to_string(&pair).unwrap());
    }

    #[test]
    fn utopian_distance_examples() {
        let l3 = 3f64.ln();
        let at = EntropyPair {
            h_organisms: l3,
            h_chemicals: l3,
        };
        assert_eq!(utopian_distance(at, l3, l3), 0.0);
        let origin = EntropyPair {
            h_organisms: 0.0,
            h_chemicals: 0.0,
        };
        // sqrt(2) * ln 3 by plain arithmetic
        let expected = (2.0f64).sqrt() * l3;
        assert!((utopian_distance(origin, l3, l3) - expected).abs() < 1e-12);
        assert!((expected - 1.553672).abs() < 1e-6);

        let a = EntropyPair {
            h_organisms: 0.3,
            h_chemicals: 1.7,
        };
        let b = EntropyPair {
            h_organisms: 1.7,
            h_chemicals: 0.3,
        };
        assert_eq!(utopian_distance(a, 2.0, 0.5), utopian_distance(b, 0.5, 2.0));
    }

    #[test]
    fn rebuild_happens_periodically() {
        let mut d = EntityDistribution::<u32>::new();
        for i in 0..REBUILD_INTERVAL {
            d.add(&[(i % 7, 1)]);
        }
        assert_eq!(d.mutations, 0);
        assert_eq!(d.sum_c_log_c(), d.recomputed_sum_c_log_c());
    }
}
