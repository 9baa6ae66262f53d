// Copyright 2026 The behaviorlab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Exhaustive reference implementations used to check the miners.
//!
//! Nothing here shares code with [`crate::seqmine`] or the containment helpers
//! in [`crate::model`]: subsequences are produced by enumerating index
//! subsets, and containment is decided against those enumerations. Everything
//! is exponential, so inputs are bounded by hard guards.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{BehaviorSequence, Item, Pattern};

pub const MAX_SEQUENCES: usize = 12;
pub const MAX_SEQUENCE_LEN: usize = 8;
pub const MAX_ALPHABET: usize = 6;

fn guard(data: &[BehaviorSequence]) -> Result<()> {
    if data.len() > MAX_SEQUENCES {
        return Err(Error::OracleGuard(format!(
            "{} sequences (limit {MAX_SEQUENCES})",
            data.len()
        )));
    }
    if let Some(s) = data.iter().find(|s| s.items.len() > MAX_SEQUENCE_LEN) {
        return Err(Error::OracleGuard(format!(
            "sequence of length {} (limit {MAX_SEQUENCE_LEN})",
            s.items.len()
        )));
    }
    let alphabet: BTreeSet<&Item> = data.iter().flat_map(|s| s.items.iter()).collect();
    if alphabet.len() > MAX_ALPHABET {
        return Err(Error::OracleGuard(format!(
            "alphabet of {} items (limit {MAX_ALPHABET})",
            alphabet.len()
        )));
    }
    Ok(())
}

/// Every distinct subsequence of `items` with at most `max_len` elements,
/// from all index bitmasks. With `contiguous`, only index runs count.
fn subsequences(items: &[Item], max_len: usize, contiguous: bool) -> BTreeSet<Vec<Item>> {
    let n = items.len();
    let mut out = BTreeSet::new();
    for mask in 1u32..(1u32 << n) {
        let len = mask.count_ones() as usize;
        if len > max_len {
            continue;
        }
        if contiguous {
            let low = mask.trailing_zeros();
            let run = (1u32 << len) - 1;
            if mask != run << low {
                continue;
            }
        }
        let sub: Vec<Item> = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| items[i].clone())
            .collect();
        out.insert(sub);
    }
    out
}

fn has(items: &[Item], pattern: &[Item]) -> bool {
    pattern.len() <= items.len() && subsequences(items, pattern.len(), false).contains(pattern)
}

/// Exact weighted support counts for every pattern that occurs in `data`,
/// plus the total weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Enumeration {
    pub total: u64,
    pub counts: BTreeMap<Pattern, u64>,
}

impl Enumeration {
    pub fn support(&self, p: &Pattern) -> f64 {
        self.counts.get(p).copied().unwrap_or(0) as f64 / self.total as f64
    }

    /// Patterns whose support reaches `min_support`.
    pub fn filter(&self, min_support: f64) -> BTreeMap<Pattern, f64> {
        self.counts
            .iter()
            .map(|(p, &c)| (p.clone(), c as f64 / self.total as f64))
            .filter(|&(_, s)| s >= min_support)
            .collect()
    }
}

pub fn enumerate_patterns(data: &[BehaviorSequence], max_len: usize) -> Result<Enumeration> {
    enumerate_patterns_with(data, max_len, false)
}

pub fn enumerate_patterns_with(
    data: &[BehaviorSequence],
    max_len: usize,
    contiguous: bool,
) -> Result<Enumeration> {
    guard(data)?;
    let mut counts: BTreeMap<Pattern, u64> = BTreeMap::new();
    for s in data {
        for sub in subsequences(&s.items, max_len, contiguous) {
            *counts.entry(Pattern::new(sub)?).or_default() += s.weight;
        }
    }
    Ok(Enumeration {
        total: data.iter().map(|s| s.weight).sum(),
        counts,
    })
}

/// Counts of `P` and `PQ` by whether the sequence carries `label` (the
/// label of interest, e.g. the flipped outcome of a reversal).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ContingencyTable {
    pub n_pq_t: u64,
    pub n_pq_nt: u64,
    pub n_p_t: u64,
    pub n_p_nt: u64,
    pub n_total: u64,
}

impl ContingencyTable {
    pub fn prob_pq_t(&self) -> f64 {
        self.n_pq_t as f64 / self.n_total as f64
    }

    pub fn prob_pq(&self) -> f64 {
        (self.n_pq_t + self.n_pq_nt) as f64 / self.n_total as f64
    }

    pub fn prob_p_t(&self) -> f64 {
        self.n_p_t as f64 / self.n_total as f64
    }

    pub fn prob_p(&self) -> f64 {
        (self.n_p_t + self.n_p_nt) as f64 / self.n_total as f64
    }
}

/// Exhaustive contingency counts for `P`, `PQ` and `label`.
/// `label_is_target` selects which side of the binary label is counted as
/// the label of interest.
pub fn probabilities(
    data: &[BehaviorSequence],
    p: &Pattern,
    q: &Pattern,
    label_is_target: bool,
) -> Result<ContingencyTable> {
    guard(data)?;
    let pq: Vec<Item> = p.items().iter().chain(q.items()).cloned().collect();
    let mut t = ContingencyTable::default();
    for s in data {
        t.n_total += s.weight;
        let labeled = s.label.is_target() == label_is_target;
        if has(&s.items, p.items()) {
            if labeled {
                t.n_p_t += s.weight;
            } else {
                t.n_p_nt += s.weight;
            }
        }
        if has(&s.items, &pq) {
            if labeled {
                t.n_pq_t += s.weight;
            } else {
                t.n_pq_nt += s.weight;
            }
        }
    }
    Ok(t)
}

/// Nested-loop join of person ids against debt holders: `true` for every
/// person with at least one debt.
pub fn join_labels(person_ids: &[String], debt_holders: &[String]) -> Vec<(String, bool)> {
    person_ids
        .iter()
        .map(|p| {
            let mut hit = false;
            for d in debt_holders {
                if d == p {
                    hit = true;
                }
            }
            (p.clone(), hit)
        })
        .collect()
}

/// Person-level cohort counts for a combined rule `D ∧ A → class`, by
/// nested loops over the two datasets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CohortCounts {
    pub persons: u64,
    pub class: u64,
    pub d: u64,
    pub d_class: u64,
    pub a: u64,
    pub a_class: u64,
    pub da: u64,
    pub da_class: u64,
}

/// `demographics` holds `(person, items, class)`; `activities` holds
/// `(person, items)`.
pub fn cohort_counts(
    demographics: &[(String, Vec<Item>, String)],
    activities: &[(String, Vec<Item>)],
    d: &[Item],
    a: &[Item],
    class: &str,
) -> CohortCounts {
    let mut c = CohortCounts::default();
    for (person, demo_items, cls) in demographics {
        let mut seq: Option<&Vec<Item>> = None;
        for (other, items) in activities {
            if other == person {
                seq = Some(items);
            }
        }
        let in_class = cls == class;
        let has_d = d.iter().all(|x| demo_items.contains(x));
        let has_a = seq.is_some_and(|s| has(s, a));
        c.persons += 1;
        c.class += in_class as u64;
        c.d += has_d as u64;
        c.d_class += (has_d && in_class) as u64;
        c.a += has_a as u64;
        c.a_class += (has_a && in_class) as u64;
        c.da += (has_d && has_a) as u64;
        c.da_class += (has_d && has_a && in_class) as u64;
    }
    c
}
