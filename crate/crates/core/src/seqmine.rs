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

//! Frequent sequential pattern mining by prefix projection.
//!
//! Support counts sequences, not occurrences: a sequence of weight `w`
//! contributes `w` to every pattern it contains, once. Items are interned to
//! dense ids in their natural order so lexicographic order on ids equals
//! lexicographic order on items.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, Score};
use crate::model::{is_subsequence, is_substring, BehaviorSequence, Item, ItemKind, Pattern};

pub const DEFAULT_MAX_PATTERN_LENGTH: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub min_support: f64,
    pub max_pattern_length: usize,
    /// Require pattern items to be adjacent in the sequence.
    #[serde(default)]
    pub contiguous: bool,
}

impl Default for MiningConfig {
    fn default() -> Self {
        MiningConfig {
            min_support: 0.05,
            max_pattern_length: DEFAULT_MAX_PATTERN_LENGTH,
            contiguous: false,
        }
    }
}

impl MiningConfig {
    pub fn new(min_support: f64) -> Self {
        MiningConfig {
            min_support,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.min_support > 0.0 && self.min_support <= 1.0) {
            return Err(Error::Config(format!(
                "min_support must be in (0, 1], got {}",
                self.min_support
            )));
        }
        if self.max_pattern_length == 0 {
            return Err(Error::Config("max_pattern_length must be at least 1".into()));
        }
        Ok(())
    }
}

/// A mined pattern with its overall and per-label supports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportedPattern {
    pub pattern: Pattern,
    pub support: f64,
    pub support_target: f64,
    pub support_nontarget: f64,
    pub count: u64,
    #[serde(skip)]
    pub count_target: u64,
    #[serde(skip)]
    pub count_nontarget: u64,
}

/// Weighted sequence counts of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LabelCounts {
    pub total: u64,
    pub target: u64,
    pub non_target: u64,
}

pub fn label_counts(data: &[BehaviorSequence]) -> LabelCounts {
    data.iter().fold(LabelCounts::default(), |mut c, s| {
        c.total += s.weight;
        if s.label.is_target() {
            c.target += s.weight;
        } else {
            c.non_target += s.weight;
        }
        c
    })
}

/// Support threshold test shared by the miner and its callers.
pub fn meets_support(count: u64, total: u64, min_support: f64) -> bool {
    total > 0 && count as f64 / total as f64 >= min_support
}

fn occurs(items: &[Item], pattern: &Pattern, contiguous: bool) -> bool {
    if contiguous {
        is_substring(items, pattern.items())
    } else {
        is_subsequence(items, pattern.items())
    }
}

fn check_dataset_kind(data: &[BehaviorSequence], kind: ItemKind) -> Result<()> {
    match data.iter().find(|s| s.kind != kind) {
        Some(s) => Err(Error::KindMismatch {
            expected: kind.name(),
            found: s.kind.name(),
        }),
        None => Ok(()),
    }
}

/// Weighted counts `(all, target, non_target)` of sequences containing `p`.
pub fn pattern_counts(
    p: &Pattern,
    data: &[BehaviorSequence],
    contiguous: bool,
) -> Result<(u64, u64, u64)> {
    check_dataset_kind(data, p.kind())?;
    let mut counts = (0, 0, 0);
    for s in data.iter().filter(|s| occurs(&s.items, p, contiguous)) {
        counts.0 += s.weight;
        if s.label.is_target() {
            counts.1 += s.weight;
        } else {
            counts.2 += s.weight;
        }
    }
    Ok(counts)
}

/// Fraction of sequences containing `p` (gapped containment).
pub fn support(p: &Pattern, data: &[BehaviorSequence]) -> Result<f64> {
    let total = label_counts(data).total;
    if total == 0 {
        return Err(Error::EmptyDataset);
    }
    let (count, _, _) = pattern_counts(p, data, false)?;
    Ok(count as f64 / total as f64)
}

struct Encoded {
    alphabet: Vec<Item>,
    seqs: Vec<Vec<u32>>,
    weights: Vec<u64>,
    target: Vec<bool>,
    total: u64,
}

impl Encoded {
    fn new(data: &[BehaviorSequence]) -> Result<Self> {
        if let Some(first) = data.first() {
            check_dataset_kind(data, first.kind)?;
        }
        let mut ids: BTreeMap<&Item, u32> = BTreeMap::new();
        for s in data {
            for item in &s.items {
                ids.insert(item, 0);
            }
        }
        for (i, id) in ids.values_mut().enumerate() {
            *id = i as u32;
        }
        let seqs = data
            .iter()
            .map(|s| s.items.iter().map(|i| ids[i]).collect())
            .collect();
        Ok(Encoded {
            alphabet: ids.keys().map(|i| (*i).clone()).collect(),
            seqs,
            weights: data.iter().map(|s| s.weight).collect(),
            target: data.iter().map(|s| s.label.is_target()).collect(),
            total: data.iter().map(|s| s.weight).sum(),
        })
    }
}

/// Projected database entry: sequence index and the position just after the
/// prefix's match. Gapped mode keeps only the earliest end per sequence;
/// contiguous mode keeps every end.
type Projection = Vec<(u32, u32)>;

struct Found {
    prefix: Vec<u32>,
    count: u64,
    target: u64,
}

struct Miner<'a> {
    enc: &'a Encoded,
    cfg: &'a MiningConfig,
}

#[derive(Clone, Copy, Default)]
struct Tally {
    stamp: u32,
    count: u64,
    target: u64,
}

impl Miner<'_> {
    /// Frequent single-item extensions of a projection, ascending by id.
    fn extensions(&self, proj: &Projection, tally: &mut [Tally]) -> Vec<(u32, u64, u64)> {
        let mut touched = Vec::new();
        let mut visit = |seq: u32, item: u32, tally: &mut [Tally]| {
            let t = &mut tally[item as usize];
            if t.stamp != seq + 1 {
                if t.count == 0 {
                    touched.push(item);
                }
                t.stamp = seq + 1;
                t.count += self.enc.weights[seq as usize];
                if self.enc.target[seq as usize] {
                    t.target += self.enc.weights[seq as usize];
                }
            }
        };
        for &(seq, end) in proj {
            let items = &self.enc.seqs[seq as usize];
            if self.cfg.contiguous {
                if let Some(&item) = items.get(end as usize) {
                    visit(seq, item, tally);
                }
            } else {
                for &item in &items[end as usize..] {
                    visit(seq, item, tally);
                }
            }
        }
        touched.sort_unstable();
        let mut out = Vec::new();
        for item in touched {
            let t = std::mem::take(&mut tally[item as usize]);
            if meets_support(t.count, self.enc.total, self.cfg.min_support) {
                out.push((item, t.count, t.target));
            }
        }
        out
    }

    fn project(&self, proj: &Projection, item: u32) -> Projection {
        let mut next = Vec::new();
        for &(seq, end) in proj {
            let items = &self.enc.seqs[seq as usize];
            if self.cfg.contiguous {
                if items.get(end as usize) == Some(&item) {
                    next.push((seq, end + 1));
                }
            } else if let Some(pos) = items[end as usize..].iter().position(|&i| i == item) {
                next.push((seq, end + pos as u32 + 1));
            }
        }
        next
    }

    fn grow(&self, prefix: &mut Vec<u32>, proj: &Projection, tally: &mut [Tally], out: &mut Vec<Found>) {
        if prefix.len() >= self.cfg.max_pattern_length {
            return;
        }
        for (item, count, target) in self.extensions(proj, tally) {
            prefix.push(item);
            out.push(Found {
                prefix: prefix.clone(),
                count,
                target,
            });
            let next = self.project(proj, item);
            self.grow(prefix, &next, tally, out);
            prefix.pop();
        }
    }

    fn root(&self) -> Projection {
        let mut proj = Vec::new();
        for (s, items) in self.enc.seqs.iter().enumerate() {
            if self.cfg.contiguous {
                proj.extend((0..items.len() as u32).map(|e| (s as u32, e)));
            } else {
                proj.push((s as u32, 0));
            }
        }
        proj
    }
}

/// All patterns with support at least `min_support` and length at most
/// `max_pattern_length`, sorted by descending support then pattern order.
///
/// First-level subtrees are explored in parallel; the result does not depend
/// on scheduling.
pub fn mine_frequent(data: &[BehaviorSequence], cfg: &MiningConfig) -> Result<Vec<SupportedPattern>> {
    cfg.validate()?;
    let enc = Encoded::new(data)?;
    if enc.total == 0 {
        return Err(Error::EmptyDataset);
    }
    let miner = Miner { enc: &enc, cfg };
    let root = miner.root();
    let mut tally = vec![Tally::default(); enc.alphabet.len()];
    let firsts = miner.extensions(&root, &mut tally);

    let found: Vec<Found> = firsts
        .par_iter()
        .map(|&(item, count, target)| {
            let mut tally = vec![Tally::default(); enc.alphabet.len()];
            let mut out = vec![Found {
                prefix: vec![item],
                count,
                target,
            }];
            let proj = miner.project(&root, item);
            miner.grow(&mut vec![item], &proj, &mut tally, &mut out);
            out
        })
        .flatten()
        .collect();

    let labels = label_counts(data);
    let n = enc.total as f64;
    let mut patterns: Vec<SupportedPattern> = found
        .into_iter()
        .map(|f| {
            let items = f.prefix.iter().map(|&i| enc.alphabet[i as usize].clone()).collect();
            let non_target = f.count - f.target;
            debug_assert!(f.target <= labels.target);
            SupportedPattern {
                pattern: Pattern::new(items).expect("mined prefixes are non-empty"),
                support: f.count as f64 / n,
                support_target: f.target as f64 / n,
                support_nontarget: non_target as f64 / n,
                count: f.count,
                count_target: f.target,
                count_nontarget: non_target,
            }
        })
        .collect();
    sort_patterns(&mut patterns);
    Ok(patterns)
}

pub(crate) fn sort_patterns(patterns: &mut [SupportedPattern]) {
    patterns.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.pattern.cmp(&b.pattern)));
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Polarity {
    /// `P → L`: the pattern appears.
    Positive,
    /// `¬P → L`: the pattern does not appear.
    Negative,
}

/// One impact-oriented rule over a frequent pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRule {
    pub pattern: Pattern,
    pub polarity: Polarity,
    pub label: String,
    /// Supp(P) for positive rules, Supp(¬P) for negative ones.
    pub antecedent_support: f64,
    pub label_support: f64,
    /// Supp(P→L) or Supp(¬P→L).
    pub support: f64,
    pub count: u64,
    pub confidence: Score,
    pub lift: Score,
}

/// Display spellings of the two labels found in a dataset, with generic
/// fallbacks when one side is missing.
pub fn label_names(data: &[BehaviorSequence]) -> (String, String) {
    let find = |want: bool| {
        data.iter()
            .find(|s| s.label.is_target() == want)
            .map(|s| s.label.display.clone())
    };
    (
        find(true).unwrap_or_else(|| "T".into()),
        find(false).unwrap_or_else(|| "NT".into()),
    )
}

/// Positive and negative rules toward both labels for every frequent
/// pattern. A label absent from the data leaves that rule's lift undefined.
pub fn mine_impact_oriented(data: &[BehaviorSequence], cfg: &MiningConfig) -> Result<Vec<ImpactRule>> {
    let frequent = mine_frequent(data, cfg)?;
    let labels = label_counts(data);
    let (t_name, nt_name) = label_names(data);
    let n = labels.total as f64;
    let mut rules = Vec::with_capacity(frequent.len() * 4);
    for sp in &frequent {
        let absent = labels.total - sp.count;
        let cases = [
            (Polarity::Positive, &t_name, sp.count, sp.count_target, labels.target),
            (Polarity::Positive, &nt_name, sp.count, sp.count_nontarget, labels.non_target),
            (Polarity::Negative, &t_name, absent, labels.target - sp.count_target, labels.target),
            (
                Polarity::Negative,
                &nt_name,
                absent,
                labels.non_target - sp.count_nontarget,
                labels.non_target,
            ),
        ];
        for (polarity, label, antecedent, joint, label_total) in cases {
            let antecedent_support = antecedent as f64 / n;
            let support = joint as f64 / n;
            let label_support = label_total as f64 / n;
            let confidence = metrics::confidence(support, antecedent_support);
            rules.push(ImpactRule {
                pattern: sp.pattern.clone(),
                polarity,
                label: label.clone(),
                antecedent_support,
                label_support,
                support,
                count: joint,
                confidence,
                lift: metrics::lift(confidence, label_support),
            });
        }
    }
    Ok(rules)
}
