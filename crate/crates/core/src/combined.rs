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

//! Demographic-activity combined patterns `D ∧ A → class`: demographic
//! itemsets and activity sequential patterns are mined separately, joined on
//! person cohorts, then grouped into contrasting pairs and clusters.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::Score;
use crate::model::{contains, BehaviorSequence, Item, ItemKind, Pattern};
use crate::seqmine::{meets_support, mine_frequent, MiningConfig};

/// Fixed-width set of person indices.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(n: usize) -> Self {
        Bits(vec![0; n.div_ceil(64)])
    }

    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(w, &word)| {
            (0..64).filter(move |b| word & (1 << b) != 0).map(move |b| w * 64 + b)
        })
    }
}

/// Per-person weights; popcount when every weight is one.
struct Weights {
    w: Vec<u64>,
    unit: bool,
}

impl Weights {
    fn new(w: Vec<u64>) -> Self {
        let unit = w.iter().all(|&x| x == 1);
        Weights { w, unit }
    }

    fn total(&self) -> u64 {
        self.w.iter().sum()
    }

    fn count(&self, bits: &Bits) -> u64 {
        if self.unit {
            bits.0.iter().map(|w| w.count_ones() as u64).sum()
        } else {
            bits.ones().map(|i| self.w[i]).sum()
        }
    }

    fn count_and(&self, a: &Bits, b: &Bits) -> u64 {
        if self.unit {
            a.0.iter().zip(&b.0).map(|(x, y)| (x & y).count_ones() as u64).sum()
        } else {
            self.count(&a.and(b))
        }
    }
}

/// `true` when every item of `itemset` is in `items` (order ignored).
pub fn contains_itemset(items: &[Item], itemset: &[Item]) -> bool {
    itemset.iter().all(|x| items.contains(x))
}

/// A frequent order-free itemset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportedItemset {
    pub items: Vec<Item>,
    pub support: f64,
    pub count: u64,
}

struct Eclat<'a> {
    weights: &'a Weights,
    min_count: Box<dyn Fn(u64) -> bool + 'a>,
    max_len: usize,
}

impl Eclat<'_> {
    fn grow(&self, prefix: &mut Vec<usize>, tids: &Bits, tail: &[(usize, Bits)], out: &mut Vec<(Vec<usize>, Bits, u64)>) {
        if prefix.len() >= self.max_len {
            return;
        }
        for (k, (item, bits)) in tail.iter().enumerate() {
            let joint = tids.and(bits);
            let count = self.weights.count(&joint);
            if !(self.min_count)(count) {
                continue;
            }
            prefix.push(*item);
            out.push((prefix.clone(), joint.clone(), count));
            self.grow(prefix, &joint, &tail[k + 1..], out);
            prefix.pop();
        }
    }
}

/// Frequent itemsets with their person bitsets, items in ascending order.
fn itemsets_with_bits(
    sets: &[&[Item]],
    weights: &Weights,
    min_support: f64,
    max_len: usize,
) -> Vec<(Vec<Item>, Bits, u64)> {
    let n = sets.len();
    let total = weights.total();
    let mut by_item: BTreeMap<&Item, Bits> = BTreeMap::new();
    for (i, set) in sets.iter().enumerate() {
        for item in set.iter() {
            by_item.entry(item).or_insert_with(|| Bits::new(n)).set(i);
        }
    }
    let alphabet: Vec<&Item> = by_item.keys().copied().collect();
    let tail: Vec<(usize, Bits)> = by_item.into_values().enumerate().collect();
    let eclat = Eclat {
        weights,
        min_count: Box::new(move |c| meets_support(c, total, min_support)),
        max_len,
    };
    let mut all = Bits::new(n);
    for i in 0..n {
        all.set(i);
    }
    let mut found = Vec::new();
    eclat.grow(&mut Vec::new(), &all, &tail, &mut found);
    found
        .into_iter()
        .map(|(ids, bits, count)| (ids.into_iter().map(|i| alphabet[i].clone()).collect(), bits, count))
        .collect()
}

/// Frequent itemsets of a dataset under set containment, sorted by
/// descending count then items.
pub fn mine_itemsets(data: &[BehaviorSequence], cfg: &MiningConfig) -> Result<Vec<SupportedItemset>> {
    cfg.validate()?;
    if data.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let sets: Vec<Vec<Item>> = data
        .iter()
        .map(|s| s.items.iter().cloned().collect::<BTreeSet<_>>().into_iter().collect())
        .collect();
    let refs: Vec<&[Item]> = sets.iter().map(|s| s.as_slice()).collect();
    let weights = Weights::new(data.iter().map(|s| s.weight).collect());
    let total = weights.total() as f64;
    let mut out: Vec<SupportedItemset> = itemsets_with_bits(&refs, &weights, cfg.min_support, cfg.max_pattern_length)
        .into_iter()
        .map(|(items, _, count)| SupportedItemset {
            items,
            support: count as f64 / total,
            count,
        })
        .collect();
    out.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.items.cmp(&b.items)));
    Ok(out)
}

/// `lift / (lift_D · lift_A)`.
pub fn pattern_interestingness(lift: f64, lift_d: f64, lift_a: f64) -> Score {
    if lift_d > 0.0 && lift_a > 0.0 {
        Score::Finite(lift / (lift_d * lift_a))
    } else {
        Score::Undefined
    }
}

/// Distance between two class labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClassDistance {
    /// 0 for equal classes, 1 otherwise.
    #[default]
    Nominal,
    /// `|rank_i − rank_j| / (k − 1)` over the given class order; classes
    /// outside the order are at distance 1 from everything else.
    Ordinal(Vec<String>),
}

impl ClassDistance {
    pub fn dist(&self, a: &str, b: &str) -> f64 {
        if a == b {
            return 0.0;
        }
        match self {
            ClassDistance::Nominal => 1.0,
            ClassDistance::Ordinal(order) => {
                let pos = |c: &str| order.iter().position(|x| x == c);
                match (pos(a), pos(b)) {
                    (Some(i), Some(j)) if order.len() > 1 => i.abs_diff(j) as f64 / (order.len() - 1) as f64,
                    _ => 1.0,
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedConfig {
    pub mining: MiningConfig,
    /// Classes to report; every class present when unset.
    pub classes: Option<Vec<String>>,
    pub distance: ClassDistance,
    /// Drop clusters whose members' activity parts overlap.
    pub require_disjoint_a: bool,
}

impl Default for CombinedConfig {
    fn default() -> Self {
        CombinedConfig {
            mining: MiningConfig::default(),
            classes: None,
            distance: ClassDistance::Nominal,
            require_disjoint_a: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CombinedPattern {
    pub id: usize,
    #[serde(rename = "D")]
    pub d: Pattern,
    #[serde(rename = "A")]
    pub a: Pattern,
    #[serde(rename = "T")]
    pub class: String,
    pub count: u64,
    pub conf: f64,
    pub lift: f64,
    #[serde(rename = "lift_D")]
    pub lift_d: f64,
    #[serde(rename = "lift_A")]
    pub lift_a: f64,
    #[serde(rename = "I_P")]
    pub i_p: Score,
}

/// The combined-mining input for one person: demographic items, the
/// concatenated activity sequence (possibly empty) and the class.
#[derive(Debug, Clone, PartialEq)]
pub struct Person {
    pub id: String,
    pub demographics: Vec<Item>,
    pub activities: Vec<Item>,
    pub class: String,
    pub weight: u64,
}

/// Joins demographic and activity sequences on `subject_id`. Activity
/// windows of one person are concatenated in window order. A person with
/// activities but no demographic record is an orphan.
pub fn join_persons(demographics: &[BehaviorSequence], activities: &[BehaviorSequence]) -> Result<Vec<Person>> {
    if let Some(s) = demographics.iter().find(|s| s.kind != ItemKind::Demographic) {
        return Err(Error::KindMismatch {
            expected: ItemKind::Demographic.name(),
            found: s.kind.name(),
        });
    }
    if let Some(s) = activities.iter().find(|s| s.kind != ItemKind::Activity) {
        return Err(Error::KindMismatch {
            expected: ItemKind::Activity.name(),
            found: s.kind.name(),
        });
    }
    let mut seen = BTreeSet::new();
    let dups: BTreeSet<String> = demographics
        .iter()
        .filter(|s| !seen.insert(s.subject_id.as_str()))
        .map(|s| s.subject_id.clone())
        .collect();
    if !dups.is_empty() {
        return Err(Error::DuplicateIds(dups.into_iter().collect()));
    }
    let mut acts: BTreeMap<&str, Vec<&BehaviorSequence>> = BTreeMap::new();
    for s in activities {
        acts.entry(&s.subject_id).or_default().push(s);
    }
    let orphans: Vec<String> = acts
        .keys()
        .filter(|id| !seen.contains(*id))
        .map(|id| id.to_string())
        .collect();
    if !orphans.is_empty() {
        return Err(Error::OrphanIds(orphans));
    }
    Ok(demographics
        .iter()
        .map(|d| {
            let mut windows = acts.remove(d.subject_id.as_str()).unwrap_or_default();
            windows.sort_by_key(|s| s.window);
            let mut set: Vec<Item> = d.items.clone();
            set.sort();
            set.dedup();
            Person {
                id: d.subject_id.clone(),
                demographics: set,
                activities: windows.iter().flat_map(|s| s.items.iter().cloned()).collect(),
                class: d.label.display.clone(),
                weight: d.weight,
            }
        })
        .collect())
}

/// Mines `D ∧ A → class` rules whose joint count reaches `min_support` of
/// all persons. Sorted by descending `I_P`, then D, A and class; `id` is the
/// position in that order.
pub fn mine_combined(persons: &[Person], cfg: &CombinedConfig) -> Result<Vec<CombinedPattern>> {
    cfg.mining.validate()?;
    if persons.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = persons.len();
    let weights = Weights::new(persons.iter().map(|p| p.weight).collect());
    let total = weights.total();

    let mut class_bits: BTreeMap<&str, Bits> = BTreeMap::new();
    for (i, p) in persons.iter().enumerate() {
        class_bits.entry(&p.class).or_insert_with(|| Bits::new(n)).set(i);
    }
    if let Some(wanted) = &cfg.classes {
        class_bits.retain(|c, _| wanted.iter().any(|w| w == c));
    }
    let class_counts: Vec<(&str, &Bits, u64)> = class_bits
        .iter()
        .map(|(c, b)| (*c, b, weights.count(b)))
        .collect();

    let (d_sets, a_sets) = rayon::join(
        || {
            let refs: Vec<&[Item]> = persons.iter().map(|p| p.demographics.as_slice()).collect();
            itemsets_with_bits(&refs, &weights, cfg.mining.min_support, cfg.mining.max_pattern_length)
        },
        || -> Result<Vec<(Pattern, Bits, u64)>> {
            let with_acts: Vec<(usize, BehaviorSequence)> = persons
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.activities.is_empty())
                .map(|(i, p)| {
                    let mut s = placeholder_sequence(p)?;
                    s.weight = p.weight;
                    Ok((i, s))
                })
                .collect::<Result<_>>()?;
            if with_acts.is_empty() {
                return Ok(Vec::new());
            }
            // mine relative to all persons: scale the threshold by the share
            // of persons that have activities
            let act_total: u64 = with_acts.iter().map(|(_, s)| s.weight).sum();
            let scaled = (cfg.mining.min_support * total as f64 / act_total as f64).min(1.0);
            let seqs: Vec<BehaviorSequence> = with_acts.iter().map(|(_, s)| s.clone()).collect();
            let mining = MiningConfig { min_support: scaled, ..cfg.mining.clone() };
            let mut out = Vec::new();
            for sp in mine_frequent(&seqs, &mining)? {
                let mut bits = Bits::new(n);
                for (i, s) in &with_acts {
                    if contains(s, &sp.pattern)? {
                        bits.set(*i);
                    }
                }
                let count = weights.count(&bits);
                if meets_support(count, total, cfg.mining.min_support) {
                    out.push((sp.pattern, bits, count));
                }
            }
            Ok(out)
        },
    );
    let a_sets = a_sets?;

    let mut out = Vec::new();
    for (d_items, d_bits, d_count) in &d_sets {
        let d = Pattern::new(d_items.clone())?;
        for (a, a_bits, a_count) in &a_sets {
            let da = d_bits.and(a_bits);
            let da_count = weights.count(&da);
            if !meets_support(da_count, total, cfg.mining.min_support) {
                continue;
            }
            for &(class, c_bits, c_count) in &class_counts {
                let count = weights.count_and(&da, c_bits);
                if !meets_support(count, total, cfg.mining.min_support) {
                    continue;
                }
                let p_class = c_count as f64 / total as f64;
                let conf = count as f64 / da_count as f64;
                let lift = conf / p_class;
                let lift_d = weights.count_and(d_bits, c_bits) as f64 / *d_count as f64 / p_class;
                let lift_a = weights.count_and(a_bits, c_bits) as f64 / *a_count as f64 / p_class;
                out.push(CombinedPattern {
                    id: 0,
                    d: d.clone(),
                    a: a.clone(),
                    class: class.to_string(),
                    count,
                    conf,
                    lift,
                    lift_d,
                    lift_a,
                    i_p: pattern_interestingness(lift, lift_d, lift_a),
                });
            }
        }
    }
    out.sort_by(|x, y| {
        y.i_p
            .total_cmp(&x.i_p)
            .then_with(|| x.d.cmp(&y.d))
            .then_with(|| x.a.cmp(&y.a))
            .then_with(|| x.class.cmp(&y.class))
    });
    for (i, p) in out.iter_mut().enumerate() {
        p.id = i;
    }
    Ok(out)
}

fn placeholder_sequence(p: &Person) -> Result<BehaviorSequence> {
    let t = chrono::NaiveDateTime::MIN;
    BehaviorSequence::new(
        p.id.clone(),
        crate::model::Window { start: t, end: t },
        crate::model::TargetLabel::non_target(p.class.clone()),
        ItemKind::Activity,
        p.activities.clone(),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shared {
    D,
    A,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternPair {
    pub shared: Shared,
    pub left: usize,
    pub right: usize,
    #[serde(rename = "I_pair")]
    pub i_pair: f64,
}

fn items_disjoint(x: &Pattern, y: &Pattern) -> bool {
    x.items().iter().all(|i| !y.items().contains(i))
}

/// Contribution of the non-shared part: `lift / lift_D` when D is shared,
/// `lift / lift_A` when A is shared.
fn contribution(p: &CombinedPattern, shared: Shared) -> f64 {
    match shared {
        Shared::D => p.lift / p.lift_d,
        Shared::A => p.lift / p.lift_a,
    }
}

pub fn pair_interestingness(x: &CombinedPattern, y: &CombinedPattern, shared: Shared, dist: &ClassDistance) -> f64 {
    contribution(x, shared) * contribution(y, shared) * dist.dist(&x.class, &y.class)
}

/// Pairs sharing D (or A) exactly, with disjoint other parts and different
/// classes. Sorted by descending `I_pair`, then ids.
pub fn make_pairs(patterns: &[CombinedPattern], dist: &ClassDistance) -> Vec<PatternPair> {
    let mut out = Vec::new();
    for (i, x) in patterns.iter().enumerate() {
        for y in &patterns[i + 1..] {
            if x.class == y.class {
                continue;
            }
            let shared = if x.d == y.d && items_disjoint(&x.a, &y.a) {
                Shared::D
            } else if x.a == y.a && items_disjoint(&x.d, &y.d) {
                Shared::A
            } else {
                continue;
            };
            let (left, right) = if x.id <= y.id { (x, y) } else { (y, x) };
            out.push(PatternPair {
                shared,
                left: left.id,
                right: right.id,
                i_pair: pair_interestingness(left, right, shared, dist),
            });
        }
    }
    out.sort_by(|a, b| {
        b.i_pair
            .total_cmp(&a.i_pair)
            .then_with(|| (a.left, a.right).cmp(&(b.left, b.right)))
    });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PatternCluster {
    pub shared_d: Pattern,
    pub members: Vec<usize>,
    /// Whether member activity parts are pairwise disjoint.
    pub disjoint_a: bool,
    #[serde(rename = "I_cluster")]
    pub i_cluster: f64,
}

/// Groups patterns by exact D. Groups of at least two members with distinct
/// A's become clusters scored by the best opposite-class pair.
pub fn make_clusters(patterns: &[CombinedPattern], cfg: &CombinedConfig) -> Vec<PatternCluster> {
    let mut groups: BTreeMap<&Pattern, Vec<&CombinedPattern>> = BTreeMap::new();
    for p in patterns {
        groups.entry(&p.d).or_default().push(p);
    }
    let mut out = Vec::new();
    for (d, mut members) in groups {
        members.sort_by_key(|p| p.id);
        let distinct: BTreeSet<(&Pattern, &str)> = members.iter().map(|p| (&p.a, p.class.as_str())).collect();
        let a_parts: BTreeSet<&Pattern> = members.iter().map(|p| &p.a).collect();
        if members.len() < 2 || distinct.len() != members.len() || a_parts.len() < 2 {
            continue;
        }
        let disjoint_a = members
            .iter()
            .enumerate()
            .all(|(i, x)| members[i + 1..].iter().all(|y| items_disjoint(&x.a, &y.a)));
        if cfg.require_disjoint_a && !disjoint_a {
            continue;
        }
        let mut best = 0.0f64;
        for (i, x) in members.iter().enumerate() {
            for y in &members[i + 1..] {
                if x.class != y.class {
                    best = best.max(pair_interestingness(x, y, Shared::D, &cfg.distance));
                }
            }
        }
        out.push(PatternCluster {
            shared_d: d.clone(),
            members: members.iter().map(|p| p.id).collect(),
            disjoint_a,
            i_cluster: best,
        });
    }
    out.sort_by(|a, b| {
        b.i_cluster
            .total_cmp(&a.i_cluster)
            .then_with(|| a.shared_d.cmp(&b.shared_d))
    });
    out
}

/// Counts per class, for summaries.
pub fn class_distribution(persons: &[Person]) -> BTreeMap<String, u64> {
    let mut m: HashMap<&str, u64> = HashMap::new();
    for p in persons {
        *m.entry(&p.class).or_default() += p.weight;
    }
    m.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
