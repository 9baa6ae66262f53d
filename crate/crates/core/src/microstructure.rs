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

//! Exceptional microstructure behavior: patterns that are both frequent on a
//! trading day and far more frequent than on the preceding benchmark days,
//! scored with their abnormal return and turned into alert rules.

use std::collections::BTreeMap;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, BenchmarkPeriod, BenchmarkSet, PricePoint, Score};
use crate::model::{contains, BehaviorSequence, ItemKind, Pattern};
use crate::seqmine::{label_counts, mine_frequent, pattern_counts, MiningConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Low,
    Medium,
    High,
}

/// `I_e` boundaries: below `medium` is low, below `high` is medium.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeverityTiers {
    pub medium: f64,
    pub high: f64,
}

impl Default for SeverityTiers {
    fn default() -> Self {
        SeverityTiers { medium: 5.0, high: 10.0 }
    }
}

impl SeverityTiers {
    /// Boundaries are compared with a relative tolerance of 1e-9 so that
    /// summation rounding does not drop a ratio of exactly 10 into the tier
    /// below.
    pub fn classify(&self, ie: Score) -> Severity {
        let reaches = |v: f64, bound: f64| v >= bound * (1.0 - 1e-9);
        match ie.as_f64() {
            Some(v) if reaches(v, self.high) => Severity::High,
            Some(v) if reaches(v, self.medium) => Severity::Medium,
            _ => Severity::Low,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalConfig {
    pub mining: MiningConfig,
    /// Number of preceding trading days used as benchmarks.
    pub benchmark_days: usize,
    pub min_ii: f64,
    pub min_ie: f64,
    /// Per-benchmark weights, most recent day first. Equal weights when unset.
    pub benchmark_weights: Option<Vec<f64>>,
    pub bucket_length_secs: i64,
    pub tiers: SeverityTiers,
}

impl Default for ExceptionalConfig {
    fn default() -> Self {
        ExceptionalConfig {
            mining: MiningConfig::default(),
            benchmark_days: 20,
            min_ii: 0.0,
            min_ie: 5.0,
            benchmark_weights: None,
            bucket_length_secs: 60,
            tiers: SeverityTiers::default(),
        }
    }
}

impl ExceptionalConfig {
    pub fn validate(&self) -> Result<()> {
        self.mining.validate()?;
        if self.benchmark_days == 0 {
            return Err(Error::Config("benchmark_days must be at least 1".into()));
        }
        for (name, v) in [("min_ii", self.min_ii), ("min_ie", self.min_ie)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be a non-negative number, got {v}")));
            }
        }
        if let Some(w) = &self.benchmark_weights {
            if w.len() != self.benchmark_days {
                return Err(Error::Config(format!(
                    "expected {} benchmark weights, got {}",
                    self.benchmark_days,
                    w.len()
                )));
            }
            if w.iter().any(|x| !(*x >= 0.0)) || !(w.iter().sum::<f64>() > 0.0) {
                return Err(Error::Config("benchmark weights must be non-negative with a positive sum".into()));
            }
        }
        if self.bucket_length_secs <= 0 {
            return Err(Error::Config("bucket_length_secs must be positive".into()));
        }
        if !(self.tiers.medium <= self.tiers.high) {
            return Err(Error::Config("severity tiers must satisfy medium <= high".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalPattern {
    pub date: NaiveDate,
    pub pattern: Pattern,
    pub support: f64,
    #[serde(rename = "I_i")]
    pub i_i: f64,
    #[serde(rename = "I_e")]
    pub i_e: Score,
    /// Abnormal return of the matching accounts' trades; absent when fewer
    /// than three price buckets were traded.
    #[serde(rename = "AR")]
    pub ar: Option<f64>,
    #[serde(rename = "AR_pct")]
    pub ar_pct: Option<f64>,
    pub severity: Severity,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DayWarning {
    pub date: NaiveDate,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalReport {
    pub patterns: Vec<ExceptionalPattern>,
    pub warnings: Vec<DayWarning>,
}

struct Day<'a> {
    date: NaiveDate,
    seqs: Vec<&'a BehaviorSequence>,
    owned: Vec<BehaviorSequence>,
}

impl Day<'_> {
    fn avg_len(&self) -> f64 {
        self.seqs.iter().map(|s| s.len()).sum::<usize>() as f64 / self.seqs.len() as f64
    }
}

fn split_days(data: &[BehaviorSequence]) -> Vec<Day<'_>> {
    let mut by_day: BTreeMap<NaiveDate, Vec<&BehaviorSequence>> = BTreeMap::new();
    for s in data {
        by_day.entry(s.window.start.date()).or_default().push(s);
    }
    by_day
        .into_iter()
        .map(|(date, seqs)| Day {
            date,
            owned: seqs.iter().map(|s| (*s).clone()).collect(),
            seqs,
        })
        .collect()
}

/// Abnormal return over the minute-bucketed VWAP of the given sequences'
/// trades.
pub fn pattern_abnormal_return(seqs: &[&BehaviorSequence], date: NaiveDate, bucket_secs: i64) -> Option<f64> {
    let origin = date.and_time(chrono::NaiveTime::MIN);
    let mut buckets: BTreeMap<i64, Vec<(f64, f64)>> = BTreeMap::new();
    for t in seqs.iter().flat_map(|s| &s.trades) {
        let b = (t.time - origin).num_seconds().div_euclid(bucket_secs);
        buckets.entry(b).or_default().push((t.price, t.volume as f64));
    }
    let points: Vec<PricePoint> = buckets
        .into_iter()
        .filter_map(|(b, orders)| metrics::vwap(&orders).map(|vwap| PricePoint { time_bucket: b, vwap }))
        .collect();
    metrics::abnormal_return(&points).ok()
}

fn score_day(days: &[Day<'_>], d: usize, cfg: &ExceptionalConfig) -> Result<Vec<ExceptionalPattern>> {
    let target = &days[d];
    let m = cfg.benchmark_days;
    let benches = &days[d - m..d];
    let avg_len = target.avg_len();
    let weights: Vec<f64> = match &cfg.benchmark_weights {
        // weights are given most recent first; benches run oldest first
        Some(w) => w.iter().rev().copied().collect(),
        None => vec![1.0 / m as f64; m],
    };
    let bench_totals: Vec<(u64, f64)> = benches
        .iter()
        .map(|b| (label_counts(&b.owned).total, b.avg_len()))
        .collect();

    let mut out = Vec::new();
    for sp in mine_frequent(&target.owned, &cfg.mining)? {
        let i_i = metrics::intentional_interestingness(sp.support, sp.pattern.len(), avg_len)?;
        if i_i < cfg.min_ii {
            continue;
        }
        let mut periods = Vec::with_capacity(m);
        for ((b, &(total, b_avg)), &weight) in benches.iter().zip(&bench_totals).zip(&weights) {
            let (count, _, _) = pattern_counts(&sp.pattern, &b.owned, cfg.mining.contiguous)?;
            periods.push(BenchmarkPeriod {
                support: count as f64 / total as f64,
                avg_len: b_avg,
                weight,
            });
        }
        let i_e = metrics::exceptional_interestingness(sp.support, avg_len, &BenchmarkSet { periods })?;
        if !i_e.at_least(cfg.min_ie) {
            continue;
        }
        let matching: Vec<&BehaviorSequence> = target
            .seqs
            .iter()
            .copied()
            .filter(|s| contains(s, &sp.pattern).unwrap_or(false))
            .collect();
        let ar = pattern_abnormal_return(&matching, target.date, cfg.bucket_length_secs);
        out.push(ExceptionalPattern {
            date: target.date,
            support: sp.support,
            i_i,
            i_e,
            ar,
            ar_pct: ar.map(|a| a * 100.0),
            severity: cfg.tiers.classify(i_e),
            pattern: sp.pattern,
        });
    }
    Ok(out)
}

/// Scores every day that has `benchmark_days` earlier days in the data.
/// Earlier days produce a warning instead. Output is sorted by descending
/// `I_e`, then date, then pattern.
pub fn mine_exceptional(data: &[BehaviorSequence], cfg: &ExceptionalConfig) -> Result<ExceptionalReport> {
    cfg.validate()?;
    if let Some(s) = data.iter().find(|s| s.kind != ItemKind::Microstructure) {
        return Err(Error::KindMismatch {
            expected: ItemKind::Microstructure.name(),
            found: s.kind.name(),
        });
    }
    let days = split_days(data);
    let m = cfg.benchmark_days;
    let warnings = days
        .iter()
        .take(m)
        .map(|d| DayWarning {
            date: d.date,
            message: format!("skipped: fewer than {m} preceding trading days"),
        })
        .collect();
    let scored: Vec<Vec<ExceptionalPattern>> = (m.min(days.len())..days.len())
        .into_par_iter()
        .map(|d| score_day(&days, d, cfg))
        .collect::<Result<_>>()?;
    let mut patterns: Vec<ExceptionalPattern> = scored.into_iter().flatten().collect();
    patterns.sort_by(|a, b| {
        b.i_e
            .total_cmp(&a.i_e)
            .then_with(|| a.date.cmp(&b.date))
            .then_with(|| a.pattern.cmp(&b.pattern))
    });
    Ok(ExceptionalReport { patterns, warnings })
}

/// A surveillance rule that fires on any sequence containing its pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlertRule {
    pub pattern: Pattern,
    pub trigger: String,
    pub severity: Severity,
    pub message: String,
}

impl AlertRule {
    pub fn fires(&self, seq: &BehaviorSequence) -> bool {
        contains(seq, &self.pattern).unwrap_or(false)
    }
}

pub fn to_alert_rules(patterns: &[ExceptionalPattern], tiers: &SeverityTiers) -> Vec<AlertRule> {
    patterns
        .iter()
        .map(|p| {
            let severity = tiers.classify(p.i_e);
            AlertRule {
                pattern: p.pattern.clone(),
                trigger: "contains".into(),
                severity,
                message: format!(
                    "{severity:?} alert: account trading pattern {} seen on {} at I_e {}",
                    p.pattern, p.date, p.i_e
                )
                .to_lowercase(),
            }
        })
        .collect()
}
