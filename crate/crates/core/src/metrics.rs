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

//! Interestingness and risk formulas. Everything here is a pure function of
//! its arguments.
//!
//! Divisions by zero that are meaningful outcomes rather than caller bugs
//! produce a [`Score`] sentinel instead of an error, so that one degenerate
//! pattern does not abort a batch run.

use std::cmp::Ordering;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// A metric value or a typed reason why it has none.
///
/// `Novel` is +infinity: the denominator vanished because the pattern never
/// occurred in the reference data. `Undefined` covers 0/0-style cases.
/// On the wire finite values are JSON numbers and sentinels are the strings
/// `"novel"` and `"undefined"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Score {
    Finite(f64),
    Novel,
    Undefined,
}

impl Score {
    pub fn value(self) -> Option<f64> {
        match self {
            Score::Finite(v) => Some(v),
            _ => None,
        }
    }

    /// Numeric view with `Novel` as +inf; `Undefined` has none.
    pub fn as_f64(self) -> Option<f64> {
        match self {
            Score::Finite(v) => Some(v),
            Score::Novel => Some(f64::INFINITY),
            Score::Undefined => None,
        }
    }

    /// `true` when the value exists and is at least `threshold`.
    pub fn at_least(self, threshold: f64) -> bool {
        self.as_f64().is_some_and(|v| v >= threshold)
    }

    /// Total order used for report sorting: Undefined < finite values < Novel.
    pub fn total_cmp(&self, other: &Score) -> Ordering {
        fn rank(s: &Score) -> u8 {
            match s {
                Score::Undefined => 0,
                Score::Finite(_) => 1,
                Score::Novel => 2,
            }
        }
        match (self, other) {
            (Score::Finite(a), Score::Finite(b)) => a.total_cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }

    fn ratio(num: f64, den: f64) -> Score {
        if den == 0.0 {
            if num == 0.0 {
                Score::Undefined
            } else {
                Score::Novel
            }
        } else {
            Score::Finite(num / den)
        }
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Score::Finite(v) => write!(f, "{v}"),
            Score::Novel => f.write_str("novel"),
            Score::Undefined => f.write_str("undefined"),
        }
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Score::Finite(v) => s.serialize_f64(*v),
            Score::Novel => s.serialize_str("novel"),
            Score::Undefined => s.serialize_str("undefined"),
        }
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct ScoreVisitor;

        impl Visitor<'_> for ScoreVisitor {
            type Value = Score;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a number, \"novel\" or \"undefined\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<Score, E> {
                Ok(Score::Finite(v))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<Score, E> {
                Ok(Score::Finite(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<Score, E> {
                match v {
                    "novel" => Ok(Score::Novel),
                    "undefined" => Ok(Score::Undefined),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }

        d.deserialize_any(ScoreVisitor)
    }
}

/// Volume-weighted average price `Σ(price·volume) / Σvolume`.
/// `None` for a bucket with no volume.
pub fn vwap(orders: &[(f64, f64)]) -> Option<f64> {
    let (pv, v) = orders
        .iter()
        .fold((0.0, 0.0), |(pv, v), &(price, vol)| (pv + price * vol, v + vol));
    (v > 0.0).then(|| pv / v)
}

/// One VWAP observation at an integer time bucket.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PricePoint {
    pub time_bucket: i64,
    pub vwap: f64,
}

/// Sample standard deviation of consecutive log-returns divided by the square
/// root of the number of returns. Needs at least three points.
pub fn abnormal_return(prices: &[PricePoint]) -> Result<f64> {
    if prices.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "abnormal return needs at least 3 price points, got {}",
            prices.len()
        )));
    }
    if prices.windows(2).any(|w| w[1].time_bucket <= w[0].time_bucket) {
        return Err(Error::InvalidInput(
            "price buckets must be strictly increasing".into(),
        ));
    }
    if prices.iter().any(|p| !(p.vwap > 0.0)) {
        return Err(Error::InvalidInput("prices must be positive".into()));
    }
    let returns: Vec<f64> = prices
        .windows(2)
        .map(|w| (w[1].vwap / w[0].vwap).ln())
        .collect();
    let n = returns.len() as f64;
    let mean = returns.iter().sum::<f64>() / n;
    let var = returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(var.sqrt() / n.sqrt())
}

/// Support scaled by pattern length relative to the average sequence length.
pub fn intentional_interestingness(support: f64, pattern_len: usize, avg_len: f64) -> Result<f64> {
    if !(avg_len > 0.0) {
        return Err(Error::InvalidInput(format!(
            "average sequence length must be positive, got {avg_len}"
        )));
    }
    Ok(support * pattern_len as f64 / avg_len)
}

/// One benchmark period's view of a pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkPeriod {
    pub support: f64,
    pub avg_len: f64,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkSet {
    pub periods: Vec<BenchmarkPeriod>,
}

impl BenchmarkSet {
    /// Periods with equal weights `1/m`.
    pub fn equal_weights(observations: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut periods: Vec<BenchmarkPeriod> = observations
            .into_iter()
            .map(|(support, avg_len)| BenchmarkPeriod {
                support,
                avg_len,
                weight: 1.0,
            })
            .collect();
        let m = periods.len() as f64;
        for p in &mut periods {
            p.weight = 1.0 / m;
        }
        BenchmarkSet { periods }
    }

    pub fn len(&self) -> usize {
        self.periods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.periods.is_empty()
    }
}

/// How many times more often (length-normalized) a pattern occurs in the
/// target period than in the weighted benchmark periods. A pattern absent
/// from every benchmark scores [`Score::Novel`].
pub fn exceptional_interestingness(
    support: f64,
    avg_len: f64,
    bench: &BenchmarkSet,
) -> Result<Score> {
    if bench.is_empty() {
        return Err(Error::InvalidInput("benchmark set is empty".into()));
    }
    if !(avg_len > 0.0) || bench.periods.iter().any(|p| !(p.avg_len > 0.0)) {
        return Err(Error::InvalidInput(
            "average sequence lengths must be positive".into(),
        ));
    }
    let weight_sum: f64 = bench.periods.iter().map(|p| p.weight).sum();
    if !(weight_sum > 0.0) {
        return Err(Error::InvalidInput("benchmark weights must sum to a positive value".into()));
    }
    let den: f64 = bench
        .periods
        .iter()
        .map(|p| p.support / p.avg_len * p.weight)
        .sum();
    let num = support / avg_len * weight_sum;
    Ok(if den > 0.0 {
        Score::Finite(num / den)
    } else {
        Score::Novel
    })
}

/// `Supp(P→T) / Supp(P)`.
pub fn confidence(rule_support: f64, antecedent_support: f64) -> Score {
    Score::ratio(rule_support, antecedent_support)
}

/// `confidence / Supp(T)`.
pub fn lift(confidence: Score, label_support: f64) -> Score {
    match confidence {
        Score::Finite(c) if label_support > 0.0 => Score::Finite(c / label_support),
        _ => Score::Undefined,
    }
}

/// Class difference `supp_a − supp_b`; swap the arguments for the reverse
/// direction.
pub fn class_difference(supp_a: f64, supp_b: f64) -> f64 {
    supp_a - supp_b
}

/// Class difference ratio `supp_a / supp_b`, `Novel` when only `supp_b` is 0.
pub fn class_difference_ratio(supp_a: f64, supp_b: f64) -> Score {
    Score::ratio(supp_a, supp_b)
}

/// The four probabilities behind a reversal score, all as fractions of the
/// whole dataset: `Prob(PQ→L')`, `Prob(PQ)`, `Prob(P→L')`, `Prob(P)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReversalProbs {
    pub pq_flipped: f64,
    pub pq: f64,
    pub p_flipped: f64,
    pub p: f64,
}

/// Conditional impact ratio `conf(PQ→L') / conf(P→L')`.
pub fn conditional_impact_ratio(probs: ReversalProbs) -> Score {
    if probs.pq > 0.0 && probs.p_flipped > 0.0 && probs.p > 0.0 {
        Score::Finite((probs.pq_flipped / probs.pq) / (probs.p_flipped / probs.p))
    } else {
        Score::Undefined
    }
}

/// Conditional Piatetsky-Shapiro difference
/// `Prob(PQ→L')/Prob(P) − Prob(PQ)/Prob(P) · Prob(P→L')/Prob(P)`.
pub fn conditional_ps_ratio(probs: ReversalProbs) -> Score {
    if probs.p > 0.0 {
        Score::Finite(
            probs.pq_flipped / probs.p - (probs.pq / probs.p) * (probs.p_flipped / probs.p),
        )
    } else {
        Score::Undefined
    }
}

/// One occurrence of a pattern with the debt it carries (if any).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskInstance {
    pub is_target: bool,
    pub amount: f64,
    pub duration: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Risk {
    pub risk_amt: Score,
    pub risk_dur: Score,
}

/// Share of debt amount and duration carried by the target-labeled matches
/// of a pattern, out of all its matches.
pub fn risk(instances: &[RiskInstance]) -> Risk {
    let mut amt = (0.0, 0.0);
    let mut dur = (0.0, 0.0);
    for i in instances {
        if i.is_target {
            amt.0 += i.amount;
            dur.0 += i.duration;
        }
        amt.1 += i.amount;
        dur.1 += i.duration;
    }
    let frac = |(num, den): (f64, f64)| {
        if den > 0.0 {
            Score::Finite(num / den)
        } else {
            Score::Undefined
        }
    };
    Risk {
        risk_amt: frac(amt),
        risk_dur: frac(dur),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(prices: &[f64]) -> Vec<PricePoint> {
        prices
            .iter()
            .enumerate()
            .map(|(i, &p)| PricePoint {
                time_bucket: i as i64,
                vwap: p,
            })
            .collect()
    }

    #[test]
    fn vwap_examples() {
        assert_eq!(vwap(&[(10.0, 1000.0)]), Some(10.0));
        assert!((vwap(&[(10.0, 500.0), (10.10, 500.0)]).unwrap() - 10.05).abs() < 1e-12);
        assert_eq!(vwap(&[]), None);
    }

    #[test]
    fn abnormal_return_hand_computed() {
        // returns ln(1.1), ln(1/1.1); mean 0; sample sd = ln(1.1)*sqrt(2)
        let r = 1.1f64.ln();
        let sd = (2.0 * r * r / 1.0).sqrt();
        let expected = sd / 2f64.sqrt();
        assert!((sd - 0.134_783).abs() < 1e-5);
        let ar = abnormal_return(&pts(&[100.0, 110.0, 100.0])).unwrap();
        assert!((ar - expected).abs() < 1e-12);
        assert!((ar - 0.09531).abs() < 1e-5);
    }

    #[test]
    fn abnormal_return_needs_three_points() {
        assert!(matches!(
            abnormal_return(&pts(&[1.0, 2.0])),
            Err(Error::InsufficientData(_))
        ));
    }

    #[test]
    fn abnormal_return_flat_series_is_zero() {
        assert_eq!(abnormal_return(&pts(&[10.0; 6])).unwrap(), 0.0);
    }

    #[test]
    fn intentional_examples() {
        assert_eq!(intentional_interestingness(0.3, 4, 4.0).unwrap(), 0.3);
        assert!((intentional_interestingness(0.013, 2, 1.0).unwrap() - 0.026).abs() < 1e-12);
        let one = intentional_interestingness(0.2, 2, 3.0).unwrap();
        let two = intentional_interestingness(0.2, 4, 3.0).unwrap();
        assert!((two - 2.0 * one).abs() < 1e-12);
        assert!(intentional_interestingness(0.2, 2, 0.0).is_err());
    }

    #[test]
    fn exceptional_equal_ratios_is_one() {
        let bench = BenchmarkSet {
            periods: vec![
                BenchmarkPeriod { support: 0.2, avg_len: 4.0, weight: 0.3 },
                BenchmarkPeriod { support: 0.1, avg_len: 2.0, weight: 2.0 },
            ],
        };
        let ie = exceptional_interestingness(0.15, 3.0, &bench).unwrap();
        assert!((ie.value().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exceptional_tenfold() {
        let r = 0.4 / 5.0;
        let bench = BenchmarkSet::equal_weights([(r / 10.0 * 5.0, 5.0), (r / 10.0 * 4.0, 4.0)]);
        let ie = exceptional_interestingness(0.4, 5.0, &bench).unwrap();
        assert!((ie.value().unwrap() - 10.0).abs() < 1e-9);
    }

    #[test]
    fn exceptional_unseen_is_novel() {
        let bench = BenchmarkSet::equal_weights([(0.0, 3.0), (0.0, 3.0)]);
        assert_eq!(exceptional_interestingness(0.1, 3.0, &bench).unwrap(), Score::Novel);
    }

    #[test]
    fn class_difference_from_solved_supports() {
        // solving Cd = 0.309 and Cdr = 3.24 gives b = 0.309 / 2.24
        let b: f64 = 0.309 / 2.24;
        let a = 3.24 * b;
        assert!((a - 0.4469).abs() < 1e-4);
        assert!((b - 0.13795).abs() < 1e-4);
        assert!((class_difference(0.4469, 0.13795) - 0.309).abs() < 1e-4);
        assert_eq!(class_difference(0.2, 0.2), 0.0);
        assert_eq!(class_difference(b, a), -class_difference(a, b));
    }

    #[test]
    fn class_difference_ratio_sentinels() {
        assert_eq!(class_difference_ratio(0.3, 0.3), Score::Finite(1.0));
        assert_eq!(class_difference_ratio(0.3, 0.0), Score::Novel);
        assert_eq!(class_difference_ratio(0.0, 0.0), Score::Undefined);
    }

    #[test]
    fn cir_direct_substitution() {
        // conf(PQ→T̄) = 0.4 and conf(P→T̄) = 0.2
        let probs = ReversalProbs { pq_flipped: 0.04, pq: 0.1, p_flipped: 0.06, p: 0.3 };
        assert!((conditional_impact_ratio(probs).value().unwrap() - 2.0).abs() < 1e-12);
        let zero = ReversalProbs { pq_flipped: 0.0, ..probs };
        assert_eq!(conditional_impact_ratio(zero), Score::Finite(0.0));
        let undefined = ReversalProbs { pq: 0.0, pq_flipped: 0.0, ..probs };
        assert_eq!(conditional_impact_ratio(undefined), Score::Undefined);
    }

    #[test]
    fn cps_independence_is_zero() {
        // Prob(Q|P) = 0.5, Prob(T̄|P) = 0.4, Prob(QT̄|P) = 0.2
        let probs = ReversalProbs { pq_flipped: 0.1, pq: 0.25, p_flipped: 0.2, p: 0.5 };
        assert!(conditional_ps_ratio(probs).value().unwrap().abs() < 1e-12);
        assert!((conditional_impact_ratio(probs).value().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn risk_examples() {
        let all_debt = [
            RiskInstance { is_target: true, amount: 100.0, duration: 3.0 },
            RiskInstance { is_target: true, amount: 50.0, duration: 9.0 },
        ];
        let r = risk(&all_debt);
        assert_eq!(r.risk_amt, Score::Finite(1.0));
        assert_eq!(r.risk_dur, Score::Finite(1.0));
        assert_eq!(risk(&[]).risk_amt, Score::Undefined);
    }

    #[test]
    fn risk_matches_direct_summation() {
        let ledger = [
            (true, 315.0, 14.0),
            (false, 120.0, 30.0),
            (true, 80.0, 7.0),
            (false, 0.0, 0.0),
            (false, 200.0, 60.0),
        ];
        let instances: Vec<RiskInstance> = ledger
            .iter()
            .map(|&(t, a, d)| RiskInstance { is_target: t, amount: a, duration: d })
            .collect();
        let r = risk(&instances);
        assert!((r.risk_amt.value().unwrap() - 395.0 / 715.0).abs() < 1e-12);
        assert!((r.risk_dur.value().unwrap() - 21.0 / 111.0).abs() < 1e-12);
    }

    #[test]
    fn score_wire_format() {
        let s = serde_json::to_string(&[Score::Finite(1.5), Score::Novel, Score::Undefined]).unwrap();
        assert_eq!(s, r#"[1.5,"novel","undefined"]"#);
        let back: Vec<Score> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, vec![Score::Finite(1.5), Score::Novel, Score::Undefined]);
    }

    #[test]
    fn score_ordering() {
        let mut v = vec![Score::Finite(2.0), Score::Undefined, Score::Novel, Score::Finite(-1.0)];
        v.sort_by(|a, b| a.total_cmp(b));
        assert_eq!(v, vec![Score::Undefined, Score::Finite(-1.0), Score::Finite(2.0), Score::Novel]);
    }
}
