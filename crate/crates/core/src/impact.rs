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

//! Impact-oriented activity analysis: rules toward debt outcomes annotated
//! with risk, contrasts between a target and a non-target dataset, and
//! pattern extensions that reverse the dominant outcome.

use std::collections::{BTreeSet, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metrics::{self, ReversalProbs, Risk, RiskInstance, Score};
use crate::model::{contains, BehaviorSequence, Item, Pattern};
use crate::seqmine::{
    label_counts, label_names, mine_frequent, mine_impact_oriented, pattern_counts, ImpactRule,
    MiningConfig, Polarity, SupportedPattern,
};

/// Risk over the sequences selected by `matches`. Sequences without debt
/// information contribute zero amount and duration.
fn risk_where(data: &[BehaviorSequence], matches: impl Fn(&BehaviorSequence) -> bool) -> Risk {
    let instances: Vec<RiskInstance> = data
        .iter()
        .filter(|s| matches(s))
        .flat_map(|s| {
            let (amount, duration) = s.debt.map_or((0.0, 0.0), |d| (d.amount, d.duration_days as f64));
            std::iter::repeat_n(
                RiskInstance {
                    is_target: s.label.is_target(),
                    amount,
                    duration,
                },
                s.weight as usize,
            )
        })
        .collect();
    metrics::risk(&instances)
}

/// Debt-amount and debt-duration risk of each pattern over its matching
/// sequences.
pub fn annotate_risk(patterns: &[Pattern], data: &[BehaviorSequence]) -> Vec<(Pattern, Risk)> {
    patterns
        .iter()
        .map(|p| (p.clone(), risk_where(data, |s| contains(s, p).unwrap_or(false))))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ImpactRecord {
    #[serde(flatten)]
    pub rule: ImpactRule,
    #[serde(flatten)]
    pub risk: Risk,
}

/// Impact-oriented rules with risk. Positive rules take risk over the
/// pattern's matches, negative rules over the remaining sequences. Sorted by
/// descending lift, then pattern, polarity and label.
pub fn mine_impact(data: &[BehaviorSequence], cfg: &MiningConfig) -> Result<Vec<ImpactRecord>> {
    let rules = mine_impact_oriented(data, cfg)?;
    let mut risks: HashMap<(&Pattern, Polarity), Risk> = HashMap::new();
    for r in &rules {
        risks.entry((&r.pattern, r.polarity)).or_insert_with(|| {
            let want = r.polarity == Polarity::Positive;
            risk_where(data, |s| contains(s, &r.pattern).unwrap_or(false) == want)
        });
    }
    let mut out: Vec<ImpactRecord> = rules
        .iter()
        .map(|r| ImpactRecord {
            risk: risks[&(&r.pattern, r.polarity)],
            rule: r.clone(),
        })
        .collect();
    out.sort_by(|a, b| {
        b.rule
            .lift
            .total_cmp(&a.rule.lift)
            .then_with(|| a.rule.pattern.cmp(&b.rule.pattern))
            .then_with(|| a.rule.polarity.cmp(&b.rule.polarity))
            .then_with(|| a.rule.label.cmp(&b.rule.label))
    });
    Ok(out)
}

/// A pattern's supports in two datasets and their difference and ratio in
/// both directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContrastPattern {
    pub pattern: Pattern,
    #[serde(rename = "supp_A")]
    pub supp_a: f64,
    #[serde(rename = "supp_B")]
    pub supp_b: f64,
    #[serde(rename = "Cd")]
    pub cd: f64,
    #[serde(rename = "Cdr")]
    pub cdr: Score,
    #[serde(rename = "Cd_BA")]
    pub cd_ba: f64,
    #[serde(rename = "Cdr_BA")]
    pub cdr_ba: Score,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ContrastReport {
    pub patterns: Vec<ContrastPattern>,
    pub warnings: Vec<String>,
}

fn alphabet(data: &[BehaviorSequence]) -> BTreeSet<&Item> {
    data.iter().flat_map(|s| &s.items).collect()
}

/// Scores every pattern frequent in either dataset against both. Sorted by
/// descending `|Cd|`, then pattern.
pub fn mine_contrast(
    a: &[BehaviorSequence],
    b: &[BehaviorSequence],
    cfg: &MiningConfig,
) -> Result<ContrastReport> {
    cfg.validate()?;
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyDataset);
    }
    if alphabet(a).is_disjoint(&alphabet(b)) {
        return Ok(ContrastReport {
            patterns: Vec::new(),
            warnings: vec!["the two datasets share no items; nothing to contrast".into()],
        });
    }
    let union: BTreeSet<Pattern> = mine_frequent(a, cfg)?
        .into_iter()
        .chain(mine_frequent(b, cfg)?)
        .map(|sp| sp.pattern)
        .collect();
    let (na, nb) = (label_counts(a).total as f64, label_counts(b).total as f64);
    let mut patterns = Vec::with_capacity(union.len());
    for pattern in union {
        let supp_a = pattern_counts(&pattern, a, cfg.contiguous)?.0 as f64 / na;
        let supp_b = pattern_counts(&pattern, b, cfg.contiguous)?.0 as f64 / nb;
        patterns.push(ContrastPattern {
            cd: metrics::class_difference(supp_a, supp_b),
            cdr: metrics::class_difference_ratio(supp_a, supp_b),
            cd_ba: metrics::class_difference(supp_b, supp_a),
            cdr_ba: metrics::class_difference_ratio(supp_b, supp_a),
            pattern,
            supp_a,
            supp_b,
        });
    }
    patterns.sort_by(|x, y| {
        y.cd.abs()
            .total_cmp(&x.cd.abs())
            .then_with(|| x.pattern.cmp(&y.pattern))
    });
    Ok(ContrastReport {
        patterns,
        warnings: Vec::new(),
    })
}

/// Splits a labeled dataset into its target and non-target parts.
pub fn split_by_label(data: &[BehaviorSequence]) -> (Vec<BehaviorSequence>, Vec<BehaviorSequence>) {
    data.iter().cloned().partition(|s| s.label.is_target())
}

/// An underlying pattern `P` whose extension `PQ` reverses the outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReversalPair {
    #[serde(rename = "P")]
    pub underlying: Pattern,
    #[serde(rename = "Q")]
    pub trigger: Pattern,
    #[serde(rename = "PQ")]
    pub derivative: Pattern,
    /// `from->to`, where `to` is the label that `PQ` leads to.
    pub direction: String,
    pub conf_p: f64,
    pub conf_pq: f64,
    #[serde(rename = "Cir")]
    pub cir: Score,
    #[serde(rename = "Cps")]
    pub cps: Score,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ReversalReport {
    pub pairs: Vec<ReversalPair>,
    pub warnings: Vec<String>,
}

/// Minimum confidence of the flipped label on the derivative pattern.
pub const REVERSAL_MIN_CONFIDENCE: f64 = 0.5;

/// The outcome flips from `P` to `PQ` toward label `L'` when
/// `conf(PQ→L') >= 0.5` and `conf(PQ→L') > conf(P→L')`.
pub fn is_reversal(conf_p: f64, conf_pq: f64) -> bool {
    conf_pq >= REVERSAL_MIN_CONFIDENCE && conf_pq > conf_p
}

/// Every split of every frequent pattern into a frequent `P` and a non-empty
/// suffix `Q`, checked for an outcome flip in both directions and kept when
/// `Cir >= cir_min` and `Cps >= cps_min`. Sorted by descending `Cir`, then
/// `P`, `Q` and direction.
pub fn mine_reversals(
    data: &[BehaviorSequence],
    cfg: &MiningConfig,
    cir_min: f64,
    cps_min: f64,
) -> Result<ReversalReport> {
    let labels = label_counts(data);
    if labels.target == 0 || labels.non_target == 0 {
        return Ok(ReversalReport {
            pairs: Vec::new(),
            warnings: vec!["only one label present; no reversal is possible".into()],
        });
    }
    let frequent = mine_frequent(data, cfg)?;
    let by_pattern: HashMap<&Pattern, &SupportedPattern> =
        frequent.iter().map(|sp| (&sp.pattern, sp)).collect();
    let (t_name, nt_name) = label_names(data);
    let n = labels.total as f64;

    let mut pairs = Vec::new();
    for pq in frequent.iter().filter(|sp| sp.pattern.len() >= 2) {
        for k in 1..pq.pattern.len() {
            let (p, q) = pq.pattern.split_at(k).expect("split inside bounds");
            let Some(sp) = by_pattern.get(&p) else {
                continue;
            };
            for to_target in [false, true] {
                let (flip_pq, flip_p) = if to_target {
                    (pq.count_target, sp.count_target)
                } else {
                    (pq.count_nontarget, sp.count_nontarget)
                };
                let conf_p = flip_p as f64 / sp.count as f64;
                let conf_pq = flip_pq as f64 / pq.count as f64;
                if !is_reversal(conf_p, conf_pq) {
                    continue;
                }
                let probs = ReversalProbs {
                    pq_flipped: flip_pq as f64 / n,
                    pq: pq.count as f64 / n,
                    p_flipped: flip_p as f64 / n,
                    p: sp.count as f64 / n,
                };
                let cir = metrics::conditional_impact_ratio(probs);
                let cps = metrics::conditional_ps_ratio(probs);
                if !(cir.at_least(cir_min) && cps.at_least(cps_min)) {
                    continue;
                }
                let (from, to) = if to_target { (&nt_name, &t_name) } else { (&t_name, &nt_name) };
                pairs.push(ReversalPair {
                    underlying: p.clone(),
                    trigger: q.clone(),
                    derivative: pq.pattern.clone(),
                    direction: format!("{from}->{to}"),
                    conf_p,
                    conf_pq,
                    cir,
                    cps,
                });
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.cir
            .total_cmp(&a.cir)
            .then_with(|| a.underlying.cmp(&b.underlying))
            .then_with(|| a.trigger.cmp(&b.trigger))
            .then_with(|| a.direction.cmp(&b.direction))
    });
    Ok(ReversalReport {
        pairs,
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DebtInfo, ItemKind, TargetLabel, Window};
    use chrono::NaiveDate;

    fn seq(codes: &[&str], target: bool) -> BehaviorSequence {
        let d = NaiveDate::from_ymd_opt(2006, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
        let w = Window { start: d, end: d + chrono::Duration::days(90) };
        let label = if target { TargetLabel::target("DET") } else { TargetLabel::non_target("NDT") };
        BehaviorSequence::new(
            "p",
            w,
            label,
            ItemKind::Activity,
            codes.iter().map(|c| Item::activity(*c)).collect(),
        )
        .unwrap()
    }

    fn pat(codes: &[&str]) -> Pattern {
        Pattern::activities(codes).unwrap()
    }

    fn six() -> Vec<BehaviorSequence> {
        vec![
            seq(&["STM", "UPD"], true),
            seq(&["STM", "UPD"], false),
            seq(&["STM"], true),
            seq(&["STM"], true),
            seq(&["REA"], false),
            seq(&["REA"], false),
        ]
    }

    #[test]
    fn constructed_reversal_scores_two() {
        let report = mine_reversals(&six(), &MiningConfig::new(0.3), 0.0, f64::NEG_INFINITY).unwrap();
        let pair = report
            .pairs
            .iter()
            .find(|p| p.underlying == pat(&["STM"]) && p.direction == "DET->NDT")
            .unwrap();
        assert_eq!(pair.trigger, pat(&["UPD"]));
        assert_eq!(pair.derivative, pat(&["STM", "UPD"]));
        assert_eq!(pair.conf_p, 0.25);
        assert_eq!(pair.conf_pq, 0.5);
        assert_eq!(pair.cir, Score::Finite(2.0));
        assert_eq!(pair.cps, Score::Finite(0.125));
    }

    #[test]
    fn reversal_thresholds_filter() {
        let report = mine_reversals(&six(), &MiningConfig::new(0.3), 2.5, 0.0).unwrap();
        assert!(report.pairs.is_empty());
    }

    #[test]
    fn single_label_warns() {
        let data = vec![seq(&["A", "B"], true), seq(&["A"], true)];
        let report = mine_reversals(&data, &MiningConfig::new(0.5), 1.0, 0.0).unwrap();
        assert!(report.pairs.is_empty());
        assert_eq!(report.warnings.len(), 1);
    }

    #[test]
    fn reversal_pair_round_trips() {
        let pair = ReversalPair {
            underlying: pat(&["STM"]),
            trigger: pat(&["UPD"]),
            derivative: pat(&["STM", "UPD"]),
            direction: "DET->NDT".into(),
            conf_p: 0.2,
            conf_pq: 0.44,
            cir: Score::Finite(2.2),
            cps: Score::Finite(0.005),
        };
        let json = serde_json::to_string(&pair).unwrap();
        assert!(json.contains("\"Cir\":2.2") && json.contains("\"Cps\":0.005"));
        assert_eq!(serde_json::from_str::<ReversalPair>(&json).unwrap(), pair);
    }

    #[test]
    fn identical_datasets_do_not_contrast() {
        let a = six();
        let report = mine_contrast(&a, &a, &MiningConfig::new(0.3)).unwrap();
        assert!(!report.patterns.is_empty());
        for p in &report.patterns {
            assert_eq!(p.cd, 0.0);
            assert_eq!(p.cdr, Score::Finite(1.0));
        }
    }

    #[test]
    fn contrast_counts_and_one_sided_patterns() {
        let a = vec![seq(&["UPD"], true), seq(&["UPD", "REA"], true), seq(&["DOC"], true), seq(&["UPD"], true)];
        let b = vec![seq(&["REA"], false), seq(&["UPD"], false), seq(&["DOC"], false), seq(&["DOC"], false)];
        let report = mine_contrast(&a, &b, &MiningConfig::new(0.5)).unwrap();
        let upd = report.patterns.iter().find(|p| p.pattern == pat(&["UPD"])).unwrap();
        assert_eq!((upd.supp_a, upd.supp_b), (0.75, 0.25));
        assert_eq!(upd.cd, 0.5);
        assert_eq!(upd.cdr, Score::Finite(3.0));
        assert_eq!(upd.cd_ba, -0.5);
        assert_eq!(report.patterns[0].pattern, pat(&["UPD"]));
        let doc = report.patterns.iter().find(|p| p.pattern == pat(&["DOC"])).unwrap();
        assert_eq!((doc.supp_a, doc.supp_b), (0.25, 0.5));
    }

    #[test]
    fn contrast_direction_symmetry() {
        let a = vec![seq(&["UPD", "REA"], true), seq(&["UPD"], true), seq(&["DOC"], true)];
        let b = vec![seq(&["REA"], false), seq(&["UPD", "DOC"], false)];
        let cfg = MiningConfig::new(0.3);
        let ab = mine_contrast(&a, &b, &cfg).unwrap().patterns;
        let ba = mine_contrast(&b, &a, &cfg).unwrap().patterns;
        assert_eq!(ab.len(), ba.len());
        for (x, y) in ab.iter().zip(&ba) {
            assert_eq!(x.pattern, y.pattern);
            assert_eq!(x.cd, -y.cd);
            assert_eq!(x.cdr, y.cdr_ba);
        }
    }

    #[test]
    fn disjoint_alphabets_warn() {
        let a = vec![seq(&["A"], true)];
        let b = vec![seq(&["B"], false)];
        let report = mine_contrast(&a, &b, &MiningConfig::new(0.5)).unwrap();
        assert!(report.patterns.is_empty());
        assert_eq!(report.warnings.len(), 1);
    }

    fn with_debt(mut s: BehaviorSequence, amount: f64, days: u64) -> BehaviorSequence {
        s.debt = Some(DebtInfo { amount, duration_days: days });
        s
    }

    #[test]
    fn risk_over_matches() {
        let data = vec![
            with_debt(seq(&["UPD"], true), 100.0, 10),
            with_debt(seq(&["UPD", "DOC"], true), 50.0, 5),
            seq(&["DOC"], false),
        ];
        let r = annotate_risk(&[pat(&["UPD"]), pat(&["ANO"])], &data);
        assert_eq!(r[0].1.risk_amt, Score::Finite(1.0));
        assert_eq!(r[0].1.risk_dur, Score::Finite(1.0));
        assert_eq!(r[1].1.risk_amt, Score::Undefined);
    }

    #[test]
    fn risk_reproduces_table_row_from_ledgers() {
        // matches of UPD: debt-labeled ones carry 505 of 1000 dollars and
        // 203 of 1000 days
        let mut data = vec![
            with_debt(seq(&["UPD"], true), 305.0, 103),
            with_debt(seq(&["UPD"], true), 200.0, 100),
            with_debt(seq(&["UPD"], false), 495.0, 797),
        ];
        data.push(seq(&["REA"], false));
        let r = annotate_risk(&[pat(&["UPD"])], &data);
        assert!((r[0].1.risk_amt.value().unwrap() - 0.505).abs() < 1e-12);
        assert!((r[0].1.risk_dur.value().unwrap() - 0.203).abs() < 1e-12);
    }

    #[test]
    fn impact_records_carry_risk() {
        let data = vec![
            with_debt(seq(&["UPD"], true), 100.0, 10),
            seq(&["UPD", "DOC"], false),
            seq(&["DOC"], false),
        ];
        let recs = mine_impact(&data, &MiningConfig::new(0.3)).unwrap();
        let upd = recs
            .iter()
            .find(|r| r.rule.pattern == pat(&["UPD"]) && r.rule.polarity == Polarity::Positive && r.rule.label == "DET")
            .unwrap();
        assert_eq!(upd.risk.risk_amt, Score::Finite(1.0));
        let json = serde_json::to_string(upd).unwrap();
        assert!(json.contains("\"risk_amt\":1.0"));
    }
}
