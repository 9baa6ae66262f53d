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


mod common;

use std::collections::BTreeMap;

use behaviorlab_core::model::{contains, Pattern};
use behaviorlab_core::oracle::{enumerate_patterns, enumerate_patterns_with};
use behaviorlab_core::seqmine::{mine_frequent, MiningConfig};
use common::{dataset, pat, seq};
use proptest::prelude::*;

fn mined(data: &[behaviorlab_core::model::BehaviorSequence], cfg: &MiningConfig) -> BTreeMap<Pattern, u64> {
    mine_frequent(data, cfg).unwrap().into_iter().map(|sp| (sp.pattern, sp.count)).collect()
}

fn expected(data: &[behaviorlab_core::model::BehaviorSequence], s: f64, contiguous: bool) -> BTreeMap<Pattern, u64> {
    let e = enumerate_patterns_with(data, 6, contiguous).unwrap();
    e.counts
        .into_iter()
        .filter(|&(_, c)| c as f64 / e.total as f64 >= s)
        .collect()
}

#[test]
fn fixed_dataset_matches_enumeration() {
    let data = vec![seq(&["A", "B", "C"], true), seq(&["A", "C"], false), seq(&["B", "A"], true), seq(&["C"], false)];
    let got = mined(&data, &MiningConfig::new(0.5));
    assert_eq!(got, expected(&data, 0.5, false));
    assert_eq!(got[&pat(&["A", "C"])], 2);
    assert!(!got.contains_key(&pat(&["B", "C"])));
}

#[test]
fn weights_equal_repetition() {
    let mut heavy = seq(&["A", "B"], true);
    heavy.weight = 3;
    let weighted = vec![heavy, seq(&["B"], false)];
    let repeated = vec![
        seq(&["A", "B"], true),
        seq(&["A", "B"], true),
        seq(&["A", "B"], true),
        seq(&["B"], false),
    ];
    let cfg = MiningConfig::new(0.25);
    assert_eq!(mined(&weighted, &cfg), mined(&repeated, &cfg));
    assert_eq!(enumerate_patterns(&weighted, 6).unwrap().counts, enumerate_patterns(&repeated, 6).unwrap().counts);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn miner_equals_oracle(data in dataset(), s in prop::sample::select(vec![0.125, 0.25, 0.5, 0.75, 1.0])) {
        prop_assert_eq!(mined(&data, &MiningConfig::new(s)), expected(&data, s, false));
    }

    #[test]
    fn contiguous_miner_equals_oracle(data in dataset(), s in prop::sample::select(vec![0.25, 0.5])) {
        let cfg = MiningConfig { contiguous: true, ..MiningConfig::new(s) };
        prop_assert_eq!(mined(&data, &cfg), expected(&data, s, true));
    }

    #[test]
    fn length_cap_is_respected(data in dataset(), cap in 1usize..=4) {
        let cfg = MiningConfig { max_pattern_length: cap, ..MiningConfig::new(0.25) };
        let got = mined(&data, &cfg);
        let want: BTreeMap<Pattern, u64> = expected(&data, 0.25, false).into_iter().filter(|(p, _)| p.len() <= cap).collect();
        prop_assert_eq!(got, want);
    }

    #[test]
    fn support_is_anti_monotone(data in dataset()) {
        let e = enumerate_patterns(&data, 6).unwrap();
        for (p, &c) in &e.counts {
            for k in 0..p.len() {
                let mut items = p.items().to_vec();
                items.remove(k);
                if items.is_empty() {
                    continue;
                }
                let sub = Pattern::new(items).unwrap();
                prop_assert!(e.counts[&sub] >= c, "{:?} < {:?}", sub, p);
            }
        }
    }

    #[test]
    fn containment_agrees_with_enumeration(data in dataset()) {
        for s in &data {
            let own = enumerate_patterns(std::slice::from_ref(s), 6).unwrap();
            let all = enumerate_patterns(&data, 6).unwrap();
            for p in all.counts.keys() {
                prop_assert_eq!(contains(s, p).unwrap(), own.counts.contains_key(p));
            }
        }
    }

    #[test]
    fn partition_identity(data in dataset(), s in prop::sample::select(vec![0.25, 0.5])) {
        for sp in mine_frequent(&data, &MiningConfig::new(s)).unwrap() {
            prop_assert_eq!(sp.count, sp.count_target + sp.count_nontarget);
            prop_assert!((sp.support - sp.support_target - sp.support_nontarget).abs() <= 1e-12);
        }
    }

    #[test]
    fn results_are_sorted(data in dataset()) {
        let out = mine_frequent(&data, &MiningConfig::new(0.25)).unwrap();
        for w in out.windows(2) {
            prop_assert!(w[0].count > w[1].count || (w[0].count == w[1].count && w[0].pattern < w[1].pattern));
        }
    }
}
