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


use std::collections::{BTreeMap, BTreeSet};

use behaviorlab_core::combined::{mine_combined, CombinedConfig, Person};
use behaviorlab_core::model::{BehaviorSequence, Item, ItemKind, TargetLabel, Window};
use behaviorlab_core::oracle::{cohort_counts, enumerate_patterns};
use behaviorlab_core::seqmine::MiningConfig;
use chrono::NaiveDate;
use proptest::prelude::*;

const DEMO: [(&str, &str); 4] = [("gender", "F"), ("gender", "M"), ("age", "65+"), ("rent-type", "own")];
const CODES: [&str; 3] = ["REA", "STM", "UPD"];

fn persons() -> impl Strategy<Value = Vec<Person>> {
    let one = (
        prop::collection::btree_set(0..DEMO.len(), 1..=3),
        prop::collection::vec(0..CODES.len(), 0..=4),
        any::<bool>(),
    );
    prop::collection::vec(one, 1..=8).prop_map(|rows| {
        rows.into_iter()
            .enumerate()
            .map(|(i, (d, a, hi))| Person {
                id: format!("p{i}"),
                demographics: d.into_iter().map(|k| Item::demographic(DEMO[k].0, DEMO[k].1)).collect(),
                activities: a.into_iter().map(|k| Item::activity(CODES[k])).collect(),
                class: if hi { "hi".into() } else { "lo".into() },
                weight: 1,
            })
            .collect()
    })
}

type Key = (Vec<Item>, Vec<Item>, String);

/// Every (D, A, class) by brute force over demographic subsets and
/// enumerated activity subsequences.
fn reference(people: &[Person], s: f64) -> BTreeMap<Key, (u64, f64, f64, f64)> {
    let demo_alpha: Vec<Item> = people.iter().flat_map(|p| p.demographics.clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let d = NaiveDate::from_ymd_opt(2006, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    let seqs: Vec<BehaviorSequence> = people
        .iter()
        .filter(|p| !p.activities.is_empty())
        .map(|p| {
            BehaviorSequence::new(&p.id, Window { start: d, end: d }, TargetLabel::non_target("x"), ItemKind::Activity, p.activities.clone()).unwrap()
        })
        .collect();
    let a_candidates: Vec<Vec<Item>> = if seqs.is_empty() {
        Vec::new()
    } else {
        enumerate_patterns(&seqs, 6).unwrap().counts.into_keys().map(|p| p.items().to_vec()).collect()
    };
    let demos: Vec<(String, Vec<Item>, String)> = people.iter().map(|p| (p.id.clone(), p.demographics.clone(), p.class.clone())).collect();
    let acts: Vec<(String, Vec<Item>)> = people.iter().map(|p| (p.id.clone(), p.activities.clone())).collect();
    let n = people.len() as f64;
    let mut out = BTreeMap::new();
    for mask in 1u32..(1 << demo_alpha.len()) {
        let ds: Vec<Item> = (0..demo_alpha.len()).filter(|i| mask & (1 << i) != 0).map(|i| demo_alpha[i].clone()).collect();
        for a in &a_candidates {
            for class in ["hi", "lo"] {
                let c = cohort_counts(&demos, &acts, &ds, a, class);
                if c.class == 0 || (c.da_class as f64) / n < s {
                    continue;
                }
                let p_class = c.class as f64 / n;
                let lift = c.da_class as f64 / c.da as f64 / p_class;
                let lift_d = c.d_class as f64 / c.d as f64 / p_class;
                let lift_a = c.a_class as f64 / c.a as f64 / p_class;
                out.insert((ds.clone(), a.clone(), class.to_string()), (c.da_class, lift, lift_d, lift_a));
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn combined_matches_cohort_counts(people in persons(), s in prop::sample::select(vec![0.25, 0.5])) {
        let cfg = CombinedConfig { mining: MiningConfig::new(s), ..Default::default() };
        let got: BTreeMap<Key, _> = mine_combined(&people, &cfg)
            .unwrap()
            .into_iter()
            .map(|p| ((p.d.items().to_vec(), p.a.items().to_vec(), p.class.clone()), p))
            .collect();
        let want = reference(&people, s);
        prop_assert_eq!(got.keys().collect::<Vec<_>>(), want.keys().collect::<Vec<_>>());
        for (k, (count, lift, lift_d, lift_a)) in &want {
            let p = &got[k];
            prop_assert_eq!(p.count, *count);
            prop_assert!((p.lift - lift).abs() <= 1e-12);
            prop_assert!((p.lift_d - lift_d).abs() <= 1e-12);
            prop_assert!((p.lift_a - lift_a).abs() <= 1e-12);
            prop_assert!((p.i_p.value().unwrap() - lift / (lift_d * lift_a)).abs() <= 1e-9);
        }
    }
}
