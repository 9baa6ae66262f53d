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


#![allow(dead_code)]

use behaviorlab_core::model::{BehaviorSequence, Item, ItemKind, Pattern, TargetLabel, Window};
use chrono::NaiveDate;
use proptest::prelude::*;

pub const ALPHABET: [&str; 5] = ["A", "B", "C", "D", "E"];

pub fn window() -> Window {
    let d = NaiveDate::from_ymd_opt(2006, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap();
    Window { start: d, end: d + chrono::Duration::days(1) }
}

pub fn seq(codes: &[&str], target: bool) -> BehaviorSequence {
    let label = if target { TargetLabel::target("DET") } else { TargetLabel::non_target("NDT") };
    let items = codes.iter().map(|c| Item::activity(*c)).collect();
    BehaviorSequence::new("s", window(), label, ItemKind::Activity, items).unwrap()
}

pub fn pat(codes: &[&str]) -> Pattern {
    Pattern::activities(codes).unwrap()
}

/// Up to 8 labeled sequences of length 1..=6 over a 5-letter alphabet.
pub fn dataset() -> impl Strategy<Value = Vec<BehaviorSequence>> {
    let one = (prop::collection::vec(0..ALPHABET.len(), 1..=6), any::<bool>());
    prop::collection::vec(one, 1..=8).prop_map(|rows| {
        rows.into_iter()
            .map(|(ids, t)| {
                let codes: Vec<&str> = ids.into_iter().map(|i| ALPHABET[i]).collect();
                seq(&codes, t)
            })
            .collect()
    })
}
