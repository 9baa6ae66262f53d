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

//! Behavioral data model: behavior vectors, microstructure vectors, labeled
//! behavior sequences and patterns, plus the subsequence semantics every
//! miner in this crate shares.

use std::collections::BTreeMap;
use std::fmt;

use chrono::NaiveDateTime;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Full behavior vector with all thirteen behavioral attributes.
///
/// Only `subject_id`, `action` and `time` are mandatory. The remaining
/// attributes are stored verbatim; `context`, `goal`, `constraint` and
/// `place` are carried for completeness but nothing downstream reads them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BehaviorVector {
    pub subject_id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub object_id: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub context: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub goal: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub belief: Option<String>,
    pub action: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub plan: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub impact: Option<Impact>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub constraint: Vec<String>,
    pub time: NaiveDateTime,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub place: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub associates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Impact {
    Numeric(f64),
    Label(String),
}

/// The five-attribute simplified view `{subject, object, action, impact, time}`.
/// Absent object or impact is carried as an explicit `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedVector {
    pub subject_id: String,
    pub object_id: Option<String>,
    pub action: String,
    pub impact: Option<Impact>,
    pub time: NaiveDateTime,
}

impl BehaviorVector {
    pub fn new(subject_id: impl Into<String>, action: impl Into<String>, time: NaiveDateTime) -> Self {
        BehaviorVector {
            subject_id: subject_id.into(),
            object_id: None,
            context: BTreeMap::new(),
            goal: None,
            belief: None,
            action: action.into(),
            plan: None,
            impact: None,
            constraint: Vec::new(),
            time,
            place: None,
            status: None,
            associates: Vec::new(),
        }
    }
}

pub fn project_simplified(v: &BehaviorVector) -> SimplifiedVector {
    SimplifiedVector {
        subject_id: v.subject_id.clone(),
        object_id: v.object_id.clone(),
        action: v.action.clone(),
        impact: v.impact.clone(),
        time: v.time,
    }
}

/// Embeds a simplified vector back into the full form, leaving every other
/// attribute absent.
pub fn embed(s: &SimplifiedVector) -> BehaviorVector {
    BehaviorVector {
        object_id: s.object_id.clone(),
        impact: s.impact.clone(),
        ..BehaviorVector::new(s.subject_id.clone(), s.action.clone(), s.time)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum OrderSize {
    S,
    M,
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Side {
    B,
    S,
}

impl Side {
    pub fn code(self) -> &'static str {
        match self {
            Side::B => "B",
            Side::S => "S",
        }
    }
}

/// Binned fraction of the ordered volume that traded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FillBin {
    L,
    M,
    H,
}

/// Order lifecycle status: withdrawn/invalid (-1), active (0), done (1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Status {
    Withdrawn,
    Active,
    Done,
}

/// Side of the account's follow-up order: opposite (-1), none (0), same (1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Associate {
    Opposite,
    None,
    Same,
}

macro_rules! signed_code {
    ($ty:ident, $neg:ident, $zero:ident, $pos:ident) => {
        impl From<$ty> for i8 {
            fn from(v: $ty) -> i8 {
                match v {
                    $ty::$neg => -1,
                    $ty::$zero => 0,
                    $ty::$pos => 1,
                }
            }
        }

        impl TryFrom<i8> for $ty {
            type Error = String;

            fn try_from(v: i8) -> std::result::Result<Self, String> {
                match v {
                    -1 => Ok($ty::$neg),
                    0 => Ok($ty::$zero),
                    1 => Ok($ty::$pos),
                    other => Err(format!(
                        "{} must be -1, 0 or 1, got {}",
                        stringify!($ty),
                        other
                    )),
                }
            }
        }
    };
}

signed_code!(Status, Withdrawn, Active, Done);
signed_code!(Associate, Opposite, None, Same);

/// Discretized order lifecycle `(b, a, l, u, m)`. Equality is field-wise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MicrostructureVector {
    #[serde(rename = "b")]
    pub order_size: OrderSize,
    #[serde(rename = "a")]
    pub action: Side,
    #[serde(rename = "l")]
    pub trade_probability: FillBin,
    #[serde(rename = "u")]
    pub status: Status,
    #[serde(rename = "m")]
    pub associate: Associate,
}

impl MicrostructureVector {
    pub fn new(b: OrderSize, a: Side, l: FillBin, u: Status, m: Associate) -> Self {
        MicrostructureVector {
            order_size: b,
            action: a,
            trade_probability: l,
            status: u,
            associate: m,
        }
    }
}

impl fmt::Display for MicrostructureVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(b_{:?},{:?},l_{:?},u_{},m_{})",
            self.order_size,
            self.action,
            self.trade_probability,
            i8::from(self.status),
            i8::from(self.associate)
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ItemKind {
    Activity,
    Microstructure,
    Demographic,
}

impl ItemKind {
    pub fn name(self) -> &'static str {
        match self {
            ItemKind::Activity => "activity_code",
            ItemKind::Microstructure => "microstructure_vector",
            ItemKind::Demographic => "demographic_item",
        }
    }
}

/// One sequence element. On the wire, activity codes and demographic items
/// are bare strings and microstructure vectors are `{b,a,l,u,m}` objects;
/// the owning record's `kind` disambiguates the two string forms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Item {
    Activity(String),
    Micro(MicrostructureVector),
    #[serde(skip_deserializing)]
    Demographic(String),
}

impl Item {
    pub fn kind(&self) -> ItemKind {
        match self {
            Item::Activity(_) => ItemKind::Activity,
            Item::Micro(_) => ItemKind::Microstructure,
            Item::Demographic(_) => ItemKind::Demographic,
        }
    }

    pub fn activity(code: impl Into<String>) -> Self {
        Item::Activity(code.into())
    }

    pub fn demographic(attr: &str, value: &str) -> Self {
        Item::Demographic(format!("{attr}={value}"))
    }

    /// Re-reads a string item as the given kind. Microstructure items are left
    /// untouched; a string item under a microstructure kind is an error.
    fn retag(self, kind: ItemKind) -> Result<Self> {
        match (self, kind) {
            (Item::Activity(s) | Item::Demographic(s), ItemKind::Activity) => Ok(Item::Activity(s)),
            (Item::Activity(s) | Item::Demographic(s), ItemKind::Demographic) => {
                Ok(Item::Demographic(s))
            }
            (item @ Item::Micro(_), ItemKind::Microstructure) => Ok(item),
            (item, kind) => Err(Error::KindMismatch {
                expected: kind.name(),
                found: item.kind().name(),
            }),
        }
    }
}

impl fmt::Display for Item {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Item::Activity(s) | Item::Demographic(s) => f.write_str(s),
            Item::Micro(v) => v.fmt(f),
        }
    }
}

fn check_kind(items: &[Item], kind: ItemKind) -> Result<()> {
    match items.iter().find(|i| i.kind() != kind) {
        Some(bad) => Err(Error::KindMismatch {
            expected: kind.name(),
            found: bad.kind().name(),
        }),
        None => Ok(()),
    }
}

/// A non-empty ordered list of same-kind items.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Item>", into = "Vec<Item>")]
pub struct Pattern {
    items: Vec<Item>,
}

impl Pattern {
    pub fn new(items: Vec<Item>) -> Result<Self> {
        let first = items.first().ok_or(Error::EmptyPattern)?;
        check_kind(&items, first.kind())?;
        Ok(Pattern { items })
    }

    pub fn activities<S: AsRef<str>>(codes: &[S]) -> Result<Self> {
        Pattern::new(codes.iter().map(|c| Item::activity(c.as_ref())).collect())
    }

    pub fn micro(vectors: &[MicrostructureVector]) -> Result<Self> {
        Pattern::new(vectors.iter().copied().map(Item::Micro).collect())
    }

    pub fn items(&self) -> &[Item] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn kind(&self) -> ItemKind {
        self.items[0].kind()
    }

    /// `self` followed by `other`.
    pub fn concat(&self, other: &Pattern) -> Result<Pattern> {
        if self.kind() != other.kind() {
            return Err(Error::KindMismatch {
                expected: self.kind().name(),
                found: other.kind().name(),
            });
        }
        let mut items = self.items.clone();
        items.extend(other.items.iter().cloned());
        Ok(Pattern { items })
    }

    /// Splits at `at`, returning `(prefix, suffix)` when both are non-empty.
    pub fn split_at(&self, at: usize) -> Option<(Pattern, Pattern)> {
        if at == 0 || at >= self.items.len() {
            return None;
        }
        let (p, q) = self.items.split_at(at);
        Some((Pattern { items: p.to_vec() }, Pattern { items: q.to_vec() }))
    }

    pub fn is_prefix_of(&self, other: &Pattern) -> bool {
        other.items.starts_with(&self.items)
    }
}

impl TryFrom<Vec<Item>> for Pattern {
    type Error = Error;

    fn try_from(items: Vec<Item>) -> Result<Self> {
        Pattern::new(items)
    }
}

impl From<Pattern> for Vec<Item> {
    fn from(p: Pattern) -> Self {
        p.items
    }
}

impl fmt::Display for Pattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, item) in self.items.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            item.fmt(f)?;
        }
        Ok(())
    }
}

pub fn concat(p: &Pattern, q: &Pattern) -> Result<Pattern> {
    p.concat(q)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelValue {
    Target,
    NonTarget,
}

/// Binary outcome label with its domain spelling (e.g. `DET` / `NDT`).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct TargetLabel {
    pub value: LabelValue,
    pub display: String,
}

impl TargetLabel {
    pub fn target(display: impl Into<String>) -> Self {
        TargetLabel {
            value: LabelValue::Target,
            display: display.into(),
        }
    }

    pub fn non_target(display: impl Into<String>) -> Self {
        TargetLabel {
            value: LabelValue::NonTarget,
            display: display.into(),
        }
    }

    pub fn is_target(&self) -> bool {
        self.value == LabelValue::Target
    }
}

impl fmt::Display for TargetLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display)
    }
}

/// Half-open time interval `[start, end)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Window {
    pub start: NaiveDateTime,
    pub end: NaiveDateTime,
}

impl Window {
    pub fn contains(&self, t: NaiveDateTime) -> bool {
        self.start <= t && t < self.end
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DebtInfo {
    pub amount: f64,
    pub duration_days: u64,
}

/// A priced execution row kept alongside a microstructure sequence so price
/// series can be rebuilt without the raw orderbook.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trade {
    pub time: NaiveDateTime,
    pub security: String,
    pub price: f64,
    pub volume: u64,
}

/// Time-ordered, labeled items for one subject in one window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSequence")]
pub struct BehaviorSequence {
    pub subject_id: String,
    pub window: Window,
    pub label: TargetLabel,
    pub kind: ItemKind,
    pub items: Vec<Item>,
    #[serde(skip_serializing_if = "is_one")]
    pub weight: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub debt: Option<DebtInfo>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub trades: Vec<Trade>,
}

fn is_one(w: &u64) -> bool {
    *w == 1
}

fn one() -> u64 {
    1
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSequence {
    subject_id: String,
    window: Window,
    label: TargetLabel,
    kind: ItemKind,
    items: Vec<Item>,
    #[serde(default = "one")]
    weight: u64,
    #[serde(default)]
    debt: Option<DebtInfo>,
    #[serde(default)]
    trades: Vec<Trade>,
}

impl TryFrom<RawSequence> for BehaviorSequence {
    type Error = Error;

    fn try_from(raw: RawSequence) -> Result<Self> {
        let items = raw
            .items
            .into_iter()
            .map(|i| i.retag(raw.kind))
            .collect::<Result<Vec<_>>>()?;
        let mut seq = BehaviorSequence::new(raw.subject_id, raw.window, raw.label, raw.kind, items)?;
        if raw.weight == 0 {
            return Err(Error::Schema("sequence weight must be positive".into()));
        }
        seq.weight = raw.weight;
        seq.debt = raw.debt;
        seq.trades = raw.trades;
        Ok(seq)
    }
}

impl BehaviorSequence {
    pub fn new(
        subject_id: impl Into<String>,
        window: Window,
        label: TargetLabel,
        kind: ItemKind,
        items: Vec<Item>,
    ) -> Result<Self> {
        check_kind(&items, kind)?;
        Ok(BehaviorSequence {
            subject_id: subject_id.into(),
            window,
            label,
            kind,
            items,
            weight: 1,
            debt: None,
            trades: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Ordered, possibly gapped subsequence test.
pub fn is_subsequence<T: PartialEq>(haystack: &[T], needle: &[T]) -> bool {
    let mut it = haystack.iter();
    needle.iter().all(|n| it.any(|h| h == n))
}

/// Gap-free (contiguous) occurrence test.
pub fn is_substring<T: PartialEq>(haystack: &[T], needle: &[T]) -> bool {
    needle.is_empty() || haystack.windows(needle.len()).any(|w| w == needle)
}

/// True iff `p` occurs in `seq` as an ordered, possibly gapped subsequence.
pub fn contains(seq: &BehaviorSequence, p: &Pattern) -> Result<bool> {
    if seq.kind != p.kind() {
        return Err(Error::KindMismatch {
            expected: seq.kind.name(),
            found: p.kind().name(),
        });
    }
    Ok(is_subsequence(&seq.items, p.items()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::NaiveDate;

    fn t0() -> NaiveDateTime {
        NaiveDate::from_ymd_opt(2006, 1, 1).unwrap().and_hms_opt(0, 0, 0).unwrap()
    }

    fn win() -> Window {
        Window {
            start: t0(),
            end: t0() + chrono::Duration::days(90),
        }
    }

    fn seq(codes: &[&str]) -> BehaviorSequence {
        BehaviorSequence::new(
            "p1",
            win(),
            TargetLabel::target("DET"),
            ItemKind::Activity,
            codes.iter().map(|c| Item::activity(*c)).collect(),
        )
        .unwrap()
    }

    #[test]
    fn projection_keeps_five_fields() {
        let mut v = BehaviorVector::new("s1", "B", t0());
        v.object_id = Some("S123".into());
        v.goal = Some("profit".into());
        v.belief = Some("bullish".into());
        v.plan = Some("accumulate".into());
        v.impact = Some(Impact::Numeric(0.05));
        v.place = Some("ASX".into());
        v.status = Some("done".into());
        v.associates = vec!["s2".into()];
        v.context.insert("market".into(), "open".into());
        v.constraint = vec!["limit".into()];
        let s = project_simplified(&v);
        assert_eq!(s.subject_id, "s1");
        assert_eq!(s.object_id.as_deref(), Some("S123"));
        assert_eq!(s.action, "B");
        assert_eq!(s.impact, Some(Impact::Numeric(0.05)));
        assert_eq!(s.time, t0());
    }

    #[test]
    fn projection_marks_absent_object() {
        let v = BehaviorVector::new("s1", "S", t0());
        let s = project_simplified(&v);
        assert_eq!(s.object_id, None);
        assert_eq!(s.impact, None);
        assert_eq!(project_simplified(&embed(&s)), s);
    }

    #[test]
    fn full_vector_round_trips_through_json() {
        let mut v = BehaviorVector::new("s1", "B", t0());
        v.impact = Some(Impact::Label("DET".into()));
        v.context.insert("k".into(), "v".into());
        v.associates = vec!["a".into(), "b".into()];
        let json = serde_json::to_string(&v).unwrap();
        let back: BehaviorVector = serde_json::from_str(&json).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn gapped_containment_respects_order() {
        let s = seq(&["A", "B", "C"]);
        assert!(contains(&s, &Pattern::activities(&["A", "C"]).unwrap()).unwrap());
        assert!(!contains(&s, &Pattern::activities(&["C", "A"]).unwrap()).unwrap());
        assert!(contains(&s, &Pattern::activities(&["A", "B", "C"]).unwrap()).unwrap());
        assert!(!contains(&s, &Pattern::activities(&["A", "A"]).unwrap()).unwrap());
    }

    #[test]
    fn containment_rejects_kind_mismatch() {
        let s = seq(&["A"]);
        let v = MicrostructureVector::new(
            OrderSize::S,
            Side::B,
            FillBin::H,
            Status::Done,
            Associate::None,
        );
        let p = Pattern::micro(&[v]).unwrap();
        assert!(matches!(contains(&s, &p), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn concat_appends() {
        let p = Pattern::activities(&["STM"]).unwrap();
        let q = Pattern::activities(&["UPD"]).unwrap();
        let pq = concat(&p, &q).unwrap();
        assert_eq!(pq, Pattern::activities(&["STM", "UPD"]).unwrap());
        assert_eq!(pq.to_string(), "STM,UPD");
    }

    #[test]
    fn empty_pattern_is_rejected() {
        assert!(matches!(Pattern::new(vec![]), Err(Error::EmptyPattern)));
        assert!(serde_json::from_str::<Pattern>("[]").is_err());
    }

    #[test]
    fn mixed_kind_pattern_is_rejected() {
        let items = vec![Item::activity("A"), Item::demographic("gender", "F")];
        assert!(matches!(Pattern::new(items), Err(Error::KindMismatch { .. })));
    }

    #[test]
    fn signed_codes_reject_out_of_domain() {
        let bad = r#"{"b":"S","a":"B","l":"H","u":2,"m":0}"#;
        assert!(serde_json::from_str::<MicrostructureVector>(bad).is_err());
        let good = r#"{"b":"L","a":"B","l":"L","u":-1,"m":1}"#;
        let v: MicrostructureVector = serde_json::from_str(good).unwrap();
        assert_eq!(v.to_string(), "(b_L,B,l_L,u_-1,m_1)");
    }

    #[test]
    fn demographic_sequences_keep_their_kind_on_reload() {
        let s = BehaviorSequence::new(
            "p9",
            win(),
            TargetLabel::non_target("NDT"),
            ItemKind::Demographic,
            vec![Item::demographic("gender", "female")],
        )
        .unwrap();
        let json = serde_json::to_string(&s).unwrap();
        let back: BehaviorSequence = serde_json::from_str(&json).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.items[0], Item::Demographic("gender=female".into()));
    }

    #[test]
    fn string_items_under_microstructure_kind_fail() {
        let json = r#"{"subject_id":"a","window":{"start":"2005-01-01T00:00:00","end":"2005-01-02T00:00:00"},"label":{"value":"target","display":"T"},"kind":"microstructure","items":["X"]}"#;
        assert!(serde_json::from_str::<BehaviorSequence>(json).is_err());
    }
}
