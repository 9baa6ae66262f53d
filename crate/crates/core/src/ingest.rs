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

//! Raw CSV ingestion and conversion of transactional records into behavior
//! sequences: order lifecycles become microstructure vectors, activity logs
//! become labeled activity sequences, demographic rows become labeled
//! itemsets.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use chrono::{Duration, NaiveDate, NaiveDateTime, NaiveTime};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    Associate, BehaviorSequence, DebtInfo, FillBin, Item, ItemKind, MicrostructureVector,
    OrderSize, Side, Status, TargetLabel, Trade, Window,
};

pub const ORDERBOOK_HEADER: [&str; 8] = [
    "serial_id",
    "date",
    "time",
    "account_id",
    "security",
    "action",
    "price",
    "volume",
];
/// Optional ninth orderbook column naming the row's lifecycle event.
pub const ORDERBOOK_EVENT_COLUMN: &str = "event";
pub const ACTIVITIES_HEADER: [&str; 3] = ["person_id", "timestamp", "activity_code"];
pub const DEBTS_HEADER: [&str; 5] = ["person_id", "debt_id", "raised_date", "amount", "duration_days"];

/// Demographic CSV columns in file order, each paired with the key used for
/// its `key=value` item.
pub const DEMOGRAPHIC_FIELDS: [(&str, &str); 15] = [
    ("person_id", "person"),
    ("partner_person_id", "partner"),
    ("indigenous_code", "indigenous"),
    ("medical_condition", "medical-condition"),
    ("region_office", "region-office"),
    ("gender", "gender"),
    ("age_band", "age"),
    ("marital_status", "marital-status"),
    ("birth_country", "birth-country"),
    ("migration_status", "migration-status"),
    ("education_level", "education-level"),
    ("postcode", "postcode"),
    ("language", "language"),
    ("rent_type", "rent-type"),
    ("method_of_payment", "method-of-payment"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderEvent {
    Place,
    Fill,
    Withdraw,
    Expire,
}

impl OrderEvent {
    fn parse(s: &str) -> Option<Self> {
        match s {
            "place" => Some(OrderEvent::Place),
            "fill" => Some(OrderEvent::Fill),
            "withdraw" => Some(OrderEvent::Withdraw),
            "expire" => Some(OrderEvent::Expire),
            _ => None,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            OrderEvent::Place => "place",
            OrderEvent::Fill => "fill",
            OrderEvent::Withdraw => "withdraw",
            OrderEvent::Expire => "expire",
        }
    }
}

/// One orderbook row. Rows sharing a `serial_id` are one order's lifecycle:
/// without an explicit `event`, the earliest row places the order and later
/// rows are partial fills.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderRecord {
    pub serial_id: String,
    pub date: NaiveDate,
    pub time: NaiveTime,
    pub account_id: String,
    pub security: String,
    pub action: Side,
    pub price: f64,
    pub volume: u64,
    pub event: Option<OrderEvent>,
}

impl OrderRecord {
    pub fn datetime(&self) -> NaiveDateTime {
        self.date.and_time(self.time)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActivityRecord {
    pub person_id: String,
    pub timestamp: NaiveDateTime,
    pub activity_code: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebtRecord {
    pub person_id: String,
    pub debt_id: String,
    pub raised_date: NaiveDate,
    pub amount: f64,
    pub duration_days: u64,
}

/// One customer's categorical attributes, keyed by item key. Absent (empty)
/// cells are omitted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DemographicRecord {
    pub person_id: String,
    pub attributes: Vec<(String, String)>,
}

/// Two volume cut points; ties at a cut point fall into the lower bin.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SizeCutpoints {
    pub low: u64,
    pub high: u64,
}

impl SizeCutpoints {
    pub fn new(low: u64, high: u64) -> Result<Self> {
        if low >= high {
            return Err(Error::Config(format!(
                "size cut points must be strictly increasing, got ({low}, {high})"
            )));
        }
        Ok(SizeCutpoints { low, high })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionConfig {
    /// Cut points applied to every security without its own entry. When
    /// neither is set, terciles of the security's ordered volumes are used.
    pub size_cutpoints: Option<SizeCutpoints>,
    pub security_cutpoints: BTreeMap<String, SizeCutpoints>,
    /// Follow-up orders placed within this many seconds set the associate field.
    pub association_window_secs: i64,
    /// Sequence window length (seconds); one trading day by default.
    pub window_length_secs: i64,
    /// VWAP bucket length (seconds).
    pub bucket_length_secs: i64,
    /// chrono formats accepted for calendar dates, tried in order.
    pub date_formats: Vec<String>,
    pub observation_start: Option<NaiveDate>,
    /// Exclusive.
    pub observation_end: Option<NaiveDate>,
    /// Splits the activity observation period into windows of this many days.
    pub activity_window_days: Option<i64>,
    pub target_label: String,
    pub non_target_label: String,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        ConversionConfig {
            size_cutpoints: None,
            security_cutpoints: BTreeMap::new(),
            association_window_secs: 900,
            window_length_secs: 86_400,
            bucket_length_secs: 60,
            date_formats: vec!["%d/%m/%Y".into(), "%Y-%m-%d".into()],
            observation_start: None,
            observation_end: None,
            activity_window_days: None,
            target_label: "DET".into(),
            non_target_label: "NDT".into(),
        }
    }
}

impl ConversionConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("association_window_secs", self.association_window_secs),
            ("window_length_secs", self.window_length_secs),
            ("bucket_length_secs", self.bucket_length_secs),
        ] {
            if v <= 0 {
                return Err(Error::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if let Some(d) = self.activity_window_days {
            if d <= 0 {
                return Err(Error::Config(format!("activity_window_days must be positive, got {d}")));
            }
        }
        if let (Some(s), Some(e)) = (self.observation_start, self.observation_end) {
            if s >= e {
                return Err(Error::Config("observation_start must precede observation_end".into()));
            }
        }
        if self.date_formats.is_empty() {
            return Err(Error::Config("at least one date format is required".into()));
        }
        for c in self.security_cutpoints.values().chain(self.size_cutpoints.iter()) {
            SizeCutpoints::new(c.low, c.high)?;
        }
        Ok(())
    }

    fn labels(&self) -> (TargetLabel, TargetLabel) {
        (
            TargetLabel::target(self.target_label.clone()),
            TargetLabel::non_target(self.non_target_label.clone()),
        )
    }

    pub fn parse_date(&self, s: &str) -> Option<NaiveDate> {
        self.date_formats
            .iter()
            .find_map(|f| NaiveDate::parse_from_str(s, f).ok())
    }

    /// Date-time in `<date> <time>` or ISO `T` form, or a bare date at midnight.
    pub fn parse_timestamp(&self, s: &str) -> Option<NaiveDateTime> {
        if let Ok(t) = NaiveDateTime::parse_from_str(s, "%Y-%m-%dT%H:%M:%S") {
            return Some(t);
        }
        if let Some((d, t)) = s.split_once(' ') {
            let time = NaiveTime::parse_from_str(t.trim(), "%H:%M:%S").ok()?;
            return Some(self.parse_date(d.trim())?.and_time(time));
        }
        Some(self.parse_date(s)?.and_time(NaiveTime::MIN))
    }
}

/// Counts reported alongside every conversion.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConversionSummary {
    pub kind: String,
    pub records: u64,
    pub sequences: u64,
    pub dropped_empty: u64,
    pub out_of_window: u64,
    pub target: u64,
    pub non_target: u64,
}

impl ConversionSummary {
    fn tally(kind: &str, records: usize, seqs: &[BehaviorSequence]) -> Self {
        let target = seqs.iter().filter(|s| s.label.is_target()).count() as u64;
        ConversionSummary {
            kind: kind.into(),
            records: records as u64,
            sequences: seqs.len() as u64,
            target,
            non_target: seqs.len() as u64 - target,
            ..Default::default()
        }
    }
}

struct Row {
    line: u64,
    fields: csv::StringRecord,
}

fn read_rows<R: Read>(
    reader: R,
    name: &str,
    header: &[&str],
    optional: Option<&str>,
) -> Result<(Vec<Row>, bool)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut records = rdr.records();
    let found = match records.next() {
        // a zero-byte file is an empty extract
        None => return Ok((Vec::new(), false)),
        Some(r) => r.map_err(|e| Error::parse(name, 1, "", e.to_string()))?,
    };
    let found_cols: Vec<&str> = found.iter().collect();
    let with_optional = optional.is_some_and(|o| {
        found_cols.len() == header.len() + 1 && found_cols[header.len()] == o
    });
    if found_cols[..found_cols.len().min(header.len())] != *header
        || (found_cols.len() != header.len() && !with_optional)
    {
        return Err(Error::Header {
            path: name.into(),
            expected: header.join(","),
            found: found_cols.join(","),
        });
    }
    let width = header.len() + with_optional as usize;
    let mut rows = Vec::new();
    for r in records {
        let fields = r.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(name, line, "", e.to_string())
        })?;
        let line = fields.position().map_or(0, |p| p.line());
        if fields.len() == 1 && fields[0].is_empty() {
            continue;
        }
        if fields.len() != width {
            return Err(Error::parse(
                name,
                line,
                "",
                format!("expected {width} fields, found {}", fields.len()),
            ));
        }
        rows.push(Row { line, fields });
    }
    Ok((rows, with_optional))
}

fn open(path: &Path) -> Result<File> {
    File::open(path).map_err(|e| Error::io(path, e))
}

fn field<'a>(row: &'a Row, header: &[&str], col: &str) -> &'a str {
    let idx = header.iter().position(|h| *h == col).expect("known column");
    &row.fields[idx]
}

fn non_empty<'a>(name: &str, row: &'a Row, header: &[&str], col: &str) -> Result<&'a str> {
    let v = field(row, header, col);
    if v.is_empty() {
        return Err(Error::parse(name, row.line, col, "value is required"));
    }
    Ok(v)
}

pub fn parse_orderbook(path: &Path, cfg: &ConversionConfig) -> Result<Vec<OrderRecord>> {
    parse_orderbook_from(open(path)?, &path.display().to_string(), cfg)
}

pub fn parse_orderbook_from<R: Read>(reader: R, name: &str, cfg: &ConversionConfig) -> Result<Vec<OrderRecord>> {
    let (rows, has_event) = read_rows(reader, name, &ORDERBOOK_HEADER, Some(ORDERBOOK_EVENT_COLUMN))?;
    let h = &ORDERBOOK_HEADER;
    rows.iter()
        .map(|row| {
            let date_s = non_empty(name, row, h, "date")?;
            let date = cfg
                .parse_date(date_s)
                .ok_or_else(|| Error::parse(name, row.line, "date", format!("unrecognized date `{date_s}`")))?;
            let time_s = non_empty(name, row, h, "time")?;
            let time = NaiveTime::parse_from_str(time_s, "%H:%M:%S")
                .map_err(|_| Error::parse(name, row.line, "time", format!("unrecognized time `{time_s}`")))?;
            let action = match field(row, h, "action") {
                "B" => Side::B,
                "S" => Side::S,
                other => {
                    return Err(Error::parse(name, row.line, "action", format!("unknown action `{other}`")))
                }
            };
            let price_s = field(row, h, "price");
            let price: f64 = price_s
                .parse()
                .ok()
                .filter(|p: &f64| p.is_finite() && *p >= 0.0)
                .ok_or_else(|| Error::parse(name, row.line, "price", format!("invalid price `{price_s}`")))?;
            let volume_s = field(row, h, "volume");
            let volume: u64 = volume_s
                .parse()
                .ok()
                .filter(|v| *v > 0)
                .ok_or_else(|| Error::parse(name, row.line, "volume", format!("invalid volume `{volume_s}`")))?;
            let event = if has_event {
                let e = &row.fields[h.len()];
                if e.is_empty() {
                    None
                } else {
                    Some(OrderEvent::parse(e).ok_or_else(|| {
                        Error::parse(name, row.line, "event", format!("unknown event `{e}`"))
                    })?)
                }
            } else {
                None
            };
            Ok(OrderRecord {
                serial_id: non_empty(name, row, h, "serial_id")?.to_string(),
                date,
                time,
                account_id: non_empty(name, row, h, "account_id")?.to_string(),
                security: non_empty(name, row, h, "security")?.to_string(),
                action,
                price,
                volume,
                event,
            })
        })
        .collect()
}

pub fn parse_activities(path: &Path, cfg: &ConversionConfig) -> Result<Vec<ActivityRecord>> {
    parse_activities_from(open(path)?, &path.display().to_string(), cfg)
}

pub fn parse_activities_from<R: Read>(reader: R, name: &str, cfg: &ConversionConfig) -> Result<Vec<ActivityRecord>> {
    let (rows, _) = read_rows(reader, name, &ACTIVITIES_HEADER, None)?;
    let h = &ACTIVITIES_HEADER;
    rows.iter()
        .map(|row| {
            let ts = non_empty(name, row, h, "timestamp")?;
            let timestamp = cfg.parse_timestamp(ts).ok_or_else(|| {
                Error::parse(name, row.line, "timestamp", format!("unrecognized timestamp `{ts}`"))
            })?;
            let code = non_empty(name, row, h, "activity_code")?;
            Ok(ActivityRecord {
                person_id: non_empty(name, row, h, "person_id")?.to_string(),
                timestamp,
                activity_code: code.to_uppercase(),
            })
        })
        .collect()
}

pub fn parse_debts(path: &Path, cfg: &ConversionConfig) -> Result<Vec<DebtRecord>> {
    parse_debts_from(open(path)?, &path.display().to_string(), cfg)
}

pub fn parse_debts_from<R: Read>(reader: R, name: &str, cfg: &ConversionConfig) -> Result<Vec<DebtRecord>> {
    let (rows, _) = read_rows(reader, name, &DEBTS_HEADER, None)?;
    let h = &DEBTS_HEADER;
    rows.iter()
        .map(|row| {
            let d = non_empty(name, row, h, "raised_date")?;
            let raised_date = cfg
                .parse_date(d)
                .ok_or_else(|| Error::parse(name, row.line, "raised_date", format!("unrecognized date `{d}`")))?;
            let amount_s = non_empty(name, row, h, "amount")?;
            let amount = amount_s
                .trim_start_matches('$')
                .parse::<f64>()
                .ok()
                .filter(|a| a.is_finite() && *a >= 0.0)
                .ok_or_else(|| Error::parse(name, row.line, "amount", format!("invalid amount `{amount_s}`")))?;
            let dur_s = non_empty(name, row, h, "duration_days")?;
            let duration_days = dur_s
                .parse()
                .map_err(|_| Error::parse(name, row.line, "duration_days", format!("invalid duration `{dur_s}`")))?;
            Ok(DebtRecord {
                person_id: non_empty(name, row, h, "person_id")?.to_string(),
                debt_id: field(row, h, "debt_id").to_string(),
                raised_date,
                amount,
                duration_days,
            })
        })
        .collect()
}

pub fn parse_demographics(path: &Path) -> Result<Vec<DemographicRecord>> {
    parse_demographics_from(open(path)?, &path.display().to_string())
}

pub fn parse_demographics_from<R: Read>(reader: R, name: &str) -> Result<Vec<DemographicRecord>> {
    let header: Vec<&str> = DEMOGRAPHIC_FIELDS.iter().map(|(c, _)| *c).collect();
    let (rows, _) = read_rows(reader, name, &header, None)?;
    rows.iter()
        .map(|row| {
            let person_id = non_empty(name, row, &header, "person_id")?.to_string();
            let attributes = DEMOGRAPHIC_FIELDS[1..]
                .iter()
                .enumerate()
                .filter(|(i, _)| !row.fields[i + 1].is_empty())
                .map(|(i, (_, key))| (key.to_string(), row.fields[i + 1].to_string()))
                .collect();
            Ok(DemographicRecord { person_id, attributes })
        })
        .collect()
}

/// Size bin for an ordered volume.
pub fn discretize_order_size(volume: u64, cut: SizeCutpoints) -> Result<OrderSize> {
    if volume == 0 {
        return Err(Error::InvalidInput("order volume must be positive".into()));
    }
    Ok(if volume <= cut.low {
        OrderSize::S
    } else if volume <= cut.high {
        OrderSize::M
    } else {
        OrderSize::L
    })
}

/// Tercile cut points: the values at ranks ⌈n/3⌉ and ⌈2n/3⌉ of the sorted
/// volumes. A tie between the two moves the upper cut one unit up.
pub fn tercile_cutpoints(volumes: &[u64]) -> Option<SizeCutpoints> {
    if volumes.is_empty() {
        return None;
    }
    let mut v = volumes.to_vec();
    v.sort_unstable();
    let n = v.len();
    let low = v[n.div_ceil(3) - 1];
    let high = v[(2 * n).div_ceil(3) - 1].max(low + 1);
    Some(SizeCutpoints { low, high })
}

/// Traded fraction of the ordered volume and its bin:
/// L on [0, 1/3), M on [1/3, 2/3), H on [2/3, 1].
pub fn trade_probability(fills: &[u64], ordered_volume: u64) -> Result<(f64, FillBin)> {
    if ordered_volume == 0 {
        return Err(Error::InvalidInput("ordered volume must be positive".into()));
    }
    let filled: u64 = fills.iter().sum();
    if filled > ordered_volume {
        return Err(Error::InvalidInput(format!(
            "filled volume {filled} exceeds ordered volume {ordered_volume}"
        )));
    }
    // compare 3·filled against multiples of the ordered volume to stay exact
    let bin = if 3 * filled < ordered_volume {
        FillBin::L
    } else if 3 * filled < 2 * ordered_volume {
        FillBin::M
    } else {
        FillBin::H
    };
    Ok((filled as f64 / ordered_volume as f64, bin))
}

/// Window index of `t` for windows of `len` seconds starting at `origin`.
fn window_of(t: NaiveDateTime, origin: NaiveDateTime, len: i64) -> Window {
    let secs = (t - origin).num_seconds();
    let idx = secs.div_euclid(len);
    let start = origin + Duration::seconds(idx * len);
    Window {
        start,
        end: start + Duration::seconds(len),
    }
}

fn epoch() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(1970, 1, 1).unwrap().and_time(NaiveTime::MIN)
}

/// One order's rows, resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderLifecycle {
    pub serial_id: String,
    pub account_id: String,
    pub security: String,
    pub side: Side,
    pub placed_at: NaiveDateTime,
    pub ordered_volume: u64,
    /// Indices into the input slice of every row in this lifecycle.
    pub rows: Vec<usize>,
    pub fills_in_window: Vec<u64>,
    pub withdrawn: bool,
    pub window: Window,
}

/// Groups rows into order lifecycles keyed by `(serial_id, account_id)`,
/// ordered by placement time then input order.
pub fn order_lifecycles(orders: &[OrderRecord], cfg: &ConversionConfig) -> Result<Vec<OrderLifecycle>> {
    let mut idx: Vec<usize> = (0..orders.len()).collect();
    idx.sort_by_key(|&i| (orders[i].datetime(), i));
    let mut by_key: HashMap<(&str, &str), usize> = HashMap::new();
    let mut out: Vec<OrderLifecycle> = Vec::new();
    for i in idx {
        let o = &orders[i];
        let key = (o.serial_id.as_str(), o.account_id.as_str());
        match by_key.get(&key) {
            None if matches!(o.event, None | Some(OrderEvent::Place)) => {
                by_key.insert(key, out.len());
                out.push(OrderLifecycle {
                    serial_id: o.serial_id.clone(),
                    account_id: o.account_id.clone(),
                    security: o.security.clone(),
                    side: o.action,
                    placed_at: o.datetime(),
                    ordered_volume: o.volume,
                    rows: vec![i],
                    fills_in_window: Vec::new(),
                    withdrawn: false,
                    window: window_of(o.datetime(), epoch(), cfg.window_length_secs),
                });
            }
            None => {
                return Err(Error::InvalidInput(format!(
                    "order {} has a `{}` row before its placement",
                    o.serial_id,
                    o.event.map_or("fill", OrderEvent::as_str)
                )))
            }
            Some(&k) => {
                let lc = &mut out[k];
                lc.rows.push(i);
                match o.event {
                    None | Some(OrderEvent::Fill) => {
                        if lc.window.contains(o.datetime()) {
                            lc.fills_in_window.push(o.volume);
                        }
                    }
                    Some(OrderEvent::Withdraw | OrderEvent::Expire) => lc.withdrawn = true,
                    Some(OrderEvent::Place) => {
                        return Err(Error::InvalidInput(format!(
                            "order {} is placed twice",
                            o.serial_id
                        )))
                    }
                }
            }
        }
    }
    Ok(out)
}

fn cutpoints_by_security(lcs: &[OrderLifecycle], cfg: &ConversionConfig) -> BTreeMap<String, SizeCutpoints> {
    let mut volumes: BTreeMap<&str, Vec<u64>> = BTreeMap::new();
    for lc in lcs {
        volumes.entry(&lc.security).or_default().push(lc.ordered_volume);
    }
    volumes
        .into_iter()
        .filter_map(|(sec, vols)| {
            let cut = cfg
                .security_cutpoints
                .get(sec)
                .copied()
                .or(cfg.size_cutpoints)
                .or_else(|| tercile_cutpoints(&vols))?;
            Some((sec.to_string(), cut))
        })
        .collect()
}

fn unlabeled() -> TargetLabel {
    TargetLabel::non_target("NA")
}

/// One microstructure sequence per `(account, window)`, sorted by account
/// then window.
pub fn build_microstructure_sequences(
    orders: &[OrderRecord],
    cfg: &ConversionConfig,
) -> Result<(Vec<BehaviorSequence>, ConversionSummary)> {
    cfg.validate()?;
    let lcs = order_lifecycles(orders, cfg)?;
    let cuts = cutpoints_by_security(&lcs, cfg);

    let mut per_account: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, lc) in lcs.iter().enumerate() {
        per_account.entry(&lc.account_id).or_default().push(i);
    }

    let assoc = Duration::seconds(cfg.association_window_secs);
    let mut seqs = Vec::new();
    for (account, ids) in per_account {
        let mut groups: BTreeMap<Window, (Vec<Item>, Vec<Trade>)> = BTreeMap::new();
        for (pos, &i) in ids.iter().enumerate() {
            let lc = &lcs[i];
            let b = discretize_order_size(lc.ordered_volume, cuts[&lc.security])?;
            let (_, l) = trade_probability(&lc.fills_in_window, lc.ordered_volume)
                .map_err(|e| Error::InvalidInput(format!("order {}: {e}", lc.serial_id)))?;
            let filled: u64 = lc.fills_in_window.iter().sum();
            let u = if filled == lc.ordered_volume {
                Status::Done
            } else if lc.withdrawn {
                Status::Withdrawn
            } else {
                Status::Active
            };
            let m = match ids.get(pos + 1).map(|&j| &lcs[j]) {
                Some(next) if next.placed_at - lc.placed_at <= assoc => {
                    if next.side == lc.side {
                        Associate::Same
                    } else {
                        Associate::Opposite
                    }
                }
                _ => Associate::None,
            };
            let entry = groups.entry(lc.window).or_default();
            entry.0.push(Item::Micro(MicrostructureVector::new(b, lc.side, l, u, m)));
            for &r in &lc.rows {
                let o = &orders[r];
                entry.1.push(Trade {
                    time: o.datetime(),
                    security: o.security.clone(),
                    price: o.price,
                    volume: o.volume,
                });
            }
        }
        for (window, (items, mut trades)) in groups {
            trades.sort_by_key(|t| t.time);
            let mut s = BehaviorSequence::new(account, window, unlabeled(), ItemKind::Microstructure, items)?;
            s.trades = trades;
            seqs.push(s);
        }
    }
    let summary = ConversionSummary::tally("orderbook", orders.len(), &seqs);
    Ok((seqs, summary))
}

fn observation_window(cfg: &ConversionConfig, dates: impl Iterator<Item = NaiveDate>) -> Window {
    let dates: Vec<NaiveDate> = dates.collect();
    let start = cfg
        .observation_start
        .or_else(|| dates.iter().min().copied())
        .unwrap_or_else(|| epoch().date());
    let end = cfg
        .observation_end
        .or_else(|| dates.iter().max().map(|d| *d + Duration::days(1)))
        .unwrap_or(start + Duration::days(1));
    Window {
        start: start.and_time(NaiveTime::MIN),
        end: end.and_time(NaiveTime::MIN),
    }
}

/// Activity sequences per `(person, window)`, labeled target iff the person
/// has a debt raised inside the window. Windows holding only debts produce no
/// sequence and are counted as `dropped_empty`.
pub fn build_activity_sequences(
    acts: &[ActivityRecord],
    debts: &[DebtRecord],
    cfg: &ConversionConfig,
) -> Result<(Vec<BehaviorSequence>, ConversionSummary)> {
    cfg.validate()?;
    let (target, non_target) = cfg.labels();
    let observed = observation_window(cfg, acts.iter().map(|a| a.timestamp.date()));
    let split = |t: NaiveDateTime| match cfg.activity_window_days {
        Some(days) => {
            let w = window_of(t, observed.start, days * 86_400);
            Window {
                start: w.start,
                end: w.end.min(observed.end),
            }
        }
        None => observed,
    };

    let mut out_of_window = 0;
    let mut idx: Vec<usize> = (0..acts.len()).collect();
    idx.sort_by_key(|&i| (acts[i].timestamp, i));
    let mut groups: BTreeMap<(&str, Window), Vec<Item>> = BTreeMap::new();
    for i in idx {
        let a = &acts[i];
        if !observed.contains(a.timestamp) {
            out_of_window += 1;
            continue;
        }
        groups
            .entry((&a.person_id, split(a.timestamp)))
            .or_default()
            .push(Item::activity(a.activity_code.clone()));
    }

    let mut debts_by_key: BTreeMap<(&str, Window), DebtInfo> = BTreeMap::new();
    for d in debts {
        let t = d.raised_date.and_time(NaiveTime::MIN);
        if !observed.contains(t) {
            continue;
        }
        let e = debts_by_key.entry((&d.person_id, split(t))).or_insert(DebtInfo {
            amount: 0.0,
            duration_days: 0,
        });
        e.amount += d.amount;
        e.duration_days += d.duration_days;
    }

    let dropped_empty = debts_by_key.keys().filter(|k| !groups.contains_key(*k)).count() as u64;
    let mut seqs = Vec::with_capacity(groups.len());
    for ((person, window), items) in groups {
        let debt = debts_by_key.get(&(person, window)).copied();
        let label = if debt.is_some() { target.clone() } else { non_target.clone() };
        let mut s = BehaviorSequence::new(person, window, label, ItemKind::Activity, items)?;
        s.debt = debt;
        seqs.push(s);
    }
    let mut summary = ConversionSummary::tally("activity", acts.len(), &seqs);
    summary.dropped_empty = dropped_empty;
    summary.out_of_window = out_of_window;
    Ok((seqs, summary))
}

/// One labeled itemset per person; items are `key=value`, sorted.
pub fn build_demographic_vectors(
    demo: &[DemographicRecord],
    debts: &[DebtRecord],
    cfg: &ConversionConfig,
) -> Result<(Vec<BehaviorSequence>, ConversionSummary)> {
    cfg.validate()?;
    let mut seen = BTreeSet::new();
    let dups: BTreeSet<String> = demo
        .iter()
        .filter(|d| !seen.insert(d.person_id.as_str()))
        .map(|d| d.person_id.clone())
        .collect();
    if !dups.is_empty() {
        return Err(Error::DuplicateIds(dups.into_iter().collect()));
    }
    let (target, non_target) = cfg.labels();
    let window = observation_window(cfg, debts.iter().map(|d| d.raised_date));
    let mut debt_by_person: HashMap<&str, DebtInfo> = HashMap::new();
    for d in debts {
        if window.contains(d.raised_date.and_time(NaiveTime::MIN)) {
            let e = debt_by_person.entry(&d.person_id).or_insert(DebtInfo {
                amount: 0.0,
                duration_days: 0,
            });
            e.amount += d.amount;
            e.duration_days += d.duration_days;
        }
    }
    let mut seqs: Vec<BehaviorSequence> = demo
        .iter()
        .map(|d| {
            let mut items: Vec<Item> = d
                .attributes
                .iter()
                .map(|(k, v)| Item::demographic(k, v))
                .collect();
            items.sort();
            let debt = debt_by_person.get(d.person_id.as_str()).copied();
            let label = if debt.is_some() { target.clone() } else { non_target.clone() };
            let mut s = BehaviorSequence::new(d.person_id.clone(), window, label, ItemKind::Demographic, items)?;
            s.debt = debt;
            Ok(s)
        })
        .collect::<Result<_>>()?;
    seqs.sort_by(|a, b| a.subject_id.cmp(&b.subject_id));
    let summary = ConversionSummary::tally("demographic", demo.len(), &seqs);
    Ok((seqs, summary))
}

fn csv_writer<W: Write>(w: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(false).from_writer(w)
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidInput(format!("csv write failed: {e}"))
}

/// Writes orderbook rows with ISO dates. The `event` column is emitted only
/// when some row carries an explicit event.
pub fn write_orderbook<W: Write>(w: W, orders: &[OrderRecord]) -> Result<()> {
    let with_event = orders.iter().any(|o| o.event.is_some());
    let mut wtr = csv_writer(w);
    let mut header: Vec<&str> = ORDERBOOK_HEADER.to_vec();
    if with_event {
        header.push(ORDERBOOK_EVENT_COLUMN);
    }
    wtr.write_record(&header).map_err(csv_err)?;
    for o in orders {
        let mut rec = vec![
            o.serial_id.clone(),
            o.date.format("%Y-%m-%d").to_string(),
            o.time.format("%H:%M:%S").to_string(),
            o.account_id.clone(),
            o.security.clone(),
            o.action.code().to_string(),
            format!("{:.2}", o.price),
            o.volume.to_string(),
        ];
        if with_event {
            rec.push(o.event.map_or("", OrderEvent::as_str).to_string());
        }
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn write_activities<W: Write>(w: W, acts: &[ActivityRecord]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(ACTIVITIES_HEADER).map_err(csv_err)?;
    for a in acts {
        wtr.write_record([
            a.person_id.as_str(),
            &a.timestamp.format("%Y-%m-%dT%H:%M:%S").to_string(),
            &a.activity_code,
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn write_debts<W: Write>(w: W, debts: &[DebtRecord]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(DEBTS_HEADER).map_err(csv_err)?;
    for d in debts {
        wtr.write_record([
            d.person_id.as_str(),
            &d.debt_id,
            &d.raised_date.format("%Y-%m-%d").to_string(),
            &format!("{:.2}", d.amount),
            &d.duration_days.to_string(),
        ])
        .map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}

pub fn write_demographics<W: Write>(w: W, demo: &[DemographicRecord]) -> Result<()> {
    let mut wtr = csv_writer(w);
    wtr.write_record(DEMOGRAPHIC_FIELDS.iter().map(|(c, _)| *c))
        .map_err(csv_err)?;
    for d in demo {
        let mut rec = vec![d.person_id.clone()];
        for (_, key) in &DEMOGRAPHIC_FIELDS[1..] {
            let v = d.attributes.iter().find(|(k, _)| k == key).map(|(_, v)| v.clone());
            rec.push(v.unwrap_or_default());
        }
        wtr.write_record(&rec).map_err(csv_err)?;
    }
    wtr.flush().map_err(|e| Error::InvalidInput(e.to_string()))
}
