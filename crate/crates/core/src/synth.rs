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

//! Seeded synthetic datasets with known ground truth.
//!
//! * `uniform`: activity logs with labels independent of behavior.
//! * `planted-exception`: an orderbook where one two-order pattern is ten
//!   times more common on the last day than on the benchmark days.
//! * `planted-reversal`: activity logs where appending one activity flips
//!   the dominant outcome.
//! * `debt-cohort`: demographics, arrangements and debts with one cohort of
//!   elevated debt risk.

use std::fs;
use std::path::Path;
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, NaiveDateTime, Weekday};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{
    write_activities, write_debts, write_demographics, write_orderbook, ActivityRecord, DebtRecord,
    DemographicRecord, OrderEvent, OrderRecord,
};
use crate::model::{Associate, FillBin, Item, MicrostructureVector, OrderSize, Pattern, Side, Status};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Profile {
    Uniform,
    PlantedException,
    PlantedReversal,
    DebtCohort,
}

impl Profile {
    pub const ALL: [Profile; 4] = [
        Profile::Uniform,
        Profile::PlantedException,
        Profile::PlantedReversal,
        Profile::DebtCohort,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Profile::Uniform => "uniform",
            Profile::PlantedException => "planted-exception",
            Profile::PlantedReversal => "planted-reversal",
            Profile::DebtCohort => "debt-cohort",
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Profile::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown profile `{s}`")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthParams {
    pub seed: u64,
    /// Trading days, the last one being the target day.
    pub days: usize,
    pub accounts: usize,
    /// Share of accounts carrying the planted pattern on a benchmark day.
    pub bench_rate: f64,
    /// Target-day rate over benchmark-day rate.
    pub rate_ratio: f64,
    /// Persons for the activity profiles; profile default when unset.
    pub persons: Option<usize>,
    /// Share of debt-labeled persons.
    pub prevalence: f64,
}

impl SynthParams {
    pub fn new(seed: u64) -> Self {
        SynthParams {
            seed,
            days: 21,
            accounts: 500,
            bench_rate: 0.02,
            rate_ratio: 10.0,
            persons: None,
            prevalence: 0.1,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.prevalence > 0.0 && self.prevalence < 1.0) {
            return Err(Error::Config(format!("prevalence must be in (0, 1), got {}", self.prevalence)));
        }
        if self.persons == Some(0) || self.accounts == 0 {
            return Err(Error::Config("sizes must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedException {
    pub pattern: Pattern,
    pub target_date: NaiveDate,
    pub benchmark_days: usize,
    pub sequences_per_day: usize,
    pub bench_count: usize,
    pub target_count: usize,
    pub bench_rate: f64,
    pub target_rate: f64,
    #[serde(rename = "I_e_expected")]
    pub ie_expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedReversal {
    pub underlying: Pattern,
    pub trigger: Pattern,
    pub derivative: Pattern,
    pub direction: String,
    pub conf_p: f64,
    pub conf_pq: f64,
    #[serde(rename = "Cir_expected")]
    pub cir_expected: f64,
    #[serde(rename = "Cps_expected")]
    pub cps_expected: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedCohort {
    pub demographics: Vec<Item>,
    pub activities: Vec<Item>,
    pub risk_multiplier: f64,
    pub prevalence: f64,
    pub realized_prevalence: f64,
}

/// Ground truth written next to the generated files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Truth {
    pub profile: Profile,
    pub params: SynthParams,
    pub files: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exception: Option<PlantedException>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reversal: Option<PlantedReversal>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cohort: Option<PlantedCohort>,
}

/// Generated file contents keyed by file name, plus the truth.
#[derive(Debug, Clone)]
pub struct Generated {
    pub files: Vec<(String, Vec<u8>)>,
    pub truth: Truth,
}

impl Generated {
    /// Writes every file and `truth.json` into `dir`, creating it.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, bytes) in &self.files {
            let path = dir.join(name);
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        }
        let path = dir.join("truth.json");
        let mut json = serde_json::to_vec_pretty(&self.truth)?;
        json.push(b'\n');
        fs::write(&path, json).map_err(|e| Error::io(&path, e))
    }
}

pub const ASSOCIATION_WINDOW_SECS: i64 = 900;
const SIZE_VOLUMES: [(OrderSize, u64); 3] = [(OrderSize::S, 100), (OrderSize::M, 500), (OrderSize::L, 1000)];
const ACTIVITY_CODES: [&str; 11] = ["DOC", "EAN", "NDB", "CCO", "REA", "AVC", "DBT", "JSP", "CRV", "ANO", "AAI"];

pub fn generate(profile: Profile, params: &SynthParams) -> Result<Generated> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut truth = Truth {
        profile,
        params: params.clone(),
        files: Vec::new(),
        exception: None,
        reversal: None,
        cohort: None,
    };
    let mut files = Vec::new();
    match profile {
        Profile::PlantedException => {
            let (orders, planted) = planted_exception(params, &mut rng)?;
            let mut buf = Vec::new();
            write_orderbook(&mut buf, &orders)?;
            files.push(("orderbook.csv".to_string(), buf));
            let config = format!(
                "size_cutpoints = [300, 800]\nassociation_window_secs = {ASSOCIATION_WINDOW_SECS}\nbenchmark_days = {}\n",
                planted.benchmark_days
            );
            files.push(("config.toml".to_string(), config.into_bytes()));
            truth.exception = Some(planted);
        }
        Profile::Uniform => {
            let n = params.persons.unwrap_or(1000);
            let mut acts = Vec::new();
            let mut debts = Vec::new();
            for i in 0..n {
                let id = format!("P{i:05}");
                let len = rng.gen_range(3..=8);
                let codes: Vec<&str> = (0..len).map(|_| *ACTIVITY_CODES.choose(&mut rng).unwrap()).collect();
                acts.extend(activity_rows(&id, &codes, &mut rng));
                if rng.gen_bool(params.prevalence) {
                    debts.push(debt_row(&id, &mut rng));
                }
            }
            push_activity_files(&mut files, &acts, &debts)?;
        }
        Profile::PlantedReversal => {
            let (acts, debts, planted) = planted_reversal(params, &mut rng)?;
            push_activity_files(&mut files, &acts, &debts)?;
            truth.reversal = Some(planted);
        }
        Profile::DebtCohort => {
            let (demo, acts, debts, planted) = debt_cohort(params, &mut rng);
            let mut buf = Vec::new();
            write_demographics(&mut buf, &demo)?;
            files.push(("demographics.csv".to_string(), buf));
            push_activity_files(&mut files, &acts, &debts)?;
            truth.cohort = Some(planted);
        }
    }
    truth.files = files.iter().map(|(n, _)| n.clone()).collect();
    Ok(Generated { files, truth })
}

fn push_activity_files(files: &mut Vec<(String, Vec<u8>)>, acts: &[ActivityRecord], debts: &[DebtRecord]) -> Result<()> {
    let mut buf = Vec::new();
    write_activities(&mut buf, acts)?;
    files.push(("activities.csv".to_string(), buf));
    let mut buf = Vec::new();
    write_debts(&mut buf, debts)?;
    files.push(("debts.csv".to_string(), buf));
    let config = format!(
        "observation_start = \"{}\"\nobservation_end = \"{}\"\n",
        observation_start(),
        observation_start() + Duration::days(OBSERVATION_DAYS)
    );
    files.push(("config.toml".to_string(), config.into_bytes()));
    Ok(())
}

/// Length of the generated activity observation period.
const OBSERVATION_DAYS: i64 = 90;

fn observation_start() -> NaiveDate {
    NaiveDate::from_ymd_opt(2006, 1, 1).unwrap()
}

/// Activities on distinct increasing days inside the first quarter of 2006.
fn activity_rows(person: &str, codes: &[&str], rng: &mut ChaCha8Rng) -> Vec<ActivityRecord> {
    let mut days: Vec<usize> = index::sample(rng, OBSERVATION_DAYS as usize, codes.len()).into_vec();
    days.sort_unstable();
    codes
        .iter()
        .zip(days)
        .map(|(code, day)| ActivityRecord {
            person_id: person.to_string(),
            timestamp: (observation_start() + Duration::days(day as i64))
                .and_hms_opt(rng.gen_range(8..17), rng.gen_range(0..60), 0)
                .unwrap(),
            activity_code: code.to_string(),
        })
        .collect()
}

fn debt_row(person: &str, rng: &mut ChaCha8Rng) -> DebtRecord {
    DebtRecord {
        person_id: person.to_string(),
        debt_id: format!("D{person}"),
        raised_date: observation_start() + Duration::days(rng.gen_range(0..OBSERVATION_DAYS)),
        amount: rng.gen_range(5_000..200_000) as f64 / 100.0,
        duration_days: rng.gen_range(1..=365),
    }
}

fn trading_days(n: usize) -> Vec<NaiveDate> {
    let mut out = Vec::with_capacity(n);
    let mut d = NaiveDate::from_ymd_opt(2005, 5, 2).unwrap();
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// One order to emit: what the converter should see for it.
struct PlannedOrder {
    size: OrderSize,
    side: Side,
    status: Status,
    fill_tenths: u64,
}

fn background_order(rng: &mut ChaCha8Rng) -> PlannedOrder {
    // (status, filled tenths): done orders fill completely
    const OUTCOMES: [(Status, u64); 7] = [
        (Status::Done, 10),
        (Status::Active, 0),
        (Status::Active, 5),
        (Status::Active, 8),
        (Status::Withdrawn, 0),
        (Status::Withdrawn, 5),
        (Status::Withdrawn, 8),
    ];
    let (status, fill_tenths) = OUTCOMES[rng.gen_range(0..OUTCOMES.len())];
    PlannedOrder {
        size: if rng.gen_bool(0.5) { OrderSize::M } else { OrderSize::L },
        side: if rng.gen_bool(0.5) { Side::B } else { Side::S },
        status,
        fill_tenths,
    }
}

pub fn planted_vector() -> MicrostructureVector {
    MicrostructureVector::new(OrderSize::S, Side::S, FillBin::M, Status::Active, Associate::None)
}

fn planted_exception(p: &SynthParams, rng: &mut ChaCha8Rng) -> Result<(Vec<OrderRecord>, PlantedException)> {
    if p.days < 2 {
        return Err(Error::Config("planted-exception needs at least 2 days".into()));
    }
    let bench_count = (p.accounts as f64 * p.bench_rate).round() as usize;
    let target_count = (p.accounts as f64 * p.bench_rate * p.rate_ratio).round() as usize;
    if bench_count == 0 || target_count > p.accounts {
        return Err(Error::Config(format!(
            "rates give {bench_count} benchmark and {target_count} target sequences out of {}",
            p.accounts
        )));
    }
    let days = trading_days(p.days);
    // fixed per-account lengths keep the average sequence length equal
    // across days
    let lens: Vec<usize> = (0..p.accounts).map(|_| rng.gen_range(3..=6)).collect();
    let mut price = 10.0f64;
    let mut rows = Vec::new();
    for (d, &date) in days.iter().enumerate() {
        let open = date.and_hms_opt(9, 30, 0).unwrap();
        let minutes: Vec<f64> = (0..390)
            .map(|_| {
                price *= rng.gen_range(-0.002f64..0.002).exp();
                price
            })
            .collect();
        let price_at = |t: NaiveDateTime| {
            let m = ((t - open).num_minutes().max(0) as usize).min(minutes.len() - 1);
            (minutes[m] * 100.0).round() / 100.0
        };
        let count = if d + 1 == days.len() { target_count } else { bench_count };
        let mut planted = vec![false; p.accounts];
        for a in index::sample(rng, p.accounts, count) {
            planted[a] = true;
        }
        for (a, &len) in lens.iter().enumerate() {
            let mut plan: Vec<PlannedOrder> = (0..len).map(|_| background_order(rng)).collect();
            let mut long_gap: Vec<bool> = (0..len).map(|_| rng.gen_bool(1.0 / 3.0)).collect();
            if planted[a] {
                let k = rng.gen_range(0..len - 1);
                for j in [k, k + 1] {
                    plan[j] = PlannedOrder {
                        size: OrderSize::S,
                        side: Side::S,
                        status: Status::Active,
                        fill_tenths: 5,
                    };
                    long_gap[j] = true;
                }
            }
            let mut t = open + Duration::seconds(rng.gen_range(0..3600));
            for (i, order) in plan.iter().enumerate() {
                let volume = SIZE_VOLUMES.iter().find(|(s, _)| *s == order.size).unwrap().1;
                let filled = volume * order.fill_tenths / 10;
                let row = |time: NaiveDateTime, volume: u64, event: OrderEvent| OrderRecord {
                    serial_id: format!("O{d:02}{a:04}{i}"),
                    date: time.date(),
                    time: time.time(),
                    account_id: format!("A{a:04}"),
                    security: "S1".into(),
                    action: order.side,
                    price: price_at(time),
                    volume,
                    event: Some(event),
                };
                rows.push(row(t, volume, OrderEvent::Place));
                if filled > 0 {
                    let ft = t + Duration::seconds(20);
                    rows.push(row(ft, filled, OrderEvent::Fill));
                }
                if order.status == Status::Withdrawn {
                    rows.push(row(t + Duration::seconds(40), volume - filled, OrderEvent::Withdraw));
                }
                t += Duration::seconds(if long_gap[i] {
                    rng.gen_range(ASSOCIATION_WINDOW_SECS + 100..=1800)
                } else {
                    rng.gen_range(30..=600)
                });
            }
        }
    }
    rows.sort_by(|x, y| (x.date, x.time, &x.serial_id).cmp(&(y.date, y.time, &y.serial_id)));
    let v = planted_vector();
    let n = p.accounts as f64;
    let planted = PlantedException {
        pattern: Pattern::micro(&[v, v])?,
        target_date: *days.last().unwrap(),
        benchmark_days: p.days - 1,
        sequences_per_day: p.accounts,
        bench_count,
        target_count,
        bench_rate: bench_count as f64 / n,
        target_rate: target_count as f64 / n,
        ie_expected: target_count as f64 / bench_count as f64,
    };
    Ok((rows, planted))
}

fn planted_reversal(
    p: &SynthParams,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<ActivityRecord>, Vec<DebtRecord>, PlantedReversal)> {
    let n = p.persons.unwrap_or(1000);
    let n_pq = (n as f64 * 0.2).round() as usize;
    let n_p = (n as f64 * 0.3).round() as usize;
    let n_bg = n - n_pq - n_p;
    let debt_pq = (n_pq as f64 * 0.2).round() as usize;
    let debt_p = (n_p as f64 * 0.8).round() as usize;
    let debt_bg = (n_bg as f64 * 0.3).round() as usize;
    if n_pq == 0 || n_p == 0 {
        return Err(Error::Config("planted-reversal needs at least 10 persons".into()));
    }
    let mut groups: Vec<(u8, bool)> = Vec::with_capacity(n);
    for (group, size, debtors) in [(0u8, n_pq, debt_pq), (1, n_p, debt_p), (2, n_bg, debt_bg)] {
        groups.extend((0..size).map(|i| (group, i < debtors)));
    }
    groups.shuffle(rng);
    let mut acts = Vec::new();
    let mut debts = Vec::new();
    for (i, &(group, debtor)) in groups.iter().enumerate() {
        let id = format!("P{i:05}");
        let len = rng.gen_range(2..=6);
        let mut codes: Vec<&str> = (0..len).map(|_| *ACTIVITY_CODES.choose(rng).unwrap()).collect();
        match group {
            0 => {
                let at = rng.gen_range(0..=codes.len());
                codes.insert(at, "STM");
                let after = rng.gen_range(at + 1..=codes.len());
                codes.insert(after, "UPD");
            }
            1 => {
                let at = rng.gen_range(0..=codes.len());
                codes.insert(at, "STM");
            }
            _ => {}
        }
        acts.extend(activity_rows(&id, &codes, rng));
        if debtor {
            debts.push(debt_row(&id, rng));
        }
    }
    let total = n as f64;
    let p_all = (n_pq + n_p) as f64;
    let p_flip = ((n_pq - debt_pq) + (n_p - debt_p)) as f64;
    let pq_flip = (n_pq - debt_pq) as f64;
    let conf_p = p_flip / p_all;
    let conf_pq = pq_flip / n_pq as f64;
    let planted = PlantedReversal {
        underlying: Pattern::activities(&["STM"])?,
        trigger: Pattern::activities(&["UPD"])?,
        derivative: Pattern::activities(&["STM", "UPD"])?,
        direction: "DET->NDT".into(),
        conf_p,
        conf_pq,
        cir_expected: conf_pq / conf_p,
        cps_expected: (pq_flip / total) / (p_all / total)
            - (n_pq as f64 / total) / (p_all / total) * ((p_flip / total) / (p_all / total)),
    };
    Ok((acts, debts, planted))
}

fn debt_cohort(
    p: &SynthParams,
    rng: &mut ChaCha8Rng,
) -> (Vec<DemographicRecord>, Vec<ActivityRecord>, Vec<DebtRecord>, PlantedCohort) {
    const ATTRS: [(&str, &[&str]); 6] = [
        ("gender", &["female", "male"]),
        ("age", &["18-21", "22-25", "26-40", "41-64", "65+"]),
        ("region-office", &["metro", "regional", "remote"]),
        ("marital-status", &["single", "married", "separated"]),
        ("rent-type", &["private", "public", "own"]),
        ("method-of-payment", &["cash", "bank"]),
    ];
    const ARRANGEMENTS: [&str; 5] = ["ARR:WITHHOLD", "ARR:IRREGULAR", "REP:CASH-OR-POST", "REP:WITHHOLD", "REP:CASH"];
    const MULTIPLIER: f64 = 3.0;
    const WITHHOLD_RATE: f64 = 0.4;
    // P(age=65+ and withhold) = 1/5 · 0.4; scale so the marginal rate is the
    // configured prevalence
    let cohort_share = WITHHOLD_RATE / 5.0;
    let base = p.prevalence / (1.0 + (MULTIPLIER - 1.0) * cohort_share);
    let n = p.persons.unwrap_or(10_000);
    let mut demo = Vec::with_capacity(n);
    let mut acts = Vec::new();
    let mut debts = Vec::new();
    for i in 0..n {
        let id = format!("C{i:05}");
        let attributes: Vec<(String, String)> = ATTRS
            .iter()
            .map(|(k, vals)| (k.to_string(), vals.choose(rng).unwrap().to_string()))
            .collect();
        let senior = attributes.iter().any(|(k, v)| k == "age" && v == "65+");
        let withhold = rng.gen_bool(WITHHOLD_RATE);
        let mut codes: Vec<&str> = Vec::new();
        if withhold {
            codes.push("ARR:WITHHOLD");
        }
        let extra = rng.gen_range(1..=3);
        codes.extend((0..extra).map(|_| *ARRANGEMENTS[1..].choose(rng).unwrap()));
        codes.shuffle(rng);
        acts.extend(activity_rows(&id, &codes, rng));
        let prob = if senior && withhold { base * MULTIPLIER } else { base };
        if rng.gen_bool(prob) {
            debts.push(debt_row(&id, rng));
        }
        demo.push(DemographicRecord { person_id: id, attributes });
    }
    let planted = PlantedCohort {
        demographics: vec![Item::demographic("age", "65+")],
        activities: vec![Item::activity("ARR:WITHHOLD")],
        risk_multiplier: MULTIPLIER,
        prevalence: p.prevalence,
        realized_prevalence: debts.len() as f64 / n as f64,
    };
    (demo, acts, debts, planted)
}
