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

//! Run configuration: a flat TOML file whose keys mirror the conversion,
//! mining and threshold settings. Unset keys take the library defaults;
//! command-line flags override file values.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::combined::{ClassDistance, CombinedConfig};
use crate::error::{Error, Result};
use crate::ingest::{ConversionConfig, SizeCutpoints};
use crate::microstructure::{ExceptionalConfig, SeverityTiers};
use crate::seqmine::MiningConfig;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    // conversion
    pub size_cutpoints: Option<[u64; 2]>,
    pub security_cutpoints: Option<BTreeMap<String, [u64; 2]>>,
    pub association_window_secs: Option<i64>,
    pub window_length_secs: Option<i64>,
    pub bucket_length_secs: Option<i64>,
    pub date_formats: Option<Vec<String>>,
    pub observation_start: Option<NaiveDate>,
    pub observation_end: Option<NaiveDate>,
    pub activity_window_days: Option<i64>,
    pub target_label: Option<String>,
    pub non_target_label: Option<String>,
    // mining
    pub min_support: Option<f64>,
    pub max_pattern_length: Option<usize>,
    pub contiguous: Option<bool>,
    // exceptional
    pub benchmark_days: Option<usize>,
    pub benchmark_weights: Option<Vec<f64>>,
    pub min_ii: Option<f64>,
    pub min_ie: Option<f64>,
    pub severity_medium: Option<f64>,
    pub severity_high: Option<f64>,
    // reversal
    pub cir_min: Option<f64>,
    pub cps_min: Option<f64>,
    // combined
    pub classes: Option<Vec<String>>,
    pub class_order: Option<Vec<String>>,
    pub require_disjoint_a: Option<bool>,
    // run
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident; $($f:ident),* $(,)?) => {
        $( if $src.$f.is_some() { $dst.$f = $src.$f; } )*
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| match e {
            Error::Config(m) => Error::Config(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    /// Values set in `other` replace ours.
    pub fn overlay(mut self, other: RunConfig) -> Self {
        overlay!(self, other;
            size_cutpoints, security_cutpoints, association_window_secs, window_length_secs,
            bucket_length_secs, date_formats, observation_start, observation_end,
            activity_window_days, target_label, non_target_label, min_support,
            max_pattern_length, contiguous, benchmark_days, benchmark_weights, min_ii, min_ie,
            severity_medium, severity_high, cir_min, cps_min, classes, class_order,
            require_disjoint_a, seed, out, workers,
        );
        self
    }

    /// Rejects negative or non-finite thresholds.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("min_support", self.min_support),
            ("min_ii", self.min_ii),
            ("min_ie", self.min_ie),
            ("cir_min", self.cir_min),
            ("severity_medium", self.severity_medium),
            ("severity_high", self.severity_high),
        ] {
            if let Some(v) = v {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(Error::Config(format!("{name} must be a non-negative number, got {v}")));
                }
            }
        }
        if let Some(v) = self.cps_min {
            // Cps lies in [-1, 1]; a negative floor admits negative differences
            if v.is_nan() {
                return Err(Error::Config("cps_min must be a number".into()));
            }
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }

    pub fn conversion(&self) -> Result<ConversionConfig> {
        let d = ConversionConfig::default();
        let cut = |c: [u64; 2]| SizeCutpoints::new(c[0], c[1]);
        let cfg = ConversionConfig {
            size_cutpoints: self.size_cutpoints.map(cut).transpose()?,
            security_cutpoints: self
                .security_cutpoints
                .iter()
                .flatten()
                .map(|(k, c)| Ok((k.clone(), cut(*c)?)))
                .collect::<Result<_>>()?,
            association_window_secs: self.association_window_secs.unwrap_or(d.association_window_secs),
            window_length_secs: self.window_length_secs.unwrap_or(d.window_length_secs),
            bucket_length_secs: self.bucket_length_secs.unwrap_or(d.bucket_length_secs),
            date_formats: self.date_formats.clone().unwrap_or(d.date_formats),
            observation_start: self.observation_start,
            observation_end: self.observation_end,
            activity_window_days: self.activity_window_days,
            target_label: self.target_label.clone().unwrap_or(d.target_label),
            non_target_label: self.non_target_label.clone().unwrap_or(d.non_target_label),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn mining(&self) -> Result<MiningConfig> {
        let d = MiningConfig::default();
        let cfg = MiningConfig {
            min_support: self.min_support.unwrap_or(d.min_support),
            max_pattern_length: self.max_pattern_length.unwrap_or(d.max_pattern_length),
            contiguous: self.contiguous.unwrap_or(d.contiguous),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn exceptional(&self) -> Result<ExceptionalConfig> {
        let d = ExceptionalConfig::default();
        let tiers = SeverityTiers {
            medium: self.severity_medium.unwrap_or(d.tiers.medium),
            high: self.severity_high.unwrap_or(d.tiers.high),
        };
        let cfg = ExceptionalConfig {
            mining: self.mining()?,
            benchmark_days: self.benchmark_days.unwrap_or(d.benchmark_days),
            min_ii: self.min_ii.unwrap_or(d.min_ii),
            min_ie: self.min_ie.unwrap_or(d.min_ie),
            benchmark_weights: self.benchmark_weights.clone(),
            bucket_length_secs: self.bucket_length_secs.unwrap_or(d.bucket_length_secs),
            tiers,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn combined(&self) -> Result<CombinedConfig> {
        Ok(CombinedConfig {
            mining: self.mining()?,
            classes: self.classes.clone(),
            distance: match &self.class_order {
                Some(order) => ClassDistance::Ordinal(order.clone()),
                None => ClassDistance::Nominal,
            },
            require_disjoint_a: self.require_disjoint_a.unwrap_or(false),
        })
    }

    pub fn cir_min(&self) -> f64 {
        self.cir_min.unwrap_or(1.0)
    }

    pub fn cps_min(&self) -> f64 {
        self.cps_min.unwrap_or(0.0)
    }
}
