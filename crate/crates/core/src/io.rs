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

//! JSON-lines reading and writing for behavior files and reports.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{BehaviorSequence, ItemKind};

/// Writes one compact JSON document per line.
pub fn write_jsonl<W: Write, T: Serialize>(w: W, records: &[T]) -> Result<()> {
    let mut w = BufWriter::new(w);
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n").map_err(|e| Error::io("<output>", e))?;
    }
    w.flush().map_err(|e| Error::io("<output>", e))
}

pub fn write_jsonl_file<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let f = File::create(path).map_err(|e| Error::io(path, e))?;
    write_jsonl(f, records)
}

/// Reads JSON-lines records, skipping blank lines. Malformed lines are
/// schema errors naming the line.
pub fn read_jsonl<R: Read, T: DeserializeOwned>(r: R, name: &str) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for (i, line) in BufReader::new(r).lines().enumerate() {
        let line = line.map_err(|e| Error::io(name, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = serde_json::from_str(&line).map_err(|e| Error::Schema(format!("{name}: line {}: {e}", i + 1)))?;
        out.push(rec);
    }
    Ok(out)
}

/// Reads a behavior file, checking that every sequence has `kind` when
/// given.
pub fn read_sequences(path: &Path, kind: Option<ItemKind>) -> Result<Vec<BehaviorSequence>> {
    let f = File::open(path).map_err(|e| Error::io(path, e))?;
    let name = path.display().to_string();
    let seqs: Vec<BehaviorSequence> = read_jsonl(f, &name)?;
    if let Some(kind) = kind {
        if let Some((i, s)) = seqs.iter().enumerate().find(|(_, s)| s.kind != kind) {
            return Err(Error::Schema(format!(
                "{name}: record {}: expected {} sequences, found {}",
                i + 1,
                kind.name(),
                s.kind.name()
            )));
        }
    }
    Ok(seqs)
}
