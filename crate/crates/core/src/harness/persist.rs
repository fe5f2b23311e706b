//! CSV and JSON output of sweep results, and reloading them.
//!
//! Floats are written in Rust's shortest round-trip form, so a reload
//! reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use super::summary::{summarize, Summary};
use super::{EccentricityRecord, ParamCell, RunCell, RunFailure, RunResult};
use crate::error::{Error, Result};
use crate::metrics::MetricsRecord;

pub const ROUNDS_HEADER: [&str; 10] =
    ["run_id", "strategy", "h", "a", "weight_init", "seed", "round", "modularity", "n_communities", "community_std"];

pub const ECCENTRICITY_HEADER: [&str; 9] =
    ["run_id", "strategy", "h", "a", "weight_init", "round", "opinion_id", "author", "eccentricity"];

pub const ROUNDS_FILE: &str = "rounds.csv";
pub const ECCENTRICITY_FILE: &str = "eccentricity.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const FAILURES_FILE: &str = "failures.json";

fn csv_err(path: &Path) -> impl Fn(csv::Error) -> Error + '_ {
    move |source| Error::Csv { path: path.to_path_buf(), source }
}

/// Writes to a sibling temp file and renames it over `path`.
fn write_atomic(path: &Path, write: impl FnOnce(&mut fs::File) -> Result<()>) -> Result<()> {
    let tmp = path.with_extension("tmp");
    let mut file = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    write(&mut file)?;
    file.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn sorted(results: &[RunResult]) -> Vec<&RunResult> {
    let mut v: Vec<&RunResult> = results.iter().collect();
    v.sort_by_key(|r| r.run_id);
    v
}

fn cell_fields(cell: &RunCell) -> [String; 4] {
    [cell.strategy.to_string(), cell.params.h.to_string(), cell.params.a.to_string(), cell.params.weight_init.to_string()]
}

pub fn write_rounds_csv(results: &[RunResult], path: &Path) -> Result<()> {
    write_atomic(path, |file| {
        let mut w = csv::Writer::from_writer(file);
        w.write_record(ROUNDS_HEADER).map_err(csv_err(path))?;
        for r in sorted(results) {
            let [s, h, a, wi] = cell_fields(&r.cell);
            for m in &r.rounds {
                w.write_record([
                    r.run_id.to_string(),
                    s.clone(),
                    h.clone(),
                    a.clone(),
                    wi.clone(),
                    r.seed.to_string(),
                    m.round.to_string(),
                    m.modularity.to_string(),
                    m.community_count.to_string(),
                    m.community_std.to_string(),
                ])
                .map_err(csv_err(path))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    })
}

pub fn write_eccentricity_csv(results: &[RunResult], path: &Path) -> Result<()> {
    write_atomic(path, |file| {
        let mut w = csv::Writer::from_writer(file);
        w.write_record(ECCENTRICITY_HEADER).map_err(csv_err(path))?;
        for r in sorted(results) {
            let [s, h, a, wi] = cell_fields(&r.cell);
            for e in r.eccentricities.iter().flatten() {
                w.write_record([
                    r.run_id.to_string(),
                    s.clone(),
                    h.clone(),
                    a.clone(),
                    wi.clone(),
                    e.round.to_string(),
                    e.opinion_id.to_string(),
                    e.author.to_string(),
                    e.eccentricity.to_string(),
                ])
                .map_err(csv_err(path))?;
            }
        }
        w.flush().map_err(|e| Error::io(path, e))
    })
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> Result<()> {
    write_atomic(path, |file| {
        serde_json::to_writer_pretty(&mut *file, value)
            .map_err(|source| Error::Json { path: path.to_path_buf(), source })?;
        file.write_all(b"\n").map_err(|e| Error::io(path, e))
    })
}

pub fn write_summary(summary: &Summary, path: &Path) -> Result<()> {
    write_json(summary, path)
}

/// Writes rounds, eccentricities (when recorded), failures and the summary
/// into `dir`, replacing earlier output. Returns the summary.
pub fn persist(results: &[RunResult], failures: &[RunFailure], dir: &Path) -> Result<Summary> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_rounds_csv(results, &dir.join(ROUNDS_FILE))?;
    let ecc_path = dir.join(ECCENTRICITY_FILE);
    if results.iter().any(|r| r.eccentricities.is_some()) {
        write_eccentricity_csv(results, &ecc_path)?;
    } else if ecc_path.exists() {
        fs::remove_file(&ecc_path).map_err(|e| Error::io(&ecc_path, e))?;
    }
    let mut failures = failures.to_vec();
    failures.sort_by_key(|f| f.run_id);
    write_json(&failures, &dir.join(FAILURES_FILE))?;
    let summary = summarize(results);
    write_summary(&summary, &dir.join(SUMMARY_FILE))?;
    Ok(summary)
}

struct Rows {
    path: PathBuf,
    reader: csv::Reader<fs::File>,
}

impl Rows {
    fn open(path: PathBuf, header: &[&str]) -> Result<Self> {
        let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
        let mut reader = csv::Reader::from_reader(file);
        let found = reader.headers().map_err(csv_err(&path))?.clone();
        if found.iter().ne(header.iter().copied()) {
            return Err(Error::Malformed {
                path,
                line: 1,
                reason: format!("expected header `{}`, found `{}`", header.join(","), found.iter().collect::<Vec<_>>().join(",")),
            });
        }
        Ok(Self { path, reader })
    }

    fn for_each(mut self, mut f: impl FnMut(&Field<'_>) -> Result<()>) -> Result<()> {
        for record in self.reader.records() {
            let record = record.map_err(csv_err(&self.path))?;
            let line = record.position().map_or(0, |p| p.line());
            f(&Field { path: &self.path, line, record: &record })?;
        }
        Ok(())
    }
}

struct Field<'a> {
    path: &'a Path,
    line: u64,
    record: &'a csv::StringRecord,
}

impl Field<'_> {
    fn malformed(&self, reason: String) -> Error {
        Error::Malformed { path: self.path.to_path_buf(), line: self.line, reason }
    }

    fn get<T: std::str::FromStr>(&self, idx: usize, name: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let raw = self.record.get(idx).ok_or_else(|| self.malformed(format!("missing column `{name}`")))?;
        raw.parse().map_err(|e| self.malformed(format!("bad `{name}` value `{raw}`: {e}")))
    }

    fn cell(&self) -> Result<RunCell> {
        Ok(RunCell {
            strategy: self.get(1, "strategy")?,
            params: ParamCell::new(self.get(2, "h")?, self.get(3, "a")?, self.get(4, "weight_init")?),
        })
    }
}

/// Rebuilds results from `rounds.csv` (and `eccentricity.csv` if present).
pub fn read_results(dir: &Path) -> Result<Vec<RunResult>> {
    let mut runs: BTreeMap<usize, (RunCell, u64, Vec<MetricsRecord>)> = BTreeMap::new();
    Rows::open(dir.join(ROUNDS_FILE), &ROUNDS_HEADER)?.for_each(|f| {
        let run_id: usize = f.get(0, "run_id")?;
        let cell = f.cell()?;
        let seed: u64 = f.get(5, "seed")?;
        let record = MetricsRecord {
            round: f.get(6, "round")?,
            modularity: f.get(7, "modularity")?,
            community_count: f.get(8, "n_communities")?,
            community_std: f.get(9, "community_std")?,
        };
        let entry = runs.entry(run_id).or_insert_with(|| (cell, seed, Vec::new()));
        if entry.0 != cell || entry.1 != seed {
            return Err(f.malformed(format!("run {run_id} changes cell or seed")));
        }
        entry.2.push(record);
        Ok(())
    })?;

    let mut ecc: BTreeMap<usize, Vec<EccentricityRecord>> = BTreeMap::new();
    let ecc_path = dir.join(ECCENTRICITY_FILE);
    let has_ecc = ecc_path.exists();
    if has_ecc {
        Rows::open(ecc_path, &ECCENTRICITY_HEADER)?.for_each(|f| {
            let run_id: usize = f.get(0, "run_id")?;
            match runs.get(&run_id) {
                Some((cell, _, _)) if *cell == f.cell()? => {}
                Some(_) => return Err(f.malformed(format!("run {run_id} cell differs from rounds file"))),
                None => return Err(f.malformed(format!("run {run_id} not present in rounds file"))),
            }
            ecc.entry(run_id).or_default().push(EccentricityRecord {
                round: f.get(5, "round")?,
                opinion_id: f.get(6, "opinion_id")?,
                author: f.get(7, "author")?,
                eccentricity: f.get(8, "eccentricity")?,
            });
            Ok(())
        })?;
    }

    Ok(runs
        .into_iter()
        .map(|(run_id, (cell, seed, rounds))| {
            let e = has_ecc.then(|| ecc.remove(&run_id).unwrap_or_default());
            RunResult::from_rounds(run_id, cell, seed, rounds, e)
        })
        .collect())
}
