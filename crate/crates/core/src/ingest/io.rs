//! ReturnSeries files: `day_index,slot_index,value` CSV plus a JSON sidecar.

use super::ticks::SessionSpec;
use super::{ReturnSeries, Standardization};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesSidecar {
    pub scale_seconds: u32,
    pub session: Option<SessionSpec>,
    pub slots_per_day: usize,
    pub standardization: Standardization,
    pub deseasonalized: bool,
    pub n: usize,
    pub days: usize,
}

/// `returns.csv` → `returns.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("json")
}

pub fn write_series(series: &ReturnSeries, csv: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(csv)?);
    writeln!(w, "day_index,slot_index,value")?;
    for d in 0..series.n_days() {
        let s0 = series.day_slots()[d];
        for (k, v) in series.day(d).iter().enumerate() {
            writeln!(w, "{d},{},{v}", s0 + k)?;
        }
    }
    w.flush()?;
    let meta = SeriesSidecar {
        scale_seconds: series.scale_seconds(),
        session: series.session().cloned(),
        slots_per_day: series.slots_per_day(),
        standardization: series.standardization(),
        deseasonalized: series.is_deseasonalized(),
        n: series.len(),
        days: series.n_days(),
    };
    let mut f = File::create(sidecar_path(csv))?;
    serde_json::to_writer_pretty(&mut f, &meta)?;
    writeln!(f)?;
    Ok(())
}

/// Reads a series written by [`write_series`]. Without a sidecar the series is
/// taken as unstandardized 15 s returns with the slot count inferred from the data.
pub fn read_series(csv: &Path) -> Result<ReturnSeries> {
    let reader = BufReader::new(File::open(csv)?);
    let mut days: Vec<(usize, usize, Vec<f64>)> = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim();
        if line.is_empty() || (lineno == 1 && line.starts_with("day_index")) {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno, message };
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 3 {
            return Err(err("expected `day_index,slot_index,value`".into()));
        }
        let day: usize = f[0].parse().map_err(|_| err(format!("bad day index `{}`", f[0])))?;
        let slot: usize = f[1].parse().map_err(|_| err(format!("bad slot index `{}`", f[1])))?;
        let v: f64 = f[2].parse().map_err(|_| err(format!("bad value `{}`", f[2])))?;
        match days.last_mut() {
            Some((d, s0, vals)) if *d == day => {
                if slot != *s0 + vals.len() {
                    return Err(err(format!("day {day}: slot {slot} does not follow slot {}", *s0 + vals.len() - 1)));
                }
                vals.push(v);
            }
            last => {
                if last.is_some_and(|(d, _, _)| *d >= day) {
                    return Err(err(format!("day index {day} out of order")));
                }
                days.push((day, slot, vec![v]));
            }
        }
    }
    let meta_path = sidecar_path(csv);
    let meta: Option<SeriesSidecar> = if meta_path.exists() {
        Some(serde_json::from_reader(BufReader::new(File::open(&meta_path)?))?)
    } else {
        log::warn!("no sidecar at {}, assuming raw 15 s returns", meta_path.display());
        None
    };
    let inferred = days.iter().map(|(_, s0, v)| s0 + v.len()).max().unwrap_or(1);
    let (slots, scale) = meta.as_ref().map_or((inferred, 15), |m| (m.slots_per_day, m.scale_seconds));
    let mut series = ReturnSeries::from_days(days.into_iter().map(|(_, s0, v)| (s0, v)).collect(), slots, scale)?;
    if let Some(m) = meta {
        if m.n != series.len() || m.days != series.n_days() {
            return Err(Error::Input(format!(
                "sidecar describes {} values in {} days but the CSV holds {} in {}",
                m.n,
                m.days,
                series.len(),
                series.n_days()
            )));
        }
        series.set_metadata(m.standardization, m.deseasonalized);
        if let Some(s) = m.session {
            series = series.with_session(s);
        }
    }
    Ok(series)
}
