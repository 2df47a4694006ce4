//! Tick parsing, fixed-interval resampling and within-day log-returns.

use super::ReturnSeries;
use crate::error::{Error, Result};
use chrono::{NaiveDate, NaiveDateTime, NaiveTime, Timelike};
use serde::{Deserialize, Serialize};
use std::io::BufRead;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickRecord {
    pub timestamp: NaiveDateTime,
    pub price: f64,
}

/// Parsed ticks plus what had to be repaired on the way.
#[derive(Debug, Clone, Default)]
pub struct TickParse {
    pub records: Vec<TickRecord>,
    /// Rows whose timestamp precedes the row above them.
    pub out_of_order: usize,
    /// Records dropped because a later row had the same timestamp.
    pub duplicates: usize,
}

fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    ["%Y-%m-%dT%H:%M:%S", "%Y-%m-%d %H:%M:%S", "%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"]
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|t| t.with_nanosecond(0).expect("zero nanoseconds"))
}

/// Reads `timestamp,price` rows. A first line whose timestamp field starts
/// with a letter is taken as a header; blank lines are skipped.
pub fn parse_ticks<R: BufRead>(input: R) -> Result<TickParse> {
    let mut records: Vec<TickRecord> = Vec::new();
    let mut out_of_order = 0;
    for (i, line) in input.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.trim_start_matches('\u{feff}').trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse { line: lineno, message };
        let mut fields = line.split(',');
        let ts = fields.next().unwrap_or("").trim();
        if records.is_empty() && lineno == 1 && ts.chars().next().is_some_and(|c| c.is_alphabetic()) {
            continue;
        }
        let price = fields.next().ok_or_else(|| err("expected `timestamp,price`".into()))?.trim();
        if fields.next().is_some() {
            return Err(err("expected exactly two fields".into()));
        }
        let timestamp = parse_timestamp(ts).ok_or_else(|| err(format!("bad timestamp `{ts}`")))?;
        let price: f64 = price.parse().map_err(|_| err(format!("bad price `{price}`")))?;
        if !(price > 0.0) || !price.is_finite() {
            return Err(err(format!("price must be positive and finite, got {price}")));
        }
        if records.last().is_some_and(|r| r.timestamp > timestamp) {
            out_of_order += 1;
        }
        records.push(TickRecord { timestamp, price });
    }
    if out_of_order > 0 {
        log::warn!("{out_of_order} tick rows were out of order and have been re-sorted");
    }
    // stable sort keeps file order among equal timestamps, so the last one wins
    records.sort_by_key(|r| r.timestamp);
    let before = records.len();
    let mut kept: Vec<TickRecord> = Vec::with_capacity(before);
    for r in records {
        match kept.last_mut() {
            Some(last) if last.timestamp == r.timestamp => *last = r,
            _ => kept.push(r),
        }
    }
    let duplicates = before - kept.len();
    Ok(TickParse { records: kept, out_of_order, duplicates })
}

/// Trading session and sampling interval.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionSpec {
    pub open_time: NaiveTime,
    pub close_time: NaiveTime,
    pub interval_seconds: u32,
}

impl Default for SessionSpec {
    fn default() -> Self {
        Self {
            open_time: NaiveTime::from_hms_opt(9, 0, 0).expect("valid"),
            close_time: NaiveTime::from_hms_opt(17, 29, 0).expect("valid"),
            interval_seconds: 15,
        }
    }
}

impl SessionSpec {
    pub fn new(open_time: NaiveTime, close_time: NaiveTime, interval_seconds: u32) -> Result<Self> {
        let s = Self { open_time, close_time, interval_seconds };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.open_time >= self.close_time {
            return Err(Error::Input(format!("session opens at {} but closes at {}", self.open_time, self.close_time)));
        }
        if self.interval_seconds == 0 {
            return Err(Error::Input("sampling interval must be positive".into()));
        }
        Ok(())
    }

    /// Grid instants open, open+Δ, …, up to and including close. A final
    /// partial interval is dropped.
    pub fn n_instants(&self) -> usize {
        let len = (self.close_time - self.open_time).num_seconds() as usize;
        len / self.interval_seconds as usize + 1
    }

    /// Within-day returns on a full day.
    pub fn slots_per_day(&self) -> usize {
        self.n_instants() - 1
    }

    pub fn instant(&self, k: usize) -> NaiveTime {
        self.open_time + chrono::Duration::seconds(k as i64 * self.interval_seconds as i64)
    }
}

/// Prices of one day on the session grid, starting at instant `first_slot`.
#[derive(Debug, Clone, PartialEq)]
pub struct DayGrid {
    pub date: NaiveDate,
    pub first_slot: usize,
    pub prices: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct Resampled {
    pub session: SessionSpec,
    pub days: Vec<DayGrid>,
    /// Days with ticks but none at or before the close.
    pub dropped_days: Vec<NaiveDate>,
}

/// Previous-tick sampling on the session grid. Each instant takes the last
/// tick at or before it on the same date; instants before the first such tick
/// are trimmed from the front of the day.
pub fn resample(ticks: &[TickRecord], session: &SessionSpec) -> Result<Resampled> {
    session.validate()?;
    if ticks.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
        return Err(Error::Input("ticks must be sorted by timestamp".into()));
    }
    let m = session.n_instants();
    let mut days = Vec::new();
    let mut dropped_days = Vec::new();
    let mut i = 0;
    while i < ticks.len() {
        let date = ticks[i].timestamp.date();
        let end = i + ticks[i..].iter().take_while(|t| t.timestamp.date() == date).count();
        let day = &ticks[i..end];
        let mut prices = Vec::with_capacity(m);
        let mut first_slot = None;
        let mut j = 0;
        let mut last: Option<f64> = None;
        for k in 0..m {
            let t = session.instant(k);
            while j < day.len() && day[j].timestamp.time() <= t {
                last = Some(day[j].price);
                j += 1;
            }
            if let Some(p) = last {
                first_slot.get_or_insert(k);
                prices.push(p);
            }
        }
        match first_slot {
            Some(first_slot) => days.push(DayGrid { date, first_slot, prices }),
            None => {
                log::warn!("{date}: no ticks inside the session, day dropped");
                dropped_days.push(date);
            }
        }
        i = end;
    }
    Ok(Resampled { session: session.clone(), days, dropped_days })
}

/// ln(p_{k+1}/p_k) within each day. Days with a single grid price contribute nothing.
pub fn log_returns(grids: &Resampled) -> Result<ReturnSeries> {
    let mut out = Vec::with_capacity(grids.days.len());
    for day in &grids.days {
        if let Some(p) = day.prices.iter().find(|p| !(**p > 0.0)) {
            return Err(Error::Input(format!("{}: nonpositive price {p}", day.date)));
        }
        if day.prices.len() < 2 {
            log::warn!("{}: fewer than two grid prices, no returns", day.date);
            continue;
        }
        let r = day.prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect();
        out.push((day.first_slot, r));
    }
    let series = ReturnSeries::from_days(out, grids.session.slots_per_day(), grids.session.interval_seconds)?;
    Ok(series.with_session(grids.session.clone()))
}
