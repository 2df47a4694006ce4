//! Synthetic tick streams with known return distribution, for tests and demos.

use super::ticks::{SessionSpec, TickRecord};
use crate::distributions::{Model, Params};
use crate::error::{Error, Result};
use chrono::{Datelike, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
pub struct SyntheticTickSpec {
    /// Law of the grid-to-grid returns before scaling.
    pub params: Params,
    /// Multiplier applied to each draw; keeps prices in a realistic range.
    pub return_scale: f64,
    pub start_price: f64,
    pub first_date: NaiveDate,
    pub days: usize,
    pub session: SessionSpec,
    /// Extra ticks strictly inside each interval; they are superseded by the
    /// tick on the next grid instant, so the grid returns are unaffected.
    pub noise_ticks: usize,
}

/// Ticks at every grid instant with prices p_k = p_{k−1}·exp(scale·X_k), X_k
/// i.i.d. from `params`, plus superseded intermediate ticks. Weekends are skipped.
pub fn synthetic_ticks(spec: &SyntheticTickSpec, seed: u64) -> Result<Vec<TickRecord>> {
    spec.session.validate()?;
    if !(spec.start_price > 0.0) || !(spec.return_scale > 0.0) || spec.days == 0 {
        return Err(Error::Input("synthetic ticks need positive price, scale and day count".into()));
    }
    let model = Model::new(&spec.params)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = spec.session.n_instants();
    let step = spec.session.interval_seconds as i64;
    let mut out = Vec::with_capacity(spec.days * m * (1 + spec.noise_ticks));
    let mut date = spec.first_date;
    for _ in 0..spec.days {
        while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
            date = date.succ_opt().expect("date in range");
        }
        let draws = model.sample_with(m - 1, &mut rng);
        let mut price = spec.start_price;
        for k in 0..m {
            if k > 0 {
                price *= (spec.return_scale * draws[k - 1]).exp();
            }
            let t = date.and_time(spec.session.instant(k));
            out.push(TickRecord { timestamp: t, price });
            if k + 1 < m && step > 1 {
                let mut offsets: Vec<i64> = (0..spec.noise_ticks).map(|_| rng.random_range(1..step)).collect();
                offsets.sort_unstable();
                offsets.dedup();
                for o in offsets {
                    let jitter: f64 = rng.random_range(-1.0..1.0);
                    out.push(TickRecord {
                        timestamp: t + chrono::Duration::seconds(o),
                        price: price * (spec.return_scale * jitter).exp(),
                    });
                }
            }
        }
        date = date.succ_opt().expect("date in range");
    }
    Ok(out)
}
