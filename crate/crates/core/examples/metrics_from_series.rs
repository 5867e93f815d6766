//! Resilience metrics from a bare reward-gap series: the trapezoid area and
//! the degradation events with their durations. Reads the `delta` column of
//! a `series/reward_NNN.csv` file when given one, otherwise uses a synthetic
//! dip.
//!
//! ```bash
//! cargo run -p grid-robustness --example metrics_from_series -- [reward.csv]
//! ```

use grid_robustness::metrics::{degradation_segments, trapezoid, SegmentParams};

fn synthetic() -> Vec<f64> {
    // Falls from step 100 to -1 at 290, back to 0 by 400.
    (0..600)
        .map(|k: usize| match k {
            101..=290 => -((k - 100) as f64) / 190.0,
            291..=399 => -((400 - k) as f64) / 110.0,
            _ => 0.0,
        })
        .collect()
}

fn from_csv(path: &str) -> anyhow::Result<Vec<f64>> {
    let mut reader = csv::Reader::from_path(path)?;
    let col = reader.headers()?.iter().position(|h| h == "delta").ok_or_else(|| anyhow::anyhow!("no delta column"))?;
    let mut out = Vec::new();
    for row in reader.records() {
        let row = row?;
        if let Ok(v) = row[col].parse() {
            out.push(v);
        }
    }
    Ok(out)
}

fn main() -> anyhow::Result<()> {
    let series = match std::env::args().nth(1) {
        Some(p) => from_csv(&p)?,
        None => synthetic(),
    };
    let start = series.iter().position(|&v| v != 0.0).unwrap_or(series.len());
    let params = SegmentParams::default();
    println!("{} steps, first deviation at {start}", series.len());
    println!("area from there: {:.3}", trapezoid(&series[start.min(series.len())..]));

    let events = degradation_segments(&series, start, &params);
    println!("\n{:>6} {:>6} {:>8} {:>11} {:>11} {:>8}", "start", "trough", "recovery", "degradation", "restorative", "min");
    for e in &events {
        println!(
            "{:>6} {:>6} {:>8} {:>11} {:>11} {:>8.3}",
            e.start,
            e.trough,
            e.recovery,
            e.degradation_time(),
            e.restorative_time(),
            e.min_value
        );
    }
    Ok(())
}
