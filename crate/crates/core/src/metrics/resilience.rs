//! Resilience metrics: how deep performance falls after perturbations start,
//! and how long the fall and the recovery take.

use serde::{Deserialize, Serialize};

use super::trace::EpisodeTrace;

/// Trapezoidal integral of `ΔR` from the first perturbation to the end of
/// the aligned window. Zero when fewer than two steps remain.
pub fn reward_gap_area(trace: &EpisodeTrace) -> f64 {
    match trace.first_perturbation {
        Some(h) => trapezoid(&trace.reward_delta_series()[h.min(trace.aligned_len())..]),
        None => 0.0,
    }
}

/// Unit-spaced trapezoid rule.
pub fn trapezoid(y: &[f64]) -> f64 {
    match y {
        [] | [_] => 0.0,
        [first, inner @ .., last] => (first + last) / 2.0 + inner.iter().sum::<f64>(),
    }
}

/// Cosine of the angle between two vectors; `None` if either is all zeros.
pub fn cosine_similarity(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "cosine similarity needs equal lengths");
    if a == b && a.iter().any(|&x| x != 0.0) {
        return Some(1.0);
    }
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    (na > 0.0 && nb > 0.0).then(|| (dot / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine similarity between the perturbed run's true state and the paired
/// unperturbed state, per aligned step. Steps where it is undefined read 0.
pub fn state_similarity_series(trace: &EpisodeTrace) -> Vec<f64> {
    trace
        .perturbed
        .states
        .iter()
        .zip(&trace.unperturbed.states)
        .map(|(p, u)| cosine_similarity(p, u).unwrap_or(0.0))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SegmentParams {
    /// Width of the centred moving average, in steps.
    pub window: usize,
    /// Value of the tracked series when nothing is wrong.
    pub baseline: f64,
    /// An event opens while the smoothed series is below `baseline - threshold`.
    pub threshold: f64,
}

impl Default for SegmentParams {
    fn default() -> Self {
        SegmentParams { window: 50, baseline: 0.0, threshold: 0.05 }
    }
}

/// One degradation followed by recovery. Steps index the full episode.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DegradationEvent {
    pub start: usize,
    pub trough: usize,
    pub recovery: usize,
    pub min_value: f64,
    pub max_value: f64,
}

impl DegradationEvent {
    pub fn degradation_time(&self) -> usize {
        self.trough - self.start
    }

    pub fn restorative_time(&self) -> usize {
        self.recovery - self.trough
    }
}

/// Centred moving average; the window shrinks at the edges.
pub fn moving_average(x: &[f64], window: usize) -> Vec<f64> {
    let w = window.max(1);
    let n = x.len();
    (0..n)
        .map(|j| {
            let lo = j.saturating_sub(w / 2);
            let hi = (lo + w).min(n);
            x[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

fn first_argmin(x: &[f64]) -> usize {
    (0..x.len()).fold(0, |best, i| if x[i] < x[best] { i } else { best })
}

fn first_argmax(x: &[f64]) -> usize {
    (0..x.len()).fold(0, |best, i| if x[i] > x[best] { i } else { best })
}

/// Splits `series[start..]` into degradation events.
///
/// The series is smoothed; every maximal run where the smoothed value stays
/// below `baseline - threshold` is one event. The event starts at the last
/// step before the run, its trough is the lowest raw value inside the run,
/// and recovery is the highest raw value between the trough and the point
/// where the smoothed series stops rising after the run (half a window
/// later), never reaching into the next event.
pub fn degradation_segments(series: &[f64], start: usize, params: &SegmentParams) -> Vec<DegradationEvent> {
    let x = &series[start.min(series.len())..];
    let sm = moving_average(x, params.window);
    let below: Vec<bool> = sm.iter().map(|&v| v < params.baseline - params.threshold).collect();
    let mut runs = Vec::new();
    let mut j = 0;
    while j < x.len() {
        if below[j] {
            let a = j;
            while j < x.len() && below[j] {
                j += 1;
            }
            runs.push((a, j));
        } else {
            j += 1;
        }
    }
    let mut events = Vec::with_capacity(runs.len());
    for (r, &(a, b)) in runs.iter().enumerate() {
        let limit = runs.get(r + 1).map_or(x.len(), |next| next.0);
        let onset = a.saturating_sub(1);
        let trough = a + first_argmin(&x[a..b]);
        let mut peak = b.min(limit - 1);
        while peak + 1 < limit && sm[peak + 1] > sm[peak] {
            peak += 1;
        }
        let end = (peak + params.window / 2).min(limit - 1).max(trough);
        let recovery = trough + first_argmax(&x[trough..=end]);
        events.push(DegradationEvent {
            start: start + onset,
            trough: start + trough,
            recovery: start + recovery,
            min_value: x[trough],
            max_value: x[recovery],
        });
    }
    events
}
