//! Campaign-level aggregation of per-episode metrics.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::resilience::{degradation_segments, reward_gap_area, state_similarity_series, trapezoid, SegmentParams};
use super::robustness::{
    action_change_count, reward_per_action, similarity_per_changed_action, survival_steps, total_reward_delta,
    weak_spot_tally,
};
use super::trace::EpisodeTrace;
use crate::error::{Error, Result};
use crate::grid::GridModel;
use crate::perturb::AttackerKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MetricParams {
    /// Moving-average window for event detection, in steps.
    pub window: usize,
    /// Reward drop that opens a degradation event.
    pub reward_threshold: f64,
    /// Cosine-similarity drop that opens a state degradation event.
    pub cosine_threshold: f64,
}

impl Default for MetricParams {
    fn default() -> Self {
        MetricParams { window: 50, reward_threshold: 0.05, cosine_threshold: 0.02 }
    }
}

impl MetricParams {
    pub fn validate(&self) -> Result<()> {
        if self.window == 0 {
            return Err(Error::Config("metrics window must be >= 1".into()));
        }
        if !(self.reward_threshold > 0.0 && self.cosine_threshold > 0.0) {
            return Err(Error::Config("metric thresholds must be > 0".into()));
        }
        Ok(())
    }

    pub fn reward_segments(&self) -> SegmentParams {
        SegmentParams { window: self.window, baseline: 0.0, threshold: self.reward_threshold }
    }

    pub fn state_segments(&self) -> SegmentParams {
        SegmentParams { window: self.window, baseline: 1.0, threshold: self.cosine_threshold }
    }
}

/// Mean over the episodes where a metric is defined.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanStat {
    pub mean: Option<f64>,
    pub defined: usize,
    pub undefined: usize,
}

impl MeanStat {
    pub fn of(values: impl IntoIterator<Item = Option<f64>>) -> Self {
        let (mut sum, mut defined, mut undefined) = (0.0, 0, 0);
        for v in values {
            match v {
                Some(x) => {
                    sum += x;
                    defined += 1;
                }
                None => undefined += 1,
            }
        }
        MeanStat { mean: (defined > 0).then(|| sum / defined as f64), defined, undefined }
    }
}

fn mean(values: impl IntoIterator<Item = f64>) -> f64 {
    let (s, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    s / n as f64
}

fn per_1000(value: f64, steps: f64) -> Option<f64> {
    (steps > 0.0).then(|| value / (steps / 1000.0))
}

fn percent(num: f64, den: f64) -> Option<f64> {
    (den != 0.0).then(|| 100.0 * num / den)
}

/// Robustness metrics of one paired episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRobustness {
    pub episode: usize,
    pub steps_unperturbed: usize,
    pub steps_perturbed: usize,
    pub total_reward_unperturbed: f64,
    pub total_reward_perturbed: f64,
    pub total_reward_delta: f64,
    pub survival_unperturbed: usize,
    pub survival_perturbed: usize,
    pub reward_per_action_unperturbed: Option<f64>,
    pub reward_per_action_perturbed: Option<f64>,
    pub action_changes: usize,
    pub action_changes_per_1000: Option<f64>,
    pub similarity_per_changed_action: Option<f64>,
}

pub fn episode_robustness(model: &GridModel, trace: &EpisodeTrace) -> EpisodeRobustness {
    let changes = action_change_count(trace);
    EpisodeRobustness {
        episode: trace.episode,
        steps_unperturbed: trace.unperturbed_len(),
        steps_perturbed: trace.perturbed_len(),
        total_reward_unperturbed: trace.unperturbed.rewards.iter().sum(),
        total_reward_perturbed: trace.perturbed.rewards.iter().sum(),
        total_reward_delta: total_reward_delta(trace),
        survival_unperturbed: survival_steps(&trace.unperturbed),
        survival_perturbed: survival_steps(&trace.perturbed),
        reward_per_action_unperturbed: reward_per_action(&trace.unperturbed),
        reward_per_action_perturbed: reward_per_action(&trace.perturbed),
        action_changes: changes,
        action_changes_per_1000: per_1000(changes as f64, trace.perturbed_len() as f64),
        similarity_per_changed_action: similarity_per_changed_action(model, trace),
    }
}

/// Resilience metrics of one tracked series in one episode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResilience {
    pub aligned_steps: usize,
    pub area: f64,
    pub area_per_1000: Option<f64>,
    pub events: Vec<super::resilience::DegradationEvent>,
    pub events_per_1000: Option<f64>,
}

impl EpisodeResilience {
    fn from_series(series: &[f64], area: f64, start: Option<usize>, params: &SegmentParams) -> Self {
        let n = series.len();
        let events = match start {
            Some(h) => degradation_segments(series, h, params),
            None => Vec::new(),
        };
        EpisodeResilience {
            aligned_steps: n,
            area,
            area_per_1000: per_1000(area, n as f64),
            events_per_1000: per_1000(events.len() as f64, n as f64),
            events,
        }
    }
}

/// Reward-gap and state-similarity resilience of one paired episode.
pub fn episode_resilience(trace: &EpisodeTrace, params: &MetricParams) -> (EpisodeResilience, EpisodeResilience) {
    let h = trace.first_perturbation;
    let delta = trace.reward_delta_series();
    let reward = EpisodeResilience::from_series(&delta, reward_gap_area(trace), h, &params.reward_segments());
    let cos = state_similarity_series(trace);
    let cos_gap: Vec<f64> = cos.iter().map(|c| c - 1.0).collect();
    let state_area = h.map_or(0.0, |h| trapezoid(&cos_gap[h.min(cos_gap.len())..]));
    let state = EpisodeResilience::from_series(&cos, state_area, h, &params.state_segments());
    (reward, state)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeakSpot {
    pub index: usize,
    pub group: String,
    pub element: usize,
    pub label: String,
    pub perturbed_steps: u64,
    pub changed_steps: u64,
    pub score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustnessReport {
    pub attacker: AttackerKind,
    pub episodes: usize,
    pub steps_unperturbed: f64,
    pub steps_perturbed: f64,
    pub total_reward_unperturbed: f64,
    pub total_reward_perturbed: f64,
    pub total_reward_delta: f64,
    /// Perturbed total reward as a percentage of the unperturbed one.
    pub total_reward_percent: Option<f64>,
    pub survival_unperturbed: f64,
    pub survival_perturbed: f64,
    pub survival_percent: Option<f64>,
    pub reward_per_action_unperturbed: MeanStat,
    pub reward_per_action_perturbed: MeanStat,
    pub reward_per_action_percent: Option<f64>,
    pub action_changes: f64,
    /// Mean changes over mean perturbed-run length, per 1000 steps.
    pub action_changes_per_1000: Option<f64>,
    pub similarity_per_changed_action: MeanStat,
    pub weak_spots: Vec<WeakSpot>,
}

/// Averages of one resilience series over episodes; event statistics are
/// first averaged within each episode. Per-1000-step values divide the mean
/// by the mean aligned length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceBlock {
    pub aligned_steps: f64,
    pub area: f64,
    pub area_per_1000: Option<f64>,
    pub events_total: usize,
    pub events: f64,
    pub events_per_1000: Option<f64>,
    pub degradation_time: MeanStat,
    pub restorative_time: MeanStat,
    pub min_value: MeanStat,
    pub max_value: MeanStat,
}

impl ResilienceBlock {
    fn from_episodes(eps: &[EpisodeResilience]) -> Self {
        let per_episode = |f: &dyn Fn(&super::resilience::DegradationEvent) -> f64| {
            MeanStat::of(eps.iter().map(|e| {
                (!e.events.is_empty()).then(|| e.events.iter().map(f).sum::<f64>() / e.events.len() as f64)
            }))
        };
        let steps = mean(eps.iter().map(|e| e.aligned_steps as f64));
        let area = mean(eps.iter().map(|e| e.area));
        let events = mean(eps.iter().map(|e| e.events.len() as f64));
        ResilienceBlock {
            aligned_steps: steps,
            area,
            area_per_1000: per_1000(area, steps),
            events_total: eps.iter().map(|e| e.events.len()).sum(),
            events,
            events_per_1000: per_1000(events, steps),
            degradation_time: per_episode(&|e| e.degradation_time() as f64),
            restorative_time: per_episode(&|e| e.restorative_time() as f64),
            min_value: per_episode(&|e| e.min_value),
            max_value: per_episode(&|e| e.max_value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResilienceReport {
    pub attacker: AttackerKind,
    pub episodes: usize,
    /// Reward gap `ΔR = R^p - R^u`.
    pub reward: ResilienceBlock,
    /// Cosine similarity of true states; the area integrates `cos - 1`.
    pub state: ResilienceBlock,
}

/// Per-episode metrics behind the aggregate reports.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeMetrics {
    pub robustness: EpisodeRobustness,
    pub reward: EpisodeResilience,
    pub state: EpisodeResilience,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reports {
    pub robustness: RobustnessReport,
    pub resilience: ResilienceReport,
    pub episodes: Vec<EpisodeMetrics>,
}

/// Aggregates a campaign's traces. All traces must come from one attacker.
pub fn build_reports(model: &GridModel, traces: &[EpisodeTrace], params: &MetricParams) -> Result<Reports> {
    let Some(first) = traces.first() else {
        return Err(Error::Invalid("cannot build reports from zero traces".into()));
    };
    let attacker = first.attacker;
    if traces.iter().any(|t| t.attacker != attacker) {
        return Err(Error::Invalid("traces mix different attackers".into()));
    }
    for t in traces {
        t.validate()?;
    }
    let episodes: Vec<EpisodeMetrics> = traces
        .iter()
        .map(|t| {
            let (reward, state) = episode_resilience(t, params);
            EpisodeMetrics { robustness: episode_robustness(model, t), reward, state }
        })
        .collect();
    let rob: Vec<&EpisodeRobustness> = episodes.iter().map(|e| &e.robustness).collect();

    let layout = model.layout();
    let tally = weak_spot_tally(traces, attacker);
    let weak_spots = tally
        .scores()
        .into_iter()
        .enumerate()
        .map(|(i, score)| {
            let (group, element) = layout.entries[i];
            WeakSpot {
                index: i,
                group: group.as_str().into(),
                element,
                label: layout.label(i),
                perturbed_steps: tally.perturbed[i],
                changed_steps: tally.changed[i],
                score,
            }
        })
        .collect();

    let reward_u = mean(rob.iter().map(|r| r.total_reward_unperturbed));
    let reward_p = mean(rob.iter().map(|r| r.total_reward_perturbed));
    let surv_u = mean(rob.iter().map(|r| r.survival_unperturbed as f64));
    let surv_p = mean(rob.iter().map(|r| r.survival_perturbed as f64));
    let steps_p = mean(rob.iter().map(|r| r.steps_perturbed as f64));
    let changes = mean(rob.iter().map(|r| r.action_changes as f64));
    let rpa_u = MeanStat::of(rob.iter().map(|r| r.reward_per_action_unperturbed));
    let rpa_p = MeanStat::of(rob.iter().map(|r| r.reward_per_action_perturbed));
    let robustness = RobustnessReport {
        attacker,
        episodes: traces.len(),
        steps_unperturbed: mean(rob.iter().map(|r| r.steps_unperturbed as f64)),
        steps_perturbed: steps_p,
        total_reward_unperturbed: reward_u,
        total_reward_perturbed: reward_p,
        total_reward_delta: mean(rob.iter().map(|r| r.total_reward_delta)),
        total_reward_percent: percent(reward_p, reward_u),
        survival_unperturbed: surv_u,
        survival_perturbed: surv_p,
        survival_percent: percent(surv_p, surv_u),
        reward_per_action_percent: match (rpa_p.mean, rpa_u.mean) {
            (Some(p), Some(u)) => percent(p, u),
            _ => None,
        },
        reward_per_action_unperturbed: rpa_u,
        reward_per_action_perturbed: rpa_p,
        action_changes: changes,
        action_changes_per_1000: per_1000(changes, steps_p),
        similarity_per_changed_action: MeanStat::of(rob.iter().map(|r| r.similarity_per_changed_action)),
        weak_spots,
    };
    let rewards: Vec<EpisodeResilience> = episodes.iter().map(|e| e.reward.clone()).collect();
    let states: Vec<EpisodeResilience> = episodes.iter().map(|e| e.state.clone()).collect();
    let resilience = ResilienceReport {
        attacker,
        episodes: traces.len(),
        reward: ResilienceBlock::from_episodes(&rewards),
        state: ResilienceBlock::from_episodes(&states),
    };
    Ok(Reports { robustness, resilience, episodes })
}

fn cell(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".into(), |x| format!("{x:.3}"))
}

fn table(header: &str, columns: &[String], rows: &[(&str, Vec<String>)]) -> String {
    let label_w = rows.iter().map(|r| r.0.len()).chain([header.len()]).max().unwrap_or(0);
    let widths: Vec<usize> = (0..columns.len())
        .map(|c| rows.iter().map(|r| r.1[c].len()).chain([columns[c].len()]).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    let _ = write!(out, "{header:<label_w$}");
    for (c, w) in columns.iter().zip(&widths) {
        let _ = write!(out, "  {c:>w$}");
    }
    out.push('\n');
    for (label, cells) in rows {
        let _ = write!(out, "{label:<label_w$}");
        for (c, w) in cells.iter().zip(&widths) {
            let _ = write!(out, "  {c:>w$}");
        }
        out.push('\n');
    }
    out
}

/// Aligned-column robustness table, one column per report.
pub fn robustness_table(columns: &[(String, &RobustnessReport)]) -> String {
    let names: Vec<String> = columns.iter().map(|c| c.0.clone()).collect();
    let row = |f: &dyn Fn(&RobustnessReport) -> Option<f64>| columns.iter().map(|c| cell(f(c.1))).collect();
    let rows: Vec<(&str, Vec<String>)> = vec![
        ("Episodes", row(&|r| Some(r.episodes as f64))),
        ("Total reward (unperturbed)", row(&|r| Some(r.total_reward_unperturbed))),
        ("Total reward (perturbed)", row(&|r| Some(r.total_reward_perturbed))),
        ("Total reward delta", row(&|r| Some(r.total_reward_delta))),
        ("Total reward (%)", row(&|r| r.total_reward_percent)),
        ("Survival steps (unperturbed)", row(&|r| Some(r.survival_unperturbed))),
        ("Survival steps (perturbed)", row(&|r| Some(r.survival_perturbed))),
        ("Survival time (%)", row(&|r| r.survival_percent)),
        ("Reward per action (unperturbed)", row(&|r| r.reward_per_action_unperturbed.mean)),
        ("Reward per action (perturbed)", row(&|r| r.reward_per_action_perturbed.mean)),
        ("Reward per action (%)", row(&|r| r.reward_per_action_percent)),
        ("Actions changed", row(&|r| Some(r.action_changes))),
        ("Actions changed per 1000 steps", row(&|r| r.action_changes_per_1000)),
        ("Similarity score per changed action", row(&|r| r.similarity_per_changed_action.mean)),
    ];
    table("Metric", &names, &rows)
}

/// Aligned-column resilience table for the reward gap or the state similarity.
pub fn resilience_table(columns: &[(String, &ResilienceBlock)], value_name: &str) -> String {
    let names: Vec<String> = columns.iter().map(|c| c.0.clone()).collect();
    let row = |f: &dyn Fn(&ResilienceBlock) -> Option<f64>| columns.iter().map(|c| cell(f(c.1))).collect();
    let min_label = format!("Minimum {value_name}");
    let max_label = format!("Maximum {value_name}");
    let rows: Vec<(&str, Vec<String>)> = vec![
        ("Area", row(&|b| Some(b.area))),
        ("Area per 1000 steps", row(&|b| b.area_per_1000)),
        ("# degr.", row(&|b| Some(b.events))),
        ("# degr. per 1000 steps", row(&|b| b.events_per_1000)),
        ("Degradation time", row(&|b| b.degradation_time.mean)),
        ("Restorative time", row(&|b| b.restorative_time.mean)),
        (&min_label, row(&|b| b.min_value.mean)),
        (&max_label, row(&|b| b.max_value.mean)),
    ];
    table("Metric", &names, &rows)
}
