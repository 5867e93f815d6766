//! Robustness and resilience metrics. Everything here is a pure function of
//! recorded [`EpisodeTrace`]s.

pub mod report;
pub mod resilience;
pub mod robustness;
pub mod trace;

pub use report::{
    build_reports, episode_resilience, episode_robustness, resilience_table, robustness_table, EpisodeMetrics,
    EpisodeResilience, EpisodeRobustness, MeanStat, MetricParams, Reports, ResilienceBlock, ResilienceReport,
    RobustnessReport, WeakSpot,
};
pub use resilience::{
    cosine_similarity, degradation_segments, moving_average, reward_gap_area, state_similarity_series, trapezoid,
    DegradationEvent, SegmentParams,
};
pub use robustness::{
    action_change_count, action_similarity, change_set_similarity, change_bands, reward_per_action,
    similarity_per_changed_action, survival_steps, total_reward_delta, weak_spot_map, weak_spot_tally,
    WeakSpotTally,
};
pub use trace::{EpisodeTrace, RunRecord};
