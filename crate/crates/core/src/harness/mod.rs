//! Campaign orchestration: configuration, seed splitting, paired
//! unperturbed/perturbed episodes, attacker training and output files.

pub mod campaign;
pub mod config;
pub mod output;

pub use campaign::{run_campaign, run_paired_episode, Campaign, CampaignResult, EpisodeFailure};
pub use config::{
    CampaignConfig, PerturberConfig, DESK_EPISODES, DESK_MAX_STEPS, FULL_EPISODES, FULL_MAX_STEPS,
};
pub use output::{emit_outputs, load_campaign, recompute_reports, write_reports, StoredCampaign};

/// Independent random streams of a campaign.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SeedRole {
    /// Evaluation chronics, shared by both runs of a pair.
    Chronics = 1,
    /// Attacker randomness in evaluation episodes.
    Attacker = 2,
    /// Chronics of attacker training episodes.
    Training = 3,
    /// Chronics of the rollout that feeds the perturbation-space reduction.
    Pool = 4,
    /// Exploration noise while training the attacker.
    Exploration = 5,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `role` for episode `index`:
/// `splitmix64(splitmix64(splitmix64(master) ^ index) ^ role)`.
pub fn derive_seed(master: u64, index: u64, role: SeedRole) -> u64 {
    splitmix64(splitmix64(splitmix64(master) ^ index) ^ role as u64)
}
