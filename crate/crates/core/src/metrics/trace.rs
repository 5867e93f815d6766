//! Per-episode record of a paired unperturbed/perturbed run.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Action;
use crate::perturb::AttackerKind;

/// One run of an episode: what happened at every step `k`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Reward received after acting at step `k`.
    pub rewards: Vec<f64>,
    /// Executed action.
    pub actions: Vec<Action>,
    /// Whether the grid was still in a legal state after the step.
    pub legal: Vec<bool>,
    /// True observation vector the step started from.
    pub states: Vec<Vec<f64>>,
}

impl RunRecord {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn push(&mut self, state: Vec<f64>, action: Action, reward: f64, legal: bool) {
        self.states.push(state);
        self.actions.push(action);
        self.rewards.push(reward);
        self.legal.push(legal);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeTrace {
    pub episode: usize,
    pub attacker: AttackerKind,
    pub observation_len: usize,
    pub unperturbed: RunRecord,
    /// Perturbed run; `actions` are the ones taken on the perturbed view.
    pub perturbed: RunRecord,
    /// Action the defender would have taken on the true observation at each
    /// perturbed-run step.
    pub counterfactual: Vec<Action>,
    /// Sensors the attacker flagged as perturbed, per perturbed-run step.
    pub flagged: Vec<Vec<usize>>,
    /// Nonzero `s^adv_i - s_i` as `(i, change)`, per perturbed-run step.
    pub changes: Vec<Vec<(usize, f64)>>,
    /// First step at which any observation value was altered.
    pub first_perturbation: Option<usize>,
}

impl EpisodeTrace {
    /// `K^u`.
    pub fn unperturbed_len(&self) -> usize {
        self.unperturbed.len()
    }

    /// `K^p`.
    pub fn perturbed_len(&self) -> usize {
        self.perturbed.len()
    }

    /// Length of the aligned window shared by both runs.
    pub fn aligned_len(&self) -> usize {
        self.unperturbed_len().min(self.perturbed_len())
    }

    /// `ΔR_k = R^p_k - R^u_k` over the aligned window.
    pub fn reward_delta_series(&self) -> Vec<f64> {
        self.perturbed
            .rewards
            .iter()
            .zip(&self.unperturbed.rewards)
            .map(|(p, u)| p - u)
            .collect()
    }

    /// Steps where the executed action differs from the counterfactual one.
    pub fn changed_steps(&self) -> impl Iterator<Item = usize> + '_ {
        self.perturbed
            .actions
            .iter()
            .zip(&self.counterfactual)
            .enumerate()
            .filter(|(_, (a, c))| a != c)
            .map(|(k, _)| k)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(Error::Validation(format!("episode {} trace: {what}", self.episode)));
        for (name, run) in [("unperturbed", &self.unperturbed), ("perturbed", &self.perturbed)] {
            let n = run.rewards.len();
            if run.actions.len() != n || run.legal.len() != n || run.states.len() != n {
                return bad(&format!("{name} run has ragged series"));
            }
            if run.states.iter().any(|s| s.len() != self.observation_len) {
                return bad(&format!("{name} state length differs from {}", self.observation_len));
            }
        }
        let k = self.perturbed_len();
        if self.counterfactual.len() != k || self.flagged.len() != k || self.changes.len() != k {
            return bad("per-step perturbation records do not match the perturbed run");
        }
        let n = self.observation_len;
        if self.flagged.iter().flatten().any(|&i| i >= n) || self.changes.iter().flatten().any(|&(i, _)| i >= n) {
            return bad("perturbation index out of range");
        }
        if let Some(h) = self.first_perturbation {
            if h > k {
                return bad("first perturbation after the end of the run");
            }
        }
        Ok(())
    }
}
