//! The evaluated operator agent: a greedy one-step lookahead over the
//! discrete topology action space, gated on observed line loading.
//!
//! The agent rebuilds its picture of the grid from the observation alone.
//! Generator and load readings drive its power-flow model; the predicted
//! effect of an action is the change in simulated flows, added on top of the
//! flows it reads from the sensors. Any perturbed reading therefore shifts
//! its scores.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{dc_power_flow, predict, ActionId, ActionSpace, GridModel, Observation};

/// Per-action desirability plus the winning action.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyScores {
    pub scores: Vec<f64>,
    pub best: ActionId,
}

impl PolicyScores {
    /// Argmax with ties broken toward the lowest action id.
    pub fn from_scores(scores: Vec<f64>) -> Self {
        let mut best = 0;
        for (i, &s) in scores.iter().enumerate() {
            if s > scores[best] {
                best = i;
            }
        }
        PolicyScores { scores, best }
    }
}

/// A policy that can be queried without side effects.
pub trait Policy {
    fn action_space(&self) -> &ActionSpace;

    /// Score of one action for the given observation; `-inf` when the
    /// action cannot be simulated or is locked.
    fn action_score(&self, obs: &Observation, action: ActionId) -> f64;

    fn policy_scores(&self, obs: &Observation) -> PolicyScores {
        PolicyScores::from_scores(
            (0..self.action_space().len())
                .map(|a| self.action_score(obs, a))
                .collect(),
        )
    }

    fn act(&self, obs: &Observation) -> ActionId;

    /// The action the policy's scores rank first.
    fn optimal_action(&self, obs: &Observation) -> ActionId {
        self.policy_scores(obs).best
    }

    /// The grid the policy reasons about, when it has one.
    fn grid_model(&self) -> Option<Arc<GridModel>> {
        None
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DefenderConfig {
    /// The agent intervenes once any observed loading reaches this value.
    pub rho_activate: f64,
    /// Below this loading the agent starts undoing earlier topology changes.
    pub rho_safe: f64,
}

impl Default for DefenderConfig {
    fn default() -> Self {
        DefenderConfig { rho_activate: 0.95, rho_safe: 0.80 }
    }
}

impl DefenderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0 < self.rho_safe && self.rho_safe < self.rho_activate) {
            return Err(Error::Config(format!(
                "defender thresholds must satisfy 0 < rho_safe < rho_activate, got {} and {}",
                self.rho_safe, self.rho_activate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct GreedyDefender {
    model: Arc<GridModel>,
    actions: Arc<ActionSpace>,
    config: DefenderConfig,
}

impl GreedyDefender {
    pub fn new(model: Arc<GridModel>, actions: Arc<ActionSpace>, config: DefenderConfig) -> Result<Self> {
        config.validate()?;
        Ok(GreedyDefender { model, actions, config })
    }

    /// Defender over the model's full enumerated action space.
    pub fn with_default_actions(model: Arc<GridModel>, config: DefenderConfig) -> Result<Self> {
        let actions = Arc::new(ActionSpace::enumerate(&model));
        Self::new(model, actions, config)
    }

    pub fn config(&self) -> &DefenderConfig {
        &self.config
    }

    pub fn model(&self) -> &Arc<GridModel> {
        &self.model
    }

    /// Below the activation threshold every action other than do-nothing is
    /// scored one lower, so do-nothing ranks first.
    fn idle_penalty(&self, obs: &Observation) -> f64 {
        if obs.max_rho(&self.model) < self.config.rho_activate {
            1.0
        } else {
            0.0
        }
    }

    /// Predicted max loading for each action in `ids`, reusing one baseline solve.
    fn predicted_max_rho(&self, obs: &Observation, ids: impl Iterator<Item = ActionId>) -> Vec<f64> {
        let m = self.model.as_ref();
        let gens = obs.gens(m);
        let loads = obs.loads(m);
        let observed = obs.flows(m);
        let baseline = dc_power_flow(m, &obs.status.topology, gens, loads).ok();
        ids.map(|id| {
            let action = self.actions.get(id);
            if action.is_do_nothing() {
                return max_loading(m, observed, &obs.status.topology.line_in_service);
            }
            if !obs.status.is_legal(m, action) {
                return f64::INFINITY;
            }
            let p = predict(m, &obs.status, gens, loads, action);
            if !p.legal {
                return f64::INFINITY;
            }
            let flows: Vec<f64> = match &baseline {
                Some(base) => observed
                    .iter()
                    .zip(&p.flows)
                    .zip(&base.flows)
                    .map(|((o, new), old)| o + new - old)
                    .collect(),
                None => p.flows.clone(),
            };
            max_loading(m, &flows, &p.topology.line_in_service)
        })
        .collect()
    }
}

fn max_loading(model: &GridModel, flows: &[f64], in_service: &[bool]) -> f64 {
    flows
        .iter()
        .zip(&model.lines)
        .zip(in_service)
        .filter(|(_, &on)| on)
        .map(|((f, l), _)| f.abs() / l.limit)
        .fold(0.0, f64::max)
}

impl Policy for GreedyDefender {
    fn action_space(&self) -> &ActionSpace {
        &self.actions
    }

    fn grid_model(&self) -> Option<Arc<GridModel>> {
        Some(Arc::clone(&self.model))
    }

    fn action_score(&self, obs: &Observation, action: ActionId) -> f64 {
        let penalty = self.idle_penalty(obs);
        let rho = self.predicted_max_rho(obs, std::iter::once(action))[0];
        1.0 - rho - if action == 0 { 0.0 } else { penalty }
    }

    fn policy_scores(&self, obs: &Observation) -> PolicyScores {
        let penalty = self.idle_penalty(obs);
        let rho = self.predicted_max_rho(obs, 0..self.actions.len());
        PolicyScores::from_scores(
            rho.into_iter()
                .enumerate()
                .map(|(id, r)| 1.0 - r - if id == 0 { 0.0 } else { penalty })
                .collect(),
        )
    }

    fn optimal_action(&self, obs: &Observation) -> ActionId {
        if self.idle_penalty(obs) > 0.0 {
            0
        } else {
            self.policy_scores(obs).best
        }
    }

    fn act(&self, obs: &Observation) -> ActionId {
        let m = self.model.as_ref();
        let read = obs.max_rho(m);
        if read < self.config.rho_activate {
            if read < self.config.rho_safe && !obs.status.is_reference(m) {
                if let Some((id, _)) = self
                    .actions
                    .iter()
                    .find(|(_, a)| a.restores_reference(m, &obs.status.topology) && obs.status.is_legal(m, a))
                {
                    return id;
                }
            }
            return 0;
        }
        self.policy_scores(obs).best
    }
}
