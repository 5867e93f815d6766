//! Stepping environment: applies actions, advances chronics, enforces
//! overload protection and decides when the grid has failed.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::action::Action;
use super::chronics::Chronics;
use super::model::{ElementRef, GridModel};
use super::powerflow::{dc_power_flow, FlowSolution, Topology};
use crate::error::{Error, Result};

/// Steps a substation or line stays locked after being acted on.
pub const ACTION_COOLDOWN: u32 = 3;
/// Steps a tripped line stays locked out.
pub const TRIP_COOLDOWN: u32 = 10;
/// Consecutive steps above ρ = 1 before a line trips.
pub const SOFT_OVERLOAD_STEPS: u32 = 3;
/// Loading at which a line trips immediately.
pub const HARD_OVERLOAD_RHO: f64 = 2.0;

/// Everything about the grid that is not a sensor reading: topology and
/// operational locks. Carried alongside observations and never perturbed.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridStatus {
    pub topology: Topology,
    pub sub_cooldown: Vec<u32>,
    pub line_cooldown: Vec<u32>,
}

impl GridStatus {
    pub fn reference(model: &GridModel) -> Self {
        GridStatus {
            topology: Topology::reference(model),
            sub_cooldown: vec![0; model.substations.len()],
            line_cooldown: vec![0; model.n_lines()],
        }
    }

    /// Whether the action may be executed in this status.
    pub fn is_legal(&self, model: &GridModel, action: &Action) -> bool {
        match action {
            Action::DoNothing => true,
            Action::SetBusbars { substation, assignment } => {
                *substation < model.substations.len()
                    && assignment.len() == model.substations[*substation].elements.len()
                    && assignment.iter().all(|&b| b == 1 || b == 2)
                    && self.sub_cooldown[*substation] == 0
            }
            Action::ReconnectLine { line } => {
                *line < model.n_lines() && !self.topology.line_in_service[*line] && self.line_cooldown[*line] == 0
            }
            Action::DisconnectLine { line } => {
                *line < model.n_lines() && self.topology.line_in_service[*line] && self.line_cooldown[*line] == 0
            }
        }
    }

    pub fn is_reference(&self, model: &GridModel) -> bool {
        self.topology == Topology::reference(model)
    }
}

/// Sensor vector `[gen | load | flow]` (MW) plus the unperturbable grid status.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub step: usize,
    pub values: Vec<f64>,
    pub status: GridStatus,
}

impl Observation {
    pub fn from_parts(
        model: &GridModel,
        step: usize,
        status: GridStatus,
        gen_output: &[f64],
        load: &[f64],
        flows: &[f64],
    ) -> Self {
        let mut values = Vec::with_capacity(model.observation_len());
        values.extend_from_slice(gen_output);
        values.extend_from_slice(load);
        values.extend_from_slice(flows);
        Observation { step, values, status }
    }

    pub fn gens<'a>(&'a self, model: &GridModel) -> &'a [f64] {
        &self.values[..model.n_generators()]
    }

    pub fn loads<'a>(&'a self, model: &GridModel) -> &'a [f64] {
        let g = model.n_generators();
        &self.values[g..g + model.n_loads()]
    }

    pub fn flows<'a>(&'a self, model: &GridModel) -> &'a [f64] {
        &self.values[model.n_generators() + model.n_loads()..]
    }

    /// Line loadings as read from the flow sensors.
    pub fn rho(&self, model: &GridModel) -> Vec<f64> {
        self.flows(model)
            .iter()
            .zip(&model.lines)
            .map(|(f, l)| f.abs() / l.limit)
            .collect()
    }

    pub fn max_rho(&self, model: &GridModel) -> f64 {
        self.rho(model).into_iter().fold(0.0, f64::max)
    }

    /// Same status and step, different sensor values.
    pub fn with_values(&self, values: Vec<f64>) -> Self {
        Observation { step: self.step, values, status: self.status.clone() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    /// False when the new state is outside the legal set (grid failure).
    pub legal: bool,
    /// The requested action was illegal and do-nothing ran instead.
    pub rejected: bool,
    pub tripped: Vec<usize>,
}

/// One-step lookahead under persistence injections.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub flows: Vec<f64>,
    pub rho: Vec<f64>,
    pub topology: Topology,
    pub reward: f64,
    pub legal: bool,
    pub rejected: bool,
}

/// Line-margin reward: mean over all lines of `max(0, 1 - ρ²)`, counting
/// lines out of service as zero.
pub fn line_margin_reward(model: &GridModel, topo: &Topology, rho: &[f64]) -> f64 {
    let total: f64 = rho
        .iter()
        .zip(&topo.line_in_service)
        .filter(|(_, &on)| on)
        .map(|(r, _)| (1.0 - r * r).max(0.0))
        .sum();
    total / model.n_lines() as f64
}

/// Solves the grid after applying `action` to `status` with the given
/// injections; illegal actions are replaced by do-nothing and flagged.
pub fn predict(
    model: &GridModel,
    status: &GridStatus,
    gen_setpoint: &[f64],
    load: &[f64],
    action: &Action,
) -> Prediction {
    let rejected = !status.is_legal(model, action);
    let mut topology = status.topology.clone();
    if !rejected {
        action.apply_to(model, &mut topology);
    }
    match dc_power_flow(model, &topology, gen_setpoint, load) {
        Ok(sol) if sol.islanded_loads.is_empty() => {
            let rho = sol.rho(model);
            let reward = line_margin_reward(model, &topology, &rho);
            Prediction { flows: sol.flows, rho, topology, reward, legal: true, rejected }
        }
        _ => Prediction {
            flows: vec![0.0; model.n_lines()],
            rho: vec![0.0; model.n_lines()],
            topology,
            reward: 0.0,
            legal: false,
            rejected,
        },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridState {
    pub step: usize,
    pub status: GridStatus,
    pub overload_count: Vec<u32>,
    pub gen_setpoint: Vec<f64>,
    pub load: Vec<f64>,
    pub gen_output: Vec<f64>,
    pub flows: Vec<f64>,
    pub rho: Vec<f64>,
    pub done: bool,
}

/// A single episode over a fixed chronics series. Deterministic: the same
/// model, chronics and action sequence always give the same trajectory.
#[derive(Debug, Clone)]
pub struct GridEnv {
    model: Arc<GridModel>,
    chronics: Arc<Chronics>,
    state: GridState,
}

impl GridEnv {
    /// Starts an episode at chronics row 0 with the reference topology.
    pub fn reset(model: Arc<GridModel>, chronics: Arc<Chronics>) -> Result<Self> {
        if chronics.is_empty() {
            return Err(Error::Invalid("empty chronics".into()));
        }
        let status = GridStatus::reference(&model);
        let gen_setpoint = chronics.gens[0].clone();
        let load = chronics.loads[0].clone();
        let sol = dc_power_flow(&model, &status.topology, &gen_setpoint, &load)?;
        if !sol.islanded_loads.is_empty() {
            return Err(Error::Invalid("initial state islands a load".into()));
        }
        let rho = sol.rho(&model);
        let state = GridState {
            step: 0,
            status,
            overload_count: vec![0; model.n_lines()],
            gen_setpoint,
            load,
            gen_output: sol.gen_output,
            flows: sol.flows,
            rho,
            done: chronics.len() == 1,
        };
        Ok(GridEnv { model, chronics, state })
    }

    pub fn model(&self) -> &Arc<GridModel> {
        &self.model
    }

    pub fn chronics(&self) -> &Arc<Chronics> {
        &self.chronics
    }

    pub fn state(&self) -> &GridState {
        &self.state
    }

    pub fn is_done(&self) -> bool {
        self.state.done
    }

    /// Number of steps the episode can run if the grid never fails.
    pub fn horizon(&self) -> usize {
        self.chronics.len() - 1
    }

    /// Exact sensor vector of the current state.
    pub fn observe(&self) -> Observation {
        Observation::from_parts(
            &self.model,
            self.state.step,
            self.state.status.clone(),
            &self.state.gen_output,
            &self.state.load,
            &self.state.flows,
        )
    }

    /// Predicts the effect of `action` if injections stayed as they are now.
    /// Does not touch the state.
    pub fn simulate(&self, action: &Action) -> Prediction {
        predict(&self.model, &self.state.status, &self.state.gen_setpoint, &self.state.load, action)
    }

    pub fn step(&mut self, action: &Action) -> Result<StepResult> {
        if self.state.done {
            return Err(Error::EpisodeOver(self.state.step));
        }
        let model = Arc::clone(&self.model);
        let model = model.as_ref();
        let rejected = !self.state.status.is_legal(model, action);
        let action = if rejected { &Action::DoNothing } else { action };
        action.apply_to(model, &mut self.state.status.topology);

        let k = self.state.step + 1;
        self.state.step = k;
        self.state.gen_setpoint.clone_from(&self.chronics.gens[k]);
        self.state.load.clone_from(&self.chronics.loads[k]);

        let mut tripped = Vec::new();
        let mut first_pass = true;
        let outcome = loop {
            let sol = match dc_power_flow(model, &self.state.status.topology, &self.state.gen_setpoint, &self.state.load) {
                Ok(sol) if sol.islanded_loads.is_empty() => sol,
                _ => break None,
            };
            let rho = sol.rho(model);
            let mut new_trips = Vec::new();
            for (l, &r) in rho.iter().enumerate() {
                if !self.state.status.topology.line_in_service[l] {
                    self.state.overload_count[l] = 0;
                    continue;
                }
                if first_pass {
                    if r > 1.0 {
                        self.state.overload_count[l] += 1;
                    } else {
                        self.state.overload_count[l] = 0;
                    }
                }
                if r >= HARD_OVERLOAD_RHO || self.state.overload_count[l] >= SOFT_OVERLOAD_STEPS {
                    new_trips.push(l);
                }
            }
            first_pass = false;
            if new_trips.is_empty() {
                break Some((sol, rho));
            }
            for l in new_trips {
                self.state.status.topology.line_in_service[l] = false;
                self.state.overload_count[l] = 0;
                tripped.push(l);
            }
        };

        // Locks: age existing ones, then arm the new ones.
        for c in self.state.status.sub_cooldown.iter_mut().chain(self.state.status.line_cooldown.iter_mut()) {
            *c = c.saturating_sub(1);
        }
        match action {
            Action::SetBusbars { substation, .. } => self.state.status.sub_cooldown[*substation] = ACTION_COOLDOWN,
            Action::ReconnectLine { line } | Action::DisconnectLine { line } => {
                self.state.status.line_cooldown[*line] = ACTION_COOLDOWN
            }
            Action::DoNothing => {}
        }
        for &l in &tripped {
            self.state.status.line_cooldown[l] = TRIP_COOLDOWN;
        }

        let (reward, legal) = match outcome {
            Some((sol, rho)) => {
                let reward = line_margin_reward(model, &self.state.status.topology, &rho);
                self.state.gen_output = sol.gen_output;
                self.state.flows = sol.flows;
                self.state.rho = rho;
                (reward, true)
            }
            None => {
                self.state.gen_output = vec![0.0; model.n_generators()];
                self.state.flows = vec![0.0; model.n_lines()];
                self.state.rho = vec![0.0; model.n_lines()];
                (0.0, false)
            }
        };
        self.state.done = !legal || k + 1 >= self.chronics.len();
        Ok(StepResult {
            observation: self.observe(),
            reward,
            done: self.state.done,
            legal,
            rejected,
            tripped,
        })
    }

    /// Solution of the current state (re-solved; used by diagnostics and tests).
    pub fn solve_current(&self) -> Result<FlowSolution> {
        dc_power_flow(&self.model, &self.state.status.topology, &self.state.gen_setpoint, &self.state.load)
    }

    /// Loads connected to a substation, for fixtures that need to isolate one.
    pub fn loads_at(&self, sub: usize) -> Vec<usize> {
        self.model.substations[sub]
            .elements
            .iter()
            .filter_map(|e| match e {
                ElementRef::Load(d) => Some(*d),
                _ => None,
            })
            .collect()
    }
}
