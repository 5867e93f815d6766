//! Power-grid simulation: network model, DC power flow, chronics, actions
//! and the stepping environment.

pub mod action;
pub mod chronics;
pub mod env;
pub mod model;
pub mod powerflow;

pub use action::{Action, ActionId, ActionSpace, Attribute, Change};
pub use chronics::{Chronics, ChronicsParams, STEPS_PER_DAY};
pub use env::{predict, GridEnv, GridState, GridStatus, Observation, Prediction, StepResult};
pub use model::{load_grid, ElementRef, GridModel, ObservationLayout, SensorGroup};
pub use powerflow::{dc_power_flow, nodal_balance_error, FlowSolution, Topology};
