//! Observation attackers. None of them can touch the grid; they only rewrite
//! the copy of the sensor vector handed to the defender.

pub mod gradient;
pub mod rlpa;
pub mod rpa;

use serde::{Deserialize, Serialize};

use crate::defender::Policy;
use crate::error::Result;
use crate::grid::Observation;

pub use gradient::{estimate_gradient, fgsm_attack, gepa_attack, GepaConfig, GradientPerturber, FD_STEP};
pub use rlpa::{
    describe_state_key, reduce_action_space, rlpa_act, rlpa_train, AttackEnvironment, AttackSet, EnvFeedback, Fill,
    GridAttackEnv, LearnedPerturber, PerturbationAction, QFunction, RlpaConfig, RlpaModel, StateKey,
};
pub use rpa::{rpa_apply, rpa_step, draw_duration, draw_perturbation, PerturbationMode, PerturbationRecord, RandomPerturber, RpaConfig};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AttackerKind {
    None,
    Rpa,
    Gepa,
    Rlpa,
}

impl AttackerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            AttackerKind::None => "none",
            AttackerKind::Rpa => "rpa",
            AttackerKind::Gepa => "gepa",
            AttackerKind::Rlpa => "rlpa",
        }
    }
}

impl std::str::FromStr for AttackerKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "none" => Ok(AttackerKind::None),
            "rpa" => Ok(AttackerKind::Rpa),
            "gepa" => Ok(AttackerKind::Gepa),
            "rlpa" => Ok(AttackerKind::Rlpa),
            other => Err(format!("unknown perturber `{other}` (expected none, rpa, gepa or rlpa)")),
        }
    }
}

/// What the defender gets to see at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub values: Vec<f64>,
    /// Sensors the attacker deliberately altered this step, ascending.
    pub flagged: Vec<usize>,
}

pub trait Perturber {
    fn kind(&self) -> AttackerKind;

    /// Produces the defender's view of `obs`. `obs` itself is left untouched.
    fn perturb(&mut self, obs: &Observation, defender: &dyn Policy) -> Result<Perturbation>;
}

/// Passes observations through unchanged.
#[derive(Debug, Clone, Copy, Default)]
pub struct NullPerturber;

impl Perturber for NullPerturber {
    fn kind(&self) -> AttackerKind {
        AttackerKind::None
    }

    fn perturb(&mut self, obs: &Observation, _defender: &dyn Policy) -> Result<Perturbation> {
        Ok(Perturbation { values: obs.values.clone(), flagged: Vec::new() })
    }
}
