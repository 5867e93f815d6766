//! Random perturbation agent: emulates sensor dropouts and mis-measurements.
//!
//! Each step, already active perturbations are re-applied; with probability
//! `p` a new one is started on a uniformly chosen sensor. A new perturbation
//! zeroes the reading with probability 0.2 and otherwise multiplies it by a
//! lognormal factor, and lasts a geometrically distributed number of steps
//! (success probability 1/6, so 6 steps or 30 minutes on average).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Geometric, LogNormal};
use serde::{Deserialize, Serialize};

use super::{AttackerKind, Perturbation, Perturber};
use crate::defender::Policy;
use crate::error::{Error, Result};
use crate::grid::{Observation, ObservationLayout, SensorGroup};

/// Chance that a new perturbation is a dropout rather than a scaling.
pub const ZERO_PROBABILITY: f64 = 0.2;
/// Success probability of the duration distribution.
pub const DURATION_SUCCESS: f64 = 1.0 / 6.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RpaConfig {
    /// Probability of starting a new perturbation at a step.
    pub p: f64,
    pub sigma_gen: f64,
    pub sigma_load: f64,
    pub sigma_flow: f64,
}

impl Default for RpaConfig {
    fn default() -> Self {
        RpaConfig { p: 0.2, sigma_gen: 0.3, sigma_load: 0.3, sigma_flow: 0.3 }
    }
}

impl RpaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.p) {
            return Err(Error::Config(format!("rpa p must lie in [0, 1], got {}", self.p)));
        }
        for (name, s) in [("sigma_gen", self.sigma_gen), ("sigma_load", self.sigma_load), ("sigma_flow", self.sigma_flow)] {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::Config(format!("rpa {name} must be > 0, got {s}")));
            }
        }
        Ok(())
    }

    pub fn sigma(&self, group: SensorGroup) -> f64 {
        match group {
            SensorGroup::Gen => self.sigma_gen,
            SensorGroup::Load => self.sigma_load,
            SensorGroup::Flow => self.sigma_flow,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PerturbationMode {
    Zero,
    Scale(f64),
}

impl PerturbationMode {
    pub fn apply(self, value: f64) -> f64 {
        match self {
            PerturbationMode::Zero => 0.0,
            PerturbationMode::Scale(r) => value * r,
        }
    }
}

/// An active perturbation: which sensor, how, and for how many more steps.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationRecord {
    pub index: usize,
    pub mode: PerturbationMode,
    pub remaining: u32,
}

/// Draws a fresh perturbation (sensor, mode, duration) without applying it.
pub fn draw_perturbation(cfg: &RpaConfig, layout: &ObservationLayout, rng: &mut ChaCha8Rng) -> PerturbationRecord {
    let index = rng.random_range(0..layout.len());
    let mode = if rng.random::<f64>() < ZERO_PROBABILITY {
        PerturbationMode::Zero
    } else {
        let dist = LogNormal::new(0.0, cfg.sigma(layout.group(index))).expect("sigma validated");
        PerturbationMode::Scale(dist.sample(rng))
    };
    PerturbationRecord { index, mode, remaining: draw_duration(rng) }
}

/// Geometric duration on `{1, 2, ...}` with mean 6.
pub fn draw_duration(rng: &mut ChaCha8Rng) -> u32 {
    let failures = Geometric::new(DURATION_SUCCESS).expect("valid probability").sample(rng);
    u32::try_from(failures.saturating_add(1)).unwrap_or(u32::MAX)
}

/// One step of the random agent. Applies the active records, possibly starts
/// a new one (replacing any record on the same sensor), then ages all
/// records. Returns the perturbed values and the sensors touched this step.
pub fn rpa_apply(
    cfg: &RpaConfig,
    rng: &mut ChaCha8Rng,
    active: &mut Vec<PerturbationRecord>,
    layout: &ObservationLayout,
    values: &[f64],
) -> (Vec<f64>, Vec<usize>) {
    let new = (rng.random::<f64>() < cfg.p).then(|| draw_perturbation(cfg, layout, rng));
    rpa_step(new, active, values)
}

/// [`rpa_apply`] with the start decision and the new record already drawn.
pub fn rpa_step(
    new: Option<PerturbationRecord>,
    active: &mut Vec<PerturbationRecord>,
    values: &[f64],
) -> (Vec<f64>, Vec<usize>) {
    if let Some(record) = new {
        active.retain(|r| r.index != record.index);
        active.push(record);
    }
    let mut out = values.to_vec();
    let mut flagged: Vec<usize> = Vec::with_capacity(active.len());
    for r in active.iter() {
        out[r.index] = r.mode.apply(values[r.index]);
        flagged.push(r.index);
    }
    flagged.sort_unstable();
    for r in active.iter_mut() {
        r.remaining -= 1;
    }
    active.retain(|r| r.remaining > 0);
    (out, flagged)
}

/// Random agent over two streams: one decides whether a perturbation starts,
/// the other draws a candidate record every step whether or not it is used.
/// Runs that differ only in `p` therefore see the same candidates, and every
/// perturbation started at a lower `p` is also started at a higher one.
#[derive(Debug, Clone)]
pub struct RandomPerturber {
    cfg: RpaConfig,
    layout: ObservationLayout,
    fire: ChaCha8Rng,
    content: ChaCha8Rng,
    active: Vec<PerturbationRecord>,
}

impl RandomPerturber {
    pub fn new(cfg: RpaConfig, layout: ObservationLayout, mut rng: ChaCha8Rng) -> Result<Self> {
        cfg.validate()?;
        let content = ChaCha8Rng::seed_from_u64(rng.random());
        Ok(RandomPerturber { cfg, layout, fire: rng, content, active: Vec::new() })
    }

    pub fn active(&self) -> &[PerturbationRecord] {
        &self.active
    }
}

impl Perturber for RandomPerturber {
    fn kind(&self) -> AttackerKind {
        AttackerKind::Rpa
    }

    fn perturb(&mut self, obs: &Observation, _defender: &dyn Policy) -> Result<Perturbation> {
        let starts = self.fire.random::<f64>() < self.cfg.p;
        let candidate = draw_perturbation(&self.cfg, &self.layout, &mut self.content);
        let (values, flagged) = rpa_step(starts.then_some(candidate), &mut self.active, &obs.values);
        Ok(Perturbation { values, flagged })
    }
}
