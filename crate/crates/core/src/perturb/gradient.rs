//! Black-box gradient attacks: central-difference gradient estimation,
//! projected sign-gradient descent (GEPA) and the one-shot fast gradient
//! sign method used by the learned attacker.

use serde::{Deserialize, Serialize};

use super::{AttackerKind, Perturbation, Perturber};
use crate::defender::Policy;
use crate::error::{Error, Result};
use crate::grid::Observation;

/// Half-step of the central difference, in MW.
pub const FD_STEP: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GepaConfig {
    /// Number of descent iterations `W`.
    pub iterations: usize,
    /// Relative step size `ζ`.
    pub step_size: f64,
    /// Maximum relative perturbation `ξ`.
    pub cap: f64,
    /// Finite-difference half-step.
    pub fd_step: f64,
}

impl Default for GepaConfig {
    fn default() -> Self {
        GepaConfig { iterations: 10, step_size: 0.02, cap: 0.10, fd_step: FD_STEP }
    }
}

impl GepaConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0) {
            return Err(Error::Config(format!("gepa step size must be > 0, got {}", self.step_size)));
        }
        if !(self.cap > 0.0) {
            return Err(Error::Config(format!("gepa cap must be > 0, got {}", self.cap)));
        }
        if !(self.fd_step > 0.0) {
            return Err(Error::Config(format!("finite-difference step must be > 0, got {}", self.fd_step)));
        }
        Ok(())
    }
}

/// Central-difference gradient: `g_i = (L(s + h e_i) - L(s - h e_i)) / 2h`.
/// Uses exactly `2 |s|` evaluations of `objective`.
pub fn estimate_gradient(mut objective: impl FnMut(&[f64]) -> f64, s: &[f64], h: f64) -> Result<Vec<f64>> {
    let mut probe = s.to_vec();
    let mut g = Vec::with_capacity(s.len());
    for i in 0..s.len() {
        probe[i] = s[i] + h;
        let up = objective(&probe);
        probe[i] = s[i] - h;
        let down = objective(&probe);
        probe[i] = s[i];
        if !up.is_finite() || !down.is_finite() {
            return Err(Error::NonFinite { index: i });
        }
        g.push((up - down) / (2.0 * h));
    }
    Ok(g)
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Elementwise box `[s(1-ξ), s(1+ξ)]`, ordered for negative entries.
fn clip(value: f64, original: f64, cap: f64) -> f64 {
    let a = original * (1.0 - cap);
    let b = original * (1.0 + cap);
    value.clamp(a.min(b), a.max(b))
}

/// Projected sign-gradient descent that lowers `objective` while keeping
/// every entry within `ξ |s_i|` of the original.
///
/// Each iteration moves entry `i` by `ζ |s^adv_i|` against the gradient
/// sign, then clips back into the box. For positive readings this is the
/// multiplicative update `s^adv (1 - ζ sign(g))`.
pub fn gepa_attack(cfg: &GepaConfig, mut objective: impl FnMut(&[f64]) -> f64, s: &[f64]) -> Result<Vec<f64>> {
    let mut adv = s.to_vec();
    for _ in 0..cfg.iterations {
        let g = estimate_gradient(&mut objective, &adv, cfg.fd_step)?;
        for ((a, &gi), &orig) in adv.iter_mut().zip(&g).zip(s) {
            let moved = *a - cfg.step_size * a.abs() * sign(gi);
            *a = clip(moved, orig, cfg.cap);
        }
    }
    Ok(adv)
}

/// One-shot fast gradient sign step that raises `objective`:
/// `s + η ⊙ sign(g)` with `η_i = ξ |s_i|`.
pub fn fgsm_attack(cap: f64, fd_step: f64, objective: impl FnMut(&[f64]) -> f64, s: &[f64]) -> Result<Vec<f64>> {
    let g = estimate_gradient(objective, s, fd_step)?;
    Ok(s.iter().zip(&g).map(|(&x, &gi)| x + cap * x.abs() * sign(gi)).collect())
}

/// Runs [`gepa_attack`] every step against the score of the action the
/// defender's policy ranks first on the true observation.
#[derive(Debug, Clone)]
pub struct GradientPerturber {
    cfg: GepaConfig,
}

impl GradientPerturber {
    pub fn new(cfg: GepaConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(GradientPerturber { cfg })
    }
}

impl Perturber for GradientPerturber {
    fn kind(&self) -> AttackerKind {
        AttackerKind::Gepa
    }

    fn perturb(&mut self, obs: &Observation, defender: &dyn Policy) -> Result<Perturbation> {
        let chosen = defender.optimal_action(obs);
        let mut scratch = obs.clone();
        let values = gepa_attack(
            &self.cfg,
            |x| {
                scratch.values.copy_from_slice(x);
                defender.action_score(&scratch, chosen)
            },
            &obs.values,
        )?;
        let flagged = values
            .iter()
            .zip(&obs.values)
            .enumerate()
            .filter(|(_, (a, b))| a != b)
            .map(|(i, _)| i)
            .collect();
        Ok(Perturbation { values, flagged })
    }
}
