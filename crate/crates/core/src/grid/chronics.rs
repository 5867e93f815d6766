//! Load and generation time series at 5-minute resolution.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::model::GridModel;
use crate::error::{Error, Result};

/// Steps per day at 5-minute resolution.
pub const STEPS_PER_DAY: usize = 288;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ChronicsParams {
    /// Relative amplitude of the daily load cycle.
    pub daily_amplitude: f64,
    /// Stationary std of the multiplicative AR(1) load noise.
    pub load_sigma: f64,
    /// Stationary std of the renewable generator's AR(1) noise.
    pub renewable_sigma: f64,
    /// Lag-one autocorrelation of both noise processes.
    pub ar_coefficient: f64,
    /// Spread of the per-episode demand scale, uniform in `1 ± spread`.
    pub scale_spread: f64,
    /// Spread of per-load phase offsets, in fractions of a day.
    pub phase_spread: f64,
}

impl Default for ChronicsParams {
    fn default() -> Self {
        ChronicsParams {
            daily_amplitude: 0.25,
            load_sigma: 0.05,
            renewable_sigma: 0.15,
            ar_coefficient: 0.95,
            scale_spread: 0.06,
            phase_spread: 0.04,
        }
    }
}

/// One row per step; `loads[k][d]` demand of load `d`, `gens[k][g]` scheduled output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chronics {
    pub loads: Vec<Vec<f64>>,
    pub gens: Vec<Vec<f64>>,
}

struct Ar1 {
    phi: f64,
    innovation: f64,
    state: f64,
}

impl Ar1 {
    fn new(phi: f64, sigma: f64, rng: &mut impl Rng) -> Self {
        let z: f64 = StandardNormal.sample(rng);
        Ar1 { phi, innovation: sigma * (1.0 - phi * phi).sqrt(), state: sigma * z }
    }

    fn next(&mut self, rng: &mut impl Rng) -> f64 {
        let z: f64 = StandardNormal.sample(rng);
        self.state = self.phi * self.state + self.innovation * z;
        self.state
    }
}

impl Chronics {
    /// Generates `n_steps` rows: per-load daily sinusoid times base demand
    /// times AR(1) noise, non-slack generators dispatched in proportion to
    /// `p_max` (renewables with extra noise), slack covering the residual.
    pub fn generate(model: &GridModel, n_steps: usize, seed: u64, params: &ChronicsParams) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let scale = 1.0 + params.scale_spread * (2.0 * rng.random::<f64>() - 1.0);
        let phases: Vec<f64> = model
            .loads
            .iter()
            .map(|_| params.phase_spread * (2.0 * rng.random::<f64>() - 1.0))
            .collect();
        let mut load_noise: Vec<Ar1> = model
            .loads
            .iter()
            .map(|_| Ar1::new(params.ar_coefficient, params.load_sigma, &mut rng))
            .collect();
        let mut gen_noise: Vec<Option<Ar1>> = model
            .generators
            .iter()
            .map(|g| g.renewable.then(|| Ar1::new(params.ar_coefficient, params.renewable_sigma, &mut rng)))
            .collect();
        let total_pmax: f64 = model.generators.iter().map(|g| g.p_max).sum();

        let mut loads = Vec::with_capacity(n_steps);
        let mut gens = Vec::with_capacity(n_steps);
        for k in 0..n_steps {
            let day = k as f64 / STEPS_PER_DAY as f64;
            let row: Vec<f64> = model
                .loads
                .iter()
                .zip(&phases)
                .zip(&mut load_noise)
                .map(|((load, phase), noise)| {
                    // Peak around 13:30.
                    let cycle = 1.0
                        + params.daily_amplitude
                            * (2.0 * std::f64::consts::PI * (day - 0.3125 + phase)).sin();
                    (load.base * scale * cycle * (1.0 + noise.next(&mut rng))).max(0.0)
                })
                .collect();
            let demand: f64 = row.iter().sum();
            let mut g_row: Vec<f64> = model
                .generators
                .iter()
                .zip(&mut gen_noise)
                .map(|(g, noise)| {
                    let share = demand * g.p_max / total_pmax;
                    match noise {
                        Some(n) => (share * (1.0 + n.next(&mut rng))).clamp(0.0, g.p_max),
                        None => share,
                    }
                })
                .collect();
            let others: f64 = g_row
                .iter()
                .enumerate()
                .filter(|(g, _)| *g != model.slack_generator)
                .map(|(_, p)| p)
                .sum();
            g_row[model.slack_generator] = demand - others;
            loads.push(row);
            gens.push(g_row);
        }
        Chronics { loads, gens }
    }

    pub fn len(&self) -> usize {
        self.loads.len()
    }

    pub fn is_empty(&self) -> bool {
        self.loads.is_empty()
    }

    pub fn validate(&self, model: &GridModel) -> Result<()> {
        if self.loads.len() != self.gens.len() {
            return Err(Error::Validation("load and generation series differ in length".into()));
        }
        let capacity: f64 = model.generators.iter().map(|g| g.p_max).sum();
        for (k, (l, g)) in self.loads.iter().zip(&self.gens).enumerate() {
            if l.len() != model.n_loads() || g.len() != model.n_generators() {
                return Err(Error::Validation(format!("chronics row {k} has the wrong width")));
            }
            if l.iter().any(|d| !(*d >= 0.0)) {
                return Err(Error::Validation(format!("negative demand at step {k}")));
            }
            if l.iter().sum::<f64>() > capacity {
                return Err(Error::Validation(format!("demand exceeds generation capacity at step {k}")));
            }
        }
        Ok(())
    }

    /// Reads a CSV with header `load_0..load_{D-1},gen_0..gen_{G-1}`, one row per step.
    pub fn from_csv(model: &GridModel, path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
        let (nl, ng) = (model.n_loads(), model.n_generators());
        let mut loads = Vec::new();
        let mut gens = Vec::new();
        for (k, rec) in reader.records().enumerate() {
            let rec = rec.map_err(|e| Error::Parse(e.to_string()))?;
            if rec.len() != nl + ng {
                return Err(Error::Parse(format!("row {k}: expected {} columns, got {}", nl + ng, rec.len())));
            }
            let vals: Vec<f64> = rec
                .iter()
                .map(|v| v.trim().parse::<f64>().map_err(|e| Error::Parse(format!("row {k}: {e}"))))
                .collect::<Result<_>>()?;
            loads.push(vals[..nl].to_vec());
            gens.push(vals[nl..].to_vec());
        }
        let c = Chronics { loads, gens };
        c.validate(model)?;
        Ok(c)
    }

    pub fn to_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path).map_err(|e| Error::Parse(e.to_string()))?;
        let nl = self.loads.first().map_or(0, Vec::len);
        let ng = self.gens.first().map_or(0, Vec::len);
        let header: Vec<String> = (0..nl)
            .map(|i| format!("load_{i}"))
            .chain((0..ng).map(|i| format!("gen_{i}")))
            .collect();
        w.write_record(&header).map_err(|e| Error::Parse(e.to_string()))?;
        for (l, g) in self.loads.iter().zip(&self.gens) {
            let row: Vec<String> = l.iter().chain(g).map(|v| v.to_string()).collect();
            w.write_record(&row).map_err(|e| Error::Parse(e.to_string()))?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_is_valid_and_balanced() {
        let m = GridModel::ieee14().unwrap();
        let c = Chronics::generate(&m, 600, 7, &ChronicsParams::default());
        assert_eq!(c.len(), 600);
        c.validate(&m).unwrap();
        for (l, g) in c.loads.iter().zip(&c.gens) {
            let d: f64 = l.iter().sum();
            let s: f64 = g.iter().sum();
            assert!((d - s).abs() < 1e-9);
            assert!(g[m.slack_generator] > 0.0);
        }
    }

    #[test]
    fn seeded() {
        let m = GridModel::ieee14().unwrap();
        let p = ChronicsParams::default();
        assert_eq!(Chronics::generate(&m, 50, 3, &p), Chronics::generate(&m, 50, 3, &p));
        assert_ne!(Chronics::generate(&m, 50, 3, &p), Chronics::generate(&m, 50, 4, &p));
    }

    #[test]
    fn csv_round_trip() {
        let m = GridModel::ieee14().unwrap();
        let c = Chronics::generate(&m, 20, 1, &ChronicsParams::default());
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.csv");
        c.to_csv(&p).unwrap();
        assert_eq!(Chronics::from_csv(&m, &p).unwrap(), c);
    }
}
