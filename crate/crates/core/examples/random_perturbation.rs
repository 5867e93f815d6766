//! Feed one day of true observations through the random attacker and show
//! how many sensors are corrupted at once, plus the first few perturbations
//! it starts.
//!
//! ```bash
//! cargo run -p grid-robustness --example random_perturbation -- [p] [seed]
//! ```

use std::sync::Arc;

use grid_robustness::defender::{DefenderConfig, GreedyDefender, Policy};
use grid_robustness::grid::{Chronics, ChronicsParams, GridEnv, GridModel};
use grid_robustness::perturb::{Perturber, RandomPerturber, RpaConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let p: f64 = args.next().map_or(Ok(0.2), |a| a.parse())?;
    let seed: u64 = args.next().map_or(Ok(0), |a| a.parse())?;

    let model = Arc::new(GridModel::ieee14()?);
    let layout = model.layout();
    let defender = GreedyDefender::with_default_actions(Arc::clone(&model), DefenderConfig::default())?;
    let chronics = Arc::new(Chronics::generate(&model, 289, seed, &ChronicsParams::default()));
    let mut env = GridEnv::reset(Arc::clone(&model), chronics)?;
    let mut attacker = RandomPerturber::new(RpaConfig { p, ..Default::default() }, layout.clone(), ChaCha8Rng::seed_from_u64(seed))?;

    let mut histogram = vec![0usize; 8];
    let mut shown = 0;
    let mut previous: Vec<usize> = Vec::new();
    while !env.is_done() {
        let obs = env.observe();
        let seen = attacker.perturb(&obs, &defender)?;
        histogram[seen.flagged.len().min(7)] += 1;
        for &i in seen.flagged.iter().filter(|i| !previous.contains(i)) {
            if shown < 8 {
                println!(
                    "step {:>3}: {:<8} {:>9.2} -> {:>9.2}",
                    obs.step,
                    layout.label(i),
                    obs.values[i],
                    seen.values[i]
                );
                shown += 1;
            }
        }
        previous = seen.flagged;
        env.step(defender.action_space().get(defender.act(&obs)))?;
    }

    println!("\nsensors corrupted at once (p = {p}):");
    for (n, count) in histogram.iter().enumerate() {
        let label = if n == 7 { "7+".to_string() } else { n.to_string() };
        println!("{label:>3}: {count:>4} steps");
    }
    Ok(())
}
