//! Find a step where the defender intervenes, then run the gradient attack
//! on that observation and show how the defender's choice moves.
//!
//! ```bash
//! cargo run --release -p grid-robustness --example gradient_attack -- [seed]
//! ```

use std::sync::Arc;

use grid_robustness::defender::{DefenderConfig, GreedyDefender, Policy};
use grid_robustness::grid::{Chronics, ChronicsParams, GridEnv, GridModel};
use grid_robustness::perturb::{GepaConfig, GradientPerturber, Perturber};

fn main() -> anyhow::Result<()> {
    let seed: u64 = std::env::args().nth(1).map_or(Ok(0), |a| a.parse())?;
    let model = Arc::new(GridModel::ieee14()?);
    let defender = GreedyDefender::with_default_actions(Arc::clone(&model), DefenderConfig::default())?;
    let chronics = Arc::new(Chronics::generate(&model, 2017, seed, &ChronicsParams::default()));
    let mut env = GridEnv::reset(Arc::clone(&model), chronics)?;

    let obs = loop {
        let obs = env.observe();
        if obs.max_rho(&model) >= defender.config().rho_activate {
            break obs;
        }
        if env.step(defender.action_space().get(defender.act(&obs)))?.done {
            anyhow::bail!("no alarm in this week; try another seed");
        }
    };

    let cfg = GepaConfig::default();
    let mut attacker = GradientPerturber::new(cfg.clone())?;
    let seen = attacker.perturb(&obs, &defender)?;
    let attacked = obs.with_values(seen.values.clone());

    let clean = defender.act(&obs);
    let fooled = defender.act(&attacked);
    let actions = defender.action_space();
    println!("step {} max rho {:.3}", obs.step, obs.max_rho(&model));
    println!("clean choice:     {}", actions.get(clean).describe(&model));
    println!("perturbed choice: {}", actions.get(fooled).describe(&model));
    println!(
        "score of the clean choice: {:.4} -> {:.4}",
        defender.action_score(&obs, clean),
        defender.action_score(&attacked, clean)
    );

    let mut moved: Vec<(usize, f64)> = seen
        .flagged
        .iter()
        .map(|&i| (i, (seen.values[i] - obs.values[i]) / obs.values[i].abs().max(1e-12)))
        .collect();
    moved.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    println!("\n{} readings moved; largest relative changes (cap {}):", moved.len(), cfg.cap);
    for (i, r) in moved.iter().take(8) {
        println!("  {:<8} {:+.3}", model.layout().label(*i), r);
    }
    Ok(())
}
