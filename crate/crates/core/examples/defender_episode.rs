//! Run the greedy defender against a do-nothing baseline on a few generated
//! weeks and report survival, reward and how often the defender acted.
//!
//! ```bash
//! cargo run --release -p grid-robustness --example defender_episode -- [episodes] [steps]
//! ```

use std::sync::Arc;
use std::time::Instant;

use grid_robustness::defender::{DefenderConfig, GreedyDefender, Policy};
use grid_robustness::grid::{Chronics, ChronicsParams, GridEnv, GridModel};

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes: u64 = args.next().map_or(Ok(5), |a| a.parse())?;
    let steps: usize = args.next().map_or(Ok(2016), |a| a.parse())?;

    let model = Arc::new(GridModel::ieee14()?);
    let defender = GreedyDefender::with_default_actions(Arc::clone(&model), DefenderConfig::default())?;
    println!("action space: {} actions", defender.action_space().len());

    for ep in 0..episodes {
        let chronics = Arc::new(Chronics::generate(&model, steps + 1, ep, &ChronicsParams::default()));
        for use_agent in [false, true] {
            let start = Instant::now();
            let mut env = GridEnv::reset(Arc::clone(&model), Arc::clone(&chronics))?;
            let mut obs = env.observe();
            let (mut total, mut acted, mut survived, mut trips, mut alarmed) = (0.0, 0, 0, 0, 0);
            while !env.is_done() {
                if obs.max_rho(&model) >= defender.config().rho_activate {
                    alarmed += 1;
                }
                let id = if use_agent { defender.act(&obs) } else { 0 };
                if id != 0 {
                    acted += 1;
                }
                let action = defender.action_space().get(id).clone();
                let r = env.step(&action)?;
                trips += r.tripped.len();
                if r.legal {
                    survived += 1;
                }
                total += r.reward;
                obs = r.observation;
            }
            println!(
                "episode {ep} {:<10} survived {survived:>5}/{steps} reward {total:>9.2} actions {acted:>4} alarms {alarmed:>4} trips {trips:>3} ({:.2?})",
                if use_agent { "defender" } else { "do-nothing" },
                start.elapsed()
            );
        }
    }
    Ok(())
}
