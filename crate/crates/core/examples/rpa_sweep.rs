//! Sweep the random attacker's start probability and print how often the
//! defender's decision changes and how long the grid survives.
//!
//! ```bash
//! cargo run --release -p grid-robustness --example rpa_sweep -- [episodes] [steps]
//! ```

use grid_robustness::harness::{run_campaign, CampaignConfig};
use grid_robustness::perturb::AttackerKind;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().map_or(Ok(10), |a| a.parse())?;
    let steps: usize = args.next().map_or(Ok(2016), |a| a.parse())?;

    println!("{:>4} {:>16} {:>12} {:>14}", "p", "changes/1000", "survival %", "total reward %");
    for p in [0.2, 0.4, 0.6, 0.8, 1.0] {
        let mut cfg = CampaignConfig { episodes, max_steps: steps, ..Default::default() };
        cfg.perturber.kind = AttackerKind::Rpa;
        cfg.rpa.p = p;
        let r = run_campaign(cfg)?.reports.robustness;
        let f = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.2}"));
        println!(
            "{p:>4} {:>16} {:>12} {:>14}",
            f(r.action_changes_per_1000),
            f(r.survival_percent),
            f(r.total_reward_percent)
        );
    }
    Ok(())
}
