//! Run the same desk-scale campaign against every attacker and print the
//! robustness table side by side, plus what kind of decision each attacker
//! changed: from doing nothing to acting, from acting to doing nothing, or
//! from one action to another.
//!
//! ```bash
//! cargo run --release -p grid-robustness --example compare_attackers -- [episodes] [steps]
//! ```

use std::time::Instant;

use grid_robustness::harness::{run_campaign, CampaignConfig};
use grid_robustness::metrics::{action_similarity, robustness_table};
use grid_robustness::perturb::AttackerKind;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let episodes: usize = args.next().map_or(Ok(4), |a| a.parse())?;
    let steps: usize = args.next().map_or(Ok(2016), |a| a.parse())?;

    let mut results = Vec::new();
    for kind in [AttackerKind::None, AttackerKind::Rpa, AttackerKind::Gepa, AttackerKind::Rlpa] {
        let mut cfg = CampaignConfig { episodes, max_steps: steps, seed: 1, ..Default::default() };
        cfg.perturber.kind = kind;
        cfg.rlpa.max_steps = steps;
        let start = Instant::now();
        let result = run_campaign(cfg)?;
        println!("{:<5} {:.2?}", kind.as_str(), start.elapsed());
        results.push(result);
    }

    let columns: Vec<(String, _)> =
        results.iter().map(|r| (r.config.perturber.kind.as_str().to_string(), &r.reports.robustness)).collect();
    println!("\n{}", robustness_table(&columns));

    println!("{:<5} {:>10} {:>10} {:>10} {:>14}", "", "idle->act", "act->idle", "act->act", "sim(act->act)");
    for r in &results {
        let (mut to_act, mut to_idle, mut swaps, mut sim) = (0, 0, 0, 0.0);
        for t in &r.traces {
            for k in t.changed_steps() {
                let (exec, cf) = (&t.perturbed.actions[k], &t.counterfactual[k]);
                if cf.is_do_nothing() {
                    to_act += 1;
                } else if exec.is_do_nothing() {
                    to_idle += 1;
                } else {
                    swaps += 1;
                    sim += action_similarity(&r.model, exec, cf);
                }
            }
        }
        let mean_sim = if swaps > 0 { format!("{:.3}", sim / swaps as f64) } else { "n/a".into() };
        println!("{:<5} {to_act:>10} {to_idle:>10} {swaps:>10} {mean_sim:>14}", r.config.perturber.kind.as_str());
    }
    Ok(())
}
