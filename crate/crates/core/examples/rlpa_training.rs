//! Train the learned attacker at desk scale, print its perturbation set and
//! the greedy choice in every state it visited, and save the Q-table.
//!
//! ```bash
//! cargo run --release -p grid-robustness --example rlpa_training -- [out.json]
//! ```

use grid_robustness::harness::{Campaign, CampaignConfig};
use grid_robustness::perturb::describe_state_key;

fn main() -> anyhow::Result<()> {
    let out = std::env::args().nth(1);
    let campaign = Campaign::new(CampaignConfig::default())?;
    let model = campaign.train_attacker()?;

    println!("perturbation set:");
    for (i, p) in model.set.actions.iter().enumerate() {
        println!("{i:>3}  {}", serde_json::to_string(p)?);
    }
    println!("\n{:<20} {:>6} {:>10}", "state", "greedy", "Q");
    for (key, values) in model.q.states() {
        let best = model.q.argmax(*key);
        println!("{:<20} {best:>6} {:>10.3}", describe_state_key(*key), values[best]);
    }
    if let Some(path) = out {
        model.save(&path)?;
        println!("\nwrote {path}");
    }
    Ok(())
}
