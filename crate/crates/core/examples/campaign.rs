//! Run a paired campaign from a TOML config (or the desk-scale defaults),
//! write every output file and print both report tables.
//!
//! ```bash
//! cargo run --release -p grid-robustness --example campaign -- [config.toml] [out-dir]
//! ```

use std::path::PathBuf;

use grid_robustness::harness::{emit_outputs, run_campaign, CampaignConfig};
use grid_robustness::metrics::{resilience_table, robustness_table};
use grid_robustness::perturb::AttackerKind;

fn main() -> anyhow::Result<()> {
    let mut args = std::env::args().skip(1);
    let cfg = match args.next() {
        Some(p) => CampaignConfig::from_file(p)?,
        None => {
            let mut cfg = CampaignConfig { episodes: 3, ..Default::default() };
            cfg.perturber.kind = AttackerKind::Rpa;
            cfg
        }
    };
    let out = args.next().map_or_else(|| cfg.output.clone(), PathBuf::from);

    let result = run_campaign(cfg)?;
    emit_outputs(&result, &out)?;
    let name = result.config.perturber.kind.as_str().to_string();
    let r = &result.reports;
    println!("{}", robustness_table(&[(name.clone(), &r.robustness)]));
    println!("{}", resilience_table(&[(name.clone(), &r.resilience.reward)], "reward delta"));
    println!("{}", resilience_table(&[(name, &r.resilience.state)], "cosine similarity"));
    for f in &result.failures {
        println!("episode {} failed: {}", f.episode, f.error);
    }
    println!("wrote {}", out.display());
    Ok(())
}
