//! Solve the bundled IEEE 14-bus case with the DC power flow and print line
//! loadings over one simulated day.
//!
//! ```bash
//! cargo run -p grid-robustness --example power_flow
//! ```

use grid_robustness::grid::{dc_power_flow, nodal_balance_error, Chronics, ChronicsParams, GridModel, Topology};

fn main() -> anyhow::Result<()> {
    let model = GridModel::ieee14()?;
    let topo = Topology::reference(&model);
    let chronics = Chronics::generate(&model, 288, 42, &ChronicsParams::default());

    let mut peak = vec![0.0f64; model.n_lines()];
    let mut worst_balance = 0.0f64;
    for (gens, loads) in chronics.gens.iter().zip(&chronics.loads) {
        let sol = dc_power_flow(&model, &topo, gens, loads)?;
        worst_balance = worst_balance.max(nodal_balance_error(&model, &topo, &sol, loads));
        for (p, r) in peak.iter_mut().zip(sol.rho(&model)) {
            *p = p.max(r);
        }
    }

    let base_loads: Vec<f64> = model.loads.iter().map(|l| l.base).collect();
    let demand: f64 = base_loads.iter().sum();
    let total_pmax: f64 = model.generators.iter().map(|g| g.p_max).sum();
    let gens: Vec<f64> = model.generators.iter().map(|g| demand * g.p_max / total_pmax).collect();
    let base = dc_power_flow(&model, &topo, &gens, &base_loads)?;

    println!("{:>4} {:>5} {:>5} {:>9} {:>7} {:>9}", "line", "from", "to", "base MW", "limit", "peak rho");
    for (l, line) in model.lines.iter().enumerate() {
        println!(
            "{l:>4} {:>5} {:>5} {:>9.2} {:>7.1} {:>9.3}",
            model.substations[line.from].id,
            model.substations[line.to].id,
            base.flows[l],
            line.limit,
            peak[l]
        );
    }
    println!("worst nodal imbalance over the day: {worst_balance:.2e} MW");
    Ok(())
}
