//! Lossless DC power flow over a busbar-level topology.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::{ElementRef, GridModel};
use crate::error::{Error, Result};

/// Busbar assignment of every element plus line service status.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Topology {
    /// Busbar (1 or 2) per element, indexed by [`GridModel::element_index`].
    pub busbar: Vec<u8>,
    pub line_in_service: Vec<bool>,
}

impl Topology {
    /// All elements on busbar 1, every line in service.
    pub fn reference(model: &GridModel) -> Self {
        Topology {
            busbar: vec![1; model.n_elements()],
            line_in_service: vec![true; model.n_lines()],
        }
    }

    pub fn busbar_of(&self, model: &GridModel, e: ElementRef) -> u8 {
        self.busbar[model.element_index(e)]
    }

    /// Electrical node of an element: `2 * substation + busbar - 1`.
    pub fn node_of(&self, model: &GridModel, e: ElementRef) -> usize {
        2 * model.substation_of(e) + usize::from(self.busbar_of(model, e) - 1)
    }

    /// True when any element of the substation sits on busbar 2.
    pub fn is_split(&self, model: &GridModel, sub: usize) -> bool {
        model.substations[sub]
            .elements
            .iter()
            .any(|&e| self.busbar_of(model, e) != 1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowSolution {
    /// Active flow per line from origin to extremity, MW. Zero for lines out of service.
    pub flows: Vec<f64>,
    /// Actual generator outputs, MW; the slack absorbs the mismatch and
    /// generators outside the slack island produce nothing.
    pub gen_output: Vec<f64>,
    /// Loads that are not connected to the slack island.
    pub islanded_loads: Vec<usize>,
    /// Nodes outside the slack island (isolated), ascending.
    pub isolated_nodes: Vec<usize>,
    /// Voltage angle per node (slack node = 0), in MW·pu units.
    pub angles: Vec<f64>,
}

impl FlowSolution {
    pub fn rho(&self, model: &GridModel) -> Vec<f64> {
        self.flows
            .iter()
            .zip(&model.lines)
            .map(|(f, l)| f.abs() / l.limit)
            .collect()
    }
}

/// Solves the DC power flow for the given topology and element set-points.
///
/// `gen_setpoint` holds scheduled generator outputs; the slack generator's
/// entry is ignored and replaced by whatever balances the slack island.
/// Returns [`Error::Singular`] when the reduced susceptance matrix cannot be
/// factorised.
pub fn dc_power_flow(
    model: &GridModel,
    topo: &Topology,
    gen_setpoint: &[f64],
    load_demand: &[f64],
) -> Result<FlowSolution> {
    let n_nodes = 2 * model.substations.len();
    let slack_node = topo.node_of(model, ElementRef::Generator(model.slack_generator));

    // Adjacency over in-service lines.
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n_nodes];
    let mut ends = Vec::with_capacity(model.n_lines());
    for (l, _) in model.lines.iter().enumerate() {
        let a = topo.node_of(model, ElementRef::LineOrigin(l));
        let b = topo.node_of(model, ElementRef::LineExtremity(l));
        ends.push((a, b));
        if topo.line_in_service[l] && a != b {
            adj[a].push(b);
            adj[b].push(a);
        }
    }

    let mut in_island = vec![false; n_nodes];
    let mut stack = vec![slack_node];
    in_island[slack_node] = true;
    while let Some(n) = stack.pop() {
        for &m in &adj[n] {
            if !in_island[m] {
                in_island[m] = true;
                stack.push(m);
            }
        }
    }

    let mut injection = vec![0.0; n_nodes];
    let mut gen_output = vec![0.0; model.n_generators()];
    let mut islanded_loads = Vec::new();
    let mut demand_in_island = 0.0;
    for (d, &p) in load_demand.iter().enumerate() {
        let node = topo.node_of(model, ElementRef::Load(d));
        if in_island[node] {
            injection[node] -= p;
            demand_in_island += p;
        } else {
            islanded_loads.push(d);
        }
    }
    let mut scheduled = 0.0;
    for (g, &p) in gen_setpoint.iter().enumerate() {
        if g == model.slack_generator {
            continue;
        }
        let node = topo.node_of(model, ElementRef::Generator(g));
        if in_island[node] {
            injection[node] += p;
            gen_output[g] = p;
            scheduled += p;
        }
    }
    let slack_p = demand_in_island - scheduled;
    gen_output[model.slack_generator] = slack_p;
    injection[slack_node] += slack_p;

    // Reduced system over island nodes except the slack.
    let mut position = vec![usize::MAX; n_nodes];
    let mut order = Vec::new();
    for n in 0..n_nodes {
        if in_island[n] && n != slack_node {
            position[n] = order.len();
            order.push(n);
        }
    }
    let dim = order.len();
    let mut angles = vec![0.0; n_nodes];
    if dim > 0 {
        let mut b = DMatrix::<f64>::zeros(dim, dim);
        for (l, line) in model.lines.iter().enumerate() {
            let (a, c) = ends[l];
            if !topo.line_in_service[l] || a == c || !in_island[a] {
                continue;
            }
            let y = 1.0 / line.reactance;
            let (pa, pc) = (position[a], position[c]);
            if pa != usize::MAX {
                b[(pa, pa)] += y;
            }
            if pc != usize::MAX {
                b[(pc, pc)] += y;
            }
            if pa != usize::MAX && pc != usize::MAX {
                b[(pa, pc)] -= y;
                b[(pc, pa)] -= y;
            }
        }
        let rhs = DVector::from_iterator(dim, order.iter().map(|&n| injection[n]));
        let chol = b
            .cholesky()
            .ok_or_else(|| Error::Singular(format!("susceptance matrix of order {dim} not positive definite")))?;
        let theta = chol.solve(&rhs);
        if theta.iter().any(|t| !t.is_finite()) {
            return Err(Error::Singular("non-finite voltage angles".into()));
        }
        for (i, &n) in order.iter().enumerate() {
            angles[n] = theta[i];
        }
    }

    let flows = model
        .lines
        .iter()
        .enumerate()
        .map(|(l, line)| {
            let (a, c) = ends[l];
            if topo.line_in_service[l] && in_island[a] && a != c {
                (angles[a] - angles[c]) / line.reactance
            } else {
                0.0
            }
        })
        .collect();

    let isolated_nodes = (0..n_nodes).filter(|&n| !in_island[n]).collect();
    Ok(FlowSolution { flows, gen_output, islanded_loads, isolated_nodes, angles })
}

/// Largest absolute nodal imbalance (injection minus outgoing flow) over all
/// island nodes, MW.
pub fn nodal_balance_error(
    model: &GridModel,
    topo: &Topology,
    sol: &FlowSolution,
    load_demand: &[f64],
) -> f64 {
    let n_nodes = 2 * model.substations.len();
    let mut net = vec![0.0; n_nodes];
    for (g, &p) in sol.gen_output.iter().enumerate() {
        net[topo.node_of(model, ElementRef::Generator(g))] += p;
    }
    for (d, &p) in load_demand.iter().enumerate() {
        if !sol.islanded_loads.contains(&d) {
            net[topo.node_of(model, ElementRef::Load(d))] -= p;
        }
    }
    for (l, f) in sol.flows.iter().enumerate() {
        net[topo.node_of(model, ElementRef::LineOrigin(l))] -= f;
        net[topo.node_of(model, ElementRef::LineExtremity(l))] += f;
    }
    net.iter()
        .enumerate()
        .filter(|(n, _)| !sol.isolated_nodes.contains(n))
        .map(|(_, v)| v.abs())
        .fold(0.0, f64::max)
}
