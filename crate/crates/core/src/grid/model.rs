//! Static network description and its on-disk schema.
//!
//! Every bus is hosted by a substation with two busbars. In the reference
//! topology all elements sit on busbar 1, so buses and substations coincide
//! one-to-one and share an index.
//!
//! Grid files are TOML:
//!
//! ```toml
//! name = "two-bus"
//! slack_bus = 1
//!
//! [[bus]]
//! id = 1
//!
//! [[bus]]
//! id = 2
//!
//! [[line]]
//! from = 1
//! to = 2
//! reactance = 0.1     # per-unit, > 0
//! limit = 10.0        # MW, > 0
//!
//! [[generator]]
//! bus = 1
//! p_max = 20.0        # MW
//! renewable = false   # optional
//!
//! [[load]]
//! bus = 2
//! base = 1.0          # MW, nominal demand used by the chronics generator
//! ```

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const IEEE14: &str = include_str!("../../data/ieee14.toml");

/// Identifies one connectable element of the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ElementRef {
    LineOrigin(usize),
    LineExtremity(usize),
    Generator(usize),
    Load(usize),
}

impl std::fmt::Display for ElementRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ElementRef::LineOrigin(l) => write!(f, "line{l}.or"),
            ElementRef::LineExtremity(l) => write!(f, "line{l}.ex"),
            ElementRef::Generator(g) => write!(f, "gen{g}"),
            ElementRef::Load(d) => write!(f, "load{d}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Line {
    pub from: usize,
    pub to: usize,
    /// Series reactance in per-unit.
    pub reactance: f64,
    /// Thermal limit in MW.
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub bus: usize,
    pub p_max: f64,
    pub renewable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Load {
    pub bus: usize,
    pub base: f64,
}

/// A substation and the elements it can connect to either of its busbars.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Substation {
    pub id: u32,
    /// Elements in stable order: line origins, line extremities, generators, loads.
    pub elements: Vec<ElementRef>,
}

/// Validated network. Indices into `lines`, `generators`, `loads` and
/// `substations` are the element ids used everywhere else.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridModel {
    pub name: String,
    pub substations: Vec<Substation>,
    pub lines: Vec<Line>,
    pub generators: Vec<Generator>,
    pub loads: Vec<Load>,
    /// Substation index of the slack bus.
    pub slack_bus: usize,
    /// Generator index that absorbs the power mismatch.
    pub slack_generator: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridFile {
    name: Option<String>,
    slack_bus: u32,
    bus: Vec<BusEntry>,
    #[serde(default)]
    line: Vec<LineEntry>,
    #[serde(default)]
    generator: Vec<GeneratorEntry>,
    #[serde(default)]
    load: Vec<LoadEntry>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct BusEntry {
    id: u32,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LineEntry {
    from: u32,
    to: u32,
    reactance: f64,
    limit: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct GeneratorEntry {
    bus: u32,
    p_max: f64,
    #[serde(default)]
    renewable: bool,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct LoadEntry {
    bus: u32,
    #[serde(default = "default_load_base")]
    base: f64,
}

fn default_load_base() -> f64 {
    1.0
}

/// Reads and validates a grid description. The name `ieee14` resolves to
/// the bundled IEEE 14-bus case when no such file exists.
pub fn load_grid(path: impl AsRef<Path>) -> Result<GridModel> {
    let path = path.as_ref();
    if !path.exists() && path.as_os_str() == "ieee14" {
        return GridModel::ieee14();
    }
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    GridModel::from_toml(&text)
}

impl GridModel {
    /// The bundled IEEE 14-bus case: 14 substations, 20 lines, 5 generators, 11 loads.
    pub fn ieee14() -> Result<Self> {
        Self::from_toml(IEEE14)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let file: GridFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Self::from_file(file)
    }

    fn from_file(file: GridFile) -> Result<Self> {
        let mut index = BTreeMap::new();
        for (i, b) in file.bus.iter().enumerate() {
            if index.insert(b.id, i).is_some() {
                return Err(Error::Validation(format!("duplicate bus id {}", b.id)));
            }
        }
        let lookup = |id: u32, what: &str| {
            index
                .get(&id)
                .copied()
                .ok_or_else(|| Error::Validation(format!("{what} references unknown bus {id}")))
        };

        let mut lines = Vec::with_capacity(file.line.len());
        for (i, l) in file.line.iter().enumerate() {
            let from = lookup(l.from, &format!("line {i}"))?;
            let to = lookup(l.to, &format!("line {i}"))?;
            if from == to {
                return Err(Error::Validation(format!("line {i} connects bus {} to itself", l.from)));
            }
            if !(l.reactance > 0.0) || !l.reactance.is_finite() {
                return Err(Error::Validation(format!(
                    "line {i} reactance must be strictly positive, got {}",
                    l.reactance
                )));
            }
            if !(l.limit > 0.0) || !l.limit.is_finite() {
                return Err(Error::Validation(format!(
                    "line {i} thermal limit must be strictly positive, got {}",
                    l.limit
                )));
            }
            lines.push(Line { from, to, reactance: l.reactance, limit: l.limit });
        }

        let mut generators = Vec::with_capacity(file.generator.len());
        for (i, g) in file.generator.iter().enumerate() {
            let bus = lookup(g.bus, &format!("generator {i}"))?;
            if !(g.p_max >= 0.0) {
                return Err(Error::Validation(format!("generator {i} p_max must be >= 0")));
            }
            generators.push(Generator { bus, p_max: g.p_max, renewable: g.renewable });
        }

        let mut loads = Vec::with_capacity(file.load.len());
        for (i, d) in file.load.iter().enumerate() {
            let bus = lookup(d.bus, &format!("load {i}"))?;
            if !(d.base >= 0.0) {
                return Err(Error::Validation(format!("load {i} base demand must be >= 0")));
            }
            loads.push(Load { bus, base: d.base });
        }

        let slack_bus = lookup(file.slack_bus, "slack_bus")?;
        let slack_generator = generators
            .iter()
            .position(|g| g.bus == slack_bus)
            .ok_or_else(|| Error::Validation("slack bus hosts no generator".into()))?;

        let mut substations: Vec<Substation> = file
            .bus
            .iter()
            .map(|b| Substation { id: b.id, elements: Vec::new() })
            .collect();
        for (i, l) in lines.iter().enumerate() {
            substations[l.from].elements.push(ElementRef::LineOrigin(i));
        }
        for (i, l) in lines.iter().enumerate() {
            substations[l.to].elements.push(ElementRef::LineExtremity(i));
        }
        for (i, g) in generators.iter().enumerate() {
            substations[g.bus].elements.push(ElementRef::Generator(i));
        }
        for (i, d) in loads.iter().enumerate() {
            substations[d.bus].elements.push(ElementRef::Load(i));
        }
        for s in &mut substations {
            s.elements.sort();
        }

        let model = GridModel {
            name: file.name.unwrap_or_else(|| "grid".into()),
            substations,
            lines,
            generators,
            loads,
            slack_bus,
            slack_generator,
        };
        model.check_connected()?;
        Ok(model)
    }

    fn check_connected(&self) -> Result<()> {
        let n = self.substations.len();
        let mut adj = vec![Vec::new(); n];
        for l in &self.lines {
            adj[l.from].push(l.to);
            adj[l.to].push(l.from);
        }
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([self.slack_bus]);
        seen[self.slack_bus] = true;
        while let Some(b) = queue.pop_front() {
            for &nb in &adj[b] {
                if !seen[nb] {
                    seen[nb] = true;
                    queue.push_back(nb);
                }
            }
        }
        if let Some(b) = seen.iter().position(|s| !s) {
            return Err(Error::Validation(format!(
                "reference topology is disconnected: bus {} unreachable from slack",
                self.substations[b].id
            )));
        }
        Ok(())
    }

    pub fn n_lines(&self) -> usize {
        self.lines.len()
    }

    pub fn n_generators(&self) -> usize {
        self.generators.len()
    }

    pub fn n_loads(&self) -> usize {
        self.loads.len()
    }

    /// Number of connectable elements (two per line, one per generator and load).
    pub fn n_elements(&self) -> usize {
        2 * self.lines.len() + self.generators.len() + self.loads.len()
    }

    /// Dense index of an element into per-element vectors.
    pub fn element_index(&self, e: ElementRef) -> usize {
        let l = self.lines.len();
        match e {
            ElementRef::LineOrigin(i) => i,
            ElementRef::LineExtremity(i) => l + i,
            ElementRef::Generator(i) => 2 * l + i,
            ElementRef::Load(i) => 2 * l + self.generators.len() + i,
        }
    }

    /// Substation hosting an element.
    pub fn substation_of(&self, e: ElementRef) -> usize {
        match e {
            ElementRef::LineOrigin(i) => self.lines[i].from,
            ElementRef::LineExtremity(i) => self.lines[i].to,
            ElementRef::Generator(i) => self.generators[i].bus,
            ElementRef::Load(i) => self.loads[i].bus,
        }
    }

    /// Length of the observation vector `[gen | load | flow]`.
    pub fn observation_len(&self) -> usize {
        self.generators.len() + self.loads.len() + self.lines.len()
    }

    pub fn layout(&self) -> ObservationLayout {
        ObservationLayout::new(self)
    }
}

/// The three sensor groups an observation is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SensorGroup {
    Gen,
    Load,
    Flow,
}

impl SensorGroup {
    pub fn as_str(self) -> &'static str {
        match self {
            SensorGroup::Gen => "gen",
            SensorGroup::Load => "load",
            SensorGroup::Flow => "flow",
        }
    }
}

/// Maps each observation position to its group and element id.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObservationLayout {
    pub entries: Vec<(SensorGroup, usize)>,
    pub n_gen: usize,
    pub n_load: usize,
    pub n_flow: usize,
}

impl ObservationLayout {
    fn new(model: &GridModel) -> Self {
        let mut entries = Vec::with_capacity(model.observation_len());
        entries.extend((0..model.n_generators()).map(|i| (SensorGroup::Gen, i)));
        entries.extend((0..model.n_loads()).map(|i| (SensorGroup::Load, i)));
        entries.extend((0..model.n_lines()).map(|i| (SensorGroup::Flow, i)));
        ObservationLayout {
            entries,
            n_gen: model.n_generators(),
            n_load: model.n_loads(),
            n_flow: model.n_lines(),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn group(&self, index: usize) -> SensorGroup {
        self.entries[index].0
    }

    pub fn gen_index(&self, g: usize) -> usize {
        g
    }

    pub fn load_index(&self, d: usize) -> usize {
        self.n_gen + d
    }

    pub fn flow_index(&self, l: usize) -> usize {
        self.n_gen + self.n_load + l
    }

    pub fn flow_range(&self) -> std::ops::Range<usize> {
        self.n_gen + self.n_load..self.len()
    }

    /// Human-readable label such as `flow:3`.
    pub fn label(&self, index: usize) -> String {
        let (g, id) = self.entries[index];
        format!("{}:{id}", g.as_str())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const TWO_BUS: &str = r#"
        name = "two-bus"
        slack_bus = 1
        [[bus]]
        id = 1
        [[bus]]
        id = 2
        [[line]]
        from = 1
        to = 2
        reactance = 0.1
        limit = 10.0
        [[generator]]
        bus = 1
        p_max = 20.0
        [[load]]
        bus = 2
        base = 1.0
    "#;

    #[test]
    fn ieee14_dimensions() {
        let m = GridModel::ieee14().unwrap();
        assert_eq!(m.substations.len(), 14);
        assert_eq!(m.n_lines(), 20);
        assert_eq!(m.n_generators(), 5);
        assert_eq!(m.n_loads(), 11);
        assert_eq!(m.observation_len(), 36);
        assert_eq!(m.generators.iter().filter(|g| g.renewable).count(), 1);
    }

    #[test]
    fn two_bus_is_valid() {
        let m = GridModel::from_toml(TWO_BUS).unwrap();
        assert_eq!(m.n_lines(), 1);
        assert_eq!(m.substations[0].elements, vec![ElementRef::LineOrigin(0), ElementRef::Generator(0)]);
        assert_eq!(m.substations[1].elements, vec![ElementRef::LineExtremity(0), ElementRef::Load(0)]);
    }

    #[test]
    fn zero_reactance_rejected() {
        let text = TWO_BUS.replace("reactance = 0.1", "reactance = 0.0");
        let err = GridModel::from_toml(&text).unwrap_err();
        assert!(matches!(err, Error::Validation(ref m) if m.contains("reactance")), "{err}");
    }

    #[test]
    fn disconnected_rejected() {
        let text = format!("{TWO_BUS}\n[[bus]]\nid = 3\n[[load]]\nbus = 3\n");
        let err = GridModel::from_toml(&text).unwrap_err();
        assert!(err.to_string().contains("disconnected"), "{err}");
    }

    #[test]
    fn unknown_key_rejected() {
        let text = format!("colour = \"red\"\n{TWO_BUS}");
        assert!(matches!(GridModel::from_toml(&text), Err(Error::Parse(_))));
    }

    #[test]
    fn slack_needs_generator() {
        let text = TWO_BUS.replace("slack_bus = 1", "slack_bus = 2");
        assert!(GridModel::from_toml(&text).is_err());
    }

    #[test]
    fn layout_order() {
        let m = GridModel::ieee14().unwrap();
        let lay = m.layout();
        assert_eq!(lay.group(0), SensorGroup::Gen);
        assert_eq!(lay.group(5), SensorGroup::Load);
        assert_eq!(lay.group(16), SensorGroup::Flow);
        assert_eq!(lay.flow_range(), 16..36);
        assert_eq!(lay.label(17), "flow:1");
    }
}
