//! Discrete topology actions, their change-sets, and the enumerated action space.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::model::{ElementRef, GridModel};
use super::powerflow::Topology;

/// Substations with fewer connected elements than this are never split.
pub const MIN_SPLIT_ELEMENTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Action {
    DoNothing,
    /// Assign every element of a substation to a busbar (aligned with
    /// `Substation::elements`).
    SetBusbars { substation: usize, assignment: Vec<u8> },
    ReconnectLine { line: usize },
    DisconnectLine { line: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Attribute {
    Busbar,
    Status,
}

/// One atomic change, e.g. "line 1 origin to busbar 1".
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Change {
    pub element: ElementRef,
    pub attribute: Attribute,
    /// Target busbar (1, 2) or status (1 connected, 0 disconnected).
    pub target: u8,
}

impl Change {
    /// Element-attribute pair the change acts on.
    pub fn key(&self) -> (ElementRef, Attribute) {
        (self.element, self.attribute)
    }
}

impl Action {
    pub fn is_do_nothing(&self) -> bool {
        matches!(self, Action::DoNothing)
    }

    /// The change-set `c^a`; empty for the do-nothing action.
    pub fn changes(&self, model: &GridModel) -> BTreeSet<Change> {
        match self {
            Action::DoNothing => BTreeSet::new(),
            Action::SetBusbars { substation, assignment } => model.substations[*substation]
                .elements
                .iter()
                .zip(assignment)
                .map(|(&element, &b)| Change { element, attribute: Attribute::Busbar, target: b })
                .collect(),
            Action::ReconnectLine { line } => BTreeSet::from([Change {
                element: ElementRef::LineOrigin(*line),
                attribute: Attribute::Status,
                target: 1,
            }]),
            Action::DisconnectLine { line } => BTreeSet::from([Change {
                element: ElementRef::LineOrigin(*line),
                attribute: Attribute::Status,
                target: 0,
            }]),
        }
    }

    /// Substations touched by the action, `v^a`.
    pub fn substations(&self, model: &GridModel) -> BTreeSet<usize> {
        match self {
            Action::DoNothing => BTreeSet::new(),
            Action::SetBusbars { substation, .. } => BTreeSet::from([*substation]),
            Action::ReconnectLine { line } | Action::DisconnectLine { line } => {
                let l = &model.lines[*line];
                BTreeSet::from([l.from, l.to])
            }
        }
    }

    /// Applies the action to a topology copy without any legality checks.
    pub fn apply_to(&self, model: &GridModel, topo: &mut Topology) {
        match self {
            Action::DoNothing => {}
            Action::SetBusbars { substation, assignment } => {
                for (&e, &b) in model.substations[*substation].elements.iter().zip(assignment) {
                    topo.busbar[model.element_index(e)] = b;
                }
            }
            Action::ReconnectLine { line } => topo.line_in_service[*line] = true,
            Action::DisconnectLine { line } => topo.line_in_service[*line] = false,
        }
    }

    /// True when the action moves `topo` back toward the reference topology.
    pub fn restores_reference(&self, model: &GridModel, topo: &Topology) -> bool {
        match self {
            Action::SetBusbars { substation, assignment } => {
                assignment.iter().all(|&b| b == 1) && topo.is_split(model, *substation)
            }
            Action::ReconnectLine { line } => !topo.line_in_service[*line],
            _ => false,
        }
    }

    pub fn describe(&self, model: &GridModel) -> String {
        match self {
            Action::DoNothing => "do-nothing".into(),
            Action::SetBusbars { substation, assignment } => {
                let bb2: Vec<String> = model.substations[*substation]
                    .elements
                    .iter()
                    .zip(assignment)
                    .filter(|(_, &b)| b == 2)
                    .map(|(e, _)| e.to_string())
                    .collect();
                if bb2.is_empty() {
                    format!("merge sub{}", model.substations[*substation].id)
                } else {
                    format!("split sub{} [{}]", model.substations[*substation].id, bb2.join(","))
                }
            }
            Action::ReconnectLine { line } => format!("reconnect line{line}"),
            Action::DisconnectLine { line } => format!("disconnect line{line}"),
        }
    }
}

/// Index into an [`ActionSpace`].
pub type ActionId = usize;

/// Fixed, ordered set of defender actions. Id 0 is always do-nothing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionSpace {
    actions: Vec<Action>,
}

impl ActionSpace {
    /// Do-nothing, then per splittable substation every two-busbar split
    /// (modulo busbar symmetry, each busbar keeping at least two elements and
    /// one line end) followed by its merge-back action, then one reconnection
    /// per line.
    pub fn enumerate(model: &GridModel) -> Self {
        let mut actions = vec![Action::DoNothing];
        for (s, sub) in model.substations.iter().enumerate() {
            let n = sub.elements.len();
            if n < MIN_SPLIT_ELEMENTS {
                continue;
            }
            // Element 0 pinned to busbar 1 removes the mirror duplicates.
            for mask in 1u32..(1 << (n - 1)) {
                let assignment: Vec<u8> =
                    (0..n).map(|i| if i > 0 && mask >> (i - 1) & 1 == 1 { 2 } else { 1 }).collect();
                if valid_split(&sub.elements, &assignment) {
                    actions.push(Action::SetBusbars { substation: s, assignment });
                }
            }
            actions.push(Action::SetBusbars { substation: s, assignment: vec![1; n] });
        }
        for l in 0..model.n_lines() {
            actions.push(Action::ReconnectLine { line: l });
        }
        ActionSpace { actions }
    }

    pub fn from_actions(actions: Vec<Action>) -> Self {
        assert!(matches!(actions.first(), Some(Action::DoNothing)), "action 0 must be do-nothing");
        ActionSpace { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn get(&self, id: ActionId) -> &Action {
        &self.actions[id]
    }

    pub fn iter(&self) -> impl Iterator<Item = (ActionId, &Action)> {
        self.actions.iter().enumerate()
    }

    pub fn position(&self, action: &Action) -> Option<ActionId> {
        self.actions.iter().position(|a| a == action)
    }
}

fn valid_split(elements: &[ElementRef], assignment: &[u8]) -> bool {
    [1u8, 2].iter().all(|&bb| {
        let on: Vec<_> = elements.iter().zip(assignment).filter(|(_, &b)| b == bb).collect();
        on.len() >= 2
            && on
                .iter()
                .any(|(e, _)| matches!(e, ElementRef::LineOrigin(_) | ElementRef::LineExtremity(_)))
    })
}
