//! Grid states, moves and spatial relations.

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use consensus_core::{Proposal, ProposalKind};

use crate::WorldError;

pub type ObjectId = usize;

/// `(col, row)`; row 0 is the top of the grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cell {
    pub col: u32,
    pub row: u32,
}

impl Cell {
    pub const fn new(col: u32, row: u32) -> Self {
        Self { col, row }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Object {
    pub id: ObjectId,
    pub label: String,
    pub cell: Cell,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorldState {
    pub width: u32,
    pub height: u32,
    /// Sorted by id.
    pub objects: Vec<Object>,
}

impl Proposal for WorldState {
    fn kind(&self) -> ProposalKind {
        ProposalKind::WorldState
    }
}

impl WorldState {
    /// Validates bounds, one object per cell, unique ids and labels.
    pub fn new(width: u32, height: u32, mut objects: Vec<Object>) -> Result<Self, WorldError> {
        if width == 0 || height == 0 {
            return Err(WorldError::InvalidState("empty grid".into()));
        }
        objects.sort_by_key(|o| o.id);
        let mut cells = HashSet::new();
        let mut labels = HashSet::new();
        for (i, o) in objects.iter().enumerate() {
            if i > 0 && objects[i - 1].id == o.id {
                return Err(WorldError::InvalidState(format!("duplicate id {}", o.id)));
            }
            if o.cell.col >= width || o.cell.row >= height {
                return Err(WorldError::InvalidState(format!(
                    "object {} out of bounds",
                    o.id
                )));
            }
            if !cells.insert(o.cell) {
                return Err(WorldError::InvalidState(format!(
                    "cell ({}, {}) holds two objects",
                    o.cell.col, o.cell.row
                )));
            }
            if !labels.insert(o.label.as_str()) {
                return Err(WorldError::InvalidState(format!(
                    "duplicate label {:?}",
                    o.label
                )));
            }
        }
        Ok(Self {
            width,
            height,
            objects,
        })
    }

    pub fn object(&self, id: ObjectId) -> Option<&Object> {
        self.objects
            .binary_search_by_key(&id, |o| o.id)
            .ok()
            .map(|i| &self.objects[i])
    }

    pub fn occupant(&self, cell: Cell) -> Option<ObjectId> {
        self.objects.iter().find(|o| o.cell == cell).map(|o| o.id)
    }

    pub fn in_bounds(&self, cell: Cell) -> bool {
        cell.col < self.width && cell.row < self.height
    }

    pub fn ids(&self) -> impl Iterator<Item = ObjectId> + '_ {
        self.objects.iter().map(|o| o.id)
    }
}

/// Move `object` to `target`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Action {
    pub object: ObjectId,
    pub target: Cell,
}

/// Applies `action`. Moving onto the object's own cell is a no-op.
pub fn world_step(state: &WorldState, action: Action) -> Result<WorldState, WorldError> {
    if state.object(action.object).is_none() {
        return Err(WorldError::InvalidAction(format!(
            "no object {}",
            action.object
        )));
    }
    if !state.in_bounds(action.target) {
        return Err(WorldError::InvalidAction(format!(
            "({}, {}) is out of bounds",
            action.target.col, action.target.row
        )));
    }
    if let Some(other) = state
        .occupant(action.target)
        .filter(|&o| o != action.object)
    {
        return Err(WorldError::InvalidAction(format!(
            "({}, {}) is occupied by object {other}",
            action.target.col, action.target.row
        )));
    }
    let mut next = state.clone();
    for o in &mut next.objects {
        if o.id == action.object {
            o.cell = action.target;
        }
    }
    Ok(next)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Predicate {
    LeftOf,
    RightOf,
    Above,
    Below,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Axis {
    Horizontal,
    Vertical,
}

impl Predicate {
    pub const ALL: [Self; 4] = [Self::LeftOf, Self::RightOf, Self::Above, Self::Below];

    pub fn inverse(self) -> Self {
        match self {
            Self::LeftOf => Self::RightOf,
            Self::RightOf => Self::LeftOf,
            Self::Above => Self::Below,
            Self::Below => Self::Above,
        }
    }

    pub fn axis(self) -> Axis {
        match self {
            Self::LeftOf | Self::RightOf => Axis::Horizontal,
            Self::Above | Self::Below => Axis::Vertical,
        }
    }

    /// `LeftOf` compares columns, `Above` rows (row 0 on top).
    pub fn holds(self, subject: Cell, object: Cell) -> bool {
        match self {
            Self::LeftOf => subject.col < object.col,
            Self::RightOf => subject.col > object.col,
            Self::Above => subject.row < object.row,
            Self::Below => subject.row > object.row,
        }
    }

    pub fn keyword(self) -> &'static str {
        match self {
            Self::LeftOf => "left_of",
            Self::RightOf => "right_of",
            Self::Above => "above",
            Self::Below => "below",
        }
    }

    pub fn from_keyword(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|p| p.keyword() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Relation {
    pub subject: ObjectId,
    pub predicate: Predicate,
    pub object: ObjectId,
}

impl Relation {
    pub fn new(
        subject: ObjectId,
        predicate: Predicate,
        object: ObjectId,
    ) -> Result<Self, WorldError> {
        if subject == object {
            return Err(WorldError::InvalidGoal(format!(
                "object {subject} related to itself"
            )));
        }
        Ok(Self {
            subject,
            predicate,
            object,
        })
    }

    /// The same fact stated from the other object.
    pub fn inverse(self) -> Self {
        Self {
            subject: self.object,
            predicate: self.predicate.inverse(),
            object: self.subject,
        }
    }

    /// Evaluated on the true state; missing objects make it false.
    pub fn holds_in(&self, state: &WorldState) -> bool {
        match (state.object(self.subject), state.object(self.object)) {
            (Some(s), Some(o)) => self.predicate.holds(s.cell, o.cell),
            _ => false,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {}",
            self.subject,
            self.predicate.keyword(),
            self.object
        )
    }
}

/// Every pairwise relation that holds in `state`.
pub fn extract_relations(state: &WorldState) -> Result<BTreeSet<Relation>, WorldError> {
    if state.objects.len() < 2 {
        return Err(WorldError::TooFewObjects(state.objects.len()));
    }
    let mut out = BTreeSet::new();
    for a in &state.objects {
        for b in &state.objects {
            if a.id == b.id {
                continue;
            }
            for p in Predicate::ALL {
                if p.holds(a.cell, b.cell) {
                    out.insert(Relation {
                        subject: a.id,
                        predicate: p,
                        object: b.id,
                    });
                }
            }
        }
    }
    Ok(out)
}

/// True when every goal relation holds in `state`.
pub fn satisfies(state: &WorldState, goal: &[Relation]) -> bool {
    goal.iter().all(|r| r.holds_in(state))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn obj(id: ObjectId, label: &str, col: u32, row: u32) -> Object {
        Object {
            id,
            label: label.into(),
            cell: Cell::new(col, row),
        }
    }

    fn two(a: Cell, b: Cell) -> WorldState {
        WorldState::new(
            4,
            4,
            vec![
                Object {
                    id: 0,
                    label: "A".into(),
                    cell: a,
                },
                Object {
                    id: 1,
                    label: "B".into(),
                    cell: b,
                },
            ],
        )
        .unwrap()
    }

    #[test]
    fn horizontal_pair() {
        let rels = extract_relations(&two(Cell::new(0, 0), Cell::new(2, 0))).unwrap();
        let expect: BTreeSet<_> = [
            Relation::new(0, Predicate::LeftOf, 1).unwrap(),
            Relation::new(1, Predicate::RightOf, 0).unwrap(),
        ]
        .into();
        assert_eq!(rels, expect);
    }

    #[test]
    fn vertical_pair() {
        let rels = extract_relations(&two(Cell::new(1, 1), Cell::new(1, 3))).unwrap();
        let expect: BTreeSet<_> = [
            Relation::new(0, Predicate::Above, 1).unwrap(),
            Relation::new(1, Predicate::Below, 0).unwrap(),
        ]
        .into();
        assert_eq!(rels, expect);
    }

    #[test]
    fn state_invariants_are_checked() {
        assert!(WorldState::new(2, 2, vec![obj(0, "a", 2, 0)]).is_err());
        assert!(WorldState::new(2, 2, vec![obj(0, "a", 0, 0), obj(1, "b", 0, 0)]).is_err());
        assert!(WorldState::new(2, 2, vec![obj(0, "a", 0, 0), obj(1, "a", 1, 0)]).is_err());
        assert!(WorldState::new(2, 2, vec![obj(0, "a", 0, 0), obj(0, "b", 1, 0)]).is_err());
        let s = WorldState::new(3, 3, vec![obj(0, "a", 0, 0)]).unwrap();
        assert!(matches!(
            extract_relations(&s),
            Err(WorldError::TooFewObjects(1))
        ));
    }

    #[test]
    fn moves_follow_the_collision_rules() {
        let s = WorldState::new(
            5,
            5,
            vec![obj(0, "a", 0, 0), obj(1, "b", 1, 1), obj(2, "c", 4, 4)],
        )
        .unwrap();
        assert_eq!(
            world_step(
                &s,
                Action {
                    object: 1,
                    target: Cell::new(1, 1)
                }
            )
            .unwrap(),
            s
        );
        let moved = world_step(
            &s,
            Action {
                object: 0,
                target: Cell::new(3, 3),
            },
        )
        .unwrap();
        assert_eq!(moved.object(0).unwrap().cell, Cell::new(3, 3));
        assert_eq!(moved.object(1), s.object(1));
        assert_eq!(moved.object(2), s.object(2));
        assert!(world_step(
            &s,
            Action {
                object: 0,
                target: Cell::new(1, 1)
            }
        )
        .is_err());
        assert!(world_step(
            &s,
            Action {
                object: 0,
                target: Cell::new(5, 0)
            }
        )
        .is_err());
        assert!(world_step(
            &s,
            Action {
                object: 9,
                target: Cell::new(2, 2)
            }
        )
        .is_err());
    }
}
