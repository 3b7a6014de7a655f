use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::world::{extract_relations, Relation, WorldState};
use crate::WorldError;

/// A goal given as relations (text) or as a reference arrangement (image).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum GoalSpec {
    Text(Vec<Relation>),
    Image(WorldState),
}

impl GoalSpec {
    /// The relation set to satisfy. Image goals contribute every relation
    /// extracted from the reference.
    pub fn resolve(&self, state: &WorldState) -> Result<Vec<Relation>, WorldError> {
        let relations = match self {
            GoalSpec::Text(r) => r.clone(),
            GoalSpec::Image(reference) => {
                let mut a: Vec<_> = reference.ids().collect();
                let mut b: Vec<_> = state.ids().collect();
                a.sort_unstable();
                b.sort_unstable();
                if a != b {
                    return Err(WorldError::InvalidGoal(
                        "reference image has different objects".into(),
                    ));
                }
                extract_relations(reference)?.into_iter().collect()
            }
        };
        check_relations(&relations, state)?;
        Ok(relations)
    }
}

/// Ids exist and no relation is contradicted by another one.
pub fn check_relations(relations: &[Relation], state: &WorldState) -> Result<(), WorldError> {
    let set: HashSet<Relation> = relations.iter().copied().collect();
    for r in relations {
        if r.subject == r.object {
            return Err(WorldError::InvalidGoal(format!(
                "{r} relates an object to itself"
            )));
        }
        for id in [r.subject, r.object] {
            if state.object(id).is_none() {
                return Err(WorldError::InvalidGoal(format!(
                    "{r} names unknown object {id}"
                )));
            }
        }
        let flipped = Relation {
            predicate: r.predicate.inverse(),
            ..*r
        };
        let swapped = Relation {
            subject: r.object,
            object: r.subject,
            ..*r
        };
        if set.contains(&flipped) || set.contains(&swapped) {
            return Err(WorldError::InvalidGoal(format!("{r} is contradicted")));
        }
    }
    Ok(())
}
