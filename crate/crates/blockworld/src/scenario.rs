//! Random episodes and the scenario text format.
//!
//! A scenario file holds one `key = value` entry per line; `#` starts a
//! comment. Keys:
//!
//! ```text
//! width = 8
//! height = 8
//! object = <id> <col> <row> <label words...>
//! relation = <subject id> <left_of|right_of|above|below> <object id>
//! reference = <id> <col> <row>
//! view = <id> <col_min> <row_min> <col_max> <row_max> <confusion> <h|v|hv> <seed>
//! ```
//!
//! `reference` lines give an image goal (the arrangement to reproduce) and
//! cannot be mixed with `relation` lines. Without `view` lines the five
//! standard views are used.

use std::fmt::Write as _;

use rand::Rng;

use consensus_core::numeric::{hash_words, stream_rng};

use crate::goal::{check_relations, GoalSpec};
use crate::view::{standard_views, Region, ViewSpec};
use crate::world::{Cell, Object, ObjectId, Predicate, Relation, WorldState};
use crate::WorldError;

pub const LABELS: [&str; 8] = [
    "red bowl",
    "blue mug",
    "green block",
    "yellow cup",
    "purple plate",
    "orange box",
    "white jar",
    "black can",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub state: WorldState,
    pub goal: GoalSpec,
    pub views: Vec<ViewSpec>,
}

/// Shape of randomly generated episodes.
#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeSpec {
    pub width: u32,
    pub height: u32,
    pub objects: usize,
    pub relations: usize,
}

impl Default for EpisodeSpec {
    fn default() -> Self {
        Self {
            width: 8,
            height: 8,
            objects: 8,
            relations: 2,
        }
    }
}

/// A random arrangement plus a consistent goal whose relations all fail
/// initially. Deterministic in `(seed, episode)`.
pub fn random_episode(
    spec: &EpisodeSpec,
    seed: u64,
    episode: u64,
) -> Result<(WorldState, Vec<Relation>), WorldError> {
    let cells = (spec.width * spec.height) as usize;
    if spec.objects < 2 || spec.objects > LABELS.len() || spec.objects > cells {
        return Err(WorldError::InvalidConfig(format!(
            "{} objects on a {}x{} grid",
            spec.objects, spec.width, spec.height
        )));
    }
    let max_relations = spec.objects * (spec.objects - 1);
    if spec.relations == 0 || spec.relations > max_relations {
        return Err(WorldError::InvalidConfig(format!(
            "{} goal relations",
            spec.relations
        )));
    }
    let mut rng = stream_rng(hash_words(seed, [episode]), 1);
    let mut objects: Vec<Object> = Vec::with_capacity(spec.objects);
    while objects.len() < spec.objects {
        let cell = Cell::new(
            rng.random_range(0..spec.width),
            rng.random_range(0..spec.height),
        );
        if objects.iter().all(|o| o.cell != cell) {
            objects.push(Object {
                id: objects.len(),
                label: LABELS[objects.len()].to_string(),
                cell,
            });
        }
    }
    let state = WorldState::new(spec.width, spec.height, objects)?;
    let mut goal: Vec<Relation> = Vec::new();
    for _ in 0..10_000 {
        if goal.len() == spec.relations {
            break;
        }
        let s = rng.random_range(0..spec.objects);
        let o = rng.random_range(0..spec.objects - 1);
        let o = if o >= s { o + 1 } else { o };
        let r = Relation::new(s, Predicate::ALL[rng.random_range(0..4)], o)?;
        if r.holds_in(&state) || goal.contains(&r) || goal.contains(&r.inverse()) {
            continue;
        }
        let mut trial = goal.clone();
        trial.push(r);
        if check_relations(&trial, &state).is_ok() {
            goal = trial;
        }
    }
    if goal.len() < spec.relations {
        return Err(WorldError::InvalidConfig("could not draw a goal".into()));
    }
    Ok((state, goal))
}

fn axes_keyword(v: &ViewSpec) -> &'static str {
    match (v.horizontal, v.vertical) {
        (true, true) => "hv",
        (true, false) => "h",
        _ => "v",
    }
}

pub fn write_scenario(s: &Scenario) -> String {
    let mut out = String::new();
    writeln!(out, "width = {}", s.state.width).unwrap();
    writeln!(out, "height = {}", s.state.height).unwrap();
    for o in &s.state.objects {
        writeln!(
            out,
            "object = {} {} {} {}",
            o.id, o.cell.col, o.cell.row, o.label
        )
        .unwrap();
    }
    match &s.goal {
        GoalSpec::Text(rels) => {
            for r in rels {
                writeln!(out, "relation = {r}").unwrap();
            }
        }
        GoalSpec::Image(reference) => {
            for o in &reference.objects {
                writeln!(out, "reference = {} {} {}", o.id, o.cell.col, o.cell.row).unwrap();
            }
        }
    }
    for v in &s.views {
        let r = v.region;
        writeln!(
            out,
            "view = {} {} {} {} {} {} {} {}",
            v.id,
            r.col_min,
            r.row_min,
            r.col_max,
            r.row_max,
            v.label_confusion,
            axes_keyword(v),
            v.seed
        )
        .unwrap();
    }
    out
}

pub fn parse_scenario(text: &str) -> Result<Scenario, WorldError> {
    let mut width = None;
    let mut height = None;
    let mut objects = Vec::new();
    let mut relations = Vec::new();
    let mut reference: Vec<(ObjectId, Cell)> = Vec::new();
    let mut views = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let err = |message: String| WorldError::Parse {
            line: i + 1,
            message,
        };
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err("expected key = value".into()))?;
        let words: Vec<&str> = value.split_whitespace().collect();
        let num = |w: Option<&&str>, what: &str| -> Result<u64, WorldError> {
            let w = w.ok_or_else(|| err(format!("missing {what}")))?;
            w.parse().map_err(|_| err(format!("bad {what} {w:?}")))
        };
        match key.trim() {
            "width" => width = Some(num(words.first(), "width")? as u32),
            "height" => height = Some(num(words.first(), "height")? as u32),
            "object" => {
                if words.len() < 4 {
                    return Err(err("object needs id, col, row and a label".into()));
                }
                objects.push(Object {
                    id: num(words.first(), "id")? as ObjectId,
                    cell: Cell::new(
                        num(words.get(1), "col")? as u32,
                        num(words.get(2), "row")? as u32,
                    ),
                    label: words[3..].join(" "),
                });
            }
            "relation" => {
                let [s, p, o] = words.as_slice() else {
                    return Err(err("relation needs subject, predicate, object".into()));
                };
                let pred = Predicate::from_keyword(p)
                    .ok_or_else(|| err(format!("unknown predicate {p:?}")))?;
                let r = Relation::new(
                    num(Some(s), "subject")? as ObjectId,
                    pred,
                    num(Some(o), "object")? as ObjectId,
                )
                .map_err(|e| err(e.to_string()))?;
                relations.push(r);
            }
            "reference" => reference.push((
                num(words.first(), "id")? as ObjectId,
                Cell::new(
                    num(words.get(1), "col")? as u32,
                    num(words.get(2), "row")? as u32,
                ),
            )),
            "view" => {
                if words.len() != 8 {
                    return Err(err("view needs 8 fields".into()));
                }
                let confusion: f64 = words[5]
                    .parse()
                    .map_err(|_| err(format!("bad confusion {:?}", words[5])))?;
                let (h, v) = match words[6] {
                    "hv" | "vh" => (true, true),
                    "h" => (true, false),
                    "v" => (false, true),
                    other => return Err(err(format!("bad axes {other:?}"))),
                };
                let region = Region {
                    col_min: num(words.get(1), "col_min")? as u32,
                    row_min: num(words.get(2), "row_min")? as u32,
                    col_max: num(words.get(3), "col_max")? as u32,
                    row_max: num(words.get(4), "row_max")? as u32,
                };
                let view = ViewSpec::new(
                    num(words.first(), "id")? as usize,
                    region,
                    confusion,
                    h,
                    v,
                    num(words.get(7), "seed")?,
                )
                .map_err(|e| err(e.to_string()))?;
                views.push(view);
            }
            other => return Err(err(format!("unknown key {other:?}"))),
        }
    }
    let missing = |k: &str| WorldError::Parse {
        line: 0,
        message: format!("missing {k}"),
    };
    let width = width.ok_or_else(|| missing("width"))?;
    let height = height.ok_or_else(|| missing("height"))?;
    let state = WorldState::new(width, height, objects)?;
    let goal = match (relations.is_empty(), reference.is_empty()) {
        (false, true) => GoalSpec::Text(relations),
        (true, false) => {
            let mut objs = Vec::new();
            for (id, cell) in reference {
                let o = state.object(id).ok_or_else(|| {
                    WorldError::InvalidGoal(format!("reference names unknown object {id}"))
                })?;
                objs.push(Object { cell, ..o.clone() });
            }
            GoalSpec::Image(WorldState::new(width, height, objs)?)
        }
        (true, true) => return Err(missing("goal")),
        (false, false) => {
            return Err(WorldError::InvalidGoal(
                "relation and reference lines are exclusive".into(),
            ))
        }
    };
    goal.resolve(&state)?;
    if views.is_empty() {
        views = standard_views(width, height, 0.1)?;
    }
    Ok(Scenario { state, goal, views })
}
