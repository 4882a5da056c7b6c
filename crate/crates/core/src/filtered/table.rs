use std::collections::BTreeMap;

use serde_json::{json, Value};

use crate::linalg::{FGAbelianGroup, GroupType};

use super::CoeffRing;

/// `π_n F^i` and `π_n gr^i` on a rectangle of degrees and weights; absent
/// entries are zero. Over Q only the free rank is kept.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigradedHomotopyTable {
    pub ring: CoeffRing,
    pub degrees: (i64, i64),
    pub weights: (i64, i64),
    /// `(degree, weight) → π_n F^i`.
    pub levels: BTreeMap<(i64, i64), GroupType>,
    /// `(degree, weight) → π_n gr^i`.
    pub graded: BTreeMap<(i64, i64), GroupType>,
}

impl BigradedHomotopyTable {
    pub fn new(ring: CoeffRing, degrees: (i64, i64), weights: (i64, i64)) -> Self {
        BigradedHomotopyTable { ring, degrees, weights, levels: BTreeMap::new(), graded: BTreeMap::new() }
    }

    fn reduce(&self, g: &FGAbelianGroup) -> GroupType {
        match self.ring {
            CoeffRing::Q => GroupType::free(g.free_rank()),
            _ => g.group_type(),
        }
    }

    pub fn insert_level(&mut self, n: i64, i: i64, g: &FGAbelianGroup) {
        let t = self.reduce(g);
        if !t.is_zero() {
            self.levels.insert((n, i), t);
        }
    }

    pub fn insert_graded(&mut self, n: i64, i: i64, g: &FGAbelianGroup) {
        let t = self.reduce(g);
        if !t.is_zero() {
            self.graded.insert((n, i), t);
        }
    }

    pub fn level(&self, n: i64, i: i64) -> GroupType {
        self.levels.get(&(n, i)).cloned().unwrap_or_else(GroupType::zero)
    }

    pub fn graded_at(&self, n: i64, i: i64) -> GroupType {
        self.graded.get(&(n, i)).cloned().unwrap_or_else(GroupType::zero)
    }

    pub fn column(&self, i: i64) -> BTreeMap<i64, GroupType> {
        self.levels.iter().filter(|((_, w), _)| *w == i).map(|((n, _), g)| (*n, g.clone())).collect()
    }

    fn render(&self, g: &GroupType) -> String {
        match self.ring {
            CoeffRing::Q => match g.free_rank {
                1 => "Q".into(),
                r => format!("Q^{r}"),
            },
            _ => g.to_string(),
        }
    }

    pub fn to_json(&self) -> Value {
        let entries = |m: &BTreeMap<(i64, i64), GroupType>| -> Vec<Value> {
            m.iter()
                .map(|((n, i), g)| json!({"degree": n, "weight": i, "group": self.render(g), "type": g}))
                .collect()
        };
        json!({
            "ring": self.ring,
            "degrees": [self.degrees.0, self.degrees.1],
            "weights": [self.weights.0, self.weights.1],
            "levels": entries(&self.levels),
            "graded": entries(&self.graded),
        })
    }
}
