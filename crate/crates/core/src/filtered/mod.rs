//! Decreasing filtrations `F^{i+1} → F^i` of chain complexes over Z, Z/N
//! or Q, on a finite weight window with explicit policies outside it.

mod chain;
mod examples;
mod table;

use std::collections::BTreeMap;

use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::linalg::{preimage_quotient, FGAbelianGroup, GradedAbelianGroup, IntMatrix, LeftSolver};

pub use chain::{cone, ChainComplex, ChainMap, Homology};
pub use examples::{
    cyclic_fixed_points_via_n_series, double_speed_map, ins, n_series_oracle, rational_tc_sphere, z_tate,
    PolynomialFiltered, ZTate,
};
pub use table::BigradedHomotopyTable;

/// Largest weight window produced by constructions.
pub const MAX_WINDOW: i64 = 256;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FilteredError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("not a chain complex: {0}")]
    NotAComplex(String),
    #[error("not a chain map: {0}")]
    NotAChainMap(String),
    #[error("transition does not commute with the map at weight {0}")]
    NotFiltered(i64),
    #[error("not in the Postnikov heart: H_{degree}(F^{weight}) ≠ 0")]
    NotInHeart { weight: i64, degree: i64 },
    #[error("weight window of size {0} exceeds the bound")]
    WindowOverflow(i64),
    #[error("tensor needs one levelwise free factor")]
    NonFlat,
    #[error("coefficient rings differ: {0:?} vs {1:?}")]
    RingMismatch(CoeffRing, CoeffRing),
    #[error("unsupported: {0}")]
    Unsupported(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoeffRing {
    Z,
    /// Z/N, with groups carrying the relations N·e.
    Zmod(u64),
    /// Q, modelled by Z-lattices; only free ranks of homology are read.
    Q,
}

impl CoeffRing {
    pub fn unit(&self) -> FGAbelianGroup {
        self.free(1)
    }

    pub fn free(&self, n: usize) -> FGAbelianGroup {
        match self {
            CoeffRing::Zmod(m) => FGAbelianGroup::free_mod(n, &BigInt::from(*m)),
            _ => FGAbelianGroup::free(n),
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Z" | "z" => Some(CoeffRing::Z),
            "Q" | "q" => Some(CoeffRing::Q),
            _ => {
                let n = s.strip_prefix("Z/").or_else(|| s.strip_prefix("z/"))?.parse().ok()?;
                (n >= 2).then_some(CoeffRing::Zmod(n))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Policy {
    Constant,
    Zero,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FilteredComplex {
    pub ring: CoeffRing,
    pub window: (i64, i64),
    #[serde(rename = "policy")]
    pub below: Policy,
    #[serde(default = "zero_policy")]
    pub above: Policy,
    levels: BTreeMap<i64, ChainComplex>,
    /// `transitions[i]` is `t_i: F^{i+1} → F^i` for `w_min ≤ i < w_max`.
    transitions: BTreeMap<i64, ChainMap>,
}

fn zero_policy() -> Policy {
    Policy::Zero
}

impl FilteredComplex {
    pub fn new(
        ring: CoeffRing,
        w_min: i64,
        below: Policy,
        above: Policy,
        levels: Vec<ChainComplex>,
        transitions: Vec<ChainMap>,
    ) -> Result<Self, FilteredError> {
        if levels.is_empty() || transitions.len() + 1 != levels.len() {
            return Err(FilteredError::Shape(format!("{} levels, {} transitions", levels.len(), transitions.len())));
        }
        let w_max = w_min + levels.len() as i64 - 1;
        let x = FilteredComplex {
            ring,
            window: (w_min, w_max),
            below,
            above,
            levels: levels.into_iter().enumerate().map(|(k, c)| (w_min + k as i64, c.prune())).collect(),
            transitions: transitions.into_iter().enumerate().map(|(k, t)| (w_min + k as i64, t.prune())).collect(),
        };
        x.validate()?;
        Ok(x)
    }

    pub fn zero(ring: CoeffRing) -> Self {
        FilteredComplex {
            ring,
            window: (0, 0),
            below: Policy::Zero,
            above: Policy::Zero,
            levels: [(0, ChainComplex::zero())].into(),
            transitions: BTreeMap::new(),
        }
    }

    /// The constant filtration `F^i = C` for every `i`.
    pub fn constant(ring: CoeffRing, c: ChainComplex) -> Self {
        FilteredComplex {
            ring,
            window: (0, 0),
            below: Policy::Constant,
            above: Policy::Constant,
            levels: [(0, c.prune())].into(),
            transitions: BTreeMap::new(),
        }
    }

    /// Levels `M_i` placed in degree `i`, zero transitions.
    pub fn discrete(ring: CoeffRing, m: &GradedAbelianGroup) -> Self {
        let (Some(&lo), Some(&hi)) = (m.0.keys().next(), m.0.keys().last()) else {
            return Self::zero(ring);
        };
        let levels = (lo..=hi).map(|i| ChainComplex::concentrated(i, m.get(i))).collect();
        let transitions = (lo..hi).map(|_| ChainMap::zero()).collect();
        Self::new(ring, lo, Policy::Zero, Policy::Zero, levels, transitions).expect("zero transitions")
    }

    pub fn w_min(&self) -> i64 {
        self.window.0
    }

    pub fn w_max(&self) -> i64 {
        self.window.1
    }

    pub fn validate(&self) -> Result<(), FilteredError> {
        let (a, b) = self.window;
        if b < a || self.levels.len() as i64 != b - a + 1 {
            return Err(FilteredError::Shape("window does not match levels".into()));
        }
        for (i, c) in &self.levels {
            c.validate().map_err(|e| FilteredError::NotAComplex(format!("weight {i}: {e}")))?;
        }
        for i in a..b {
            let t = self.transitions.get(&i).cloned().unwrap_or_default();
            t.validate(&self.level(i + 1), &self.level(i))
                .map_err(|e| FilteredError::NotAChainMap(format!("t_{i}: {e}")))?;
        }
        Ok(())
    }

    pub fn level(&self, i: i64) -> ChainComplex {
        let (a, b) = self.window;
        if i < a {
            match self.below {
                Policy::Constant => self.levels[&a].clone(),
                Policy::Zero => ChainComplex::zero(),
            }
        } else if i > b {
            match self.above {
                Policy::Constant => self.levels[&b].clone(),
                Policy::Zero => ChainComplex::zero(),
            }
        } else {
            self.levels[&i].clone()
        }
    }

    /// `t_i: F^{i+1} → F^i`.
    pub fn transition(&self, i: i64) -> ChainMap {
        let (a, b) = self.window;
        if i < a {
            match self.below {
                Policy::Constant => ChainMap::identity(&self.levels[&a]),
                Policy::Zero => ChainMap::zero(),
            }
        } else if i >= b {
            match self.above {
                Policy::Constant => ChainMap::identity(&self.levels[&b]),
                Policy::Zero => ChainMap::zero(),
            }
        } else {
            self.transitions.get(&i).cloned().unwrap_or_default()
        }
    }

    /// Same object, with levels materialized on `[a, b] ⊇ window`.
    pub fn with_window(&self, a: i64, b: i64) -> Self {
        let (a, b) = (a.min(self.window.0), b.max(self.window.1));
        FilteredComplex {
            ring: self.ring,
            window: (a, b),
            below: self.below,
            above: self.above,
            levels: (a..=b).map(|i| (i, self.level(i))).collect(),
            transitions: (a..b).map(|i| (i, self.transition(i))).collect(),
        }
    }

    pub fn graded_piece(&self, i: i64) -> ChainComplex {
        cone(&self.transition(i), &self.level(i + 1), &self.level(i)).0
    }

    pub fn underlying(&self) -> ChainComplex {
        match self.below {
            Policy::Constant => self.levels[&self.window.0].clone(),
            Policy::Zero => ChainComplex::zero(),
        }
    }

    fn acyclic(&self, c: &ChainComplex) -> bool {
        c.degrees().iter().all(|&n| {
            let h = c.homology(n);
            match self.ring {
                CoeffRing::Q => h.free_rank() == 0,
                _ => h.is_trivial(),
            }
        })
    }

    /// `lim F^i` and `lim¹` vanish. Above the window the tower is either
    /// zero or constant with identity maps, so `lim¹ = 0` and `lim = F^{w_max}`.
    pub fn is_complete(&self) -> bool {
        match self.above {
            Policy::Zero => true,
            Policy::Constant => self.acyclic(&self.levels[&self.window.1]),
        }
    }

    pub fn shift(&self, k: i64) -> Self {
        FilteredComplex {
            levels: self.levels.iter().map(|(i, c)| (*i, c.shift(k))).collect(),
            transitions: self.transitions.iter().map(|(i, t)| (*i, shift_map(t, k))).collect(),
            ..self.clone()
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Result<Self, FilteredError> {
        if self.ring != other.ring {
            return Err(FilteredError::RingMismatch(self.ring, other.ring));
        }
        let (a, b) = common_window(&[self, other]);
        let (x, y) = (self.with_window(a, b), other.with_window(a, b));
        Ok(FilteredComplex {
            ring: self.ring,
            window: (a, b),
            below: join(self.below, other.below),
            above: join(self.above, other.above),
            levels: (a..=b).map(|i| (i, x.level(i).direct_sum(&y.level(i)))).collect(),
            transitions: (a..b)
                .map(|i| (i, sum_maps(&x.transition(i), &y.transition(i), &x.level(i + 1), &y.level(i + 1), &x.level(i), &y.level(i))))
                .collect(),
        })
    }

    pub fn homology(&self, n: i64, i: i64) -> FGAbelianGroup {
        self.level(i).homology(n)
    }

    pub fn table(&self, degrees: (i64, i64), weights: (i64, i64)) -> BigradedHomotopyTable {
        let mut t = BigradedHomotopyTable::new(self.ring, degrees, weights);
        for i in weights.0..=weights.1 {
            let lvl = self.level(i);
            let gr = self.graded_piece(i);
            for n in degrees.0..=degrees.1 {
                t.insert_level(n, i, &lvl.homology(n));
                t.insert_graded(n, i, &gr.homology(n));
            }
        }
        t
    }

    /// Degree range `[lo, hi]` met by any level, if any.
    pub fn degree_range(&self) -> Option<(i64, i64)> {
        let rs: Vec<(i64, i64)> = self.levels.values().filter_map(|c| c.range()).collect();
        Some((rs.iter().map(|r| r.0).min()?, rs.iter().map(|r| r.1).max()?))
    }

    /// Postnikov truncation: weight `i` becomes `τ_{≥i+k}F^i`.
    pub fn truncate_postnikov(&self, k: i64) -> Self {
        let (mut a, mut b) = self.window;
        if self.below == Policy::Constant {
            if let Some((lo, _)) = self.levels[&a].range() {
                a = a.min(lo - k);
            }
        }
        let mut above = self.above;
        if self.above == Policy::Constant {
            if let Some((_, hi)) = self.levels[&b].range() {
                b = b.max(hi - k + 1);
            }
            above = Policy::Zero;
        }
        self.truncate_by(a, b, above, |i| i + k)
    }

    /// Neutral truncation: every level becomes `τ_{≥k}F^i`.
    pub fn truncate_neutral(&self, k: i64) -> Self {
        let (a, b) = self.window;
        self.truncate_by(a, b, self.above, |_| k)
    }

    fn truncate_by(&self, a: i64, b: i64, above: Policy, cut: impl Fn(i64) -> i64) -> Self {
        let truncs: BTreeMap<i64, (ChainComplex, ChainMap)> =
            (a..=b).map(|i| (i, self.level(i).truncate_above(cut(i)))).collect();
        let transitions = (a..b)
            .map(|i| {
                let (s, si) = &truncs[&(i + 1)];
                let (t, ti) = &truncs[&i];
                let full = self.transition(i);
                (i, truncation_map(&full, s, si, &self.level(i + 1), t, ti, &self.level(i)))
            })
            .collect();
        FilteredComplex {
            ring: self.ring,
            window: (a, b),
            below: self.below,
            above,
            levels: truncs.into_iter().map(|(i, (c, _))| (i, c)).collect(),
            transitions,
        }
    }

    /// `i ↦ H_i(F^i)`, defined when `H_n(F^i) = 0` for `n ≠ i`.
    pub fn heart_pi(&self) -> Result<GradedAbelianGroup, FilteredError> {
        let (a, b) = self.window;
        let mut out = GradedAbelianGroup::new();
        for i in a..=b {
            let c = &self.levels[&i];
            for n in c.degrees() {
                if n != i && !c.homology(n).is_trivial() {
                    return Err(FilteredError::NotInHeart { weight: i, degree: n });
                }
            }
            out.insert(i, c.homology(i));
        }
        let edges = [(self.below, a, a - 1), (self.above, b, b + 1)];
        for (policy, edge, w) in edges {
            if policy == Policy::Constant {
                if let Some(n) = self.levels[&edge].degrees().into_iter().find(|&n| !self.levels[&edge].homology(n).is_trivial()) {
                    return Err(FilteredError::NotInHeart { weight: if n == w { w + (w - edge) } else { w }, degree: n });
                }
            }
        }
        Ok(out)
    }
}

/// Weight `i` is `τ_{≥2i}C`, transitions the inclusions.
pub fn double_speed_whitehead(ring: CoeffRing, c: &ChainComplex) -> FilteredComplex {
    let Some((lo, hi)) = c.range() else {
        return FilteredComplex::zero(ring);
    };
    let (a, b) = (lo.div_euclid(2), hi.div_euclid(2));
    let truncs: Vec<(ChainComplex, ChainMap)> = (a..=b).map(|i| c.truncate_above(2 * i)).collect();
    let id = ChainMap::identity(c);
    let transitions = (0..truncs.len() - 1)
        .map(|k| {
            let (s, si) = &truncs[k + 1];
            let (t, ti) = &truncs[k];
            truncation_map(&id, s, si, c, t, ti, c)
        })
        .collect();
    let levels = truncs.into_iter().map(|(x, _)| x).collect();
    FilteredComplex::new(ring, a, Policy::Constant, Policy::Zero, levels, transitions)
        .expect("truncations of a valid complex")
}

/// The map `τC → τD` induced by `f: C → D` on truncations with inclusions
/// `ci`, `di` (the target truncation must be at most the source one).
fn truncation_map(
    f: &ChainMap,
    tc: &ChainComplex,
    ci: &ChainMap,
    c: &ChainComplex,
    td: &ChainComplex,
    di: &ChainMap,
    d: &ChainComplex,
) -> ChainMap {
    let mut out = ChainMap::zero();
    for n in tc.degrees() {
        if td.ngens(n) == 0 {
            continue;
        }
        let img = ci.get(n, tc, c).mul(&f.get(n, c, d));
        let solver = LeftSolver::new(&di.get(n, td, d));
        let rows = img
            .row_iter()
            .map(|r| solver.solve(r).expect("truncation map lands in the target truncation"))
            .collect();
        out.maps.insert(n, IntMatrix::from_rows(td.ngens(n), rows));
    }
    out.prune()
}

fn shift_map(f: &ChainMap, k: i64) -> ChainMap {
    ChainMap { maps: f.maps.iter().map(|(n, m)| (n + k, m.clone())).collect() }
}

fn sum_maps(
    f: &ChainMap,
    g: &ChainMap,
    fs: &ChainComplex,
    gs: &ChainComplex,
    ft: &ChainComplex,
    gt: &ChainComplex,
) -> ChainMap {
    let mut degs: Vec<i64> = fs.degrees();
    degs.extend(gs.degrees());
    degs.sort();
    degs.dedup();
    let mut out = ChainMap::zero();
    for n in degs {
        out.maps.insert(n, IntMatrix::block_diag(&[&f.get(n, fs, ft), &g.get(n, gs, gt)]));
    }
    out.prune()
}

fn join(a: Policy, b: Policy) -> Policy {
    if a == Policy::Zero && b == Policy::Zero {
        Policy::Zero
    } else {
        Policy::Constant
    }
}

/// Smallest window containing all inputs on which every mixed policy has
/// already switched: one extra weight on a side where policies differ.
fn common_window(xs: &[&FilteredComplex]) -> (i64, i64) {
    let a = xs.iter().map(|x| x.window.0).min().unwrap();
    let b = xs.iter().map(|x| x.window.1).max().unwrap();
    let mixed_below = xs.iter().any(|x| x.below != xs[0].below);
    let mixed_above = xs.iter().any(|x| x.above != xs[0].above);
    (a - mixed_below as i64, b + mixed_above as i64)
}

/// Levelwise chain maps `X → Y` commuting with transitions.
#[derive(Clone, Debug)]
pub struct FilteredMap {
    pub src: FilteredComplex,
    pub dst: FilteredComplex,
    maps: BTreeMap<i64, ChainMap>,
}

impl FilteredMap {
    /// Maps are given per weight on the common window; missing weights
    /// are zero. Outside the window the edge map is reused when both sides
    /// are constant there.
    pub fn new(src: &FilteredComplex, dst: &FilteredComplex, maps: BTreeMap<i64, ChainMap>) -> Result<Self, FilteredError> {
        if src.ring != dst.ring {
            return Err(FilteredError::RingMismatch(src.ring, dst.ring));
        }
        let (a, b) = common_window(&[src, dst]);
        let f = FilteredMap { src: src.with_window(a, b), dst: dst.with_window(a, b), maps };
        f.validate()?;
        Ok(f)
    }

    /// Build from a rule evaluated on each weight of the common window.
    pub fn levelwise(
        src: &FilteredComplex,
        dst: &FilteredComplex,
        rule: impl Fn(i64, &ChainComplex, &ChainComplex) -> ChainMap,
    ) -> Result<Self, FilteredError> {
        let (a, b) = common_window(&[src, dst]);
        let maps = (a..=b).map(|i| (i, rule(i, &src.level(i), &dst.level(i)).prune())).collect();
        Self::new(src, dst, maps)
    }

    pub fn identity(x: &FilteredComplex) -> Self {
        Self::levelwise(x, x, |_, c, _| ChainMap::identity(c)).expect("identity")
    }

    pub fn window(&self) -> (i64, i64) {
        self.src.window
    }

    pub fn at(&self, i: i64) -> ChainMap {
        let (a, b) = self.window();
        let edge = |w: i64, p: Policy, q: Policy| {
            if p == Policy::Constant && q == Policy::Constant {
                self.maps.get(&w).cloned().unwrap_or_default()
            } else {
                ChainMap::zero()
            }
        };
        if i < a {
            edge(a, self.src.below, self.dst.below)
        } else if i > b {
            edge(b, self.src.above, self.dst.above)
        } else {
            self.maps.get(&i).cloned().unwrap_or_default()
        }
    }

    pub fn validate(&self) -> Result<(), FilteredError> {
        let (a, b) = self.window();
        for i in a..=b {
            self.at(i)
                .validate(&self.src.level(i), &self.dst.level(i))
                .map_err(|e| FilteredError::NotAChainMap(format!("weight {i}: {e}")))?;
        }
        for i in a - 1..=b {
            let (s1, s0) = (self.src.level(i + 1), self.src.level(i));
            let (d1, d0) = (self.dst.level(i + 1), self.dst.level(i));
            let lhs = self.at(i + 1).compose(&self.dst.transition(i), &s1, &d1, &d0);
            let rhs = self.src.transition(i).compose(&self.at(i), &s1, &s0, &d0);
            for n in s1.degrees() {
                let diff = lhs.get(n, &s1, &d0).sub(&rhs.get(n, &s1, &d0));
                if d0.group(n).rows_are_zero(&diff).is_some() {
                    return Err(FilteredError::NotFiltered(i));
                }
            }
        }
        Ok(())
    }

    pub fn cofiber(&self) -> FilteredComplex {
        let (a, b) = self.window();
        let (x, y) = (&self.src, &self.dst);
        let levels = (a..=b).map(|i| (i, cone(&self.at(i), &x.level(i), &y.level(i)).0)).collect();
        let transitions = (a..b)
            .map(|i| {
                let c1 = cone(&self.at(i + 1), &x.level(i + 1), &y.level(i + 1)).0;
                let c0 = cone(&self.at(i), &x.level(i), &y.level(i)).0;
                let mut t = ChainMap::zero();
                for n in c1.degrees() {
                    let tb = y.transition(i).get(n, &y.level(i + 1), &y.level(i));
                    let ta = x.transition(i).get(n - 1, &x.level(i + 1), &x.level(i));
                    let m = IntMatrix::block_diag(&[&tb, &ta]);
                    debug_assert_eq!((m.rows(), m.cols()), (c1.ngens(n), c0.ngens(n)));
                    t.maps.insert(n, m);
                }
                (i, t.prune())
            })
            .collect();
        FilteredComplex {
            ring: x.ring,
            window: (a, b),
            below: join(x.below, y.below),
            above: join(x.above, y.above),
            levels,
            transitions,
        }
    }

    pub fn fiber(&self) -> FilteredComplex {
        self.cofiber().shift(-1)
    }

    /// Exactness of `H(X) → H(Y) → H(cofiber) → H(X[−1])` at every weight
    /// and degree in the given ranges, by lattice containment both ways.
    pub fn check_long_exact_sequence(&self, degrees: (i64, i64), weights: (i64, i64)) -> Result<(), String> {
        for i in weights.0..=weights.1 {
            let (x, y) = (self.src.level(i), self.dst.level(i));
            let f = self.at(i);
            let (c, incl, proj) = cone(&f, &x, &y);
            let x1 = x.shift(1);
            for n in degrees.0..=degrees.1 {
                let steps = [
                    (f.on_homology(n, &x, &y), incl.on_homology(n, &y, &c), "Y"),
                    (incl.on_homology(n, &y, &c), proj.on_homology(n, &c, &x1), "cofiber"),
                    (proj.on_homology(n + 1, &c, &x1), f.on_homology(n, &x, &y), "X"),
                ];
                for (into, out, at) in steps {
                    if !exact_at(&into, &out) {
                        return Err(format!("not exact at H_{n}({at}) in weight {i}"));
                    }
                }
            }
        }
        Ok(())
    }
}

/// `ker(out) = im(into)` as subgroups of the middle group.
fn exact_at(into: &crate::linalg::GroupHom, out: &crate::linalg::GroupHom) -> bool {
    let mid = &out.src;
    let m = mid.ngens();
    if m == 0 {
        return true;
    }
    let image = into.matrix.vstack(mid.relations());
    let (kernel, _) = preimage_quotient(&out.matrix, out.dst.relations(), &IntMatrix::zeros(0, m)).expect("no relations");
    let (ki, ik) = (LeftSolver::new(&kernel), LeftSolver::new(&image));
    image.row_iter().all(|r| ki.contains(r)) && kernel.row_iter().all(|r| ik.contains(r))
}

/// Homotopy pullback of `f: X → Z ← Y: g`, the fiber of `(f, −g)`.
pub fn pullback(f: &FilteredMap, g: &FilteredMap) -> Result<FilteredComplex, FilteredError> {
    let sum = f.src.direct_sum(&g.src)?;
    let (a, b) = common_window(&[&sum, &f.dst, &g.dst]);
    let (a, b) = (a.min(f.window().0).min(g.window().0), b.max(f.window().1).max(g.window().1));
    let z = f.dst.with_window(a, b);
    let minus = BigInt::from(-1);
    FilteredMap::levelwise(&sum, &z, |i, _, _| {
        let (x, y) = (f.src.level(i), g.src.level(i));
        let (zi, zj) = (f.dst.level(i), g.dst.level(i));
        let fi = f.at(i);
        let gi = g.at(i).scale(&minus);
        let mut out = ChainMap::zero();
        let mut degs = x.degrees();
        degs.extend(y.degrees());
        degs.sort();
        degs.dedup();
        for n in degs {
            out.maps.insert(n, fi.get(n, &x, &zi).vstack(&gi.get(n, &y, &zj)));
        }
        out
    })
    .map(|h| h.fiber())
}

/// Day convolution `F^n = colim_{i+j≥n} X^i ⊗ Y^j`, computed as the cofiber
/// of the difference map between adjacent antidiagonals.
pub fn day_tensor(x: &FilteredComplex, y: &FilteredComplex) -> Result<FilteredComplex, FilteredError> {
    if x.ring != y.ring {
        return Err(FilteredError::RingMismatch(x.ring, y.ring));
    }
    if let CoeffRing::Zmod(_) = x.ring {
        return Err(FilteredError::Unsupported("Day tensor over Z/N".into()));
    }
    if x.above != Policy::Zero || y.above != Policy::Zero {
        return Err(FilteredError::Unsupported("Day tensor needs levels vanishing above the window".into()));
    }
    let (a, b) = (x.w_min() + y.w_min(), x.w_max() + y.w_max());
    if b - a + 1 > MAX_WINDOW {
        return Err(FilteredError::WindowOverflow(b - a + 1));
    }
    let x_free = (x.w_min()..=x.w_max()).all(|i| x.level(i).is_levelwise_free());
    let y_free = (y.w_min()..=y.w_max()).all(|i| y.level(i).is_levelwise_free());
    if !x_free && !y_free {
        return Err(FilteredError::NonFlat);
    }
    let below = if x.below == Policy::Zero || y.below == Policy::Zero { Policy::Zero } else { Policy::Constant };
    let ymax = y.w_max();
    let xmax = x.w_max();
    // antidiagonal i + j = n, i ∈ [n − ymax, xmax]
    let diag = |n: i64| -> (ChainComplex, Vec<(i64, ChainComplex, ChainComplex, ChainComplex)>) {
        let mut total = ChainComplex::zero();
        let mut parts = Vec::new();
        for i in n - ymax..=xmax {
            let (xi, yj) = (x.level(i), y.level(n - i));
            let t = xi.tensor(&yj);
            total = total.direct_sum(&t);
            parts.push((i, xi, yj, t));
        }
        (total, parts)
    };
    // offsets of each block per degree inside a direct sum
    let offsets = |parts: &[(i64, ChainComplex, ChainComplex, ChainComplex)], deg: i64| -> BTreeMap<i64, usize> {
        let mut off = 0;
        let mut m = BTreeMap::new();
        for (i, _, _, t) in parts {
            m.insert(*i, off);
            off += t.ngens(deg);
        }
        m
    };
    // levelwise tensor of two chain maps on single blocks
    let tensor_maps = |f: &ChainMap, g: &ChainMap, a1: &ChainComplex, b1: &ChainComplex, a0: &ChainComplex, b0: &ChainComplex| {
        let s = a1.tensor(b1);
        let t = a0.tensor(b0);
        let mut out = ChainMap::zero();
        for n in s.degrees() {
            let mut m = IntMatrix::zeros(s.ngens(n), t.ngens(n));
            let (mut so, mut to) = (0usize, BTreeMap::new());
            let mut acc = 0;
            for p in a0.degrees() {
                for q in b0.degrees() {
                    if p + q == n {
                        to.insert((p, q), acc);
                        acc += a0.ngens(p) * b0.ngens(q);
                    }
                }
            }
            for p in a1.degrees() {
                for q in b1.degrees() {
                    if p + q != n {
                        continue;
                    }
                    let (fp, gq) = (f.get(p, a1, a0), g.get(q, b1, b0));
                    if let Some(&o) = to.get(&(p, q)) {
                        let gb = gq.cols();
                        for r1 in 0..fp.rows() {
                            for r2 in 0..gq.rows() {
                                for c1 in 0..fp.cols() {
                                    if fp[(r1, c1)] == BigInt::from(0) {
                                        continue;
                                    }
                                    for c2 in 0..gq.cols() {
                                        let v = &fp[(r1, c1)] * &gq[(r2, c2)];
                                        m[(so + r1 * gq.rows() + r2, o + c1 * gb + c2)] += v;
                                    }
                                }
                            }
                        }
                    }
                    so += a1.ngens(p) * b1.ngens(q);
                }
            }
            out.maps.insert(n, m);
        }
        out.prune()
    };
    // difference map δ_n: ⊕_{i+j=n+1} → ⊕_{i+j=n}
    let delta = |n: i64| -> (ChainComplex, ChainComplex, ChainMap) {
        let (src, sparts) = diag(n + 1);
        let (dst, dparts) = diag(n);
        let mut out = ChainMap::zero();
        let degs: Vec<i64> = src.degrees();
        for deg in degs {
            let so = offsets(&sparts, deg);
            let to = offsets(&dparts, deg);
            let mut m = IntMatrix::zeros(src.ngens(deg), dst.ngens(deg));
            for (i, xi, yj, t) in &sparts {
                let j = n + 1 - i;
                let r0 = so[i];
                // t ⊗ 1 to (i − 1, j)
                if let Some(&c0) = to.get(&(i - 1)) {
                    let x0 = x.level(i - 1);
                    let tm = tensor_maps(&x.transition(i - 1), &ChainMap::identity(yj), xi, yj, &x0, yj);
                    add_block(&mut m, &tm.get(deg, t, &x0.tensor(yj)), r0, c0, &BigInt::from(1));
                }
                // 1 ⊗ t to (i, j − 1), with a minus sign
                if let Some(&c0) = to.get(i) {
                    let y0 = y.level(j - 1);
                    let tm = tensor_maps(&ChainMap::identity(xi), &y.transition(j - 1), xi, yj, xi, &y0);
                    add_block(&mut m, &tm.get(deg, t, &xi.tensor(&y0)), r0, c0, &BigInt::from(-1));
                }
            }
            out.maps.insert(deg, m);
        }
        (src, dst, out.prune())
    };
    let mut levels = Vec::new();
    let mut deltas = Vec::new();
    for n in a..=b {
        let (s, d, m) = delta(n);
        levels.push(cone(&m, &s, &d).0);
        deltas.push((s, d, m));
    }
    // transitions F^{n+1} → F^n: t ⊗ 1 on both summands of the cone
    let mut transitions = Vec::new();
    for n in a..b {
        let k = (n - a) as usize;
        let (s1, d1, _) = &deltas[k + 1];
        let (s0, d0, _) = &deltas[k];
        let shift_x = |src: &ChainComplex, dst: &ChainComplex, total: i64| -> ChainMap {
            // src is the antidiagonal total+1, dst the antidiagonal total
            let (_, sp) = diag(total + 1);
            let (_, dp) = diag(total);
            let mut out = ChainMap::zero();
            for deg in src.degrees() {
                let so = offsets(&sp, deg);
                let to = offsets(&dp, deg);
                let mut m = IntMatrix::zeros(src.ngens(deg), dst.ngens(deg));
                for (i, xi, yj, t) in &sp {
                    if let Some(&c0) = to.get(&(i - 1)) {
                        let x0 = x.level(i - 1);
                        let tm = tensor_maps(&x.transition(i - 1), &ChainMap::identity(yj), xi, yj, &x0, yj);
                        add_block(&mut m, &tm.get(deg, t, &x0.tensor(yj)), so[i], c0, &BigInt::from(1));
                    }
                }
                out.maps.insert(deg, m);
            }
            out.prune()
        };
        let tb = shift_x(d1, d0, n);
        let ta = shift_x(s1, s0, n + 1);
        let c1 = &levels[k + 1];
        let mut t = ChainMap::zero();
        for deg in c1.degrees() {
            let m = IntMatrix::block_diag(&[&tb.get(deg, d1, d0), &ta.get(deg - 1, s1, s0)]);
            t.maps.insert(deg, m);
        }
        transitions.push(t.prune());
    }
    FilteredComplex::new(x.ring, a, below, Policy::Zero, levels, transitions)
}

fn add_block(m: &mut IntMatrix, block: &IntMatrix, r0: usize, c0: usize, sign: &BigInt) {
    for r in 0..block.rows() {
        for c in 0..block.cols() {
            m[(r0 + r, c0 + c)] += sign * &block[(r, c)];
        }
    }
}

#[cfg(test)]
mod tests;
