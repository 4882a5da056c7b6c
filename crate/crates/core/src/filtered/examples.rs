//! The polynomial filtrations `τ_{≥2⋆}R[v]`, `τ_{≥2⋆}R[v^{±1}]` and the
//! computations built from them.

use crate::linalg::IntMatrix;

use super::{
    double_speed_whitehead, pullback, truncation_map, BigradedHomotopyTable, ChainComplex, ChainMap, CoeffRing,
    FilteredComplex, FilteredError, FilteredMap, Policy, MAX_WINDOW,
};

/// `F^i = C` for `i ≤ k`, zero above.
pub fn ins(ring: CoeffRing, k: i64, c: ChainComplex) -> FilteredComplex {
    FilteredComplex::new(ring, k, Policy::Constant, Policy::Zero, vec![c], vec![]).expect("single level")
}

/// `R[v]` (or `R[v^{±1}]`) with `|v| = −2`, weight `−1`, cut at `|j| ≤ bound`,
/// filtered by the double-speed Whitehead tower.
#[derive(Clone, Debug)]
pub struct PolynomialFiltered {
    pub ring: CoeffRing,
    pub laurent: bool,
    pub bound: i64,
    pub complex: ChainComplex,
    pub filtered: FilteredComplex,
}

impl PolynomialFiltered {
    pub fn new(ring: CoeffRing, bound: i64, laurent: bool) -> Self {
        let lo = if laurent { -bound } else { 0 };
        let complex = even_line(ring, (lo..=bound).map(|j| -2 * j));
        let filtered = double_speed_whitehead(ring, &complex);
        PolynomialFiltered { ring, laurent, bound, complex, filtered }
    }

    /// Exponents `j` with `v^j ∈ F^i`, i.e. `−2j ≥ 2i`.
    pub fn monomials_in(&self, i: i64) -> Vec<i64> {
        let lo = if self.laurent { -self.bound } else { 0 };
        (lo..=self.bound).filter(|j| -j >= i).collect()
    }
}

/// One copy of the ring in each listed degree, zero differentials.
fn even_line(ring: CoeffRing, degrees: impl Iterator<Item = i64>) -> ChainComplex {
    let mut c = ChainComplex::zero();
    for n in degrees {
        c.groups.insert(n, ring.unit());
    }
    c
}

/// The filtered map `τ_{≥2⋆}C → τ_{≥2⋆}D` induced by `f: C → D`.
pub fn double_speed_map(
    ring: CoeffRing,
    f: &ChainMap,
    c: &ChainComplex,
    d: &ChainComplex,
) -> Result<FilteredMap, FilteredError> {
    let x = double_speed_whitehead(ring, c);
    let y = double_speed_whitehead(ring, d);
    FilteredMap::levelwise(&x, &y, |i, _, _| {
        let (tc, ci) = c.truncate_above(2 * i);
        let (td, di) = d.truncate_above(2 * i);
        truncation_map(f, &tc, &ci, c, &td, &di, d)
    })
}

/// Degreewise multiplication by scalars between two complexes with one
/// generator per degree.
fn diagonal_map(c: &ChainComplex, d: &ChainComplex, scalar: impl Fn(i64) -> i64) -> ChainMap {
    let mut f = ChainMap::zero();
    for n in c.degrees() {
        if d.ngens(n) == 1 && c.ngens(n) == 1 {
            f.maps.insert(n, IntMatrix::from_i64(&[&[scalar(n)]]));
        }
    }
    f
}

fn check_bound(n: i64) -> Result<(), FilteredError> {
    if !(0..=MAX_WINDOW).contains(&n) {
        return Err(FilteredError::WindowOverflow(n));
    }
    Ok(())
}

/// `rational_tc_sphere(N)`: the pullback of
/// `ins⁰(Q ⊕ Q[−1]) → τ_{≥2⋆}Q[v^{±1}] ← τ_{≥2⋆}Q[v]`.
pub fn rational_tc_sphere(n: i64) -> Result<(FilteredComplex, BigradedHomotopyTable), FilteredError> {
    check_bound(n)?;
    let q = CoeffRing::Q;
    let lau = PolynomialFiltered::new(q, n, true);
    let pol = PolynomialFiltered::new(q, n, false);
    let top = ins(q, 0, even_line(q, [0, -1].into_iter()));
    let unit = FilteredMap::levelwise(&top, &lau.filtered, |_, s, t| {
        let mut f = ChainMap::zero();
        if s.ngens(0) == 1 && t.ngens(0) == 1 {
            f.maps.insert(0, IntMatrix::from_i64(&[&[1]]));
        }
        f
    })?;
    let incl = double_speed_map(q, &diagonal_map(&pol.complex, &lau.complex, |_| 1), &pol.complex, &lau.complex)?;
    let p = pullback(&unit, &incl)?;
    let table = p.table((-2 * n, 2 * n), (-1, n + 1));
    Ok((p, table))
}

/// Cofiber of `n·v: Σ^{−2}τ_{≥2⋆}Z[v] → τ_{≥2⋆}Z[v]`, with the table on
/// degrees `[−bound, 0]`.
pub fn cyclic_fixed_points_via_n_series(
    n: u64,
    ring: CoeffRing,
    bound: i64,
) -> Result<(FilteredComplex, BigradedHomotopyTable), FilteredError> {
    if ring != CoeffRing::Z {
        return Err(FilteredError::Unsupported("n-series over rings other than Z".into()));
    }
    check_bound(bound)?;
    let top = bound / 2 + 2;
    let target = even_line(ring, (0..=top + 1).map(|j| -2 * j));
    let source = even_line(ring, (0..=top).map(|j| -2 * j - 2));
    let nv = diagonal_map(&source, &target, |_| n as i64);
    let f = double_speed_map(ring, &nv, &source, &target)?;
    let cof = f.cofiber();
    let table = cof.table((-bound, 0), (-(bound + 1) / 2 - 1, 0));
    Ok((cof, table))
}

/// Truncations `τ_{≥2i}` of the cochains of `BC_n` computed from the
/// periodic resolution `… → Z[C_n] —N→ Z[C_n] —(1−t)→ Z[C_n]`, so the
/// cochain differentials alternate `0, n, 0, n, …`.
pub fn n_series_oracle(n: u64, bound: i64) -> BigradedHomotopyTable {
    let len = bound + 3;
    let mut p = ChainComplex::zero();
    for m in 0..=len {
        p.groups.insert(-m, crate::linalg::FGAbelianGroup::free(1));
    }
    for m in 0..len {
        // δ^m: cochain degree m → m + 1, i.e. chain degree −m → −m − 1
        let c = if m % 2 == 1 { n as i64 } else { 0 };
        p.differentials.insert(-m, IntMatrix::from_i64(&[&[c]]));
    }
    let weights = (-(bound + 1) / 2 - 1, 0);
    let mut t = BigradedHomotopyTable::new(CoeffRing::Z, (-bound, 0), weights);
    for i in weights.0..=weights.1 {
        let (tr, _) = p.truncate_above(2 * i);
        for m in -bound..=0 {
            t.insert_level(m, i, &tr.homology(m));
        }
    }
    t
}

/// The filtered norm sequence for Z with trivial circle action.
#[derive(Clone, Debug)]
pub struct ZTate {
    pub bound: i64,
    pub map: FilteredMap,
    pub cofiber: FilteredComplex,
}

impl ZTate {
    pub fn degrees(&self) -> (i64, i64) {
        (-2 * self.bound, 2 * self.bound)
    }

    pub fn weights(&self) -> (i64, i64) {
        (-self.bound - 1, self.bound + 1)
    }

    pub fn tables(&self) -> [BigradedHomotopyTable; 3] {
        let (d, w) = (self.degrees(), self.weights());
        [self.map.src.table(d, w), self.map.dst.table(d, w), self.cofiber.table(d, w)]
    }

    /// The orbit term: cells of `CP^{D−1}` moved up by two, then `τ_{≥2i}`.
    pub fn orbit_oracle(&self) -> BigradedHomotopyTable {
        let (d, w) = (self.degrees(), self.weights());
        let cells = even_line(CoeffRing::Z, (0..self.bound).map(|k| 2 * k + 2));
        let mut t = BigradedHomotopyTable::new(CoeffRing::Z, d, w);
        for i in w.0..=w.1 {
            let (tr, _) = cells.truncate_above(2 * i);
            for n in d.0..=d.1 {
                t.insert_level(n, i, &tr.homology(n));
            }
        }
        t
    }
}

/// `τ_{≥2⋆}Z[v] → τ_{≥2⋆}Z[v^{±1}]` and its cofiber.
pub fn z_tate(bound: i64) -> Result<ZTate, FilteredError> {
    check_bound(bound)?;
    let z = CoeffRing::Z;
    let pol = PolynomialFiltered::new(z, bound, false);
    let lau = PolynomialFiltered::new(z, bound, true);
    let map = double_speed_map(z, &diagonal_map(&pol.complex, &lau.complex, |_| 1), &pol.complex, &lau.complex)?;
    let cofiber = map.cofiber();
    Ok(ZTate { bound, map, cofiber })
}
