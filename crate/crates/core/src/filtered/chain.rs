//! Bounded chain complexes of presented abelian groups, homological
//! grading (`d: C_n → C_{n−1}`), and chain maps.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Zero;
use serde::{Deserialize, Serialize};

use crate::linalg::{preimage_quotient, vec_ops, FGAbelianGroup, GroupHom, IntMatrix, LeftSolver};

use super::FilteredError;

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ChainComplex {
    pub groups: BTreeMap<i64, FGAbelianGroup>,
    /// `differentials[n]` is `d_n: C_n → C_{n−1}`, rows indexed by the
    /// generators of `C_n`.
    pub differentials: BTreeMap<i64, IntMatrix>,
}

/// Homology in one degree: `cycles / boundaries`, with `basis` the cycle
/// lattice (rows in generator coordinates) and `group` its quotient.
#[derive(Clone, Debug)]
pub struct Homology {
    pub basis: IntMatrix,
    pub group: FGAbelianGroup,
}

impl ChainComplex {
    pub fn zero() -> Self {
        Self::default()
    }

    /// A single group placed in degree `n`.
    pub fn concentrated(n: i64, g: FGAbelianGroup) -> Self {
        let mut c = Self::zero();
        if g.ngens() > 0 {
            c.groups.insert(n, g);
        }
        c
    }

    pub fn from_parts(groups: BTreeMap<i64, FGAbelianGroup>, differentials: BTreeMap<i64, IntMatrix>) -> Result<Self, FilteredError> {
        let c = ChainComplex { groups, differentials };
        c.validate()?;
        Ok(c)
    }

    pub fn ngens(&self, n: i64) -> usize {
        self.groups.get(&n).map_or(0, |g| g.ngens())
    }

    pub fn group(&self, n: i64) -> FGAbelianGroup {
        self.groups.get(&n).cloned().unwrap_or_else(|| FGAbelianGroup::free(0))
    }

    pub fn relations(&self, n: i64) -> IntMatrix {
        self.groups.get(&n).map_or_else(|| IntMatrix::zeros(0, 0), |g| g.relations().clone())
    }

    pub fn d(&self, n: i64) -> IntMatrix {
        self.differentials.get(&n).cloned().unwrap_or_else(|| IntMatrix::zeros(self.ngens(n), self.ngens(n - 1)))
    }

    /// Degrees with a nonzero number of generators.
    pub fn degrees(&self) -> Vec<i64> {
        self.groups.iter().filter(|(_, g)| g.ngens() > 0).map(|(n, _)| *n).collect()
    }

    pub fn range(&self) -> Option<(i64, i64)> {
        let d = self.degrees();
        Some((*d.first()?, *d.last()?))
    }

    pub fn validate(&self) -> Result<(), FilteredError> {
        for (&n, m) in &self.differentials {
            if m.rows() != self.ngens(n) || m.cols() != self.ngens(n - 1) {
                return Err(FilteredError::Shape(format!("d_{n} has shape {}x{}", m.rows(), m.cols())));
            }
            GroupHom::new(self.group(n), self.group(n - 1), m.clone())
                .map_err(|e| FilteredError::NotAComplex(format!("d_{n}: {e}")))?;
        }
        for &n in self.differentials.keys() {
            let dd = self.d(n).mul(&self.d(n - 1));
            if self.group(n - 2).rows_are_zero(&dd).is_some() {
                return Err(FilteredError::NotAComplex(format!("d_{} d_{n} ≠ 0", n - 1)));
            }
        }
        Ok(())
    }

    pub fn homology_with_basis(&self, n: i64) -> Homology {
        let trivial = self.relations(n).vstack(&self.d(n + 1));
        let (basis, rel) = preimage_quotient(&self.d(n), &self.relations(n - 1), &trivial)
            .expect("boundaries are cycles in a valid complex");
        Homology { group: FGAbelianGroup::new(basis.rows(), rel), basis }
    }

    pub fn homology(&self, n: i64) -> FGAbelianGroup {
        self.homology_with_basis(n).group
    }

    pub fn is_acyclic(&self) -> bool {
        self.degrees().iter().all(|&n| self.homology(n).is_trivial())
    }

    pub fn shift(&self, k: i64) -> Self {
        let sign = if k.rem_euclid(2) == 1 { BigInt::from(-1) } else { BigInt::from(1) };
        ChainComplex {
            groups: self.groups.iter().map(|(n, g)| (n + k, g.clone())).collect(),
            differentials: self.differentials.iter().map(|(n, m)| (n + k, m.scale(&sign))).collect(),
        }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        let mut degs: Vec<i64> = self.groups.keys().chain(other.groups.keys()).copied().collect();
        degs.sort();
        degs.dedup();
        let mut out = ChainComplex::zero();
        for &n in &degs {
            out.groups.insert(n, self.group(n).direct_sum(&other.group(n)));
        }
        for &n in &degs {
            out.differentials.insert(n, IntMatrix::block_diag(&[&self.d(n), &other.d(n)]));
        }
        out.prune()
    }

    /// Drop empty degrees and differentials touching them.
    pub fn prune(mut self) -> Self {
        self.groups.retain(|_, g| g.ngens() > 0);
        let keep: Vec<i64> = self.groups.keys().copied().collect();
        self.differentials.retain(|n, m| keep.contains(n) && keep.contains(&(n - 1)) && m.rows() > 0 && m.cols() > 0);
        self
    }

    /// Canonical truncation `τ_{≥k}`: `C_n` for `n > k`, cycles at `k`.
    /// Also returns the inclusion `τ_{≥k}C → C`.
    pub fn truncate_above(&self, k: i64) -> (ChainComplex, ChainMap) {
        let mut out = ChainComplex::zero();
        let mut incl = ChainMap::default();
        for (&n, g) in &self.groups {
            if n > k {
                out.groups.insert(n, g.clone());
                incl.maps.insert(n, IntMatrix::identity(g.ngens()));
            }
        }
        for (&n, m) in &self.differentials {
            if n > k + 1 {
                out.differentials.insert(n, m.clone());
            }
        }
        let cyc = self.cycles(k);
        if cyc.group.ngens() > 0 {
            out.groups.insert(k, cyc.group.clone());
            incl.maps.insert(k, cyc.basis.clone());
            if self.ngens(k + 1) > 0 {
                // d_{k+1} lands in cycles; rewrite in cycle coordinates
                let solver = LeftSolver::new(&cyc.basis);
                let d = self.d(k + 1);
                let rows: Vec<Vec<BigInt>> =
                    d.row_iter().map(|r| solver.solve(r).expect("boundaries are cycles")).collect();
                out.differentials.insert(k + 1, IntMatrix::from_rows(cyc.basis.rows(), rows));
            }
        }
        (out.prune(), incl.prune())
    }

    /// The cycle group `Z_k = {x : d x = 0}` as a subgroup of `C_k`.
    pub fn cycles(&self, k: i64) -> Homology {
        if self.ngens(k - 1) == 0 || self.d(k).is_zero() {
            return Homology { basis: IntMatrix::identity(self.ngens(k)), group: self.group(k) };
        }
        let (basis, rel) = preimage_quotient(&self.d(k), &self.relations(k - 1), &self.relations(k))
            .expect("relations are cycles");
        Homology { group: FGAbelianGroup::new(basis.rows(), rel), basis }
    }

    /// Tensor product over Z; correct as a derived tensor when one factor
    /// is levelwise free.
    pub fn tensor(&self, other: &Self) -> ChainComplex {
        let mut out = ChainComplex::zero();
        let (adeg, bdeg) = (self.degrees(), other.degrees());
        // layout per total degree: blocks (a, b) in increasing a
        let mut layout: BTreeMap<i64, Vec<(i64, i64, usize)>> = BTreeMap::new();
        for &a in &adeg {
            for &b in &bdeg {
                let blocks = layout.entry(a + b).or_default();
                let off = blocks.last().map_or(0, |&(x, y, o)| o + self.ngens(x) * other.ngens(y));
                blocks.push((a, b, off));
            }
        }
        let size = |blocks: &Vec<(i64, i64, usize)>| {
            blocks.last().map_or(0, |&(x, y, o)| o + self.ngens(x) * other.ngens(y))
        };
        for (&n, blocks) in &layout {
            let total = size(blocks);
            let mut rel = IntMatrix::zeros(0, total);
            for &(a, b, off) in blocks {
                let (ga, gb) = (self.ngens(a), other.ngens(b));
                for r in self.relations(a).row_iter() {
                    for j in 0..gb {
                        let mut row = vec_ops::zero(total);
                        for i in 0..ga {
                            row[off + i * gb + j] = r[i].clone();
                        }
                        rel.push_row(row);
                    }
                }
                for s in other.relations(b).row_iter() {
                    for i in 0..ga {
                        let mut row = vec_ops::zero(total);
                        for j in 0..gb {
                            row[off + i * gb + j] = s[j].clone();
                        }
                        rel.push_row(row);
                    }
                }
            }
            out.groups.insert(n, FGAbelianGroup::new(total, rel));
        }
        for (&n, blocks) in &layout {
            let Some(target) = layout.get(&(n - 1)) else { continue };
            let (rows, cols) = (size(blocks), size(target));
            let mut m = IntMatrix::zeros(rows, cols);
            let find = |a: i64, b: i64| target.iter().find(|&&(x, y, _)| x == a && y == b).map(|t| t.2);
            for &(a, b, off) in blocks {
                let (ga, gb) = (self.ngens(a), other.ngens(b));
                let sign = if a.rem_euclid(2) == 1 { BigInt::from(-1) } else { BigInt::from(1) };
                if let Some(t) = find(a - 1, b) {
                    let da = self.d(a);
                    let gb2 = other.ngens(b);
                    for i in 0..ga {
                        for j in 0..gb {
                            for k in 0..da.cols() {
                                let c = &da[(i, k)];
                                if !c.is_zero() {
                                    m[(off + i * gb + j, t + k * gb2 + j)] += c;
                                }
                            }
                        }
                    }
                }
                if let Some(t) = find(a, b - 1) {
                    let db = other.d(b);
                    let gb2 = other.ngens(b - 1);
                    for i in 0..ga {
                        for j in 0..gb {
                            for l in 0..db.cols() {
                                let c = &db[(j, l)];
                                if !c.is_zero() {
                                    m[(off + i * gb + j, t + i * gb2 + l)] += &sign * c;
                                }
                            }
                        }
                    }
                }
            }
            out.differentials.insert(n, m);
        }
        out.prune()
    }

    pub fn is_levelwise_free(&self) -> bool {
        self.groups.values().all(|g| g.relations().rows() == 0 || g.relations().is_zero())
    }
}

/// Degreewise maps `f_n: A_n → B_n` (rows indexed by generators of `A_n`).
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct ChainMap {
    pub maps: BTreeMap<i64, IntMatrix>,
}

impl ChainMap {
    pub fn get(&self, n: i64, src: &ChainComplex, dst: &ChainComplex) -> IntMatrix {
        self.maps.get(&n).cloned().unwrap_or_else(|| IntMatrix::zeros(src.ngens(n), dst.ngens(n)))
    }

    pub fn identity(c: &ChainComplex) -> Self {
        ChainMap { maps: c.groups.iter().map(|(n, g)| (*n, IntMatrix::identity(g.ngens()))).collect() }
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn prune(mut self) -> Self {
        self.maps.retain(|_, m| m.rows() > 0 && m.cols() > 0);
        self
    }

    pub fn scale(&self, c: &BigInt) -> Self {
        ChainMap { maps: self.maps.iter().map(|(n, m)| (*n, m.scale(c))).collect() }
    }

    pub fn compose(&self, next: &ChainMap, a: &ChainComplex, b: &ChainComplex, c: &ChainComplex) -> ChainMap {
        let mut out = ChainMap::default();
        for n in a.degrees() {
            out.maps.insert(n, self.get(n, a, b).mul(&next.get(n, b, c)));
        }
        out.prune()
    }

    /// Well-definedness and `f d = d f` on generators.
    pub fn validate(&self, src: &ChainComplex, dst: &ChainComplex) -> Result<(), FilteredError> {
        let mut degs: Vec<i64> = src.degrees();
        degs.extend(dst.degrees());
        degs.sort();
        degs.dedup();
        for &n in &degs {
            let f = self.get(n, src, dst);
            if f.rows() != src.ngens(n) || f.cols() != dst.ngens(n) {
                return Err(FilteredError::Shape(format!("map in degree {n}")));
            }
            GroupHom::new(src.group(n), dst.group(n), f.clone())
                .map_err(|e| FilteredError::NotAChainMap(format!("degree {n}: {e}")))?;
            let lhs = f.mul(&dst.d(n));
            let rhs = src.d(n).mul(&self.get(n - 1, src, dst));
            if dst.group(n - 1).rows_are_zero(&lhs.sub(&rhs)).is_some() {
                return Err(FilteredError::NotAChainMap(format!("fd ≠ df in degree {n}")));
            }
        }
        Ok(())
    }

    /// Induced map on `H_n`, in the homology bases of source and target.
    pub fn on_homology(&self, n: i64, src: &ChainComplex, dst: &ChainComplex) -> GroupHom {
        let hs = src.homology_with_basis(n);
        let ht = dst.homology_with_basis(n);
        let f = self.get(n, src, dst);
        let solver = LeftSolver::new(&ht.basis);
        let images = hs.basis.mul(&f);
        let rows: Vec<Vec<BigInt>> =
            images.row_iter().map(|r| solver.solve(r).expect("cycles map to cycles")).collect();
        GroupHom { src: hs.group, dst: ht.group, matrix: IntMatrix::from_rows(ht.basis.rows(), rows) }
    }
}

/// Mapping cone of `f: A → B`: `Cone_n = B_n ⊕ A_{n−1}`,
/// `d(b, a) = (d b + f a, −d a)`. Returns the cone with the inclusion of
/// `B` and the projection onto `A[−1]` (as a map to `A.shift(1)`).
pub fn cone(f: &ChainMap, a: &ChainComplex, b: &ChainComplex) -> (ChainComplex, ChainMap, ChainMap) {
    let mut degs: Vec<i64> = b.degrees();
    degs.extend(a.degrees().iter().map(|n| n + 1));
    degs.sort();
    degs.dedup();
    let mut out = ChainComplex::zero();
    let mut incl = ChainMap::default();
    let mut proj = ChainMap::default();
    let a1 = a.shift(1);
    for &n in &degs {
        let gb = b.ngens(n);
        let ga = a.ngens(n - 1);
        out.groups.insert(n, b.group(n).direct_sum(&a.group(n - 1)));
        let mut i = IntMatrix::zeros(gb, gb + ga);
        for k in 0..gb {
            i[(k, k)] = BigInt::from(1);
        }
        incl.maps.insert(n, i);
        let mut pr = IntMatrix::zeros(gb + ga, a1.ngens(n));
        for k in 0..ga {
            pr[(gb + k, k)] = BigInt::from(-1);
        }
        proj.maps.insert(n, pr);
    }
    for &n in &degs {
        let (gb, ga) = (b.ngens(n), a.ngens(n - 1));
        let (gb1, ga1) = (b.ngens(n - 1), a.ngens(n - 2));
        let top = b.d(n).hstack(&IntMatrix::zeros(gb, ga1));
        let bottom = f.get(n - 1, a, b).hstack(&a.d(n - 1).neg());
        let m = top.vstack(&bottom);
        debug_assert_eq!((m.rows(), m.cols()), (gb + ga, gb1 + ga1));
        out.differentials.insert(n, m);
    }
    (out.prune(), incl.prune(), proj.prune())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z() -> FGAbelianGroup {
        FGAbelianGroup::free(1)
    }

    #[test]
    fn homology_of_multiplication() {
        // Z --3--> Z in degrees 1 → 0
        let mut c = ChainComplex::zero();
        c.groups.insert(1, z());
        c.groups.insert(0, z());
        c.differentials.insert(1, IntMatrix::from_i64(&[&[3]]));
        c.validate().unwrap();
        assert!(c.homology(1).is_trivial());
        assert_eq!(c.homology(0).group_type().to_string(), "Z/3");
    }

    #[test]
    fn cone_les_ranks() {
        let a = ChainComplex::concentrated(0, z());
        let b = ChainComplex::concentrated(0, z());
        let f = ChainMap { maps: [(0, IntMatrix::from_i64(&[&[2]]))].into() };
        f.validate(&a, &b).unwrap();
        let (c, _, _) = cone(&f, &a, &b);
        c.validate().unwrap();
        assert_eq!(c.homology(0).group_type().to_string(), "Z/2");
        assert!(c.homology(1).is_trivial());
    }

    #[test]
    fn truncation_keeps_cycles() {
        let mut c = ChainComplex::zero();
        c.groups.insert(1, z());
        c.groups.insert(0, FGAbelianGroup::free(2));
        c.groups.insert(-1, z());
        c.differentials.insert(1, IntMatrix::from_i64(&[&[2, 0]]));
        c.differentials.insert(0, IntMatrix::from_i64(&[&[0], &[1]]));
        c.validate().unwrap();
        let (t, incl) = c.truncate_above(0);
        t.validate().unwrap();
        incl.validate(&t, &c).unwrap();
        assert_eq!(t.homology(0).group_type(), c.homology(0).group_type());
        assert!(t.homology(-1).is_trivial());
    }

    #[test]
    fn tensor_of_cyclic_complexes() {
        let mut c = ChainComplex::zero();
        c.groups.insert(1, z());
        c.groups.insert(0, z());
        c.differentials.insert(1, IntMatrix::from_i64(&[&[2]]));
        let t = c.tensor(&c);
        t.validate().unwrap();
        // Z/2 ⊗^L Z/2 = Z/2 ⊕ Z/2[1]
        assert_eq!(t.homology(0).group_type().to_string(), "Z/2");
        assert_eq!(t.homology(1).group_type().to_string(), "Z/2");
    }
}
