use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::lattice::{preimage_quotient, LeftSolver};
use super::matrix::{vec_ops, IntMatrix};
use super::snf::Reducer;
use super::LinalgError;

/// Finitely generated abelian group `Z^n / rowspace(relations)`.
///
/// Elements are coordinate vectors on the generators; two vectors are equal
/// in the group when their difference lies in the relation lattice.
#[derive(Clone)]
pub struct FGAbelianGroup {
    ngens: usize,
    relations: IntMatrix,
    normal: OnceLock<Arc<Normal>>,
}

#[derive(Debug)]
struct Normal {
    right: IntMatrix,
    right_inv: IntMatrix,
    diag: Vec<BigInt>,
}

/// Isomorphism type: invariant factors `d_1 | d_2 | …` (all > 1) and free rank.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GroupType {
    #[serde(with = "crate::json::bigint_vec_str")]
    pub invariant_factors: Vec<BigInt>,
    pub free_rank: usize,
}

impl GroupType {
    pub fn zero() -> Self {
        GroupType { invariant_factors: vec![], free_rank: 0 }
    }

    pub fn free(rank: usize) -> Self {
        GroupType { invariant_factors: vec![], free_rank: rank }
    }

    pub fn cyclic(n: u64) -> Self {
        FGAbelianGroup::cyclic(&BigInt::from(n)).group_type()
    }

    pub fn is_zero(&self) -> bool {
        self.invariant_factors.is_empty() && self.free_rank == 0
    }

    pub fn order(&self) -> Option<BigInt> {
        (self.free_rank == 0).then(|| self.invariant_factors.iter().product())
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut parts: Vec<String> = self.invariant_factors.iter().map(|d| format!("Z/{d}")).collect();
        if self.free_rank == 1 {
            parts.push("Z".into());
        } else if self.free_rank > 1 {
            parts.push(format!("Z^{}", self.free_rank));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

impl FGAbelianGroup {
    pub fn new(ngens: usize, relations: IntMatrix) -> Self {
        assert_eq!(relations.cols(), ngens, "relation width must equal generator count");
        FGAbelianGroup { ngens, relations, normal: OnceLock::new() }
    }

    pub fn zero() -> Self {
        Self::new(0, IntMatrix::zeros(0, 0))
    }

    pub fn free(n: usize) -> Self {
        Self::new(n, IntMatrix::zeros(0, n))
    }

    /// `Z/n`, with `n = 0` meaning `Z`.
    pub fn cyclic(n: &BigInt) -> Self {
        if n.is_zero() {
            Self::free(1)
        } else {
            Self::new(1, IntMatrix::from_rows(1, vec![vec![n.clone()]]))
        }
    }

    pub fn from_type(t: &GroupType) -> Self {
        let n = t.invariant_factors.len() + t.free_rank;
        let mut rel = IntMatrix::zeros(0, n);
        for (i, d) in t.invariant_factors.iter().enumerate() {
            let mut r = vec_ops::zero(n);
            r[i] = d.clone();
            rel.push_row(r);
        }
        Self::new(n, rel)
    }

    /// `(Z/m)^n`.
    pub fn free_mod(n: usize, m: &BigInt) -> Self {
        Self::new(n, IntMatrix::scalar(n, m))
    }

    pub fn ngens(&self) -> usize {
        self.ngens
    }

    pub fn relations(&self) -> &IntMatrix {
        &self.relations
    }

    fn normal(&self) -> &Normal {
        self.normal.get_or_init(|| {
            let r = Reducer::new(&self.relations, false, true, true).run();
            Arc::new(Normal { right: r.right.unwrap(), right_inv: r.right_inv.unwrap(), diag: r.invariants })
        })
    }

    pub fn group_type(&self) -> GroupType {
        let n = self.normal();
        GroupType {
            invariant_factors: n.diag.iter().filter(|d| !d.is_one()).cloned().collect(),
            free_rank: self.ngens - n.diag.len(),
        }
    }

    pub fn invariant_factors(&self) -> Vec<BigInt> {
        self.group_type().invariant_factors
    }

    pub fn free_rank(&self) -> usize {
        self.group_type().free_rank
    }

    pub fn order(&self) -> Option<BigInt> {
        self.group_type().order()
    }

    pub fn is_trivial(&self) -> bool {
        self.group_type().is_zero()
    }

    pub fn is_isomorphic(&self, other: &FGAbelianGroup) -> bool {
        self.group_type() == other.group_type()
    }

    /// Whether `v` is zero in the group.
    pub fn is_zero_element(&self, v: &[BigInt]) -> bool {
        assert_eq!(v.len(), self.ngens);
        let n = self.normal();
        let y = n.right.left_apply(v);
        y.iter().enumerate().all(|(j, c)| match n.diag.get(j) {
            Some(d) => c.is_multiple_of(d),
            None => c.is_zero(),
        })
    }

    pub fn elements_equal(&self, u: &[BigInt], v: &[BigInt]) -> bool {
        self.is_zero_element(&vec_ops::sub(u, v))
    }

    /// Coordinates on the Smith basis, reduced: one entry per nontrivial
    /// cyclic summand (torsion first, in invariant-factor order, then free).
    pub fn canonical(&self, v: &[BigInt]) -> Vec<BigInt> {
        let n = self.normal();
        let y = n.right.left_apply(v);
        let mut out = Vec::new();
        for (j, c) in y.iter().enumerate() {
            match n.diag.get(j) {
                Some(d) if d.is_one() => {}
                Some(d) => out.push(c.mod_floor(d)),
                None => out.push(c.clone()),
            }
        }
        out
    }

    /// Enumerate all elements of a finite group as generator vectors.
    /// Intended for brute-force checks on small groups.
    pub fn elements(&self) -> Option<Vec<Vec<BigInt>>> {
        let n = self.normal();
        if self.ngens > n.diag.len() {
            return None;
        }
        let mut coords: Vec<Vec<BigInt>> = vec![vec_ops::zero(self.ngens)];
        for (j, d) in n.diag.iter().enumerate() {
            if d.is_one() {
                continue;
            }
            let mut next = Vec::new();
            for c in &coords {
                let mut k = BigInt::zero();
                while &k < d {
                    let mut c2 = c.clone();
                    c2[j] = k.clone();
                    next.push(c2);
                    k += 1;
                }
            }
            coords = next;
        }
        Some(coords.iter().map(|y| n.right_inv.left_apply(y)).collect())
    }

    /// Direct sum with another presented group.
    pub fn direct_sum(&self, other: &FGAbelianGroup) -> FGAbelianGroup {
        FGAbelianGroup::new(
            self.ngens + other.ngens,
            IntMatrix::block_diag(&[&self.relations, &other.relations]),
        )
    }

    /// Add `m·e_i` relations for every generator.
    pub fn reduce_mod(&self, m: &BigInt) -> FGAbelianGroup {
        FGAbelianGroup::new(self.ngens, self.relations.vstack(&IntMatrix::scalar(self.ngens, m)))
    }

    /// Whether every row of `m` (a family of elements) lies in the relation lattice.
    pub fn rows_are_zero(&self, m: &IntMatrix) -> Option<usize> {
        m.row_iter().position(|r| !self.is_zero_element(r))
    }
}

impl fmt::Debug for FGAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FGAbelianGroup({} gens, {:?} ≅ {})", self.ngens, self.relations, self.group_type())
    }
}

#[derive(Serialize, Deserialize)]
struct GroupJson {
    generators: usize,
    relations: IntMatrix,
    #[serde(default, skip_deserializing)]
    structure: Option<GroupType>,
}

impl Serialize for FGAbelianGroup {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        GroupJson { generators: self.ngens, relations: self.relations.clone(), structure: Some(self.group_type()) }
            .serialize(s)
    }
}

impl<'de> Deserialize<'de> for FGAbelianGroup {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let g = GroupJson::deserialize(d)?;
        let rel = if g.relations.rows() == 0 { IntMatrix::zeros(0, g.generators) } else { g.relations };
        if rel.cols() != g.generators {
            return Err(serde::de::Error::custom("relation width differs from generator count"));
        }
        Ok(FGAbelianGroup::new(g.generators, rel))
    }
}

/// Homomorphism of presented groups, given on generators
/// (row `i` of `matrix` is the image of generator `i`).
#[derive(Clone, Debug)]
pub struct GroupHom {
    pub src: FGAbelianGroup,
    pub dst: FGAbelianGroup,
    pub matrix: IntMatrix,
}

impl GroupHom {
    /// Checks eagerly that the matrix respects the relations.
    pub fn new(src: FGAbelianGroup, dst: FGAbelianGroup, matrix: IntMatrix) -> Result<Self, LinalgError> {
        if matrix.rows() != src.ngens() || matrix.cols() != dst.ngens() {
            return Err(LinalgError::DimensionMismatch {
                expected: (src.ngens(), dst.ngens()),
                found: (matrix.rows(), matrix.cols()),
            });
        }
        let images = src.relations().mul(&matrix);
        if let Some(row) = dst.rows_are_zero(&images) {
            return Err(LinalgError::RelationViolation { relation: row });
        }
        Ok(GroupHom { src, dst, matrix })
    }

    pub fn identity(g: &FGAbelianGroup) -> Self {
        GroupHom { src: g.clone(), dst: g.clone(), matrix: IntMatrix::identity(g.ngens()) }
    }

    pub fn apply(&self, v: &[BigInt]) -> Vec<BigInt> {
        self.matrix.left_apply(v)
    }

    /// `self` then `next`.
    pub fn then(&self, next: &GroupHom) -> GroupHom {
        GroupHom { src: self.src.clone(), dst: next.dst.clone(), matrix: self.matrix.mul(&next.matrix) }
    }

    pub fn is_zero(&self) -> bool {
        self.dst.rows_are_zero(&self.matrix).is_none()
    }

    pub fn equals(&self, other: &GroupHom) -> bool {
        self.dst.rows_are_zero(&self.matrix.sub(&other.matrix)).is_none()
    }

    /// Kernel as a presented group, with its inclusion into the source.
    pub fn kernel(&self) -> (FGAbelianGroup, GroupHom) {
        let (basis, rel) = preimage_quotient(&self.matrix, self.dst.relations(), self.src.relations())
            .expect("source relations lie in the kernel of a well-defined map");
        let ker = FGAbelianGroup::new(basis.rows(), rel);
        let incl = GroupHom { src: ker.clone(), dst: self.src.clone(), matrix: basis };
        (ker, incl)
    }

    /// Cokernel, presented on the target's generators (projection is the identity matrix).
    pub fn cokernel(&self) -> FGAbelianGroup {
        FGAbelianGroup::new(self.dst.ngens(), self.dst.relations().vstack(&self.matrix))
    }

    /// Image, presented as the source modulo the preimage of zero.
    pub fn image(&self) -> FGAbelianGroup {
        let none = IntMatrix::zeros(0, self.src.ngens());
        let (lattice, _) = preimage_quotient(&self.matrix, self.dst.relations(), &none).unwrap();
        FGAbelianGroup::new(self.src.ngens(), lattice)
    }
}

/// Kernel and cokernel of a map of presented groups.
pub fn kernel_cokernel(f: &GroupHom) -> (FGAbelianGroup, FGAbelianGroup) {
    (f.kernel().0, f.cokernel())
}

/// Finitely supported weight → group association; absent weights are zero.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
pub struct GradedAbelianGroup(pub BTreeMap<i64, FGAbelianGroup>);

impl GradedAbelianGroup {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, w: i64, g: FGAbelianGroup) {
        if g.is_trivial() {
            self.0.remove(&w);
        } else {
            self.0.insert(w, g);
        }
    }

    pub fn get(&self, w: i64) -> FGAbelianGroup {
        self.0.get(&w).cloned().unwrap_or_else(FGAbelianGroup::zero)
    }

    pub fn types(&self) -> BTreeMap<i64, GroupType> {
        self.0.iter().map(|(w, g)| (*w, g.group_type())).filter(|(_, t)| !t.is_zero()).collect()
    }

    pub fn is_isomorphic(&self, other: &GradedAbelianGroup) -> bool {
        self.types() == other.types()
    }
}

/// Whether the row lattice of `gens` contains `v`.
pub fn lattice_contains(gens: &IntMatrix, v: &[BigInt]) -> bool {
    LeftSolver::new(gens).contains(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn multiplication_by_two_on_z() {
        let f = GroupHom::new(FGAbelianGroup::free(1), FGAbelianGroup::free(1), IntMatrix::from_i64(&[&[2]])).unwrap();
        let (k, c) = kernel_cokernel(&f);
        assert!(k.is_trivial());
        assert_eq!(c.group_type(), GroupType::cyclic(2));
    }

    #[test]
    fn multiplication_by_p_on_z_mod_p2() {
        let g = FGAbelianGroup::cyclic(&z(9));
        let f = GroupHom::new(g.clone(), g, IntMatrix::from_i64(&[&[3]])).unwrap();
        let (k, c) = kernel_cokernel(&f);
        assert_eq!(k.group_type(), GroupType::cyclic(3));
        assert_eq!(c.group_type(), GroupType::cyclic(3));
    }

    #[test]
    fn diagonal_map() {
        let f = GroupHom::new(
            FGAbelianGroup::free(2),
            FGAbelianGroup::free(2),
            IntMatrix::from_i64(&[&[1, 0], &[0, 3]]),
        )
        .unwrap();
        let (k, c) = kernel_cokernel(&f);
        assert!(k.is_trivial());
        assert_eq!(c.group_type(), GroupType::cyclic(3));
    }

    #[test]
    fn ill_defined_map_is_rejected() {
        let err = GroupHom::new(
            FGAbelianGroup::cyclic(&z(4)),
            FGAbelianGroup::cyclic(&z(6)),
            IntMatrix::from_i64(&[&[1]]),
        );
        assert!(matches!(err, Err(LinalgError::RelationViolation { relation: 0 })));
    }

    #[test]
    fn enumeration_matches_order() {
        let g = FGAbelianGroup::new(2, IntMatrix::from_i64(&[&[2, 4], &[6, 8]]));
        assert_eq!(g.group_type().invariant_factors, vec![z(2), z(4)]);
        let els = g.elements().unwrap();
        assert_eq!(els.len(), 8);
        for (i, a) in els.iter().enumerate() {
            for b in &els[i + 1..] {
                assert!(!g.elements_equal(a, b));
            }
        }
    }

    #[test]
    fn image_of_projection() {
        let f = GroupHom::new(
            FGAbelianGroup::free(2),
            FGAbelianGroup::cyclic(&z(6)),
            IntMatrix::from_i64(&[&[2], &[3]]),
        )
        .unwrap();
        assert_eq!(f.image().group_type(), GroupType::cyclic(6));
        let (k, _) = f.kernel();
        assert_eq!(k.free_rank(), 2);
    }
}
