//! Graded modules over `Z[η]/2η` and `Z[η,d]/(2η, d²−ηd)`.
//!
//! A module is presented Z-linearly: generators carry weights, the relation
//! rows are homogeneous, and η (and d) act by matrices on generators, each
//! raising weight by one.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{vec_ops, FGAbelianGroup, GradedAbelianGroup, GroupHom, IntMatrix};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EtaRing {
    /// `Z[η]/2η`
    Base,
    /// `Z[η,d]/(2η, d²−ηd)`
    Circle,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EtaError {
    #[error("matrix shape {found:?} does not match {expected:?}")]
    Shape { expected: (usize, usize), found: (usize, usize) },
    #[error("tensor products are only defined over BASE")]
    CircleTensor,
    #[error("module is over CIRCLE but has no d action")]
    MissingD,
}

/// Monomial basis `η^a d^b` (`a + b = w`) of the free graded ring in weight
/// `w`, with the relations `2η·μ` and `(d² − ηd)·μ`.
pub fn ring_weight_presentation(ring: EtaRing, w: usize) -> (Vec<(usize, usize)>, FGAbelianGroup) {
    let monos: Vec<(usize, usize)> = match ring {
        EtaRing::Base => vec![(w, 0)],
        EtaRing::Circle => (0..=w).map(|b| (w - b, b)).collect(),
    };
    let idx = |a: usize, b: usize| monos.iter().position(|&m| m == (a, b)).unwrap();
    let n = monos.len();
    let mut rel = IntMatrix::zeros(0, n);
    // 2η·μ for μ of weight w−1
    if w >= 1 {
        let lower: Vec<(usize, usize)> = match ring {
            EtaRing::Base => vec![(w - 1, 0)],
            EtaRing::Circle => (0..w).map(|b| (w - 1 - b, b)).collect(),
        };
        for (a, b) in lower {
            let mut r = vec_ops::zero(n);
            r[idx(a + 1, b)] = BigInt::from(2);
            rel.push_row(r);
        }
    }
    if ring == EtaRing::Circle && w >= 2 {
        for b in 0..=(w - 2) {
            let a = w - 2 - b;
            let mut r = vec_ops::zero(n);
            r[idx(a, b + 2)] += BigInt::one();
            r[idx(a + 1, b + 1)] -= BigInt::one();
            rel.push_row(r);
        }
    }
    (monos, FGAbelianGroup::new(n, rel))
}

/// Additive structure of the ring in weights `0..=max_w`.
pub fn ring_normal_form(ring: EtaRing, max_w: usize) -> GradedAbelianGroup {
    let mut g = GradedAbelianGroup::new();
    for w in 0..=max_w {
        g.insert(w as i64, ring_weight_presentation(ring, w).1);
    }
    g
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GradedEtaModule {
    pub ring: EtaRing,
    #[serde(rename = "generators")]
    pub weights: Vec<i64>,
    pub relations: IntMatrix,
    pub eta: IntMatrix,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<IntMatrix>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub identity: String,
    pub generator: Option<usize>,
    pub witness: Vec<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModuleReport {
    pub valid: bool,
    pub violations: Vec<Violation>,
}

impl ModuleReport {
    pub fn from_violations(violations: Vec<Violation>) -> Self {
        ModuleReport { valid: violations.is_empty(), violations }
    }
}

fn check_square(name: &str, m: &IntMatrix, n: usize) -> Result<(), EtaError> {
    let _ = name;
    if m.rows() != n || m.cols() != n {
        return Err(EtaError::Shape { expected: (n, n), found: (m.rows(), m.cols()) });
    }
    Ok(())
}

impl GradedEtaModule {
    pub fn new(
        ring: EtaRing,
        weights: Vec<i64>,
        relations: IntMatrix,
        eta: IntMatrix,
        d: Option<IntMatrix>,
    ) -> Result<Self, EtaError> {
        let n = weights.len();
        if relations.cols() != n {
            return Err(EtaError::Shape { expected: (relations.rows(), n), found: (relations.rows(), relations.cols()) });
        }
        check_square("eta", &eta, n)?;
        match (&d, ring) {
            (Some(d), _) => check_square("d", d, n)?,
            (None, EtaRing::Circle) => return Err(EtaError::MissingD),
            _ => {}
        }
        Ok(GradedEtaModule { ring, weights, relations, eta, d })
    }

    /// A graded abelian group with zero η (and zero d over CIRCLE).
    pub fn trivial_action(ring: EtaRing, weights: Vec<i64>, relations: IntMatrix) -> Self {
        let n = weights.len();
        let d = (ring == EtaRing::Circle).then(|| IntMatrix::zeros(n, n));
        GradedEtaModule { ring, weights, relations, eta: IntMatrix::zeros(n, n), d }
    }

    pub fn zero(ring: EtaRing) -> Self {
        Self::trivial_action(ring, vec![], IntMatrix::zeros(0, 0))
    }

    /// The ring modulo everything of weight above `max_w`, as a module over
    /// itself.
    pub fn ring_module(ring: EtaRing, max_w: usize) -> Self {
        let mut weights = Vec::new();
        let mut monos = Vec::new();
        let mut blocks = Vec::new();
        for w in 0..=max_w {
            let (ms, g) = ring_weight_presentation(ring, w);
            for m in ms {
                weights.push(w as i64);
                monos.push(m);
            }
            blocks.push(g.relations().clone());
        }
        let refs: Vec<&IntMatrix> = blocks.iter().collect();
        let relations = IntMatrix::block_diag(&refs);
        let n = weights.len();
        let pos = |m: (usize, usize)| monos.iter().position(|&x| x == m);
        let mut eta = IntMatrix::zeros(n, n);
        let mut d = IntMatrix::zeros(n, n);
        for (i, &(a, b)) in monos.iter().enumerate() {
            if let Some(j) = pos((a + 1, b)) {
                eta[(i, j)] = BigInt::one();
            }
            if let Some(j) = pos((a, b + 1)) {
                d[(i, j)] = BigInt::one();
            }
        }
        GradedEtaModule { ring, weights, relations, eta, d: (ring == EtaRing::Circle).then_some(d) }
    }

    pub fn ngens(&self) -> usize {
        self.weights.len()
    }

    pub fn group(&self) -> FGAbelianGroup {
        FGAbelianGroup::new(self.ngens(), self.relations.clone())
    }

    pub fn support(&self) -> Vec<i64> {
        let mut w = self.weights.clone();
        w.sort();
        w.dedup();
        w
    }

    pub fn gens_in_weight(&self, w: i64) -> Vec<usize> {
        (0..self.ngens()).filter(|&i| self.weights[i] == w).collect()
    }

    /// Whether every relation row is supported in a single weight.
    pub fn relations_homogeneous(&self) -> Option<usize> {
        self.relations.row_iter().position(|r| {
            let ws: Vec<i64> = (0..r.len()).filter(|&j| !r[j].is_zero()).map(|j| self.weights[j]).collect();
            ws.windows(2).any(|p| p[0] != p[1])
        })
    }

    /// The weight-`w` summand, presented on the generators of that weight.
    pub fn weight_group(&self, w: i64) -> FGAbelianGroup {
        let idx = self.gens_in_weight(w);
        let mut rel = IntMatrix::zeros(0, idx.len());
        for r in self.relations.row_iter() {
            if idx.iter().any(|&j| !r[j].is_zero()) {
                rel.push_row(idx.iter().map(|&j| r[j].clone()).collect());
            }
        }
        FGAbelianGroup::new(idx.len(), rel)
    }

    pub fn graded(&self) -> GradedAbelianGroup {
        let mut g = GradedAbelianGroup::new();
        for w in self.support() {
            g.insert(w, self.weight_group(w));
        }
        g
    }

    fn raises_weight(&self, m: &IntMatrix) -> Option<usize> {
        (0..self.ngens()).find(|&i| {
            m.row(i).iter().enumerate().any(|(j, c)| !c.is_zero() && self.weights[j] != self.weights[i] + 1)
        })
    }

    fn action_checks(&self, name: &str, m: &IntMatrix, out: &mut Vec<Violation>) {
        let g = self.group();
        if let Some(i) = self.raises_weight(m) {
            out.push(Violation {
                identity: format!("{name} raises weight by 1"),
                generator: Some(i),
                witness: crate::json::strings(m.row(i)),
            });
        }
        if let Err(e) = GroupHom::new(g.clone(), g, m.clone()) {
            out.push(Violation { identity: format!("{name} respects relations"), generator: None, witness: vec![e.to_string()] });
        }
    }

    /// Check homogeneity, well-definedness and the ring relations on
    /// generators.
    pub fn verify(&self) -> ModuleReport {
        let mut out = Vec::new();
        if let Some(r) = self.relations_homogeneous() {
            out.push(Violation {
                identity: "relations homogeneous".into(),
                generator: None,
                witness: crate::json::strings(self.relations.row(r)),
            });
        }
        let g = self.group();
        self.action_checks("eta", &self.eta, &mut out);
        for i in 0..self.ngens() {
            let two_eta = vec_ops::scale(self.eta.row(i), &BigInt::from(2));
            if !g.is_zero_element(&two_eta) {
                out.push(Violation { identity: "2η=0".into(), generator: Some(i), witness: crate::json::strings(&two_eta) });
            }
        }
        match (&self.d, self.ring) {
            (None, EtaRing::Circle) => out.push(Violation { identity: "d present".into(), generator: None, witness: vec![] }),
            (Some(d), EtaRing::Circle) => {
                self.action_checks("d", d, &mut out);
                for i in 0..self.ngens() {
                    let di = d.row_vec(i);
                    let ddi = d.left_apply(&di);
                    let edi = self.eta.left_apply(&di);
                    let diff = vec_ops::sub(&ddi, &edi);
                    if !g.is_zero_element(&diff) {
                        out.push(Violation { identity: "d²=ηd".into(), generator: Some(i), witness: crate::json::strings(&diff) });
                    }
                    let de = d.left_apply(self.eta.row(i));
                    let diff = vec_ops::sub(&de, &edi);
                    if !g.is_zero_element(&diff) {
                        out.push(Violation { identity: "dη=ηd".into(), generator: Some(i), witness: crate::json::strings(&diff) });
                    }
                }
            }
            _ => {}
        }
        ModuleReport::from_violations(out)
    }

    /// Shift all weights by `i`; actions unchanged.
    pub fn twist(&self, i: i64) -> Self {
        let mut m = self.clone();
        for w in &mut m.weights {
            *w += i;
        }
        m
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        assert_eq!(self.ring, other.ring);
        let mut weights = self.weights.clone();
        weights.extend(&other.weights);
        let relations = IntMatrix::block_diag(&[&self.relations, &other.relations]);
        let eta = IntMatrix::block_diag(&[&self.eta, &other.eta]);
        let d = match (&self.d, &other.d) {
            (Some(a), Some(b)) => Some(IntMatrix::block_diag(&[a, b])),
            _ => None,
        };
        GradedEtaModule { ring: self.ring, weights, relations, eta, d }
    }

    pub fn eta_hom(&self) -> GroupHom {
        GroupHom { src: self.group(), dst: self.group(), matrix: self.eta.clone() }
    }
}

/// Generator `(i, j)` of `M ⊗ N` sits at index `i·|N| + j`.
pub fn tensor_index(ncols: usize, i: usize, j: usize) -> usize {
    i * ncols + j
}

/// Tensor product over `Z` with `η` acting as `η⊗1 + 1⊗η` and weights
/// adding. Over `Z[η]/2η` the Koszul signs on the η-action are invisible
/// because `2η = 0`.
pub fn koszul_tensor(m: &GradedEtaModule, n: &GradedEtaModule) -> Result<GradedEtaModule, EtaError> {
    if m.ring != EtaRing::Base || n.ring != EtaRing::Base {
        return Err(EtaError::CircleTensor);
    }
    let (a, b) = (m.ngens(), n.ngens());
    let total = a * b;
    let mut weights = vec![0i64; total];
    for i in 0..a {
        for j in 0..b {
            weights[tensor_index(b, i, j)] = m.weights[i] + n.weights[j];
        }
    }
    let mut relations = IntMatrix::zeros(0, total);
    for r in m.relations.row_iter() {
        for j in 0..b {
            let mut row = vec_ops::zero(total);
            for i in 0..a {
                row[tensor_index(b, i, j)] = r[i].clone();
            }
            relations.push_row(row);
        }
    }
    for s in n.relations.row_iter() {
        for i in 0..a {
            let mut row = vec_ops::zero(total);
            for j in 0..b {
                row[tensor_index(b, i, j)] = s[j].clone();
            }
            relations.push_row(row);
        }
    }
    let mut eta = IntMatrix::zeros(total, total);
    for i in 0..a {
        for j in 0..b {
            let src = tensor_index(b, i, j);
            for k in 0..a {
                let c = &m.eta[(i, k)];
                if !c.is_zero() {
                    eta[(src, tensor_index(b, k, j))] += c;
                }
            }
            for l in 0..b {
                let c = &n.eta[(j, l)];
                if !c.is_zero() {
                    eta[(src, tensor_index(b, i, l))] += c;
                }
            }
        }
    }
    Ok(GradedEtaModule { ring: EtaRing::Base, weights, relations, eta, d: None })
}

/// Braiding `M ⊗ N → N ⊗ M`, `m ⊗ n ↦ (−1)^{|m||n|} n ⊗ m`.
pub fn braiding(m: &GradedEtaModule, n: &GradedEtaModule) -> Result<GroupHom, EtaError> {
    let mn = koszul_tensor(m, n)?;
    let nm = koszul_tensor(n, m)?;
    let (a, b) = (m.ngens(), n.ngens());
    let mut mat = IntMatrix::zeros(a * b, a * b);
    for i in 0..a {
        for j in 0..b {
            let sign = if (m.weights[i] * n.weights[j]).rem_euclid(2) == 1 { -1 } else { 1 };
            mat[(tensor_index(b, i, j), tensor_index(a, j, i))] = BigInt::from(sign);
        }
    }
    GroupHom::new(mn.group(), nm.group(), mat).map_err(|_| EtaError::Shape { expected: (a * b, a * b), found: (0, 0) })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BraidingReport {
    pub well_defined: bool,
    pub commutes_with_eta: bool,
    pub involutive: bool,
    pub isomorphism: bool,
    pub odd_odd_sign: bool,
}

impl BraidingReport {
    pub fn ok(&self) -> bool {
        self.well_defined && self.commutes_with_eta && self.involutive && self.isomorphism && self.odd_odd_sign
    }
}

pub fn check_braiding(m: &GradedEtaModule, n: &GradedEtaModule) -> Result<BraidingReport, EtaError> {
    let mn = koszul_tensor(m, n)?;
    let nm = koszul_tensor(n, m)?;
    let (Ok(beta), Ok(back)) = (braiding(m, n), braiding(n, m)) else {
        return Ok(BraidingReport {
            well_defined: false,
            commutes_with_eta: false,
            involutive: false,
            isomorphism: false,
            odd_odd_sign: false,
        });
    };
    let lhs = mn.eta_hom().then(&beta);
    let rhs = beta.then(&nm.eta_hom());
    let commutes_with_eta = lhs.equals(&rhs);
    let involutive = beta.then(&back).equals(&GroupHom::identity(&mn.group()));
    let (ker, coker) = crate::linalg::kernel_cokernel(&beta);
    let isomorphism = ker.is_trivial() && coker.is_trivial();
    let b = n.ngens();
    let a = m.ngens();
    let mut odd_odd_sign = true;
    for i in 0..a {
        for j in 0..b {
            let expect = if m.weights[i].rem_euclid(2) == 1 && n.weights[j].rem_euclid(2) == 1 { -1 } else { 1 };
            if beta.matrix[(tensor_index(b, i, j), tensor_index(a, j, i))] != BigInt::from(expect) {
                odd_odd_sign = false;
            }
        }
    }
    Ok(BraidingReport { well_defined: true, commutes_with_eta, involutive, isomorphism, odd_odd_sign })
}

/// Random BASE module: cyclic summands, η sending each generator to a
/// 2-torsion element one weight up (zero on odd-order generators).
pub fn random_base_module(rng: &mut impl rand::Rng, max_gens: usize, max_weight: i64) -> GradedEtaModule {
    let k = rng.gen_range(1..=max_gens);
    let orders = [0i64, 2, 4, 3, 6, 8];
    let weights: Vec<i64> = (0..k).map(|_| rng.gen_range(0..=max_weight)).collect();
    let ords: Vec<i64> = (0..k).map(|_| orders[rng.gen_range(0..orders.len())]).collect();
    let mut relations = IntMatrix::zeros(0, k);
    for (i, &o) in ords.iter().enumerate() {
        if o != 0 {
            let mut r = vec_ops::zero(k);
            r[i] = BigInt::from(o);
            relations.push_row(r);
        }
    }
    let mut eta = IntMatrix::zeros(k, k);
    for i in 0..k {
        if ords[i] % 2 == 1 {
            continue;
        }
        for j in 0..k {
            if weights[j] == weights[i] + 1 && ords[j] % 2 == 0 && ords[j] != 0 && rng.gen_bool(0.6) {
                eta[(i, j)] = BigInt::from(ords[j] / 2);
            }
        }
    }
    GradedEtaModule { ring: EtaRing::Base, weights, relations, eta, d: None }
}

/// Weight → invariant-factor description, for reports.
pub fn describe(g: &GradedAbelianGroup) -> BTreeMap<i64, String> {
    g.types().into_iter().map(|(w, t)| (w, t.to_string())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::GroupType;
    use rand::SeedableRng;

    fn cyc(w: i64, n: i64) -> GradedEtaModule {
        let rel = if n == 0 { IntMatrix::zeros(0, 1) } else { IntMatrix::from_i64(&[&[n]]) };
        GradedEtaModule::trivial_action(EtaRing::Base, vec![w], rel)
    }

    #[test]
    fn circle_normal_form() {
        let g = ring_normal_form(EtaRing::Circle, 8);
        assert_eq!(g.get(0).group_type(), GroupType::free(1));
        assert_eq!(g.get(1).group_type().to_string(), "Z/2 + Z");
        for w in 2..=8 {
            assert_eq!(g.get(w).group_type().to_string(), "Z/2 + Z/2");
        }
    }

    #[test]
    fn ring_is_valid_module() {
        for ring in [EtaRing::Base, EtaRing::Circle] {
            assert!(GradedEtaModule::ring_module(ring, 5).verify().valid);
        }
    }

    #[test]
    fn d_squared_zero_but_eta_d_nonzero_is_flagged() {
        // generators m (w0), dm (w1), η dm (w2); d² = 0 while ηd m ≠ 0
        let rel = IntMatrix::from_i64(&[&[0, 0, 2]]);
        let eta = IntMatrix::from_i64(&[&[0, 0, 0], &[0, 0, 1], &[0, 0, 0]]);
        let d = IntMatrix::from_i64(&[&[0, 1, 0], &[0, 0, 0], &[0, 0, 0]]);
        let m = GradedEtaModule::new(EtaRing::Circle, vec![0, 1, 2], rel, eta, Some(d)).unwrap();
        let rep = m.verify();
        assert!(!rep.valid);
        assert!(rep.violations.iter().any(|v| v.identity == "d²=ηd"));
    }

    #[test]
    fn witt_group_in_weight_zero() {
        let m = GradedEtaModule::trivial_action(EtaRing::Circle, vec![0], IntMatrix::from_i64(&[&[4]]));
        assert!(m.verify().valid);
    }

    #[test]
    fn unit_tensor() {
        let unit = cyc(0, 0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            let m = random_base_module(&mut rng, 3, 3);
            let t = koszul_tensor(&unit, &m).unwrap();
            assert!(t.graded().is_isomorphic(&m.graded()));
        }
    }

    #[test]
    fn weight_one_lines_braid_with_sign() {
        let z1 = cyc(1, 0);
        let rep = check_braiding(&z1, &z1).unwrap();
        assert!(rep.ok());
        assert_eq!(braiding(&z1, &z1).unwrap().matrix[(0, 0)], BigInt::from(-1));
    }

    #[test]
    fn eta_example_square_has_four_classes() {
        let m = GradedEtaModule::new(
            EtaRing::Base,
            vec![1, 2],
            IntMatrix::from_i64(&[&[2, 0], &[0, 2]]),
            IntMatrix::from_i64(&[&[0, 1], &[0, 0]]),
            None,
        )
        .unwrap();
        assert!(m.verify().valid);
        let t = koszul_tensor(&m, &m).unwrap();
        assert!(t.verify().valid);
        assert_eq!(t.group().order(), Some(BigInt::from(16)));
    }

    #[test]
    fn twist_round_trip() {
        let m = GradedEtaModule::ring_module(EtaRing::Circle, 3);
        let back = m.twist(2).twist(-2);
        assert_eq!(back.weights, m.weights);
        assert_eq!(GradedEtaModule::ring_module(EtaRing::Base, 2).twist(1).weights[0], 1);
    }
}
