//! η-deformed Cartier complexes: a graded `Z[η]/2η`-module `M` with `d`
//! raising weight, and weight-preserving `F`, `V`, subject to
//! `d² = ηd`, `Vd = pdV`, `dF = pFd`, `FdV = d + η`, `FV = p`.
//!
//! All maps act on generator rows: row `i` is the image of generator `i`,
//! and `x ↦ x·A` so `A·B` means "first A, then B".

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow, Zero};
use serde::{Deserialize, Serialize};

use crate::eta::{EtaRing, GradedEtaModule, ModuleReport, Violation};
use crate::json::strings;
use crate::linalg::{preimage_quotient, vec_ops, FGAbelianGroup, GroupHom, GroupType, IntMatrix, LeftSolver};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CartierError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid Cartier complex: {0}")]
    Invalid(String),
    #[error("not derived V-complete")]
    NotComplete,
    #[error("no stabilization within depth {0}")]
    NoStabilization(u32),
    #[error("a map is not well defined: {0}")]
    IllDefined(String),
    #[error("cannot collapse: {0}")]
    Collapse(String),
}

/// One stage: the module with its η-action and differential.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CartierStage {
    pub module: GradedEtaModule,
    pub d: IntMatrix,
}

impl CartierStage {
    pub fn ngens(&self) -> usize {
        self.module.ngens()
    }

    pub fn group(&self) -> FGAbelianGroup {
        self.module.group()
    }

    pub fn eta(&self) -> &IntMatrix {
        &self.module.eta
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EtaCartierComplex {
    pub p: u64,
    pub module: GradedEtaModule,
    pub d: IntMatrix,
    #[serde(rename = "F")]
    pub f: IntMatrix,
    #[serde(rename = "V")]
    pub v: IntMatrix,
}

/// Two adjacent truncation stages `M = lower`, `M' = upper` with
/// `R: M' → M`, `F: M' → M`, `V: M → M'`. An [`EtaCartierComplex`] is the
/// case `M' = M`, `R = id`. The five relations are composites that make
/// sense in this shape even when `F` does not descend to `M`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TruncatedCartierComplex {
    pub p: u64,
    pub lower: CartierStage,
    pub upper: CartierStage,
    #[serde(rename = "R")]
    pub r: IntMatrix,
    #[serde(rename = "F")]
    pub f: IntMatrix,
    #[serde(rename = "V")]
    pub v: IntMatrix,
}

fn shape(m: &IntMatrix, rows: usize, cols: usize, name: &str) -> Result<(), CartierError> {
    if m.rows() != rows || m.cols() != cols {
        return Err(CartierError::Shape(format!("{name} is {}x{}, expected {rows}x{cols}", m.rows(), m.cols())));
    }
    Ok(())
}

impl EtaCartierComplex {
    pub fn new(p: u64, module: GradedEtaModule, d: IntMatrix, f: IntMatrix, v: IntMatrix) -> Result<Self, CartierError> {
        let n = module.ngens();
        if module.ring != EtaRing::Base {
            return Err(CartierError::Shape("underlying module must be over BASE".into()));
        }
        shape(&d, n, n, "d")?;
        shape(&f, n, n, "F")?;
        shape(&v, n, n, "V")?;
        Ok(EtaCartierComplex { p, module, d, f, v })
    }

    /// Rank-`r` module over `Z/p^k` in weight 0, `d = η = 0`.
    pub fn weight_zero(p: u64, k: u32, f: IntMatrix, v: IntMatrix) -> Self {
        let r = f.rows();
        let q = BigInt::from(p).pow(k);
        let module = GradedEtaModule::trivial_action(EtaRing::Base, vec![0; r], IntMatrix::scalar(r, &q));
        EtaCartierComplex { p, module, d: IntMatrix::zeros(r, r), f, v }
    }

    /// `W_k(F_p) = Z/p^k` with `F = id`, `V = p`.
    pub fn witt(p: u64, k: u32) -> Self {
        Self::weight_zero(p, k, IntMatrix::identity(1), IntMatrix::scalar(1, &BigInt::from(p)))
    }

    /// Discrete construction from graded data `(M_⋆, d, F, V)`, `η = 0`.
    pub fn discrete(p: u64, weights: Vec<i64>, relations: IntMatrix, d: IntMatrix, f: IntMatrix, v: IntMatrix) -> Result<Self, CartierError> {
        let module = GradedEtaModule::trivial_action(EtaRing::Base, weights, relations);
        Self::new(p, module, d, f, v)
    }

    pub fn ngens(&self) -> usize {
        self.module.ngens()
    }

    pub fn group(&self) -> FGAbelianGroup {
        self.module.group()
    }

    pub fn stage(&self) -> CartierStage {
        CartierStage { module: self.module.clone(), d: self.d.clone() }
    }

    pub fn as_truncated(&self) -> TruncatedCartierComplex {
        TruncatedCartierComplex {
            p: self.p,
            lower: self.stage(),
            upper: self.stage(),
            r: IntMatrix::identity(self.ngens()),
            f: self.f.clone(),
            v: self.v.clone(),
        }
    }

    pub fn verify(&self) -> ModuleReport {
        let mut report = self.as_truncated().verify();
        // R = id makes the R-checks vacuous; drop their duplicates
        report.violations.retain(|v| !v.identity.starts_with('R'));
        report.valid = report.violations.is_empty();
        report
    }

    pub fn twist(&self, i: i64) -> Self {
        EtaCartierComplex { module: self.module.twist(i), ..self.clone() }
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        assert_eq!(self.p, other.p);
        EtaCartierComplex {
            p: self.p,
            module: self.module.direct_sum(&other.module),
            d: IntMatrix::block_diag(&[&self.d, &other.d]),
            f: IntMatrix::block_diag(&[&self.f, &other.f]),
            v: IntMatrix::block_diag(&[&self.v, &other.v]),
        }
    }

    /// Quotient by `Fil^n = V^n M + dV^n M` once it stabilizes, which is the
    /// inverse limit of the `M/Fil^n`; returns the completion and the
    /// canonical map (identity on generators).
    pub fn v_complete(&self, depth: u32) -> Result<(EtaCartierComplex, GroupHom), CartierError> {
        let g = self.group();
        let n = self.ngens();
        let fil = |k: u32| -> IntMatrix {
            let mut vk = IntMatrix::identity(n);
            for _ in 0..k {
                vk = vk.mul(&self.v);
            }
            g.relations().vstack(&vk).vstack(&vk.mul(&self.d))
        };
        let mut prev = fil(0);
        for k in 1..=depth {
            let cur = fil(k);
            let s = LeftSolver::new(&cur);
            if prev.row_iter().all(|r| s.contains(r)) {
                let module = GradedEtaModule { relations: cur, ..self.module.clone() };
                let out = EtaCartierComplex { module, ..self.clone() };
                let canon = GroupHom::new(g.clone(), out.group(), IntMatrix::identity(n))
                    .map_err(|e| CartierError::IllDefined(e.to_string()))?;
                return Ok((out, canon));
            }
            prev = cur;
        }
        Err(CartierError::NoStabilization(depth))
    }
}

pub fn verify_cartier(m: &EtaCartierComplex) -> ModuleReport {
    m.verify()
}

fn row_violations(name: &str, lhs: &IntMatrix, rhs: &IntMatrix, g: &FGAbelianGroup, out: &mut Vec<Violation>) {
    for i in 0..lhs.rows() {
        let diff = vec_ops::sub(lhs.row(i), rhs.row(i));
        if !g.is_zero_element(&diff) {
            out.push(Violation { identity: name.into(), generator: Some(i), witness: strings(&diff) });
        }
    }
}

fn weight_shift(name: &str, m: &IntMatrix, src: &[i64], dst: &[i64], shift: i64, out: &mut Vec<Violation>) {
    for i in 0..m.rows() {
        if m.row(i).iter().enumerate().any(|(j, c)| !c.is_zero() && dst[j] != src[i] + shift) {
            let what = if shift == 0 { "preserves weight" } else { "raises weight" };
            out.push(Violation { identity: format!("{name} {what}"), generator: Some(i), witness: strings(m.row(i)) });
        }
    }
}

fn well_defined(name: &str, m: &IntMatrix, src: &FGAbelianGroup, dst: &FGAbelianGroup, out: &mut Vec<Violation>) {
    if let Err(e) = GroupHom::new(src.clone(), dst.clone(), m.clone()) {
        out.push(Violation { identity: format!("{name} well defined"), generator: None, witness: vec![e.to_string()] });
    }
}

impl TruncatedCartierComplex {
    pub fn validate_shapes(&self) -> Result<(), CartierError> {
        let (nl, nu) = (self.lower.ngens(), self.upper.ngens());
        shape(&self.lower.d, nl, nl, "lower d")?;
        shape(&self.upper.d, nu, nu, "upper d")?;
        shape(&self.r, nu, nl, "R")?;
        shape(&self.f, nu, nl, "F")?;
        shape(&self.v, nl, nu, "V")
    }

    pub fn verify(&self) -> ModuleReport {
        let mut out = Vec::new();
        if let Err(e) = self.validate_shapes() {
            out.push(Violation { identity: "shapes".into(), generator: None, witness: vec![e.to_string()] });
            return ModuleReport::from_violations(out);
        }
        let (lo, up) = (&self.lower, &self.upper);
        let (gl, gu) = (lo.group(), up.group());
        let (wl, wu) = (&lo.module.weights, &up.module.weights);
        let p = BigInt::from(self.p);
        for (tag, st, g) in [("lower", lo, &gl), ("upper", up, &gu)] {
            for v in st.module.verify().violations {
                out.push(Violation { identity: format!("{tag}: {}", v.identity), ..v });
            }
            well_defined("d", &st.d, g, g, &mut out);
            weight_shift("d", &st.d, &st.module.weights, &st.module.weights, 1, &mut out);
            row_violations("d²=ηd", &st.d.mul(&st.d), &st.d.mul(st.eta()), g, &mut out);
            row_violations("dη=ηd", &st.eta().mul(&st.d), &st.d.mul(st.eta()), g, &mut out);
        }
        well_defined("F", &self.f, &gu, &gl, &mut out);
        well_defined("V", &self.v, &gl, &gu, &mut out);
        well_defined("R", &self.r, &gu, &gl, &mut out);
        weight_shift("F", &self.f, wu, wl, 0, &mut out);
        weight_shift("V", &self.v, wl, wu, 0, &mut out);
        weight_shift("R", &self.r, wu, wl, 0, &mut out);
        // Vd = pdV on M, into M'
        row_violations("Vd=pdV", &lo.d.mul(&self.v), &self.v.mul(&up.d).scale(&p), &gu, &mut out);
        // dF = pFd on M', into M
        row_violations("dF=pFd", &self.f.mul(&lo.d), &up.d.mul(&self.f).scale(&p), &gl, &mut out);
        // FdV = d + η on M
        row_violations("FdV=d+η", &self.v.mul(&up.d).mul(&self.f), &lo.d.add(lo.eta()), &gl, &mut out);
        // FV = p on M
        row_violations("FV=p", &self.v.mul(&self.f), &IntMatrix::scalar(lo.ngens(), &p), &gl, &mut out);
        row_violations("Fη=ηF", &up.eta().mul(&self.f), &self.f.mul(lo.eta()), &gl, &mut out);
        row_violations("Vη=ηV", &lo.eta().mul(&self.v), &self.v.mul(up.eta()), &gu, &mut out);
        row_violations("Rd=dR", &up.d.mul(&self.r), &self.r.mul(&lo.d), &gl, &mut out);
        row_violations("Rη=ηR", &up.eta().mul(&self.r), &self.r.mul(lo.eta()), &gl, &mut out);
        ModuleReport::from_violations(out)
    }

    /// `V̄ = R∘V`, an endomorphism of the lower stage.
    pub fn v_bar(&self) -> IntMatrix {
        self.v.mul(&self.r)
    }

    /// Descend to an [`EtaCartierComplex`] on the lower stage, possible when
    /// `R` is onto and `F` kills `ker R`.
    pub fn collapse(&self) -> Result<EtaCartierComplex, CartierError> {
        let (gl, gu) = (self.lower.group(), self.upper.group());
        let r = GroupHom::new(gu.clone(), gl.clone(), self.r.clone()).map_err(|e| CartierError::IllDefined(e.to_string()))?;
        if !r.cokernel().is_trivial() {
            return Err(CartierError::Collapse("R is not onto".into()));
        }
        let (_, incl) = r.kernel();
        let fk = incl.matrix.mul(&self.f);
        if gl.rows_are_zero(&fk).is_some() {
            return Err(CartierError::Collapse("F does not vanish on ker R".into()));
        }
        // lift generators of M through R, then apply F
        let lifter = LeftSolver::new(&self.r.vstack(gl.relations()));
        let nl = self.lower.ngens();
        let mut f = IntMatrix::zeros(0, nl);
        for i in 0..nl {
            let y = lifter.solve(&vec_ops::unit(nl, i)).expect("R is onto");
            let lift = &y[..self.upper.ngens()];
            f.push_row(self.f.left_apply(lift));
        }
        EtaCartierComplex::new(self.p, self.lower.module.clone(), self.lower.d.clone(), f, self.v_bar())
    }
}

/// `N = ⊕_i {(x, y) ∈ M_i × M_{i+1} : d x = p y}` with its two projections.
#[derive(Clone, Debug)]
pub struct FixedPointModule {
    pub p: u64,
    pub weights: Vec<i64>,
    pub group: FGAbelianGroup,
    /// First coordinates of the generators, rows in `M`-coordinates.
    pub first: IntMatrix,
    pub second: IntMatrix,
    basis: IntMatrix,
}

impl FixedPointModule {
    pub fn ngens(&self) -> usize {
        self.weights.len()
    }

    pub fn pr1(&self, m: &CartierStage) -> GroupHom {
        GroupHom { src: self.group.clone(), dst: m.group(), matrix: self.first.clone() }
    }

    pub fn pr2(&self, m: &CartierStage) -> GroupHom {
        GroupHom { src: self.group.clone(), dst: m.group(), matrix: self.second.clone() }
    }

    /// Coordinates of `(x, y)` in the generators, if it is a member.
    pub fn express(&self, x: &[BigInt], y: &[BigInt]) -> Option<Vec<BigInt>> {
        let mut v = x.to_vec();
        v.extend_from_slice(y);
        LeftSolver::new(&self.basis).solve(&v)
    }

    fn express_rows(&self, xs: &IntMatrix, ys: &IntMatrix) -> Result<IntMatrix, CartierError> {
        let solver = LeftSolver::new(&self.basis);
        let mut out = IntMatrix::zeros(0, self.ngens());
        for i in 0..xs.rows() {
            let mut v = xs.row_vec(i);
            v.extend_from_slice(ys.row(i));
            out.push_row(solver.solve(&v).ok_or_else(|| CartierError::IllDefined(format!("pair {i} is not in N")))?);
        }
        Ok(out)
    }
}

pub fn fixed_pi0(p: u64, m: &CartierStage) -> FixedPointModule {
    let mods = &m.module;
    let n = m.ngens();
    let pb = BigInt::from(p);
    let mut weights = Vec::new();
    let mut basis = IntMatrix::zeros(0, 2 * n);
    let mut blocks = Vec::new();
    let mut ws: Vec<i64> = mods.support();
    ws.extend(mods.support().iter().map(|w| w - 1));
    ws.sort();
    ws.dedup();
    for w in ws {
        let (ix, iy) = (mods.gens_in_weight(w), mods.gens_in_weight(w + 1));
        if ix.is_empty() && iy.is_empty() {
            continue;
        }
        let (a, b) = (ix.len(), iy.len());
        // (x, y) ↦ x·d − p·y in M_{w+1}
        let mut c = IntMatrix::zeros(a + b, b);
        for (r, &i) in ix.iter().enumerate() {
            for (s, &j) in iy.iter().enumerate() {
                c[(r, s)] = m.d[(i, j)].clone();
            }
        }
        for s in 0..b {
            c[(a + s, s)] = -pb.clone();
        }
        let target = mods.weight_group(w + 1).relations().clone();
        let rx = mods.weight_group(w).relations().clone();
        let ry = target.clone();
        let trivial = IntMatrix::block_diag(&[&rx, &ry]);
        let (bw, rel) = preimage_quotient(&c, &target, &trivial).expect("relations lie in N");
        for row in bw.row_iter() {
            let mut full = vec_ops::zero(2 * n);
            for (r, &i) in ix.iter().enumerate() {
                full[i] = row[r].clone();
            }
            for (s, &j) in iy.iter().enumerate() {
                full[n + j] = row[a + s].clone();
            }
            basis.push_row(full);
            weights.push(w);
        }
        blocks.push(rel);
    }
    let refs: Vec<&IntMatrix> = blocks.iter().collect();
    let rel = IntMatrix::block_diag(&refs);
    let k = weights.len();
    let rel = if rel.cols() == k { rel } else { IntMatrix::zeros(0, k) };
    let first = basis.select_cols(&(0..n).collect::<Vec<_>>());
    let second = basis.select_cols(&(n..2 * n).collect::<Vec<_>>());
    FixedPointModule { p, weights, group: FGAbelianGroup::new(k, rel), first, second, basis }
}

/// `M[d/p]`: generators `m_j` then `e·m_j`, with `d(m) = p·e·m` and
/// `e·d(m) = p·η·e·m`.
#[derive(Clone, Debug)]
pub struct OrbitModule {
    pub module: GradedEtaModule,
    /// Action of `e` on generators.
    pub e: IntMatrix,
    /// Canonical map `M → M[d/p]`.
    pub canonical: IntMatrix,
}

pub fn orbit_pi0(p: u64, m: &CartierStage) -> OrbitModule {
    let n = m.ngens();
    let mods = &m.module;
    let pb = BigInt::from(p);
    let mut weights = mods.weights.clone();
    weights.extend(mods.weights.iter().map(|w| w + 1));
    let mut rel = IntMatrix::block_diag(&[&mods.relations, &mods.relations]);
    for i in 0..n {
        // d(m_i) − p·e·m_i
        let mut row = vec_ops::zero(2 * n);
        for j in 0..n {
            row[j] = m.d[(i, j)].clone();
        }
        row[n + i] -= &pb;
        rel.push_row(row);
        // e·d(m_i) − p·η·e·m_i
        let mut row = vec_ops::zero(2 * n);
        for j in 0..n {
            row[n + j] = &m.d[(i, j)] - &pb * &mods.eta[(i, j)];
        }
        rel.push_row(row);
    }
    let eta = IntMatrix::block_diag(&[&mods.eta, &mods.eta]);
    let mut e = IntMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        e[(i, n + i)] = BigInt::one();
        for j in 0..n {
            e[(n + i, n + j)] = mods.eta[(i, j)].clone();
        }
    }
    let canonical = IntMatrix::identity(n).hstack(&IntMatrix::zeros(n, n));
    OrbitModule { module: GradedEtaModule { ring: EtaRing::Base, weights, relations: rel, eta, d: None }, e, canonical }
}

/// `norm: M → N`, `m ↦ (p·m, d m)`.
pub fn norm_pi0(p: u64, m: &CartierStage, n: &FixedPointModule) -> Result<GroupHom, CartierError> {
    let x = IntMatrix::scalar(m.ngens(), &BigInt::from(p));
    let mat = n.express_rows(&x, &m.d)?;
    Ok(GroupHom { src: m.group(), dst: n.group.clone(), matrix: mat })
}

/// `F̂: M' → N(M)`, `m ↦ (F m, F d m)`.
pub fn induced_f_hat(c: &TruncatedCartierComplex, n: &FixedPointModule) -> Result<GroupHom, CartierError> {
    let mat = n.express_rows(&c.f, &c.upper.d.mul(&c.f))?;
    Ok(GroupHom { src: c.upper.group(), dst: n.group.clone(), matrix: mat })
}

/// `V̂: M[d/p] → M'`, `m ↦ V m`, `e·m ↦ d V m`.
pub fn induced_v_hat(c: &TruncatedCartierComplex, o: &OrbitModule) -> Result<GroupHom, CartierError> {
    let mat = c.v.vstack(&c.v.mul(&c.upper.d));
    GroupHom::new(o.module.group(), c.upper.group(), mat).map_err(|e| CartierError::IllDefined(format!("V̂: {e}")))
}

/// Result of comparing `F̂ ∘ V̂` (restricted along `M → M[d/p]`) with the norm.
#[derive(Clone, Debug, Serialize)]
pub struct NormComparison {
    /// `F̂V̂ = norm` exactly.
    pub equal: bool,
    /// `F̂V̂ − norm` equals `m ↦ (0, η m)`.
    pub difference_is_eta: bool,
}

pub fn compare_norm(c: &TruncatedCartierComplex) -> Result<NormComparison, CartierError> {
    let n = fixed_pi0(c.p, &c.lower);
    let o = orbit_pi0(c.p, &c.lower);
    let fh = induced_f_hat(c, &n)?;
    let vh = induced_v_hat(c, &o)?;
    let norm = norm_pi0(c.p, &c.lower, &n)?;
    let composite = GroupHom { src: c.lower.group(), dst: n.group.clone(), matrix: o.canonical.mul(&vh.matrix).mul(&fh.matrix) };
    let eta = n.express_rows(&IntMatrix::zeros(c.lower.ngens(), c.lower.ngens()), c.lower.eta())?;
    let diff = GroupHom { matrix: composite.matrix.sub(&norm.matrix), ..composite.clone() };
    let eta = GroupHom { matrix: eta, ..composite.clone() };
    Ok(NormComparison { equal: composite.equals(&norm), difference_is_eta: diff.equals(&eta) })
}

/// Maps `N(M) → N(M')` and `M[d/p] → M'[d/p]` induced by `φ: M → M'`.
pub fn fixed_map(phi: &IntMatrix, src: &FixedPointModule, dst: &FixedPointModule) -> Result<IntMatrix, CartierError> {
    dst.express_rows(&src.first.mul(phi), &src.second.mul(phi))
}

pub fn orbit_map(phi: &IntMatrix) -> IntMatrix {
    IntMatrix::block_diag(&[phi, phi])
}

/// Checks that `φ: M → N` commutes with `d`, `η`, `F`, `V`.
pub fn verify_cartier_map(m: &EtaCartierComplex, n: &EtaCartierComplex, phi: &IntMatrix) -> ModuleReport {
    let mut out = Vec::new();
    let (gm, gn) = (m.group(), n.group());
    well_defined("φ", phi, &gm, &gn, &mut out);
    if out.is_empty() {
        weight_shift("φ", phi, &m.module.weights, &n.module.weights, 0, &mut out);
        for (name, a, b) in [("φd=dφ", &m.d, &n.d), ("φη=ηφ", &m.module.eta, &n.module.eta), ("φF=Fφ", &m.f, &n.f), ("φV=Vφ", &m.v, &n.v)] {
            row_violations(name, &a.mul(phi), &phi.mul(b), &gn, &mut out);
        }
    }
    ModuleReport::from_violations(out)
}

/// Whether the truncation tower `… →V̄ M →V̄ M` has vanishing `lim`, `lim¹`,
/// decided on `M/p^j` for `j ≤ depth`: each is finite, so `lim¹ = 0` and
/// `lim = 0` exactly when `V̄` is nilpotent there.
#[derive(Clone, Debug, Serialize)]
pub struct CompletenessReport {
    pub complete: bool,
    /// Nilpotency index of `V̄` on `M/p^j`, or `None` if not nilpotent.
    pub nilpotency: Vec<Option<usize>>,
}

pub fn derived_v_completeness(p: u64, m: &CartierStage, v_bar: &IntMatrix, depth: u32) -> CompletenessReport {
    let n = m.ngens();
    let mut nilpotency = Vec::new();
    for j in 1..=depth {
        let q = BigInt::from(p).pow(j);
        let g = m.group().reduce_mod(&q);
        // images of V̄^k stabilize after at most n·j steps in a group of order ≤ p^{nj}
        let bound = n * j as usize + 1;
        let mut pow = IntMatrix::identity(n);
        let mut found = None;
        for k in 0..=bound {
            if g.rows_are_zero(&pow).is_none() {
                found = Some(k);
                break;
            }
            pow = pow.mul(v_bar).reduce_mod(&q);
        }
        nilpotency.push(found);
    }
    CompletenessReport { complete: nilpotency.iter().all(Option::is_some), nilpotency }
}

pub fn is_derived_v_complete(c: &TruncatedCartierComplex, depth: u32) -> bool {
    derived_v_completeness(c.p, &c.lower, &c.v_bar(), depth).complete
}

/// `H⁰ = ker(1 − frob)` and `H⁻¹ = coker(1 − frob)` per weight.
#[derive(Clone, Debug)]
pub struct TcHeart {
    pub h0: BTreeMap<i64, FGAbelianGroup>,
    pub h_minus1: BTreeMap<i64, FGAbelianGroup>,
}

pub fn tc_heart(m: &EtaCartierComplex, frob: &IntMatrix, depth: u32) -> Result<TcHeart, CartierError> {
    let report = m.verify();
    if !report.valid {
        return Err(CartierError::Invalid(report.violations[0].identity.clone()));
    }
    if !derived_v_completeness(m.p, &m.stage(), &m.v, depth).complete {
        return Err(CartierError::NotComplete);
    }
    let n = m.ngens();
    shape(frob, n, n, "frob")?;
    let mut out = Vec::new();
    weight_shift("frob", frob, &m.module.weights, &m.module.weights, 0, &mut out);
    if !out.is_empty() {
        return Err(CartierError::IllDefined("frob must preserve weight".into()));
    }
    let mut h0 = BTreeMap::new();
    let mut h1 = BTreeMap::new();
    for w in m.module.support() {
        let idx = m.module.gens_in_weight(w);
        let g = m.module.weight_group(w);
        let one_minus = IntMatrix::identity(n).sub(frob).select_rows(&idx).select_cols(&idx);
        let h = GroupHom::new(g.clone(), g, one_minus).map_err(|e| CartierError::IllDefined(format!("frob: {e}")))?;
        h0.insert(w, h.kernel().0);
        h1.insert(w, h.cokernel());
    }
    Ok(TcHeart { h0, h_minus1: h1 })
}

/// Hom-group of Cartier maps at one truncation, with its invariants split
/// into full factors `p^j` and the rest.
#[derive(Clone, Debug, Serialize)]
pub struct HomComputation {
    pub depth: u32,
    pub group_type: GroupType,
    /// Number of summands `Z/p^depth`.
    pub full: usize,
    /// Remaining invariant factors.
    pub torsion: Vec<String>,
    /// Generators as matrices, flattened row-major (`|M| × |N|`).
    #[serde(skip)]
    pub generators: Vec<IntMatrix>,
}

#[derive(Clone, Debug, Serialize)]
pub struct HomResult {
    pub at_depth: HomComputation,
    pub previous: HomComputation,
    /// `full` and `torsion` agree at `depth − 1` and `depth`.
    pub stable: bool,
}

fn hom_at(m: &EtaCartierComplex, n: &EtaCartierComplex, j: u32) -> HomComputation {
    let q = BigInt::from(m.p).pow(j);
    let (nm, nn) = (m.ngens(), n.ngens());
    let rel_m = m.group().reduce_mod(&q).relations().clone();
    let rel_n = n.group().reduce_mod(&q).relations().clone();
    let vars: Vec<(usize, usize)> = (0..nm)
        .flat_map(|a| (0..nn).map(move |b| (a, b)))
        .filter(|&(a, b)| m.module.weights[a] == n.module.weights[b])
        .collect();
    let ops = [(&m.d, &n.d), (&m.module.eta, &n.module.eta), (&m.f, &n.f), (&m.v, &n.v)];
    let blocks = ops.len() * nm + rel_m.rows();
    let mut c = IntMatrix::zeros(vars.len(), blocks * nn);
    for (u, &(a, b)) in vars.iter().enumerate() {
        for (k, (tm, tn)) in ops.iter().enumerate() {
            // (T_M X − X T_N): row i gets T_M[i][a]·e_b, row a gets −T_N[b]
            for i in 0..nm {
                let t = &tm[(i, a)];
                if !t.is_zero() {
                    c[(u, (k * nm + i) * nn + b)] += t;
                }
            }
            for col in 0..nn {
                let t = &tn[(b, col)];
                if !t.is_zero() {
                    c[(u, (k * nm + a) * nn + col)] -= t;
                }
            }
        }
        for r in 0..rel_m.rows() {
            let t = &rel_m[(r, a)];
            if !t.is_zero() {
                c[(u, (ops.len() * nm + r) * nn + b)] += t;
            }
        }
    }
    let copies: Vec<&IntMatrix> = (0..blocks).map(|_| &rel_n).collect();
    let target = IntMatrix::block_diag(&copies);
    let mut trivial = IntMatrix::zeros(0, vars.len());
    for a in 0..nm {
        for r in rel_n.row_iter() {
            let mut row = vec_ops::zero(vars.len());
            let mut ok = true;
            for (b, x) in r.iter().enumerate() {
                if x.is_zero() {
                    continue;
                }
                match vars.iter().position(|&v| v == (a, b)) {
                    Some(u) => row[u] = x.clone(),
                    None => ok = false,
                }
            }
            if ok {
                trivial.push_row(row);
            }
        }
    }
    let (basis, rel) = preimage_quotient(&c, &target, &trivial).expect("zero maps are Cartier maps");
    let group = FGAbelianGroup::new(basis.rows(), rel);
    let group_type = group.group_type();
    let full = group_type.invariant_factors.iter().filter(|d| **d == q).count();
    let torsion = group_type.invariant_factors.iter().filter(|d| **d != q).map(|d| d.to_string()).collect();
    let generators = basis
        .row_iter()
        .map(|row| {
            let mut x = IntMatrix::zeros(nm, nn);
            for (u, &(a, b)) in vars.iter().enumerate() {
                x[(a, b)] = row[u].clone();
            }
            x
        })
        .collect();
    HomComputation { depth: j, group_type, full, torsion, generators }
}

/// Hom-group of Cartier maps `M → N` over `Z/p^k`, with the certificate
/// comparing depths `k − 1` and `k`.
pub fn hom_cartier(m: &EtaCartierComplex, n: &EtaCartierComplex, depth: u32) -> Result<HomResult, CartierError> {
    if m.p != n.p {
        return Err(CartierError::Shape("different primes".into()));
    }
    if depth < 2 {
        return Err(CartierError::NoStabilization(depth));
    }
    let at_depth = hom_at(m, n, depth);
    let previous = hom_at(m, n, depth - 1);
    let stable = at_depth.full == previous.full && at_depth.torsion == previous.torsion;
    if !stable {
        return Err(CartierError::NoStabilization(depth));
    }
    Ok(HomResult { at_depth, previous, stable })
}

/// Orders of `p`: `v_p(x)` for nonzero `x`.
pub fn valuation(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut x = x.clone();
    let mut v = 0;
    while x.is_multiple_of(&pb) {
        x /= &pb;
        v += 1;
    }
    Some(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: i64) -> BigInt {
        BigInt::from(n)
    }

    fn m(rows: &[&[i64]]) -> IntMatrix {
        IntMatrix::from_i64(rows)
    }

    /// `M_0 = Z/p²·a`, `M_1 = Z/p·b`, `d a = b`, `F = (p, 1)`, `V = (1, 0)`.
    fn small(p: i64) -> EtaCartierComplex {
        EtaCartierComplex::discrete(
            p as u64,
            vec![0, 1],
            m(&[&[p * p, 0], &[0, p]]),
            m(&[&[0, 1], &[0, 0]]),
            m(&[&[p, 0], &[0, 1]]),
            m(&[&[1, 0], &[0, 0]]),
        )
        .unwrap()
    }

    #[test]
    fn witt_module_is_valid() {
        for p in [2, 3, 5] {
            let w = EtaCartierComplex::witt(p, 4);
            assert!(w.verify().valid);
            assert!(is_derived_v_complete(&w.as_truncated(), 6));
        }
        assert!(small(3).verify().valid);
    }

    #[test]
    fn perturbed_frobenius_fails() {
        let mut c = small(3);
        c.f[(1, 1)] = z(2);
        let r = c.verify();
        let names: Vec<&str> = r.violations.iter().map(|v| v.identity.as_str()).collect();
        assert!(names.contains(&"FdV=d+η"), "{names:?}");
        let mut c = EtaCartierComplex::witt(3, 3);
        c.f[(0, 0)] = z(2);
        let names: Vec<String> = c.verify().violations.into_iter().map(|v| v.identity).collect();
        assert_eq!(names, vec!["FV=p"]);
    }

    #[test]
    fn fixed_points_examples() {
        // M = Z in weight 0, d = 0, p = 3
        let c = EtaCartierComplex::discrete(3, vec![0], IntMatrix::zeros(0, 1), m(&[&[0]]), m(&[&[1]]), m(&[&[3]])).unwrap();
        let n = fixed_pi0(3, &c.stage());
        assert_eq!(n.group.group_type(), GroupType::free(1));
        // M_0 = M_1 = Z, d = id, p = 2: N_0 generated by (2, 1)
        let c = EtaCartierComplex::discrete(2, vec![0, 1], IntMatrix::zeros(0, 2), m(&[&[0, 1], &[0, 0]]), m(&[&[2, 0], &[0, 1]]), m(&[&[1, 0], &[0, 2]])).unwrap();
        assert!(c.verify().valid);
        let n = fixed_pi0(2, &c.stage());
        let w0: Vec<usize> = (0..n.ngens()).filter(|&i| n.weights[i] == 0).collect();
        assert_eq!(w0.len(), 1);
        let (x, y) = (n.first.row(w0[0]), n.second.row(w0[0]));
        let sign = if x[0] < z(0) { z(-1) } else { z(1) };
        assert_eq!((&x[0] * &sign, &y[1] * &sign), (z(2), z(1)));
        let norm = norm_pi0(2, &c.stage(), &n).unwrap();
        assert_eq!(norm.matrix.row(0).iter().filter(|v| !v.is_zero()).count(), 1);
        // M_0 = Z/4, d = 0, p = 2: N_0 = M_0, N_{-1} = {y : 2y = 0}
        let c = EtaCartierComplex::discrete(2, vec![0], m(&[&[4]]), m(&[&[0]]), m(&[&[1]]), m(&[&[2]])).unwrap();
        let n = fixed_pi0(2, &c.stage());
        assert_eq!(n.group.order(), Some(z(8)));
        assert_eq!(n.weights.iter().filter(|w| **w == -1).count(), 1);
    }

    #[test]
    fn norm_factors_through_f_and_v() {
        let c = small(3).as_truncated();
        let cmp = compare_norm(&c).unwrap();
        assert!(cmp.equal && cmp.difference_is_eta);
        let w = EtaCartierComplex::witt(2, 3).as_truncated();
        assert!(compare_norm(&w).unwrap().equal);
    }

    #[test]
    fn completeness_dichotomy() {
        let formal = EtaCartierComplex::witt(3, 5);
        assert!(is_derived_v_complete(&formal.as_truncated(), 6));
        let etale = EtaCartierComplex::weight_zero(3, 5, m(&[&[3]]), m(&[&[1]]));
        assert!(etale.verify().valid);
        assert!(!is_derived_v_complete(&etale.as_truncated(), 6));
        let (done, _) = formal.v_complete(8).unwrap();
        assert!(done.verify().valid);
        assert_eq!(done.group().group_type(), formal.group().group_type());
        let (again, _) = done.v_complete(8).unwrap();
        assert_eq!(again.group().group_type(), done.group().group_type());
    }

    #[test]
    fn tc_of_fp() {
        for p in [2u64, 3, 5] {
            for k in 1..=4u32 {
                let w = EtaCartierComplex::witt(p, k);
                let t = tc_heart(&w, &IntMatrix::identity(1), k + 1).unwrap();
                let q = BigInt::from(p).pow(k);
                assert_eq!(t.h0[&0].group_type(), FGAbelianGroup::cyclic(&q).group_type());
                assert_eq!(t.h_minus1[&0].group_type(), FGAbelianGroup::cyclic(&q).group_type());
                let t = tc_heart(&w, &IntMatrix::zeros(1, 1), k + 1).unwrap();
                assert!(t.h0[&0].is_trivial() && t.h_minus1[&0].is_trivial());
                let t = tc_heart(&w, &IntMatrix::scalar(1, &BigInt::from(p)), k + 1).unwrap();
                assert!(t.h0[&0].is_trivial() && t.h_minus1[&0].is_trivial());
            }
        }
    }

    #[test]
    fn homs() {
        let formal = EtaCartierComplex::witt(3, 6);
        let etale = EtaCartierComplex::weight_zero(3, 6, m(&[&[3]]), m(&[&[1]]));
        let h = hom_cartier(&formal, &etale, 6).unwrap();
        assert!(h.at_depth.group_type.is_zero());
        let e = hom_cartier(&formal, &formal, 6).unwrap();
        assert_eq!(e.at_depth.full, 1);
        assert!(e.at_depth.torsion.is_empty());
        let s = small(3);
        let id = IntMatrix::identity(s.ngens());
        assert!(verify_cartier_map(&s, &s, &id).valid);
        assert_eq!(valuation(&z(18), 3), Some(2));
    }
}
