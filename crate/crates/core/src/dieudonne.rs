//! Dieudonné modules over `F_p`: free `Z/p^k`-modules with `F`, `V`,
//! `FV = VF = p`.
//!
//! Matrices act on columns: `F(e_j) = Σ_i F[i][j]·e_i`. The Cartier side
//! uses rows, so [`to_cartier`] transposes.
//!
//! Convention: formal groups are the modules with topologically nilpotent
//! `V`; étale ones have `V` invertible.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Pow};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cartier::{hom_cartier, is_derived_v_complete, valuation, CartierError, EtaCartierComplex, HomComputation, HomResult};
use crate::eta::{ModuleReport, Violation};
use crate::linalg::{intertwiner_equations, solve_commutation, IntMatrix};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DieudonneError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("truncation {0} too small for this computation")]
    TruncationTooSmall(u32),
    #[error("no stabilization within depth {0}")]
    NoStabilization(u32),
    #[error(transparent)]
    Cartier(#[from] CartierError),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DieudonneModule {
    pub p: u64,
    pub k: u32,
    #[serde(rename = "F")]
    pub f: IntMatrix,
    #[serde(rename = "V")]
    pub v: IntMatrix,
}

fn modulus(p: u64, k: u32) -> BigInt {
    BigInt::from(p).pow(k)
}

impl DieudonneModule {
    /// Entries are reduced into `[0, p^k)`.
    pub fn new(p: u64, k: u32, f: IntMatrix, v: IntMatrix) -> Result<Self, DieudonneError> {
        let r = f.rows();
        if f.cols() != r || v.rows() != r || v.cols() != r {
            return Err(DieudonneError::Shape(format!("F is {}x{}, V is {}x{}", f.rows(), f.cols(), v.rows(), v.cols())));
        }
        if k == 0 {
            return Err(DieudonneError::Shape("truncation must be at least 1".into()));
        }
        let q = modulus(p, k);
        Ok(DieudonneModule { p, k, f: f.reduce_mod(&q), v: v.reduce_mod(&q) })
    }

    pub fn rank(&self) -> usize {
        self.f.rows()
    }

    pub fn zero(p: u64, k: u32) -> Self {
        DieudonneModule { p, k, f: IntMatrix::zeros(0, 0), v: IntMatrix::zeros(0, 0) }
    }

    /// `F = p`, `V = 1`.
    pub fn etale(p: u64, k: u32) -> Self {
        Self::new(p, k, IntMatrix::scalar(1, &BigInt::from(p)), IntMatrix::identity(1)).unwrap()
    }

    /// `F = 1`, `V = p`.
    pub fn formal(p: u64, k: u32) -> Self {
        Self::new(p, k, IntMatrix::identity(1), IntMatrix::scalar(1, &BigInt::from(p))).unwrap()
    }

    /// `F = V = [[0, p], [1, 0]]`.
    pub fn supersingular(p: u64, k: u32) -> Self {
        let m = IntMatrix::from_i64(&[&[0, p as i64], &[1, 0]]);
        Self::new(p, k, m.clone(), m).unwrap()
    }

    pub fn catalog(p: u64, k: u32) -> Vec<(&'static str, DieudonneModule)> {
        vec![("etale", Self::etale(p, k)), ("formal", Self::formal(p, k)), ("supersingular", Self::supersingular(p, k))]
    }

    pub fn direct_sum(&self, other: &Self) -> Self {
        DieudonneModule {
            p: self.p,
            k: self.k.min(other.k),
            f: IntMatrix::block_diag(&[&self.f, &other.f]),
            v: IntMatrix::block_diag(&[&self.v, &other.v]),
        }
    }

    /// `(g F g⁻¹, g V g⁻¹)`.
    pub fn conjugate(&self, g: &IntMatrix, g_inv: &IntMatrix) -> Self {
        let q = modulus(self.p, self.k);
        DieudonneModule {
            p: self.p,
            k: self.k,
            f: g.mul(&self.f).mul(g_inv).reduce_mod(&q),
            v: g.mul(&self.v).mul(g_inv).reduce_mod(&q),
        }
    }
}

pub fn verify_dieudonne(m: &DieudonneModule) -> ModuleReport {
    let q = modulus(m.p, m.k);
    let want = IntMatrix::scalar(m.rank(), &BigInt::from(m.p)).reduce_mod(&q);
    let mut violations = Vec::new();
    for (name, prod) in [("FV=p", m.f.mul(&m.v)), ("VF=p", m.v.mul(&m.f))] {
        let prod = prod.reduce_mod(&q);
        if prod != want {
            violations.push(Violation { identity: name.into(), generator: None, witness: vec![prod.to_string()] });
        }
    }
    ModuleReport::from_violations(violations)
}

/// `V` mod `p` is nilpotent, i.e. `V^r ≡ 0 (mod p)`.
pub fn is_formal(m: &DieudonneModule) -> bool {
    let p = BigInt::from(m.p);
    let v = m.v.reduce_mod(&p);
    let mut pow = IntMatrix::identity(m.rank());
    for _ in 0..m.rank() {
        pow = pow.mul(&v).reduce_mod(&p);
    }
    pow.is_zero()
}

/// Characteristic polynomial `det(tI − A)`, leading coefficient first
/// (Berkowitz; no division).
pub fn charpoly(a: &IntMatrix) -> Vec<BigInt> {
    let n = a.rows();
    let mut poly = vec![BigInt::one()];
    for k in 0..n {
        let r: Vec<BigInt> = (0..k).map(|j| a[(k, j)].clone()).collect();
        let mut col: Vec<BigInt> = (0..k).map(|i| a[(i, k)].clone()).collect();
        let mut t = vec![BigInt::one(), -a[(k, k)].clone()];
        for _ in 0..k {
            t.push(-r.iter().zip(&col).map(|(x, y)| x * y).sum::<BigInt>());
            col = (0..k).map(|i| (0..k).map(|j| &a[(i, j)] * &col[j]).sum()).collect();
        }
        poly = (0..k + 2).map(|i| (0..=i.min(k)).map(|j| &t[i - j] * &poly[j]).sum()).collect();
    }
    poly
}

/// A slope `num/den` in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct Slope {
    pub num: u64,
    pub den: u64,
}

impl Slope {
    fn new(num: u64, den: u64) -> Self {
        let g = num.gcd(&den);
        Slope { num: num / g, den: den / g }
    }
}

impl fmt::Display for Slope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

impl Serialize for Slope {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SlopeData {
    /// `(slope, multiplicity)`, slopes increasing.
    pub slopes: Vec<(Slope, usize)>,
}

/// Newton polygon of `charpoly(F)`. A coefficient that vanishes mod `p^k`
/// is only known to have valuation `≥ k`; the polygon is accepted when
/// every such point lies on or above the hull of the known ones.
pub fn newton_slopes(m: &DieudonneModule) -> Result<SlopeData, DieudonneError> {
    let q = modulus(m.p, m.k);
    let r = m.rank();
    let coeffs = charpoly(&m.f);
    let vals: Vec<Option<u32>> = coeffs.iter().map(|c| valuation(&c.mod_floor(&q), m.p)).collect();
    if r > 0 && vals[r].is_none() {
        return Err(DieudonneError::TruncationTooSmall(m.k));
    }
    // lower convex hull of the known points
    let mut hull: Vec<(usize, u32)> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        let Some(v) = *v else { continue };
        while hull.len() >= 2 {
            let (x1, y1) = hull[hull.len() - 2];
            let (x2, y2) = hull[hull.len() - 1];
            // drop (x2, y2) if it lies on or above the chord to (i, v)
            let lhs = (y2 as i64 - y1 as i64) * (i as i64 - x1 as i64);
            let rhs = (v as i64 - y1 as i64) * (x2 as i64 - x1 as i64);
            if lhs >= rhs {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push((i, v));
    }
    for (i, v) in vals.iter().enumerate() {
        if v.is_some() {
            continue;
        }
        let seg = hull.windows(2).find(|w| w[0].0 < i && i < w[1].0).expect("interior point");
        let ((x1, y1), (x2, y2)) = (seg[0], seg[1]);
        // hull height at i is ≤ k
        if (y1 as i64) * (x2 - x1) as i64 + (y2 as i64 - y1 as i64) * (i - x1) as i64 > (m.k as i64) * (x2 - x1) as i64 {
            return Err(DieudonneError::TruncationTooSmall(m.k));
        }
    }
    let mut slopes: Vec<(Slope, usize)> = Vec::new();
    for w in hull.windows(2) {
        let ((x1, y1), (x2, y2)) = (w[0], w[1]);
        let s = Slope::new((y2 - y1) as u64, (x2 - x1) as u64);
        match slopes.last_mut() {
            Some((last, mult)) if *last == s => *mult += x2 - x1,
            _ => slopes.push((s, x2 - x1)),
        }
    }
    Ok(SlopeData { slopes })
}

fn hom_at(m: &DieudonneModule, n: &DieudonneModule, j: u32) -> Result<HomComputation, DieudonneError> {
    let q = modulus(m.p, j);
    let (rm, rn) = (m.rank(), n.rank());
    let eqs = intertwiner_equations(&m.f, &n.f).vstack(&intertwiner_equations(&m.v, &n.v));
    let (full, torsion, group_type, generators) = if rm * rn == 0 {
        (0, Vec::new(), crate::GroupType::zero(), Vec::new())
    } else {
        let sol = solve_commutation(&eqs, &q).map_err(|e| DieudonneError::Shape(e.to_string()))?;
        let gt = sol.group_type();
        let full = gt.invariant_factors.iter().filter(|d| **d == q).count();
        let torsion = gt.invariant_factors.iter().filter(|d| **d != q).map(|d| d.to_string()).collect();
        // φ is rn × rm acting on columns; stored transposed like the Cartier side
        let gens = sol
            .generators
            .iter()
            .map(|g| IntMatrix::from_rows(rm, g.chunks(rm).map(|c| c.to_vec()).collect()).transpose())
            .collect();
        (full, torsion, gt, gens)
    };
    Ok(HomComputation { depth: j, group_type, full, torsion, generators })
}

/// Matrices `φ` over `Z/p^depth` with `φF = Fφ`, `φV = Vφ`, certified by
/// agreement of the invariants at `depth − 1`.
pub fn hom_dieudonne(m: &DieudonneModule, n: &DieudonneModule, depth: u32) -> Result<HomResult, DieudonneError> {
    if m.p != n.p {
        return Err(DieudonneError::Shape("different primes".into()));
    }
    if depth > m.k.min(n.k) {
        return Err(DieudonneError::TruncationTooSmall(m.k.min(n.k)));
    }
    if depth < 2 {
        return Err(DieudonneError::NoStabilization(depth));
    }
    let at_depth = hom_at(m, n, depth)?;
    let previous = hom_at(m, n, depth - 1)?;
    let stable = at_depth.full == previous.full && at_depth.torsion == previous.torsion;
    if !stable {
        return Err(DieudonneError::NoStabilization(depth));
    }
    Ok(HomResult { at_depth, previous, stable })
}

/// Weight-0 Cartier module with `d = η = 0`.
pub fn to_cartier(m: &DieudonneModule) -> EtaCartierComplex {
    EtaCartierComplex::weight_zero(m.p, m.k, m.f.transpose(), m.v.transpose())
}

#[derive(Clone, Debug, Serialize)]
pub struct BridgeReport {
    pub agree: bool,
    pub dieudonne: HomResult,
    pub cartier: HomResult,
}

pub fn bridge_faithfulness(m: &DieudonneModule, n: &DieudonneModule, depth: u32) -> Result<BridgeReport, DieudonneError> {
    let dieudonne = hom_dieudonne(m, n, depth)?;
    let cartier = hom_cartier(&to_cartier(m), &to_cartier(n), depth)?;
    let agree = dieudonne.at_depth.group_type == cartier.at_depth.group_type;
    Ok(BridgeReport { agree, dieudonne, cartier })
}

pub fn bridge_faithfulness_check(m: &DieudonneModule, n: &DieudonneModule, depth: u32) -> Result<bool, DieudonneError> {
    Ok(bridge_faithfulness(m, n, depth)?.agree)
}

pub fn is_v_complete(m: &DieudonneModule) -> bool {
    is_derived_v_complete(&to_cartier(m).as_truncated(), m.k)
}

fn inverse_mod(a: &BigInt, q: &BigInt) -> Option<BigInt> {
    let g = a.mod_floor(q).extended_gcd(q);
    g.gcd.is_one().then(|| g.x.mod_floor(q))
}

/// Random invertible `2×2` matrix over `Z/p^k` with its inverse.
pub fn random_gl2(rng: &mut impl Rng, p: u64, k: u32) -> (IntMatrix, IntMatrix) {
    let q = modulus(p, k);
    let top = q.to_u64_digits().1.first().copied().unwrap_or(0);
    loop {
        let e: Vec<BigInt> = (0..4).map(|_| BigInt::from(rng.gen_range(0..top))).collect();
        let det = &e[0] * &e[3] - &e[1] * &e[2];
        if let Some(inv) = inverse_mod(&det, &q) {
            let g = IntMatrix::from_rows(2, vec![vec![e[0].clone(), e[1].clone()], vec![e[2].clone(), e[3].clone()]]);
            let adj = IntMatrix::from_rows(2, vec![vec![e[3].clone(), -e[1].clone()], vec![-e[2].clone(), e[0].clone()]]);
            return (g, adj.scale(&inv).reduce_mod(&q));
        }
    }
}

/// `F = U·diag(p^a, p^b)·W`, `V = W⁻¹·diag(p^{1−a}, p^{1−b})·U⁻¹` with
/// random `U, W` and `a, b ∈ {0, 1}`.
pub fn random_module(rng: &mut impl Rng, p: u64, k: u32) -> DieudonneModule {
    let (u, ui) = random_gl2(rng, p, k);
    let (w, wi) = random_gl2(rng, p, k);
    let (a, b) = (rng.gen_range(0..2u32), rng.gen_range(0..2u32));
    let pb = BigInt::from(p);
    let diag = |x: u32, y: u32| IntMatrix::from_diagonal(&[pb.clone().pow(x), pb.clone().pow(y)]);
    let f = u.mul(&diag(a, b)).mul(&w);
    let v = wi.mul(&diag(1 - a, 1 - b)).mul(&ui);
    DieudonneModule::new(p, k, f, v).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn z(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn catalog_validity_and_formality() {
        for p in [2, 3, 5] {
            for (name, m) in DieudonneModule::catalog(p, 6) {
                assert!(verify_dieudonne(&m).valid, "{name}");
                assert!(to_cartier(&m).verify().valid, "{name}");
                assert_eq!(is_formal(&m), name != "etale", "{name}");
                assert_eq!(is_v_complete(&m), is_formal(&m), "{name}");
            }
        }
        let bad = DieudonneModule::new(3, 4, IntMatrix::identity(1), IntMatrix::identity(1)).unwrap();
        assert!(!verify_dieudonne(&bad).valid);
    }

    #[test]
    fn charpoly_small() {
        assert_eq!(charpoly(&IntMatrix::from_i64(&[&[0, 3], &[1, 0]])), vec![z(1), z(0), z(-3)]);
        let a = IntMatrix::from_i64(&[&[2, 1, 0], &[0, 3, 4], &[5, 0, 1]]);
        // det(tI − A) = t³ − 6t² + 11t − 26
        assert_eq!(charpoly(&a), vec![z(1), z(-6), z(11), z(-26)]);
    }

    #[test]
    fn slopes() {
        let s = |m: &DieudonneModule| newton_slopes(m).unwrap().slopes.iter().map(|(s, n)| format!("{s}x{n}")).collect::<Vec<_>>();
        assert_eq!(s(&DieudonneModule::formal(3, 4)), ["0x1"]);
        assert_eq!(s(&DieudonneModule::etale(3, 4)), ["1x1"]);
        assert_eq!(s(&DieudonneModule::supersingular(3, 4)), ["1/2x2"]);
        assert_eq!(s(&DieudonneModule::formal(2, 4).direct_sum(&DieudonneModule::etale(2, 4))), ["0x1", "1x1"]);
        assert!(matches!(newton_slopes(&DieudonneModule::etale(3, 1)), Err(DieudonneError::TruncationTooSmall(1))));
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let ss = DieudonneModule::supersingular(3, 6);
        for _ in 0..20 {
            let (g, gi) = random_gl2(&mut rng, 3, 6);
            assert_eq!(newton_slopes(&ss.conjugate(&g, &gi)).unwrap(), newton_slopes(&ss).unwrap());
        }
    }

    #[test]
    fn homs() {
        let (e, f, s) = (DieudonneModule::etale(3, 6), DieudonneModule::formal(3, 6), DieudonneModule::supersingular(3, 6));
        assert!(hom_dieudonne(&f, &e, 6).unwrap().at_depth.group_type.is_zero());
        let end = hom_dieudonne(&f, &f, 6).unwrap().at_depth;
        assert_eq!((end.full, end.torsion.len()), (1, 0));
        let end = hom_dieudonne(&s, &s, 6).unwrap().at_depth;
        // Z_p[F] with F² = p: rank 2
        assert_eq!((end.full, end.torsion.len()), (2, 0));
        for (m, n) in [(&e, &f), (&f, &s), (&s, &s), (&e, &e)] {
            assert!(bridge_faithfulness_check(m, n, 6).unwrap());
        }
        let zero = DieudonneModule::zero(3, 6);
        let r = bridge_faithfulness(&zero, &s, 6).unwrap();
        assert!(r.agree && r.dieudonne.at_depth.group_type.is_zero() && r.cartier.at_depth.group_type.is_zero());
    }

    #[test]
    fn random_modules() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..20 {
            let m = random_module(&mut rng, 2, 6);
            assert!(verify_dieudonne(&m).valid);
            assert_eq!(is_formal(&m), is_v_complete(&m));
        }
    }
}
