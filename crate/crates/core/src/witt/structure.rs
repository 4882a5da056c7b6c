//! Universal sum and product polynomials of p-typical Witt vectors.
//!
//! Variables are interleaved: `x_i` is variable `2i`, `y_i` is `2i + 1`, so
//! `S_m` and `P_m` do not depend on the truncation length they were
//! computed for.

use std::collections::HashMap;
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_traits::{One, Pow};

use super::poly::{binomial, MPoly, Mono, MAX_EXP, MAX_VARS};
use super::WittError;

/// Longest supported truncation (two variables per component).
pub const MAX_LENGTH: usize = MAX_VARS / 2;

pub fn x_var(i: usize) -> usize {
    2 * i
}

pub fn y_var(i: usize) -> usize {
    2 * i + 1
}

#[derive(Clone, Debug)]
pub struct WittStructurePolys {
    pub p: u64,
    pub n: usize,
    pub sums: Vec<MPoly>,
    pub prods: Vec<MPoly>,
}

pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

fn pow_u32(p: u64, e: usize) -> u32 {
    (p as u32).pow(e as u32)
}

/// `w_m` in the variables selected by `var`.
pub fn ghost_poly(p: u64, m: usize, var: impl Fn(usize) -> usize) -> MPoly {
    let mut out = MPoly::zero();
    for i in 0..=m {
        let e = pow_u32(p, m - i);
        let c = BigInt::from(p).pow(i as u32);
        out.add_term(Mono::var(var(i), e as u16), c);
    }
    out
}

/// `(u + v + c)^N` expanded with `u`, `v` monomial variables and `c` a
/// polynomial in other variables whose powers are supplied by `cpow`.
fn split_power(u: usize, v: usize, cpow: &[MPoly], n: u32) -> MPoly {
    let mut out = MPoly::zero();
    for r in 0..=n {
        let cr = &cpow[r as usize];
        if cr.is_zero() {
            continue;
        }
        let br = binomial(n, r);
        for a in 0..=(n - r) {
            let b = n - r - a;
            let m = Mono::var(u, a as u16).with(v, b as u16);
            let k = &br * binomial(n - r, a);
            out.add_scaled(&cr.mul_term(&m, &BigInt::one()), &k);
        }
    }
    out
}

fn c_powers(c: &MPoly, up_to: u32) -> Vec<MPoly> {
    let mut out = vec![MPoly::one()];
    for r in 1..=up_to {
        let next = if c.is_zero() { MPoly::zero() } else { out[(r - 1) as usize].mul(c) };
        out.push(next);
    }
    out
}

fn compute(p: u64, n: usize) -> Result<WittStructurePolys, WittError> {
    let pb = BigInt::from(p);
    // carries c_i = S_i − x_i − y_i and their powers
    let mut carries: Vec<Vec<MPoly>> = Vec::new();
    let mut sums = Vec::with_capacity(n);
    for m in 0..n {
        let mut num = MPoly::zero();
        for (i, cp) in carries.iter().enumerate() {
            let nexp = pow_u32(p, m - i);
            // x_i^N + y_i^N − S_i^N
            let mut diff = split_power(x_var(i), y_var(i), cp, nexp).scale(&BigInt::from(-1));
            diff.add_term(Mono::var(x_var(i), nexp as u16), BigInt::one());
            diff.add_term(Mono::var(y_var(i), nexp as u16), BigInt::one());
            num.add_scaled(&diff, &pb.clone().pow(i as u32));
        }
        let carry = num.div_exact(&pb.clone().pow(m as u32)).map_err(|_| WittError::Integrality { p, m })?;
        let mut s = carry.clone();
        s.add_term(Mono::var(x_var(m), 1), BigInt::one());
        s.add_term(Mono::var(y_var(m), 1), BigInt::one());
        sums.push(s);
        let need = if m + 1 < n { pow_u32(p, n - 1 - m) } else { 0 };
        carries.push(c_powers(&carry, need));
    }

    let mut prods: Vec<MPoly> = Vec::with_capacity(n);
    // pp[i][k] = P_i^(p^k)
    let mut pp: Vec<Vec<MPoly>> = Vec::new();
    for m in 0..n {
        let mut num = ghost_poly(p, m, x_var).mul(&ghost_poly(p, m, y_var));
        for (i, powers) in pp.iter_mut().enumerate() {
            let k = m - i;
            while powers.len() <= k {
                let next = powers.last().unwrap().pow(p as u32);
                powers.push(next);
            }
            num.add_scaled(&powers[k], &-pb.clone().pow(i as u32));
        }
        let pm = num.div_exact(&pb.clone().pow(m as u32)).map_err(|_| WittError::Integrality { p, m })?;
        pp.push(vec![pm.clone()]);
        prods.push(pm);
    }
    Ok(WittStructurePolys { p, n, sums, prods })
}

type Cache = RwLock<HashMap<(u64, usize), Arc<WittStructurePolys>>>;

fn cache() -> &'static Cache {
    static CACHE: OnceLock<Cache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Structure polynomials `S_0..S_{n−1}`, `P_0..P_{n−1}`, computed once per
/// `(p, n)` and cached. Every division by `p^m` is checked to be exact.
pub fn structure_polys(p: u64, n: usize) -> Result<Arc<WittStructurePolys>, WittError> {
    if !is_prime(p) {
        return Err(WittError::NonPrime(p));
    }
    if n == 0 {
        return Err(WittError::TruncationUnderflow);
    }
    if n > MAX_LENGTH || p.checked_pow(n as u32 - 1).map_or(true, |e| e > MAX_EXP as u64) {
        return Err(WittError::LengthTooLarge { n, max: MAX_LENGTH });
    }
    if let Some(hit) = cache().read().unwrap().get(&(p, n)) {
        return Ok(hit.clone());
    }
    let mut w = cache().write().unwrap();
    if let Some(hit) = w.get(&(p, n)) {
        return Ok(hit.clone());
    }
    let full = Arc::new(compute(p, n)?);
    for k in 1..n {
        w.entry((p, k)).or_insert_with(|| {
            Arc::new(WittStructurePolys {
                p,
                n: k,
                sums: full.sums[..k].to_vec(),
                prods: full.prods[..k].to_vec(),
            })
        });
    }
    w.insert((p, n), full.clone());
    Ok(full)
}

/// Outcome of re-deriving the ghost identities from finished polynomials.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GhostIdentityCheck {
    pub sums_ok: Vec<bool>,
    pub prods_ok: Vec<bool>,
}

impl GhostIdentityCheck {
    pub fn all_ok(&self) -> bool {
        self.sums_ok.iter().chain(&self.prods_ok).all(|&b| b)
    }
}

impl WittStructurePolys {
    /// Recheck `w_m(S) = w_m(x) + w_m(y)` and `w_m(P) = w_m(x)·w_m(y)`
    /// symbolically, recomputing every power from the stored polynomials.
    /// Product powers use plain binary exponentiation with a different
    /// exponent chain than the construction.
    pub fn verify_ghost_identities(&self) -> GhostIdentityCheck {
        let p = self.p;
        let n = self.n;
        let mut sums_ok = Vec::with_capacity(n);
        let carries: Vec<MPoly> = (0..n)
            .map(|i| {
                let mut c = self.sums[i].clone();
                c.add_term(Mono::var(x_var(i), 1), BigInt::from(-1));
                c.add_term(Mono::var(y_var(i), 1), BigInt::from(-1));
                c
            })
            .collect();
        for m in 0..n {
            let mut lhs = MPoly::zero();
            for i in 0..=m {
                let e = pow_u32(p, m - i);
                let cp = c_powers(&carries[i], e);
                lhs.add_scaled(&split_power(x_var(i), y_var(i), &cp, e), &BigInt::from(p).pow(i as u32));
            }
            let rhs = ghost_poly(p, m, x_var).add(&ghost_poly(p, m, y_var));
            sums_ok.push(lhs == rhs);
        }
        let mut prods_ok = Vec::with_capacity(n);
        for m in 0..n {
            let mut lhs = MPoly::zero();
            for i in 0..=m {
                let e = pow_u32(p, m - i);
                lhs.add_scaled(&self.prods[i].pow(e), &BigInt::from(p).pow(i as u32));
            }
            let rhs = ghost_poly(p, m, x_var).mul(&ghost_poly(p, m, y_var));
            prods_ok.push(lhs == rhs);
        }
        GhostIdentityCheck { sums_ok, prods_ok }
    }

    pub fn variable_names(&self) -> Vec<String> {
        let mut names = vec![String::new(); MAX_VARS];
        for i in 0..MAX_LENGTH {
            names[x_var(i)] = format!("x{i}");
            names[y_var(i)] = format!("y{i}");
        }
        names
    }

    /// Largest coefficient magnitude over all polynomials (for reports).
    pub fn term_counts(&self) -> (Vec<usize>, Vec<usize>) {
        (self.sums.iter().map(MPoly::len).collect(), self.prods.iter().map(MPoly::len).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xs(i: usize) -> MPoly {
        MPoly::var(x_var(i))
    }

    fn ys(i: usize) -> MPoly {
        MPoly::var(y_var(i))
    }

    #[test]
    fn first_components() {
        for p in [2, 3, 5] {
            let s = structure_polys(p, 1).unwrap();
            assert_eq!(s.sums[0], xs(0).add(&ys(0)));
            assert_eq!(s.prods[0], xs(0).mul(&ys(0)));
        }
    }

    #[test]
    fn p2_sum_component_one() {
        // oracle: solve x0² + 2x1 + y0² + 2y1 = (x0+y0)² + 2 S1 over Q
        let s = structure_polys(2, 2).unwrap();
        let expect = xs(1).add(&ys(1)).sub(&xs(0).mul(&ys(0)));
        assert_eq!(s.sums[1], expect);
    }

    #[test]
    fn p3_product_component_one() {
        let s = structure_polys(3, 2).unwrap();
        let expect = xs(0)
            .pow(3)
            .mul(&ys(1))
            .add(&xs(1).mul(&ys(0).pow(3)))
            .add(&xs(1).mul(&ys(1)).scale(&BigInt::from(3)));
        assert_eq!(s.prods[1], expect);
    }

    #[test]
    fn split_power_matches_naive() {
        let c = xs(0).mul(&ys(0)).scale(&BigInt::from(-1)).add(&xs(0).pow(2));
        let full = xs(1).add(&ys(1)).add(&c);
        for n in [1u32, 2, 3, 4, 9] {
            assert_eq!(split_power(x_var(1), y_var(1), &c_powers(&c, n), n), full.pow(n));
        }
    }

    #[test]
    fn small_cases_verify() {
        for (p, n) in [(2, 4), (3, 3), (5, 2)] {
            assert!(structure_polys(p, n).unwrap().verify_ghost_identities().all_ok());
        }
    }

    #[test]
    fn non_prime_rejected() {
        assert!(matches!(structure_polys(4, 2), Err(WittError::NonPrime(4))));
    }
}
