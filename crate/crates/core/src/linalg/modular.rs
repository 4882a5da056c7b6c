//! Homogeneous linear systems over Z/N.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::One;

use super::group::{FGAbelianGroup, GroupType};
use super::matrix::{vec_ops, IntMatrix};
use super::snf::Reducer;
use super::LinalgError;

/// Solutions of `E·x ≡ 0 (mod N)`, `x` a column of unknowns.
#[derive(Clone, Debug)]
pub struct SolutionModule {
    pub modulus: BigInt,
    /// Generators as columns-of-unknowns written as rows.
    pub generators: Vec<Vec<BigInt>>,
    /// Additive order of each generator.
    pub orders: Vec<BigInt>,
}

impl SolutionModule {
    /// The module as an abstract group: `⊕ Z/order_i`.
    pub fn group(&self) -> FGAbelianGroup {
        let n = self.orders.len();
        FGAbelianGroup::new(n, IntMatrix::from_diagonal(&self.orders))
    }

    pub fn group_type(&self) -> GroupType {
        self.group().group_type()
    }

    /// Number of cyclic summands after reduction.
    pub fn rank(&self) -> usize {
        self.group_type().invariant_factors.len()
    }

    pub fn size(&self) -> BigInt {
        self.orders.iter().product()
    }
}

/// Generators of the full solution set of `equations · x ≡ 0 (mod modulus)`.
///
/// With `L·E·R = D`, the substitution `x = R·y` turns the system into
/// `d_j·y_j ≡ 0`, whose solutions are the multiples of `N / gcd(d_j, N)`.
pub fn solve_commutation(equations: &IntMatrix, modulus: &BigInt) -> Result<SolutionModule, LinalgError> {
    if modulus < &BigInt::from(2) {
        return Err(LinalgError::ModulusTooSmall);
    }
    let e = equations.reduce_mod(modulus);
    let r = Reducer::new(&e, false, true, false).run();
    let right = r.right.unwrap();
    let u = e.cols();
    let mut generators = Vec::new();
    let mut orders = Vec::new();
    for j in 0..u {
        let g = match r.invariants.get(j) {
            Some(d) => d.gcd(modulus),
            None => modulus.clone(),
        };
        if g.is_one() {
            continue;
        }
        let step = modulus / &g;
        let col = vec_ops::reduce(&vec_ops::scale(&right.col_vec(j), &step), modulus);
        generators.push(col);
        orders.push(g);
    }
    Ok(SolutionModule { modulus: modulus.clone(), generators, orders })
}

/// The linear constraints `X·A ≡ B·X` for an unknown `rows × cols` matrix
/// `X`, flattened row-major, as an equation matrix for [`solve_commutation`].
/// `A` is `cols × cols`, `B` is `rows × rows`.
pub fn intertwiner_equations(a: &IntMatrix, b: &IntMatrix) -> IntMatrix {
    let (rows, cols) = (b.rows(), a.rows());
    let var = |i: usize, j: usize| i * cols + j;
    let mut eq = IntMatrix::zeros(0, rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            // (X·A)_{ij} − (B·X)_{ij}
            let mut row = vec_ops::zero(rows * cols);
            for k in 0..cols {
                row[var(i, k)] += &a[(k, j)];
            }
            for k in 0..rows {
                row[var(k, j)] -= &b[(i, k)];
            }
            eq.push_row(row);
        }
    }
    eq
}

#[cfg(test)]
mod tests {
    use super::*;

    fn z(n: i64) -> BigInt {
        BigInt::from(n)
    }

    #[test]
    fn trivial_systems() {
        let s = solve_commutation(&IntMatrix::from_i64(&[&[0]]), &z(4)).unwrap();
        assert_eq!(s.group_type(), GroupType::cyclic(4));
        let s = solve_commutation(&IntMatrix::from_i64(&[&[2]]), &z(4)).unwrap();
        assert_eq!(s.generators, vec![vec![z(2)]]);
        assert_eq!(s.group_type(), GroupType::cyclic(2));
    }

    #[test]
    fn commutant_of_supersingular_frobenius_mod_8() {
        let f = IntMatrix::from_i64(&[&[0, 2], &[1, 0]]);
        let eq = intertwiner_equations(&f, &f);
        let s = solve_commutation(&eq, &z(8)).unwrap();
        // brute force over all 8^4 matrices
        let mut count = 0u32;
        for code in 0..4096u32 {
            let x: Vec<BigInt> = (0..4).map(|k| z(((code >> (3 * k)) & 7) as i64)).collect();
            let xm = IntMatrix::from_rows(2, vec![x[0..2].to_vec(), x[2..4].to_vec()]);
            if xm.mul(&f).sub(&f.mul(&xm)).reduce_mod(&z(8)).is_zero() {
                count += 1;
            }
        }
        assert_eq!(BigInt::from(count), s.size());
        assert_eq!(s.rank(), 2);
        assert_eq!(s.group_type().invariant_factors, vec![z(8), z(8)]);
    }
}
