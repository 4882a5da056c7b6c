//! Integer row lattices: solving `x·A = b`, left kernels, bases.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, Zero};

use super::matrix::{vec_ops, IntMatrix};
use super::snf::Reducer;

/// Precomputed Smith data for repeated solves of `x·A = b` over Z.
#[derive(Clone, Debug)]
pub struct LeftSolver {
    left: IntMatrix,
    right: IntMatrix,
    invariants: Vec<BigInt>,
    cols: usize,
}

impl LeftSolver {
    pub fn new(a: &IntMatrix) -> Self {
        let r = Reducer::new(a, true, true, false).run();
        LeftSolver { left: r.left.unwrap(), right: r.right.unwrap(), invariants: r.invariants, cols: a.cols() }
    }

    pub fn rank(&self) -> usize {
        self.invariants.len()
    }

    /// Some x with x·A = b, or None when b is not in the row lattice.
    pub fn solve(&self, b: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(b.len(), self.cols);
        // x·A = b with A = L⁻¹·D·R⁻¹  ⇔  (x·L⁻¹)·D = b·R
        let br = self.right.left_apply(b);
        let mut y = vec_ops::zero(self.left.rows());
        for (j, v) in br.iter().enumerate() {
            if j < self.invariants.len() {
                let (q, r) = v.div_rem(&self.invariants[j]);
                if !r.is_zero() {
                    return None;
                }
                y[j] = q;
            } else if !v.is_zero() {
                return None;
            }
        }
        Some(self.left.left_apply(&y))
    }

    pub fn contains(&self, b: &[BigInt]) -> bool {
        let br = self.right.left_apply(b);
        br.iter().enumerate().all(|(j, v)| match self.invariants.get(j) {
            Some(d) => v.is_multiple_of(d),
            None => v.is_zero(),
        })
    }

    /// Basis of {x : x·A = 0}, as rows.
    pub fn left_kernel(&self) -> IntMatrix {
        let idx: Vec<usize> = (self.rank()..self.left.rows()).collect();
        self.left.select_rows(&idx)
    }
}

pub fn left_kernel(a: &IntMatrix) -> IntMatrix {
    let r = Reducer::new(a, true, false, false).run();
    let left = r.left.unwrap();
    let idx: Vec<usize> = (r.invariants.len()..left.rows()).collect();
    left.select_rows(&idx)
}

/// Solve X·A = B row by row; None if some row is unsolvable.
pub fn solve_rows(a: &IntMatrix, b: &IntMatrix) -> Option<IntMatrix> {
    let s = LeftSolver::new(a);
    let mut out = IntMatrix::zeros(0, a.rows());
    for row in b.row_iter() {
        out.push_row(s.solve(row)?);
    }
    Some(out)
}

/// Hermite-style echelon basis of the row lattice spanned by `g`.
pub fn row_basis(g: &IntMatrix) -> IntMatrix {
    let cols = g.cols();
    let mut rows: Vec<Vec<BigInt>> = g.row_iter().filter(|r| !vec_ops::is_zero(r)).map(|r| r.to_vec()).collect();
    let mut basis: Vec<Vec<BigInt>> = Vec::new();
    let mut col = 0;
    while col < cols && !rows.is_empty() {
        // gcd-combine all rows with a nonzero entry in `col`
        loop {
            let nz: Vec<usize> = (0..rows.len()).filter(|&i| !rows[i][col].is_zero()).collect();
            if nz.len() <= 1 {
                break;
            }
            let piv = *nz.iter().min_by(|&&x, &&y| rows[x][col].abs().cmp(&rows[y][col].abs())).unwrap();
            for &i in &nz {
                if i == piv {
                    continue;
                }
                let q = rows[i][col].div_floor(&rows[piv][col]);
                let sub = vec_ops::scale(&rows[piv], &q);
                rows[i] = vec_ops::sub(&rows[i], &sub);
            }
            rows.retain(|r| !vec_ops::is_zero(r));
        }
        if let Some(i) = (0..rows.len()).find(|&i| !rows[i][col].is_zero()) {
            let mut r = rows.remove(i);
            if r[col].is_negative() {
                r = r.iter().map(|x| -x).collect();
            }
            basis.push(r);
        }
        col += 1;
    }
    IntMatrix::from_rows(cols, basis)
}

/// The group `L / T` where `L = {x ∈ Z^n : x·C ∈ rowspace(target)}` and
/// `T = rowspace(trivial) ⊆ L`. Returns a basis of `L` (as rows) together with
/// the relation matrix of the quotient in that basis.
///
/// This is the common shape of kernels and of hom-groups between presented
/// abelian groups.
pub fn preimage_quotient(
    c: &IntMatrix,
    target: &IntMatrix,
    trivial: &IntMatrix,
) -> Result<(IntMatrix, IntMatrix), usize> {
    let n = c.rows();
    let stacked = c.vstack(target);
    let k = left_kernel(&stacked);
    let proj = k.select_cols(&(0..n).collect::<Vec<_>>());
    let basis = row_basis(&proj);
    let solver = LeftSolver::new(&basis);
    let mut rel = IntMatrix::zeros(0, basis.rows());
    for (i, row) in trivial.row_iter().enumerate() {
        match solver.solve(row) {
            Some(x) => rel.push_row(x),
            None => return Err(i),
        }
    }
    Ok((basis, rel))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_and_kernel() {
        let a = IntMatrix::from_i64(&[&[2, 4], &[6, 8], &[1, 1]]);
        let s = LeftSolver::new(&a);
        let b = vec![BigInt::from(3), BigInt::from(5)];
        let x = s.solve(&b).unwrap();
        assert_eq!(a.left_apply(&x), b);
        let k = s.left_kernel();
        assert_eq!(k.rows(), 1);
        assert!(k.mul(&a).is_zero());
    }

    #[test]
    fn basis_of_redundant_rows() {
        let g = IntMatrix::from_i64(&[&[4, 0], &[6, 0], &[0, 3], &[2, 3]]);
        let b = row_basis(&g);
        assert_eq!(b.rows(), 2);
        let s = LeftSolver::new(&b);
        for r in g.row_iter() {
            assert!(s.contains(r));
        }
        let sg = LeftSolver::new(&g);
        for r in b.row_iter() {
            assert!(sg.contains(r));
        }
    }
}
