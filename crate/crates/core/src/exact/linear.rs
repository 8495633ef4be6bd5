use num_traits::{One, Zero};

use super::{size_of, Rational, RationalMatrixSystem};

/// General solution `particular + span(nullspace)` of a consistent system.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearSolution {
    pub particular: Vec<Rational>,
    /// One basis vector per free column, in reduced echelon form.
    pub nullspace: Vec<Vec<Rational>>,
    pub rank: usize,
}

/// Certificate of inconsistency: `y` with `yᵀA = 0` and `yᵀb ≠ 0`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Inconsistent {
    pub combination: Vec<Rational>,
}

impl Inconsistent {
    pub fn certifies(&self, sys: &RationalMatrixSystem) -> bool {
        let mut lhs = vec![Rational::zero(); sys.num_vars()];
        let mut rhs = Rational::zero();
        for ((y, row), b) in self.combination.iter().zip(&sys.rows).zip(&sys.rhs) {
            if y.is_zero() {
                continue;
            }
            for (l, a) in lhs.iter_mut().zip(row) {
                *l += y * a;
            }
            rhs += y * b;
        }
        lhs.iter().all(Zero::is_zero) && !rhs.is_zero()
    }
}

/// Exact Gauss–Jordan elimination.
///
/// Pivots are chosen per column as the entry of smallest bit size, which
/// keeps intermediate rationals short.
pub fn solve_linear(sys: &RationalMatrixSystem) -> Result<LinearSolution, Inconsistent> {
    let m = sys.num_rows();
    let n = sys.num_vars();
    // Augmented rows: [A | b | I_m].
    let mut rows: Vec<Vec<Rational>> = sys
        .rows
        .iter()
        .zip(&sys.rhs)
        .enumerate()
        .map(|(i, (row, b))| {
            let mut r = Vec::with_capacity(n + 1 + m);
            r.extend(row.iter().cloned());
            r.push(b.clone());
            r.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();

    let mut pivot_cols = Vec::new();
    let mut r = 0;
    for c in 0..n {
        if r == m {
            break;
        }
        let Some(p) = (r..m)
            .filter(|&i| !rows[i][c].is_zero())
            .min_by_key(|&i| size_of(&rows[i][c]))
        else {
            continue;
        };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i == r || row[c].is_zero() {
                continue;
            }
            let factor = row[c].clone();
            for (v, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *v -= &factor * p;
                }
            }
        }
        pivot_cols.push(c);
        r += 1;
    }
    let rank = r;

    if let Some(bad) = rows[rank..].iter().find(|row| !row[n].is_zero()) {
        return Err(Inconsistent {
            combination: bad[n + 1..].to_vec(),
        });
    }

    let mut particular = vec![Rational::zero(); n];
    for (i, &c) in pivot_cols.iter().enumerate() {
        particular[c] = rows[i][n].clone();
    }
    let mut is_pivot = vec![false; n];
    for &c in &pivot_cols {
        is_pivot[c] = true;
    }
    let nullspace = (0..n)
        .filter(|&f| !is_pivot[f])
        .map(|f| {
            let mut v = vec![Rational::zero(); n];
            v[f] = Rational::one();
            for (i, &c) in pivot_cols.iter().enumerate() {
                v[c] = -rows[i][f].clone();
            }
            v
        })
        .collect();
    Ok(LinearSolution {
        particular,
        nullspace,
        rank,
    })
}
