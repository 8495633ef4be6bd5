//! Exact rational linear algebra and linear programming.
//!
//! Everything here works over arbitrary-precision rationals; there is no
//! tolerance anywhere and every witness can be checked by substitution.

mod linear;
mod simplex;

pub use linear::{solve_linear, Inconsistent, LinearSolution};
pub use simplex::{lp_solve, Bound, Constraint, LpOutcome, LpProblem, LpStatus, Relation, Sense};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

pub type Rational = num_rational::BigRational;

pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

/// Approximate value, for reports and cross-checks only.
pub fn to_f64(q: &Rational) -> f64 {
    use num_traits::ToPrimitive;
    q.to_f64().unwrap_or(f64::NAN)
}

/// Least common multiple of the denominators of `values`.
pub fn denominator_lcm(values: &[Rational]) -> BigInt {
    values
        .iter()
        .fold(BigInt::one(), |acc, v| acc.lcm(v.denom()))
}

/// Formats as `p/q`, or `p` for integers.
pub fn format_rational(q: &Rational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

pub fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                None
            } else {
                Some(Rational::new(n, d))
            }
        }
        None => s.parse::<BigInt>().ok().map(Rational::from_integer),
    }
}

/// A linear system `A x = b` with named columns.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalMatrixSystem {
    pub rows: Vec<Vec<Rational>>,
    pub rhs: Vec<Rational>,
    pub names: Vec<String>,
}

impl RationalMatrixSystem {
    pub fn new(names: Vec<String>) -> Self {
        RationalMatrixSystem {
            rows: vec![],
            rhs: vec![],
            names,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.names.len()
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn push_row(&mut self, row: Vec<Rational>, rhs: Rational) {
        assert_eq!(row.len(), self.num_vars(), "row length mismatch");
        self.rows.push(row);
        self.rhs.push(rhs);
    }

    /// `A x - b`, row by row.
    pub fn residual(&self, x: &[Rational]) -> Vec<Rational> {
        self.rows
            .iter()
            .zip(&self.rhs)
            .map(|(row, b)| dot(row, x) - b)
            .collect()
    }

    pub fn is_satisfied_by(&self, x: &[Rational]) -> bool {
        self.residual(x).iter().all(Zero::is_zero)
    }

    /// Homogeneous version of the system (right-hand side zeroed).
    pub fn homogeneous(&self) -> Self {
        RationalMatrixSystem {
            rows: self.rows.clone(),
            rhs: vec![Rational::zero(); self.rhs.len()],
            names: self.names.clone(),
        }
    }
}

pub fn dot(a: &[Rational], b: &[Rational]) -> Rational {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(Rational::zero(), |acc, (x, y)| acc + x * y)
}

/// Bit size used to pick small pivots.
pub(crate) fn size_of(q: &Rational) -> u64 {
    q.numer().abs().bits() + q.denom().bits()
}
