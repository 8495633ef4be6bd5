//! Two-phase dense tableau simplex with Bland's rule.

use num_traits::{One, Signed, Zero};

use super::{dot, Rational, RationalMatrixSystem};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Constraint {
    pub coeffs: Vec<Rational>,
    pub relation: Relation,
    pub rhs: Rational,
}

/// Componentwise bounds; `None` means unbounded in that direction.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bound {
    pub lower: Option<Rational>,
    pub upper: Option<Rational>,
}

impl Bound {
    pub fn non_negative() -> Self {
        Bound {
            lower: Some(Rational::zero()),
            upper: None,
        }
    }

    pub fn free() -> Self {
        Bound {
            lower: None,
            upper: None,
        }
    }

    pub fn between(lower: Rational, upper: Rational) -> Self {
        Bound {
            lower: Some(lower),
            upper: Some(upper),
        }
    }

    pub fn fixed(value: Rational) -> Self {
        Bound::between(value.clone(), value)
    }

    fn contains(&self, v: &Rational) -> bool {
        self.lower.as_ref().is_none_or(|l| v >= l) && self.upper.as_ref().is_none_or(|u| v <= u)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
    Feasibility,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpProblem {
    pub num_vars: usize,
    pub constraints: Vec<Constraint>,
    /// Defaults to non-negative.
    pub bounds: Vec<Bound>,
    pub objective: Vec<Rational>,
    pub sense: Sense,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LpOutcome {
    pub status: LpStatus,
    /// Optimal point, in the caller's variables.
    pub point: Option<Vec<Rational>>,
    pub value: Option<Rational>,
    /// On infeasibility, one multiplier per constraint (see
    /// [`LpProblem::is_refuted_by`]).
    pub farkas: Option<Vec<Rational>>,
}

impl LpProblem {
    pub fn new(num_vars: usize, sense: Sense) -> Self {
        LpProblem {
            num_vars,
            constraints: vec![],
            bounds: vec![Bound::non_negative(); num_vars],
            objective: vec![Rational::zero(); num_vars],
            sense,
        }
    }

    pub fn add(&mut self, coeffs: Vec<Rational>, relation: Relation, rhs: Rational) {
        assert_eq!(coeffs.len(), self.num_vars, "constraint length mismatch");
        self.constraints.push(Constraint {
            coeffs,
            relation,
            rhs,
        });
    }

    /// Adds every row of `sys` as an equality.
    pub fn add_equalities(&mut self, sys: &RationalMatrixSystem) {
        for (row, b) in sys.rows.iter().zip(&sys.rhs) {
            self.add(row.clone(), Relation::Eq, b.clone());
        }
    }

    /// True when `x` satisfies every constraint and bound exactly.
    pub fn is_feasible_point(&self, x: &[Rational]) -> bool {
        x.len() == self.num_vars
            && self.bounds.iter().zip(x).all(|(b, v)| b.contains(v))
            && self.constraints.iter().all(|c| {
                let lhs = dot(&c.coeffs, x);
                match c.relation {
                    Relation::Le => lhs <= c.rhs,
                    Relation::Ge => lhs >= c.rhs,
                    Relation::Eq => lhs == c.rhs,
                }
            })
    }

    /// Checks a Farkas certificate: multipliers `μ` (`≤ 0` on `≤` rows,
    /// `≥ 0` on `≥` rows, free on equalities) such that `g = Σ μᵢaᵢ`
    /// satisfies `max{g·x : x within bounds} < Σ μᵢbᵢ`. Every feasible `x`
    /// has `g·x ≥ Σ μᵢbᵢ`, so no feasible point exists.
    pub fn is_refuted_by(&self, multipliers: &[Rational]) -> bool {
        if multipliers.len() != self.constraints.len() {
            return false;
        }
        if self.has_empty_box() {
            return true;
        }
        let mut g = vec![Rational::zero(); self.num_vars];
        let mut d = Rational::zero();
        for (mu, c) in multipliers.iter().zip(&self.constraints) {
            let sign_ok = match c.relation {
                Relation::Le => !mu.is_positive(),
                Relation::Ge => !mu.is_negative(),
                Relation::Eq => true,
            };
            if !sign_ok {
                return false;
            }
            if mu.is_zero() {
                continue;
            }
            for (gj, a) in g.iter_mut().zip(&c.coeffs) {
                *gj += mu * a;
            }
            d += mu * &c.rhs;
        }
        let mut max = Rational::zero();
        for (gj, b) in g.iter().zip(&self.bounds) {
            let extreme = if gj.is_positive() {
                &b.upper
            } else if gj.is_negative() {
                &b.lower
            } else {
                continue;
            };
            match extreme {
                Some(v) => max += gj * v,
                None => return false,
            }
        }
        max < d
    }

    fn has_empty_box(&self) -> bool {
        self.bounds
            .iter()
            .any(|b| matches!((&b.lower, &b.upper), (Some(l), Some(u)) if l > u))
    }
}

/// A caller variable expressed in standard-form columns:
/// `x = offset + Σ coef · column`.
struct VarMap {
    offset: Rational,
    terms: Vec<(usize, Rational)>,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    /// Reduced costs; last entry is minus the objective value.
    cost: Vec<Rational>,
    basis: Vec<usize>,
    /// Columns allowed to enter.
    enterable: usize,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cost.len()
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let inv = self.rows[r][c].recip();
        for v in self.rows[r].iter_mut() {
            if !v.is_zero() {
                *v *= &inv;
            }
        }
        let pivot_row = std::mem::take(&mut self.rows[r]);
        let nonzero: Vec<usize> = (0..pivot_row.len())
            .filter(|&j| !pivot_row[j].is_zero())
            .collect();
        let eliminate = |row: &mut Vec<Rational>| {
            if row[c].is_zero() {
                return;
            }
            let factor = row[c].clone();
            for &j in &nonzero {
                let delta = &factor * &pivot_row[j];
                row[j] -= delta;
            }
        };
        for row in self.rows.iter_mut() {
            if !row.is_empty() {
                eliminate(row);
            }
        }
        eliminate(&mut self.cost);
        self.rows[r] = pivot_row;
        self.basis[r] = c;
    }

    /// Runs the simplex method to optimality. Returns `false` when
    /// unbounded. Entering columns follow Dantzig's rule; after a run of
    /// degenerate pivots it switches to Bland's rule until the objective
    /// moves again, which rules out cycling.
    fn optimize(&mut self) -> bool {
        const DEGENERATE_RUN: usize = 20;
        let rhs = self.width() - 1;
        let mut stalled = 0;
        loop {
            let enter = if stalled < DEGENERATE_RUN {
                (0..self.enterable)
                    .filter(|&j| self.cost[j].is_negative())
                    .min_by(|&a, &b| self.cost[a].cmp(&self.cost[b]).then(a.cmp(&b)))
            } else {
                (0..self.enterable).find(|&j| self.cost[j].is_negative())
            };
            let Some(enter) = enter else {
                return true;
            };
            let mut leave: Option<(usize, Rational)> = None;
            for (i, row) in self.rows.iter().enumerate() {
                if !row[enter].is_positive() {
                    continue;
                }
                let ratio = &row[rhs] / &row[enter];
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            match leave {
                Some((r, ratio)) => {
                    if ratio.is_zero() {
                        stalled += 1;
                    } else {
                        stalled = 0;
                    }
                    self.pivot(r, enter)
                }
                None => return false,
            }
        }
    }
}

/// Solves `p` exactly.
pub fn lp_solve(p: &LpProblem) -> LpOutcome {
    assert_eq!(p.bounds.len(), p.num_vars);
    assert_eq!(p.objective.len(), p.num_vars);
    if p.has_empty_box() {
        return LpOutcome {
            status: LpStatus::Infeasible,
            point: None,
            value: None,
            farkas: Some(vec![Rational::zero(); p.constraints.len()]),
        };
    }

    // Structural columns.
    let mut ncols = 0;
    let mut vars = Vec::with_capacity(p.num_vars);
    let mut upper_rows: Vec<(usize, Rational)> = Vec::new();
    for b in &p.bounds {
        let map = match (&b.lower, &b.upper) {
            (Some(l), Some(u)) if l == u => VarMap {
                offset: l.clone(),
                terms: vec![],
            },
            (Some(l), u) => {
                let col = ncols;
                ncols += 1;
                if let Some(u) = u {
                    upper_rows.push((col, u - l));
                }
                VarMap {
                    offset: l.clone(),
                    terms: vec![(col, Rational::one())],
                }
            }
            (None, Some(u)) => {
                let col = ncols;
                ncols += 1;
                VarMap {
                    offset: u.clone(),
                    terms: vec![(col, -Rational::one())],
                }
            }
            (None, None) => {
                ncols += 2;
                VarMap {
                    offset: Rational::zero(),
                    terms: vec![(ncols - 2, Rational::one()), (ncols - 1, -Rational::one())],
                }
            }
        };
        vars.push(map);
    }
    let user_rows = p.constraints.len();
    let slack_count = p
        .constraints
        .iter()
        .filter(|c| c.relation != Relation::Eq)
        .count()
        + upper_rows.len();
    let n_std = ncols + slack_count;
    let m = user_rows + upper_rows.len();
    let width = n_std + m + 1;

    let mut rows: Vec<Vec<Rational>> = Vec::with_capacity(m);
    let mut row_sign = Vec::with_capacity(m);
    let mut next_slack = ncols;
    for c in &p.constraints {
        let mut row = vec![Rational::zero(); width];
        let mut rhs = c.rhs.clone();
        for (j, a) in c.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            rhs -= a * &vars[j].offset;
            for (col, coef) in &vars[j].terms {
                row[*col] += a * coef;
            }
        }
        match c.relation {
            Relation::Le => {
                row[next_slack] = Rational::one();
                next_slack += 1;
            }
            Relation::Ge => {
                row[next_slack] = -Rational::one();
                next_slack += 1;
            }
            Relation::Eq => {}
        }
        row[width - 1] = rhs;
        rows.push(row);
    }
    for (col, cap) in &upper_rows {
        let mut row = vec![Rational::zero(); width];
        row[*col] = Rational::one();
        row[next_slack] = Rational::one();
        next_slack += 1;
        row[width - 1] = cap.clone();
        rows.push(row);
    }
    for (i, row) in rows.iter_mut().enumerate() {
        let sign = if row[width - 1].is_negative() {
            for v in row.iter_mut() {
                *v = -v.clone();
            }
            -1
        } else {
            1
        };
        row_sign.push(sign);
        row[n_std + i] = Rational::one();
    }

    // Phase 1: minimize the sum of artificials.
    let mut cost = vec![Rational::zero(); width];
    for j in (0..n_std).chain(std::iter::once(width - 1)) {
        let s: Rational = rows.iter().map(|r| r[j].clone()).sum();
        cost[j] = -s;
    }
    let mut tab = Tableau {
        rows,
        cost,
        basis: (n_std..n_std + m).collect(),
        enterable: n_std,
    };
    tab.optimize();
    let phase1_value = -tab.cost[width - 1].clone();
    if phase1_value.is_positive() {
        // y = c_B B⁻¹, read from the artificial block.
        let y: Vec<Rational> = (0..m)
            .map(|i| {
                tab.rows
                    .iter()
                    .zip(&tab.basis)
                    .filter(|(_, &b)| b >= n_std)
                    .map(|(row, _)| row[n_std + i].clone())
                    .sum()
            })
            .collect();
        let farkas = (0..user_rows)
            .map(|i| if row_sign[i] < 0 { -y[i].clone() } else { y[i].clone() })
            .collect();
        return LpOutcome {
            status: LpStatus::Infeasible,
            point: None,
            value: None,
            farkas: Some(farkas),
        };
    }

    // Drive remaining artificials out of the basis; drop redundant rows.
    let mut r = 0;
    while r < tab.rows.len() {
        if tab.basis[r] >= n_std {
            match (0..n_std).find(|&j| !tab.rows[r][j].is_zero()) {
                Some(j) => tab.pivot(r, j),
                None => {
                    tab.rows.remove(r);
                    tab.basis.remove(r);
                    continue;
                }
            }
        }
        r += 1;
    }

    // Phase 2.
    let flip = match p.sense {
        Sense::Maximize => -Rational::one(),
        _ => Rational::one(),
    };
    let mut c_std = vec![Rational::zero(); width];
    if p.sense != Sense::Feasibility {
        for (j, obj) in p.objective.iter().enumerate() {
            if obj.is_zero() {
                continue;
            }
            for (col, coef) in &vars[j].terms {
                c_std[*col] += &flip * obj * coef;
            }
        }
    }
    let mut cost = c_std.clone();
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        if c_std[b].is_zero() {
            continue;
        }
        let cb = c_std[b].clone();
        for (cj, a) in cost.iter_mut().zip(row) {
            if !a.is_zero() {
                *cj -= &cb * a;
            }
        }
    }
    tab.cost = cost;
    if !tab.optimize() {
        return LpOutcome {
            status: LpStatus::Unbounded,
            point: None,
            value: None,
            farkas: None,
        };
    }

    let mut x_std = vec![Rational::zero(); n_std];
    for (row, &b) in tab.rows.iter().zip(&tab.basis) {
        if b < n_std {
            x_std[b] = row[width - 1].clone();
        }
    }
    let point: Vec<Rational> = vars
        .iter()
        .map(|v| {
            v.terms
                .iter()
                .fold(v.offset.clone(), |acc, (col, coef)| acc + coef * &x_std[*col])
        })
        .collect();
    let value = dot(&p.objective, &point);
    LpOutcome {
        status: LpStatus::Optimal,
        point: Some(point),
        value: Some(value),
        farkas: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn maximize_with_upper_constraint() {
        let mut p = LpProblem::new(1, Sense::Maximize);
        p.objective = vec![int(1)];
        p.add(vec![int(1)], Relation::Le, int(3));
        let out = lp_solve(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.value, Some(int(3)));
        assert!(p.is_feasible_point(out.point.as_ref().unwrap()));
    }

    #[test]
    fn contradictory_bounds_give_certificate() {
        let mut p = LpProblem::new(1, Sense::Feasibility);
        p.bounds[0] = Bound::free();
        p.add(vec![int(1)], Relation::Ge, int(1));
        p.add(vec![int(1)], Relation::Le, int(0));
        let out = lp_solve(&p);
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(p.is_refuted_by(out.farkas.as_ref().unwrap()));
    }

    #[test]
    fn unbounded_ray() {
        let mut p = LpProblem::new(2, Sense::Maximize);
        p.objective = vec![int(1), int(0)];
        p.add(vec![int(1), int(-1)], Relation::Le, int(1));
        assert_eq!(lp_solve(&p).status, LpStatus::Unbounded);
    }

    #[test]
    fn free_and_upper_bounded_variables() {
        // minimize x + y with x free, y <= 2, x + y >= -3, x - y = 1.
        let mut p = LpProblem::new(2, Sense::Minimize);
        p.bounds = vec![
            Bound::free(),
            Bound {
                lower: None,
                upper: Some(int(2)),
            },
        ];
        p.objective = vec![int(1), int(1)];
        p.add(vec![int(1), int(1)], Relation::Ge, int(-3));
        p.add(vec![int(1), int(-1)], Relation::Eq, int(1));
        let out = lp_solve(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.value, Some(int(-3)));
        assert_eq!(out.point, Some(vec![rat(-1, 1), rat(-2, 1)]));
    }

    #[test]
    fn infeasible_through_upper_bound_rows() {
        let mut p = LpProblem::new(2, Sense::Feasibility);
        p.bounds = vec![Bound::between(int(0), int(1)); 2];
        p.add(vec![int(1), int(1)], Relation::Ge, rat(5, 2));
        let out = lp_solve(&p);
        assert_eq!(out.status, LpStatus::Infeasible);
        assert!(p.is_refuted_by(out.farkas.as_ref().unwrap()));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // Classic cycling example (Beale) under Dantzig's rule.
        let mut p = LpProblem::new(4, Sense::Minimize);
        p.objective = vec![rat(-3, 4), int(150), rat(-1, 50), int(6)];
        p.add(vec![rat(1, 4), int(-60), rat(-1, 25), int(9)], Relation::Le, int(0));
        p.add(vec![rat(1, 2), int(-90), rat(-1, 50), int(3)], Relation::Le, int(0));
        p.add(vec![int(0), int(0), int(1), int(0)], Relation::Le, int(1));
        let out = lp_solve(&p);
        assert_eq!(out.status, LpStatus::Optimal);
        assert_eq!(out.value, Some(rat(-1, 20)));
    }
}
