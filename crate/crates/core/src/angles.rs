//! Angle structures: the linear system on quad types, exact deciders for
//! generalized, semi and strict structures, the formal Euler characteristic,
//! and angles read off tetrahedron shape parameters.
//!
//! All exact values are in units of π.

use std::collections::BTreeSet;
use std::f64::consts::PI;

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::exact::{
    int, lp_solve, rat, solve_linear, LpProblem, LpStatus, Rational, RationalMatrixSystem,
    Sense,
};
use crate::normal::{matching_system, NormalVector};
use crate::triangulation::{QuadType, Triangulation};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AngleKind {
    Generalized,
    Semi,
    Strict,
}

/// One rational angle (π-units) per quad type, indexed by [`QuadType::index`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AngleAssignment {
    values: Vec<Rational>,
}

impl AngleAssignment {
    pub fn new(values: Vec<Rational>) -> Self {
        AngleAssignment { values }
    }

    pub fn values(&self) -> &[Rational] {
        &self.values
    }

    pub fn value(&self, q: QuadType) -> &Rational {
        &self.values[q.index()]
    }

    /// Strongest kind the values qualify for; validity against a
    /// triangulation is checked separately by [`AngleAssignment::residual`].
    pub fn kind(&self) -> AngleKind {
        let one = Rational::one();
        if self.values.iter().all(|v| v.is_positive() && *v < one) {
            AngleKind::Strict
        } else if self.values.iter().all(|v| !v.is_negative() && *v <= one) {
            AngleKind::Semi
        } else {
            AngleKind::Generalized
        }
    }

    pub fn residual(&self, t: &Triangulation) -> Vec<Rational> {
        angle_system(t).residual(&self.values)
    }

    pub fn satisfies(&self, t: &Triangulation) -> bool {
        self.values.len() == 3 * t.num_tetrahedra() && angle_system(t).is_satisfied_by(&self.values)
    }

    /// Quad types with angle exactly zero.
    pub fn vertical_quads(&self) -> VerticalQuadSet {
        let quads = self
            .values
            .iter()
            .enumerate()
            .filter(|(_, v)| v.is_zero())
            .map(|(i, _)| QuadType::new(i / 3, i % 3))
            .collect();
        VerticalQuadSet {
            quads,
            source: Some(self.clone()),
        }
    }
}

/// Quad types assigned angle zero by some semi-angle structure.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerticalQuadSet {
    pub quads: BTreeSet<QuadType>,
    /// The structure the set was read from, when known.
    pub source: Option<AngleAssignment>,
}

impl VerticalQuadSet {
    pub fn from_quads(quads: impl IntoIterator<Item = QuadType>) -> Self {
        VerticalQuadSet {
            quads: quads.into_iter().collect(),
            source: None,
        }
    }

    pub fn contains(&self, q: QuadType) -> bool {
        self.quads.contains(&q)
    }

    pub fn is_empty(&self) -> bool {
        self.quads.is_empty()
    }

    /// Keeps only quads in the given tetrahedra.
    pub fn restricted_to(&self, tets: &[usize]) -> Self {
        VerticalQuadSet {
            quads: self
                .quads
                .iter()
                .copied()
                .filter(|q| tets.contains(&q.tet))
                .collect(),
            source: self.source.clone(),
        }
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum AngleError {
    #[error("normal vector does not satisfy the matching equations")]
    NotInSolutionSpace,
    #[error("angle assignment does not satisfy the angle equations")]
    NotAnAngleStructure,
    #[error("expected {expected} shape parameters, got {got}")]
    ShapeCount { expected: usize, got: usize },
    #[error("tetrahedron {tet} is negatively oriented (Im z < 0)")]
    NegativelyOriented { tet: usize },
    #[error("edge {edge}: angle sum differs from 2π by {residual:e}")]
    EdgeEquationViolated { edge: usize, residual: f64 },
}

fn variable_names(n: usize) -> Vec<String> {
    (0..n)
        .flat_map(|t| (0..3).map(move |a| format!("a[{t},{a}]")))
        .collect()
}

/// Tetrahedron rows (sum 1) followed by edge rows (sum 2) over the `3n`
/// quad angles. A quad facing an edge twice gets coefficient 2.
pub fn angle_system(t: &Triangulation) -> RationalMatrixSystem {
    let n = t.num_tetrahedra();
    let mut sys = RationalMatrixSystem::new(variable_names(n));
    for tet in 0..n {
        let mut row = vec![Rational::zero(); 3 * n];
        for a in 0..3 {
            row[3 * tet + a] = Rational::one();
        }
        sys.push_row(row, int(1));
    }
    for e in t.edges() {
        let mut row = vec![Rational::zero(); 3 * n];
        for q in e.quad_sequence() {
            row[q.index()] += Rational::one();
        }
        sys.push_row(row, int(2));
    }
    sys
}

/// Exact decider for each kind of angle structure. The returned witness
/// satisfies the angle equations with zero residual.
pub fn find_angle_structure(t: &Triangulation, kind: AngleKind) -> Option<AngleAssignment> {
    let sys = angle_system(t);
    match kind {
        AngleKind::Generalized => solve_linear(&sys)
            .ok()
            .map(|sol| AngleAssignment::new(sol.particular)),
        AngleKind::Semi => {
            let mut lp = LpProblem::new(sys.num_vars(), Sense::Feasibility);
            lp.add_equalities(&sys);
            let out = lp_solve(&lp);
            out.point.map(AngleAssignment::new)
        }
        AngleKind::Strict => {
            let (eps, alpha) = max_min_angle(&sys)?;
            eps.is_positive().then_some(alpha)
        }
    }
}

/// Maximizes the smallest angle over all semi-angle structures. Returns the
/// optimum and its witness, or `None` when no semi-angle structure exists.
///
/// Substituting `α = β + ε` with `β ≥ 0` turns the problem into an LP with
/// only equality rows: tetrahedron rows gain `3ε`, edge rows `deg·ε`. The
/// upper bound `α < 1` is implied by the tetrahedron rows.
pub fn max_min_angle(sys: &RationalMatrixSystem) -> Option<(Rational, AngleAssignment)> {
    let nv = sys.num_vars();
    let mut lp = LpProblem::new(nv + 1, Sense::Maximize);
    lp.objective[nv] = Rational::one();
    for (row, b) in sys.rows.iter().zip(&sys.rhs) {
        let mut r = row.clone();
        let weight: Rational = row.iter().cloned().sum();
        r.push(weight);
        lp.add(r, crate::exact::Relation::Eq, b.clone());
    }
    let out = lp_solve(&lp);
    if out.status != LpStatus::Optimal {
        return None;
    }
    let point = out.point?;
    let eps = point[nv].clone();
    let alpha = point[..nv].iter().map(|b| b + &eps).collect();
    Some((eps, AngleAssignment::new(alpha)))
}

/// A semi-angle structure in the relative interior of the semi-angle
/// polytope: its zero set is exactly the quads that vanish under every
/// semi-angle structure.
pub fn maximal_semi_structure(t: &Triangulation) -> Option<AngleAssignment> {
    let sys = angle_system(t);
    let nv = sys.num_vars();
    let base = find_angle_structure(t, AngleKind::Semi)?;
    let mut points = vec![base.values.clone()];
    let mut positive: Vec<bool> = base.values.iter().map(Signed::is_positive).collect();
    for q in 0..nv {
        if positive[q] {
            continue;
        }
        let mut lp = LpProblem::new(nv, Sense::Maximize);
        lp.add_equalities(&sys);
        lp.objective[q] = Rational::one();
        let out = lp_solve(&lp);
        if let Some(p) = out.point {
            if p[q].is_positive() {
                for (flag, v) in positive.iter_mut().zip(&p) {
                    *flag |= v.is_positive();
                }
                points.push(p);
            }
        }
    }
    let count = int(points.len() as i64);
    let avg = (0..nv)
        .map(|i| points.iter().map(|p| p[i].clone()).sum::<Rational>() / &count)
        .collect();
    Some(AngleAssignment::new(avg))
}

/// Formal Euler characteristic `χ*(x) = −Σ α(q)·x_q` (angles in π-units).
pub fn chi_star(
    t: &Triangulation,
    alpha: &AngleAssignment,
    x: &NormalVector,
) -> Result<Rational, AngleError> {
    if !alpha.satisfies(t) {
        return Err(AngleError::NotAnAngleStructure);
    }
    if !matching_system(t).is_satisfied_by(x.coords()) {
        return Err(AngleError::NotInSolutionSpace);
    }
    Ok(chi_star_unchecked(alpha, x))
}

pub(crate) fn chi_star_unchecked(alpha: &AngleAssignment, x: &NormalVector) -> Rational {
    let n = alpha.values.len() / 3;
    let mut sum = Rational::zero();
    for tet in 0..n {
        for a in 0..3 {
            let q = QuadType::new(tet, a);
            let xq = x.quad(tet, a);
            if !xq.is_zero() {
                sum -= alpha.value(q) * xq;
            }
        }
    }
    sum
}

#[derive(Clone, Copy, Debug)]
pub struct ShapeOptions {
    /// Maximum deviation (radians) for snapping and for edge equations.
    pub tolerance: f64,
    /// Largest denominator tried when snapping an angle to a rational
    /// multiple of π.
    pub max_denominator: i64,
}

impl Default for ShapeOptions {
    fn default() -> Self {
        ShapeOptions {
            tolerance: 1e-9,
            max_denominator: 24,
        }
    }
}

/// Angles read off shape parameters.
#[derive(Clone, Debug)]
pub struct ShapeAngles {
    /// Dihedral angle (radians) per quad type.
    pub radians: Vec<f64>,
    /// Rational snap (π-units) per quad type, where one was found.
    pub snapped: Vec<Option<Rational>>,
    /// Tetrahedra whose angles are `(0, 0, π)`.
    pub flat: Vec<usize>,
    /// `Σ arg − 2π` per edge class.
    pub arg_residuals: Vec<f64>,
    /// `Σ log|w|` per edge class.
    pub log_residuals: Vec<f64>,
}

impl ShapeAngles {
    /// The exact assignment, when every angle snapped.
    pub fn exact(&self) -> Option<AngleAssignment> {
        self.snapped
            .iter()
            .cloned()
            .collect::<Option<Vec<_>>>()
            .map(AngleAssignment::new)
    }

    /// Quad types with angle zero (to within tolerance).
    pub fn vertical_quads(&self) -> VerticalQuadSet {
        VerticalQuadSet::from_quads(
            self.snapped
                .iter()
                .enumerate()
                .filter(|(_, s)| s.as_ref().is_some_and(Zero::is_zero))
                .map(|(i, _)| QuadType::new(i / 3, i % 3)),
        )
    }

    pub fn kind(&self, tolerance: f64) -> AngleKind {
        if self.radians.iter().all(|&r| r > tolerance && r < PI - tolerance) {
            AngleKind::Strict
        } else {
            AngleKind::Semi
        }
    }
}

/// Edge parameters of a tetrahedron with shape `z`, by quad axis: `z` for
/// edges 01/23, `1/(1−z)` for 02/13, `(z−1)/z` for 03/12. Tetrahedra with
/// negative orientation sign use the mirrored labelling.
pub fn edge_parameters(z: Complex64, orientation: i8) -> [Complex64; 3] {
    let one = Complex64::new(1.0, 0.0);
    let w1 = one / (one - z);
    let w2 = (z - one) / z;
    if orientation >= 0 {
        [z, w1, w2]
    } else {
        [z, w2, w1]
    }
}

fn arg_upper(w: Complex64) -> f64 {
    // Shapes live in the closed upper half plane; a real negative parameter
    // has argument π regardless of the sign of a zero imaginary part.
    if w.im == 0.0 {
        if w.re < 0.0 {
            PI
        } else {
            0.0
        }
    } else {
        w.im.atan2(w.re)
    }
}

fn snap(angle: f64, opts: &ShapeOptions) -> Option<Rational> {
    let x = angle / PI;
    for d in 1..=opts.max_denominator {
        let n = (x * d as f64).round();
        if ((x - n / d as f64) * PI).abs() <= opts.tolerance {
            return Some(rat(n as i64, d));
        }
    }
    None
}

/// Reads angles from shape parameters and checks every edge equation.
pub fn angles_from_shapes(
    t: &Triangulation,
    shapes: &[Complex64],
    opts: &ShapeOptions,
) -> Result<ShapeAngles, AngleError> {
    let n = t.num_tetrahedra();
    if shapes.len() != n {
        return Err(AngleError::ShapeCount {
            expected: n,
            got: shapes.len(),
        });
    }
    let mut radians = Vec::with_capacity(3 * n);
    let mut params = Vec::with_capacity(3 * n);
    for (tet, &z) in shapes.iter().enumerate() {
        if z.im < -opts.tolerance {
            return Err(AngleError::NegativelyOriented { tet });
        }
        for w in edge_parameters(z, t.orientation(tet)) {
            radians.push(arg_upper(w));
            params.push(w);
        }
    }
    let snapped: Vec<Option<Rational>> = radians.iter().map(|&r| snap(r, opts)).collect();
    let flat = (0..n)
        .filter(|&tet| {
            let s = &snapped[3 * tet..3 * tet + 3];
            s.iter().all(Option::is_some)
                && s.iter().filter(|v| v.as_ref().unwrap().is_zero()).count() == 2
        })
        .collect();

    let mut arg_residuals = Vec::new();
    let mut log_residuals = Vec::new();
    for (e, class) in t.edges().iter().enumerate() {
        let mut arg = 0.0;
        let mut log = 0.0;
        for q in class.quad_sequence() {
            arg += radians[q.index()];
            log += params[q.index()].norm().ln();
        }
        let residual = arg - 2.0 * PI;
        if residual.abs() > opts.tolerance || log.abs() > opts.tolerance {
            return Err(AngleError::EdgeEquationViolated {
                edge: e,
                residual: if residual.abs() > opts.tolerance { residual } else { log },
            });
        }
        arg_residuals.push(residual);
        log_residuals.push(log);
    }
    Ok(ShapeAngles {
        radians,
        snapped,
        flat,
        arg_residuals,
        log_residuals,
    })
}

/// Parses `[[re, im], ...]`.
pub fn parse_shapes(text: &str) -> Result<Vec<Complex64>, serde_json::Error> {
    let pairs: Vec<[f64; 2]> = serde_json::from_str(text)?;
    Ok(pairs.into_iter().map(|[re, im]| Complex64::new(re, im)).collect())
}
