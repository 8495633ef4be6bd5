//! Normal surface coordinates: matching equations, Q-matching equations,
//! completion of quad vectors to closed surfaces, the vertical-class search
//! and the dual test for strict angle structures.
//!
//! Coordinates are laid out seven per tetrahedron: four triangles (indexed
//! by the vertex they cut off) followed by three quads (indexed by axis).

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::angles::{chi_star_unchecked, find_angle_structure, AngleKind, VerticalQuadSet};
use crate::exact::{
    denominator_lcm, format_rational, int, lp_solve, solve_linear, Bound, LpProblem, LpStatus,
    Rational, RationalMatrixSystem, Relation, Sense,
};
use crate::triangulation::{axis_of, QuadType, Triangulation};

pub fn tri_index(tet: usize, v: u8) -> usize {
    7 * tet + v as usize
}

pub fn quad_index(tet: usize, axis: usize) -> usize {
    7 * tet + 4 + axis
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct NormalVector {
    coords: Vec<Rational>,
}

impl NormalVector {
    pub fn zero(num_tetrahedra: usize) -> Self {
        NormalVector {
            coords: vec![Rational::zero(); 7 * num_tetrahedra],
        }
    }

    pub fn from_coords(coords: Vec<Rational>) -> Self {
        assert_eq!(coords.len() % 7, 0, "normal coordinates come in sevens");
        NormalVector { coords }
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn num_tetrahedra(&self) -> usize {
        self.coords.len() / 7
    }

    pub fn tri(&self, tet: usize, v: u8) -> &Rational {
        &self.coords[tri_index(tet, v)]
    }

    pub fn quad(&self, tet: usize, axis: usize) -> &Rational {
        &self.coords[quad_index(tet, axis)]
    }

    pub fn tri_mut(&mut self, tet: usize, v: u8) -> &mut Rational {
        &mut self.coords[tri_index(tet, v)]
    }

    pub fn quad_mut(&mut self, tet: usize, axis: usize) -> &mut Rational {
        &mut self.coords[quad_index(tet, axis)]
    }

    /// The `3n` quad coordinates, indexed by [`QuadType::index`].
    pub fn quad_part(&self) -> Vec<Rational> {
        (0..self.num_tetrahedra())
            .flat_map(|t| (0..3).map(move |a| (t, a)))
            .map(|(t, a)| self.quad(t, a).clone())
            .collect()
    }

    pub fn support_quads(&self) -> Vec<QuadType> {
        (0..self.num_tetrahedra())
            .flat_map(|t| (0..3).map(move |a| QuadType::new(t, a)))
            .filter(|q| !self.quad(q.tet, q.axis).is_zero())
            .collect()
    }

    pub fn is_integral(&self) -> bool {
        self.coords.iter().all(Rational::is_integer)
    }

    pub fn is_non_negative(&self) -> bool {
        !self.coords.iter().any(Signed::is_negative)
    }

    /// Non-negative with at most one quad type per tetrahedron.
    pub fn is_admissible(&self) -> bool {
        self.is_non_negative()
            && (0..self.num_tetrahedra())
                .all(|t| (0..3).filter(|&a| !self.quad(t, a).is_zero()).count() <= 1)
    }

    /// Number of times the surface meets edge `{a, b}` of `tet`.
    pub fn edge_weight(&self, tet: usize, a: u8, b: u8) -> Rational {
        let facing = axis_of(a, b);
        let mut w = self.tri(tet, a) + self.tri(tet, b);
        for axis in (0..3).filter(|&x| x != facing) {
            w += self.quad(tet, axis);
        }
        w
    }

    pub fn num_triangles(&self) -> Rational {
        (0..self.num_tetrahedra())
            .flat_map(|t| (0..4).map(move |v| (t, v)))
            .map(|(t, v)| self.tri(t, v).clone())
            .sum()
    }

    pub fn num_quads(&self) -> Rational {
        self.quad_part().into_iter().sum()
    }

    pub fn scaled(&self, k: &Rational) -> Self {
        NormalVector {
            coords: self.coords.iter().map(|c| c * k).collect(),
        }
    }
}

impl fmt::Display for NormalVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 0..self.num_tetrahedra() {
            if t > 0 {
                write!(f, " ; ")?;
            }
            let parts: Vec<String> = self.coords[7 * t..7 * t + 7]
                .iter()
                .map(format_rational)
                .collect();
            write!(f, "{} | {}", parts[..4].join(" "), parts[4..].join(" "))?;
        }
        Ok(())
    }
}

/// A closed normal surface with integer coordinates.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalClass {
    pub coords: Vec<u64>,
}

impl NormalClass {
    pub fn try_from_vector(x: &NormalVector) -> Option<Self> {
        use num_traits::ToPrimitive;
        x.coords
            .iter()
            .map(|c| if c.is_integer() { c.to_integer().to_u64() } else { None })
            .collect::<Option<Vec<_>>>()
            .map(|coords| NormalClass { coords })
    }

    pub fn to_vector(&self) -> NormalVector {
        NormalVector::from_coords(self.coords.iter().map(|&c| int(c as i64)).collect())
    }

    pub fn num_triangles(&self) -> u64 {
        self.coords
            .chunks(7)
            .map(|c| c[..4].iter().sum::<u64>())
            .sum()
    }

    pub fn num_quads(&self) -> u64 {
        self.coords
            .chunks(7)
            .map(|c| c[4..].iter().sum::<u64>())
            .sum()
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum NormalError {
    #[error("expected {expected} quad coordinates, got {got}")]
    QuadCount { expected: usize, got: usize },
    #[error("quad coordinates must be non-negative integers")]
    NotIntegral,
    #[error("quad {tet}.{axis} is not vertical for the supplied angle structure")]
    PreconditionViolated { tet: usize, axis: usize },
    #[error("supplied angle structure does not satisfy the angle equations")]
    SourceNotAngleStructure,
    #[error("quad coordinates fail the Q-matching equation at edge {edge}")]
    QMatchingFailed { edge: usize },
    #[error("no generalized angle structure exists")]
    NoGeneralizedStructure,
}

/// Matching equations: one row per face class and vertex of that face.
pub fn matching_system(t: &Triangulation) -> RationalMatrixSystem {
    let n = t.num_tetrahedra();
    let names = (0..n)
        .flat_map(|t| {
            (0..4)
                .map(move |v| format!("t[{t},{v}]"))
                .chain((0..3).map(move |a| format!("q[{t},{a}]")))
        })
        .collect();
    let mut sys = RationalMatrixSystem::new(names);
    for face in t.faces() {
        let (tt, f) = face.first;
        let (u, g) = face.second;
        for v in (0..4u8).filter(|&v| v != f) {
            let pv = face.perm.apply(v);
            let mut row = vec![Rational::zero(); 7 * n];
            row[tri_index(tt, v)] += int(1);
            row[quad_index(tt, axis_of(v, f))] += int(1);
            row[tri_index(u, pv)] -= int(1);
            row[quad_index(u, axis_of(pv, g))] -= int(1);
            sys.push_row(row, Rational::zero());
        }
    }
    sys
}

/// Q-matching equations over the `3n` quad coordinates, one row per edge.
pub fn q_matching_system(t: &Triangulation) -> RationalMatrixSystem {
    let n = t.num_tetrahedra();
    let names = (0..n)
        .flat_map(|t| (0..3).map(move |a| format!("q[{t},{a}]")))
        .collect();
    let mut sys = RationalMatrixSystem::new(names);
    for e in t.edges() {
        let mut row = vec![Rational::zero(); 3 * n];
        for inc in &e.incidences {
            let [a, _, c, d] = inc.verts;
            row[QuadType::new(inc.tet, axis_of(a, c)).index()] += int(1);
            row[QuadType::new(inc.tet, axis_of(a, d)).index()] -= int(1);
        }
        sys.push_row(row, Rational::zero());
    }
    sys
}

pub fn q_matching_holds(t: &Triangulation, quads: &[Rational]) -> bool {
    q_matching_system(t).is_satisfied_by(quads)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Completion {
    /// The unique closed surface with these quads and no vertex-linking
    /// component.
    Closed(NormalVector),
    /// No triangle coordinates close the surface up; only a spun surface
    /// carries these quads.
    SpunOnly,
}

/// Solves for triangle coordinates given quad coordinates (indexed by
/// [`QuadType::index`]), then removes vertex-linking tori so that every cusp
/// has some triangle coordinate equal to zero.
pub fn complete_to_closed(t: &Triangulation, quads: &[Rational]) -> Result<Completion, NormalError> {
    let n = t.num_tetrahedra();
    if quads.len() != 3 * n {
        return Err(NormalError::QuadCount {
            expected: 3 * n,
            got: quads.len(),
        });
    }
    if quads.iter().any(|q| q.is_negative() || !q.is_integer()) {
        return Err(NormalError::NotIntegral);
    }
    if let Some(edge) = q_matching_system(t)
        .residual(quads)
        .iter()
        .position(|r| !r.is_zero())
    {
        return Err(NormalError::QMatchingFailed { edge });
    }
    let full = matching_system(t);
    let mut sys = RationalMatrixSystem::new(
        (0..n)
            .flat_map(|t| (0..4).map(move |v| format!("t[{t},{v}]")))
            .collect(),
    );
    for (row, _) in full.rows.iter().zip(&full.rhs) {
        let mut tri_row = Vec::with_capacity(4 * n);
        let mut rhs = Rational::zero();
        for tet in 0..n {
            tri_row.extend(row[7 * tet..7 * tet + 4].iter().cloned());
            for a in 0..3 {
                let c = &row[quad_index(tet, a)];
                if !c.is_zero() {
                    rhs -= c * &quads[3 * tet + a];
                }
            }
        }
        sys.push_row(tri_row, rhs);
    }
    let Ok(sol) = solve_linear(&sys) else {
        return Ok(Completion::SpunOnly);
    };
    let mut x = NormalVector::zero(n);
    for tet in 0..n {
        for v in 0..4u8 {
            *x.tri_mut(tet, v) = sol.particular[4 * tet + v as usize].clone();
        }
        for a in 0..3 {
            *x.quad_mut(tet, a) = quads[3 * tet + a].clone();
        }
    }
    for class in t.vertices() {
        let min = class
            .corners
            .iter()
            .map(|&(tet, v)| x.tri(tet, v).clone())
            .min()
            .expect("vertex classes are non-empty");
        for &(tet, v) in &class.corners {
            *x.tri_mut(tet, v) -= &min;
        }
    }
    debug_assert!(full.is_satisfied_by(x.coords()));
    Ok(Completion::Closed(x))
}

/// Smallest positive integer multiple of `v`, divided by the gcd.
pub fn primitive_integer(v: &[Rational]) -> Vec<Rational> {
    let l = denominator_lcm(v);
    let ints: Vec<BigInt> = v.iter().map(|q| (q * Rational::from_integer(l.clone())).to_integer()).collect();
    let g = ints.iter().fold(BigInt::zero(), |acc, x| acc.gcd(x));
    if g.is_zero() {
        return v.to_vec();
    }
    ints.into_iter()
        .map(|x| Rational::from_integer(x / &g))
        .collect()
}

/// Searches for a closed normal surface whose quads are all vertical.
///
/// When the set carries the angle structure it was read from, that
/// structure is checked first: it must satisfy the angle equations and
/// vanish on every quad in the set.
pub fn find_vertical_class(
    t: &Triangulation,
    vertical: &VerticalQuadSet,
) -> Result<Option<NormalVector>, NormalError> {
    if let Some(alpha) = &vertical.source {
        if !alpha.satisfies(t) {
            return Err(NormalError::SourceNotAngleStructure);
        }
        if let Some(q) = vertical.quads.iter().find(|q| !alpha.value(**q).is_zero()) {
            return Err(NormalError::PreconditionViolated {
                tet: q.tet,
                axis: q.axis,
            });
        }
    }
    if vertical.is_empty() {
        return Ok(None);
    }
    let n = t.num_tetrahedra();
    let mut lp = LpProblem::new(7 * n, Sense::Feasibility);
    lp.add_equalities(&matching_system(t));
    let mut total = vec![Rational::zero(); 7 * n];
    for tet in 0..n {
        for v in 0..4 {
            lp.bounds[tri_index(tet, v)] = Bound::free();
        }
        for a in 0..3 {
            let i = quad_index(tet, a);
            if vertical.contains(QuadType::new(tet, a)) {
                total[i] = Rational::one();
            } else {
                lp.bounds[i] = Bound::fixed(Rational::zero());
            }
        }
    }
    lp.add(total, Relation::Eq, Rational::one());
    let out = lp_solve(&lp);
    if out.status != LpStatus::Optimal {
        return Ok(None);
    }
    let point = NormalVector::from_coords(out.point.expect("optimal point"));
    let quads = primitive_integer(&point.quad_part());
    match complete_to_closed(t, &quads)? {
        Completion::Closed(x) => Ok(Some(x)),
        Completion::SpunOnly => unreachable!("LP solution satisfies the matching equations"),
    }
}

/// Searches quad coordinates alone: a primitive non-zero integer solution of
/// the Q-matching equations supported on the vertical quads.
pub fn find_vertical_quads(
    t: &Triangulation,
    vertical: &VerticalQuadSet,
) -> Option<Vec<Rational>> {
    if vertical.is_empty() {
        return None;
    }
    let n = t.num_tetrahedra();
    let mut lp = LpProblem::new(3 * n, Sense::Feasibility);
    lp.add_equalities(&q_matching_system(t));
    let mut total = vec![Rational::zero(); 3 * n];
    for q in t.quad_types() {
        if vertical.contains(q) {
            total[q.index()] = Rational::one();
        } else {
            lp.bounds[q.index()] = Bound::fixed(Rational::zero());
        }
    }
    lp.add(total, Relation::Eq, Rational::one());
    let out = lp_solve(&lp);
    (out.status == LpStatus::Optimal).then(|| primitive_integer(&out.point.expect("optimal point")))
}

/// What the vertical quads of a semi-angle structure support.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerticalOutcome {
    Closed(NormalVector),
    /// Quads satisfying Q-matching that admit no triangle completion.
    SpunOnly(Vec<Rational>),
    None,
}

pub fn vertical_outcome(t: &Triangulation, vertical: &VerticalQuadSet) -> Result<VerticalOutcome, NormalError> {
    if let Some(x) = find_vertical_class(t, vertical)? {
        return Ok(VerticalOutcome::Closed(x));
    }
    match find_vertical_quads(t, vertical) {
        None => Ok(VerticalOutcome::None),
        Some(quads) => match complete_to_closed(t, &quads)? {
            Completion::SpunOnly => Ok(VerticalOutcome::SpunOnly(quads)),
            // Any closed completion would have been found above.
            Completion::Closed(x) => Ok(VerticalOutcome::Closed(x)),
        },
    }
}

/// Normal arc multiplicities on the 2-skeleton: for each face class (in
/// [`Triangulation::faces`] order) and each vertex of that face, read from
/// the `first` side, the number of arcs cutting off that vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArcPattern {
    /// `arcs[face][k]` counts arcs around the `k`-th vertex of the face
    /// other than the face's own label, in increasing label order.
    pub arcs: Vec<[Rational; 3]>,
}

impl ArcPattern {
    pub fn add(&self, other: &ArcPattern) -> ArcPattern {
        ArcPattern {
            arcs: self
                .arcs
                .iter()
                .zip(&other.arcs)
                .map(|(a, b)| [&a[0] + &b[0], &a[1] + &b[1], &a[2] + &b[2]])
                .collect(),
        }
    }
}

/// Arcs cut by `x` in the face opposite `f` of `tet`, around vertex `v`.
pub fn arc_count(x: &NormalVector, tet: usize, f: u8, v: u8) -> Rational {
    x.tri(tet, v) + x.quad(tet, axis_of(v, f))
}

pub fn arc_pattern(t: &Triangulation, x: &NormalVector) -> ArcPattern {
    let arcs = t
        .faces()
        .iter()
        .map(|face| {
            let (tet, f) = face.first;
            let mut vs = (0..4u8).filter(|&v| v != f);
            std::array::from_fn(|_| arc_count(x, tet, f, vs.next().expect("three vertices")))
        })
        .collect();
    ArcPattern { arcs }
}

/// Result of the dual test for strict angle structures.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StrictDual {
    /// Whether a strict angle structure exists.
    pub exists: bool,
    /// Maximum of `χ*` over normal vectors with non-negative quads summing
    /// to one; `None` when there are no such vectors.
    pub max_chi_star: Option<Rational>,
    /// A maximizer, when one exists.
    pub witness: Option<NormalVector>,
}

/// Decides existence of a strict angle structure through its dual: one
/// exists exactly when every non-zero normal vector with non-negative quads
/// has negative `χ*`.
pub fn strict_exists_dual(t: &Triangulation) -> Result<StrictDual, NormalError> {
    let alpha =
        find_angle_structure(t, AngleKind::Generalized).ok_or(NormalError::NoGeneralizedStructure)?;
    let n = t.num_tetrahedra();
    let mut lp = LpProblem::new(7 * n, Sense::Maximize);
    lp.add_equalities(&matching_system(t));
    let mut total = vec![Rational::zero(); 7 * n];
    for tet in 0..n {
        for v in 0..4 {
            lp.bounds[tri_index(tet, v)] = Bound::free();
        }
        for a in 0..3 {
            let i = quad_index(tet, a);
            total[i] = Rational::one();
            lp.objective[i] = -alpha.value(QuadType::new(tet, a)).clone();
        }
    }
    lp.add(total, Relation::Eq, Rational::one());
    let out = lp_solve(&lp);
    match out.status {
        LpStatus::Infeasible => Ok(StrictDual {
            exists: true,
            max_chi_star: None,
            witness: None,
        }),
        LpStatus::Unbounded => unreachable!("feasible region is bounded in the quads"),
        LpStatus::Optimal => {
            let mut x = NormalVector::from_coords(out.point.expect("optimal point"));
            // Vertex-linking tori carry no quads, so shifting by them keeps
            // the optimum; pin each cusp's smallest triangle at zero.
            for class in t.vertices() {
                let min = class
                    .corners
                    .iter()
                    .map(|&(tet, v)| x.tri(tet, v).clone())
                    .min()
                    .expect("vertex classes are non-empty");
                for &(tet, v) in &class.corners {
                    *x.tri_mut(tet, v) -= &min;
                }
            }
            let value = chi_star_unchecked(&alpha, &x);
            Ok(StrictDual {
                exists: value.is_negative(),
                max_chi_star: Some(value),
                witness: Some(x),
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::angles::{find_angle_structure, AngleKind};

    fn fig8() -> Triangulation {
        Triangulation::from_json(include_str!("../../../fixtures/fig8.json")).unwrap()
    }

    fn m136() -> Triangulation {
        Triangulation::from_json(include_str!("../../../fixtures/m136_bad.json")).unwrap()
    }

    fn vertex_links(t: &Triangulation) -> NormalVector {
        let mut x = NormalVector::zero(t.num_tetrahedra());
        for tet in 0..t.num_tetrahedra() {
            for v in 0..4 {
                *x.tri_mut(tet, v) = int(1);
            }
        }
        x
    }

    #[test]
    fn matching_system_dimensions() {
        let sys = matching_system(&m136());
        assert_eq!((sys.num_rows(), sys.num_vars()), (42, 49));
    }

    #[test]
    fn vertex_links_satisfy_matching() {
        for t in [fig8(), m136()] {
            assert!(matching_system(&t).is_satisfied_by(vertex_links(&t).coords()));
        }
    }

    #[test]
    fn matching_solutions_project_into_q_matching_kernel() {
        for t in [fig8(), m136()] {
            let sol = solve_linear(&matching_system(&t)).unwrap();
            let q = q_matching_system(&t);
            for v in &sol.nullspace {
                let x = NormalVector::from_coords(v.clone());
                assert!(q.is_satisfied_by(&x.quad_part()));
            }
        }
    }

    #[test]
    fn m136_vertical_pair_in_tet_five_closes_up() {
        let t = m136();
        let mut quads = vec![Rational::zero(); 21];
        quads[QuadType::new(5, 0).index()] = int(1);
        quads[QuadType::new(5, 2).index()] = int(1);
        let Completion::Closed(x) = complete_to_closed(&t, &quads).unwrap() else {
            panic!("expected a closed surface");
        };
        assert_eq!(x.num_triangles(), int(20));
        assert!(x.is_non_negative());
    }

    #[test]
    fn m136_vertical_pair_in_tet_three_is_spun_only() {
        let t = m136();
        let mut quads = vec![Rational::zero(); 21];
        quads[QuadType::new(3, 1).index()] = int(1);
        quads[QuadType::new(3, 2).index()] = int(1);
        assert_eq!(complete_to_closed(&t, &quads).unwrap(), Completion::SpunOnly);
    }

    #[test]
    fn fig8_has_strict_structure_by_duality() {
        let dual = strict_exists_dual(&fig8()).unwrap();
        assert!(dual.max_chi_star.unwrap().is_negative());
        assert!(dual.exists);
    }

    #[test]
    fn m136_dual_reports_no_strict_structure() {
        let t = m136();
        let dual = strict_exists_dual(&t).unwrap();
        assert!(!dual.exists);
        assert!(find_angle_structure(&t, AngleKind::Strict).is_none());
        let x = dual.witness.unwrap();
        assert!(matching_system(&t).is_satisfied_by(x.coords()));
        assert!(x.is_non_negative());
        assert!(x.num_quads().is_one());
        for class in t.vertices() {
            assert!(class.corners.iter().any(|&(tet, v)| x.tri(tet, v).is_zero()));
        }
    }

    #[test]
    fn precondition_checked_against_source() {
        let t = fig8();
        let alpha = crate::angles::AngleAssignment::new(vec![crate::exact::rat(1, 3); 6]);
        let mut set = VerticalQuadSet::from_quads([QuadType::new(0, 0)]);
        set.source = Some(alpha);
        assert_eq!(
            find_vertical_class(&t, &set),
            Err(NormalError::PreconditionViolated { tet: 0, axis: 0 })
        );
    }

    #[test]
    fn single_quad_fails_q_matching() {
        let t = fig8();
        let mut quads = vec![Rational::zero(); 6];
        quads[0] = int(1);
        assert!(!q_matching_holds(&t, &quads));
        assert!(matches!(
            complete_to_closed(&t, &quads),
            Err(NormalError::QMatchingFailed { .. })
        ));
        assert!(q_matching_holds(&t, &vec![Rational::zero(); 6]));
    }

    #[test]
    fn zero_quads_complete_to_zero() {
        let t = m136();
        let got = complete_to_closed(&t, &vec![Rational::zero(); 21]).unwrap();
        assert_eq!(got, Completion::Closed(NormalVector::zero(7)));
    }

    #[test]
    fn vertex_link_arc_pattern_is_constant() {
        let t = fig8();
        let pattern = arc_pattern(&t, &vertex_links(&t).scaled(&int(3)));
        assert!(pattern.arcs.iter().flatten().all(|a| *a == int(3)));
    }

    #[test]
    fn arc_pattern_read_from_either_side_agrees() {
        let t = m136();
        let mut quads = vec![Rational::zero(); 21];
        quads[QuadType::new(5, 0).index()] = int(1);
        quads[QuadType::new(5, 2).index()] = int(1);
        let Completion::Closed(x) = complete_to_closed(&t, &quads).unwrap() else {
            panic!()
        };
        for face in t.faces() {
            let (a, f) = face.first;
            let (b, g) = face.second;
            for v in (0..4u8).filter(|&v| v != f) {
                assert_eq!(arc_count(&x, a, f, v), arc_count(&x, b, g, face.perm.apply(v)));
            }
        }
    }

    #[test]
    fn primitive_integer_scales_and_reduces() {
        let v = vec![crate::exact::rat(1, 2), crate::exact::rat(3, 2), int(0)];
        assert_eq!(primitive_integer(&v), vec![int(1), int(3), int(0)]);
    }

    #[test]
    fn tet_three_quads_are_spun_only_and_tet_five_closes() {
        let t = m136();
        let all = VerticalQuadSet::from_quads([
            QuadType::new(3, 1),
            QuadType::new(3, 2),
            QuadType::new(5, 0),
            QuadType::new(5, 2),
        ]);
        assert!(matches!(vertical_outcome(&t, &all).unwrap(), VerticalOutcome::Closed(_)));
        match vertical_outcome(&t, &all.restricted_to(&[3])).unwrap() {
            VerticalOutcome::SpunOnly(q) => {
                assert_eq!(q[QuadType::new(3, 1).index()], q[QuadType::new(3, 2).index()]);
            }
            other => panic!("expected spun only, got {other:?}"),
        }
        assert_eq!(vertical_outcome(&fig8(), &VerticalQuadSet::from_quads([])).unwrap(), VerticalOutcome::None);
    }
}
