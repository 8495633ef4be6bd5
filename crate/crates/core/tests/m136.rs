mod common;

use std::collections::BTreeSet;

use common::*;
use cuspangle::angles::{angles_from_shapes, find_angle_structure, maximal_semi_structure, ShapeOptions};
use cuspangle::normal::{complete_to_closed, find_vertical_class, strict_exists_dual, vertical_outcome, Completion, VerticalOutcome};
use cuspangle::{AngleKind, QuadType};
use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

fn shapes() -> Vec<Complex64> {
    M136_SHAPES.iter().map(|&(re, im)| Complex64::new(re, im)).collect()
}

#[test]
fn table_rebuilds_the_shipped_fixture() {
    assert_eq!(m136_from_table(), fixture("m136_bad.json"));
}

#[test]
fn edge_classes_match_the_incidence_table() {
    let t = m136_from_table();
    assert_eq!(t.edge_degrees(), vec![4, 4, 10, 10, 6, 4, 4]);
    let ours: BTreeSet<_> = t
        .edges()
        .iter()
        .map(|e| {
            let seq: Vec<_> = e.incidences.iter().map(|i| (i.tet, i.verts[0], i.verts[1])).collect();
            canonical_incidences(&seq)
        })
        .collect();
    let printed: BTreeSet<_> = M136_EDGES.iter().map(|s| canonical_incidences(s)).collect();
    assert_eq!(ours, printed);
}

#[test]
fn shapes_solve_every_edge_equation() {
    let t = m136_from_table();
    let s = angles_from_shapes(&t, &shapes(), &ShapeOptions::default()).unwrap();
    assert_eq!(s.flat, vec![3, 5]);
    assert!(s.arg_residuals.iter().chain(&s.log_residuals).all(|r| r.abs() < 1e-9));
    assert_eq!(s.kind(1e-9), AngleKind::Semi);
    assert!(s.exact().is_none());
    for tet in [3, 5] {
        let snapped: Vec<_> = s.snapped[3 * tet..3 * tet + 3].iter().flatten().collect();
        assert_eq!(snapped.iter().filter(|v| v.is_zero()).count(), 2);
        assert!(snapped.iter().any(|v| v.is_one()));
    }
}

#[test]
fn no_strict_structure_either_way() {
    let t = m136_from_table();
    assert!(find_angle_structure(&t, AngleKind::Strict).is_none());
    let dual = strict_exists_dual(&t).unwrap();
    assert!(!dual.exists);
    assert!(dual.max_chi_star.unwrap().is_zero());
}

#[test]
fn vertical_class_sits_on_tet_five() {
    let t = m136_from_table();
    let alpha = maximal_semi_structure(&t).unwrap();
    let x = find_vertical_class(&t, &alpha.vertical_quads()).unwrap().unwrap();
    assert_eq!(x.support_quads(), vec![QuadType::new(5, 0), QuadType::new(5, 2)]);
    assert_eq!(x.quad(5, 0), x.quad(5, 2));
    assert!(x.quad(5, 0).is_one());
    assert_eq!(x.num_triangles(), cuspangle::Rational::from_integer(20.into()));
}

#[test]
fn completion_of_tet_five_quads_has_twenty_triangles() {
    let t = m136_from_table();
    let mut quads = vec![cuspangle::Rational::zero(); 21];
    quads[QuadType::new(5, 0).index()] = cuspangle::Rational::one();
    quads[QuadType::new(5, 2).index()] = cuspangle::Rational::one();
    let Completion::Closed(x) = complete_to_closed(&t, &quads).unwrap() else {
        panic!("expected a closed completion");
    };
    assert_eq!(x.num_triangles(), cuspangle::Rational::from_integer(20.into()));
    assert!(matches_across_faces(&t, &x));
}

#[test]
fn tet_three_quads_are_spun_only() {
    let t = m136_from_table();
    let s = angles_from_shapes(&t, &shapes(), &ShapeOptions::default()).unwrap();
    let on_three = s.vertical_quads().restricted_to(&[3]);
    assert!(matches!(vertical_outcome(&t, &on_three).unwrap(), VerticalOutcome::SpunOnly(_)));
}

#[test]
fn semi_structure_is_exact() {
    let t = m136_from_table();
    let alpha = find_angle_structure(&t, AngleKind::Semi).unwrap();
    assert!(alpha.residual(&t).iter().all(Zero::is_zero));
    assert!(alpha.values().iter().all(|v| !v.is_negative() && *v <= cuspangle::Rational::one()));
}
