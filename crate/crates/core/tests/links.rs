use cuspangle::alternating::{
    check_hypotheses, flatten, link_triangulation, rivin_check, rivin_conditions, two_polyhedra, uniform_angles,
    LinkDiagram, LinkError,
};
use cuspangle::angles::{find_angle_structure, AngleKind};
use cuspangle::normal::strict_exists_dual;
use cuspangle::ppp::Provenance;
use cuspangle::Rational;

fn pd(name: &str) -> LinkDiagram {
    let path = format!("{}/../../fixtures/{name}.pd.json", env!("CARGO_MANIFEST_DIR"));
    LinkDiagram::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn half() -> Rational {
    Rational::new(1.into(), 2.into())
}

#[test]
fn euler_counts() {
    for (name, counts) in [("turks_head", (8, 16, 10)), ("trefoil", (3, 6, 5)), ("fig8", (4, 8, 6))] {
        let g = flatten(&pd(name)).unwrap();
        assert_eq!((g.num_vertices, g.edges.len(), g.faces.len()), counts, "{name}");
    }
}

#[test]
fn components() {
    assert_eq!(pd("turks_head").num_components(), 1);
    assert_eq!(pd("fig8").num_components(), 1);
    assert_eq!(pd("trefoil").num_components(), 1);
    assert_eq!(pd("borromean").num_components(), 3);
}

#[test]
fn hypotheses() {
    let h = check_hypotheses(&flatten(&pd("turks_head")).unwrap());
    assert!(h.all_hold(), "{h:?}");
    for name in ["trefoil", "fig8"] {
        assert!(!check_hypotheses(&flatten(&pd(name)).unwrap()).no_bigons, "{name}");
    }
}

#[test]
fn turks_head_polyhedra_are_square_antiprisms() {
    let d = two_polyhedra(&flatten(&pd("turks_head")).unwrap()).unwrap();
    for p in &d.polyhedra {
        let mut sizes: Vec<usize> = p.faces.iter().map(Vec::len).collect();
        sizes.sort();
        assert_eq!(sizes, [3, 3, 3, 3, 3, 3, 3, 3, 4, 4]);
        assert!((0..8).all(|v| p.faces_at(v).len() == 4));
        assert!(rivin_check(p, &uniform_angles(p, half())));
    }
    for class in d.edge_classes() {
        assert_eq!(class.len(), 4);
        assert_eq!(class.iter().filter(|(p, _)| *p == 0).count(), 2);
    }
}

#[test]
fn borromean_octahedra_satisfy_rivin() {
    // Borromean rings: an octahedron on each side, where every 4-cycle of
    // regions is a vertex link.
    let g = flatten(&pd("borromean")).unwrap();
    assert!(check_hypotheses(&g).all_hold());
    let d = two_polyhedra(&g).unwrap();
    let report = rivin_conditions(&d.polyhedra[0], &uniform_angles(&d.polyhedra[0], half()));
    assert!(report.holds(), "{report:?}");
}

fn check_link(name: &str, cusps: usize) {
    let diagram = pd(name);
    let lt = link_triangulation(&diagram).unwrap();
    let c = &lt.cellulation;
    assert!(c.pillows.is_empty());
    assert!(c.provenance.iter().all(|p| matches!(p, Provenance::Pyramid { .. })));
    assert_eq!(c.triangulation.num_cusps(), cusps, "{name}");
    assert_eq!(cusps, diagram.num_components());
    assert!(find_angle_structure(&c.triangulation, AngleKind::Strict).is_some());
    assert!(strict_exists_dual(&c.triangulation).unwrap().exists);
}

#[test]
fn turks_head_triangulation_is_strict() {
    check_link("turks_head", 1);
}

#[test]
fn borromean_triangulation_is_strict() {
    check_link("borromean", 3);
}

#[test]
fn five_antiprism_triangulation_is_strict() {
    check_link("antiprism5", 1);
}

#[test]
fn bigon_diagrams_are_refused() {
    for name in ["trefoil", "fig8"] {
        assert!(matches!(link_triangulation(&pd(name)), Err(LinkError::HypothesisFailed(_))));
    }
}
