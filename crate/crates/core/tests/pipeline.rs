use cuspangle::angles::{find_angle_structure, AngleKind};
use cuspangle::normal::strict_exists_dual;
use cuspangle::ppp::{
    build_pipeline, cone_polyhedron, spanning_tree, spanning_tree_cones, PolyhedralDecomposition, Provenance,
};

fn antiprisms() -> PolyhedralDecomposition {
    let path = format!("{}/../../fixtures/turks_head_antiprisms.json", env!("CARGO_MANIFEST_DIR"));
    PolyhedralDecomposition::from_json(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn named_cones_resolve() {
    let d = antiprisms();
    assert_eq!(d.resolve_cones(&["c+".into(), "c-".into()]).unwrap(), [0, 0]);
    assert_eq!(d.resolve_cones(&["3".into(), "x5".into()]).unwrap(), [3, 5]);
    assert!(d.resolve_cones(&["c-".into(), "c-".into()]).is_err());
}

#[test]
fn coning_at_c_plus_uses_every_face_off_the_apex() {
    let d = antiprisms();
    let coning = cone_polyhedron(&d.polyhedra[0], 0).unwrap();
    // Four faces meet the apex; the remaining square and five triangles
    // become pyramids.
    assert_eq!(coning.determined.len(), 4);
    let sizes: Vec<usize> = coning.bases.iter().map(|&f| d.polyhedra[0].faces[f].len()).collect();
    assert_eq!(sizes.iter().filter(|&&s| s == 4).count(), 1);
    assert_eq!(sizes.iter().filter(|&&s| s == 3).count(), 5);
}

#[test]
fn cones_at_one_crossing_leave_one_square_pillow() {
    let d = antiprisms();
    let cones = d.resolve_cones(&["c+".into(), "c-".into()]).unwrap();
    let c = build_pipeline(&d, &cones).unwrap();
    assert_eq!(c.pillows.len(), 1);
    let pillow = &c.pillows[0];
    assert_eq!(pillow.n, 4);
    assert_eq!(pillow.tetrahedra.len(), 1);
    assert_eq!(c.flat_tetrahedra(), pillow.tetrahedra);
    // Each pyramid over a triangle is one tetrahedron, over a square two.
    let expected_pyramids: usize = d
        .polyhedra
        .iter()
        .zip(&cones)
        .map(|(p, &v)| cone_polyhedron(p, v).unwrap().bases.iter().map(|&f| p.faces[f].len() - 2).sum::<usize>())
        .sum();
    assert_eq!(c.num_pyramid_tetrahedra(), expected_pyramids);
    assert_eq!(c.triangulation.num_tetrahedra(), expected_pyramids + 1);
    assert_eq!(c.triangulation.num_cusps(), 1);
    assert!(strict_exists_dual(&c.triangulation).unwrap().exists);
    assert!(find_angle_structure(&c.triangulation, AngleKind::Strict).is_some());
}

#[test]
fn tree_faces_never_carry_pillows() {
    let d = antiprisms();
    let cones = spanning_tree_cones(&d).unwrap();
    let c = build_pipeline(&d, &cones).unwrap();
    for (g, _, _) in spanning_tree(&d).unwrap() {
        assert!(c.pillows.iter().all(|p| p.gluing != g));
    }
    for (t, p) in c.provenance.iter().enumerate() {
        if let Provenance::PillowLayer { pillow, .. } = p {
            assert!(c.pillows[*pillow].tetrahedra.contains(&t));
        }
    }
}

#[test]
fn every_cone_pair_gives_a_valid_triangulation() {
    let d = antiprisms();
    for a in 0..8 {
        for b in 0..8 {
            let c = build_pipeline(&d, &[a, b]).unwrap();
            let pillow_tets: usize = c.pillows.iter().map(|p| p.tetrahedra.len()).sum();
            assert_eq!(c.triangulation.num_tetrahedra(), c.num_pyramid_tetrahedra() + pillow_tets);
            assert_eq!(c.triangulation.num_cusps(), 1);
        }
    }
}
