mod common;

use common::*;
use cuspangle::angles::{chi_star, find_angle_structure};
use cuspangle::normal::NormalVector;
use cuspangle::{AngleKind, Rational, Triangulation};
use num_traits::{One, Zero};

fn vertex_link(t: &Triangulation, cusp: usize) -> NormalVector {
    let mut x = NormalVector::zero(t.num_tetrahedra());
    for &(tet, v) in &t.vertices()[cusp].corners {
        *x.tri_mut(tet, v) = Rational::one();
    }
    x
}

#[test]
fn vertex_links_have_zero_chi_star() {
    for name in TRIANGULATION_FIXTURES {
        let t = fixture(name);
        let alpha = find_angle_structure(&t, AngleKind::Generalized).unwrap();
        for c in 0..t.num_cusps() {
            let x = vertex_link(&t, c);
            assert!(matches_across_faces(&t, &x));
            assert!(cell_euler_characteristic(&t, &x).is_zero());
            assert!(chi_star(&t, &alpha, &x).unwrap().is_zero(), "{name} cusp {c}");
        }
    }
}

#[test]
fn chi_star_counts_cells_on_small_surfaces() {
    let mut checked = 0;
    let mut with_quads = 0;
    for (name, qmax, tmax) in [
        ("fig8.json", 2, 2),
        ("m003.json", 2, 2),
        ("m006.json", 1, 1),
        ("small2a.json", 2, 2),
        ("small2b.json", 2, 2),
        ("small3a.json", 1, 1),
        ("small3b.json", 1, 1),
    ] {
        let t = fixture(name);
        let structures: Vec<_> = [AngleKind::Generalized, AngleKind::Strict]
            .into_iter()
            .filter_map(|k| find_angle_structure(&t, k))
            .collect();
        let surfaces = brute_force_surfaces(&t, qmax, tmax);
        for x in &surfaces {
            let chi = cell_euler_characteristic(&t, x);
            for alpha in &structures {
                assert_eq!(chi_star(&t, alpha, x).unwrap(), chi, "{name}");
            }
            checked += 1;
            with_quads += usize::from(!x.num_quads().is_zero());
        }
    }
    assert!(checked >= 20 && with_quads >= 10, "{checked} {with_quads}");
}
