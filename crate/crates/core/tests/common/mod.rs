#![allow(dead_code)]

use std::collections::VecDeque;

use cuspangle::angles::VerticalQuadSet;
use cuspangle::exact::{lp_solve, Bound, LpProblem, LpStatus, Relation, Sense};
use cuspangle::normal::{matching_system, primitive_integer, quad_index, tri_index, NormalVector};
use cuspangle::ppp::{
    build_pipeline, flip_corners, pillow_lambda, FaceGluing, PolyhedralDecomposition, Polyhedron, PppCellulation,
    PppError,
};
use cuspangle::triangulation::canonical_cycle;
use cuspangle::{GluingTable, Perm4, QuadType, Rational, Triangulation, TriangulationError};
use num_traits::{One, Signed, Zero};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_text(name: &str) -> String {
    let path = format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"));
    std::fs::read_to_string(path).unwrap()
}

pub fn fixture(name: &str) -> Triangulation {
    Triangulation::from_json(&fixture_text(name)).unwrap()
}

pub const TRIANGULATION_FIXTURES: [&str; 11] = [
    "fig8.json",
    "m003.json",
    "m006.json",
    "small2a.json",
    "small2b.json",
    "small3a.json",
    "small3b.json",
    "m136_bad.json",
    "whitehead.json",
    "turks_head_link.json",
    "turks_head_pillow.json",
];

/// Quad axis separating the vertex pair `{a, b}` from its complement.
pub fn separating_axis(a: u8, b: u8) -> usize {
    let (lo, hi) = (a.min(b), a.max(b));
    if lo == 0 {
        hi as usize - 1
    } else {
        5 - (a + b) as usize
    }
}

/// Normal arcs on face `f` of `tet` cutting off vertex `v`.
pub fn arcs(x: &NormalVector, tet: usize, f: u8, v: u8) -> Rational {
    x.tri(tet, v) + x.quad(tet, separating_axis(v, f))
}

/// A random gluing of `n` tetrahedra in which every face map is odd, so the
/// result is oriented with every tetrahedron positive. `None` when the
/// pairing is disconnected.
pub fn random_oriented_table<R: Rng>(n: usize, rng: &mut R) -> Option<GluingTable> {
    let mut faces: Vec<(usize, u8)> = (0..n).flat_map(|t| (0..4u8).map(move |f| (t, f))).collect();
    faces.shuffle(rng);
    let mut table = GluingTable::new(n);
    for pair in faces.chunks(2) {
        let [(t, f), (u, g)] = [pair[0], pair[1]];
        let from: Vec<u8> = (0..4u8).filter(|&v| v != f).collect();
        let mut to: Vec<u8> = (0..4u8).filter(|&v| v != g).collect();
        let perm = loop {
            to.shuffle(rng);
            let p = Perm4::from_partial([from[0], from[1], from[2]], [to[0], to[1], to[2]]).unwrap();
            if p.sign() < 0 {
                break p;
            }
        };
        table.join(t, f, u, perm);
    }
    let mut seen = vec![false; n];
    seen[0] = true;
    let mut queue = VecDeque::from([0]);
    while let Some(t) = queue.pop_front() {
        for f in 0..4u8 {
            let u = table.get(t, f).unwrap().tet;
            if !seen[u] {
                seen[u] = true;
                queue.push_back(u);
            }
        }
    }
    seen.iter().all(|&s| s).then_some(table)
}

/// Random oriented triangulations with torus cusps, at most `max_n`
/// tetrahedra.
pub fn random_cusped(count: usize, max_n: usize, seed: u64) -> Vec<Triangulation> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = vec![];
    while out.len() < count {
        let n = 2 + (out.len() % (max_n - 1));
        let Some(table) = random_oriented_table(n, &mut rng) else {
            continue;
        };
        let Ok(t) = Triangulation::new(table) else {
            continue;
        };
        if t.edges().len() == n && all_cusps_tori(&t) {
            out.push(t);
        }
    }
    out
}

/// Whether every vertex link is a torus, counted from cells.
pub fn all_cusps_tori(t: &Triangulation) -> bool {
    let mut ends = vec![0i64; t.num_cusps()];
    for e in t.edges() {
        let [a, b] = e.ends;
        ends[a] += 1;
        ends[b] += 1;
    }
    t.vertices()
        .iter()
        .enumerate()
        .all(|(c, class)| 2 * ends[c] == class.corners.len() as i64)
}

/// Euler characteristic of a normal surface from its cell structure:
/// vertices on edges, arcs on faces, discs in tetrahedra.
pub fn cell_euler_characteristic(t: &Triangulation, x: &NormalVector) -> Rational {
    let mut chi = Rational::zero();
    for e in t.edges() {
        let inc = &e.incidences[0];
        let [a, b, ..] = inc.verts;
        let mut w = x.tri(inc.tet, a) + x.tri(inc.tet, b);
        for axis in (0..3).filter(|&k| k != separating_axis(a, b)) {
            w += x.quad(inc.tet, axis);
        }
        chi += w;
    }
    for face in t.faces() {
        let (tet, f) = face.first;
        for v in (0..4u8).filter(|&v| v != f) {
            chi -= arcs(x, tet, f, v);
        }
    }
    chi += x.num_triangles() + x.num_quads();
    chi
}

/// Whether arcs agree across every glued face, computed directly from the
/// gluing maps.
pub fn matches_across_faces(t: &Triangulation, x: &NormalVector) -> bool {
    (0..t.num_tetrahedra()).all(|tet| {
        (0..4u8).all(|f| {
            let g = t.neighbor(tet, f);
            (0..4u8)
                .filter(|&v| v != f)
                .all(|v| arcs(x, tet, f, v) == arcs(x, g.tet, g.perm.apply(f), g.perm.apply(v)))
        })
    })
}

/// Every non-zero embedded normal surface with at most `qmax` quads and
/// `tmax` triangles of each type, found by exhaustive search.
pub fn brute_force_surfaces(t: &Triangulation, qmax: i64, tmax: i64) -> Vec<NormalVector> {
    let n = t.num_tetrahedra();
    // Per tetrahedron: no quads, or `c` quads of a single axis.
    let quad_choices: Vec<Option<(usize, i64)>> = std::iter::once(None)
        .chain((0..3).flat_map(|a| (1..=qmax).map(move |c| Some((a, c)))))
        .collect();
    let mut out = vec![];
    let mut quad_idx = vec![0usize; n];
    loop {
        let mut tri = vec![0usize; 4 * n];
        loop {
            let mut x = NormalVector::zero(n);
            for tet in 0..n {
                if let Some((a, c)) = quad_choices[quad_idx[tet]] {
                    *x.quad_mut(tet, a) = Rational::from_integer(c.into());
                }
                for v in 0..4u8 {
                    *x.tri_mut(tet, v) = Rational::from_integer((tri[4 * tet + v as usize] as i64).into());
                }
            }
            if !x.coords().iter().all(Zero::is_zero) && matches_across_faces(t, &x) {
                out.push(x);
            }
            if !odometer(&mut tri, tmax as usize + 1) {
                break;
            }
        }
        if !odometer(&mut quad_idx, quad_choices.len()) {
            break;
        }
    }
    out
}

fn odometer(digits: &mut [usize], base: usize) -> bool {
    for d in digits.iter_mut() {
        *d += 1;
        if *d < base {
            return true;
        }
        *d = 0;
    }
    false
}

/// A polyhedron and its mirror, each face glued to its copy with rotation
/// `turns[f]`.
pub fn doubled(p: &Polyhedron, turns: &[usize]) -> PolyhedralDecomposition {
    let mirror = Polyhedron {
        vertices: p.vertices,
        faces: p.faces.iter().map(|f| f.iter().rev().copied().collect()).collect(),
        names: None,
        angles: None,
    };
    let mirror_faces = mirror.faces.clone();
    let gluings = p
        .faces
        .iter()
        .enumerate()
        .map(|(f, face)| {
            let m = face.len();
            let dst = &mirror_faces[f];
            FaceGluing {
                from: (0, f),
                to: (1, f),
                map: (0..m).map(|k| dst[(turns[f] + m - k) % m]).collect(),
            }
        })
        .collect();
    PolyhedralDecomposition {
        polyhedra: vec![p.clone(), mirror],
        gluings,
    }
}

/// The prism over a `k`-gon: bottom `0..k`, top `k..2k`.
pub fn prism(k: usize) -> Polyhedron {
    let mut faces = vec![(0..k).rev().collect::<Vec<_>>(), (k..2 * k).collect()];
    for i in 0..k {
        let j = (i + 1) % k;
        faces.push(vec![i, j, k + j, k + i]);
    }
    Polyhedron {
        vertices: 2 * k,
        faces,
        names: None,
        angles: None,
    }
}

/// The seven-tetrahedron m136 gluing table in face notation: faces
/// `012, 013, 023, 123`, each as neighbour and vertex images.
pub const M136_FACES: [[(usize, &str); 4]; 7] = [
    [(1, "312"), (4, "302"), (6, "130"), (4, "132")],
    [(3, "102"), (2, "012"), (2, "203"), (0, "120")],
    [(1, "013"), (6, "321"), (1, "203"), (4, "031")],
    [(1, "102"), (6, "230"), (5, "021"), (5, "023")],
    [(5, "312"), (2, "132"), (0, "130"), (0, "132")],
    [(3, "032"), (6, "012"), (3, "123"), (4, "120")],
    [(5, "013"), (0, "302"), (3, "301"), (2, "310")],
];

/// Shape parameters for the table above, by tetrahedron.
pub const M136_SHAPES: [(f64, f64); 7] = [
    (0.0, 2.0),
    (-1.0, 2.0),
    (0.6, 0.2),
    (-1.0, 0.0),
    (0.2, 0.4),
    (2.0, 0.0),
    (0.5, 0.5),
];

/// Edges of the m136 table: tetrahedron and directed edge at each step
/// around the edge.
pub const M136_EDGES: [&[(usize, u8, u8)]; 7] = [
    &[(0, 0, 1), (4, 3, 0), (2, 2, 1), (1, 3, 1)],
    &[(0, 0, 2), (1, 3, 2), (2, 3, 0), (6, 1, 3)],
    &[
        (0, 0, 3),
        (6, 1, 0),
        (5, 1, 0),
        (3, 3, 0),
        (6, 0, 2),
        (5, 0, 3),
        (3, 1, 3),
        (6, 3, 0),
        (0, 2, 3),
        (4, 3, 2),
    ],
    &[
        (0, 1, 2),
        (4, 1, 3),
        (2, 3, 2),
        (1, 3, 0),
        (2, 2, 0),
        (1, 0, 2),
        (3, 1, 2),
        (5, 0, 2),
        (3, 0, 2),
        (1, 1, 2),
    ],
    &[(0, 1, 3), (4, 0, 2), (5, 3, 2), (3, 3, 2), (5, 1, 2), (4, 1, 2)],
    &[(1, 0, 1), (2, 0, 1), (6, 3, 2), (3, 1, 0)],
    &[(2, 1, 3), (6, 2, 1), (5, 3, 1), (4, 0, 1)],
];

/// Canonical form of an incidence cycle, up to rotation, reversal and
/// flipping the direction of the edge throughout.
pub fn canonical_incidences(seq: &[(usize, u8, u8)]) -> Vec<(usize, u8, u8)> {
    let flipped: Vec<_> = seq.iter().map(|&(t, a, b)| (t, b, a)).collect();
    canonical_cycle(seq).min(canonical_cycle(&flipped))
}

pub fn m136_from_table() -> Triangulation {
    Triangulation::new(GluingTable::from_face_notation(&M136_FACES).unwrap()).unwrap()
}

/// Checks the corner bookkeeping of a flip tetrahedron against arc counts
/// read directly off its faces. Faces opposite 2 and 3 lie below, faces
/// opposite 0 and 1 above; vertices 0 and 1 are double corners below, 2
/// and 3 above.
pub fn check_flip_corners(x: &NormalVector, tet: usize) -> Result<(), String> {
    let c = flip_corners(x, tet);
    let (x1, x2) = (x.quad(tet, 1).clone(), x.quad(tet, 2).clone());
    let lambda = x1.clone().min(x2.clone());
    let gap = (&x1 - &x2).abs();
    if c.lambda != lambda || c.residual != gap {
        return Err(format!("lambda {} residual {}", c.lambda, c.residual));
    }
    for v in 0..4u8 {
        let below: Vec<Rational> = [2u8, 3].into_iter().filter(|&f| f != v).map(|f| arcs(x, tet, f, v)).collect();
        let above: Vec<Rational> = [0u8, 1].into_iter().filter(|&f| f != v).map(|f| arcs(x, tet, f, v)).collect();
        let (double, single) = if v < 2 { (&below, &above) } else { (&above, &below) };
        let low = double.iter().min().unwrap();
        if (double[0].clone() - &double[1]).abs() != gap {
            return Err(format!("gap at corner {v}"));
        }
        // The through-going count drops by λ where a double corner becomes
        // single and rises by λ the other way.
        let (change, want) = if v < 2 {
            (&single[0] - low, -lambda.clone())
        } else {
            (low - &single[0], lambda.clone())
        };
        if change != want || c.changes[v as usize] != want {
            return Err(format!("change at corner {v}"));
        }
    }
    Ok(())
}

/// A normal class whose quads lie in `vertical`, with the quads on
/// `focus` summing to one and a random weighting of them maximized; `None`
/// when there is none.
pub fn random_vertical_class<R: Rng>(
    t: &Triangulation,
    vertical: &VerticalQuadSet,
    focus: &[usize],
    rng: &mut R,
) -> Option<NormalVector> {
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
            if !vertical.contains(QuadType::new(tet, a)) {
                lp.bounds[i] = Bound::fixed(Rational::zero());
            } else if focus.contains(&tet) {
                total[i] = Rational::one();
                lp.objective[i] = Rational::from_integer(rng.gen_range(1..=9).into());
            }
        }
    }
    lp.add(total, Relation::Eq, Rational::one());
    let out = lp_solve(&lp);
    if out.status != LpStatus::Optimal {
        return None;
    }
    let mut x = NormalVector::from_coords(primitive_integer(&out.point.unwrap()));
    for class in t.vertices() {
        let min = class.corners.iter().map(|&(tet, v)| x.tri(tet, v).clone()).min().unwrap();
        for &(tet, v) in &class.corners {
            *x.tri_mut(tet, v) -= &min;
        }
    }
    Some(x)
}

/// Counts of the pillow lemma checks made on one cellulation.
#[derive(Debug, Default)]
pub struct LemmaCounts {
    /// Pillows whose quads were probed by an LP.
    pub pillows: usize,
    /// Vertical classes found and checked.
    pub classes: usize,
}

/// Checks the pillow lemmas on a pipeline output: every pillow carrying a
/// vertical class has 4 or 6 sides, and every class found alternates by
/// `±λ` across each pillow (with `λ = 0` on odd pillows) and satisfies the
/// corner relation in every flip tetrahedron.
pub fn check_pillow_lemmas<R: Rng>(c: &PppCellulation, rng: &mut R) -> Result<LemmaCounts, String> {
    let t = &c.triangulation;
    let vertical = c.natural_vertical_quads();
    let mut counts = LemmaCounts::default();
    let mut classes = vec![];
    for p in &c.pillows {
        counts.pillows += 1;
        if let Some(x) = random_vertical_class(t, &vertical, &p.tetrahedra, rng) {
            if p.n != 4 && p.n != 6 {
                return Err(format!("vertical class with quads in a {}-gon pillow", p.n));
            }
            classes.push(x);
        }
    }
    if let Some(x) = random_vertical_class(t, &vertical, &c.flat_tetrahedra(), rng) {
        classes.push(x);
    }
    for x in &classes {
        if !matches_across_faces(t, x) {
            return Err("arcs do not match across faces".into());
        }
        if !x.is_integral() || !x.is_non_negative() {
            return Err("not a non-negative integer vector".into());
        }
        for p in &c.pillows {
            let lambda = pillow_lambda(&p.boundary, x).map_err(|e| format!("n = {}: {e}", p.n))?;
            if p.n % 2 == 1 && !lambda.is_zero() {
                return Err(format!("odd pillow with λ = {lambda}"));
            }
            for &tet in &p.tetrahedra {
                check_flip_corners(x, tet)?;
            }
        }
        counts.classes += 1;
    }
    Ok(counts)
}

/// A doubled prism with random face rotations and cone vertices, drawn
/// until the pipeline yields a cusped triangulation.
pub fn random_doubled_prism<R: Rng>(k: usize, rng: &mut R) -> PppCellulation {
    loop {
        let turns: Vec<usize> = (0..k + 2).map(|f| rng.gen_range(0..if f < 2 { k } else { 4 })).collect();
        let cones = [rng.gen_range(0..2 * k), rng.gen_range(0..2 * k)];
        match build_pipeline(&doubled(&prism(k), &turns), &cones) {
            Ok(c) => return c,
            Err(PppError::Triangulation(
                TriangulationError::VertexLinkNotTorus { .. } | TriangulationError::EdgeReversed { .. },
            )) => continue,
            Err(e) => panic!("doubled {k}-prism {turns:?} cones {cones:?}: {e}"),
        }
    }
}
