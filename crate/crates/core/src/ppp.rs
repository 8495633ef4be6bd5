//! Polyhedral decompositions and the triangulations built from them:
//! coning each polyhedron from a vertex, bridging mismatched face
//! triangulations with layered pillows, and choosing cone vertices along a
//! spanning tree of the gluing graph.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::angles::VerticalQuadSet;
use crate::exact::{int, lp_solve, parse_rational, LpProblem, LpStatus, Rational, Relation, Sense};
use crate::normal::{arc_count, quad_index, tri_index, NormalVector};
use crate::triangulation::{axis_of, GluingTable, Perm4, QuadType, Triangulation, TriangulationError};

/// An edge of a polyhedron: `(polyhedron, (a, b))` with `a < b`.
pub type EdgeEnd = (usize, (usize, usize));

/// A boundary triangle seen from a tetrahedron: tet, face and the polygon
/// position of each vertex.
type SideTriangle = (usize, u8, [Option<usize>; 4]);

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Polyhedron {
    pub vertices: usize,
    /// Each face as a cyclic vertex list, counterclockwise seen from outside.
    pub faces: Vec<Vec<usize>>,
    /// Optional vertex names, usable when choosing cone vertices.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
    /// Optional shape certificate: interior dihedral angles in units of π.
    /// Only angle sums are checked; realizability is not.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub angles: Option<Vec<EdgeAngle>>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EdgeAngle {
    pub edge: [usize; 2],
    /// A rational such as `"1/2"`.
    pub angle: String,
}

impl Polyhedron {
    /// Undirected edges, as sorted vertex pairs in sorted order.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut set = BTreeSet::new();
        for face in &self.faces {
            for k in 0..face.len() {
                let (a, b) = (face[k], face[(k + 1) % face.len()]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.into_iter().collect()
    }

    /// Faces incident to vertex `v`.
    pub fn faces_at(&self, v: usize) -> Vec<usize> {
        (0..self.faces.len())
            .filter(|&f| self.faces[f].contains(&v))
            .collect()
    }

    pub fn vertex_by_name(&self, name: &str) -> Option<usize> {
        self.names.as_ref()?.iter().position(|n| n == name)
    }

    fn validate(&self, p: usize) -> Result<(), PppError> {
        let mut directed = BTreeSet::new();
        let mut seen = vec![false; self.vertices];
        for (f, face) in self.faces.iter().enumerate() {
            if face.len() < 3 {
                return Err(PppError::FaceTooSmall { polyhedron: p, face: f });
            }
            let distinct: BTreeSet<_> = face.iter().collect();
            if distinct.len() != face.len() {
                return Err(PppError::RepeatedVertex { polyhedron: p, face: f });
            }
            for k in 0..face.len() {
                let (a, b) = (face[k], face[(k + 1) % face.len()]);
                if a >= self.vertices {
                    return Err(PppError::VertexOutOfRange { polyhedron: p, vertex: a });
                }
                seen[a] = true;
                if !directed.insert((a, b)) {
                    return Err(PppError::NotASphere { polyhedron: p, euler: None });
                }
            }
        }
        if directed.iter().any(|&(a, b)| !directed.contains(&(b, a))) || seen.contains(&false) {
            return Err(PppError::NotASphere { polyhedron: p, euler: None });
        }
        let euler = self.vertices as i64 - (directed.len() / 2) as i64 + self.faces.len() as i64;
        if euler != 2 {
            return Err(PppError::NotASphere { polyhedron: p, euler: Some(euler) });
        }
        match &self.angles {
            Some(angles) => self.check_angles(p, angles),
            None => Ok(()),
        }
    }

    /// Each edge gets one angle strictly between 0 and π, and the angles
    /// around an ideal vertex of degree d sum to (d - 2)π.
    fn check_angles(&self, p: usize, angles: &[EdgeAngle]) -> Result<(), PppError> {
        let bad = |reason: String| PppError::BadShapeCertificate { polyhedron: p, reason };
        let mut by_edge = BTreeMap::new();
        for a in angles {
            let [u, v] = a.edge;
            let value = parse_rational(&a.angle).ok_or_else(|| bad(format!("cannot parse angle {:?}", a.angle)))?;
            if value <= Rational::zero() || value >= Rational::one() {
                return Err(bad(format!("angle {} on edge {u}-{v} is not in (0, 1)", a.angle)));
            }
            if by_edge.insert((u.min(v), u.max(v)), value).is_some() {
                return Err(bad(format!("edge {u}-{v} listed twice")));
            }
        }
        let edges = self.edges();
        if let Some(&(u, v)) = edges.iter().find(|e| !by_edge.contains_key(e)) {
            return Err(bad(format!("edge {u}-{v} has no angle")));
        }
        if let Some(&(u, v)) = by_edge.keys().find(|e| edges.binary_search(e).is_err()) {
            return Err(bad(format!("{u}-{v} is not an edge")));
        }
        for w in 0..self.vertices {
            let at: Vec<&Rational> = by_edge.iter().filter(|((a, b), _)| *a == w || *b == w).map(|(_, r)| r).collect();
            let sum: Rational = at.iter().copied().sum();
            if sum != int(at.len() as i64 - 2) {
                return Err(bad(format!("angles at vertex {w} sum to {sum}, expected {}", at.len() - 2)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FaceGluing {
    /// `(polyhedron, face)`.
    pub from: (usize, usize),
    pub to: (usize, usize),
    /// `map[k]` is the vertex of `to`'s polyhedron matched with the `k`-th
    /// vertex of the `from` face.
    pub map: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyhedralDecomposition {
    pub polyhedra: Vec<Polyhedron>,
    pub gluings: Vec<FaceGluing>,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum PppError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("polyhedron {polyhedron}: face {face} has fewer than three vertices")]
    FaceTooSmall { polyhedron: usize, face: usize },
    #[error("polyhedron {polyhedron}: face {face} repeats a vertex")]
    RepeatedVertex { polyhedron: usize, face: usize },
    #[error("polyhedron {polyhedron}: vertex {vertex} out of range")]
    VertexOutOfRange { polyhedron: usize, vertex: usize },
    #[error("polyhedron {polyhedron}: boundary is not an oriented sphere (euler {euler:?})")]
    NotASphere { polyhedron: usize, euler: Option<i64> },
    #[error("face {face} of polyhedron {polyhedron} is not glued")]
    FaceUnglued { polyhedron: usize, face: usize },
    #[error("face {face} of polyhedron {polyhedron} is glued more than once")]
    FaceGluedTwice { polyhedron: usize, face: usize },
    #[error("gluing {gluing}: vertex map is not an orientation-reversing bijection of faces")]
    BadMap { gluing: usize },
    #[error("gluing {gluing} refers to a missing polyhedron or face")]
    BadGluingReference { gluing: usize },
    #[error("polyhedron {polyhedron}: shape certificate rejected: {reason}")]
    BadShapeCertificate { polyhedron: usize, reason: String },
    #[error("polyhedron {polyhedron} has no vertex {vertex}")]
    InvalidConeIndex { polyhedron: usize, vertex: usize },
    #[error("polyhedron {polyhedron} has no vertex named {name:?}")]
    UnknownConeName { polyhedron: usize, name: String },
    #[error("expected {expected} cone vertices, got {got}")]
    ConeCount { expected: usize, got: usize },
    #[error("the gluing graph is disconnected")]
    DisconnectedGluingGraph,
    #[error("not a cone triangulation of an {n}-gon")]
    NotConeTriangulation { n: usize },
    #[error("pillow arc pattern is not vertex-linking at polygon vertex {vertex}")]
    NotVertexLinking { vertex: usize },
    #[error("pillow arc multiplicities do not alternate at polygon vertex {vertex}")]
    AlternationFailed { vertex: usize },
    #[error("internal: {0}")]
    Internal(String),
    #[error(transparent)]
    Triangulation(#[from] TriangulationError),
}

impl PolyhedralDecomposition {
    pub fn from_json(text: &str) -> Result<Self, PppError> {
        let d: PolyhedralDecomposition =
            serde_json::from_str(text).map_err(|e| PppError::Parse(e.to_string()))?;
        d.validate()?;
        Ok(d)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable")
    }

    pub fn validate(&self) -> Result<(), PppError> {
        for (p, poly) in self.polyhedra.iter().enumerate() {
            poly.validate(p)?;
        }
        let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
        for (i, g) in self.gluings.iter().enumerate() {
            let face = |(p, f): (usize, usize)| {
                self.polyhedra
                    .get(p)
                    .and_then(|poly| poly.faces.get(f))
                    .ok_or(PppError::BadGluingReference { gluing: i })
            };
            let src = face(g.from)?;
            let dst = face(g.to)?;
            for side in [g.from, g.to] {
                if !used.insert(side) {
                    return Err(PppError::FaceGluedTwice {
                        polyhedron: side.0,
                        face: side.1,
                    });
                }
            }
            let m = dst.len();
            if src.len() != m || g.map.len() != m {
                return Err(PppError::BadMap { gluing: i });
            }
            let Some(r) = dst.iter().position(|&v| v == g.map[0]) else {
                return Err(PppError::BadMap { gluing: i });
            };
            if (0..m).any(|k| g.map[k] != dst[(r + m - k) % m]) {
                return Err(PppError::BadMap { gluing: i });
            }
        }
        for (p, poly) in self.polyhedra.iter().enumerate() {
            for f in 0..poly.faces.len() {
                if !used.contains(&(p, f)) {
                    return Err(PppError::FaceUnglued { polyhedron: p, face: f });
                }
            }
        }
        Ok(())
    }

    /// Edges of the gluing graph between distinct polyhedra, as
    /// `(gluing index, p, q)`.
    pub fn gluing_graph(&self) -> Vec<(usize, usize, usize)> {
        self.gluings
            .iter()
            .enumerate()
            .filter(|(_, g)| g.from.0 != g.to.0)
            .map(|(i, g)| (i, g.from.0, g.to.0))
            .collect()
    }

    /// Edge classes of the glued complex, each a list of `(polyhedron,
    /// (a, b))` with `a < b`. Assumes the decomposition validates.
    pub fn edge_classes(&self) -> Vec<Vec<EdgeEnd>> {
        let ids: Vec<EdgeEnd> = self
            .polyhedra
            .iter()
            .enumerate()
            .flat_map(|(p, poly)| poly.edges().into_iter().map(move |e| (p, e)))
            .collect();
        let index: BTreeMap<_, usize> = ids.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        let mut parent: Vec<usize> = (0..ids.len()).collect();
        fn root(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        let key = |p: usize, a: usize, b: usize| index[&(p, (a.min(b), a.max(b)))];
        for g in &self.gluings {
            let face = &self.polyhedra[g.from.0].faces[g.from.1];
            let m = face.len();
            for k in 0..m {
                let i = key(g.from.0, face[k], face[(k + 1) % m]);
                let j = key(g.to.0, g.map[k], g.map[(k + 1) % m]);
                let (ri, rj) = (root(&mut parent, i), root(&mut parent, j));
                parent[ri] = rj;
            }
        }
        let mut classes: BTreeMap<usize, Vec<EdgeEnd>> = BTreeMap::new();
        for (i, &e) in ids.iter().enumerate() {
            classes.entry(root(&mut parent, i)).or_default().push(e);
        }
        classes.into_values().collect()
    }

    /// Resolves cone vertices given as indices or names, one per polyhedron.
    pub fn resolve_cones(&self, specs: &[String]) -> Result<Vec<usize>, PppError> {
        if specs.len() != self.polyhedra.len() {
            return Err(PppError::ConeCount {
                expected: self.polyhedra.len(),
                got: specs.len(),
            });
        }
        specs
            .iter()
            .enumerate()
            .map(|(p, s)| {
                let poly = &self.polyhedra[p];
                match s.trim().parse::<usize>() {
                    Ok(v) => Ok(v),
                    Err(_) => poly.vertex_by_name(s.trim()).ok_or(PppError::UnknownConeName {
                        polyhedron: p,
                        name: s.clone(),
                    }),
                }
            })
            .collect()
    }
}

/// Pyramids of the coning of a polyhedron from `apex`, and the face
/// triangulations the coning determines.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coning {
    pub apex: usize,
    /// Faces not incident to the apex: the pyramid bases.
    pub bases: Vec<usize>,
    /// Faces incident to the apex, with their fan triangulations (in
    /// polyhedron vertex labels).
    pub determined: Vec<(usize, Vec<[usize; 3]>)>,
}

pub fn cone_polyhedron(poly: &Polyhedron, apex: usize) -> Result<Coning, PppError> {
    if apex >= poly.vertices {
        return Err(PppError::InvalidConeIndex {
            polyhedron: 0,
            vertex: apex,
        });
    }
    let mut bases = vec![];
    let mut determined = vec![];
    for (f, face) in poly.faces.iter().enumerate() {
        match face.iter().position(|&v| v == apex) {
            Some(k) => determined.push((f, fan(face, k))),
            None => bases.push(f),
        }
    }
    Ok(Coning {
        apex,
        bases,
        determined,
    })
}

/// Fan triangulation of a cyclic vertex list from position `k`.
fn fan(face: &[usize], k: usize) -> Vec<[usize; 3]> {
    let n = face.len();
    (1..n - 1)
        .map(|j| [face[k], face[(k + j) % n], face[(k + j + 1) % n]])
        .collect()
}

fn sorted3(mut t: [usize; 3]) -> [usize; 3] {
    t.sort_unstable();
    t
}

/// The cone triangulation of an `n`-gon (positions `0..n`) from `apex`, as
/// sorted position triples.
pub fn cone_triangles(n: usize, apex: usize) -> BTreeSet<[usize; 3]> {
    let face: Vec<usize> = (0..n).collect();
    fan(&face, apex).into_iter().map(sorted3).collect()
}

/// One diagonal flip: `removed` is replaced by `added`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Flip {
    pub removed: (usize, usize),
    pub added: (usize, usize),
}

impl Flip {
    /// Polygon positions of the flip tetrahedron's vertices 0..3: the
    /// removed diagonal is edge 01, the added one edge 23.
    pub fn tet_positions(&self) -> [usize; 4] {
        [self.removed.0, self.removed.1, self.added.0, self.added.1]
    }
}

/// Layered triangulation of a pillow between two cone triangulations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LayeredPillow {
    pub n: usize,
    /// Cone position of the bottom triangulation.
    pub bottom: usize,
    /// Cone position of the top triangulation.
    pub top: usize,
    pub flips: Vec<Flip>,
    /// `layers[0]` is the bottom triangulation, `layers[k]` the result of
    /// the first `k` flips.
    pub layers: Vec<BTreeSet<[usize; 3]>>,
}

impl LayeredPillow {
    pub fn is_empty(&self) -> bool {
        self.flips.is_empty()
    }

    pub fn num_tetrahedra(&self) -> usize {
        self.flips.len()
    }
}

/// Flips turning the cone triangulation from `bottom` into the one from
/// `top`. Cone vertices at distance one are bridged by the standard fan
/// sweep; farther apart, the polygon is cut along the shared diagonal and
/// each half bridged separately, the half containing position 0 first.
pub fn layered_bridge(n: usize, bottom: usize, top: usize) -> Result<LayeredPillow, PppError> {
    if n < 3 || bottom >= n || top >= n {
        return Err(PppError::NotConeTriangulation { n });
    }
    let mut flips = vec![];
    let same = cone_triangles(n, bottom) == cone_triangles(n, top);
    if !same {
        let forward = |from: usize, to: usize| -> Vec<usize> {
            let mut v = vec![from];
            let mut k = from;
            while k != to {
                k = (k + 1) % n;
                v.push(k);
            }
            v
        };
        let dist = (top + n - bottom) % n;
        if dist == 1 || dist == n - 1 {
            sweep(&forward(0, n - 1), bottom, top, &mut flips);
        } else {
            let halves = [forward(top, bottom), forward(bottom, top)];
            let first = if halves[0].contains(&0) && halves[0][0] != 0 && *halves[0].last().unwrap() != 0 {
                0
            } else if halves[1][1..halves[1].len() - 1].contains(&0) {
                1
            } else {
                0
            };
            for h in [first, 1 - first] {
                sweep(&halves[h], bottom, top, &mut flips);
            }
        }
    }
    let mut layers = vec![cone_triangles(n, bottom)];
    for flip in &flips {
        let next = apply_flip(layers.last().unwrap(), flip)
            .ok_or_else(|| PppError::Internal(format!("invalid flip {flip:?}")))?;
        layers.push(next);
    }
    if *layers.last().unwrap() != cone_triangles(n, top) {
        return Err(PppError::Internal("layering does not reach the top".into()));
    }
    Ok(LayeredPillow {
        n,
        bottom,
        top,
        flips,
        layers,
    })
}

/// Fan sweep on a sub-polygon (cyclic position list) in which `bottom` and
/// `top` are adjacent: with `v_1 = top` and `v_m = bottom`, replaces
/// `(v_m, v_i)` by `(v_1, v_{i+1})` for `i = 2..m-2`.
fn sweep(poly: &[usize], bottom: usize, top: usize, flips: &mut Vec<Flip>) {
    let m = poly.len();
    if m < 4 {
        return;
    }
    let t = poly.iter().position(|&p| p == top).expect("top in sub-polygon");
    let b = poly.iter().position(|&p| p == bottom).expect("bottom in sub-polygon");
    // Orient so that v_1 = top, v_m = bottom.
    let v: Vec<usize> = if (t + m - 1) % m == b {
        (0..m).map(|k| poly[(t + k) % m]).collect()
    } else {
        (0..m).map(|k| poly[(t + m - k) % m]).collect()
    };
    for i in 2..=m - 2 {
        flips.push(Flip {
            removed: (v[m - 1], v[i - 1]),
            added: (v[0], v[i]),
        });
    }
}

fn apply_flip(layer: &BTreeSet<[usize; 3]>, flip: &Flip) -> Option<BTreeSet<[usize; 3]>> {
    let (a, b) = flip.removed;
    let (c, d) = flip.added;
    let old = [sorted3([a, b, c]), sorted3([a, b, d])];
    if !old.iter().all(|t| layer.contains(t)) {
        return None;
    }
    let mut next = layer.clone();
    for t in &old {
        next.remove(t);
    }
    next.insert(sorted3([c, d, a]));
    next.insert(sorted3([c, d, b]));
    Some(next)
}

/// Where a tetrahedron of the output came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Provenance {
    Pyramid { polyhedron: usize, face: usize, apex: usize },
    PillowLayer { pillow: usize, flip: usize },
}

/// A triangle on the boundary of a pillow, seen from a tetrahedron.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct PillowFace {
    pub tet: usize,
    pub face: u8,
    /// Polygon position of each tetrahedron vertex, `None` off the polygon.
    pub positions: [Option<usize>; 4],
}

/// Boundary data of a pillow: the triangles of its bottom and top polygons.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PillowBoundary {
    pub n: usize,
    pub bottom: Vec<PillowFace>,
    pub top: Vec<PillowFace>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pillow {
    /// Index of the decomposition gluing it replaces.
    pub gluing: usize,
    pub n: usize,
    pub bottom_cone: usize,
    pub top_cone: usize,
    pub tetrahedra: Vec<usize>,
    pub boundary: PillowBoundary,
    #[serde(skip)]
    pub layering: LayeredPillow,
}

/// The PPP-cellulation produced by the pipeline, with its triangulation.
#[derive(Clone, Debug)]
pub struct PppCellulation {
    pub decomposition: PolyhedralDecomposition,
    pub cones: Vec<usize>,
    pub pillows: Vec<Pillow>,
    pub provenance: Vec<Provenance>,
    pub triangulation: Triangulation,
}

impl PppCellulation {
    pub fn flat_tetrahedra(&self) -> Vec<usize> {
        self.pillows
            .iter()
            .flat_map(|p| p.tetrahedra.iter().copied())
            .collect()
    }

    /// Quads with angle zero in the natural semi-angle structure: the two
    /// quads of each pillow tetrahedron not facing its diagonals.
    pub fn natural_vertical_quads(&self) -> VerticalQuadSet {
        VerticalQuadSet::from_quads(
            self.flat_tetrahedra()
                .into_iter()
                .flat_map(|t| [QuadType::new(t, 1), QuadType::new(t, 2)]),
        )
    }

    pub fn num_pyramid_tetrahedra(&self) -> usize {
        self.provenance
            .iter()
            .filter(|p| matches!(p, Provenance::Pyramid { .. }))
            .count()
    }
}

/// A face class of the decomposition, with positions taken from side A (the
/// lexicographically smaller `(polyhedron, face)`).
struct FaceClassView {
    gluing: usize,
    a: (usize, usize),
    b: (usize, usize),
    /// Side B's vertex label at each position.
    b_label: Vec<usize>,
}

impl FaceClassView {
    fn new(d: &PolyhedralDecomposition, i: usize) -> Self {
        let g = &d.gluings[i];
        let from_face = &d.polyhedra[g.from.0].faces[g.from.1];
        if g.from <= g.to {
            FaceClassView {
                gluing: i,
                a: g.from,
                b: g.to,
                b_label: g.map.clone(),
            }
        } else {
            let to_face = &d.polyhedra[g.to.0].faces[g.to.1];
            let b_label = to_face
                .iter()
                .map(|&v| from_face[g.map.iter().position(|&m| m == v).expect("bijective")])
                .collect();
            FaceClassView {
                gluing: i,
                a: g.to,
                b: g.from,
                b_label,
            }
        }
    }
}

/// Runs the coning / pillow / layering construction.
pub fn build_pipeline(
    d: &PolyhedralDecomposition,
    cones: &[usize],
) -> Result<PppCellulation, PppError> {
    d.validate()?;
    if cones.len() != d.polyhedra.len() {
        return Err(PppError::ConeCount {
            expected: d.polyhedra.len(),
            got: cones.len(),
        });
    }
    for (p, (&v, poly)) in cones.iter().zip(&d.polyhedra).enumerate() {
        if v >= poly.vertices {
            return Err(PppError::InvalidConeIndex {
                polyhedron: p,
                vertex: v,
            });
        }
    }

    // Face triangulations, in polyhedron labels, and the pillow list.
    let views: Vec<FaceClassView> = (0..d.gluings.len()).map(|i| FaceClassView::new(d, i)).collect();
    let mut face_tris: BTreeMap<(usize, usize), Vec<[usize; 3]>> = BTreeMap::new();
    let mut pillow_specs = vec![];
    for view in &views {
        let a_face = &d.polyhedra[view.a.0].faces[view.a.1];
        let n = a_face.len();
        let cone_a = a_face.iter().position(|&v| v == cones[view.a.0]);
        let cone_b = view.b_label.iter().position(|&v| v == cones[view.b.0]);
        let (tri_a, tri_b) = match (cone_a, cone_b) {
            (Some(x), Some(y)) if cone_triangles(n, x) != cone_triangles(n, y) => {
                pillow_specs.push((view.gluing, y, x));
                (x, y)
            }
            (Some(x), _) => (x, x),
            (None, Some(y)) => (y, y),
            (None, None) => {
                let lowest = (0..n).min_by_key(|&k| a_face[k]).expect("non-empty face");
                (lowest, lowest)
            }
        };
        face_tris.insert(view.a, to_labels(&cone_triangles(n, tri_a), a_face));
        face_tris.insert(view.b, to_labels(&cone_triangles(n, tri_b), &view.b_label));
    }

    // Pyramid tetrahedra: vertex labels within their polyhedron.
    let mut tet_labels: Vec<[usize; 4]> = vec![];
    let mut provenance = vec![];
    for (p, poly) in d.polyhedra.iter().enumerate() {
        let apex = cones[p];
        for (f, face) in poly.faces.iter().enumerate() {
            if face.contains(&apex) {
                continue;
            }
            for tri in &face_tris[&(p, f)] {
                tet_labels.push([apex, tri[0], tri[1], tri[2]]);
                provenance.push(Provenance::Pyramid {
                    polyhedron: p,
                    face: f,
                    apex,
                });
            }
        }
    }
    let polyhedron_of: Vec<usize> = provenance
        .iter()
        .map(|p| match p {
            Provenance::Pyramid { polyhedron, .. } => *polyhedron,
            Provenance::PillowLayer { .. } => unreachable!(),
        })
        .collect();

    let mut faces: Vec<[Option<(usize, Perm4)>; 4]> = vec![[None; 4]; tet_labels.len()];
    let glue = |faces: &mut Vec<[Option<(usize, Perm4)>; 4]>,
                    x: SideTriangle,
                    y: SideTriangle|
     -> Result<(), PppError> {
        let perm = match_faces(x.1, &x.2, y.1, &y.2)
            .ok_or_else(|| PppError::Internal("triangles do not match".into()))?;
        faces[x.0][x.1 as usize] = Some((y.0, perm));
        faces[y.0][perm.apply(x.1) as usize] = Some((x.0, perm.inverse()));
        Ok(())
    };

    // Gluings inside each polyhedron; remember boundary triangles.
    // Keyed by polyhedron and triangle labels; values are (tet, face).
    let mut by_key: BTreeMap<(usize, [usize; 3]), Vec<_>> = BTreeMap::new();
    for (t, labels) in tet_labels.iter().enumerate() {
        for k in 0..4u8 {
            let mut tri = [0; 3];
            let mut j = 0;
            for (i, &l) in labels.iter().enumerate() {
                if i != k as usize {
                    tri[j] = l;
                    j += 1;
                }
            }
            by_key
                .entry((polyhedron_of[t], sorted3(tri)))
                .or_default()
                .push((t, k));
        }
    }
    let label_positions = |t: usize| tet_labels[t].map(Some);
    for entries in by_key.values() {
        match entries.as_slice() {
            [_] => {}
            [x, y] => glue(
                &mut faces,
                (x.0, x.1, label_positions(x.0)),
                (y.0, y.1, label_positions(y.0)),
            )?,
            _ => return Err(PppError::Internal("triangle shared by three tetrahedra".into())),
        }
    }

    // Across each face class, directly or through a pillow.
    let mut pillows = vec![];
    for view in &views {
        let a_face = &d.polyhedra[view.a.0].faces[view.a.1];
        let n = a_face.len();
        let side = |(p, f): (usize, usize), labels: &[usize]| -> Result<Vec<SideTriangle>, PppError> {
            face_tris[&(p, f)]
                .iter()
                .map(|tri| {
                    let entries = &by_key[&(p, sorted3(*tri))];
                    let &[(t, k)] = entries.as_slice() else {
                        return Err(PppError::Internal("boundary triangle is interior".into()));
                    };
                    let pos = tet_labels[t].map(|l| labels.iter().position(|&x| x == l));
                    Ok((t, k, pos))
                })
                .collect()
        };
        let a_side = side(view.a, a_face)?;
        let b_side = side(view.b, &view.b_label)?;
        let tri_of = |e: &SideTriangle| -> [usize; 3] {
            let v: Vec<usize> = (0..4)
                .filter(|&i| i != e.1 as usize)
                .map(|i| e.2[i].expect("on the face"))
                .collect();
            sorted3([v[0], v[1], v[2]])
        };
        let pillow = pillow_specs.iter().find(|s| s.0 == view.gluing);
        let mut exposed: BTreeMap<[usize; 3], SideTriangle> =
            b_side.iter().map(|e| (tri_of(e), *e)).collect();
        if let Some(&(_, bottom, top)) = pillow {
            let layering = layered_bridge(n, bottom, top)?;
            let index = pillows.len();
            let mut tets = vec![];
            for (k, flip) in layering.flips.iter().enumerate() {
                let t = tet_labels.len();
                let pos = flip.tet_positions();
                tet_labels.push(pos);
                faces.push([None; 4]);
                provenance.push(Provenance::PillowLayer { pillow: index, flip: k });
                tets.push(t);
                let p = pos.map(Some);
                for opp in [2u8, 3] {
                    let me = (t, opp, p);
                    let other = exposed
                        .remove(&tri_of(&me))
                        .ok_or_else(|| PppError::Internal("flip face not exposed".into()))?;
                    glue(&mut faces, other, me)?;
                }
                for opp in [0u8, 1] {
                    let me = (t, opp, p);
                    exposed.insert(tri_of(&me), me);
                }
            }
            pillows.push(Pillow {
                gluing: view.gluing,
                n,
                bottom_cone: bottom,
                top_cone: top,
                tetrahedra: tets,
                boundary: PillowBoundary {
                    n,
                    bottom: b_side.iter().map(|e| PillowFace { tet: e.0, face: e.1, positions: e.2 }).collect(),
                    top: a_side.iter().map(|e| PillowFace { tet: e.0, face: e.1, positions: e.2 }).collect(),
                },
                layering,
            });
        }
        for a in &a_side {
            let other = exposed
                .remove(&tri_of(a))
                .ok_or_else(|| PppError::Internal("face triangulations disagree".into()))?;
            glue(&mut faces, other, *a)?;
        }
    }

    let table = GluingTable::from_faces(
        faces
            .into_iter()
            .map(|row| row.map(|g| g.map(|(tet, perm)| crate::triangulation::Gluing { tet, perm })))
            .collect(),
    );
    let triangulation = Triangulation::new(table)?;
    Ok(PppCellulation {
        decomposition: d.clone(),
        cones: cones.to_vec(),
        pillows,
        provenance,
        triangulation,
    })
}

fn to_labels(tris: &BTreeSet<[usize; 3]>, labels: &[usize]) -> Vec<[usize; 3]> {
    tris.iter().map(|t| t.map(|k| labels[k])).collect()
}

/// Permutation carrying face `xf` of one tetrahedron onto face `yf` of
/// another, matching vertices with equal positions.
fn match_faces(xf: u8, xp: &[Option<usize>; 4], yf: u8, yp: &[Option<usize>; 4]) -> Option<Perm4> {
    let mut images = [0u8; 4];
    images[xf as usize] = yf;
    for i in (0..4u8).filter(|&i| i != xf) {
        let p = xp[i as usize]?;
        images[i as usize] = (0..4u8).find(|&j| j != yf && yp[j as usize] == Some(p))?;
    }
    Perm4::new(images)
}

/// Breadth-first spanning tree of the gluing graph from polyhedron 0, as
/// `(gluing, parent, child)`.
pub fn spanning_tree(d: &PolyhedralDecomposition) -> Result<Vec<(usize, usize, usize)>, PppError> {
    let m = d.polyhedra.len();
    let graph = d.gluing_graph();
    let mut tree: Vec<(usize, usize, usize)> = vec![];
    let mut seen = vec![false; m];
    if m > 0 {
        seen[0] = true;
    }
    let mut queue = VecDeque::from([0usize]);
    while let Some(p) = queue.pop_front() {
        for &(g, a, b) in &graph {
            let q = if a == p { b } else if b == p { a } else { continue };
            if !seen[q] {
                seen[q] = true;
                tree.push((g, p, q));
                queue.push_back(q);
            }
        }
    }
    if seen.contains(&false) {
        return Err(PppError::DisconnectedGluingGraph);
    }
    Ok(tree)
}

/// Cone vertices chosen by pruning leaves of a breadth-first spanning tree
/// of the gluing graph: each leaf takes its lowest vertex off the face of
/// its tree edge, and a lone remaining polyhedron takes vertex 0.
pub fn spanning_tree_cones(d: &PolyhedralDecomposition) -> Result<Vec<usize>, PppError> {
    let m = d.polyhedra.len();
    let tree = spanning_tree(d)?;
    let mut cones = vec![usize::MAX; m];
    let mut alive = vec![true; m];
    let mut edges = tree;
    while alive.iter().any(|&a| a) {
        let degree = |p: usize, edges: &[(usize, usize, usize)]| {
            edges.iter().filter(|e| e.1 == p || e.2 == p).count()
        };
        let leaves: Vec<usize> = (0..m).filter(|&p| alive[p] && degree(p, &edges) <= 1).collect();
        for &p in &leaves {
            let poly = &d.polyhedra[p];
            cones[p] = match edges.iter().find(|e| e.1 == p || e.2 == p) {
                None => 0,
                Some(&(g, _, _)) => {
                    let gl = &d.gluings[g];
                    let face = if gl.from.0 == p { gl.from.1 } else { gl.to.1 };
                    (0..poly.vertices)
                        .find(|v| !poly.faces[face].contains(v))
                        .ok_or_else(|| PppError::Internal("face contains every vertex".into()))?
                }
            };
        }
        for &p in &leaves {
            alive[p] = false;
        }
        edges.retain(|e| alive[e.1] && alive[e.2]);
    }
    Ok(cones)
}

/// Multiplicity of arcs around polygon vertex `i` on one side of a pillow;
/// fails unless every triangle at `i` carries the same number.
fn linking_counts(
    x: &NormalVector,
    n: usize,
    side: &[PillowFace],
) -> Result<Vec<Option<Rational>>, PppError> {
    let mut w: Vec<Option<Rational>> = vec![None; n];
    for face in side {
        for v in (0..4u8).filter(|&v| v != face.face) {
            let Some(i) = face.positions[v as usize] else { continue };
            let c = arc_count(x, face.tet, face.face, v);
            match &w[i] {
                None => w[i] = Some(c),
                Some(prev) if *prev == c => {}
                Some(_) => return Err(PppError::NotVertexLinking { vertex: i }),
            }
        }
    }
    Ok(w)
}

/// The alternation `λ` of vertex-linking multiplicities across a pillow,
/// measured at position 0: `w⁺_i = w⁻_i − (−1)^i λ`.
pub fn pillow_lambda(boundary: &PillowBoundary, x: &NormalVector) -> Result<Rational, PppError> {
    let n = boundary.n;
    let below = linking_counts(x, n, &boundary.bottom)?;
    let above = linking_counts(x, n, &boundary.top)?;
    let diff: Vec<Rational> = (0..n)
        .map(|i| match (&below[i], &above[i]) {
            (Some(b), Some(a)) => Ok(b - a),
            _ => Err(PppError::Internal(format!("polygon vertex {i} not on both sides"))),
        })
        .collect::<Result<_, _>>()?;
    let lambda = diff[0].clone();
    for (i, d) in diff.iter().enumerate() {
        let expected = if i % 2 == 0 { lambda.clone() } else { -lambda.clone() };
        if *d != expected || (n % 2 == 1 && !d.is_zero()) {
            return Err(PppError::AlternationFailed { vertex: i });
        }
    }
    Ok(lambda)
}

/// Corner bookkeeping for one layered tetrahedron (vertices 0,1 on the
/// removed diagonal, 2,3 on the added one) carrying a vertical class.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FlipCorners {
    pub lambda: Rational,
    pub residual: Rational,
    /// Change (top minus bottom) of the through-going arc count at each
    /// vertex: `-λ` where a double corner becomes single, `+λ` conversely.
    pub changes: [Rational; 4],
    /// Difference of the two arc counts at each double corner.
    pub double_gaps: [Rational; 4],
}

/// Reads the arc counts of a flip tetrahedron's four faces.
pub fn flip_corners(x: &NormalVector, tet: usize) -> FlipCorners {
    let x1 = x.quad(tet, 1).clone();
    let x2 = x.quad(tet, 2).clone();
    let lambda = x1.clone().min(x2.clone());
    let residual = if x1 > x2 { &x1 - &x2 } else { &x2 - &x1 };
    // Bottom faces are those opposite 2 and 3; top faces opposite 0 and 1.
    let through = |faces: [u8; 2], v: u8| -> (Rational, Rational) {
        let counts: Vec<Rational> = faces
            .iter()
            .filter(|&&f| f != v)
            .map(|&f| arc_count(x, tet, f, v))
            .collect();
        let lo = counts.iter().min().expect("a face at v").clone();
        let hi = counts.iter().max().expect("a face at v").clone();
        (lo.clone(), hi - lo)
    };
    let mut changes: [Rational; 4] = Default::default();
    let mut gaps: [Rational; 4] = Default::default();
    for v in 0..4u8 {
        let (below, gap_b) = through([2, 3], v);
        let (above, gap_a) = through([0, 1], v);
        changes[v as usize] = above - below;
        gaps[v as usize] = if v < 2 { gap_b } else { gap_a };
    }
    FlipCorners {
        lambda,
        residual,
        changes,
        double_gaps: gaps,
    }
}

/// Decides whether the layered pillow between cone triangulations from
/// `bottom` and `top` carries a vertical class with a quad, when its
/// boundary arc patterns are vertex-linking. Solved as an exact LP on the
/// pillow alone.
pub fn pillow_admits_vertical_quads(n: usize, bottom: usize, top: usize) -> Result<bool, PppError> {
    let layering = layered_bridge(n, bottom, top)?;
    let k = layering.flips.len();
    if k == 0 {
        return Ok(false);
    }
    // Triangles never flipped lie on both boundary polygons; each gets
    // three arc-count variables after the tetrahedron coordinates.
    let shared: Vec<[usize; 3]> = layering.layers[0]
        .intersection(layering.layers.last().expect("layers"))
        .copied()
        .collect();
    let nv = 7 * k + 3 * shared.len();
    let mut lp = LpProblem::new(nv, Sense::Feasibility);
    for t in 0..k {
        lp.bounds[quad_index(t, 0)] = crate::exact::Bound::fixed(Rational::zero());
    }
    let mut total = vec![Rational::zero(); nv];
    for t in 0..k {
        total[quad_index(t, 1)] = Rational::one();
        total[quad_index(t, 2)] = Rational::one();
    }
    lp.add(total, Relation::Eq, Rational::one());

    #[derive(Clone, Copy)]
    enum Source {
        Face(usize, u8),
        Shared(usize),
    }
    let triangle = |src: Source| -> [usize; 3] {
        match src {
            Source::Face(t, f) => {
                let pos = layering.flips[t].tet_positions();
                let v: Vec<usize> = (0..4).filter(|&i| i != f as usize).map(|i| pos[i]).collect();
                sorted3([v[0], v[1], v[2]])
            }
            Source::Shared(i) => shared[i],
        }
    };
    // Arc count around position `p` in a triangle, as a row.
    let arc_row = |src: Source, p: usize| -> Vec<Rational> {
        let mut row = vec![Rational::zero(); nv];
        match src {
            Source::Face(t, f) => {
                let pos = layering.flips[t].tet_positions();
                let v = (0..4u8).find(|&v| v != f && pos[v as usize] == p).expect("vertex on face");
                row[tri_index(t, v)] = int(1);
                row[quad_index(t, axis_of(v, f))] = int(1);
            }
            Source::Shared(i) => {
                let j = shared[i].iter().position(|&q| q == p).expect("vertex on triangle");
                row[7 * k + 3 * i + j] = int(1);
            }
        }
        row
    };

    // Internal faces match; record what each boundary polygon shows.
    let mut bottom_faces: Vec<Source> = (0..shared.len()).map(Source::Shared).collect();
    let mut exposed: BTreeMap<[usize; 3], Source> = shared
        .iter()
        .enumerate()
        .map(|(i, tri)| (*tri, Source::Shared(i)))
        .collect();
    for t in 0..k {
        for f in [2u8, 3] {
            let me = Source::Face(t, f);
            let tri = triangle(me);
            match exposed.remove(&tri) {
                Some(other @ Source::Face(..)) => {
                    for &p in &tri {
                        let row = arc_row(me, p)
                            .iter()
                            .zip(arc_row(other, p))
                            .map(|(a, b)| a - b)
                            .collect();
                        lp.add(row, Relation::Eq, Rational::zero());
                    }
                }
                Some(Source::Shared(_)) => {
                    return Err(PppError::Internal("flip covers an unflipped triangle".into()))
                }
                None => bottom_faces.push(me),
            }
        }
        for f in [0u8, 1] {
            exposed.insert(triangle(Source::Face(t, f)), Source::Face(t, f));
        }
    }
    let top_faces: Vec<Source> = exposed.into_values().collect();

    // Vertex-linking boundary: equal counts around each polygon vertex.
    for side in [&bottom_faces, &top_faces] {
        for p in 0..n {
            let rows: Vec<Vec<Rational>> = side
                .iter()
                .filter(|&&src| triangle(src).contains(&p))
                .map(|&src| arc_row(src, p))
                .collect();
            for pair in rows.windows(2) {
                let row = pair[0].iter().zip(&pair[1]).map(|(a, b)| a - b).collect();
                lp.add(row, Relation::Eq, Rational::zero());
            }
        }
    }
    Ok(lp_solve(&lp).status == LpStatus::Optimal)
}

/// All cone-vertex pairs of an `n`-gon whose layered pillow is non-empty.
pub fn pillow_cone_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|b| (0..n).map(move |t| (b, t)))
        .filter(|&(b, t)| cone_triangles(n, b) != cone_triangles(n, t))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube() -> Polyhedron {
        Polyhedron {
            vertices: 8,
            faces: vec![
                vec![0, 3, 2, 1],
                vec![4, 5, 6, 7],
                vec![0, 1, 5, 4],
                vec![1, 2, 6, 5],
                vec![2, 3, 7, 6],
                vec![3, 0, 4, 7],
            ],
            names: None,
            angles: None,
        }
    }

    #[test]
    fn cube_validates() {
        assert_eq!(cube().validate(0), Ok(()));
        assert_eq!(cube().edges().len(), 12);
    }

    fn with_angles(p: &Polyhedron, value: &str) -> Polyhedron {
        let angles = p
            .edges()
            .into_iter()
            .map(|(a, b)| EdgeAngle { edge: [a, b], angle: value.into() })
            .collect();
        Polyhedron { angles: Some(angles), ..p.clone() }
    }

    #[test]
    fn regular_ideal_cube_certificate() {
        assert_eq!(with_angles(&cube(), "1/3").validate(0), Ok(()));
        let wrong = with_angles(&cube(), "1/2").validate(0);
        assert!(matches!(wrong, Err(PppError::BadShapeCertificate { polyhedron: 0, .. })));
        assert!(with_angles(&cube(), "1").validate(0).is_err());
        assert!(with_angles(&cube(), "x").validate(0).is_err());
    }

    #[test]
    fn certificate_must_cover_each_edge_once() {
        let mut p = with_angles(&cube(), "1/3");
        let angles = p.angles.as_mut().unwrap();
        let first = angles.remove(0);
        assert!(p.validate(0).is_err());
        let angles = p.angles.as_mut().unwrap();
        angles.push(first.clone());
        angles.push(EdgeAngle { edge: [first.edge[1], first.edge[0]], ..first });
        assert!(p.validate(0).is_err());
    }

    #[test]
    fn certificate_round_trips_through_json() {
        let p = with_angles(&cube(), "1/3");
        let text = serde_json::to_string(&p).unwrap();
        assert_eq!(serde_json::from_str::<Polyhedron>(&text).unwrap(), p);
        assert!(!serde_json::to_string(&cube()).unwrap().contains("angles"));
    }

    #[test]
    fn coning_a_cube() {
        let c = cone_polyhedron(&cube(), 0).unwrap();
        assert_eq!(c.bases.len(), 3);
        assert_eq!(c.determined.len(), 3);
        assert!(c.determined.iter().all(|(_, t)| t.len() == 2));
    }

    #[test]
    fn coning_a_tetrahedron_needs_one_pyramid() {
        let tet = Polyhedron {
            vertices: 4,
            faces: vec![vec![1, 2, 3], vec![0, 3, 2], vec![0, 1, 3], vec![0, 2, 1]],
            names: None,
            angles: None,
        };
        assert_eq!(tet.validate(0), Ok(()));
        let c = cone_polyhedron(&tet, 0).unwrap();
        assert_eq!(c.bases, vec![0]);
    }

    #[test]
    fn square_bridges() {
        assert_eq!(layered_bridge(4, 0, 1).unwrap().num_tetrahedra(), 1);
        assert!(layered_bridge(4, 0, 2).unwrap().is_empty());
        assert!(layered_bridge(5, 3, 3).unwrap().is_empty());
    }

    #[test]
    fn hexagon_at_distance_three_splits_into_two_squares() {
        let l = layered_bridge(6, 0, 3).unwrap();
        assert_eq!(l.num_tetrahedra(), 2);
    }

    #[test]
    fn adjacent_cones_need_n_minus_three_flips() {
        for n in 4..12 {
            assert_eq!(layered_bridge(n, n - 1, 0).unwrap().num_tetrahedra(), n - 3);
            assert_eq!(layered_bridge(n, 0, n - 1).unwrap().num_tetrahedra(), n - 3);
        }
    }

    #[test]
    fn consecutive_layers_differ_by_one_flip() {
        for n in 3..10 {
            for (b, t) in pillow_cone_pairs(n) {
                let l = layered_bridge(n, b, t).unwrap();
                for pair in l.layers.windows(2) {
                    assert_eq!(pair[0].difference(&pair[1]).count(), 2);
                    assert_eq!(pair[0].len(), n - 2);
                }
            }
        }
    }

    #[test]
    fn lone_cube_cannot_be_glued_to_nothing() {
        let d = PolyhedralDecomposition {
            polyhedra: vec![cube()],
            gluings: vec![],
        };
        assert_eq!(
            d.validate(),
            Err(PppError::FaceUnglued { polyhedron: 0, face: 0 })
        );
    }

    #[test]
    fn only_squares_and_hexagons_carry_quads() {
        for n in 3..=8 {
            let any = pillow_cone_pairs(n)
                .into_iter()
                .any(|(b, t)| pillow_admits_vertical_quads(n, b, t).unwrap());
            assert_eq!(any, n == 4 || n == 6, "n = {n}");
        }
    }
}
