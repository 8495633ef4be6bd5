//! Gluing tables and the combinatorics derived from them: edge, vertex and
//! face classes, orientation, and the quadrilateral types of each tetrahedron.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Vertex pairs of the six edges of a tetrahedron, in lexicographic order.
pub const EDGE_VERTICES: [(u8, u8); 6] = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)];

/// Index of the edge `{a, b}` in [`EDGE_VERTICES`].
pub fn edge_index(a: u8, b: u8) -> usize {
    let (a, b) = if a < b { (a, b) } else { (b, a) };
    match (a, b) {
        (0, 1) => 0,
        (0, 2) => 1,
        (0, 3) => 2,
        (1, 2) => 3,
        (1, 3) => 4,
        (2, 3) => 5,
        _ => panic!("not an edge: {a}{b}"),
    }
}

/// Quadrilateral axis of the opposite-edge pair containing `{a, b}`:
/// `0 ↔ {01,23}`, `1 ↔ {02,13}`, `2 ↔ {03,12}`.
///
/// The quad with this axis misses both edges of the pair; it separates
/// `{a, b}` from the other two vertices.
pub fn axis_of(a: u8, b: u8) -> usize {
    debug_assert!(a != b && a < 4 && b < 4);
    if a + b == 3 {
        2
    } else if (a ^ b) == 1 {
        0
    } else {
        1
    }
}

/// A permutation of `{0,1,2,3}`, stored as the image of each label.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm4([u8; 4]);

impl Perm4 {
    pub const IDENTITY: Perm4 = Perm4([0, 1, 2, 3]);

    pub fn new(images: [u8; 4]) -> Option<Self> {
        let mut seen = [false; 4];
        for &i in &images {
            if i > 3 || seen[i as usize] {
                return None;
            }
            seen[i as usize] = true;
        }
        Some(Perm4(images))
    }

    /// Builds the permutation sending `from[k] ↦ to[k]` for three labels; the
    /// fourth image is forced.
    pub fn from_partial(from: [u8; 3], to: [u8; 3]) -> Option<Self> {
        let mut images = [4u8; 4];
        for k in 0..3 {
            if from[k] > 3 || images[from[k] as usize] != 4 {
                return None;
            }
            images[from[k] as usize] = to[k];
        }
        let missing_from = (0..4).find(|&i| images[i] == 4)?;
        let missing_to = (0..4u8).find(|i| !to.contains(i))?;
        images[missing_from] = missing_to;
        Perm4::new(images)
    }

    #[inline]
    pub fn apply(self, i: u8) -> u8 {
        self.0[i as usize]
    }

    pub fn images(self) -> [u8; 4] {
        self.0
    }

    pub fn inverse(self) -> Self {
        let mut inv = [0u8; 4];
        for i in 0..4u8 {
            inv[self.0[i as usize] as usize] = i;
        }
        Perm4(inv)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(self, other: Perm4) -> Self {
        Perm4([0, 1, 2, 3].map(|i| self.apply(other.apply(i))))
    }

    /// `+1` for even permutations, `-1` for odd ones.
    pub fn sign(self) -> i8 {
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if self.0[i] > self.0[j] {
                    inversions += 1;
                }
            }
        }
        if inversions % 2 == 0 {
            1
        } else {
            -1
        }
    }
}

impl fmt::Debug for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Perm4({self})")
    }
}

impl fmt::Display for Perm4 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in self.0 {
            write!(f, "{i}")?;
        }
        Ok(())
    }
}

impl FromStr for Perm4 {
    type Err = TriangulationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || TriangulationError::InvalidPermutation(s.to_string());
        let digits: Vec<u8> = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as u8))
            .collect::<Option<_>>()
            .ok_or_else(bad)?;
        let images: [u8; 4] = digits.try_into().map_err(|_| bad())?;
        Perm4::new(images).ok_or_else(bad)
    }
}

/// Face `face` of one tetrahedron glued to tetrahedron `tet`; `perm` maps the
/// vertex labels of the source tetrahedron to those of `tet`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Gluing {
    pub tet: usize,
    pub perm: Perm4,
}

/// For each tetrahedron and each face (face `f` is opposite vertex `f`), the
/// gluing of that face, if any.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct GluingTable {
    faces: Vec<[Option<Gluing>; 4]>,
}

impl GluingTable {
    pub fn new(n: usize) -> Self {
        GluingTable {
            faces: vec![[None; 4]; n],
        }
    }

    pub fn from_faces(faces: Vec<[Option<Gluing>; 4]>) -> Self {
        GluingTable { faces }
    }

    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn get(&self, tet: usize, face: u8) -> Option<Gluing> {
        self.faces[tet][face as usize]
    }

    /// Glues `face` of `tet` by `perm`, and records the inverse gluing on the
    /// other side.
    pub fn join(&mut self, tet: usize, face: u8, other: usize, perm: Perm4) {
        self.faces[tet][face as usize] = Some(Gluing { tet: other, perm });
        self.faces[other][perm.apply(face) as usize] = Some(Gluing {
            tet,
            perm: perm.inverse(),
        });
    }

    /// Sets a single entry without touching its partner.
    pub fn set(&mut self, tet: usize, face: u8, gluing: Option<Gluing>) {
        self.faces[tet][face as usize] = gluing;
    }

    /// Reads a table written in "face notation": each row lists, for the
    /// faces `012, 013, 023, 123` in that order, the neighbouring tetrahedron
    /// and the three image labels of the face's vertices, e.g. `(1, "312")`.
    pub fn from_face_notation(rows: &[[(usize, &str); 4]]) -> Result<Self, TriangulationError> {
        const FACE_VERTS: [[u8; 3]; 4] = [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]];
        let mut table = GluingTable::new(rows.len());
        for (t, row) in rows.iter().enumerate() {
            for (col, &(nbr, images)) in row.iter().enumerate() {
                let bad = || TriangulationError::InvalidPermutation(images.to_string());
                let to: Vec<u8> = images
                    .chars()
                    .map(|c| c.to_digit(10).map(|d| d as u8))
                    .collect::<Option<_>>()
                    .ok_or_else(bad)?;
                let to: [u8; 3] = to.try_into().map_err(|_| bad())?;
                let perm = Perm4::from_partial(FACE_VERTS[col], to).ok_or_else(bad)?;
                let face = 3 - col as u8;
                table.faces[t][face as usize] = Some(Gluing { tet: nbr, perm });
            }
        }
        Ok(table)
    }

    pub fn from_json(text: &str) -> Result<Self, TriangulationError> {
        let file: TriangulationFile =
            serde_json::from_str(text).map_err(|e| TriangulationError::Parse(e.to_string()))?;
        file.try_into()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&TriangulationFile::from(self)).expect("serializable")
    }
}

/// On-disk layout of a triangulation.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TriangulationFile {
    pub tetrahedra: Vec<TetrahedronEntry>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TetrahedronEntry {
    pub neighbors: [Option<usize>; 4],
    pub gluings: [Option<String>; 4],
}

impl From<&GluingTable> for TriangulationFile {
    fn from(table: &GluingTable) -> Self {
        let tetrahedra = table
            .faces
            .iter()
            .map(|faces| TetrahedronEntry {
                neighbors: faces.map(|g| g.map(|g| g.tet)),
                gluings: faces.map(|g| g.map(|g| g.perm.to_string())),
            })
            .collect();
        TriangulationFile { tetrahedra }
    }
}

impl TryFrom<TriangulationFile> for GluingTable {
    type Error = TriangulationError;

    fn try_from(file: TriangulationFile) -> Result<Self, Self::Error> {
        let mut faces = Vec::with_capacity(file.tetrahedra.len());
        for (t, entry) in file.tetrahedra.iter().enumerate() {
            let mut row = [None; 4];
            for f in 0..4 {
                row[f] = match (&entry.neighbors[f], &entry.gluings[f]) {
                    (Some(nbr), Some(p)) => Some(Gluing {
                        tet: *nbr,
                        perm: p.parse()?,
                    }),
                    (None, None) => None,
                    _ => {
                        return Err(TriangulationError::Parse(format!(
                            "tetrahedron {t} face {f}: neighbor and gluing must both be present"
                        )))
                    }
                };
            }
            faces.push(row);
        }
        Ok(GluingTable { faces })
    }
}

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum TriangulationError {
    #[error("cannot parse triangulation: {0}")]
    Parse(String),
    #[error("invalid permutation {0:?}")]
    InvalidPermutation(String),
    #[error("tetrahedron {tet} face {face} refers to missing tetrahedron {target}")]
    TetrahedronOutOfRange { tet: usize, face: u8, target: usize },
    #[error("tetrahedron {tet} face {face} is not glued")]
    UngluedFace { tet: usize, face: u8 },
    #[error("gluing of tetrahedron {tet} face {face} is not matched by its inverse")]
    NonInvolutiveGluing { tet: usize, face: u8 },
    #[error("tetrahedron {tet} face {face} is glued to itself pointwise")]
    FaceFixedPointwise { tet: usize, face: u8 },
    #[error("no consistent orientation: conflict at tetrahedron {tet} face {face}")]
    NonOrientable { tet: usize, face: u8 },
    #[error("edge {a}{b} of tetrahedron {tet} is identified with itself in reverse")]
    EdgeReversed { tet: usize, a: u8, b: u8 },
    #[error("link of vertex class {class} (containing tetrahedron {tet} vertex {vertex}) has Euler characteristic {euler}, not a torus")]
    VertexLinkNotTorus {
        class: usize,
        tet: usize,
        vertex: u8,
        euler: i64,
    },
    #[error("triangulation has no tetrahedra")]
    Empty,
    #[error("edge index {0} out of range")]
    EdgeOutOfRange(usize),
}

/// One normal quadrilateral type: tetrahedron plus axis (`0 ↔ {01,23}`,
/// `1 ↔ {02,13}`, `2 ↔ {03,12}`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct QuadType {
    pub tet: usize,
    pub axis: usize,
}

impl QuadType {
    pub fn new(tet: usize, axis: usize) -> Self {
        debug_assert!(axis < 3);
        QuadType { tet, axis }
    }

    /// Position of this quad among the `3n` quad coordinates.
    pub fn index(self) -> usize {
        3 * self.tet + self.axis
    }
}

/// One appearance of an edge inside a tetrahedron, as seen while walking
/// around the edge.
///
/// `verts[0] → verts[1]` is the edge (directed consistently along the
/// orbit); the walk leaves this tetrahedron through the face opposite
/// `verts[3]` and entered through the face opposite `verts[2]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EdgeIncidence {
    pub tet: usize,
    pub verts: [u8; 4],
}

impl EdgeIncidence {
    pub fn endpoints(&self) -> (u8, u8) {
        (self.verts[0], self.verts[1])
    }

    /// The quad type facing the edge at this incidence.
    pub fn quad(&self) -> QuadType {
        QuadType::new(self.tet, axis_of(self.verts[0], self.verts[1]))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeClass {
    pub incidences: Vec<EdgeIncidence>,
    /// Vertex classes at the `verts[0]` and `verts[1]` ends.
    pub ends: [usize; 2],
}

impl EdgeClass {
    pub fn degree(&self) -> usize {
        self.incidences.len()
    }

    pub fn quad_sequence(&self) -> Vec<QuadType> {
        self.incidences.iter().map(EdgeIncidence::quad).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexClass {
    /// `(tet, vertex)` corners in this class, sorted.
    pub corners: Vec<(usize, u8)>,
}

/// A pair of glued faces; `first` is the lexicographically smaller side.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FaceClass {
    pub first: (usize, u8),
    pub second: (usize, u8),
    /// Vertex map from `first`'s tetrahedron to `second`'s.
    pub perm: Perm4,
}

/// A validated ideal triangulation with its derived combinatorics.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    gluing: GluingTable,
    edges: Vec<EdgeClass>,
    edge_of: Vec<[usize; 6]>,
    vertices: Vec<VertexClass>,
    vertex_of: Vec<[usize; 4]>,
    faces: Vec<FaceClass>,
    face_of: Vec<[usize; 4]>,
    orientation: Vec<i8>,
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.0[root] != root {
            root = self.0[root];
        }
        let mut cur = x;
        while self.0[cur] != root {
            let next = self.0[cur];
            self.0[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.0[hi] = lo;
        }
    }
}

/// Validates `gluing` and derives edge, vertex and face classes.
pub fn build_triangulation(gluing: GluingTable) -> Result<Triangulation, TriangulationError> {
    Triangulation::new(gluing)
}

impl Triangulation {
    pub fn new(gluing: GluingTable) -> Result<Self, TriangulationError> {
        let n = gluing.len();
        if n == 0 {
            return Err(TriangulationError::Empty);
        }
        check_gluings(&gluing)?;
        let orientation = orient(&gluing)?;
        let glued = |t: usize, f: u8| gluing.get(t, f).expect("checked");

        // Faces.
        let mut face_of = vec![[usize::MAX; 4]; n];
        let mut faces = Vec::with_capacity(2 * n);
        for t in 0..n {
            for f in 0..4u8 {
                if face_of[t][f as usize] != usize::MAX {
                    continue;
                }
                let g = glued(t, f);
                let other = (g.tet, g.perm.apply(f));
                face_of[t][f as usize] = faces.len();
                face_of[other.0][other.1 as usize] = faces.len();
                faces.push(FaceClass {
                    first: (t, f),
                    second: other,
                    perm: g.perm,
                });
            }
        }

        // Vertices.
        let mut uf = UnionFind::new(4 * n);
        for t in 0..n {
            for f in 0..4u8 {
                let g = glued(t, f);
                for v in (0..4u8).filter(|&v| v != f) {
                    uf.union(4 * t + v as usize, 4 * g.tet + g.perm.apply(v) as usize);
                }
            }
        }
        let mut vertex_of = vec![[usize::MAX; 4]; n];
        let mut vertices: Vec<VertexClass> = Vec::new();
        let mut root_class = vec![usize::MAX; 4 * n];
        for t in 0..n {
            for v in 0..4u8 {
                let root = uf.find(4 * t + v as usize);
                if root_class[root] == usize::MAX {
                    root_class[root] = vertices.len();
                    vertices.push(VertexClass { corners: vec![] });
                }
                let c = root_class[root];
                vertex_of[t][v as usize] = c;
                vertices[c].corners.push((t, v));
            }
        }

        // Edges, by walking around each edge.
        let mut edge_of = vec![[usize::MAX; 6]; n];
        let mut edges: Vec<EdgeClass> = Vec::new();
        for t in 0..n {
            for (k, &(a, b)) in EDGE_VERTICES.iter().enumerate() {
                if edge_of[t][k] != usize::MAX {
                    continue;
                }
                let (c, d) = other_two(a, b);
                let start = EdgeIncidence {
                    tet: t,
                    verts: [a, b, d, c],
                };
                let class = edges.len();
                let mut incidences = Vec::new();
                let mut cur = start;
                loop {
                    let slot = &mut edge_of[cur.tet][edge_index(cur.verts[0], cur.verts[1])];
                    if *slot == class {
                        return Err(TriangulationError::EdgeReversed {
                            tet: cur.tet,
                            a: cur.verts[0],
                            b: cur.verts[1],
                        });
                    }
                    *slot = class;
                    incidences.push(cur);
                    let g = glued(cur.tet, cur.verts[3]);
                    let p = g.perm;
                    cur = EdgeIncidence {
                        tet: g.tet,
                        verts: [
                            p.apply(cur.verts[0]),
                            p.apply(cur.verts[1]),
                            p.apply(cur.verts[3]),
                            p.apply(cur.verts[2]),
                        ],
                    };
                    if cur == start {
                        break;
                    }
                }
                let ends = [vertex_of[t][a as usize], vertex_of[t][b as usize]];
                edges.push(EdgeClass { incidences, ends });
            }
        }

        // Each vertex link must be a torus: V - E + F = 0 with F corners,
        // E = 3F/2 and V the number of edge ends at the class.
        let mut link_vertices = vec![0i64; vertices.len()];
        for e in &edges {
            link_vertices[e.ends[0]] += 1;
            link_vertices[e.ends[1]] += 1;
        }
        for (c, class) in vertices.iter().enumerate() {
            let f = class.corners.len() as i64;
            let euler = link_vertices[c] - 3 * f / 2 + f;
            if euler != 0 {
                let (tet, vertex) = class.corners[0];
                return Err(TriangulationError::VertexLinkNotTorus {
                    class: c,
                    tet,
                    vertex,
                    euler,
                });
            }
        }

        Ok(Triangulation {
            gluing,
            edges,
            edge_of,
            vertices,
            vertex_of,
            faces,
            face_of,
            orientation,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, TriangulationError> {
        Triangulation::new(GluingTable::from_json(text)?)
    }

    pub fn to_json(&self) -> String {
        self.gluing.to_json()
    }

    pub fn gluing(&self) -> &GluingTable {
        &self.gluing
    }

    pub fn num_tetrahedra(&self) -> usize {
        self.gluing.len()
    }

    pub fn edges(&self) -> &[EdgeClass] {
        &self.edges
    }

    pub fn vertices(&self) -> &[VertexClass] {
        &self.vertices
    }

    pub fn faces(&self) -> &[FaceClass] {
        &self.faces
    }

    pub fn num_cusps(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_degrees(&self) -> Vec<usize> {
        self.edges.iter().map(EdgeClass::degree).collect()
    }

    /// Edge class of edge `{a, b}` of tetrahedron `tet`.
    pub fn edge_class(&self, tet: usize, a: u8, b: u8) -> usize {
        self.edge_of[tet][edge_index(a, b)]
    }

    pub fn vertex_class(&self, tet: usize, v: u8) -> usize {
        self.vertex_of[tet][v as usize]
    }

    pub fn face_class(&self, tet: usize, face: u8) -> usize {
        self.face_of[tet][face as usize]
    }

    /// `+1` or `-1` per tetrahedron; every face pairing reverses orientation
    /// relative to these signs.
    pub fn orientation(&self, tet: usize) -> i8 {
        self.orientation[tet]
    }

    pub fn neighbor(&self, tet: usize, face: u8) -> Gluing {
        self.gluing.get(tet, face).expect("validated")
    }

    pub fn quad_types(&self) -> impl Iterator<Item = QuadType> {
        let n = self.num_tetrahedra();
        (0..n).flat_map(|t| (0..3).map(move |a| QuadType::new(t, a)))
    }

    /// The quad types facing edge `e`, canonicalized to the lexicographically
    /// least rotation or reflection of the cyclic sequence.
    pub fn quad_sequence(&self, e: usize) -> Result<Vec<QuadType>, TriangulationError> {
        let class = self.edges.get(e).ok_or(TriangulationError::EdgeOutOfRange(e))?;
        Ok(canonical_cycle(&class.quad_sequence()))
    }
}

fn other_two(a: u8, b: u8) -> (u8, u8) {
    let mut rest = (0..4u8).filter(|&v| v != a && v != b);
    (rest.next().unwrap(), rest.next().unwrap())
}

fn check_gluings(gluing: &GluingTable) -> Result<(), TriangulationError> {
    let n = gluing.len();
    for t in 0..n {
        for f in 0..4u8 {
            if gluing.get(t, f).is_none() {
                return Err(TriangulationError::UngluedFace { tet: t, face: f });
            }
        }
    }
    for t in 0..n {
        for f in 0..4u8 {
            let g = gluing.get(t, f).expect("checked above");
            if g.tet >= n {
                return Err(TriangulationError::TetrahedronOutOfRange {
                    tet: t,
                    face: f,
                    target: g.tet,
                });
            }
            let back_face = g.perm.apply(f);
            if g.tet == t && back_face == f {
                let fixed = (0..4u8).filter(|&v| v != f).all(|v| g.perm.apply(v) == v);
                if fixed {
                    return Err(TriangulationError::FaceFixedPointwise { tet: t, face: f });
                }
            }
            match gluing.get(g.tet, back_face) {
                Some(back) if back.tet == t && back.perm == g.perm.inverse() => {}
                _ => return Err(TriangulationError::NonInvolutiveGluing { tet: t, face: f }),
            }
        }
    }
    Ok(())
}

fn orient(gluing: &GluingTable) -> Result<Vec<i8>, TriangulationError> {
    let n = gluing.len();
    let mut sign = vec![0i8; n];
    for root in 0..n {
        if sign[root] != 0 {
            continue;
        }
        sign[root] = 1;
        let mut stack = vec![root];
        while let Some(t) = stack.pop() {
            for f in 0..4u8 {
                let g = gluing.get(t, f).expect("checked");
                let want = -g.perm.sign() * sign[t];
                if sign[g.tet] == 0 {
                    sign[g.tet] = want;
                    stack.push(g.tet);
                } else if sign[g.tet] != want {
                    return Err(TriangulationError::NonOrientable { tet: t, face: f });
                }
            }
        }
    }
    Ok(sign)
}

/// Lexicographically least rotation of `seq` or of its reversal.
pub fn canonical_cycle<T: Ord + Clone>(seq: &[T]) -> Vec<T> {
    let mut best: Option<Vec<T>> = None;
    let mut consider = |candidate: Vec<T>| {
        if best.as_ref().is_none_or(|b| candidate < *b) {
            best = Some(candidate);
        }
    };
    let k = seq.len();
    let reversed: Vec<T> = seq.iter().rev().cloned().collect();
    for base in [seq.to_vec(), reversed] {
        for r in 0..k.max(1) {
            let rotated: Vec<T> = (0..k).map(|i| base[(i + r) % k].clone()).collect();
            consider(rotated);
        }
    }
    best.unwrap_or_default()
}
