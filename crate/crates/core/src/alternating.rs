//! Reduced alternating link diagrams: flattening a PD code to its 4-valent
//! projection graph, the diagram hypotheses, the two-polyhedron
//! decomposition of the complement and the resulting pillow-free
//! triangulation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_traits::{One, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::exact::{int, Rational};
use crate::ppp::{build_pipeline, FaceGluing, PolyhedralDecomposition, Polyhedron, PppCellulation, PppError};

#[derive(Clone, Debug, Error, PartialEq)]
pub enum LinkError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("diagram has no crossings")]
    Empty,
    #[error("arc {label} appears {count} times")]
    ArcCount { label: i64, count: usize },
    #[error("diagram is disconnected")]
    Disconnected,
    #[error("arc {label} does not alternate between over and under")]
    NotAlternating { label: i64 },
    #[error("rotation system is not planar (euler characteristic {euler})")]
    NonPlanar { euler: i64 },
    #[error("arc {label} has the same region on both sides")]
    Nugatory { label: i64 },
    #[error("hypothesis failed: {0}")]
    HypothesisFailed(String),
    #[error("{count} pillows appeared for every admissible cone pair")]
    PillowUnexpected { count: usize },
    #[error(transparent)]
    Ppp(#[from] PppError),
}

/// A link diagram as a PD code: each crossing lists its four arc labels
/// counterclockwise, starting from the incoming under-strand.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LinkDiagram {
    pub crossings: Vec<[i64; 4]>,
}

impl LinkDiagram {
    pub fn new(crossings: Vec<[i64; 4]>) -> Result<Self, LinkError> {
        let d = LinkDiagram { crossings };
        d.check()?;
        Ok(d)
    }

    pub fn from_json(text: &str) -> Result<Self, LinkError> {
        let crossings: Vec<[i64; 4]> =
            serde_json::from_str(text).map_err(|e| LinkError::Parse(e.to_string()))?;
        LinkDiagram::new(crossings)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.crossings).expect("serializable")
    }

    pub fn num_crossings(&self) -> usize {
        self.crossings.len()
    }

    /// The two slots `(crossing, position)` holding each arc label.
    fn arc_ends(&self) -> Result<BTreeMap<i64, Vec<(usize, u8)>>, LinkError> {
        let mut ends: BTreeMap<i64, Vec<(usize, u8)>> = BTreeMap::new();
        for (c, x) in self.crossings.iter().enumerate() {
            for (j, &label) in x.iter().enumerate() {
                ends.entry(label).or_default().push((c, j as u8));
            }
        }
        if let Some((&label, v)) = ends.iter().find(|(_, v)| v.len() != 2) {
            return Err(LinkError::ArcCount { label, count: v.len() });
        }
        Ok(ends)
    }

    fn check(&self) -> Result<(), LinkError> {
        if self.crossings.is_empty() {
            return Err(LinkError::Empty);
        }
        let ends = self.arc_ends()?;
        // Under positions are 0 and 2, over positions 1 and 3.
        for (&label, v) in &ends {
            if v[0].1 % 2 == v[1].1 % 2 {
                return Err(LinkError::NotAlternating { label });
            }
        }
        let n = self.crossings.len();
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        while let Some(c) = queue.pop_front() {
            for &label in &self.crossings[c] {
                for &(d, _) in &ends[&label] {
                    if !seen[d] {
                        seen[d] = true;
                        queue.push_back(d);
                    }
                }
            }
        }
        if seen.contains(&false) {
            return Err(LinkError::Disconnected);
        }
        Ok(())
    }

    /// Number of link components, following each strand through crossings.
    pub fn num_components(&self) -> usize {
        let ends = self.arc_ends().expect("validated diagram");
        let mut seen: BTreeSet<i64> = BTreeSet::new();
        let mut count = 0;
        for &start in ends.keys() {
            if seen.contains(&start) {
                continue;
            }
            count += 1;
            let mut label = start;
            let mut from = ends[&label][0];
            while seen.insert(label) {
                let to = ends[&label].iter().copied().find(|&e| e != from).unwrap_or(from);
                let next = (to.0, (to.1 + 2) % 4);
                label = self.crossings[next.0][next.1 as usize];
                from = next;
            }
        }
        count
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Colour {
    White,
    Black,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlatEdge {
    pub label: i64,
    pub ends: [(usize, u8); 2],
}

/// A complementary region, traversed counterclockwise: edge `edges[k]` runs
/// from `vertices[k]` to `vertices[k + 1]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Region {
    pub vertices: Vec<usize>,
    pub edges: Vec<usize>,
}

impl Region {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// The 4-valent projection graph with its regions and checkerboard colouring.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlatGraph {
    pub num_vertices: usize,
    pub edges: Vec<FlatEdge>,
    pub faces: Vec<Region>,
    pub colours: Vec<Colour>,
    /// The two regions on either side of each edge.
    pub edge_faces: Vec<[usize; 2]>,
}

impl FlatGraph {
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices as i64 - self.edges.len() as i64 + self.faces.len() as i64
    }

    pub fn faces_at(&self, v: usize) -> BTreeSet<usize> {
        (0..self.faces.len())
            .filter(|&f| self.faces[f].vertices.contains(&v))
            .collect()
    }

    /// Dual edges `(edge, other face)` leaving region `f`.
    fn dual_neighbours(&self, f: usize) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.faces[f].edges.iter().map(move |&e| {
            let [a, b] = self.edge_faces[e];
            (e, if a == f { b } else { a })
        })
    }

    /// Splits the vertices by the closed dual curve crossing `cut` once
    /// each, returning the size of each side.
    fn sides(&self, cut: &BTreeSet<usize>) -> Option<[usize; 2]> {
        let n = self.num_vertices;
        let mut side: Vec<Option<bool>> = vec![None; n];
        let mut counts = [0; 2];
        for s in 0..n {
            if side[s].is_some() {
                continue;
            }
            // Components are tied together by uncut edges; cut edges switch side.
            side[s] = Some(false);
            counts[0] += 1;
            let mut queue = VecDeque::from([s]);
            while let Some(v) = queue.pop_front() {
                let here = side[v].expect("visited");
                for (e, edge) in self.edges.iter().enumerate() {
                    let [(a, _), (b, _)] = edge.ends;
                    let w = if a == v {
                        b
                    } else if b == v {
                        a
                    } else {
                        continue;
                    };
                    let want = here ^ cut.contains(&e);
                    match side[w] {
                        None => {
                            side[w] = Some(want);
                            counts[want as usize] += 1;
                            queue.push_back(w);
                        }
                        Some(got) if got != want => return None,
                        Some(_) => {}
                    }
                }
            }
        }
        Some(counts)
    }

    /// Every simple cycle of four regions with four distinct crossed edges,
    /// as `(regions, edges)`, each listed once up to rotation and reversal.
    pub fn dual_four_cycles(&self) -> Vec<([usize; 4], [usize; 4])> {
        let mut out = vec![];
        let mut seen = BTreeSet::new();
        for f0 in 0..self.faces.len() {
            for (e0, f1) in self.dual_neighbours(f0) {
                for (e1, f2) in self.dual_neighbours(f1) {
                    for (e2, f3) in self.dual_neighbours(f2) {
                        for (e3, back) in self.dual_neighbours(f3) {
                            let fs = [f0, f1, f2, f3];
                            let es = [e0, e1, e2, e3];
                            if back != f0
                                || fs.iter().collect::<BTreeSet<_>>().len() != 4
                                || es.iter().collect::<BTreeSet<_>>().len() != 4
                                || fs.iter().any(|&f| f < f0)
                            {
                                continue;
                            }
                            let key: BTreeSet<usize> = es.into_iter().collect();
                            if seen.insert(key) {
                                out.push((fs, es));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

pub fn flatten(d: &LinkDiagram) -> Result<FlatGraph, LinkError> {
    let ends = d.arc_ends()?;
    let n = d.num_crossings();
    let mut edges = vec![];
    let mut edge_of = vec![[usize::MAX; 4]; n];
    for (&label, v) in &ends {
        for &(c, j) in v {
            edge_of[c][j as usize] = edges.len();
        }
        edges.push(FlatEdge {
            label,
            ends: [v[0], v[1]],
        });
    }
    let other_end = |(c, j): (usize, u8)| {
        let e = &edges[edge_of[c][j as usize]];
        if e.ends[0] == (c, j) {
            e.ends[1]
        } else {
            e.ends[0]
        }
    };

    // Leave along a dart, arrive at the far end, turn to the clockwise
    // neighbour: the region stays on the left.
    let mut face_of = vec![[usize::MAX; 4]; n];
    let mut faces = vec![];
    for c in 0..n {
        for j in 0..4u8 {
            if face_of[c][j as usize] != usize::MAX {
                continue;
            }
            let mut region = Region {
                vertices: vec![],
                edges: vec![],
            };
            let mut dart = (c, j);
            while face_of[dart.0][dart.1 as usize] == usize::MAX {
                face_of[dart.0][dart.1 as usize] = faces.len();
                region.vertices.push(dart.0);
                region.edges.push(edge_of[dart.0][dart.1 as usize]);
                let (c2, j2) = other_end(dart);
                dart = (c2, (j2 + 3) % 4);
            }
            faces.push(region);
        }
    }

    let euler = n as i64 - edges.len() as i64 + faces.len() as i64;
    if euler != 2 {
        return Err(LinkError::NonPlanar { euler });
    }

    let edge_faces: Vec<[usize; 2]> = edges
        .iter()
        .map(|e| {
            let [(a, i), (b, j)] = e.ends;
            [face_of[a][i as usize], face_of[b][j as usize]]
        })
        .collect();
    if let Some(e) = (0..edges.len()).find(|&e| edge_faces[e][0] == edge_faces[e][1]) {
        return Err(LinkError::Nugatory { label: edges[e].label });
    }

    // The first traced region is white.
    let mut colours: Vec<Option<Colour>> = vec![None; faces.len()];
    colours[0] = Some(Colour::White);
    let mut queue = VecDeque::from([0]);
    while let Some(f) = queue.pop_front() {
        let opposite = match colours[f] {
            Some(Colour::White) => Colour::Black,
            _ => Colour::White,
        };
        for &e in &faces[f].edges {
            let [a, b] = edge_faces[e];
            let g = if a == f { b } else { a };
            match colours[g] {
                None => {
                    colours[g] = Some(opposite);
                    queue.push_back(g);
                }
                Some(c) if c != opposite => return Err(LinkError::NonPlanar { euler }),
                Some(_) => {}
            }
        }
    }

    Ok(FlatGraph {
        num_vertices: n,
        edges,
        faces,
        colours: colours.into_iter().map(|c| c.expect("connected dual")).collect(),
        edge_faces,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Hypotheses {
    pub no_bigons: bool,
    pub four_curve_ok: bool,
    pub distant_pair: Option<(usize, usize)>,
}

impl Hypotheses {
    pub fn all_hold(&self) -> bool {
        self.no_bigons && self.four_curve_ok && self.distant_pair.is_some()
    }
}

/// Vertex pairs `(v, w)`, `v < w`, that share no region, in lexicographic order.
pub fn distant_pairs(g: &FlatGraph) -> Vec<(usize, usize)> {
    let at: Vec<BTreeSet<usize>> = (0..g.num_vertices).map(|v| g.faces_at(v)).collect();
    (0..g.num_vertices)
        .flat_map(|v| (v + 1..g.num_vertices).map(move |w| (v, w)))
        .filter(|&(v, w)| at[v].is_disjoint(&at[w]))
        .collect()
}

/// Regions with fewer than three sides count as bigons.
pub fn check_hypotheses(g: &FlatGraph) -> Hypotheses {
    let no_bigons = g.faces.iter().all(|f| f.len() >= 3);
    let four_curve_ok = g.dual_four_cycles().iter().all(|(_, es)| {
        let cut: BTreeSet<usize> = es.iter().copied().collect();
        matches!(g.sides(&cut), Some(counts) if counts.contains(&1))
    });
    Hypotheses {
        no_bigons,
        four_curve_ok,
        distant_pair: distant_pairs(g).first().copied(),
    }
}

/// The two polyhedra: both carry the projection graph on their boundary,
/// the second with reversed orientation. Region `f` of the first is glued to
/// region `f` of the second after a one-click rotation whose direction is
/// set by the region's colour.
pub fn two_polyhedra(g: &FlatGraph) -> Result<PolyhedralDecomposition, LinkError> {
    if !check_hypotheses(g).no_bigons {
        return Err(LinkError::HypothesisFailed("diagram has bigons".into()));
    }
    let upper = Polyhedron {
        vertices: g.num_vertices,
        faces: g.faces.iter().map(|f| f.vertices.clone()).collect(),
        names: None,
        angles: None,
    };
    let lower = Polyhedron {
        vertices: g.num_vertices,
        faces: upper
            .faces
            .iter()
            .map(|f| f.iter().rev().copied().collect())
            .collect(),
        names: None,
        angles: None,
    };
    for white_step in [1, -1] {
        let gluings = g
            .faces
            .iter()
            .enumerate()
            .map(|(f, region)| {
                let m = region.len() as i64;
                let step = if g.colours[f] == Colour::White { white_step } else { -white_step };
                FaceGluing {
                    from: (0, f),
                    to: (1, f),
                    map: (0..m)
                        .map(|k| region.vertices[(k + step).rem_euclid(m) as usize])
                        .collect(),
                }
            })
            .collect();
        let d = PolyhedralDecomposition {
            polyhedra: vec![upper.clone(), lower.clone()],
            gluings,
        };
        d.validate()?;
        if d.edge_classes().iter().all(|c| c.len() == 4) {
            return Ok(d);
        }
    }
    Err(LinkError::HypothesisFailed(
        "no rotation convention gives edge valence four".into(),
    ))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RivinReport {
    pub angles_in_range: bool,
    pub vertex_sums: bool,
    pub dual_cycles: bool,
}

impl RivinReport {
    pub fn holds(&self) -> bool {
        self.angles_in_range && self.vertex_sums && self.dual_cycles
    }
}

/// Rivin's conditions for exterior angles (in units of π) on the edges of
/// a polyhedron, keyed by sorted vertex pairs. A missing edge fails the
/// range condition.
pub fn rivin_conditions(p: &Polyhedron, angles: &BTreeMap<(usize, usize), Rational>) -> RivinReport {
    let edges = p.edges();
    let one = Rational::one();
    let angles_in_range = edges
        .iter()
        .all(|e| matches!(angles.get(e), Some(a) if *a > Rational::zero() && *a < one));
    if !angles_in_range {
        return RivinReport {
            angles_in_range,
            vertex_sums: false,
            dual_cycles: false,
        };
    }
    let two = int(2);
    let at_vertex = |v: usize| -> BTreeSet<(usize, usize)> {
        edges.iter().copied().filter(|&(a, b)| a == v || b == v).collect()
    };
    let vertex_sums = (0..p.vertices).all(|v| at_vertex(v).iter().map(|e| &angles[e]).sum::<Rational>() == two);
    let links: BTreeSet<BTreeSet<(usize, usize)>> = (0..p.vertices).map(at_vertex).collect();

    // Dual graph: regions adjacent across each edge.
    let mut sides: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (f, face) in p.faces.iter().enumerate() {
        for k in 0..face.len() {
            let (a, b) = (face[k], face[(k + 1) % face.len()]);
            sides.entry((a.min(b), a.max(b))).or_default().push(f);
        }
    }
    let adjacent: Vec<Vec<((usize, usize), usize)>> = (0..p.faces.len())
        .map(|f| {
            sides
                .iter()
                .filter(|(_, fs)| fs.contains(&f))
                .map(|(&e, fs)| (e, if fs[0] == f { fs[1] } else { fs[0] }))
                .collect()
        })
        .collect();

    struct Search<'a> {
        adjacent: &'a [Vec<((usize, usize), usize)>],
        angles: &'a BTreeMap<(usize, usize), Rational>,
        links: &'a BTreeSet<BTreeSet<(usize, usize)>>,
        two: Rational,
    }
    impl Search<'_> {
        /// Whether some cycle extending `path` violates the condition.
        fn violated(&self, path: &mut Vec<usize>, used: &mut Vec<(usize, usize)>, sum: &Rational) -> bool {
            let start = path[0];
            let here = *path.last().expect("non-empty path");
            for &(e, g) in &self.adjacent[here] {
                if used.contains(&e) {
                    continue;
                }
                let total = sum + &self.angles[&e];
                if total > self.two {
                    continue;
                }
                if g == start && !used.is_empty() {
                    let mut cycle: BTreeSet<(usize, usize)> = used.iter().copied().collect();
                    cycle.insert(e);
                    if !self.links.contains(&cycle) {
                        return true;
                    }
                } else if g > start && !path.contains(&g) {
                    path.push(g);
                    used.push(e);
                    let found = self.violated(path, used, &total);
                    path.pop();
                    used.pop();
                    if found {
                        return true;
                    }
                }
            }
            false
        }
    }
    let search = Search {
        adjacent: &adjacent,
        angles,
        links: &links,
        two,
    };
    let dual_cycles =
        (0..p.faces.len()).all(|f| !search.violated(&mut vec![f], &mut vec![], &Rational::zero()));

    RivinReport {
        angles_in_range,
        vertex_sums,
        dual_cycles,
    }
}

pub fn rivin_check(p: &Polyhedron, angles: &BTreeMap<(usize, usize), Rational>) -> bool {
    rivin_conditions(p, angles).holds()
}

/// The same exterior angle on every edge.
pub fn uniform_angles(p: &Polyhedron, angle: Rational) -> BTreeMap<(usize, usize), Rational> {
    p.edges().into_iter().map(|e| (e, angle.clone())).collect()
}

#[derive(Clone, Debug)]
pub struct LinkTriangulation {
    pub graph: FlatGraph,
    pub hypotheses: Hypotheses,
    pub cellulation: PppCellulation,
}

/// Cones the upper polyhedron at `v₁` and the lower at `v₂` for a pair of
/// vertices sharing no region, trying pairs in order until no pillow is
/// needed.
pub fn link_triangulation(d: &LinkDiagram) -> Result<LinkTriangulation, LinkError> {
    let graph = flatten(d)?;
    let hypotheses = check_hypotheses(&graph);
    if !hypotheses.no_bigons {
        return Err(LinkError::HypothesisFailed("diagram has bigons".into()));
    }
    if !hypotheses.four_curve_ok {
        return Err(LinkError::HypothesisFailed(
            "a curve meeting the diagram four times encloses more than one crossing".into(),
        ));
    }
    let pairs = distant_pairs(&graph);
    if pairs.is_empty() {
        return Err(LinkError::HypothesisFailed("every pair of crossings shares a region".into()));
    }
    let decomposition = two_polyhedra(&graph)?;
    let mut fewest = usize::MAX;
    for (v, w) in pairs.iter().flat_map(|&(v, w)| [(v, w), (w, v)]) {
        let cellulation = build_pipeline(&decomposition, &[v, w])?;
        if cellulation.pillows.is_empty() {
            return Ok(LinkTriangulation {
                graph,
                hypotheses,
                cellulation,
            });
        }
        fewest = fewest.min(cellulation.pillows.len());
    }
    Err(LinkError::PillowUnexpected { count: fewest })
}
