//! Mod 2 homology of the compact manifold obtained by truncating every
//! ideal vertex, relative to its boundary tori.
//!
//! Cells of the truncated complex:
//! - 0-cells: the two ends of every edge class;
//! - 1-cells: long edges (one per edge class), then short edges (one per
//!   glued pair of corner-triangle sides);
//! - 2-cells: hexagons (one per face class), then corner triangles;
//! - 3-cells: truncated tetrahedra.
//!
//! The boundary subcomplex consists of all 0-cells, short edges and corner
//! triangles.

use serde::Serialize;
use thiserror::Error;

use crate::normal::NormalVector;
use crate::ppp::{pillow_lambda, PillowBoundary, PppError};
use crate::triangulation::Triangulation;

/// A vector over GF(2), packed into words.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec {
            len,
            words: vec![0; len.div_ceil(64)],
        }
    }

    pub fn from_indices(len: usize, ones: impl IntoIterator<Item = usize>) -> Self {
        let mut v = BitVec::zeros(len);
        for i in ones {
            v.flip(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn get(&self, i: usize) -> bool {
        self.words[i / 64] >> (i % 64) & 1 == 1
    }

    pub fn flip(&mut self, i: usize) {
        self.words[i / 64] ^= 1 << (i % 64);
    }

    pub fn xor_with(&mut self, other: &BitVec) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(|&i| self.get(i))
    }

    fn leading(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(k, w)| 64 * k + w.trailing_zeros() as usize)
    }

    /// Keeps only the coordinates in `keep`, renumbered in order.
    pub fn project(&self, keep: &[usize]) -> BitVec {
        BitVec::from_indices(keep.len(), (0..keep.len()).filter(|&k| self.get(keep[k])))
    }
}

/// Incrementally reduced row space over GF(2).
#[derive(Clone, Debug, Default)]
pub struct RowSpace {
    rows: Vec<(usize, BitVec)>,
}

impl RowSpace {
    pub fn new() -> Self {
        RowSpace::default()
    }

    fn reduce(&self, v: &mut BitVec) {
        for (pivot, row) in &self.rows {
            if v.get(*pivot) {
                v.xor_with(row);
            }
        }
    }

    /// Adds `v`; returns whether it increased the rank.
    pub fn insert(&mut self, mut v: BitVec) -> bool {
        self.reduce(&mut v);
        match v.leading() {
            None => false,
            Some(p) => {
                for (_, row) in self.rows.iter_mut() {
                    if row.get(p) {
                        row.xor_with(&v);
                    }
                }
                self.rows.push((p, v));
                true
            }
        }
    }

    pub fn contains(&self, v: &BitVec) -> bool {
        let mut v = v.clone();
        self.reduce(&mut v);
        v.is_zero()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Boundary matrix stored by columns: `columns[j]` is the boundary of cell `j`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub rows: usize,
    pub columns: Vec<BitVec>,
}

impl BoundaryMatrix {
    pub fn rank(&self) -> usize {
        let mut space = RowSpace::new();
        for c in &self.columns {
            space.insert(c.clone());
        }
        space.rank()
    }

    pub fn apply(&self, chain: &BitVec) -> BitVec {
        let mut out = BitVec::zeros(self.rows);
        for j in chain.ones() {
            out.xor_with(&self.columns[j]);
        }
        out
    }

    /// Basis of the kernel, by elimination on the columns.
    pub fn kernel(&self) -> Vec<BitVec> {
        let n = self.columns.len();
        // Each entry: (image, combination of columns producing it).
        let mut reduced: Vec<(usize, BitVec, BitVec)> = vec![];
        let mut kernel = vec![];
        for j in 0..n {
            let mut img = self.columns[j].clone();
            let mut comb = BitVec::from_indices(n, [j]);
            for (p, r_img, r_comb) in &reduced {
                if img.get(*p) {
                    img.xor_with(r_img);
                    comb.xor_with(r_comb);
                }
            }
            match img.leading() {
                None => kernel.push(comb),
                Some(p) => reduced.push((p, img, comb)),
            }
        }
        kernel
    }
}

/// Cellular chain complex of the truncated manifold over GF(2).
#[derive(Clone, Debug)]
pub struct Gf2ChainComplex {
    pub cells: [usize; 4],
    /// `boundary[k]` maps `k+1`-chains to `k`-chains.
    pub boundary: [BoundaryMatrix; 3],
    /// Per dimension, whether each cell lies in the boundary subcomplex.
    pub on_boundary: [Vec<bool>; 4],
    pub num_long_edges: usize,
    pub num_hexagons: usize,
}

impl Gf2ChainComplex {
    pub fn euler_characteristic(&self) -> i64 {
        self.cells[0] as i64 - self.cells[1] as i64 + self.cells[2] as i64 - self.cells[3] as i64
    }

    /// Whether `∂∂ = 0` in both degrees.
    pub fn is_chain_complex(&self) -> bool {
        (0..2).all(|k| {
            self.boundary[k + 1]
                .columns
                .iter()
                .all(|c| self.boundary[k].apply(c).is_zero())
        })
    }

    /// Whether the boundary of every boundary cell stays in the boundary.
    pub fn boundary_is_subcomplex(&self) -> bool {
        (0..3).all(|k| {
            self.boundary[k]
                .columns
                .iter()
                .enumerate()
                .filter(|(j, _)| self.on_boundary[k + 1][*j])
                .all(|(_, c)| c.ones().all(|i| self.on_boundary[k][i]))
        })
    }

    pub fn betti(&self, k: usize) -> usize {
        let n = self.cells[k];
        let rank_out = if k == 0 { 0 } else { self.boundary[k - 1].rank() };
        let rank_in = if k == 3 { 0 } else { self.boundary[k].rank() };
        n - rank_out - rank_in
    }

    /// Indices of the non-boundary cells of dimension `k`.
    pub fn interior_cells(&self, k: usize) -> Vec<usize> {
        (0..self.cells[k]).filter(|&i| !self.on_boundary[k][i]).collect()
    }

    /// Relative boundary map `C_{k+1}(M̄,∂M̄) → C_k(M̄,∂M̄)`.
    pub fn relative_boundary(&self, k: usize) -> BoundaryMatrix {
        let rows = self.interior_cells(k);
        BoundaryMatrix {
            rows: rows.len(),
            columns: self
                .interior_cells(k + 1)
                .into_iter()
                .map(|j| self.boundary[k].columns[j].project(&rows))
                .collect(),
        }
    }
}

/// Builds the truncated complex from the triangulation's combinatorics.
pub fn truncated_complex(t: &Triangulation) -> Gf2ChainComplex {
    let n = t.num_tetrahedra();
    let edges = t.edges();
    let num_e = edges.len();

    // Which end of its edge class the corner (tet, v) on edge {v, w} sits at.
    let mut end_at = vec![[[usize::MAX; 4]; 4]; n];
    for (e, class) in edges.iter().enumerate() {
        for inc in &class.incidences {
            let [a, b, ..] = inc.verts;
            end_at[inc.tet][a as usize][b as usize] = 2 * e;
            end_at[inc.tet][b as usize][a as usize] = 2 * e + 1;
        }
    }

    // Short edges: side of corner (tet, v) lying in face f, glued across f.
    let mut short_of = vec![[[usize::MAX; 4]; 4]; n];
    let mut num_short = 0;
    for tet in 0..n {
        for v in 0..4u8 {
            for f in (0..4u8).filter(|&f| f != v) {
                if short_of[tet][v as usize][f as usize] != usize::MAX {
                    continue;
                }
                let g = t.neighbor(tet, f);
                short_of[tet][v as usize][f as usize] = num_short;
                short_of[g.tet][g.perm.apply(v) as usize][g.perm.apply(f) as usize] = num_short;
                num_short += 1;
            }
        }
    }

    let c0 = 2 * num_e;
    let c1 = num_e + num_short;
    let num_hex = t.faces().len();
    let c2 = num_hex + 4 * n;

    let d1: Vec<BitVec> = (0..num_e)
        .map(|e| BitVec::from_indices(c0, [2 * e, 2 * e + 1]))
        .chain((0..num_short).map(|s| {
            // Find one occurrence of the short edge to read its ends.
            let (tet, v, f) = (0..n)
                .flat_map(|tet| (0..4u8).flat_map(move |v| (0..4u8).map(move |f| (tet, v, f))))
                .find(|&(tet, v, f)| v != f && short_of[tet][v as usize][f as usize] == s)
                .expect("every short edge occurs");
            let ws: Vec<u8> = (0..4u8).filter(|&w| w != v && w != f).collect();
            BitVec::from_indices(
                c0,
                ws.iter().map(|&w| end_at[tet][v as usize][w as usize]),
            )
        }))
        .collect();

    let d2: Vec<BitVec> = t
        .faces()
        .iter()
        .map(|face| {
            let (tet, f) = face.first;
            let vs: Vec<u8> = (0..4u8).filter(|&v| v != f).collect();
            let long = [(0, 1), (0, 2), (1, 2)]
                .map(|(i, j)| t.edge_class(tet, vs[i], vs[j]));
            let short = vs.clone().into_iter().map(|v| num_e + short_of[tet][v as usize][f as usize]);
            BitVec::from_indices(c1, long.into_iter().chain(short))
        })
        .chain((0..n).flat_map(|tet| (0..4u8).map(move |v| (tet, v))).map(|(tet, v)| {
            BitVec::from_indices(
                c1,
                (0..4u8)
                    .filter(|&f| f != v)
                    .map(|f| num_e + short_of[tet][v as usize][f as usize]),
            )
        }))
        .collect();

    let d3: Vec<BitVec> = (0..n)
        .map(|tet| {
            BitVec::from_indices(
                c2,
                (0..4u8)
                    .map(|f| t.face_class(tet, f))
                    .chain((0..4).map(|v| num_hex + 4 * tet + v)),
            )
        })
        .collect();

    Gf2ChainComplex {
        cells: [c0, c1, c2, n],
        boundary: [
            BoundaryMatrix { rows: c0, columns: d1 },
            BoundaryMatrix { rows: c1, columns: d2 },
            BoundaryMatrix { rows: c2, columns: d3 },
        ],
        on_boundary: [
            vec![true; c0],
            (0..c1).map(|i| i >= num_e).collect(),
            (0..c2).map(|i| i >= num_hex).collect(),
            vec![false; n],
        ],
        num_long_edges: num_e,
        num_hexagons: num_hex,
    }
}

/// Result of checking whether `H₁(M̄) → H₁(M̄,∂M̄)` vanishes (mod 2).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct H1Gate {
    pub zero_map: bool,
    pub h1_rank: usize,
    pub image_rank: usize,
    pub relative_h1_rank: usize,
    pub boundary_h1_rank: usize,
}

pub fn h1_gate(t: &Triangulation) -> H1Gate {
    let cx = truncated_complex(t);
    h1_gate_of(&cx)
}

pub fn h1_gate_of(cx: &Gf2ChainComplex) -> H1Gate {
    let h1_rank = cx.betti(1);
    let long = cx.interior_cells(1);
    let rel_d2 = cx.relative_boundary(1);

    // B₁ of the relative complex, then add projected absolute cycles.
    let mut space = RowSpace::new();
    for c in &rel_d2.columns {
        space.insert(c.clone());
    }
    let b1_rel = space.rank();
    for z in cx.boundary[0].kernel() {
        space.insert(z.project(&long));
    }
    let image_rank = space.rank() - b1_rel;

    // Relative cycles are all of C₁ (∂₁ vanishes on long edges mod boundary).
    let relative_h1_rank = long.len() - b1_rel;

    // Boundary subcomplex homology in degree 1.
    let short: Vec<usize> = (0..cx.cells[1]).filter(|&i| cx.on_boundary[1][i]).collect();
    let corners: Vec<usize> = (0..cx.cells[2]).filter(|&i| cx.on_boundary[2][i]).collect();
    let d1_b = BoundaryMatrix {
        rows: cx.cells[0],
        columns: short.iter().map(|&i| cx.boundary[0].columns[i].clone()).collect(),
    };
    let d2_b = BoundaryMatrix {
        rows: short.len(),
        columns: corners
            .iter()
            .map(|&j| cx.boundary[1].columns[j].project(&short))
            .collect(),
    };
    let boundary_h1_rank = short.len() - d1_b.rank() - d2_b.rank();

    H1Gate {
        zero_map: image_rank == 0,
        h1_rank,
        image_rank,
        relative_h1_rank,
        boundary_h1_rank,
    }
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum HomologyError {
    #[error("the chosen faces do not form a relative 2-cycle")]
    NotACycle,
    #[error(transparent)]
    Pillow(#[from] PppError),
}

/// Parity obstruction carried by a vertical class.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ObstructionClass {
    /// Pillows whose alternation is odd.
    pub odd_pillows: Vec<usize>,
    /// Face classes making up the obstructing surface.
    pub faces: Vec<usize>,
    pub nontrivial: bool,
}

/// Whether the union of the given face classes is a relative 2-cycle that
/// is non-zero in `H₂(M̄,∂M̄; Z₂)`.
pub fn relative_class_nontrivial(t: &Triangulation, faces: &[usize]) -> Result<bool, HomologyError> {
    let cx = truncated_complex(t);
    let chain = BitVec::from_indices(cx.num_hexagons, faces.iter().copied());
    let d2 = cx.relative_boundary(1);
    if !d2.apply(&chain).is_zero() {
        return Err(HomologyError::NotACycle);
    }
    let d3 = cx.relative_boundary(2);
    let mut space = RowSpace::new();
    for c in &d3.columns {
        space.insert(c.clone());
    }
    Ok(!space.contains(&chain))
}

/// Collects the pillows with odd alternation for `x` and decides whether
/// their bottom polygons carry a non-trivial relative class.
pub fn obstruction_class(
    t: &Triangulation,
    pillows: &[PillowBoundary],
    x: &NormalVector,
) -> Result<ObstructionClass, HomologyError> {
    let mut odd = vec![];
    let mut faces = vec![];
    for (i, p) in pillows.iter().enumerate() {
        let lambda = pillow_lambda(p, x)?;
        if !lambda.to_integer().bit(0) {
            continue;
        }
        if !lambda.is_integer() {
            return Err(HomologyError::Pillow(PppError::Internal(
                "non-integral alternation".into(),
            )));
        }
        odd.push(i);
        for face in &p.bottom {
            faces.push(t.face_class(face.tet, face.face));
        }
    }
    // A face counted twice cancels mod 2.
    faces.sort_unstable();
    let mut reduced: Vec<usize> = vec![];
    for f in faces {
        if reduced.last() == Some(&f) {
            reduced.pop();
        } else {
            reduced.push(f);
        }
    }
    let nontrivial = !reduced.is_empty() && relative_class_nontrivial(t, &reduced)?;
    Ok(ObstructionClass {
        odd_pillows: odd,
        faces: reduced,
        nontrivial,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig8() -> Triangulation {
        Triangulation::from_json(include_str!("../../../fixtures/fig8.json")).unwrap()
    }

    fn m136() -> Triangulation {
        Triangulation::from_json(include_str!("../../../fixtures/m136_bad.json")).unwrap()
    }

    #[test]
    fn kernel_of_a_triangle_boundary() {
        // Three vertices, three edges in a cycle.
        let m = BoundaryMatrix {
            rows: 3,
            columns: vec![
                BitVec::from_indices(3, [0, 1]),
                BitVec::from_indices(3, [1, 2]),
                BitVec::from_indices(3, [0, 2]),
            ],
        };
        assert_eq!(m.rank(), 2);
        let k = m.kernel();
        assert_eq!(k, vec![BitVec::from_indices(3, [0, 1, 2])]);
    }

    #[test]
    fn complexes_are_chain_complexes_with_zero_euler_characteristic() {
        for t in [fig8(), m136()] {
            let cx = truncated_complex(&t);
            assert!(cx.is_chain_complex());
            assert!(cx.boundary_is_subcomplex());
            assert_eq!(cx.euler_characteristic(), 0);
            let betti: i64 = (0..4).map(|k| (-1i64).pow(k as u32) * cx.betti(k) as i64).sum();
            assert_eq!(betti, 0);
            assert_eq!(cx.betti(0), 1);
        }
    }

    #[test]
    fn fig8_gate_is_zero() {
        let gate = h1_gate(&fig8());
        assert_eq!(gate.h1_rank, 1);
        assert!(gate.zero_map);
        assert_eq!(gate.boundary_h1_rank, 2);
    }

    #[test]
    fn m136_gate_is_not_zero() {
        let gate = h1_gate(&m136());
        assert!(!gate.zero_map);
    }

    #[test]
    fn tet_five_square_is_a_nontrivial_class() {
        let t = m136();
        let faces = [t.face_class(5, 1), t.face_class(5, 3)];
        assert_eq!(relative_class_nontrivial(&t, &faces), Ok(true));
    }
}
