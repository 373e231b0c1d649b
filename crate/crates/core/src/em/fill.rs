//! Impedance matrix assembly.
//!
//! Unknowns are pulse currents, one per segment, flowing from `start` to
//! `end`. A unit pulse deposits charge `∓1/(jω)` at its start/end node; the
//! charge at a node is spread over the node's cell, made of the half
//! segments meeting there. Testing with the same pulses gives
//!
//! ```text
//! Z_mn = jkη [ Lm Ln (t̂m·t̂n) <g>_mn − (P(em,en) − P(em,sn) − P(sm,en) + P(sm,sn)) / k² ]
//! ```
//!
//! where `P(i, j)` is the kernel averaged over the cells of nodes `i` and `j`.
//! The form is symmetric in `m, n`, so the matrix is reciprocal by
//! construction.
//!
//! Segment pairs farther apart than [`FAR_PAIR`] segment lengths use a
//! two-point rule per piece for all five kernels of the entry; closer pairs
//! use accurate cell averages. Choosing the rule per pair keeps the second
//! difference of the potentials free of mixed-rule error.

use std::collections::HashMap;

use num_complex::Complex64;

use super::kernel::{averaged_kernel, far_kernel, Piece};
use super::matrix::ComplexMatrix;
use super::{wave_number, EmError, FREE_SPACE_IMPEDANCE};
use crate::geometry::{Segment, TubeLayout, WireModel};
/// Center distance, in units of the longer segment, from which a pair is
/// filled with point samples.
pub const FAR_PAIR: f64 = 8.0;

/// Node connectivity and charge cells of a set of segments.
#[derive(Clone, Debug)]
pub struct Topology {
    pub start_node: Vec<usize>,
    pub end_node: Vec<usize>,
    pub cells: Vec<Vec<Piece>>,
    pub cell_length: Vec<f64>,
}

impl Topology {
    /// Joins segment ends closer than a millionth of the shortest segment.
    pub fn from_segments(segments: &[Segment]) -> Result<Self, EmError> {
        let shortest = segments.iter().map(Segment::length).fold(f64::INFINITY, f64::min);
        if !(shortest > 0.0) {
            return Err(EmError::Model("zero-length segment".into()));
        }
        let tol = 1e-6 * shortest;
        let mut grid: HashMap<[i64; 3], Vec<usize>> = HashMap::new();
        let mut points: Vec<crate::vec3::Vec3> = Vec::new();
        let mut lookup = |p: crate::vec3::Vec3| -> usize {
            let key = [(p.x / tol).round() as i64, (p.y / tol).round() as i64, (p.z / tol).round() as i64];
            for dx in -1..=1 {
                for dy in -1..=1 {
                    for dz in -1..=1 {
                        if let Some(ids) = grid.get(&[key[0] + dx, key[1] + dy, key[2] + dz]) {
                            for &id in ids {
                                if (points[id] - p).norm() <= tol {
                                    return id;
                                }
                            }
                        }
                    }
                }
            }
            points.push(p);
            grid.entry(key).or_default().push(points.len() - 1);
            points.len() - 1
        };
        let mut start_node = Vec::with_capacity(segments.len());
        let mut end_node = Vec::with_capacity(segments.len());
        for seg in segments {
            start_node.push(lookup(seg.start));
            end_node.push(lookup(seg.end));
        }
        for (i, (s, e)) in start_node.iter().zip(&end_node).enumerate() {
            if s == e {
                return Err(EmError::Model(format!("segment {i} starts and ends on the same node")));
            }
        }
        let node_count = points.len();
        Ok(Self::with_nodes(segments, start_node, end_node, node_count))
    }

    /// Topology of a tube mesh, with node `p * n_rings + ring` for the grid
    /// node on ring `ring` at azimuth `p`.
    pub fn for_tube(segments: &[Segment], layout: &TubeLayout) -> Self {
        let node = |ring: usize, p: usize| (p % layout.n_azimuth) * layout.n_rings + ring;
        let mut start_node = vec![0; segments.len()];
        let mut end_node = vec![0; segments.len()];
        for p in 0..layout.n_azimuth {
            for ring in 0..layout.n_rings {
                let i = layout.ring_segment(ring, p);
                start_node[i] = node(ring, p);
                end_node[i] = node(ring, p + 1);
            }
            for step in 0..layout.n_axial {
                let i = layout.axial_segment(step, p);
                start_node[i] = node(step, p);
                end_node[i] = node(step + 1, p);
            }
        }
        Self::with_nodes(segments, start_node, end_node, layout.n_azimuth * layout.n_rings)
    }

    fn with_nodes(segments: &[Segment], start_node: Vec<usize>, end_node: Vec<usize>, node_count: usize) -> Self {
        let mut cells = vec![Vec::new(); node_count];
        for (i, seg) in segments.iter().enumerate() {
            let mid = seg.center();
            cells[start_node[i]].push(Piece { start: seg.start, end: mid, radius: seg.radius });
            cells[end_node[i]].push(Piece { start: mid, end: seg.end, radius: seg.radius });
        }
        let cell_length = cells.iter().map(|c| c.iter().map(Piece::length).sum()).collect();
        Self { start_node, end_node, cells, cell_length }
    }

    pub fn node_count(&self) -> usize {
        self.cells.len()
    }
}

/// Segments with their connectivity, ready for matrix fill.
#[derive(Clone, Debug)]
pub struct WireSet {
    pub segments: Vec<Segment>,
    pub topology: Topology,
}

impl WireSet {
    pub fn new(segments: Vec<Segment>) -> Result<Self, EmError> {
        let topology = Topology::from_segments(&segments)?;
        Ok(Self { segments, topology })
    }

    pub fn tube(segments: Vec<Segment>, layout: &TubeLayout) -> Self {
        let topology = Topology::for_tube(&segments, layout);
        Self { segments, topology }
    }

    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }
}

pub(crate) fn segment_piece(seg: &Segment) -> Piece {
    Piece { start: seg.start, end: seg.end, radius: seg.radius }
}

/// Kernel averaged over the charge cells of node `i` of `a` and node `j` of
/// `b`, each piece pair integrated with `rule`.
pub(crate) fn node_potential(
    a: &Topology,
    i: usize,
    b: &Topology,
    j: usize,
    k: f64,
    rule: fn(&Piece, &Piece, f64) -> Complex64,
) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for p in &a.cells[i] {
        for q in &b.cells[j] {
            sum += rule(p, q, k) * (p.length() * q.length());
        }
    }
    sum / (a.cell_length[i] * b.cell_length[j])
}

/// Assembles one entry from the segment kernel and the four node potentials.
pub(crate) fn entry(
    k: f64,
    sm: &Segment,
    sn: &Segment,
    seg_kernel: Complex64,
    p_ee: Complex64,
    p_es: Complex64,
    p_se: Complex64,
    p_ss: Complex64,
) -> Complex64 {
    let tt = sm.direction().dot(sn.direction());
    let vector = seg_kernel * (sm.length() * sn.length() * tt);
    let scalar = (p_ee - p_es - p_se + p_ss) / (k * k);
    Complex64::new(0.0, k * FREE_SPACE_IMPEDANCE) * (vector - scalar)
}

pub(crate) fn is_far_pair(sm: &Segment, sn: &Segment) -> bool {
    (sm.center() - sn.center()).norm() >= FAR_PAIR * sm.length().max(sn.length())
}

/// Lazily computed cell potentials between two topologies, one cache per
/// quadrature class.
pub(crate) struct Potentials<'a> {
    a: &'a Topology,
    b: &'a Topology,
    k: f64,
    near: HashMap<(usize, usize), Complex64>,
    far: HashMap<(usize, usize), Complex64>,
}

impl<'a> Potentials<'a> {
    pub(crate) fn new(a: &'a Topology, b: &'a Topology, k: f64) -> Self {
        Self { a, b, k, near: HashMap::new(), far: HashMap::new() }
    }

    pub(crate) fn get(&mut self, far: bool, i: usize, j: usize) -> Complex64 {
        let (a, b, k) = (self.a, self.b, self.k);
        if far {
            *self.far.entry((i, j)).or_insert_with(|| node_potential(a, i, b, j, k, far_kernel))
        } else {
            *self.near.entry((i, j)).or_insert_with(|| node_potential(a, i, b, j, k, averaged_kernel))
        }
    }
}

/// Entry between segment `m` of `rows` and segment `n` of `cols`. `node`
/// maps a pair of node ids to the key used for the potential cache.
pub(crate) fn pair_entry(
    k: f64,
    rows: &WireSet,
    m: usize,
    cols: &WireSet,
    n: usize,
    pot: &mut Potentials,
    node: impl Fn(usize, usize) -> (usize, usize),
) -> Complex64 {
    let (ta, tb) = (&rows.topology, &cols.topology);
    let (sm, sn) = (&rows.segments[m], &cols.segments[n]);
    let (am, bm) = (ta.start_node[m], ta.end_node[m]);
    let (an, bn) = (tb.start_node[n], tb.end_node[n]);
    let far = is_far_pair(sm, sn);
    let (pm, pn) = (segment_piece(sm), segment_piece(sn));
    let g = if far { far_kernel(&pm, &pn, k) } else { averaged_kernel(&pm, &pn, k) };
    let mut p = |i: usize, j: usize| {
        let (i, j) = node(i, j);
        pot.get(far, i, j)
    };
    entry(k, sm, sn, g, p(bm, bn), p(bm, an), p(am, bn), p(am, an))
}

/// Interaction block between every segment of `rows` and every segment of
/// `cols`.
pub fn coupling_block(rows: &WireSet, cols: &WireSet, frequency: f64) -> ComplexMatrix {
    let k = wave_number(frequency);
    let mut pot = Potentials::new(&rows.topology, &cols.topology, k);
    let mut z = ComplexMatrix::zeros(rows.len(), cols.len());
    for m in 0..rows.len() {
        for n in 0..cols.len() {
            z[(m, n)] = pair_entry(k, rows, m, cols, n, &mut pot, |i, j| (i, j));
        }
    }
    z
}

/// Self-interaction matrix of a wire set, filled on the upper triangle and
/// mirrored so it is exactly symmetric.
pub fn self_block(set: &WireSet, frequency: f64) -> ComplexMatrix {
    let k = wave_number(frequency);
    let mut pot = Potentials::new(&set.topology, &set.topology, k);
    let n = set.len();
    let mut z = ComplexMatrix::zeros(n, n);
    for m in 0..n {
        for nn in m..n {
            let v = pair_entry(k, set, m, set, nn, &mut pot, |i, j| if i <= j { (i, j) } else { (j, i) });
            z[(m, nn)] = v;
            z[(nn, m)] = v;
        }
    }
    z
}

/// Full `N × N` impedance matrix of `model` at `frequency`.
pub fn fill_impedance_matrix(model: &WireModel, frequency: f64) -> Result<ComplexMatrix, EmError> {
    if model.segments.is_empty() {
        return Err(EmError::Model("model has no segments".into()));
    }
    let set = WireSet::new(model.segments.clone())?;
    Ok(self_block(&set, frequency))
}
