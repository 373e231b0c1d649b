//! Fast solves against the tube mesh.
//!
//! The tube grid is invariant under rotation by one azimuth step, and the
//! mesh layout stores segments in rotation-ordered blocks, so the tube
//! self-interaction matrix is block circulant:
//! `T[(p, α), (q, β)] = C[q − p mod n][α][β]`. A discrete Fourier transform
//! over the block index diagonalizes it into `n` independent dense blocks.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::fill::{pair_entry, Potentials, WireSet};
use super::matrix::{ComplexMatrix, LuFactors};
use super::{wave_number, EmError};
use crate::geometry::TubeLayout;

#[derive(Clone, Debug)]
pub struct TubeOperator {
    layout: TubeLayout,
    /// LU factors of the Fourier-domain blocks, one per azimuthal mode.
    modes: Vec<LuFactors>,
    /// `exp(2πi k / n)` for `k` in `0..n`.
    twiddle: Vec<Complex64>,
}

impl TubeOperator {
    pub fn new(set: &WireSet, layout: &TubeLayout, frequency: f64) -> Result<Self, EmError> {
        let n = layout.n_azimuth;
        let b = layout.block_len();
        if set.len() != layout.segment_count() {
            return Err(EmError::Model("tube wire set does not match its layout".into()));
        }
        let first_row = first_block_row(set, layout, frequency);
        let twiddle: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / n as f64)).collect();
        let mut modes = Vec::with_capacity(n);
        for m in 0..n {
            let mut block = ComplexMatrix::zeros(b, b);
            for (d, c) in first_row.iter().enumerate() {
                let w = twiddle[(m * d) % n];
                for alpha in 0..b {
                    for beta in 0..b {
                        block[(alpha, beta)] += c[(alpha, beta)] * w;
                    }
                }
            }
            modes.push(LuFactors::factor(block)?);
        }
        Ok(Self { layout: *layout, modes, twiddle })
    }

    pub fn dim(&self) -> usize {
        self.layout.segment_count()
    }

    /// Worst pivot ratio across the azimuthal modes.
    pub fn condition_estimate(&self) -> f64 {
        self.modes.iter().map(|m| m.condition_estimate).fold(0.0, f64::max)
    }

    /// Solves `T x = rhs`.
    pub fn solve(&self, rhs: &[Complex64]) -> Vec<Complex64> {
        let n = self.layout.n_azimuth;
        let b = self.layout.block_len();
        assert_eq!(rhs.len(), n * b, "dimension mismatch");
        let zero = Complex64::new(0.0, 0.0);
        let mut spectrum = vec![zero; n * b];
        for m in 0..n {
            let dst = &mut spectrum[m * b..(m + 1) * b];
            for p in 0..n {
                let w = self.twiddle[(n - (m * p) % n) % n];
                for (d, s) in dst.iter_mut().zip(&rhs[p * b..(p + 1) * b]) {
                    *d += s * w;
                }
            }
        }
        let solved: Vec<Vec<Complex64>> =
            (0..n).map(|m| self.modes[m].solve(&spectrum[m * b..(m + 1) * b])).collect();
        let mut out = vec![zero; n * b];
        let scale = 1.0 / n as f64;
        for p in 0..n {
            let dst = &mut out[p * b..(p + 1) * b];
            for (m, xm) in solved.iter().enumerate() {
                let w = self.twiddle[(m * p) % n] * scale;
                for (d, s) in dst.iter_mut().zip(xm) {
                    *d += s * w;
                }
            }
        }
        out
    }
}

/// Interactions of block 0 with every block: `C[d][α][β] = T[(0, α), (d, β)]`.
pub(crate) fn first_block_row(set: &WireSet, layout: &TubeLayout, frequency: f64) -> Vec<ComplexMatrix> {
    let k = wave_number(frequency);
    let n = layout.n_azimuth;
    let rings = layout.n_rings;
    let b = layout.block_len();
    // Cell potentials depend only on the relative azimuth of the two nodes.
    let rotate = |i: usize, j: usize| -> (usize, usize) {
        let (ri, pi) = (i % rings, i / rings);
        let (rj, pj) = (j % rings, j / rings);
        (ri, ((pj + n - pi) % n) * rings + rj)
    };
    let mut pot = Potentials::new(&set.topology, &set.topology, k);
    (0..n)
        .map(|d| {
            let mut block = ComplexMatrix::zeros(b, b);
            for alpha in 0..b {
                for beta in 0..b {
                    block[(alpha, beta)] = pair_entry(k, set, alpha, set, d * b + beta, &mut pot, rotate);
                }
            }
            block
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::em::fill::self_block;
    use crate::em::matrix::relative_residual;
    use crate::geometry::{build_tube_mesh, MeshOptions, TubeSpec};

    #[test]
    fn matches_dense_solve_on_small_tube() {
        let f = 1.2e9;
        let tube = TubeSpec::new(0.05, 0.06).unwrap();
        let mesh = build_tube_mesh(&tube, f, &MeshOptions::default()).unwrap();
        let set = WireSet::tube(mesh.model.segments.clone(), &mesh.layout);
        let op = TubeOperator::new(&set, &mesh.layout, f).unwrap();
        let dense = self_block(&set, f);
        let rhs: Vec<Complex64> =
            (0..set.len()).map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let x = op.solve(&rhs);
        assert!(relative_residual(&dense, &x, &rhs) < 1e-9);
    }

    #[test]
    fn block_row_matches_dense_fill() {
        let f = 1.2e9;
        let tube = TubeSpec::new(0.05, 0.06).unwrap();
        let mesh = build_tube_mesh(&tube, f, &MeshOptions::default()).unwrap();
        let set = WireSet::tube(mesh.model.segments.clone(), &mesh.layout);
        let dense = self_block(&set, f);
        let row = first_block_row(&set, &mesh.layout, f);
        let b = mesh.layout.block_len();
        let scale = dense[(0, 0)].norm();
        for p in 0..mesh.layout.n_azimuth {
            for q in 0..mesh.layout.n_azimuth {
                let d = (q + mesh.layout.n_azimuth - p) % mesh.layout.n_azimuth;
                for alpha in 0..b {
                    for beta in 0..b {
                        let got = row[d][(alpha, beta)];
                        let want = dense[(p * b + alpha, q * b + beta)];
                        assert!((got - want).norm() < 1e-9 * scale, "p={p} q={q} a={alpha} b={beta}");
                    }
                }
            }
        }
    }
}
