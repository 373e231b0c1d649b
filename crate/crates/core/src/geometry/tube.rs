//! Wire-grid model of the conductive tube.
//!
//! The tube surface is replaced by `n_rings` circular rings joined by
//! `n_azimuth` axial runs. Grid wires follow the equal-area rule: a wire of
//! radius `pitch / 2π` has the same surface area as the strip of tube it
//! stands in for.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::wire::{Segment, WireModel, MIN_LENGTH_TO_RADIUS};
use super::{GeometryError, TubeSpec};
use crate::vec3::Vec3;
use crate::wavelength;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeshOptions {
    /// Upper bound on the cell pitch, in wavelengths.
    pub max_pitch_wavelengths: f64,
    /// Fewest segments allowed around a ring. Always rounded up to even.
    pub min_ring_segments: usize,
}

impl Default for MeshOptions {
    fn default() -> Self {
        Self { max_pitch_wavelengths: 0.1, min_ring_segments: 16 }
    }
}

/// Index layout of a tube mesh.
///
/// Segments are stored in `n_azimuth` blocks, one per azimuth step. Block `p`
/// holds the ring chords leaving azimuth `p` (one per ring, bottom to top)
/// followed by the axial run at azimuth `p` (bottom to top). Rotating the
/// mesh by one azimuth step maps block `p` onto block `p + 1` with
/// orientation preserved.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeLayout {
    pub n_azimuth: usize,
    pub n_rings: usize,
    pub n_axial: usize,
    pub pitch: f64,
    pub wire_radius: f64,
    pub tube: TubeSpec,
}

impl TubeLayout {
    pub fn block_len(&self) -> usize {
        self.n_rings + self.n_axial
    }

    pub fn segment_count(&self) -> usize {
        self.n_azimuth * self.block_len()
    }

    pub fn ring_segment(&self, ring: usize, azimuth: usize) -> usize {
        azimuth * self.block_len() + ring
    }

    pub fn axial_segment(&self, step: usize, azimuth: usize) -> usize {
        azimuth * self.block_len() + self.n_rings + step
    }

    pub fn azimuth_step(&self) -> f64 {
        2.0 * PI / self.n_azimuth as f64
    }

    /// Grid node on ring `ring` at azimuth index `azimuth`.
    pub fn node(&self, ring: usize, azimuth: usize) -> Vec3 {
        let z = -0.5 * self.tube.length + self.tube.length * ring as f64 / self.n_axial as f64;
        let phi = self.azimuth_step() * (azimuth % self.n_azimuth) as f64;
        Vec3::new(self.tube.radius * phi.cos(), self.tube.radius * phi.sin(), z)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeMesh {
    pub model: WireModel,
    pub layout: TubeLayout,
}

impl TubeMesh {
    pub fn into_model(self) -> WireModel {
        self.model
    }
}

/// Builds the closed wire grid for `tube` at `frequency`.
pub fn build_tube_mesh(tube: &TubeSpec, frequency: f64, options: &MeshOptions) -> Result<TubeMesh, GeometryError> {
    tube.validate()?;
    if !(frequency > 0.0 && frequency.is_finite()) {
        return Err(GeometryError::InvalidFrequency(frequency));
    }
    let target = options.max_pitch_wavelengths * wavelength(frequency);
    if !(target > 0.0) {
        return Err(GeometryError::InvalidMesh("pitch target must be positive".into()));
    }
    let circumference = 2.0 * PI * tube.radius;
    let mut n_azimuth = ceil_count(circumference / target).max(options.min_ring_segments.max(3));
    n_azimuth += n_azimuth % 2;
    let arc = circumference / n_azimuth as f64;
    // Square cells: the axial spacing tracks the azimuthal arc.
    let n_axial = ceil_count(tube.length / arc);
    let axial = tube.length / n_axial as f64;
    let pitch = arc.max(axial);
    let wire_radius = pitch / (2.0 * PI);
    let chord = 2.0 * tube.radius * (PI / n_azimuth as f64).sin();
    let shortest = chord.min(axial);
    if shortest / wire_radius <= MIN_LENGTH_TO_RADIUS {
        return Err(GeometryError::InvalidMesh(format!(
            "tube of radius {} m needs {n_azimuth} ring segments; segment/radius ratio {:.2} is below the thin-wire limit",
            tube.radius,
            shortest / wire_radius
        )));
    }

    let layout = TubeLayout {
        n_azimuth,
        n_rings: n_axial + 1,
        n_axial,
        pitch,
        wire_radius,
        tube: *tube,
    };
    let mut segments = Vec::with_capacity(layout.segment_count());
    let mut tag = 0u32;
    for p in 0..n_azimuth {
        for ring in 0..layout.n_rings {
            tag += 1;
            segments.push(Segment {
                start: layout.node(ring, p),
                end: layout.node(ring, p + 1),
                radius: wire_radius,
                tag,
            });
        }
        tag += 1;
        for step in 0..n_axial {
            segments.push(Segment {
                start: layout.node(step, p),
                end: layout.node(step + 1, p),
                radius: wire_radius,
                tag,
            });
        }
    }
    Ok(TubeMesh { model: WireModel { segments, ports: Vec::new() }, layout })
}

fn ceil_count(x: f64) -> usize {
    ((x - 1e-9).ceil() as usize).max(1)
}
