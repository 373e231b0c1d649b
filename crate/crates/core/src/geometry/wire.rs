use serde::{Deserialize, Serialize};

use super::GeometryError;
use crate::vec3::Vec3;
use crate::wavelength;

/// Straight thin-wire segment. Segments sharing a `tag` form one straight,
/// evenly subdivided wire (a single NEC `GW` card).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub start: Vec3,
    pub end: Vec3,
    pub radius: f64,
    pub tag: u32,
}

impl Segment {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn center(&self) -> Vec3 {
        self.start.lerp(self.end, 0.5)
    }

    pub fn direction(&self) -> Vec3 {
        (self.end - self.start).normalized()
    }
}

/// Excitation polarity of a port. Dipoles fed through a half-wave line see
/// an inverted source.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PhaseSign {
    Plus,
    Minus,
}

impl PhaseSign {
    pub fn value(self) -> f64 {
        match self {
            PhaseSign::Plus => 1.0,
            PhaseSign::Minus => -1.0,
        }
    }

    /// `Plus` for even indices, `Minus` for odd ones.
    pub fn alternating(index: usize) -> Self {
        if index % 2 == 0 {
            PhaseSign::Plus
        } else {
            PhaseSign::Minus
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub segment: usize,
    pub sign: PhaseSign,
}

/// Segmented wire geometry with its feed ports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct WireModel {
    pub segments: Vec<Segment>,
    pub ports: Vec<Port>,
}

/// Smallest segment-length-to-radius ratio for which the thin-wire kernel is
/// trusted.
pub const MIN_LENGTH_TO_RADIUS: f64 = 4.0;

/// Longest allowed segment, in wavelengths.
pub const MAX_SEGMENT_WAVELENGTHS: f64 = 0.1;

impl WireModel {
    pub fn segment_count(&self) -> usize {
        self.segments.len()
    }

    pub fn max_tag(&self) -> u32 {
        self.segments.iter().map(|s| s.tag).max().unwrap_or(0)
    }

    /// Appends `other`, shifting its tags and port indices past ours.
    pub fn append(&mut self, other: &WireModel) {
        let tag_offset = self.max_tag();
        let index_offset = self.segments.len();
        self.segments
            .extend(other.segments.iter().map(|s| Segment { tag: s.tag + tag_offset, ..*s }));
        self.ports
            .extend(other.ports.iter().map(|p| Port { segment: p.segment + index_offset, ..*p }));
    }

    /// Checks segment lengths, thin-wire validity at `frequency`, and ports.
    pub fn validate(&self, frequency: f64) -> Result<(), GeometryError> {
        let max_len = MAX_SEGMENT_WAVELENGTHS * wavelength(frequency) * (1.0 + 1e-9);
        for (i, seg) in self.segments.iter().enumerate() {
            let len = seg.length();
            if !(len > 0.0) {
                return Err(GeometryError::InvalidModel(format!("segment {i} has zero length")));
            }
            if !(seg.radius > 0.0) || len / seg.radius <= MIN_LENGTH_TO_RADIUS {
                return Err(GeometryError::ThinWire {
                    segment: i,
                    ratio: len / seg.radius,
                });
            }
            if len > max_len {
                return Err(GeometryError::InvalidModel(format!(
                    "segment {i} is {len:.4e} m, longer than a tenth of a wavelength"
                )));
            }
        }
        for port in &self.ports {
            if port.segment >= self.segments.len() {
                return Err(GeometryError::InvalidModel(format!(
                    "port on segment {} but model has {} segments",
                    port.segment,
                    self.segments.len()
                )));
            }
        }
        Ok(())
    }

    /// Contiguous runs of segments sharing a tag, as index ranges.
    pub fn tag_groups(&self) -> Vec<std::ops::Range<usize>> {
        let mut groups = Vec::new();
        let mut start = 0;
        for i in 1..=self.segments.len() {
            if i == self.segments.len() || self.segments[i].tag != self.segments[start].tag {
                if i > start {
                    groups.push(start..i);
                }
                start = i;
            }
        }
        groups
    }
}
