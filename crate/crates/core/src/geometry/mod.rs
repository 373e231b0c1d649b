//! Parametric construction of the conformal three-dipole antenna and the
//! wire grid standing in for the tube it is mounted on.
//!
//! Coordinates: the tube axis is `z`, the modeled fragment spans
//! `[-L1/2, L1/2]`, and the center dipole sits on the `+x` axis. Azimuths are
//! measured from `+x` towards `+y`.

mod design;
mod dipoles;
mod nec;
mod tube;
mod wire;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use design::{clamp_and_flag, BoundaryFlags, DesignBounds, DesignVariables, TubeSpec, Variable, VariableBounds};
pub(crate) use design::snap;
pub use dipoles::{build_dipole_wires, dipole_segment_count, straight_dipole, DIPOLE_SEGMENT_WAVELENGTHS};
pub use nec::{export_nec_deck, parse_wire_cards, PatternRequest, WireCard};
pub use tube::{build_tube_mesh, MeshOptions, TubeLayout, TubeMesh};
pub use wire::{PhaseSign, Port, Segment, WireModel, MAX_SEGMENT_WAVELENGTHS, MIN_LENGTH_TO_RADIUS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("invalid tube: {0}")]
    InvalidTube(String),
    #[error("invalid bounds: {0}")]
    InvalidBounds(String),
    #[error("{variable} = {value} lies outside [{min}, {max}]")]
    OutOfBounds { variable: Variable, value: f64, min: f64, max: f64 },
    #[error("frequency must be positive and finite, got {0}")]
    InvalidFrequency(f64),
    #[error("invalid tube mesh: {0}")]
    InvalidMesh(String),
    #[error("segment {segment} has length/radius {ratio:.3}, at or below the thin-wire limit")]
    ThinWire { segment: usize, ratio: f64 },
    #[error("dipoles overlap: arc {arc:.4e} m between elements is not wider than their diameter {diameter:.4e} m")]
    Overlap { arc: f64, diameter: f64 },
    #[error("invalid wire model: {0}")]
    InvalidModel(String),
    #[error("deck line {line}: {message}")]
    Deck { line: usize, message: String },
}

/// Everything besides the design variables that shapes the wire model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelOptions {
    /// Dipole wire radius in meters.
    pub element_radius: f64,
    pub mesh: MeshOptions,
}

impl Default for ModelOptions {
    fn default() -> Self {
        Self { element_radius: 1e-3, mesh: MeshOptions::default() }
    }
}

/// Tube mesh followed by the three dipoles, with the default options.
pub fn assemble_model(vars: &DesignVariables, tube: &TubeSpec, frequency: f64) -> Result<WireModel, GeometryError> {
    assemble_model_with(vars, tube, frequency, &ModelOptions::default())
}

pub fn assemble_model_with(
    vars: &DesignVariables,
    tube: &TubeSpec,
    frequency: f64,
    options: &ModelOptions,
) -> Result<WireModel, GeometryError> {
    let mut model = build_tube_mesh(tube, frequency, &options.mesh)?.into_model();
    let dipoles = build_dipole_wires(vars, tube, options.element_radius, frequency)?;
    model.append(&dipoles);
    model.validate(frequency)?;
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavelength;

    const F: f64 = 2.45e9;

    fn table_three() -> DesignVariables {
        DesignVariables { d1: 0.05, theta1: 25.4, l3: [0.06, 0.055, 0.06] }
    }

    #[test]
    fn assembled_model_has_three_ports() {
        let model = assemble_model(&table_three(), &TubeSpec::default(), F).unwrap();
        assert_eq!(model.ports.len(), 3);
    }

    #[test]
    fn assembly_is_deterministic_union() {
        let tube = TubeSpec::default();
        let a = assemble_model(&table_three(), &tube, F).unwrap();
        let b = assemble_model(&table_three(), &tube, F).unwrap();
        assert_eq!(a, b);
        let mesh = build_tube_mesh(&tube, F, &MeshOptions::default()).unwrap();
        let dipoles = build_dipole_wires(&table_three(), &tube, 1e-3, F).unwrap();
        assert_eq!(a.segment_count(), mesh.model.segment_count() + dipoles.segment_count());
        for (port, dp) in a.ports.iter().zip(&dipoles.ports) {
            assert_eq!(port.segment, dp.segment + mesh.model.segment_count());
            assert_eq!(port.sign, dp.sign);
        }
    }

    #[test]
    fn deck_structure() {
        let model = assemble_model(&table_three(), &TubeSpec::default(), F).unwrap();
        let deck = export_nec_deck(&model, F, &PatternRequest::default());
        let lines: Vec<&str> = deck.lines().collect();
        assert!(lines[0].starts_with("CM"));
        assert_eq!(*lines.last().unwrap(), "EN");
        assert_eq!(lines.iter().filter(|l| l.starts_with("EX")).count(), 3);
        assert_eq!(lines.iter().filter(|l| l.starts_with("GE")).count(), 1);
        let fr = lines.iter().find(|l| l.starts_with("FR")).unwrap();
        assert!(fr.contains("2.450000E3"), "{fr}");
        let ex: Vec<&str> = lines.iter().filter(|l| l.starts_with("EX")).copied().collect();
        assert!(ex[1].contains("-1.000000E0"));
    }

    #[test]
    fn deck_round_trips_segment_endpoints() {
        let model = assemble_model(&table_three(), &TubeSpec::default(), F).unwrap();
        let deck = export_nec_deck(&model, F, &PatternRequest::default());
        let cards = parse_wire_cards(&deck).unwrap();
        let rebuilt: Vec<_> = cards.iter().flat_map(|c| c.segment_endpoints()).collect();
        assert_eq!(rebuilt.len(), model.segment_count());
        let scale = 0.25;
        for (seg, (start, end)) in model.segments.iter().zip(rebuilt) {
            // six significant digits relative to the model extent
            assert!((seg.start - start).norm() < 1e-6 * scale);
            assert!((seg.end - end).norm() < 1e-6 * scale);
        }
    }

    #[test]
    fn in_bounds_models_are_valid() {
        let bounds = DesignBounds::default();
        let tube = TubeSpec::default();
        for d1 in bounds.d1.lattice() {
            for theta1 in [10.0, 25.4, 90.0] {
                for l in [0.01, 0.015, 0.02, 0.0625, 0.15] {
                    let vars = DesignVariables { d1, theta1, l3: [l, 0.06, l] };
                    let model = assemble_model(&vars, &tube, F).unwrap();
                    for seg in &model.segments {
                        assert!(seg.length() / seg.radius > MIN_LENGTH_TO_RADIUS);
                        assert!(seg.length() <= wavelength(F) / 10.0);
                    }
                }
            }
        }
    }
}
