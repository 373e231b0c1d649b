//! Thin-wire method-of-moments solver.
//!
//! Pulse currents on straight segments, node-centered charge cells, the
//! reduced kernel, and Galerkin testing with the same pulses (see [`fill`]).
//! Ports are delta-gap sources on segments. The tube mesh is solved through
//! its block-circulant structure ([`circulant`]), so a design evaluation only
//! factors a small system the size of the dipoles.

mod circulant;
pub mod fill;
mod farfield;
pub mod kernel;
pub mod matrix;
mod metrics;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use circulant::TubeOperator;
pub use farfield::{
    direction, far_field, gain_difference, gain_toward, port_input_power, FarFieldPattern, PatternGrid, MAX_GRID_STEP,
};
pub use fill::{coupling_block, fill_impedance_matrix, self_block, Topology, WireSet};
pub use matrix::{relative_residual, solve_currents, ComplexMatrix, LuFactors, RESIDUAL_TOLERANCE};
pub use metrics::{impedance_angle, port_input_impedance, vswr, ComplexImpedance};

use crate::geometry::{build_dipole_wires, build_tube_mesh, DesignVariables, GeometryError, ModelOptions, TubeSpec, WireModel};
use crate::SPEED_OF_LIGHT;

/// Free-space wave impedance `μ₀c`, Ω.
pub const FREE_SPACE_IMPEDANCE: f64 = 4.0e-7 * PI * SPEED_OF_LIGHT;

pub fn wave_number(frequency: f64) -> f64 {
    2.0 * PI * frequency / SPEED_OF_LIGHT
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmError {
    #[error("impedance matrix is singular (pivot ratio {condition_estimate:.3e})")]
    Singular { condition_estimate: f64 },
    #[error("solve did not converge: residual {residual:.3e}, pivot ratio {condition_estimate:.3e}")]
    Residual { residual: f64, condition_estimate: f64 },
    #[error("dimension mismatch: {rows}x{cols} system with right-hand side of length {rhs}")]
    Dimension { rows: usize, cols: usize, rhs: usize },
    #[error("total port current is zero")]
    NoPortCurrent,
    #[error("invalid pattern grid: {0}")]
    Grid(String),
    #[error("invalid model: {0}")]
    Model(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Scalar figures of merit of one design.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EMSummary {
    pub z_in: ComplexImpedance,
    pub vswr: f64,
    /// Impedance angle magnitude, degrees.
    pub phi_deg: f64,
    /// Outward minus backward gain at zero elevation, dB.
    pub g_diff_db: f64,
}

/// Full solver output for one design.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EMReport {
    pub z_in: ComplexImpedance,
    pub vswr: f64,
    pub phi_deg: f64,
    pub g_diff_db: f64,
    pub pattern: FarFieldPattern,
}

impl EMReport {
    pub fn summary(&self) -> EMSummary {
        EMSummary { z_in: self.z_in, vswr: self.vswr, phi_deg: self.phi_deg, g_diff_db: self.g_diff_db }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub model: ModelOptions,
    /// VSWR reference, Ω.
    pub reference_impedance: f64,
    /// Azimuth of the outward normal used for the gain difference, degrees.
    pub outward_azimuth_deg: f64,
    pub pattern: PatternGrid,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            model: ModelOptions::default(),
            reference_impedance: 50.0,
            outward_azimuth_deg: 0.0,
            pattern: PatternGrid::default(),
        }
    }
}

/// Currents of a solved design on the assembled model (tube then dipoles).
#[derive(Clone, Debug)]
pub struct Solution {
    pub model: WireModel,
    pub currents: Vec<Complex64>,
    pub z_in: ComplexImpedance,
    pub input_power: f64,
}

/// Evaluates designs on one tube at one frequency. The tube system is
/// factored once at construction; the evaluator is immutable afterwards and
/// can be shared between threads.
#[derive(Clone, Debug)]
pub struct Evaluator {
    tube: TubeSpec,
    frequency: f64,
    options: SolverOptions,
    tube_model: WireModel,
    tube_set: WireSet,
    tube_op: TubeOperator,
}

impl Evaluator {
    pub fn new(tube: &TubeSpec, frequency: f64, options: SolverOptions) -> Result<Self, EmError> {
        if !(options.reference_impedance > 0.0) {
            return Err(EmError::Model("reference impedance must be positive".into()));
        }
        options.pattern.validate()?;
        let mesh = build_tube_mesh(tube, frequency, &options.model.mesh)?;
        let tube_set = WireSet::tube(mesh.model.segments.clone(), &mesh.layout);
        let tube_op = TubeOperator::new(&tube_set, &mesh.layout, frequency)?;
        Ok(Self { tube: *tube, frequency, options, tube_model: mesh.model, tube_set, tube_op })
    }

    pub fn tube(&self) -> &TubeSpec {
        &self.tube
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    pub fn tube_segment_count(&self) -> usize {
        self.tube_set.len()
    }

    /// Solves the coupled tube + dipole system for `vars`.
    pub fn solve(&self, vars: &DesignVariables) -> Result<Solution, EmError> {
        let f = self.frequency;
        let dipoles = build_dipole_wires(vars, &self.tube, self.options.model.element_radius, f)?;
        let dip_set = WireSet::new(dipoles.segments.clone())?;
        let z_dd = self_block(&dip_set, f);
        let z_td = coupling_block(&self.tube_set, &dip_set, f);
        let nd = dip_set.len();
        let nt = self.tube_set.len();
        // X = T⁻¹ Z_td, column by column.
        let mut x = ComplexMatrix::zeros(nt, nd);
        for j in 0..nd {
            let col = self.tube_op.solve(&z_td.column(j));
            for (i, v) in col.into_iter().enumerate() {
                x[(i, j)] = v;
            }
        }
        // Schur complement on the dipoles: S = Z_dd − Z_tdᵀ X.
        let correction = z_td.transpose_mul(&x);
        let schur = ComplexMatrix::from_fn(nd, nd, |i, j| z_dd[(i, j)] - correction[(i, j)]);
        let mut excitation = vec![Complex64::new(0.0, 0.0); nd];
        for port in &dipoles.ports {
            excitation[port.segment] = Complex64::new(port.sign.value(), 0.0);
        }
        let i_dip = solve_currents(&schur, &excitation)?;
        let i_tube = x.mul_vec(&i_dip);

        let mut model = self.tube_model.clone();
        model.append(&dipoles);
        let mut currents: Vec<Complex64> = i_tube.into_iter().map(|c| -c).collect();
        currents.extend_from_slice(&i_dip);
        let z_in = port_input_impedance(&model, &currents)?;
        let input_power = port_input_power(&model, &currents);
        if !(input_power > 0.0) || !z_in.re.is_finite() || !z_in.im.is_finite() {
            return Err(EmError::Model(format!("non-physical solution, input power {input_power:e} W")));
        }
        Ok(Solution { model, currents, z_in, input_power })
    }

    fn metrics(&self, solution: &Solution) -> EMSummary {
        let gain = |az: f64| {
            gain_toward(&solution.model.segments, &solution.currents, self.frequency, solution.input_power, 0.0, az)
        };
        let az = self.options.outward_azimuth_deg;
        EMSummary {
            z_in: solution.z_in,
            vswr: vswr(solution.z_in, self.options.reference_impedance),
            phi_deg: impedance_angle(solution.z_in),
            g_diff_db: gain(az) - gain(az + 180.0),
        }
    }

    /// Impedance, VSWR, angle, and gain difference without a full pattern.
    pub fn summary(&self, vars: &DesignVariables) -> Result<EMSummary, EmError> {
        let solution = self.solve(vars)?;
        Ok(self.metrics(&solution))
    }

    /// Full report including the far-field pattern.
    pub fn report(&self, vars: &DesignVariables) -> Result<EMReport, EmError> {
        let solution = self.solve(vars)?;
        Ok(self.report_from(&solution))
    }

    pub fn report_from(&self, solution: &Solution) -> EMReport {
        let pattern = farfield::sample_pattern(
            &solution.model.segments,
            &solution.currents,
            self.frequency,
            solution.input_power,
            &self.options.pattern,
        );
        let s = self.metrics(solution);
        EMReport {
            z_in: s.z_in,
            vswr: s.vswr,
            phi_deg: s.phi_deg,
            g_diff_db: gain_difference(&pattern, self.options.outward_azimuth_deg),
            pattern,
        }
    }
}

/// Assembles, solves, and reports one design with default solver options.
pub fn evaluate_design(vars: &DesignVariables, tube: &TubeSpec, frequency: f64) -> Result<EMReport, EmError> {
    Evaluator::new(tube, frequency, SolverOptions::default())?.report(vars)
}

/// Dense solve of a free-standing wire model with unit port excitation.
pub fn solve_model(model: &WireModel, frequency: f64) -> Result<Solution, EmError> {
    let z = fill_impedance_matrix(model, frequency)?;
    let mut excitation = vec![Complex64::new(0.0, 0.0); model.segment_count()];
    for port in &model.ports {
        excitation[port.segment] = Complex64::new(port.sign.value(), 0.0);
    }
    let currents = solve_currents(&z, &excitation)?;
    let z_in = port_input_impedance(model, &currents)?;
    let input_power = port_input_power(model, &currents);
    Ok(Solution { model: model.clone(), currents, z_in, input_power })
}
