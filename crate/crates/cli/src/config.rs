//! TOML run configuration. All quantities are SI: meters, hertz, degrees.

use std::path::{Path, PathBuf};

use curvant_core::em::{PatternGrid, SolverOptions};
use curvant_core::geometry::{DesignBounds, DesignVariables, MeshOptions, ModelOptions, TubeSpec, VariableBounds};
use curvant_core::harness::{DESK_TRAIN_BUDGET, DESK_TRANSFER_BUDGET, FULL_TRAIN_BUDGET, FULL_TRANSFER_BUDGET};
use curvant_core::rl::AgentConfig;
use curvant_core::{RunConfig, DEFAULT_FREQUENCY};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CliConfig {
    pub seed: u64,
    /// Simulations per run. Defaults to the desk-scale budget of the command,
    /// or the full-scale one when `full_scale` is set.
    pub budget: Option<usize>,
    pub full_scale: bool,
    pub frequency_hz: f64,
    pub out_dir: PathBuf,
    /// Checkpoint to warm-start `transfer` from.
    pub checkpoint: Option<PathBuf>,
    pub tube: TubeSection,
    pub bounds: BoundsSection,
    pub agent: AgentConfig,
    pub solver: SolverSection,
    pub export: ExportSection,
    /// Design analysed by `evaluate`.
    pub design: Option<DesignSection>,
    /// Frequency sweep written by `evaluate`.
    pub sweep: Option<SweepSection>,
}

impl Default for CliConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            budget: None,
            full_scale: false,
            frequency_hz: DEFAULT_FREQUENCY,
            out_dir: PathBuf::from("curvant-out"),
            checkpoint: None,
            tube: TubeSection::default(),
            bounds: BoundsSection::default(),
            agent: AgentConfig::default(),
            solver: SolverSection::default(),
            export: ExportSection::default(),
            design: None,
            sweep: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TubeSection {
    pub radius_m: f64,
    pub length_m: f64,
}

impl Default for TubeSection {
    fn default() -> Self {
        let t = TubeSpec::default();
        Self { radius_m: t.radius, length_m: t.length }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RangeSection {
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AngleRangeSection {
    pub min: f64,
    pub max: f64,
    pub step_up: f64,
    pub step_down: f64,
}

/// The dipole range applies to all three dipoles.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsSection {
    pub d1_m: RangeSection,
    pub theta1_deg: AngleRangeSection,
    pub l3_m: RangeSection,
}

impl Default for BoundsSection {
    fn default() -> Self {
        let b = DesignBounds::default();
        Self {
            d1_m: RangeSection { min: b.d1.min, max: b.d1.max, step: b.d1.step_up },
            theta1_deg: AngleRangeSection {
                min: b.theta1.min,
                max: b.theta1.max,
                step_up: b.theta1.step_up,
                step_down: b.theta1.step_down,
            },
            l3_m: RangeSection { min: b.l3[0].min, max: b.l3[0].max, step: b.l3[0].step_up },
        }
    }
}

impl BoundsSection {
    pub fn to_bounds(&self) -> DesignBounds {
        let r = |s: &RangeSection| VariableBounds::symmetric(s.min, s.max, s.step);
        let t = &self.theta1_deg;
        DesignBounds {
            d1: r(&self.d1_m),
            theta1: VariableBounds { min: t.min, max: t.max, step_up: t.step_up, step_down: t.step_down },
            l3: [r(&self.l3_m); 3],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub reference_impedance_ohm: f64,
    pub element_radius_m: f64,
    /// Largest tube grid cell, in wavelengths.
    pub max_pitch_wavelengths: f64,
    pub min_ring_segments: usize,
    pub outward_azimuth_deg: f64,
    pub pattern_step_deg: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let s = SolverOptions::default();
        Self {
            reference_impedance_ohm: s.reference_impedance,
            element_radius_m: s.model.element_radius,
            max_pitch_wavelengths: s.model.mesh.max_pitch_wavelengths,
            min_ring_segments: s.model.mesh.min_ring_segments,
            outward_azimuth_deg: s.outward_azimuth_deg,
            pattern_step_deg: s.pattern.step_deg,
        }
    }
}

impl SolverSection {
    pub fn to_options(&self) -> SolverOptions {
        SolverOptions {
            model: ModelOptions {
                element_radius: self.element_radius_m,
                mesh: MeshOptions {
                    max_pitch_wavelengths: self.max_pitch_wavelengths,
                    min_ring_segments: self.min_ring_segments,
                },
            },
            reference_impedance: self.reference_impedance_ohm,
            outward_azimuth_deg: self.outward_azimuth_deg,
            pattern: PatternGrid { step_deg: self.pattern_step_deg },
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExportSection {
    pub metrics: bool,
    pub checkpoint: bool,
    pub summary: bool,
    pub report: bool,
    pub pattern: bool,
    pub nec: bool,
    /// Store the replay buffer in written checkpoints.
    pub keep_replay: bool,
}

impl Default for ExportSection {
    fn default() -> Self {
        Self { metrics: true, checkpoint: true, summary: true, report: true, pattern: true, nec: true, keep_replay: false }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignSection {
    pub d1_m: f64,
    pub theta1_deg: f64,
    pub l3_m: [f64; 3],
}

impl DesignSection {
    pub fn to_design(self) -> DesignVariables {
        DesignVariables { d1: self.d1_m, theta1: self.theta1_deg, l3: self.l3_m }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub start_hz: f64,
    pub stop_hz: f64,
    pub points: usize,
}

impl SweepSection {
    pub fn validate(&self) -> Result<(), CliError> {
        let ok = self.start_hz > 0.0 && self.start_hz.is_finite() && self.stop_hz.is_finite();
        if !ok || self.stop_hz < self.start_hz || self.points == 0 {
            return Err(CliError::Config(format!(
                "sweep needs 0 < start <= stop and at least one point, got [{}, {}] with {} points",
                self.start_hz, self.stop_hz, self.points
            )));
        }
        if self.points == 1 && self.stop_hz != self.start_hz {
            return Err(CliError::Config("a one-point sweep needs start = stop".into()));
        }
        Ok(())
    }

    pub fn frequencies(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start_hz];
        }
        let step = (self.stop_hz - self.start_hz) / (self.points - 1) as f64;
        (0..self.points).map(|i| if i + 1 == self.points { self.stop_hz } else { self.start_hz + step * i as f64 }).collect()
    }
}

/// Which command a run configuration is built for; picks the default budget.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Stage {
    Train,
    Transfer,
}

impl CliConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn tube_spec(&self) -> Result<TubeSpec, CliError> {
        TubeSpec::new(self.tube.radius_m, self.tube.length_m).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn budget_for(&self, stage: Stage) -> usize {
        self.budget.unwrap_or(match (stage, self.full_scale) {
            (Stage::Train, false) => DESK_TRAIN_BUDGET,
            (Stage::Train, true) => FULL_TRAIN_BUDGET,
            (Stage::Transfer, false) => DESK_TRANSFER_BUDGET,
            (Stage::Transfer, true) => FULL_TRANSFER_BUDGET,
        })
    }

    /// Validated harness configuration.
    pub fn run_config(&self, stage: Stage) -> Result<RunConfig, CliError> {
        let config = RunConfig {
            tube: self.tube_spec()?,
            bounds: self.bounds.to_bounds(),
            frequency: self.frequency_hz,
            agent: self.agent,
            solver: self.solver_options()?,
            budget: self.budget_for(stage),
            seed: self.seed,
            keep_replay: self.export.keep_replay,
            restore_replay: false,
        };
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(config)
    }

    pub fn solver_options(&self) -> Result<SolverOptions, CliError> {
        let options = self.solver.to_options();
        options.pattern.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let s = &self.solver;
        if !(s.reference_impedance_ohm > 0.0) || !(s.element_radius_m > 0.0) || !(s.max_pitch_wavelengths > 0.0) {
            return Err(CliError::Config(
                "solver reference impedance, element radius and mesh pitch must be positive".into(),
            ));
        }
        Ok(options)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let c = CliConfig::parse("").unwrap();
        assert_eq!(c, CliConfig::default());
        let run = c.run_config(Stage::Train).unwrap();
        assert_eq!(run.bounds, DesignBounds::default());
        assert_eq!(run.agent, AgentConfig::default());
        assert_eq!(run.budget, DESK_TRAIN_BUDGET);
        assert_eq!(c.budget_for(Stage::Transfer), DESK_TRANSFER_BUDGET);
    }

    #[test]
    fn full_scale_budgets() {
        let c = CliConfig::parse("full_scale = true").unwrap();
        assert_eq!(c.budget_for(Stage::Train), FULL_TRAIN_BUDGET);
        assert_eq!(c.budget_for(Stage::Transfer), FULL_TRANSFER_BUDGET);
    }

    #[test]
    fn nested_sections_parse() {
        let c = CliConfig::parse(
            r#"
            seed = 7
            budget = 100
            [tube]
            radius_m = 0.12
            [agent]
            gamma = 0.9
            [bounds.d1_m]
            min = 0.01
            max = 0.04
            step = 0.01
            [design]
            d1_m = 0.05
            theta1_deg = 25.4
            l3_m = [0.06, 0.055, 0.06]
            "#,
        )
        .unwrap();
        let run = c.run_config(Stage::Transfer).unwrap();
        assert_eq!(run.seed, 7);
        assert_eq!(run.budget, 100);
        assert_eq!(run.tube.radius, 0.12);
        assert_eq!(run.tube.length, 0.25);
        assert_eq!(run.agent.gamma, 0.9);
        assert_eq!(run.agent.batch_size, 32);
        assert_eq!(run.bounds.d1.max, 0.04);
        assert_eq!(c.design.unwrap().to_design().l3[1], 0.055);
    }

    #[test]
    fn unknown_keys_and_bad_values_rejected() {
        assert!(CliConfig::parse("sead = 1").is_err());
        assert!(CliConfig::parse("[agent]\nlearning_rat = 1.0").is_err());
        let c = CliConfig::parse("[agent]\ngamma = 1.5").unwrap();
        assert!(matches!(c.run_config(Stage::Train), Err(CliError::Config(_))));
        let c = CliConfig::parse("[tube]\nradius_m = -1.0").unwrap();
        assert!(c.run_config(Stage::Train).is_err());
        let c = CliConfig::parse("[solver]\npattern_step_deg = 7.0").unwrap();
        assert!(c.run_config(Stage::Train).is_err());
    }

    #[test]
    fn sweep_points() {
        let s = SweepSection { start_hz: 2.2e9, stop_hz: 2.7e9, points: 6 };
        let f = s.frequencies();
        assert_eq!(f.len(), 6);
        assert_eq!(f[0], 2.2e9);
        assert_eq!(f[5], 2.7e9);
        assert!((f[1] - 2.3e9).abs() < 1.0);
        assert!(SweepSection { start_hz: 2.7e9, stop_hz: 2.2e9, points: 3 }.validate().is_err());
        assert!(SweepSection { start_hz: 2.2e9, stop_hz: 2.7e9, points: 0 }.validate().is_err());
    }
}
