//! Design variables, their bounds, and the saturating bookkeeping around them.

use std::fmt;

use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Resolution every design value is snapped to after an update (1 nm, or
/// 1 µ-millidegree for the angle). Keeps revisited lattice points bit-identical
/// no matter which sequence of steps reached them.
const SNAP: f64 = 1e9;

pub(crate) fn snap(value: f64) -> f64 {
    (value * SNAP).round() / SNAP
}

/// The conductive tube the array is mounted on. The tube axis is `z` and the
/// modeled fragment is centered at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TubeSpec {
    /// Tube radius in meters.
    pub radius: f64,
    /// Length of the modeled tube fragment in meters.
    pub length: f64,
}

impl TubeSpec {
    pub fn new(radius: f64, length: f64) -> Result<Self, GeometryError> {
        let tube = Self { radius, length };
        tube.validate()?;
        Ok(tube)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        if !(self.radius > 0.0 && self.radius.is_finite()) {
            return Err(GeometryError::InvalidTube(format!("radius must be > 0, got {}", self.radius)));
        }
        if !(self.length > 0.0 && self.length.is_finite()) {
            return Err(GeometryError::InvalidTube(format!("length must be > 0, got {}", self.length)));
        }
        Ok(())
    }
}

impl Default for TubeSpec {
    /// 10 cm radius, 25 cm modeled length.
    fn default() -> Self {
        Self { radius: 0.10, length: 0.25 }
    }
}

/// One of the five adjustable antenna dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Variable {
    /// Dipole-to-tube spacing.
    D1,
    /// Angular separation between adjacent dipole planes.
    Theta1,
    /// Total length of dipole `i`.
    L3(usize),
}

impl Variable {
    pub const ALL: [Variable; 5] = [
        Variable::D1,
        Variable::Theta1,
        Variable::L3(0),
        Variable::L3(1),
        Variable::L3(2),
    ];

    pub fn index(self) -> usize {
        match self {
            Variable::D1 => 0,
            Variable::Theta1 => 1,
            Variable::L3(i) => 2 + i,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variable::D1 => "d1",
            Variable::Theta1 => "theta1",
            Variable::L3(0) => "l3_0",
            Variable::L3(1) => "l3_1",
            Variable::L3(_) => "l3_2",
        }
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Mutable antenna dimensions (SI meters, angle in degrees).
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignVariables {
    pub d1: f64,
    pub theta1: f64,
    pub l3: [f64; 3],
}

impl DesignVariables {
    pub fn get(&self, var: Variable) -> f64 {
        match var {
            Variable::D1 => self.d1,
            Variable::Theta1 => self.theta1,
            Variable::L3(i) => self.l3[i],
        }
    }

    pub fn set(&mut self, var: Variable, value: f64) {
        match var {
            Variable::D1 => self.d1 = value,
            Variable::Theta1 => self.theta1 = value,
            Variable::L3(i) => self.l3[i] = value,
        }
    }

    pub fn to_array(&self) -> [f64; 5] {
        [self.d1, self.theta1, self.l3[0], self.l3[1], self.l3[2]]
    }

    /// Bit pattern of all five values; equal keys mean equal designs.
    pub fn key(&self) -> [u64; 5] {
        self.to_array().map(f64::to_bits)
    }
}

/// Range and step sizes of one design variable.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariableBounds {
    pub min: f64,
    pub max: f64,
    pub step_up: f64,
    pub step_down: f64,
}

impl VariableBounds {
    pub const fn symmetric(min: f64, max: f64, step: f64) -> Self {
        Self { min, max, step_up: step, step_down: step }
    }

    pub fn span(&self) -> f64 {
        self.max - self.min
    }

    /// Values reachable from `min` by whole increments, `max` included when
    /// the span is a whole number of increments.
    pub fn lattice(&self) -> Vec<f64> {
        let count = (self.span() / self.step_up + 1e-9).floor() as usize;
        (0..=count).map(|k| snap(self.min + k as f64 * self.step_up).min(self.max)).collect()
    }

    pub fn clamp(&self, value: f64) -> f64 {
        if value.is_nan() {
            self.min
        } else {
            value.clamp(self.min, self.max)
        }
    }
}

/// Bounds and steps for all five design variables.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignBounds {
    pub d1: VariableBounds,
    pub theta1: VariableBounds,
    pub l3: [VariableBounds; 3],
}

impl Default for DesignBounds {
    /// D1 in [1, 5] cm by 1 cm, each dipole in [1, 15] cm by 5 mm, and the
    /// angle in [10°, 90°] with +1° / −0.286° steps.
    fn default() -> Self {
        let l3 = VariableBounds::symmetric(0.01, 0.15, 0.005);
        Self {
            d1: VariableBounds::symmetric(0.01, 0.05, 0.01),
            theta1: VariableBounds { min: 10.0, max: 90.0, step_up: 1.0, step_down: 0.286 },
            l3: [l3; 3],
        }
    }
}

impl DesignBounds {
    pub fn get(&self, var: Variable) -> &VariableBounds {
        match var {
            Variable::D1 => &self.d1,
            Variable::Theta1 => &self.theta1,
            Variable::L3(i) => &self.l3[i],
        }
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        for var in Variable::ALL {
            let b = self.get(var);
            let finite = [b.min, b.max, b.step_up, b.step_down].iter().all(|v| v.is_finite());
            if !finite || b.min >= b.max {
                return Err(GeometryError::InvalidBounds(format!("{var}: need min < max")));
            }
            if b.step_up <= 0.0 || b.step_down <= 0.0 {
                return Err(GeometryError::InvalidBounds(format!("{var}: steps must be positive")));
            }
            if var != Variable::Theta1 && b.step_up != b.step_down {
                return Err(GeometryError::InvalidBounds(format!(
                    "{var}: only theta1 may use distinct increment and decrement steps"
                )));
            }
        }
        Ok(())
    }

    /// Fails with the first variable lying outside its range.
    pub fn check(&self, vars: &DesignVariables) -> Result<(), GeometryError> {
        for var in Variable::ALL {
            let b = self.get(var);
            let value = vars.get(var);
            if !(value >= b.min && value <= b.max) {
                return Err(GeometryError::OutOfBounds { variable: var, value, min: b.min, max: b.max });
            }
        }
        Ok(())
    }

    /// Midpoint of every range, snapped onto the increment lattice.
    pub fn center(&self) -> DesignVariables {
        let mut vars = DesignVariables { d1: 0.0, theta1: 0.0, l3: [0.0; 3] };
        for var in Variable::ALL {
            let lattice = self.get(var).lattice();
            vars.set(var, lattice[lattice.len() / 2]);
        }
        vars
    }
}

/// At-min / at-max flags for the five variables, ordered
/// `(D1, θ1, L3,0, L3,1, L3,2)` with the at-min flag first in each pair.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryFlags(pub [bool; 10]);

impl BoundaryFlags {
    pub fn at_min(&self, var: Variable) -> bool {
        self.0[2 * var.index()]
    }

    pub fn at_max(&self, var: Variable) -> bool {
        self.0[2 * var.index() + 1]
    }

    pub fn any(&self) -> bool {
        self.0.iter().any(|&f| f)
    }
}

/// Saturates every variable into its range and reports which ones sit on a
/// bound.
pub fn clamp_and_flag(vars: &DesignVariables, bounds: &DesignBounds) -> (DesignVariables, BoundaryFlags) {
    let mut out = *vars;
    let mut flags = [false; 10];
    for var in Variable::ALL {
        let b = bounds.get(var);
        let value = b.clamp(vars.get(var));
        out.set(var, value);
        flags[2 * var.index()] = value <= b.min;
        flags[2 * var.index() + 1] = value >= b.max;
    }
    (out, BoundaryFlags(flags))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interior() -> DesignVariables {
        DesignVariables { d1: 0.03, theta1: 40.0, l3: [0.06, 0.055, 0.06] }
    }

    #[test]
    fn d1_at_max_sets_flag() {
        let bounds = DesignBounds::default();
        let vars = DesignVariables { d1: 0.05, ..interior() };
        let (out, flags) = clamp_and_flag(&vars, &bounds);
        assert_eq!(out.d1, 0.05);
        assert!(flags.at_max(Variable::D1));
        assert!(!flags.at_min(Variable::D1));
    }

    #[test]
    fn interior_point_has_no_flags() {
        let (out, flags) = clamp_and_flag(&interior(), &DesignBounds::default());
        assert_eq!(out, interior());
        assert_eq!(flags, BoundaryFlags([false; 10]));
    }

    #[test]
    fn over_max_saturates() {
        let vars = DesignVariables { d1: 0.06, ..interior() };
        let (out, flags) = clamp_and_flag(&vars, &DesignBounds::default());
        assert_eq!(out.d1, 0.05);
        assert!(flags.at_max(Variable::D1));
    }

    #[test]
    fn nan_saturates_to_min() {
        let vars = DesignVariables { theta1: f64::NAN, ..interior() };
        let (out, flags) = clamp_and_flag(&vars, &DesignBounds::default());
        assert_eq!(out.theta1, 10.0);
        assert!(flags.at_min(Variable::Theta1));
    }

    #[test]
    fn default_bounds_are_well_formed() {
        let bounds = DesignBounds::default();
        bounds.validate().unwrap();
        assert_eq!(bounds.d1.lattice(), vec![0.01, 0.02, 0.03, 0.04, 0.05]);
        assert_eq!(bounds.l3[0].lattice().len(), 29);
        assert_eq!(bounds.theta1.lattice().len(), 81);
        assert_eq!(*bounds.l3[2].lattice().last().unwrap(), 0.15);
    }

    #[test]
    fn asymmetric_steps_rejected_outside_theta() {
        let mut bounds = DesignBounds::default();
        bounds.d1.step_down = 0.005;
        assert!(bounds.validate().is_err());
        let mut bounds = DesignBounds::default();
        bounds.l3[1].min = 0.2;
        assert!(bounds.validate().is_err());
    }

    #[test]
    fn check_names_the_violated_variable() {
        let vars = DesignVariables { l3: [0.06, 0.2, 0.06], ..interior() };
        let err = DesignBounds::default().check(&vars).unwrap_err();
        assert!(err.to_string().contains("l3_1"), "{err}");
    }
}
