//! Far-field radiation of segment currents, pattern grids, and gain
//! difference.
//!
//! Angles are elevation above the plane normal to the tube axis (`z`) and
//! azimuth from `+x` towards `+y`, both in degrees.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{wave_number, EmError, FREE_SPACE_IMPEDANCE};
use crate::geometry::{Segment, WireModel};
use crate::vec3::Vec3;

/// Gains below this are reported as this (−300 dBi).
const GAIN_FLOOR: f64 = 1e-30;

/// Coarsest accepted grid spacing, degrees.
pub const MAX_GRID_STEP: f64 = 10.0;

/// Regular angular grid. Elevation rows sit at multiples of `step` strictly
/// between the poles; each pole is one extra sample.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternGrid {
    pub step_deg: f64,
}

impl Default for PatternGrid {
    fn default() -> Self {
        Self { step_deg: 5.0 }
    }
}

impl PatternGrid {
    pub fn new(step_deg: f64) -> Result<Self, EmError> {
        let grid = Self { step_deg };
        grid.validate()?;
        Ok(grid)
    }

    pub fn validate(&self) -> Result<(), EmError> {
        let s = self.step_deg;
        if !(s > 0.0 && s <= MAX_GRID_STEP) {
            return Err(EmError::Grid(format!("grid step {s}° must lie in (0°, {MAX_GRID_STEP}°]")));
        }
        let per_quadrant = 90.0 / s;
        if (per_quadrant - per_quadrant.round()).abs() > 1e-9 {
            return Err(EmError::Grid(format!("grid step {s}° must divide 90°")));
        }
        Ok(())
    }

    fn rows(&self) -> usize {
        (180.0 / self.step_deg).round() as usize - 1
    }

    fn columns(&self) -> usize {
        (360.0 / self.step_deg).round() as usize
    }
}

/// Unit vector towards `(elevation, azimuth)` in degrees.
pub fn direction(elevation_deg: f64, azimuth_deg: f64) -> Vec3 {
    let (se, ce) = elevation_deg.to_radians().sin_cos();
    let (sa, ca) = azimuth_deg.to_radians().sin_cos();
    Vec3::new(ce * ca, ce * sa, se)
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0
    } else {
        x.sin() / x
    }
}

/// Radiation vector `Σ I L t̂ exp(jk r̂·c) sinc(k L r̂·t̂ / 2)` of pulse currents.
fn radiation_vector(segments: &[Segment], currents: &[Complex64], k: f64, dir: Vec3) -> [Complex64; 3] {
    let mut acc = [Complex64::new(0.0, 0.0); 3];
    for (seg, &current) in segments.iter().zip(currents) {
        let len = seg.length();
        let t = (seg.end - seg.start) * (1.0 / len);
        let phase = Complex64::from_polar(1.0, k * dir.dot(seg.center()));
        let weight = current * phase * (len * sinc(0.5 * k * len * dir.dot(t)));
        acc[0] += weight * t.x;
        acc[1] += weight * t.y;
        acc[2] += weight * t.z;
    }
    acc
}

/// Linear gain towards `dir` given the power accepted at the ports.
fn linear_gain(segments: &[Segment], currents: &[Complex64], k: f64, dir: Vec3, input_power: f64) -> f64 {
    let a = radiation_vector(segments, currents, k, dir);
    let total = a.iter().map(|c| c.norm_sqr()).sum::<f64>();
    let radial = (a[0] * dir.x + a[1] * dir.y + a[2] * dir.z).norm_sqr();
    let transverse = (total - radial).max(0.0);
    let intensity = FREE_SPACE_IMPEDANCE * k * k * transverse / (32.0 * PI * PI);
    4.0 * PI * intensity / input_power
}

fn to_dbi(gain: f64) -> f64 {
    10.0 * gain.max(GAIN_FLOOR).log10()
}

/// Gain in dBi towards `(elevation, azimuth)`.
pub fn gain_toward(
    segments: &[Segment],
    currents: &[Complex64],
    frequency: f64,
    input_power: f64,
    elevation_deg: f64,
    azimuth_deg: f64,
) -> f64 {
    let k = wave_number(frequency);
    to_dbi(linear_gain(segments, currents, k, direction(elevation_deg, azimuth_deg), input_power))
}

/// Gains sampled over the whole sphere.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FarFieldPattern {
    pub step_deg: f64,
    pub elevations_deg: Vec<f64>,
    pub azimuths_deg: Vec<f64>,
    /// Row-major `elevations × azimuths`.
    pub gains_dbi: Vec<f64>,
    pub south_pole_dbi: f64,
    pub north_pole_dbi: f64,
}

impl FarFieldPattern {
    pub fn gain(&self, row: usize, col: usize) -> f64 {
        self.gains_dbi[row * self.azimuths_deg.len() + col]
    }

    pub fn max_gain(&self) -> f64 {
        self.gains_dbi
            .iter()
            .copied()
            .chain([self.south_pole_dbi, self.north_pole_dbi])
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Every sample as `(elevation, azimuth, gain)`, poles last.
    pub fn samples(&self) -> Vec<(f64, f64, f64)> {
        let mut out = Vec::with_capacity(self.gains_dbi.len() + 2);
        for (r, &el) in self.elevations_deg.iter().enumerate() {
            for (c, &az) in self.azimuths_deg.iter().enumerate() {
                out.push((el, az, self.gain(r, c)));
            }
        }
        out.push((-90.0, 0.0, self.south_pole_dbi));
        out.push((90.0, 0.0, self.north_pole_dbi));
        out
    }

    /// Gain in dBi at an arbitrary direction, bilinear in (elevation,
    /// azimuth) over the grid with the poles as constant rows.
    pub fn gain_at(&self, elevation_deg: f64, azimuth_deg: f64) -> f64 {
        let step = self.step_deg;
        let cols = self.azimuths_deg.len();
        let el = elevation_deg.clamp(-90.0, 90.0);
        let az = azimuth_deg.rem_euclid(360.0);
        // Extended row index: 0 is the south pole, rows + 1 the north pole.
        let pos = (el + 90.0) / step;
        let lower = (pos.floor() as usize).min(self.elevations_deg.len());
        let te = pos - lower as f64;
        let col_pos = az / step;
        let c0 = (col_pos.floor() as usize) % cols;
        let c1 = (c0 + 1) % cols;
        let ta = col_pos - col_pos.floor();
        let row_value = |ext: usize, c: usize| -> f64 {
            if ext == 0 {
                self.south_pole_dbi
            } else if ext > self.elevations_deg.len() {
                self.north_pole_dbi
            } else {
                self.gain(ext - 1, c)
            }
        };
        let along = |ext: usize| row_value(ext, c0) * (1.0 - ta) + row_value(ext, c1) * ta;
        if te == 0.0 {
            along(lower)
        } else {
            along(lower) * (1.0 - te) + along(lower + 1) * te
        }
    }

    /// `(1/4π) ∮ G dΩ`: radiated over accepted power, by spherical cell
    /// quadrature.
    pub fn radiated_fraction(&self) -> f64 {
        let step = self.step_deg.to_radians();
        let half = 0.5 * step;
        let mut sum = 0.0;
        for (r, &el) in self.elevations_deg.iter().enumerate() {
            let e = el.to_radians();
            let band = ((e + half).sin() - (e - half).sin()) * step;
            let row: f64 = (0..self.azimuths_deg.len()).map(|c| 10f64.powf(self.gain(r, c) / 10.0)).sum();
            sum += row * band;
        }
        let cap = 2.0 * PI * (1.0 - half.cos());
        sum += cap * (10f64.powf(self.south_pole_dbi / 10.0) + 10f64.powf(self.north_pole_dbi / 10.0));
        sum / (4.0 * PI)
    }
}

/// Time-averaged power accepted by the model's ports under unit-magnitude
/// excitation with their phase signs.
pub fn port_input_power(model: &WireModel, currents: &[Complex64]) -> f64 {
    0.5 * model.ports.iter().map(|p| (currents[p.segment] * p.sign.value()).re).sum::<f64>()
}

/// Samples the gain of solved currents over `grid`.
pub fn far_field(
    model: &WireModel,
    currents: &[Complex64],
    frequency: f64,
    grid: &PatternGrid,
) -> Result<FarFieldPattern, EmError> {
    grid.validate()?;
    if currents.len() != model.segment_count() {
        return Err(EmError::Dimension { rows: model.segment_count(), cols: 1, rhs: currents.len() });
    }
    let input_power = port_input_power(model, currents);
    if !(input_power > 0.0) {
        return Err(EmError::Model(format!("ports accept no power ({input_power:e} W)")));
    }
    Ok(sample_pattern(&model.segments, currents, frequency, input_power, grid))
}

pub(crate) fn sample_pattern(
    segments: &[Segment],
    currents: &[Complex64],
    frequency: f64,
    input_power: f64,
    grid: &PatternGrid,
) -> FarFieldPattern {
    let k = wave_number(frequency);
    let step = grid.step_deg;
    let elevations_deg: Vec<f64> = (1..=grid.rows()).map(|i| -90.0 + i as f64 * step).collect();
    let azimuths_deg: Vec<f64> = (0..grid.columns()).map(|i| i as f64 * step).collect();
    let mut gains_dbi = Vec::with_capacity(elevations_deg.len() * azimuths_deg.len());
    for &el in &elevations_deg {
        for &az in &azimuths_deg {
            gains_dbi.push(to_dbi(linear_gain(segments, currents, k, direction(el, az), input_power)));
        }
    }
    let pole = |el: f64| to_dbi(linear_gain(segments, currents, k, direction(el, 0.0), input_power));
    FarFieldPattern {
        step_deg: step,
        elevations_deg,
        azimuths_deg,
        gains_dbi,
        south_pole_dbi: pole(-90.0),
        north_pole_dbi: pole(90.0),
    }
}

/// Gain towards `outward_azimuth` minus gain towards the opposite azimuth,
/// both at zero elevation.
pub fn gain_difference(pattern: &FarFieldPattern, outward_azimuth_deg: f64) -> f64 {
    pattern.gain_at(0.0, outward_azimuth_deg) - pattern.gain_at(0.0, outward_azimuth_deg + 180.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn flat_pattern(step: f64, f: impl Fn(f64, f64) -> f64) -> FarFieldPattern {
        let grid = PatternGrid::new(step).unwrap();
        let elevations_deg: Vec<f64> = (1..=grid.rows()).map(|i| -90.0 + i as f64 * step).collect();
        let azimuths_deg: Vec<f64> = (0..grid.columns()).map(|i| i as f64 * step).collect();
        let mut gains_dbi = Vec::new();
        for &el in &elevations_deg {
            for &az in &azimuths_deg {
                gains_dbi.push(f(el, az));
            }
        }
        FarFieldPattern {
            step_deg: step,
            elevations_deg,
            azimuths_deg,
            gains_dbi,
            south_pole_dbi: f(-90.0, 0.0),
            north_pole_dbi: f(90.0, 0.0),
        }
    }

    #[test]
    fn isotropic_pattern_integrates_to_one() {
        let p = flat_pattern(5.0, |_, _| 0.0);
        assert!((p.radiated_fraction() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn uniform_azimuth_gives_zero_difference() {
        let p = flat_pattern(5.0, |el, _| 2.0 - 0.001 * el * el);
        assert_eq!(gain_difference(&p, 0.0), 0.0);
        assert_eq!(gain_difference(&p, 37.0), 0.0);
    }

    #[test]
    fn difference_is_forward_minus_backward() {
        let p = flat_pattern(5.0, |_, az| if az == 0.0 { 13.0 } else if az == 180.0 { 1.0 } else { 5.0 });
        assert!((gain_difference(&p, 0.0) - 12.0).abs() < 1e-12);
        assert!((gain_difference(&p, 180.0) + 12.0).abs() < 1e-12);
    }

    #[test]
    fn difference_is_antisymmetric() {
        let p = flat_pattern(5.0, |el, az| (az.to_radians()).cos() * 4.0 + el * 0.01 + (az / 7.0).sin());
        for az in [0.0, 12.5, 90.0, 201.0] {
            let a = gain_difference(&p, az);
            let b = gain_difference(&p, az + 180.0);
            assert!((a + b).abs() < 1e-12);
        }
    }

    #[test]
    fn bilinear_interpolation_between_rows() {
        let p = flat_pattern(5.0, |el, az| el + 0.1 * az);
        assert!((p.gain_at(2.5, 7.5) - (2.5 + 0.75)).abs() < 1e-12);
        assert_eq!(p.gain_at(90.0, 123.0), 90.0);
    }

    #[test]
    fn coarse_or_irregular_grids_rejected() {
        assert!(PatternGrid::new(15.0).is_err());
        assert!(PatternGrid::new(7.0).is_err());
        assert!(PatternGrid::new(0.0).is_err());
        assert!(PatternGrid::new(10.0).is_ok());
        assert!(PatternGrid::new(2.5).is_ok());
    }
}
