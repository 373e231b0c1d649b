use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::EmError;
use crate::geometry::WireModel;

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ComplexImpedance {
    pub re: f64,
    pub im: f64,
}

impl ComplexImpedance {
    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for ComplexImpedance {
    fn from(z: Complex64) -> Self {
        Self { re: z.re, im: z.im }
    }
}

/// Voltage standing wave ratio against a real reference impedance.
/// Total reflection yields `f64::INFINITY`.
pub fn vswr(z: ComplexImpedance, z0: f64) -> f64 {
    let z = z.to_complex();
    let gamma = ((z - z0) / (z + z0)).norm();
    if !(gamma < 1.0) {
        return f64::INFINITY;
    }
    (1.0 + gamma) / (1.0 - gamma)
}

/// Magnitude of the impedance phase angle, degrees in `[0, 180]`.
pub fn impedance_angle(z: ComplexImpedance) -> f64 {
    z.im.atan2(z.re).abs().to_degrees()
}

/// Input impedance of all ports wired in parallel to one source `V₀ = 1`,
/// each port seeing `Vᵢ = signᵢ · V₀`:
/// `Z = |V₀|² / Σ conj(Vᵢ)·Iᵢ`.
pub fn port_input_impedance(model: &WireModel, currents: &[Complex64]) -> Result<ComplexImpedance, EmError> {
    if model.ports.is_empty() {
        return Err(EmError::Model("model has no ports".into()));
    }
    if currents.len() != model.segment_count() {
        return Err(EmError::Dimension { rows: model.segment_count(), cols: 1, rhs: currents.len() });
    }
    let total: Complex64 = model.ports.iter().map(|p| currents[p.segment] * p.sign.value()).sum();
    if total.norm() == 0.0 || !total.is_finite() {
        return Err(EmError::NoPortCurrent);
    }
    Ok((Complex64::new(1.0, 0.0) / total).into())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{PhaseSign, Port, Segment};
    use crate::vec3::Vec3;

    #[test]
    fn vswr_identities() {
        assert_eq!(vswr(ComplexImpedance::new(50.0, 0.0), 50.0), 1.0);
        assert!((vswr(ComplexImpedance::new(100.0, 0.0), 50.0) - 2.0).abs() < 1e-12);
        assert!((vswr(ComplexImpedance::new(25.0, 0.0), 50.0) - 2.0).abs() < 1e-12);
        assert_eq!(vswr(ComplexImpedance::new(0.0, 30.0), 50.0), f64::INFINITY);
        assert_eq!(vswr(ComplexImpedance::new(0.0, 0.0), 50.0), f64::INFINITY);
    }

    #[test]
    fn angle_identities() {
        assert_eq!(impedance_angle(ComplexImpedance::new(50.0, 0.0)), 0.0);
        assert!((impedance_angle(ComplexImpedance::new(50.0, 50.0)) - 45.0).abs() < 1e-9);
        assert!((impedance_angle(ComplexImpedance::new(0.0, -73.0)) - 90.0).abs() < 1e-9);
    }

    fn model_with_ports(signs: &[PhaseSign]) -> WireModel {
        let segments = (0..signs.len())
            .map(|i| Segment {
                start: Vec3::new(i as f64, 0.0, 0.0),
                end: Vec3::new(i as f64, 0.0, 0.01),
                radius: 1e-3,
                tag: i as u32 + 1,
            })
            .collect();
        let ports = signs.iter().enumerate().map(|(i, &sign)| Port { segment: i, sign }).collect();
        WireModel { segments, ports }
    }

    #[test]
    fn single_port_is_v_over_i() {
        let model = model_with_ports(&[PhaseSign::Plus]);
        let i = Complex64::new(0.01, -0.004);
        let z = port_input_impedance(&model, &[i]).unwrap();
        let want = Complex64::new(1.0, 0.0) / i;
        assert!((z.to_complex() - want).norm() < 1e-12);
    }

    #[test]
    fn conjugated_currents_conjugate_impedance() {
        let model = model_with_ports(&[PhaseSign::Plus, PhaseSign::Minus, PhaseSign::Plus]);
        let currents = [Complex64::new(0.01, 0.002), Complex64::new(-0.008, 0.001), Complex64::new(0.012, -0.003)];
        let conj: Vec<Complex64> = currents.iter().map(|c| c.conj()).collect();
        let z = port_input_impedance(&model, &currents).unwrap();
        let zc = port_input_impedance(&model, &conj).unwrap();
        assert!((z.to_complex().conj() - zc.to_complex()).norm() < 1e-12);
    }

    #[test]
    fn zero_port_current_rejected() {
        let model = model_with_ports(&[PhaseSign::Plus, PhaseSign::Plus]);
        let currents = [Complex64::new(0.01, 0.0), Complex64::new(-0.01, 0.0)];
        assert!(matches!(port_input_impedance(&model, &currents), Err(EmError::NoPortCurrent)));
    }
}
