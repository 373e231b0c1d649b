use super::wire::{PhaseSign, Port, Segment, WireModel, MAX_SEGMENT_WAVELENGTHS, MIN_LENGTH_TO_RADIUS};
use super::{DesignVariables, GeometryError, TubeSpec};
use crate::vec3::Vec3;
use crate::wavelength;

/// Target segment length on the dipoles, in wavelengths.
pub const DIPOLE_SEGMENT_WAVELENGTHS: f64 = 0.05;

/// Odd segment count for a dipole of `length`: the smallest count reaching
/// λ/20 segments, backed off while segments would be too stubby for the
/// thin-wire kernel.
pub fn dipole_segment_count(length: f64, radius: f64, frequency: f64) -> Result<usize, GeometryError> {
    let lambda = wavelength(frequency);
    let mut n = (length / (DIPOLE_SEGMENT_WAVELENGTHS * lambda) - 1e-9).ceil().max(1.0) as usize;
    if n % 2 == 0 {
        n += 1;
    }
    while n > 1 && length / n as f64 / radius <= MIN_LENGTH_TO_RADIUS {
        n -= 2;
    }
    let seg = length / n as f64;
    if seg / radius <= MIN_LENGTH_TO_RADIUS || seg > MAX_SEGMENT_WAVELENGTHS * lambda * (1.0 + 1e-9) {
        return Err(GeometryError::InvalidModel(format!(
            "dipole of length {length} m with radius {radius} m cannot be segmented within thin-wire limits"
        )));
    }
    Ok(n)
}

/// Straight `z`-directed dipole centered at `center`, fed at its middle
/// segment.
pub fn straight_dipole(
    center: Vec3,
    length: f64,
    radius: f64,
    frequency: f64,
    sign: PhaseSign,
    tag: u32,
) -> Result<WireModel, GeometryError> {
    let n = dipole_segment_count(length, radius, frequency)?;
    let bottom = center + Vec3::new(0.0, 0.0, -0.5 * length);
    let top = center + Vec3::new(0.0, 0.0, 0.5 * length);
    let nodes: Vec<Vec3> = (0..=n).map(|k| bottom.lerp(top, k as f64 / n as f64)).collect();
    let segments = nodes
        .windows(2)
        .map(|w| Segment { start: w[0], end: w[1], radius, tag })
        .collect();
    Ok(WireModel { segments, ports: vec![Port { segment: n / 2, sign }] })
}

/// Three axial dipoles standing `d1` off the tube at azimuths `−θ1, 0, +θ1`
/// (dipole `i` at `(i − 1)·θ1`), centered at mid-length, with alternating
/// feed polarity `(+, −, +)`.
pub fn build_dipole_wires(
    vars: &DesignVariables,
    tube: &TubeSpec,
    element_radius: f64,
    frequency: f64,
) -> Result<WireModel, GeometryError> {
    tube.validate()?;
    if !(element_radius > 0.0) {
        return Err(GeometryError::InvalidModel(format!("element radius must be > 0, got {element_radius}")));
    }
    let rho = tube.radius + vars.d1;
    let separation = vars.theta1.to_radians();
    if rho * separation <= 2.0 * element_radius {
        return Err(GeometryError::Overlap { arc: rho * separation, diameter: 2.0 * element_radius });
    }
    let mut model = WireModel::default();
    for (i, &length) in vars.l3.iter().enumerate() {
        let azimuth = (i as f64 - 1.0) * separation;
        let center = Vec3::new(rho, 0.0, 0.0).rotate_z(azimuth);
        let dipole = straight_dipole(center, length, element_radius, frequency, PhaseSign::alternating(i), 1)?;
        model.append(&dipole);
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    const F: f64 = 2.45e9;

    fn table_three() -> DesignVariables {
        DesignVariables { d1: 0.05, theta1: 25.4, l3: [0.06, 0.055, 0.06] }
    }

    fn azimuth_deg(seg: &Segment) -> f64 {
        let c = seg.center();
        c.y.atan2(c.x).to_degrees()
    }

    #[test]
    fn reported_design_positions() {
        let model = build_dipole_wires(&table_three(), &TubeSpec::default(), 1e-3, F).unwrap();
        assert_eq!(model.ports.len(), 3);
        let expected = [-25.4, 0.0, 25.4];
        for (port, want) in model.ports.iter().zip(expected) {
            let seg = &model.segments[port.segment];
            assert!((azimuth_deg(seg) - want).abs() < 1e-9);
            let c = seg.center();
            assert!(((c.x * c.x + c.y * c.y).sqrt() - 0.15).abs() < 1e-12);
            assert!(c.z.abs() < 1e-12);
        }
        let signs: Vec<_> = model.ports.iter().map(|p| p.sign).collect();
        assert_eq!(signs, vec![PhaseSign::Plus, PhaseSign::Minus, PhaseSign::Plus]);
    }

    #[test]
    fn minimum_angle_positions() {
        let vars = DesignVariables { theta1: 10.0, ..table_three() };
        let model = build_dipole_wires(&vars, &TubeSpec::default(), 1e-3, F).unwrap();
        let az: Vec<f64> = model.ports.iter().map(|p| azimuth_deg(&model.segments[p.segment])).collect();
        for (a, want) in az.iter().zip([-10.0, 0.0, 10.0]) {
            assert!((a - want).abs() < 1e-9);
        }
    }

    #[test]
    fn equal_lengths_mirror_symmetric() {
        let vars = DesignVariables { l3: [0.06; 3], ..table_three() };
        let model = build_dipole_wires(&vars, &TubeSpec::default(), 1e-3, F).unwrap();
        let n = model.segments.len() / 3;
        for k in 0..n {
            let a = model.segments[k];
            let b = model.segments[2 * n + k];
            // reflection through the y = 0 plane
            for (p, q) in [(a.start, b.start), (a.end, b.end)] {
                assert!((p.x - q.x).abs() < 1e-12 && (p.y + q.y).abs() < 1e-12 && (p.z - q.z).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn segmentation_is_odd_and_fine() {
        let lambda = wavelength(F);
        for mm in (10..=150).step_by(5) {
            let len = mm as f64 * 1e-3;
            let n = dipole_segment_count(len, 1e-3, F).unwrap();
            assert_eq!(n % 2, 1);
            let seg = len / n as f64;
            assert!(seg / 1e-3 > MIN_LENGTH_TO_RADIUS);
            assert!(seg <= lambda / 10.0);
        }
        // a 6 cm element lands on the λ/20 target
        let n = dipole_segment_count(0.06, 1e-3, F).unwrap();
        assert!(0.06 / n as f64 <= lambda / 20.0);
        assert!(0.06 / (n - 2) as f64 > lambda / 20.0);
    }

    #[test]
    fn overlapping_elements_rejected() {
        let vars = DesignVariables { theta1: 0.5, ..table_three() };
        assert!(matches!(
            build_dipole_wires(&vars, &TubeSpec::default(), 1e-3, F),
            Err(GeometryError::Overlap { .. })
        ));
    }
}
