//! Averaged reduced thin-wire kernel between straight wire pieces.
//!
//! Every interaction the solver needs is a double average
//!
//! ```text
//! <g>_ab = 1/(La Lb) ∫_a ∫_b exp(-jkR) / (4πR) dl dl',   R = sqrt(|r - r'|² + a²)
//! ```
//!
//! over two straight pieces. Distant pieces use midpoint or low-order Gauss
//! rules; close pieces split off the static `1/R` part and integrate it in
//! closed form (fully for parallel pieces, over the inner variable otherwise).

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::vec3::Vec3;

/// Straight piece of wire: a whole segment or one half of it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Piece {
    pub start: Vec3,
    pub end: Vec3,
    pub radius: f64,
}

impl Piece {
    pub fn length(&self) -> f64 {
        (self.end - self.start).norm()
    }

    pub fn center(&self) -> Vec3 {
        self.start.lerp(self.end, 0.5)
    }
}

const GAUSS2: [(f64, f64); 2] = [(0.211_324_865_405_187_1, 0.5), (0.788_675_134_594_812_9, 0.5)];

const GAUSS3: [(f64, f64); 3] = [
    (0.112_701_665_379_258_3, 5.0 / 18.0),
    (0.5, 8.0 / 18.0),
    (0.887_298_334_620_741_7, 5.0 / 18.0),
];

const GAUSS4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_7, 0.173_927_422_568_726_9),
    (0.330_009_478_207_571_9, 0.326_072_577_431_273_1),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
];

const GAUSS8: [(f64, f64); 8] = [
    (0.019_855_071_751_231_9, 0.050_614_268_145_188_1),
    (0.101_666_761_293_186_6, 0.111_190_517_226_687_2),
    (0.237_233_795_041_835_5, 0.156_853_322_938_943_6),
    (0.408_282_678_752_175_1, 0.181_341_891_689_181_0),
    (0.591_717_321_247_824_9, 0.181_341_891_689_181_0),
    (0.762_766_204_958_164_5, 0.156_853_322_938_943_6),
    (0.898_333_238_706_813_4, 0.111_190_517_226_687_2),
    (0.980_144_928_248_768_1, 0.050_614_268_145_188_1),
];

/// Center distance (in units of the longer piece) beyond which a 3×3 Gauss
/// rule is accurate to a few parts in 10⁷.
const FAR: f64 = 6.0;
/// Center distance below which the singular part is extracted.
const NEAR: f64 = 3.0;

fn green(k: f64, r: f64) -> Complex64 {
    Complex64::from_polar(1.0 / (4.0 * PI * r), -k * r)
}

/// `(exp(-jkR) - 1) / R`, bounded as `R → 0`.
fn smooth_part(k: f64, r: f64) -> Complex64 {
    let x = k * r;
    if x < 1e-4 {
        Complex64::new(-0.5 * k * x, -k)
    } else {
        Complex64::new((x.cos() - 1.0) / r, -x.sin() / r)
    }
}

pub(crate) fn effective_radius_sq(a: &Piece, b: &Piece) -> f64 {
    0.5 * (a.radius * a.radius + b.radius * b.radius)
}

/// Double-averaged kernel `<g>_ab`.
pub fn averaged_kernel(a: &Piece, b: &Piece, k: f64) -> Complex64 {
    let la = a.length();
    let lb = b.length();
    let scale = la.max(lb);
    let a2 = effective_radius_sq(a, b);
    let d = (a.center() - b.center()).norm();
    if d >= FAR * scale {
        return tensor_gauss(a, b, a2, k, &GAUSS3);
    }
    if d >= NEAR * scale {
        return tensor_gauss(a, b, a2, k, &GAUSS4);
    }
    let ta = (a.end - a.start) * (1.0 / la);
    let tb = (b.end - b.start) * (1.0 / lb);
    if ta.dot(tb).abs() > 1.0 - 1e-12 {
        near_parallel(a, b, ta, a2, k)
    } else {
        0.5 * (near_general(a, b, a2, k) + near_general(b, a, a2, k))
    }
}

fn tensor_gauss(a: &Piece, b: &Piece, a2: f64, k: f64, rule: &[(f64, f64)]) -> Complex64 {
    let mut sum = Complex64::new(0.0, 0.0);
    for &(u, wu) in rule {
        let p = a.start.lerp(a.end, u);
        for &(v, wv) in rule {
            let q = b.start.lerp(b.end, v);
            sum += green(k, ((p - q).norm_sq() + a2).sqrt()) * (wu * wv);
        }
    }
    sum
}

/// Low-order double average for well separated pieces.
pub fn far_kernel(a: &Piece, b: &Piece, k: f64) -> Complex64 {
    tensor_gauss(a, b, effective_radius_sq(a, b), k, &GAUSS2)
}

/// Antiderivative pair for the static kernel along a line:
/// `F''(u) = 1 / sqrt(u² + c²)`.
fn static_primitive(u: f64, c2: f64) -> f64 {
    let c = c2.sqrt();
    u * (u / c).asinh() - (u * u + c2).sqrt()
}

/// `∫_{z1}^{z2} dz' / sqrt((z - z')² + c²)` for a point at axial position `z`.
fn static_line(z: f64, z1: f64, z2: f64, c2: f64) -> f64 {
    let c = c2.sqrt();
    ((z2 - z) / c).asinh() - ((z1 - z) / c).asinh()
}

fn near_parallel(a: &Piece, b: &Piece, t: Vec3, a2: f64, k: f64) -> Complex64 {
    let la = a.length();
    let lb = b.length();
    // Coordinates along the common direction, origin at a.start.
    let sb = (b.start - a.start).dot(t);
    let eb = (b.end - a.start).dot(t);
    let (b1, b2) = if sb <= eb { (sb, eb) } else { (eb, sb) };
    let offset = (b.start - a.start) - t * sb;
    let c2 = offset.norm_sq() + a2;
    // ∫_0^la ∫_b1^b2 dz dz' / sqrt((z - z')² + c²)
    let f = |u: f64| static_primitive(u, c2);
    let static_part = -(f(la - b2) - f(la - b1) - f(0.0 - b2) + f(0.0 - b1));
    let mut dynamic = Complex64::new(0.0, 0.0);
    for &(u, wu) in &GAUSS4 {
        let z = u * la;
        for &(v, wv) in &GAUSS4 {
            let zp = b1 + v * (b2 - b1);
            let r = ((z - zp) * (z - zp) + c2).sqrt();
            dynamic += smooth_part(k, r) * (wu * wv);
        }
    }
    (Complex64::new(static_part / (la * lb), 0.0) + dynamic) / (4.0 * PI)
}

/// Outer Gauss rule over `obs`, inner static part in closed form over `src`.
fn near_general(obs: &Piece, src: &Piece, a2: f64, k: f64) -> Complex64 {
    let ls = src.length();
    let ts = (src.end - src.start) * (1.0 / ls);
    let mut sum = Complex64::new(0.0, 0.0);
    for &(u, wu) in &GAUSS8 {
        let p = obs.start.lerp(obs.end, u);
        let rel = p - src.start;
        let z = rel.dot(ts);
        let c2 = (rel - ts * z).norm_sq() + a2;
        let static_part = static_line(z, 0.0, ls, c2) / ls;
        let mut dynamic = Complex64::new(0.0, 0.0);
        for &(v, wv) in &GAUSS4 {
            let q = src.start.lerp(src.end, v);
            let r = ((p - q).norm_sq() + a2).sqrt();
            dynamic += smooth_part(k, r) * wv;
        }
        sum += (Complex64::new(static_part, 0.0) + dynamic) * wu;
    }
    sum / (4.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn piece(start: Vec3, end: Vec3, radius: f64) -> Piece {
        Piece { start, end, radius }
    }

    /// Brute-force composite midpoint rule for the double average.
    fn brute(a: &Piece, b: &Piece, k: f64, n: usize) -> Complex64 {
        let a2 = effective_radius_sq(a, b);
        let mut sum = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let p = a.start.lerp(a.end, (i as f64 + 0.5) / n as f64);
            for j in 0..n {
                let q = b.start.lerp(b.end, (j as f64 + 0.5) / n as f64);
                sum += green(k, ((p - q).norm_sq() + a2).sqrt());
            }
        }
        sum / (n * n) as f64
    }

    #[test]
    fn static_primitive_matches_quadrature() {
        let c2 = 1e-6;
        let (z1, z2, w1, w2) = (0.0, 0.01, 0.004, 0.02);
        let f = |u: f64| static_primitive(u, c2);
        let exact = -(f(z2 - w2) - f(z2 - w1) - f(z1 - w2) + f(z1 - w1));
        let n = 4000;
        let mut sum = 0.0;
        for i in 0..n {
            let z = z1 + (z2 - z1) * (i as f64 + 0.5) / n as f64;
            sum += static_line(z, w1, w2, c2) * (z2 - z1) / n as f64;
        }
        assert!((exact - sum).abs() / exact.abs() < 1e-6, "{exact} vs {sum}");
    }

    #[test]
    fn self_term_matches_brute_force() {
        let k = 51.3;
        let a = piece(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.006), 1e-3);
        let fast = averaged_kernel(&a, &a, k);
        let slow = brute(&a, &a, k, 3000);
        assert!((fast - slow).norm() / slow.norm() < 1e-3, "{fast} vs {slow}");
    }

    #[test]
    fn orthogonal_junction_matches_brute_force() {
        let k = 51.3;
        let a = piece(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.012, 0.0, 0.0), 1.9e-3);
        let b = piece(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.012), 1.9e-3);
        let fast = averaged_kernel(&a, &b, k);
        let slow = brute(&a, &b, k, 3000);
        assert!((fast - slow).norm() / slow.norm() < 2e-3, "{fast} vs {slow}");
    }

    #[test]
    fn intermediate_and_far_ranges_match_brute_force() {
        let k = 51.3;
        let a = piece(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.0, 0.0, 0.006), 1e-3);
        for d in [0.012, 0.02, 0.05, 0.2] {
            let b = piece(Vec3::new(d, 0.003, 0.0), Vec3::new(d, 0.0, 0.006), 1e-3);
            let fast = averaged_kernel(&a, &b, k);
            let slow = brute(&a, &b, k, 400);
            assert!((fast - slow).norm() / slow.norm() < 1e-5, "d={d}: {fast} vs {slow}");
        }
    }

    #[test]
    fn averaged_kernel_is_symmetric() {
        let k = 51.3;
        let a = piece(Vec3::new(0.0, 0.0, 0.0), Vec3::new(0.01, 0.002, 0.0), 1e-3);
        let b = piece(Vec3::new(0.011, 0.0, 0.0), Vec3::new(0.011, 0.0, 0.008), 1.5e-3);
        let ab = averaged_kernel(&a, &b, k);
        let ba = averaged_kernel(&b, &a, k);
        assert!((ab - ba).norm() <= 1e-12 * ab.norm());
    }
}
