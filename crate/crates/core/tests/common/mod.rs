//! Independent reference values shared by the integration tests.

#![allow(dead_code)]

use std::f64::consts::PI;

use curvant_core::em::FREE_SPACE_IMPEDANCE;

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Composite Simpson rule with `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let mut sum = f(a) + f(b);
    for i in 1..n {
        let w = if i % 2 == 1 { 4.0 } else { 2.0 };
        sum += w * f(a + i as f64 * h);
    }
    sum * h / 3.0
}

/// Sine integral.
pub fn si(x: f64) -> f64 {
    simpson(|t| if t == 0.0 { 1.0 } else { t.sin() / t }, 0.0, x, 20_000)
}

/// `∫₀ˣ (1 − cos t) / t dt`.
pub fn cin(x: f64) -> f64 {
    simpson(|t| if t == 0.0 { 0.0 } else { (1.0 - t.cos()) / t }, 0.0, x, 20_000)
}

/// Cosine integral.
pub fn ci(x: f64) -> f64 {
    EULER_GAMMA + x.ln() - cin(x)
}

/// Induced-EMF input impedance of a center-fed dipole with sinusoidal
/// current, total length and radius in wavelengths.
pub fn induced_emf_impedance(length_wl: f64, radius_wl: f64) -> (f64, f64) {
    let kl = 2.0 * PI * length_wl;
    let ka = 2.0 * PI * radius_wl;
    let eta = FREE_SPACE_IMPEDANCE;
    let r = eta / (2.0 * PI)
        * (cin(kl)
            + 0.5 * kl.sin() * (si(2.0 * kl) - 2.0 * si(kl))
            + 0.5 * kl.cos() * (EULER_GAMMA + (kl / 2.0).ln() + ci(2.0 * kl) - 2.0 * ci(kl)));
    let x = eta / (4.0 * PI)
        * (2.0 * si(kl) + kl.cos() * (2.0 * si(kl) - si(2.0 * kl))
            - kl.sin() * (2.0 * ci(kl) - ci(2.0 * kl) - ci(2.0 * ka * ka / kl)));
    let feed = (kl / 2.0).sin().powi(2);
    (r / feed, x / feed)
}
