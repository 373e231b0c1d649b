//! File formats written by the commands, with readers for the tabular ones.

use std::fmt::Write as _;
use std::io::{Read, Write};

use curvant_core::em::FarFieldPattern;
use curvant_core::harness::{quartile_medians, RunMetrics, SuccessRecord};
use curvant_core::{DesignVariables, EMReport, EMSummary, TubeSpec};
use serde::{Deserialize, Serialize};

pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.bin";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const REPORT_FILE: &str = "report.json";
pub const PATTERN_FILE: &str = "pattern.csv";
pub const NEC_FILE: &str = "design.nec";
pub const SWEEP_FILE: &str = "sweep.csv";

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternRow {
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
    pub gain_dbi: f64,
}

pub fn write_pattern_csv<W: Write>(pattern: &FarFieldPattern, out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for (elevation_deg, azimuth_deg, gain_dbi) in pattern.samples() {
        w.serialize(PatternRow { elevation_deg, azimuth_deg, gain_dbi })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pattern_csv<R: Read>(input: R) -> Result<Vec<PatternRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub frequency_hz: f64,
    pub z_re_ohm: f64,
    pub z_im_ohm: f64,
    pub vswr: f64,
    pub phi_deg: f64,
    pub g_diff_db: f64,
}

impl SweepRow {
    pub fn new(frequency_hz: f64, s: &EMSummary) -> Self {
        Self { frequency_hz, z_re_ohm: s.z_in.re, z_im_ohm: s.z_in.im, vswr: s.vswr, phi_deg: s.phi_deg, g_diff_db: s.g_diff_db }
    }
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_sweep_csv<R: Read>(input: R) -> Result<Vec<SweepRow>, csv::Error> {
    csv::Reader::from_reader(input).deserialize().collect()
}

pub fn format_design(v: &DesignVariables) -> String {
    format!(
        "D1 {:.2} cm, theta1 {:.3} deg, L3 {:.2} / {:.2} / {:.2} cm",
        v.d1 * 100.0,
        v.theta1,
        v.l3[0] * 100.0,
        v.l3[1] * 100.0,
        v.l3[2] * 100.0
    )
}

pub fn format_report(r: &EMReport) -> String {
    format!(
        "Z_in {:.2} {} j{:.2} ohm, VSWR {:.3}, phi {:.2} deg, G diff {:.2} dB, peak gain {:.2} dBi",
        r.z_in.re,
        if r.z_in.im < 0.0 { "-" } else { "+" },
        r.z_in.im.abs(),
        r.vswr,
        r.phi_deg,
        r.g_diff_db,
        r.pattern.max_gain()
    )
}

fn format_quartiles(q: &[Option<f64>; 4]) -> String {
    q.iter().map(|m| m.map_or("-".to_string(), |v| format!("{v}"))).collect::<Vec<_>>().join(", ")
}

/// Text block describing one run. Contains nothing time-dependent so that
/// identical runs give identical files.
pub fn run_summary(
    title: &str,
    tube: &TubeSpec,
    frequency: f64,
    seed: u64,
    metrics: &RunMetrics,
    best: Option<(&SuccessRecord, &EMReport)>,
) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{title}");
    let _ = writeln!(s, "tube radius {} m, length {} m, frequency {} Hz", tube.radius, tube.length, frequency);
    let _ = writeln!(s, "seed {seed}, budget {} simulations", metrics.total_simulations);
    let _ = writeln!(
        s,
        "successes {} ({} episodes, {} solver failures)",
        metrics.successes.len(),
        metrics.episodes,
        metrics.solver_failures
    );
    match metrics.first_success() {
        Some(i) => {
            let _ = writeln!(s, "first success at simulation {i}");
        }
        None => {
            let _ = writeln!(s, "first success: none");
        }
    }
    let _ = writeln!(
        s,
        "median attempts per quarter: {}",
        format_quartiles(&quartile_medians(metrics, metrics.total_simulations))
    );
    match best {
        Some((record, report)) => {
            let _ = writeln!(s, "best design (simulation {}): {}", record.simulation_index, format_design(&record.design));
            let _ = writeln!(s, "  {}", format_report(report));
        }
        None => {
            let _ = writeln!(s, "best design: none");
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use curvant_core::ComplexImpedance;

    #[test]
    fn sweep_round_trip() {
        let summary = EMSummary { z_in: ComplexImpedance::new(48.0, -3.5), vswr: 1.08, phi_deg: 4.2, g_diff_db: 11.0 };
        let rows = vec![SweepRow::new(2.4e9, &summary), SweepRow::new(2.5e9, &summary)];
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        assert!(String::from_utf8_lossy(&buf).starts_with("frequency_hz,z_re_ohm,z_im_ohm,vswr,phi_deg,g_diff_db"));
        assert_eq!(read_sweep_csv(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn summary_without_successes() {
        let m = RunMetrics { total_simulations: 10, episodes: 1, ..RunMetrics::default() };
        let text = run_summary("train", &TubeSpec::default(), 2.45e9, 3, &m, None);
        assert!(text.contains("successes 0"));
        assert!(text.contains("best design: none"));
        assert!(text.contains("-, -, -, -"));
    }
}
