use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::em::{ComplexImpedance, EMSummary};
use crate::geometry::DesignVariables;

/// Header of the metrics CSV.
pub const METRICS_HEADER: [&str; 11] = [
    "success_ordinal",
    "simulation_index",
    "attempts",
    "vswr",
    "g_diff_db",
    "phi_deg",
    "d1_m",
    "theta1_deg",
    "l3_0_m",
    "l3_1_m",
    "l3_2_m",
];

/// One design that met the success thresholds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SuccessRecord {
    /// 1-based simulation count at which the success occurred.
    pub simulation_index: usize,
    /// Simulations since the previous success (or since the start).
    pub attempts: usize,
    pub design: DesignVariables,
    /// Solver figures; absent for surrogate environments.
    pub summary: Option<EMSummary>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub successes: Vec<SuccessRecord>,
    pub total_simulations: usize,
    /// Steps whose solve failed.
    pub solver_failures: usize,
    pub episodes: usize,
    pub wall_clock_s: f64,
}

impl RunMetrics {
    pub(crate) fn record_success(&mut self, simulation_index: usize, design: DesignVariables, summary: Option<EMSummary>) {
        let previous = self.successes.last().map_or(0, |s| s.simulation_index);
        self.successes.push(SuccessRecord { simulation_index, attempts: simulation_index - previous, design, summary });
    }

    /// Simulation index of the first success.
    pub fn first_success(&self) -> Option<usize> {
        self.successes.first().map(|s| s.simulation_index)
    }

    /// Success with the lowest VSWR, ties broken by the lowest impedance angle.
    pub fn best(&self) -> Option<&SuccessRecord> {
        self.successes.iter().filter(|s| s.summary.is_some()).min_by(|a, b| {
            let (sa, sb) = (a.summary.unwrap(), b.summary.unwrap());
            sa.vswr.total_cmp(&sb.vswr).then(sa.phi_deg.total_cmp(&sb.phi_deg))
        })
    }
}

/// `(success ordinal, attempts)` for every success, in order.
pub fn attempts_curve(metrics: &RunMetrics) -> Vec<(usize, usize)> {
    metrics.successes.iter().enumerate().map(|(i, s)| (i + 1, s.attempts)).collect()
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 { values[n / 2] } else { 0.5 * (values[n / 2 - 1] + values[n / 2]) })
}

/// Median attempts of the successes falling in each quarter of a run of
/// `total` simulations. A quarter without successes reports `None`.
pub fn quartile_medians(metrics: &RunMetrics, total: usize) -> [Option<f64>; 4] {
    let mut buckets: [Vec<f64>; 4] = Default::default();
    if total == 0 {
        return [None; 4];
    }
    for s in &metrics.successes {
        let q = ((s.simulation_index - 1) * 4 / total).min(3);
        buckets[q].push(s.attempts as f64);
    }
    buckets.map(|mut b| median(&mut b))
}

/// One-sided sign test: probability of at least `wins` successes out of
/// `wins + losses` fair coin flips.
pub fn sign_test_p(wins: usize, losses: usize) -> f64 {
    let n = wins + losses;
    if n == 0 {
        return 1.0;
    }
    let mut p = 0.0;
    let mut binom = 1.0f64;
    for k in 0..=n {
        if k > 0 {
            binom = binom * (n - k + 1) as f64 / k as f64;
        }
        if k >= wins {
            p += binom;
        }
    }
    p / 2f64.powi(n as i32)
}

#[derive(Serialize, Deserialize)]
struct MetricsRow {
    success_ordinal: usize,
    simulation_index: usize,
    attempts: usize,
    vswr: Option<f64>,
    g_diff_db: Option<f64>,
    phi_deg: Option<f64>,
    d1_m: f64,
    theta1_deg: f64,
    l3_0_m: f64,
    l3_1_m: f64,
    l3_2_m: f64,
}

/// Writes one row per success; solver columns stay empty without a summary.
pub fn write_metrics_csv<W: Write>(metrics: &RunMetrics, out: W) -> Result<(), HarnessError> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(METRICS_HEADER)?;
    for (i, s) in metrics.successes.iter().enumerate() {
        w.serialize(MetricsRow {
            success_ordinal: i + 1,
            simulation_index: s.simulation_index,
            attempts: s.attempts,
            vswr: s.summary.map(|m| m.vswr),
            g_diff_db: s.summary.map(|m| m.g_diff_db),
            phi_deg: s.summary.map(|m| m.phi_deg),
            d1_m: s.design.d1,
            theta1_deg: s.design.theta1,
            l3_0_m: s.design.l3[0],
            l3_1_m: s.design.l3[1],
            l3_2_m: s.design.l3[2],
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a metrics CSV back. The impedance is not part of the file, so
/// summaries come back with `z_in` zeroed.
pub fn read_metrics_csv<R: Read>(input: R) -> Result<Vec<SuccessRecord>, HarnessError> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != METRICS_HEADER {
        return Err(HarnessError::Format(format!("unexpected metrics header {header:?}")));
    }
    let mut out = Vec::new();
    let mut previous = 0;
    for (i, row) in r.deserialize::<MetricsRow>().enumerate() {
        let row = row?;
        if row.success_ordinal != i + 1 {
            return Err(HarnessError::Format(format!("row {} has ordinal {}", i + 1, row.success_ordinal)));
        }
        if row.simulation_index <= previous || row.attempts != row.simulation_index - previous {
            return Err(HarnessError::Format(format!("row {} breaks index/attempts consistency", i + 1)));
        }
        previous = row.simulation_index;
        let summary = match (row.vswr, row.g_diff_db, row.phi_deg) {
            (Some(vswr), Some(g_diff_db), Some(phi_deg)) => {
                Some(EMSummary { z_in: ComplexImpedance::default(), vswr, phi_deg, g_diff_db })
            }
            _ => None,
        };
        out.push(SuccessRecord {
            simulation_index: row.simulation_index,
            attempts: row.attempts,
            design: DesignVariables { d1: row.d1_m, theta1: row.theta1_deg, l3: [row.l3_0_m, row.l3_1_m, row.l3_2_m] },
            summary,
        });
    }
    Ok(out)
}
