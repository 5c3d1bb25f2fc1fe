use std::fmt::Write as _;

/// Metric names in the order they appear in CSV output.
pub const METRICS: [&str; 8] =
    ["sensitivity", "specificity", "harmonic_mean", "inference_ms", "events_processed", "states", "transitions", "clocks"];

/// Averages over all folds, repetitions and extractions of one configuration
/// at one training fraction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub config_id: String,
    pub fraction: f64,
    pub sensitivity: f64,
    /// `None` when no invalid traces were supplied.
    pub specificity: Option<f64>,
    pub harmonic_mean: Option<f64>,
    pub inference_ms: f64,
    pub events_processed: f64,
    pub states: f64,
    pub transitions: f64,
    pub clocks: f64,
}

impl ReportRow {
    pub fn metric(&self, name: &str) -> Option<f64> {
        match name {
            "sensitivity" => Some(self.sensitivity),
            "specificity" => self.specificity,
            "harmonic_mean" => self.harmonic_mean,
            "inference_ms" => Some(self.inference_ms),
            "events_processed" => Some(self.events_processed),
            "states" => Some(self.states),
            "transitions" => Some(self.transitions),
            "clocks" => Some(self.clocks),
            _ => None,
        }
    }

    /// Element-wise mean; rows must describe the same configuration.
    pub(crate) fn mean(rows: &[ReportRow]) -> ReportRow {
        let n = rows.len() as f64;
        let avg = |f: fn(&ReportRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
        let avg_opt = |f: fn(&ReportRow) -> Option<f64>| rows.iter().map(f).sum::<Option<f64>>().map(|s| s / n);
        ReportRow {
            config_id: rows[0].config_id.clone(),
            fraction: rows[0].fraction,
            sensitivity: avg(|r| r.sensitivity),
            specificity: avg_opt(|r| r.specificity),
            harmonic_mean: avg_opt(|r| r.harmonic_mean),
            inference_ms: avg(|r| r.inference_ms),
            events_processed: avg(|r| r.events_processed),
            states: avg(|r| r.states),
            transitions: avg(|r| r.transitions),
            clocks: avg(|r| r.clocks),
        }
    }
}

/// `2·se·sp / (se + sp)`, or 0 when both are 0.
pub(crate) fn harmonic(se: f64, sp: f64) -> f64 {
    if se + sp == 0.0 {
        0.0
    } else {
        2.0 * se * sp / (se + sp)
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EvaluationReport {
    pub rows: Vec<ReportRow>,
}

impl EvaluationReport {
    pub fn row(&self, config_id: &str, fraction: f64) -> Option<&ReportRow> {
        self.rows.iter().find(|r| r.config_id == config_id && r.fraction == fraction)
    }

    /// Long-format CSV, one line per defined metric.
    pub fn to_csv(&self) -> String {
        self.csv_filtered(|_| true)
    }

    /// CSV without elapsed-time metrics, stable across runs with equal inputs.
    pub fn to_csv_untimed(&self) -> String {
        self.csv_filtered(|m| m != "inference_ms")
    }

    fn csv_filtered(&self, keep: impl Fn(&str) -> bool) -> String {
        let mut out = String::from("config_id,fraction,metric,value\n");
        for r in &self.rows {
            for m in METRICS.iter().filter(|m| keep(m)) {
                if let Some(v) = r.metric(m) {
                    writeln!(out, "{},{},{},{:.6}", r.config_id, r.fraction, m, v).expect("string write");
                }
            }
        }
        out
    }

    /// Fixed-width human-readable table.
    pub fn summary_table(&self) -> String {
        let mut out = format!(
            "{:<20} {:>8} {:>8} {:>8} {:>8} {:>10} {:>8} {:>8} {:>8}\n",
            "config", "fraction", "sens", "spec", "hmean", "ms", "states", "trans", "clocks"
        );
        let opt = |v: Option<f64>| v.map_or_else(|| "-".to_owned(), |v| format!("{v:.4}"));
        for r in &self.rows {
            writeln!(
                out,
                "{:<20} {:>8} {:>8.4} {:>8} {:>8} {:>10.3} {:>8.1} {:>8.1} {:>8.1}",
                r.config_id,
                r.fraction,
                r.sensitivity,
                opt(r.specificity),
                opt(r.harmonic_mean),
                r.inference_ms,
                r.states,
                r.transitions,
                r.clocks
            )
            .expect("string write");
        }
        out
    }
}
