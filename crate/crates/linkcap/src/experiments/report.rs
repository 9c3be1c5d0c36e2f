//! Flat-file output for study runs: a byte-deterministic CSV of rows and
//! a JSON summary with per-size aggregates. Wall-clock time lives only in
//! the JSON so the CSV is identical across machines and thread counts.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};
use std::io::Write;
use std::path::Path;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::experiments::study::{Row, StudyReport};

/// Column order for every study CSV.
pub const CSV_HEADER: &str =
    "study,scenario,n,sigma,trial,alg_value,s_size,opt_uniform,opt_pc,gn,ratio,sparsify_mean,feasible";

fn fmt_opt_f64(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn fmt_opt_usize(v: Option<usize>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// One CSV line for a row, no trailing newline. Floats print via the
/// shortest round-trip representation, absent options as empty fields.
pub fn csv_line(row: &Row) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}",
        row.study,
        row.scenario,
        row.n,
        fmt_opt_f64(row.sigma),
        row.trial,
        row.alg_value,
        fmt_opt_usize(row.s_size),
        fmt_opt_f64(row.opt_uniform),
        fmt_opt_f64(row.opt_pc),
        fmt_opt_f64(row.gn),
        fmt_opt_f64(row.ratio),
        fmt_opt_f64(row.sparsify_mean),
        row.feasible,
    )
}

/// Write header plus one line per row.
pub fn write_csv(path: &Path, rows: &[Row]) -> Result<()> {
    let mut out = String::with_capacity(64 * (rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for row in rows {
        out.push_str(&csv_line(row));
        out.push('\n');
    }
    let mut file = std::fs::File::create(path).map_err(Error::Io)?;
    file.write_all(out.as_bytes()).map_err(Error::Io)
}

/// Mean and standard error over one (n, sigma) group of rows.
#[derive(Clone, Debug, Serialize)]
pub struct Aggregate {
    pub n: usize,
    pub sigma: Option<f64>,
    pub trials: u64,
    pub mean_alg: f64,
    pub se_alg: f64,
    pub mean_ratio: Option<f64>,
}

/// Group rows by (n, sigma) in first-appearance order and aggregate.
pub fn aggregate(rows: &[Row]) -> Vec<Aggregate> {
    let mut order: Vec<(usize, u64)> = Vec::new();
    let mut groups: Vec<Vec<&Row>> = Vec::new();
    for row in rows {
        let key = (row.n, row.sigma.unwrap_or(f64::NAN).to_bits());
        match order.iter().position(|&k| k == key) {
            Some(i) => groups[i].push(row),
            None => {
                order.push(key);
                groups.push(vec![row]);
            }
        }
    }
    groups
        .iter()
        .map(|group| {
            let k = group.len() as f64;
            let mean = group.iter().map(|r| r.alg_value).sum::<f64>() / k;
            let var = group
                .iter()
                .map(|r| (r.alg_value - mean).powi(2))
                .sum::<f64>()
                / k;
            let ratios: Vec<f64> = group.iter().filter_map(|r| r.ratio).collect();
            let mean_ratio = if ratios.is_empty() {
                None
            } else {
                Some(ratios.iter().sum::<f64>() / ratios.len() as f64)
            };
            Aggregate {
                n: group[0].n,
                sigma: group[0].sigma,
                trials: group.len() as u64,
                mean_alg: mean,
                se_alg: (var / k).sqrt(),
                mean_ratio,
            }
        })
        .collect()
}

/// JSON-side companion to the CSV: aggregates plus run metadata. The
/// wall-clock belongs here and only here.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub study: &'static str,
    pub version: &'static str,
    pub seed: u64,
    pub config_digest: String,
    pub all_feasible: bool,
    pub aggregates: Vec<Aggregate>,
    pub wall_clock_ms: u64,
}

/// Stable 64-bit digest of a config's canonical JSON text.
pub fn config_digest(text: &str) -> String {
    let mut h = DefaultHasher::new();
    text.hash(&mut h);
    format!("{:016x}", h.finish())
}

/// Build the JSON summary for a finished study run.
pub fn summarize(report: &StudyReport, config_digest: String, wall_clock_ms: u64) -> Summary {
    Summary {
        study: report.study,
        version: env!("CARGO_PKG_VERSION"),
        seed: report.seed,
        config_digest,
        all_feasible: report.rows.iter().all(|r| r.feasible),
        aggregates: aggregate(&report.rows),
        wall_clock_ms,
    }
}

/// Write the summary as pretty JSON.
pub fn write_summary(path: &Path, summary: &Summary) -> Result<()> {
    let text = serde_json::to_string_pretty(summary).map_err(Error::Json)?;
    std::fs::write(path, text + "\n").map_err(Error::Io)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(n: usize, alg: f64, ratio: Option<f64>) -> Row {
        Row {
            study: "colocated_growth",
            scenario: "colocated",
            n,
            sigma: Some(0.5),
            trial: 0,
            alg_value: alg,
            s_size: Some(3),
            opt_uniform: None,
            opt_pc: None,
            gn: Some(2.5),
            ratio,
            sparsify_mean: None,
            feasible: true,
        }
    }

    #[test]
    fn csv_line_prints_empty_fields_for_absent_options() {
        let line = csv_line(&row(16, 3.0, None));
        assert_eq!(
            line,
            "colocated_growth,colocated,16,0.5,0,3,3,,,2.5,,,true"
        );
        assert_eq!(
            line.split(',').count(),
            CSV_HEADER.split(',').count(),
            "line arity must match the header"
        );
    }

    #[test]
    fn aggregate_groups_by_size_in_first_seen_order() {
        let rows = vec![
            row(16, 2.0, Some(0.8)),
            row(64, 4.0, Some(1.6)),
            row(16, 4.0, Some(1.2)),
        ];
        let aggs = aggregate(&rows);
        assert_eq!(aggs.len(), 2);
        assert_eq!(aggs[0].n, 16);
        assert_eq!(aggs[0].trials, 2);
        assert!((aggs[0].mean_alg - 3.0).abs() < 1e-12);
        assert!((aggs[0].se_alg - (1.0f64 / 2.0f64.sqrt())).abs() < 1e-12);
        assert_eq!(aggs[0].mean_ratio, Some(1.0));
        assert_eq!(aggs[1].n, 64);
        assert_eq!(aggs[1].trials, 1);
        assert_eq!(aggs[1].se_alg, 0.0);
    }

    #[test]
    fn digest_is_stable_and_text_sensitive() {
        let a = config_digest("{\"study\":\"x\"}");
        let b = config_digest("{\"study\":\"x\"}");
        let c = config_digest("{\"study\":\"y\"}");
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_eq!(a.len(), 16);
    }

    #[test]
    fn csv_roundtrips_through_a_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rows.csv");
        let rows = vec![row(16, 2.0, Some(0.8)), row(16, 3.0, None)];
        write_csv(&path, &rows).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines[1], csv_line(&rows[0]));
    }
}
