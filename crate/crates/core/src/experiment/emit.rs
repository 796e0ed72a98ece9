//! Results serialization: CSV with a fixed header, or JSON rows with the
//! same keys. Numbers render with full double precision (shortest round-trip
//! form), so identical tables produce identical bytes.

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::experiment::sweep::{ResultsRow, ResultsTable};

/// Column order of every results file.
pub const RESULTS_CSV_HEADER: &str = "snr_db,n_sus,n_clusters,compression_ratio,pd,pfa,pmd,\
pe_raw,pe_avg,t_acquire_ms,t_recover_ms,t_detect_ms,t_fuse_ms,t_total_ms,n_trials,base_seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn push_row(out: &mut String, row: &ResultsRow) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
        row.snr_db,
        row.n_sus,
        row.n_clusters,
        row.compression_ratio,
        row.pd,
        row.pfa,
        row.pmd,
        row.pe_raw,
        row.pe_avg,
        row.t_acquire_ms,
        row.t_recover_ms,
        row.t_detect_ms,
        row.t_fuse_ms,
        row.t_total_ms,
        row.n_trials,
        row.base_seed,
    );
}

/// Renders the table as CSV (header always present).
pub fn render_csv(table: &ResultsTable) -> String {
    let mut out = String::with_capacity(64 + table.rows.len() * 128);
    out.push_str(RESULTS_CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        push_row(&mut out, row);
    }
    out
}

/// Renders the table as a JSON array of row objects with the CSV's keys.
pub fn render_json(table: &ResultsTable) -> Result<String> {
    let mut text = serde_json::to_string_pretty(&table.rows)
        .map_err(|e| Error::NumericalFailure(format!("JSON serialization failed: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes the table to `path` in the requested format.
pub fn emit_results(table: &ResultsTable, format: OutputFormat, path: &Path) -> Result<()> {
    let text = match format {
        OutputFormat::Csv => render_csv(table),
        OutputFormat::Json => render_json(table)?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn known_row() -> ResultsRow {
        ResultsRow {
            snr_db: -5.0,
            n_sus: 10,
            n_clusters: 2,
            compression_ratio: 0.5,
            pd: 0.97,
            pfa: 0.1,
            pmd: 0.03,
            pe_raw: 0.13,
            pe_avg: 0.065,
            t_acquire_ms: 0.25,
            t_recover_ms: 1.5,
            t_detect_ms: 0.125,
            t_fuse_ms: 0.0625,
            t_total_ms: 2.0,
            n_trials: 2000,
            base_seed: 42,
        }
    }

    #[test]
    fn empty_table_is_header_only() {
        let table = ResultsTable::default();
        assert_eq!(render_csv(&table), format!("{RESULTS_CSV_HEADER}\n"));
        assert_eq!(render_json(&table).unwrap(), "[]\n");
    }

    #[test]
    fn known_row_renders_byte_exact() {
        let table = ResultsTable { rows: vec![known_row()] };
        let expected = format!(
            "{RESULTS_CSV_HEADER}\n-5,10,2,0.5,0.97,0.1,0.03,0.13,0.065,0.25,1.5,0.125,0.0625,2,2000,42\n"
        );
        assert_eq!(render_csv(&table), expected);
    }

    #[test]
    fn json_round_trips_field_identical() {
        let table = ResultsTable { rows: vec![known_row(), known_row()] };
        let text = render_json(&table).unwrap();
        let back: Vec<ResultsRow> = serde_json::from_str(&text).unwrap();
        assert_eq!(back, table.rows);
    }

    #[test]
    fn csv_round_trips_through_parsing() {
        let table = ResultsTable { rows: vec![known_row()] };
        let text = render_csv(&table);
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), RESULTS_CSV_HEADER);
        let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(fields.len(), 16);
        let row = &table.rows[0];
        assert_eq!(fields[0].parse::<f64>().unwrap(), row.snr_db);
        assert_eq!(fields[4].parse::<f64>().unwrap(), row.pd);
        assert_eq!(fields[15].parse::<u64>().unwrap(), row.base_seed);
    }

    #[test]
    fn io_failure_carries_the_path() {
        let table = ResultsTable::default();
        let err = emit_results(
            &table,
            OutputFormat::Csv,
            Path::new("/nonexistent-dir/results.csv"),
        )
        .unwrap_err();
        assert!(err.to_string().contains("/nonexistent-dir/results.csv"));
    }
}
