//! CSV outputs. Every float is printed with 17 significant digits.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use cnqg_core::diagnostics::{DiagnosticsEntry, DiagnosticsSeries};

use crate::error::{CliError, CliResult};

/// Scientific notation with 17 significant digits; parses back to the same `f64`.
pub fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Column name of the `Lambda^s` norm, e.g. `hs_0.5`.
pub fn hs_column(s: f64) -> String {
    format!("hs_{s}")
}

/// Fixed leading columns of `series.csv`; `hs_<s>` columns and
/// `energy_residual` follow.
pub const SERIES_COLUMNS: [&str; 12] = [
    "t",
    "step",
    "mass",
    "min",
    "l1",
    "l2",
    "l4",
    "linf",
    "l2_fluct",
    "l4_fluct",
    "grad_l2",
    "grad_linf",
];

pub fn series_header(hs_orders: &[f64]) -> Vec<String> {
    SERIES_COLUMNS
        .iter()
        .map(|s| s.to_string())
        .chain(hs_orders.iter().map(|&s| hs_column(s)))
        .chain(std::iter::once("energy_residual".to_string()))
        .collect()
}

pub fn series_row(step: usize, e: &DiagnosticsEntry<f64>) -> Vec<String> {
    let mut row = vec![fmt17(e.t), step.to_string()];
    row.extend(
        [
            e.mass,
            e.min_theta,
            e.l1,
            e.l2,
            e.l4,
            e.linf,
            e.l2_fluct,
            e.l4_fluct,
            e.grad_l2,
            e.grad_linf,
        ]
        .into_iter()
        .map(fmt17),
    );
    row.extend(e.hs.iter().map(|&(_, v)| fmt17(v)));
    row.push(fmt17(e.energy_residual));
    row
}

pub struct CsvOut {
    path: std::path::PathBuf,
    writer: csv::Writer<BufWriter<File>>,
}

impl CsvOut {
    pub fn create(path: &Path, header: &[String]) -> CliResult<Self> {
        let file = File::create(path).map_err(|e| CliError::io(path, e))?;
        let mut out = Self {
            path: path.to_path_buf(),
            writer: csv::Writer::from_writer(BufWriter::new(file)),
        };
        out.row(header)?;
        Ok(out)
    }

    pub fn row<S: AsRef<[u8]>>(&mut self, fields: &[S]) -> CliResult<()> {
        self.writer.write_record(fields).map_err(|e| self.error(e))
    }

    pub fn finish(mut self) -> CliResult<()> {
        self.writer
            .flush()
            .map_err(|e| CliError::io(&self.path, e))
    }

    fn error(&self, e: csv::Error) -> CliError {
        CliError::format(&self.path, e.to_string())
    }
}

/// Reads `series.csv` back into a [`DiagnosticsSeries`].
pub fn read_series(path: &Path, dim: usize, alpha: f64) -> CliResult<DiagnosticsSeries<f64>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| CliError::format(path, e.to_string()))?;
    let header = reader
        .headers()
        .map_err(|e| CliError::format(path, e.to_string()))?
        .clone();
    let column = |name: &str| {
        header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| CliError::format(path, format!("missing column `{name}`")))
    };
    let fixed = SERIES_COLUMNS
        .iter()
        .map(|c| column(c))
        .collect::<CliResult<Vec<_>>>()?;
    let residual = column("energy_residual")?;
    let hs_cols: Vec<(f64, usize)> = header
        .iter()
        .enumerate()
        .filter_map(|(i, h)| h.strip_prefix("hs_").and_then(|s| s.parse().ok()).map(|s| (s, i)))
        .collect();
    let mut entries = Vec::new();
    for (lineno, record) in reader.records().enumerate() {
        let record = record.map_err(|e| CliError::format(path, e.to_string()))?;
        let num = |i: usize| -> CliResult<f64> {
            record
                .get(i)
                .and_then(|v| v.parse().ok())
                .ok_or_else(|| CliError::format(path, format!("row {}: bad value in column {i}", lineno + 2)))
        };
        let v: Vec<f64> = fixed.iter().map(|&i| num(i)).collect::<CliResult<_>>()?;
        entries.push(DiagnosticsEntry {
            t: v[0],
            mass: v[2],
            min_theta: v[3],
            l1: v[4],
            l2: v[5],
            l4: v[6],
            linf: v[7],
            l2_fluct: v[8],
            l4_fluct: v[9],
            grad_l2: v[10],
            grad_linf: v[11],
            hs: hs_cols
                .iter()
                .map(|&(s, i)| num(i).map(|x| (s, x)))
                .collect::<CliResult<_>>()?,
            energy_residual: num(residual)?,
            spectrum: Vec::new(),
        });
    }
    Ok(DiagnosticsSeries { dim, alpha, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = fmt17(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-').replace('.', "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn header_layout() {
        let h = series_header(&[0.5, 1.0]);
        assert_eq!(h[0], "t");
        assert_eq!(h[h.len() - 3], "hs_0.5");
        assert_eq!(h[h.len() - 2], "hs_1");
        assert_eq!(h.last().unwrap(), "energy_residual");
    }
}
