//! Drift and covariance estimates from a CSV of simple per-period returns.
//!
//! The first row names the assets. Every further row holds one period's
//! arithmetic returns. Means and the unbiased covariance are annualized
//! linearly by `periods_per_year`; log returns are not converted.

use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use robust_merton::{Error as ModelError, MarketModel};

use crate::error::{CliError, CliResult};

pub fn estimate_market(path: &Path, periods_per_year: f64, r: f64) -> CliResult<MarketModel> {
    let file = std::fs::File::open(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    estimate_market_from_reader(file, periods_per_year, r)
}

pub fn estimate_market_from_reader<R: Read>(reader: R, periods_per_year: f64, r: f64) -> CliResult<MarketModel> {
    if !(periods_per_year.is_finite() && periods_per_year > 0.0) {
        return Err(CliError::Usage(format!(
            "periods_per_year must be > 0, got {periods_per_year}"
        )));
    }
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let n = rdr
        .headers()
        .map_err(|e| CliError::MalformedCsv {
            line: 1,
            message: e.to_string(),
        })?
        .len();
    if n == 0 {
        return Err(CliError::MalformedCsv {
            line: 1,
            message: "empty header row".into(),
        });
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CliError::MalformedCsv {
            line: e.position().map_or(0, |p| p.line()),
            message: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != n {
            return Err(CliError::MalformedCsv {
                line,
                message: format!("expected {n} columns, found {}", record.len()),
            });
        }
        let row = record
            .iter()
            .enumerate()
            .map(|(col, cell)| {
                cell.parse::<f64>()
                    .ok()
                    .filter(|x| x.is_finite())
                    .ok_or_else(|| CliError::MalformedCsv {
                        line,
                        message: format!("column {}: '{cell}' is not a finite number", col + 1),
                    })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    if rows.len() < n + 2 {
        return Err(CliError::DegenerateSample(format!(
            "{} return rows for {n} assets; need at least {}",
            rows.len(),
            n + 2
        )));
    }
    let m = rows.len() as f64;
    let data = DMatrix::from_fn(rows.len(), n, |i, j| rows[i][j]);
    let mean = DVector::from_fn(n, |j, _| data.column(j).sum() / m);
    let centered = DMatrix::from_fn(rows.len(), n, |i, j| data[(i, j)] - mean[j]);
    let cov = (centered.transpose() * &centered) / (m - 1.0) * periods_per_year;
    let cov = (&cov + cov.transpose()) * 0.5;
    // rounding leaves constant columns with tiny spurious variance
    for j in 0..n {
        let scale = data.column(j).amax();
        if cov[(j, j)].sqrt() <= 1e-12 * scale * periods_per_year.sqrt() || cov[(j, j)] == 0.0 {
            return Err(CliError::DegenerateSample(format!("column {} has constant returns", j + 1)));
        }
    }
    let eig = cov.clone().symmetric_eigenvalues();
    if eig.min() <= 1e-14 * eig.max() {
        return Err(CliError::DegenerateSample(format!(
            "sample covariance is numerically singular (eigenvalues {:e} .. {:e})",
            eig.min(),
            eig.max()
        )));
    }
    MarketModel::new(r, mean * periods_per_year, cov).map_err(|e| match e {
        ModelError::NonSpdCovariance(msg) => CliError::DegenerateSample(format!("sample covariance is singular: {msg}")),
        other => CliError::Model(other),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_returns_are_degenerate() {
        let mut csv = String::from("a,b\n");
        for _ in 0..10 {
            csv.push_str("0.01,0.02\n");
        }
        let err = estimate_market_from_reader(csv.as_bytes(), 252.0, 0.02).unwrap_err();
        assert!(matches!(err, CliError::DegenerateSample(_)), "{err}");
    }

    #[test]
    fn too_few_rows() {
        let csv = "a,b,c,d\n0.1,0.2,0.3,0.4\n0.2,0.1,0.0,0.3\n-0.1,0.0,0.2,0.1\n";
        let err = estimate_market_from_reader(csv.as_bytes(), 252.0, 0.02).unwrap_err();
        assert!(matches!(err, CliError::DegenerateSample(_)));
    }

    #[test]
    fn malformed_cells_report_line() {
        let csv = "a,b\n0.1,0.2\n0.2,x\n";
        match estimate_market_from_reader(csv.as_bytes(), 252.0, 0.02).unwrap_err() {
            CliError::MalformedCsv { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
        let csv = "a,b\n0.1,0.2\n0.2\n";
        match estimate_market_from_reader(csv.as_bytes(), 252.0, 0.02).unwrap_err() {
            CliError::MalformedCsv { line, .. } => assert_eq!(line, 3),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn small_exact_sample() {
        let csv = "a\n0.01\n0.03\n0.02\n";
        let m = estimate_market_from_reader(csv.as_bytes(), 100.0, 0.0).unwrap();
        assert!((m.mu_hat()[0] - 2.0).abs() < 1e-12);
        // sample variance 1e-4 annualized by 100
        assert!((m.cov().matrix()[(0, 0)] - 0.01).abs() < 1e-15);
    }
}
