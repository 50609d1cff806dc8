use super::ErrorReport;
use crate::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const CSV_HEADER: [&str; 13] = [
    "h", "e_sigma", "r_sigma", "e_u", "r_u", "e_gamma", "r_gamma", "e_p", "r_p", "e_rho", "r_rho",
    "e_phi", "r_phi",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateRow {
    pub report: ErrorReport,
    /// Rates against the previous row, in `ErrorReport::values` order.
    pub rates: Option<[f64; 6]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateTable {
    pub rows: Vec<RateRow>,
}

/// Sorts by decreasing `h` and computes `log(e/e′) / log(h/h′)` for consecutive rows.
pub fn rate_table(reports: &[ErrorReport]) -> Result<RateTable> {
    if reports.len() < 2 {
        return Err(Error::Config(
            "a rate table needs at least two error reports".into(),
        ));
    }
    let mut sorted = reports.to_vec();
    sorted.sort_by(|a, b| b.h.total_cmp(&a.h));
    let mut rows: Vec<RateRow> = Vec::with_capacity(sorted.len());
    for (i, rep) in sorted.iter().enumerate() {
        let rates = if i == 0 {
            None
        } else {
            let prev = &sorted[i - 1];
            if prev.h == rep.h {
                return Err(Error::DuplicateMeshSize(rep.h));
            }
            let lh = (prev.h / rep.h).ln();
            let (a, b) = (prev.values(), rep.values());
            Some(std::array::from_fn(|k| (a[k] / b[k]).ln() / lh))
        };
        rows.push(RateRow {
            report: *rep,
            rates,
        });
    }
    Ok(RateTable { rows })
}

impl RateTable {
    /// Rates of the last (finest) pair.
    pub fn finest_rates(&self) -> [f64; 6] {
        self.rows
            .last()
            .and_then(|r| r.rates)
            .expect("table has at least two rows")
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(CSV_HEADER)?;
        for row in &self.rows {
            let e = row.report.values();
            let mut rec = vec![format!("{:.6e}", row.report.h)];
            for k in 0..6 {
                rec.push(format!("{:.6e}", e[k]));
                rec.push(row.rates.map_or(String::new(), |r| format!("{:.4}", r[k])));
            }
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Config(e.to_string()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }
}
