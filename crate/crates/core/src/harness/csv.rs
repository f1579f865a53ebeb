use std::fmt::Write as _;
use std::path::Path;

use crate::mpc::{StepStatus, TrajectoryLog};

use super::HarnessError;

pub const CSV_HEADER: &str = "t,x1,x2,x3,x4,u,y_ref,e,V,w_diag,cost,status,solve_ms";

/// One parsed CSV row. `solve_ms` is NaN when timing was not recorded.
#[derive(Debug, Clone, PartialEq)]
pub struct CsvRow {
    pub t: f64,
    pub x: [f64; 4],
    pub u: f64,
    pub y_ref: f64,
    pub e: f64,
    pub v: f64,
    pub w_diag: f64,
    pub cost: f64,
    pub status: StepStatus,
    pub solve_ms: f64,
}

/// CSV text for `log`. Floats use Rust's shortest round-trip formatting, so
/// parsing the text gives back the logged values exactly. Solve times are
/// wall-clock measurements; they are written only with `with_timing` and
/// as `NaN` otherwise, which keeps repeated runs byte-identical.
pub fn write_csv(log: &TrajectoryLog, with_timing: bool) -> String {
    let mut out = String::with_capacity(160 * (log.records.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &log.records {
        let solve_ms = if with_timing { r.solve_time * 1e3 } else { f64::NAN };
        let _ = writeln!(
            out,
            "{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{:?},{},{:?}",
            r.t,
            r.x[0],
            r.x[1],
            r.x[2],
            r.x[3],
            r.u,
            r.y_ref,
            r.e,
            r.v,
            r.w_diag,
            r.cost,
            r.status.name(),
            solve_ms
        );
    }
    out
}

pub fn export_csv(log: &TrajectoryLog, path: &Path, with_timing: bool) -> Result<(), HarnessError> {
    std::fs::write(path, write_csv(log, with_timing)).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>, HarnessError> {
    let mut lines = text.lines();
    if lines.next() != Some(CSV_HEADER) {
        return Err(HarnessError::Csv {
            line: 1,
            reason: format!("expected header {CSV_HEADER:?}"),
        });
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let n = i + 2;
        let err = |reason: String| HarnessError::Csv { line: n, reason };
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 13 {
            return Err(err(format!("expected 13 fields, got {}", fields.len())));
        }
        let mut num = [0.0; 12];
        for (k, slot) in num.iter_mut().enumerate() {
            let field = fields[if k < 11 { k } else { 12 }];
            *slot = field
                .parse()
                .map_err(|_| err(format!("cannot parse {field:?} as a number")))?;
        }
        let status = StepStatus::parse(fields[11]).ok_or_else(|| err(format!("unknown status {:?}", fields[11])))?;
        rows.push(CsvRow {
            t: num[0],
            x: [num[1], num[2], num[3], num[4]],
            u: num[5],
            y_ref: num[6],
            e: num[7],
            v: num[8],
            w_diag: num[9],
            cost: num[10],
            status,
            solve_ms: num[11],
        });
    }
    Ok(rows)
}
