use std::io::{self, BufRead, Write};

use crate::postprocess::ConvergenceRecord;

use super::ExperimentError;

pub const CSV_HEADER: &str =
    "h,e_u,r_u,e_sigma,r_sigma,e_p,r_p,e_star,n_sigma_dofs,n_u_dofs,t_assemble_s,t_solve_s";

fn rate(r: Option<f64>) -> String {
    r.map(|v| format!("{v:.6}")).unwrap_or_default()
}

/// Writes the header and one line per record. Times are written only when
/// `timings` is set; otherwise the columns stay empty.
pub fn write_csv<W: Write>(mut w: W, records: &[ConvergenceRecord], timings: bool) -> io::Result<()> {
    writeln!(w, "{CSV_HEADER}")?;
    for r in records {
        let (ta, ts) = if timings {
            (format!("{:.6}", r.t_assemble_s), format!("{:.6}", r.t_solve_s))
        } else {
            (String::new(), String::new())
        };
        writeln!(
            w,
            "{:.10e},{:.10e},{},{:.10e},{},{:.10e},{},{:.10e},{},{},{},{}",
            r.h,
            r.e_u,
            rate(r.r_u),
            r.e_sigma,
            rate(r.r_sigma),
            r.e_p,
            rate(r.r_p),
            r.e_star,
            r.n_sigma_dofs,
            r.n_u_dofs,
            ta,
            ts
        )?;
    }
    w.flush()
}

/// Reads a CSV in the format of [`write_csv`]. Rate columns are read back as
/// written; empty time columns become zero.
pub fn read_csv<R: BufRead>(r: R) -> Result<Vec<ConvergenceRecord>, ExperimentError> {
    let mut lines = r.lines().enumerate();
    let bad = |line: usize, message: String| ExperimentError::Csv { line, message };
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == CSV_HEADER => {}
        Some((_, Ok(h))) => return Err(bad(1, format!("unexpected header `{}`", h.trim()))),
        Some((_, Err(e))) => return Err(e.into()),
        None => return Err(bad(1, "empty file".into())),
    }
    let mut out = Vec::new();
    for (i, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let no = i + 1;
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 12 {
            return Err(bad(no, format!("expected 12 fields, found {}", f.len())));
        }
        let num = |k: usize| -> Result<f64, ExperimentError> {
            f[k].parse::<f64>().map_err(|_| bad(no, format!("field {} is not a number: `{}`", k + 1, f[k])))
        };
        let opt = |k: usize| -> Result<Option<f64>, ExperimentError> {
            if f[k].is_empty() {
                Ok(None)
            } else {
                num(k).map(Some)
            }
        };
        let count = |k: usize| -> Result<usize, ExperimentError> {
            f[k].parse::<usize>().map_err(|_| bad(no, format!("field {} is not a count: `{}`", k + 1, f[k])))
        };
        out.push(ConvergenceRecord {
            h: num(0)?,
            e_u: num(1)?,
            r_u: opt(2)?,
            e_sigma: num(3)?,
            r_sigma: opt(4)?,
            e_p: num(5)?,
            r_p: opt(6)?,
            e_star: num(7)?,
            n_sigma_dofs: count(8)?,
            n_u_dofs: count(9)?,
            t_assemble_s: opt(10)?.unwrap_or(0.0),
            t_solve_s: opt(11)?.unwrap_or(0.0),
        });
    }
    Ok(out)
}
