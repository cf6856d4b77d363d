//! CSV and JSON writers. Floats carry 17 significant digits so every value
//! parses back to the same bits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use gaugesymp::Trajectory;
use serde::Serialize;

use crate::CliError;

pub fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        // NaN / inf / -inf
        format!("{x}")
    }
}

/// Column names for `n` degrees of freedom: `q,p` when `n == 1`, otherwise
/// `q1..qn,p1..pn`.
pub fn coordinate_header(n: usize) -> String {
    if n == 1 {
        "q,p".into()
    } else {
        let q = (1..=n).map(|i| format!("q{i}"));
        let p = (1..=n).map(|i| format!("p{i}"));
        q.chain(p).collect::<Vec<_>>().join(",")
    }
}

/// Free text made safe for a CSV field.
pub fn field(text: &str) -> String {
    text.replace([',', '\n', '\r'], ";")
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", dir.display())))
}

/// Writes `path` through `fill`; a failure leaves no file behind.
pub fn write_file<F>(path: &Path, fill: F) -> Result<(), CliError>
where
    F: FnOnce(&mut dyn Write) -> std::io::Result<()>,
{
    let result = File::create(path).and_then(|file| {
        let mut out = BufWriter::new(file);
        fill(&mut out)?;
        out.flush()
    });
    result.map_err(|e| {
        let _ = fs::remove_file(path);
        CliError::Runtime(format!("cannot write {}: {e}", path.display()))
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("summary serializes");
    write_file(path, |out| writeln!(out, "{text}"))
}

pub fn write_trajectory(path: &Path, traj: &Trajectory) -> Result<(), CliError> {
    let n = traj.initial().map_or(1, |z| z.dim());
    let deviation = traj.energy_deviation();
    write_file(path, |out| {
        writeln!(out, "t,{},H,dH,residual,iters", coordinate_header(n))?;
        for (k, (z, dh)) in traj.states.iter().zip(&deviation).enumerate() {
            write!(out, "{}", num(traj.times[k]))?;
            for v in z.q().iter().chain(z.p()) {
                write!(out, ",{}", num(*v))?;
            }
            writeln!(
                out,
                ",{},{},{},{}",
                num(traj.energies[k]),
                num(*dh),
                num(traj.residuals[k]),
                traj.iterations[k]
            )?;
        }
        Ok(())
    })
}

/// Removes a stale output from an earlier run of the same experiment.
pub fn discard(path: &Path) {
    let _ = fs::remove_file(path);
}

/// Fixed-width text table for the terminal.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        cells
            .iter()
            .zip(&widths)
            .map(|(c, w)| format!("{c:<w$}"))
            .collect::<Vec<_>>()
            .join("  ")
            .trim_end()
            .to_string()
    };
    let mut text = line(header.to_vec());
    text.push('\n');
    text.push_str(
        &widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("  "),
    );
    for row in rows {
        text.push('\n');
        text.push_str(&line(row.iter().map(String::as_str).collect()));
    }
    text.push('\n');
    text
}
