use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use sgswe::scenarios::moments;
use sgswe::solver::{BottomField, StateField};

use crate::CliError;

/// Round-trip representation with 17 significant digits.
pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

/// Label for a time in file names, e.g. `0.07` or `1.2`.
pub fn time_label(t: f64) -> String {
    format!("{t}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    let file = File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(BufWriter::new(file))
}

fn io(path: &Path) -> impl Fn(std::io::Error) -> CliError + '_ {
    move |e| CliError::Io(format!("{}: {e}", path.display()))
}

/// Per-cell mean and standard deviation of `w`, `h`, `qx`, `qy` and `B`,
/// one row per cell with `i` fastest.
pub fn write_snapshot(
    path: &Path,
    state: &StateField,
    bottom: &BottomField,
) -> Result<(), CliError> {
    let k = state.k;
    let grid = &state.grid;
    let surface: Vec<f64> = state
        .cells()
        .zip(bottom.centers.chunks(k))
        .flat_map(|(c, b)| (0..k).map(move |m| c[m] + b[m]))
        .collect();
    let part = |v: usize| -> Vec<f64> {
        state
            .cells()
            .flat_map(|c| c[v * k..(v + 1) * k].iter().copied())
            .collect()
    };
    let fields = [surface, part(0), part(1), part(2), bottom.centers.clone()];
    let stats = fields
        .iter()
        .map(|f| moments(grid, k, f))
        .collect::<sgswe::Result<Vec<_>>>()
        .map_err(|e| CliError::Solver(e.to_string()))?;
    let mut w = create(path)?;
    let err = io(path);
    writeln!(
        w,
        "x,y,mean_w,std_w,mean_h,std_h,mean_qx,std_qx,mean_qy,std_qy,mean_B,std_B"
    )
    .map_err(&err)?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.center(i, j);
            let c = grid.index(i, j);
            let mut row = format!("{},{}", num(x), num(y));
            for s in &stats {
                row += &format!(",{},{}", num(s.mean[c]), num(s.std[c]));
            }
            writeln!(w, "{row}").map_err(&err)?;
        }
    }
    w.flush().map_err(&err)
}

/// Every PCE coefficient of `h`, `qx` and `qy`.
pub fn write_coefficients(path: &Path, state: &StateField) -> Result<(), CliError> {
    let k = state.k;
    let grid = &state.grid;
    let mut w = create(path)?;
    let err = io(path);
    writeln!(w, "x,y,var,k,value").map_err(&err)?;
    for j in 0..grid.ny {
        for i in 0..grid.nx {
            let (x, y) = grid.center(i, j);
            let cell = state.cell(i, j);
            for (v, name) in ["h", "qx", "qy"].iter().enumerate() {
                for m in 0..k {
                    writeln!(
                        w,
                        "{},{},{name},{m},{}",
                        num(x),
                        num(y),
                        num(cell[v * k + m])
                    )
                    .map_err(&err)?;
                }
            }
        }
    }
    w.flush().map_err(&err)
}

/// Writes both snapshot files for `state` into `dir` and returns their paths.
pub fn write_fields(
    dir: &Path,
    state: &StateField,
    bottom: &BottomField,
) -> Result<Vec<PathBuf>, CliError> {
    let label = time_label(state.t);
    let moments_path = dir.join(format!("snapshot_{label}.csv"));
    let coeffs_path = dir.join(format!("coeffs_{label}.csv"));
    write_snapshot(&moments_path, state, bottom)?;
    write_coefficients(&coeffs_path, state)?;
    Ok(vec![moments_path, coeffs_path])
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

pub fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("JSON values always serialize");
    write_text(path, &(text + "\n"))
}
