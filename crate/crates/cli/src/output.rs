//! CSV and JSON writers. Floats are written with 17 significant digits.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use shortpulse::bessel::KernelBounds;
use shortpulse::evolution::TrajectorySample;
use shortpulse::hodograph::XFields;

use crate::CliError;

pub fn num(v: f64) -> String {
    format!("{v:.16e}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut out = create(path)?;
    serde_json::to_writer_pretty(&mut out, value).map_err(|e| CliError::Config(e.to_string()))?;
    writeln!(out)?;
    out.flush()?;
    Ok(())
}

pub fn write_trajectory(path: &Path, samples: &[TrajectorySample]) -> Result<(), CliError> {
    let mut out = create(path)?;
    writeln!(out, "t,E_minus1,E_0,E_1,q_inf,mass_residual,x1_norm,flag")?;
    for s in samples {
        let c = &s.conserved;
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            num(s.t),
            num(c.e_minus1),
            num(c.e_0),
            num(c.e_1),
            num(s.q_inf),
            num(s.mass_residual),
            num(s.x1_norm),
            s.flag
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_fields(path: &Path, fields: &XFields) -> Result<(), CliError> {
    let mut out = create(path)?;
    writeln!(out, "x,u,u_x,u_xx")?;
    let xs = fields.grid.points();
    for (j, x) in xs.iter().enumerate() {
        writeln!(
            out,
            "{},{},{},{}",
            num(*x),
            num(fields.u.values()[j]),
            num(fields.u_x.values()[j]),
            num(fields.u_xx.values()[j])
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_kernels(path: &Path, rows: &[KernelBounds]) -> Result<(), CliError> {
    let mut out = create(path)?;
    writeln!(out, "t,sup_K,l2_K,sup_J,C_inf_fit,C_l2_fit")?;
    for b in rows {
        writeln!(
            out,
            "{},{},{},{},{},{}",
            num(b.t),
            num(b.sup_k),
            num(b.l2_k),
            num(b.sup_j),
            num(b.c_inf_fit),
            num(b.c_l2_fit)
        )?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_convergence(path: &Path, param: &str, rows: &[(f64, f64)]) -> Result<(), CliError> {
    let mut out = create(path)?;
    writeln!(out, "{param},error")?;
    for (p, e) in rows {
        writeln!(out, "{},{}", num(*p), num(*e))?;
    }
    out.flush()?;
    Ok(())
}
