//! CSV and JSON exchange formats.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::degree::{EssInfReport, WindingResult};
use crate::error::{Error, Result};
use crate::oscillation::{OscillationProfile, PlanarField, WeightRow};
use crate::signal::{Domain, SampledSignal};
use crate::zak::{FrameDiagnostics, ZakField};

/// Relative tolerance on the spacing of `t` in signal files.
pub const SPACING_TOLERANCE: f64 = 1e-12;

fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("json")
}

fn write_json(path: &Path, value: &impl Serialize) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
struct SignalRow {
    t: f64,
    re: f64,
    im: f64,
}

pub fn write_signal_csv(path: impl AsRef<Path>, f: &SampledSignal) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (i, z) in f.samples().iter().enumerate() {
        w.serialize(SignalRow {
            t: f.time_of(i),
            re: z.re,
            im: z.im,
        })?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a `t,re,im` file, checking that `t` increases with constant spacing.
pub fn read_signal_csv(path: impl AsRef<Path>) -> Result<SampledSignal> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<std::result::Result<Vec<SignalRow>, _>>()?;
    if rows.len() < 2 {
        return Err(Error::Format("a signal file needs at least two rows".into()));
    }
    let step = (rows[rows.len() - 1].t - rows[0].t) / (rows.len() - 1) as f64;
    if !(step > 0.0) {
        return Err(Error::Format("sample times must increase".into()));
    }
    for (i, row) in rows.iter().enumerate() {
        let expected = rows[0].t + i as f64 * step;
        if (row.t - expected).abs() > SPACING_TOLERANCE * step.max(expected.abs()) {
            return Err(Error::Format(format!(
                "row {i}: t = {} breaks the constant spacing {step}",
                row.t
            )));
        }
    }
    SampledSignal::new(
        rows[0].t,
        step,
        rows.iter().map(|r| Complex64::new(r.re, r.im)).collect(),
        Domain::Time,
    )
}

#[derive(Serialize, Deserialize)]
struct ZakRow {
    j: usize,
    k: usize,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct ZakSidecar {
    pub nx: usize,
    pub ny: usize,
    pub source: String,
}

/// Writes `j,k,re,im` rows and a `{nx, ny, source}` sidecar next to `path`.
pub fn write_zak_csv(path: impl AsRef<Path>, z: &ZakField, source: &str) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for j in 0..z.nx() {
        for k in 0..z.ny() {
            let v = z.get(j, k);
            w.serialize(ZakRow { j, k, re: v.re, im: v.im })?;
        }
    }
    w.flush()?;
    write_json(
        &sidecar(path),
        &ZakSidecar {
            nx: z.nx(),
            ny: z.ny(),
            source: source.to_string(),
        },
    )
}

pub fn read_zak_csv(path: impl AsRef<Path>) -> Result<(ZakField, ZakSidecar)> {
    let path = path.as_ref();
    let meta: ZakSidecar = serde_json::from_reader(File::open(sidecar(path))?)?;
    let mut values = vec![None; meta.nx * meta.ny];
    for row in csv::Reader::from_path(path)?.deserialize() {
        let row: ZakRow = row?;
        if row.j >= meta.nx || row.k >= meta.ny {
            return Err(Error::Format(format!("index ({}, {}) outside the grid", row.j, row.k)));
        }
        values[row.j * meta.ny + row.k] = Some(Complex64::new(row.re, row.im));
    }
    let values = values
        .into_iter()
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| Error::Format("missing Zak grid values".into()))?;
    Ok((ZakField::from_values(meta.nx, meta.ny, values)?, meta))
}

pub fn write_frame_diagnostics_json(path: impl AsRef<Path>, d: &FrameDiagnostics) -> Result<()> {
    write_json(path.as_ref(), d)
}

#[derive(Serialize)]
struct FieldRow {
    x: f64,
    y: f64,
    re: f64,
    im: f64,
}

#[derive(Serialize, Deserialize, Debug, PartialEq)]
pub struct FieldSidecar {
    pub origin: (f64, f64),
    pub step: f64,
    pub nx: usize,
    pub ny: usize,
    pub periodic_extent: Option<f64>,
}

/// Writes `x,y,re,im` rows and a grid sidecar next to `path`.
pub fn write_field_csv(path: impl AsRef<Path>, f: &PlanarField) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for ix in 0..f.nx() {
        for iy in 0..f.ny() {
            let v = f.get(ix, iy);
            w.serialize(FieldRow {
                x: f.x_of(ix),
                y: f.y_of(iy),
                re: v.re,
                im: v.im,
            })?;
        }
    }
    w.flush()?;
    write_json(
        &sidecar(path),
        &FieldSidecar {
            origin: f.origin(),
            step: f.step(),
            nx: f.nx(),
            ny: f.ny(),
            periodic_extent: f.periodic_extent(),
        },
    )
}

pub fn write_profile_csv(path: impl AsRef<Path>, p: &OscillationProfile) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["scale", "omega"])?;
    for (a, v) in p.scales.iter().zip(&p.values) {
        w.write_record([a.to_string(), v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_weight_table(path: impl AsRef<Path>, rows: &[WeightRow]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["k0", "p", "max_mass", "argmax_cube", "decay_term"])?;
    for r in rows {
        let c = r.argmax_cube;
        w.write_record([
            r.k0.to_string(),
            r.p.to_string(),
            r.max_mass.to_string(),
            format!("{}:{}:{}", c.scale_exp, c.anchor.0, c.anchor.1),
            r.decay_term.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Serialize)]
struct WindingJson {
    winding: i64,
    min_modulus_on_path: f64,
    max_phase_step: f64,
    eps: Option<f64>,
    path_points: usize,
}

pub fn write_winding_json(path: impl AsRef<Path>, w: &WindingResult) -> Result<()> {
    write_json(
        path.as_ref(),
        &WindingJson {
            winding: w.winding,
            min_modulus_on_path: w.min_modulus_on_path,
            max_phase_step: w.max_phase_step,
            eps: w.eps,
            path_points: w.path_points,
        },
    )
}

pub fn write_ess_inf_csv(path: impl AsRef<Path>, r: &EssInfReport) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["eps", "min_mod", "x", "y", "winding"])?;
    for row in &r.rows {
        w.write_record([
            row.eps.to_string(),
            row.min_mod.to_string(),
            row.x.to_string(),
            row.y.to_string(),
            row.winding.map(|v| v.to_string()).unwrap_or_default(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
