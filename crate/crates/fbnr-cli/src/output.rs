//! CSV writers. Every file starts with a comment line naming the units and
//! the experiment spec hash, followed by the column header.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::Result;

use fbnr::mesh::Stencil;
use fbnr::reconstruct::{ErrorMapRow, Scheme, Status, TraceStep};
use fbnr::surfaces::VolumeFractionField;

use crate::spec::ExperimentSpec;

fn open(path: &Path, exp: &ExperimentSpec) -> Result<BufWriter<File>> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(
        w,
        "# units: angles rad, lengths mesh units, volumes mesh units^3; spec_hash: {}",
        exp.hash()
    )?;
    Ok(w)
}

fn status_str(s: Status) -> &'static str {
    match s {
        Status::Converged => "converged",
        Status::MaxIters => "max-iters",
        Status::Degenerate => "degenerate",
    }
}

/// Generic reconstruction dump, one row per interface cell.
pub fn write_results(
    path: &Path,
    exp: &ExperimentSpec,
    results: &std::collections::BTreeMap<usize, fbnr::reconstruct::ReconstructionResult>,
) -> Result<()> {
    let mut w = open(path, exp)?;
    writeln!(
        w,
        "cell_id,phi,theta,s,nx,ny,nz,error,grad_norm,iters,status"
    )?;
    for (k, r) in results {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{},{},{},{}",
            k,
            r.phi,
            r.theta,
            r.s,
            r.normal.x,
            r.normal.y,
            r.normal.z,
            r.error,
            r.grad_norm,
            r.iterations,
            status_str(r.status)
        )?;
    }
    Ok(())
}

pub struct HalfspaceRow {
    pub cell: usize,
    pub alpha: f64,
    pub error: f64,
    pub grad_norm: f64,
    pub iterations: usize,
    pub status: Status,
    pub dn: f64,
}

pub fn write_halfspace_cells(
    path: &Path,
    exp: &ExperimentSpec,
    rows: &[HalfspaceRow],
) -> Result<()> {
    let mut w = open(path, exp)?;
    writeln!(w, "cell_id,alpha,error,grad_norm,iterations,status,dn")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.cell,
            r.alpha,
            r.error,
            r.grad_norm,
            r.iterations,
            status_str(r.status),
            r.dn
        )?;
    }
    Ok(())
}

pub struct ConvergenceRow {
    pub scheme: Scheme,
    pub resolution: String,
    pub sqrt_n_interface: f64,
    pub n_interface_cells: usize,
    pub mean_dn: f64,
    pub mean_dv: f64,
    pub fitted_order_dn: f64,
    pub fitted_order_dv: f64,
}

pub fn write_convergence(
    path: &Path,
    exp: &ExperimentSpec,
    rows: &[ConvergenceRow],
) -> Result<()> {
    let mut w = open(path, exp)?;
    writeln!(
        w,
        "scheme,resolution,sqrt_n_interface,n_interface_cells,mean_dn,mean_dv,fitted_order_dn,fitted_order_dv"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{},{}",
            r.scheme,
            r.resolution,
            r.sqrt_n_interface,
            r.n_interface_cells,
            r.mean_dn,
            r.mean_dv,
            r.fitted_order_dn,
            r.fitted_order_dv
        )?;
    }
    Ok(())
}

pub fn write_error_map(path: &Path, exp: &ExperimentSpec, rows: &[ErrorMapRow]) -> Result<()> {
    let mut w = open(path, exp)?;
    writeln!(
        w,
        "phi,theta,log10_error,grad_dir_phi,grad_dir_theta,step_dir_phi,step_dir_theta"
    )?;
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{},{},{}",
            r.phi, r.theta, r.log10_error, r.grad_dir.0, r.grad_dir.1, r.step_dir.0, r.step_dir.1
        )?;
    }
    Ok(())
}

pub fn write_trace(path: &Path, exp: &ExperimentSpec, trace: &[TraceStep]) -> Result<()> {
    let mut w = open(path, exp)?;
    writeln!(w, "iteration,phi,theta,error,grad_norm,kind")?;
    for (i, t) in trace.iter().enumerate() {
        let kind = match t.kind {
            fbnr::reconstruct::StepKind::Init => "init",
            fbnr::reconstruct::StepKind::GaussNewton => "gauss-newton",
            fbnr::reconstruct::StepKind::SteepestDescent => "steepest-descent",
        };
        writeln!(
            w,
            "{},{},{},{},{},{}",
            i, t.phi, t.theta, t.error, t.grad_norm, kind
        )?;
    }
    Ok(())
}

pub fn write_stencil(
    path: &Path,
    exp: &ExperimentSpec,
    stencil: &Stencil,
    field: &VolumeFractionField,
) -> Result<()> {
    let mut w = open(path, exp)?;
    writeln!(w, "member,cell_id,alpha,is_center")?;
    for (i, &k) in stencil.members.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{}",
            i,
            k,
            field.alpha[k],
            (k == stencil.center) as u8
        )?;
    }
    Ok(())
}

pub fn write_field(path: &Path, exp: &ExperimentSpec, field: &VolumeFractionField) -> Result<()> {
    let mut w = open(path, exp)?;
    field.write_csv(&mut w)?;
    Ok(())
}
