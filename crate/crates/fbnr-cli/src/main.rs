//! Experiment harness: halfspace benchmarks, mesh-convergence studies and
//! local error maps, emitted as reproducible CSV/JSON artifacts.

mod output;
mod spec;

use std::fs;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use fbnr::initguess::{initial_orientation, GradientMethod};
use fbnr::mesh::{build_neighborhood, StencilKind};
use fbnr::metrics::{convergence_order, normal_alignment, symmetric_volume_error};
use fbnr::reconstruct::{
    assign_weights, error_map, extend_stencil, reconstruct_field, reconstruct_stencil,
    ReconConfig, Scheme,
};
use fbnr::surfaces::{init_volume_fractions, interface_cells, Hypersurface};
use fbnr::Vec3;

use spec::ExperimentSpec;

#[derive(Parser)]
#[command(name = "fbnr", version, about = "PLIC interface reconstruction benchmarks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonArgs {
    /// Mesh source: `cube:N` or `vtk:path`.
    #[arg(long = "mesh", required = true)]
    meshes: Vec<String>,
    /// Surface specification (JSON file); the halfspace benchmark plane when
    /// omitted.
    #[arg(long)]
    surface: Option<PathBuf>,
    /// Neighborhood kind.
    #[arg(long, value_parser = parse_stencil, default_value = "vertex")]
    stencil: StencilKind,
    /// Reconstruction scheme(s).
    #[arg(long = "scheme", value_parser = clap::value_parser!(Scheme), default_values_t = [Scheme::Fbnr])]
    schemes: Vec<Scheme>,
    /// Seed override for seeded surfaces.
    #[arg(long)]
    seed: Option<u64>,
    /// Subdivision depth of the volume-fraction initializer.
    #[arg(long, default_value_t = 3)]
    depth: usize,
    /// JSON file with reconstruction-parameter overrides (any subset of the
    /// ReconConfig fields).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

/// Partial ReconConfig, merged over the stencil-kind default.
#[derive(Debug, Clone, Default, serde::Deserialize)]
struct ConfigOverrides {
    grad_tol: Option<f64>,
    max_iters: Option<usize>,
    line_search_max: Option<usize>,
    box_theta: Option<f64>,
    box_exponent: Option<i32>,
    bulk_weight: Option<f64>,
    eps_alpha: Option<f64>,
}

fn build_config(common: &CommonArgs) -> Result<ReconConfig> {
    let mut config = ReconConfig::for_stencil(common.stencil);
    if let Some(path) = &common.config {
        let text = fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let ov: ConfigOverrides = serde_json::from_str(&text).context("parsing config")?;
        if let Some(v) = ov.grad_tol {
            config.grad_tol = v;
        }
        if let Some(v) = ov.max_iters {
            config.max_iters = v;
        }
        if let Some(v) = ov.line_search_max {
            config.line_search_max = v;
        }
        if let Some(v) = ov.box_theta {
            config.box_theta = v;
        }
        if let Some(v) = ov.box_exponent {
            config.box_exponent = v;
        }
        if let Some(v) = ov.bulk_weight {
            config.bulk_weight = v;
        }
        if let Some(v) = ov.eps_alpha {
            config.eps_alpha = v;
        }
    }
    Ok(config)
}

#[derive(Subcommand)]
enum Command {
    /// Reconstruct an exactly representable halfspace and report per-cell
    /// errors and outliers.
    Halfspace {
        #[command(flatten)]
        common: CommonArgs,
        /// Normal-alignment threshold above which a cell counts as outlier.
        #[arg(long, default_value_t = 1e-6)]
        outlier_threshold: f64,
    },
    /// Run a resolution sweep and fit convergence orders.
    Convergence {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Emit the local error map of one stencil.
    Errormap {
        #[command(flatten)]
        common: CommonArgs,
        /// Center cell label.
        #[arg(long)]
        cell: usize,
        /// Half resolution M of the 2M x M orientation grid.
        #[arg(long, default_value_t = 60)]
        grid_half_res: usize,
    },
    /// Initialize volume fractions and write the field.
    Init {
        #[command(flatten)]
        common: CommonArgs,
    },
}

fn parse_stencil(s: &str) -> Result<StencilKind, String> {
    match s {
        "face" => Ok(StencilKind::Face),
        "edge" => Ok(StencilKind::Edge),
        "vertex" => Ok(StencilKind::Vertex),
        other => Err(format!("unknown stencil kind `{other}`")),
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Halfspace {
            common,
            outlier_threshold,
        } => run_halfspace(common, outlier_threshold),
        Command::Convergence { common } => run_convergence(common),
        Command::Errormap {
            common,
            cell,
            grid_half_res,
        } => run_errormap(common, cell, grid_half_res),
        Command::Init { common } => run_init(common),
    }
}

/// The reference plane used throughout the halfspace benchmark.
fn benchmark_halfspace() -> Hypersurface {
    Hypersurface::halfspace(
        Vec3::new(0.4534, 0.5442, 0.4330),
        Vec3::new(1.0, -3.0, 6.0) / 46.0_f64.sqrt(),
    )
}

fn load_surface(common: &CommonArgs, default_halfspace: bool) -> Result<Hypersurface> {
    let mut surface = match &common.surface {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading surface spec {}", path.display()))?;
            serde_json::from_str(&text).context("parsing surface spec")?
        }
        None if default_halfspace => benchmark_halfspace(),
        None => bail!("--surface is required for this subcommand"),
    };
    if let (Some(seed), Hypersurface::PerturbedSphere(p)) = (common.seed, &mut surface) {
        *p = fbnr::surfaces::PerturbedSphere::new(p.center, p.radius, p.l_max, p.sigma0, seed);
    }
    Ok(surface)
}

fn run_halfspace(common: CommonArgs, outlier_threshold: f64) -> Result<()> {
    let surface = load_surface(&common, true)?;
    let Some(plane) = surface.as_plane() else {
        bail!("the halfspace subcommand needs a halfspace surface");
    };
    let n_ref = plane.normal();
    fs::create_dir_all(&common.out)?;

    let config = build_config(&common)?;
    for (scheme, mesh_name, mesh) in spec::mesh_matrix(&common)? {
        let exp = ExperimentSpec::new(&common, scheme, &mesh_name, &surface, &config);
        let field = init_volume_fractions(&mesh, &surface, common.depth)?;
        let sweep = reconstruct_field(&mesh, &field, &config, scheme);

        let mut rows = Vec::new();
        let mut outliers = Vec::new();
        let mut iter_total = 0usize;
        for (&k, res) in &sweep.results {
            let dn = (1.0 - res.normal.dot(&n_ref)).abs();
            iter_total += res.iterations;
            if dn > outlier_threshold {
                outliers.push(k);
            }
            rows.push(output::HalfspaceRow {
                cell: k,
                alpha: field.alpha[k],
                error: res.error,
                grad_norm: res.grad_norm,
                iterations: res.iterations,
                status: res.status,
                dn,
            });
        }

        let tag = format!("{scheme}_{}", spec::file_tag(&mesh_name));
        output::write_halfspace_cells(&common.out.join(format!("cells_{tag}.csv")), &exp, &rows)?;
        output::write_results(
            &common.out.join(format!("results_{tag}.csv")),
            &exp,
            &sweep.results,
        )?;
        for &k in &outliers {
            output::write_trace(
                &common.out.join(format!("trace_{tag}_cell{k}.csv")),
                &exp,
                &sweep.results[&k].trace,
            )?;
        }
        let summary = serde_json::json!({
            "spec_hash": exp.hash(),
            "scheme": scheme.to_string(),
            "mesh": mesh_name,
            "interface_cells": sweep.results.len(),
            "failures": sweep.failures.len(),
            "outlier_threshold": outlier_threshold,
            "outliers": outliers,
            "max_error": rows.iter().map(|r| r.error).fold(0.0_f64, f64::max),
            "max_dn": rows.iter().map(|r| r.dn).fold(0.0_f64, f64::max),
            "mean_iterations": iter_total as f64 / sweep.results.len().max(1) as f64,
        });
        fs::write(
            common.out.join(format!("summary_{tag}.json")),
            serde_json::to_string_pretty(&summary)?,
        )?;
        println!(
            "halfspace {tag}: {} cells, {} outliers, max E {:.3e}, max dn {:.3e}",
            rows.len(),
            outliers.len(),
            summary["max_error"].as_f64().unwrap_or(f64::NAN),
            summary["max_dn"].as_f64().unwrap_or(f64::NAN),
        );
    }
    Ok(())
}

fn run_convergence(common: CommonArgs) -> Result<()> {
    if common.meshes.is_empty() {
        bail!("convergence needs at least one --mesh");
    }
    let surface = load_surface(&common, false)?;
    fs::create_dir_all(&common.out)?;

    let config = build_config(&common)?;
    let mut rows: Vec<output::ConvergenceRow> = Vec::new();
    for scheme in &common.schemes {
        let mut points_dn = Vec::new();
        let mut points_dv = Vec::new();
        let mut pending = Vec::new();
        for mesh_name in &common.meshes {
            let mesh = spec::load_mesh(mesh_name)?;
            let field = init_volume_fractions(&mesh, &surface, common.depth)?;
            let sweep = reconstruct_field(&mesh, &field, &config, *scheme);
            let n_interface = interface_cells(&field, config.eps_alpha).len();
            let resolution = (n_interface as f64).sqrt();
            let dn = normal_alignment(&mesh, &sweep.results, &field)?;
            let dv = symmetric_volume_error(&mesh, &sweep.results, &field, &surface)?;
            points_dn.push((resolution, dn.value));
            points_dv.push((resolution, dv.value));
            let exp = ExperimentSpec::new(&common, *scheme, mesh_name, &surface, &config);
            output::write_results(
                &common
                    .out
                    .join(format!("results_{scheme}_{}.csv", spec::file_tag(mesh_name))),
                &exp,
                &sweep.results,
            )?;
            pending.push(output::ConvergenceRow {
                scheme: *scheme,
                resolution: mesh_name.clone(),
                sqrt_n_interface: resolution,
                n_interface_cells: n_interface,
                mean_dn: dn.value,
                mean_dv: dv.value,
                fitted_order_dn: f64::NAN,
                fitted_order_dv: f64::NAN,
            });
            println!(
                "convergence {scheme} {mesh_name}: N_if {n_interface}, dn {:.4e}, dv {:.4e}",
                dn.value, dv.value
            );
        }
        let order_dn = convergence_order(&points_dn).unwrap_or(f64::NAN);
        let order_dv = convergence_order(&points_dv).unwrap_or(f64::NAN);
        for mut row in pending {
            row.fitted_order_dn = order_dn;
            row.fitted_order_dv = order_dv;
            rows.push(row);
        }
        println!("convergence {scheme}: order dn {order_dn:.2}, order dv {order_dv:.2}");
    }

    let exp = ExperimentSpec::new(
        &common,
        *common.schemes.first().unwrap_or(&Scheme::Fbnr),
        &common.meshes.join("+"),
        &surface,
        &config,
    );
    output::write_convergence(&common.out.join("convergence.csv"), &exp, &rows)?;
    Ok(())
}

fn run_errormap(common: CommonArgs, cell: usize, grid_half_res: usize) -> Result<()> {
    let surface = load_surface(&common, true)?;
    fs::create_dir_all(&common.out)?;
    let mesh_name = common
        .meshes
        .first()
        .context("errormap needs exactly one --mesh")?;
    let mesh = spec::load_mesh(mesh_name)?;
    let field = init_volume_fractions(&mesh, &surface, common.depth)?;
    if field.is_bulk(cell) {
        bail!("cell {cell} is not an interface cell");
    }

    let config = build_config(&common)?;
    let stencil = build_neighborhood(&mesh, cell, common.stencil);
    let (stencil, _) = extend_stencil(&mesh, &stencil, &field);
    let weights = assign_weights(&stencil, &field, &config);
    let rows = error_map(&mesh, &stencil, &field, &weights, grid_half_res);

    // Minimization trace from the least-squares initial guess.
    let p0 = initial_orientation(&mesh, &stencil, &field, GradientMethod::LseStar)?;
    let result = reconstruct_stencil(&mesh, &stencil, &field, &weights, p0, &config)?;

    let exp = ExperimentSpec::new(&common, Scheme::Fbnr, mesh_name, &surface, &config);
    output::write_error_map(&common.out.join("map.csv"), &exp, &rows)?;
    output::write_trace(&common.out.join("trace.csv"), &exp, &result.trace)?;
    output::write_stencil(&common.out.join("stencil.csv"), &exp, &stencil, &field)?;
    println!(
        "errormap cell {cell}: {} rows, final status {:?}",
        rows.len(),
        result.status
    );
    Ok(())
}

fn run_init(common: CommonArgs) -> Result<()> {
    let surface = load_surface(&common, true)?;
    fs::create_dir_all(&common.out)?;
    let mesh_name = common
        .meshes
        .first()
        .context("init needs exactly one --mesh")?;
    let mesh = spec::load_mesh(mesh_name)?;
    let field = init_volume_fractions(&mesh, &surface, common.depth)?;

    let config = build_config(&common)?;
    let exp = ExperimentSpec::new(&common, Scheme::Fbnr, mesh_name, &surface, &config);
    output::write_field(&common.out.join("field.csv"), &exp, &field)?;
    fs::write(
        common.out.join("field.json"),
        serde_json::to_string(&field)?,
    )?;
    let total: f64 = field
        .alpha
        .iter()
        .zip(&mesh.cells)
        .map(|(a, c)| a * c.volume)
        .sum();
    println!(
        "init {mesh_name}: {} interface cells, enclosed volume {total:.12}",
        interface_cells(&field, fbnr::EPS_ALPHA).len()
    );
    Ok(())
}
