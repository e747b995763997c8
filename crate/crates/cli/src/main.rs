use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use formflow::flow::Axis;
use formflow::io::mm::write_matrix_market;
use formflow::io::table::write_results;
use formflow_cli::config::{MeshSource, RunConfig};
use formflow_cli::error::{CliError, CliResult};
use formflow_cli::pipeline::{export_fields, load_model, peak_memory_bytes, run_montecarlo, run_single};
use formflow_cli::report::{print, summary_csv, write_results_file, write_summary_file};

/// Darcy flow and permeability on polyhedral cell complexes.
#[derive(Parser, Debug)]
#[command(name = "formflow", version, about)]
struct Cli {
    #[command(flatten)]
    overrides: Overrides,

    /// Log verbosity: -v info, -vv debug.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

/// Configuration file and per-field overrides.
#[derive(Args, Debug, Default)]
struct Overrides {
    /// TOML run configuration.
    #[arg(short, long, global = true)]
    config: Option<PathBuf>,
    /// Structured grid cell counts NX,NY,NZ.
    #[arg(long, value_delimiter = ',', num_args = 3, global = true)]
    grid: Option<Vec<usize>>,
    /// Grid extents LX,LY,LZ (m).
    #[arg(long, value_delimiter = ',', num_args = 3, global = true)]
    size: Option<Vec<f64>>,
    /// Grid plane jitter as a fraction of the spacing, in [0, 0.5).
    #[arg(long, global = true)]
    jitter: Option<f64>,
    /// Neper .tess mesh instead of a grid.
    #[arg(long, global = true)]
    tess: Option<PathBuf>,
    /// Target porosity (fraction of the domain volume).
    #[arg(long, global = true)]
    porosity: Option<f64>,
    /// Dynamic viscosity (Pa·s).
    #[arg(long, global = true)]
    viscosity: Option<f64>,
    /// Pressure difference p₂ − p₁ (Pa).
    #[arg(long, global = true)]
    pressure_difference: Option<f64>,
    /// Flow directions, e.g. x,y,z.
    #[arg(long, value_delimiter = ',', global = true)]
    directions: Option<Vec<String>>,
    /// Monte Carlo realisation count.
    #[arg(long, global = true)]
    realisations: Option<usize>,
    /// Base seed; realisation i uses base + i.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for output files.
    #[arg(short, long, global = true)]
    output_dir: Option<PathBuf>,
    /// Regenerate the (jittered grid) tessellation per realisation.
    #[arg(long, global = true)]
    retessellate: bool,
    /// Required relative residual of the linear solve.
    #[arg(long, global = true)]
    tolerance: Option<f64>,
    /// Worker threads for Monte Carlo (0 = all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Cell counts, Euler characteristic, bounding box and volume of M.
    MeshInfo,
    /// Forman subdivision counts and measure check.
    Forman,
    /// Maps voids for one realisation and reports porosity.
    Fabric {
        /// Realisation index (seed = base seed + index).
        #[arg(long, default_value_t = 0)]
        realisation: usize,
    },
    /// Solves one pressure-drop experiment and exports pressure and fluxes.
    Solve {
        /// Flow direction: x, y or z.
        #[arg(long, default_value = "x")]
        direction: String,
        #[arg(long, default_value_t = 0)]
        realisation: usize,
    },
    /// Permeability of one realisation in every configured direction.
    Perm {
        #[arg(long, default_value_t = 0)]
        realisation: usize,
    },
    /// Seeded sweep over realisations and directions.
    Montecarlo,
    /// Writes ∂ of M and δ, ⋆, δ* of K as Matrix Market files.
    ExportOperators,
    /// Prints the effective configuration as TOML.
    ShowConfig,
}

fn effective_config(o: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::from_toml("", Path::new("."))?,
    };
    if let Some(t) = &o.tess {
        cfg.mesh = MeshSource::Tess { path: t.clone() };
    }
    if o.grid.is_some() || o.size.is_some() || o.jitter.is_some() {
        let base = match &cfg.mesh {
            MeshSource::Grid { .. } => cfg.mesh.clone(),
            MeshSource::Tess { .. } => MeshSource::default(),
        };
        let MeshSource::Grid { mut cells, mut size_m, mut jitter } = base else {
            unreachable!("grid source")
        };
        if let Some(g) = &o.grid {
            cells = [g[0], g[1], g[2]];
        }
        if let Some(s) = &o.size {
            size_m = [s[0], s[1], s[2]];
        }
        if let Some(j) = o.jitter {
            jitter = j;
        }
        cfg.mesh = MeshSource::Grid { cells, size_m, jitter };
    }
    if let Some(v) = o.porosity {
        cfg.stats.target_porosity = v;
    }
    if let Some(v) = o.viscosity {
        cfg.physics.viscosity_pa_s = v;
    }
    if let Some(v) = o.pressure_difference {
        cfg.physics.pressure_difference_pa = v;
    }
    if let Some(v) = &o.directions {
        cfg.run.directions = v.clone();
    }
    if let Some(v) = o.realisations {
        cfg.run.realisations = v;
    }
    if let Some(v) = o.seed {
        cfg.run.base_seed = v;
    }
    if let Some(v) = &o.output_dir {
        cfg.run.output_dir = v.clone();
    }
    if o.retessellate {
        cfg.run.retessellate = true;
    }
    if let Some(v) = o.tolerance {
        cfg.solver.tolerance = v;
    }
    if let Some(v) = o.threads {
        cfg.run.threads = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn run(cli: Cli) -> CliResult<()> {
    let cfg = effective_config(&cli.overrides)?;
    let out = &cfg.run.output_dir;
    match cli.command {
        Command::ShowConfig => print(&cfg.to_toml()),
        Command::MeshInfo => {
            let raw = formflow_cli::pipeline::load_mesh(&cfg, cfg.run.base_seed)?;
            let m = formflow::CellComplex64::build(&raw)?;
            let (lo, hi) = m.bounding_box();
            let vol: f64 = m.measures(3).iter().sum();
            print(&format!(
                "cells (N0, N1, N2, N3): {:?}\nEuler characteristic: {}\nbounding box (m): {lo:?} to {hi:?}\nvolume (m3): {vol:e}\nboundary faces: {}\n",
                m.counts(),
                m.euler_characteristic(),
                m.boundary_subcomplex().faces.len()
            ))
        }
        Command::Forman => {
            let model = load_model(&cfg)?;
            let k = &model.k;
            let cube_vol: f64 = k.measures(3).iter().sum();
            let vol: f64 = model.m.measures(3).iter().sum();
            print(&format!(
                "M cells: {:?}\nK cells (N0, N1, N2, N3): {:?}\nK Euler characteristic: {}\nquasi-cube volume / M volume - 1: {:e}\nbuild time (s): {:.3}\n",
                model.m.counts(),
                k.counts(),
                k.euler_characteristic(),
                cube_vol / vol - 1.0,
                model.build_s
            ))
        }
        Command::Fabric { realisation } => {
            let model = load_model(&cfg)?;
            let stats = cfg.feature_stats()?;
            let seed = cfg.run.base_seed.wrapping_add(realisation as u64);
            let f = formflow::fabric::build_fabric(&model.m, &model.k, &stats, &cfg.material(), seed)?;
            let vv = f.voids.cells.iter().filter(|c| **c == formflow::fabric::CellRole::VoluminousVoid).count();
            print(&format!(
                "seed: {seed} ({})\ntarget porosity: {}\nachieved porosity: {}\nvoluminous void cells: {vv}\nexpansive void faces: {}\n",
                formflow::fabric::RNG_ALGORITHM,
                f.target_porosity,
                f.achieved_porosity,
                f.voids.picks.len()
            ))
        }
        Command::Solve { direction, realisation } => {
            let axis = Axis::parse(&direction).ok_or_else(|| CliError::Config(format!("unknown direction '{direction}'")))?;
            let model = load_model(&cfg)?;
            let stats = cfg.feature_stats()?;
            let seed = cfg.run.base_seed.wrapping_add(realisation as u64);
            let r = run_single(&cfg, &model, &stats, realisation, seed, axis)?;
            let stem = format!("r{realisation}_{}", axis.name());
            export_fields(out, &stem, &model, &r.result)?;
            print(&format!(
                "Q (m3/s): {:e}\ninlet outward flux (m3/s): {:e}\noutlet outward flux (m3/s): {:e}\nK (m3 s/kg): {:e}\nk (m2): {:e}\nresidual: {:e}\nfields written to {}\n",
                r.result.q,
                r.result.inlet_flux,
                r.result.outlet_flux,
                r.result.conductivity,
                r.result.permeability,
                r.result.residual,
                out.display()
            ))
        }
        Command::Perm { realisation } => {
            let model = load_model(&cfg)?;
            let stats = cfg.feature_stats()?;
            let seed = cfg.run.base_seed.wrapping_add(realisation as u64);
            let mut rows = Vec::new();
            for axis in cfg.directions()? {
                rows.push(run_single(&cfg, &model, &stats, realisation, seed, axis)?.row);
            }
            write_results_file(&out.join("results.csv"), &rows)?;
            let mut buf = Vec::new();
            write_results(&mut buf, &rows)?;
            print(&String::from_utf8_lossy(&buf))
        }
        Command::Montecarlo => {
            let mc = run_montecarlo(&cfg)?;
            write_results_file(&out.join("results.csv"), &mc.rows)?;
            write_summary_file(&out.join("summary.csv"), &mc.summary)?;
            let failed = mc.rows.iter().filter(|r| r.status != "ok").count();
            print(&format!(
                "{} rows ({failed} failed) written to {}\n{}peak memory (MB): {}\n",
                mc.rows.len(),
                out.join("results.csv").display(),
                summary_csv(&mc.summary),
                peak_memory_bytes().map_or("n/a".into(), |b| format!("{:.1}", b as f64 / 1e6))
            ))
        }
        Command::ExportOperators => {
            let model = load_model(&cfg)?;
            let mut written = Vec::new();
            let mut put = |name: String, a: &formflow::OperatorMatrix64| -> CliResult<()> {
                let path = out.join(format!("{name}.mtx"));
                std::fs::create_dir_all(out).map_err(|source| CliError::Output {
                    path: out.display().to_string(),
                    source,
                })?;
                write_matrix_market(&path, a)?;
                written.push(path.display().to_string());
                Ok(())
            };
            for p in 1..=3 {
                put(format!("material_boundary_{p}"), &model.m.boundary_matrix::<f64>(p)?)?;
            }
            for p in 0..=2 {
                put(format!("forman_coboundary_{p}"), model.calc.coboundary(p))?;
            }
            for p in 0..=3 {
                put(format!("forman_hodge_{p}"), model.calc.star(p))?;
            }
            for p in 1..=3 {
                put(format!("forman_adjoint_coboundary_{p}"), model.calc.adjoint(p))?;
            }
            print(&format!("{}\n", written.join("\n")))
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("formflow: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
