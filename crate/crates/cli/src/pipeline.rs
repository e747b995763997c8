//! Build → subdivide → fabric → solve → permeability, for single runs and
//! Monte Carlo sweeps.

use std::path::Path;
use std::time::Instant;

use formflow::fabric::{build_fabric, FabricAssignment, FeatureStats};
use formflow::flow::{permeability, pressure_drop_faces, pressure_drop_problem, solve_steady, Axis, FlowSolution};
use formflow::io::grid::{jittered_raw, rectilinear_raw, structured_raw};
use formflow::io::table::{write_field, write_file, write_flux_report, FieldRow, FluxRow, ResultRow};
use formflow::io::tess::parse_tess;
use formflow::io::vtk::to_vtk_points;
use formflow::{CellComplex64, CellId, DiscreteCalculus, FormanComplex64, RawComplex};
use log::info;
use rayon::prelude::*;

use crate::config::{MeshSource, RunConfig};
use crate::error::{CliError, CliResult};

/// Material complex, its Forman subdivision and the operators on it.
pub struct Model {
    pub m: CellComplex64,
    pub k: FormanComplex64,
    pub calc: DiscreteCalculus<f64>,
    pub build_s: f64,
}

impl Model {
    pub fn build(raw: &RawComplex) -> CliResult<Self> {
        let t = Instant::now();
        let m = CellComplex64::build(raw)?;
        let k = FormanComplex64::build(&m)?;
        let calc = DiscreteCalculus::new(&k)?;
        let build_s = t.elapsed().as_secs_f64();
        info!("model: M cells {:?}, K cells {:?}, built in {build_s:.3} s", m.counts(), k.counts());
        Ok(Model { m, k, calc, build_s })
    }
}

/// Raw mesh of the configured source. `seed` selects the jitter of a grid.
pub fn load_mesh(cfg: &RunConfig, seed: u64) -> CliResult<RawComplex> {
    Ok(match &cfg.mesh {
        MeshSource::Grid { cells, size_m, jitter } if *jitter > 0.0 => jittered_raw(*cells, *size_m, *jitter, seed)?,
        MeshSource::Grid { cells, size_m, .. } => structured_raw(*cells, *size_m)?,
        MeshSource::Tess { path } => {
            let t = parse_tess(path)?;
            info!("{}: .tess {} with {} polyhedra, domain {}", path.display(), t.version, t.polyhedra.len(), t.domain);
            t.to_raw()
        }
    })
}

/// Model of the fixed tessellation (the first realisation's when retessellating).
pub fn load_model(cfg: &RunConfig) -> CliResult<Model> {
    Model::build(&load_mesh(cfg, cfg.run.base_seed)?)
}

/// Rectilinear model from explicit plane coordinates.
pub fn rectilinear_model(xs: &[f64], ys: &[f64], zs: &[f64]) -> CliResult<Model> {
    Model::build(&rectilinear_raw(xs, ys, zs)?)
}

/// Peak resident set size in bytes, where the platform reports it.
pub fn peak_memory_bytes() -> Option<u64> {
    let status = std::fs::read_to_string("/proc/self/status").ok()?;
    let line = status.lines().find(|l| l.starts_with("VmHWM:"))?;
    let kb: u64 = line.split_whitespace().nth(1)?.parse().ok()?;
    Some(kb * 1024)
}

/// One solved pressure-drop experiment.
pub struct DirectionResult {
    pub axis: Axis,
    pub q: f64,
    pub conductivity: f64,
    pub permeability: f64,
    pub residual: f64,
    pub inlet_flux: f64,
    pub outlet_flux: f64,
    pub solution: FlowSolution<f64>,
    pub inlet: Vec<usize>,
    pub outlet: Vec<usize>,
}

/// Applies ΔP along `axis` with the fabric's conductivities and measures k.
pub fn solve_direction(cfg: &RunConfig, model: &Model, pi: Vec<f64>, axis: Axis) -> CliResult<DirectionResult> {
    let faces = pressure_drop_faces(&model.m, axis, cfg.run.face_angle_deg)?;
    let dp = cfg.physics.pressure_difference_pa;
    let prob = pressure_drop_problem(&model.m, &model.k, &model.calc, &faces, dp, 0.0, pi)?;
    let solution = solve_steady(&prob, &cfg.solve_options())?;
    let outlet_flux = solution.outward_flux(&model.k, &faces.outlet)?;
    let inlet_flux = solution.outward_flux(&model.k, &faces.inlet)?;
    let perm = permeability(outlet_flux, faces.length, faces.area, 0.0, dp, cfg.physics.viscosity_pa_s)?;
    Ok(DirectionResult {
        axis,
        q: outlet_flux,
        conductivity: perm.conductivity,
        permeability: perm.permeability,
        residual: solution.residual,
        inlet_flux,
        outlet_flux,
        solution,
        inlet: faces.inlet,
        outlet: faces.outlet,
    })
}

fn ok_row(realisation: usize, seed: u64, porosity: f64, r: &DirectionResult, wall_s: f64) -> ResultRow {
    ResultRow {
        realisation,
        direction: r.axis.name().to_string(),
        seed,
        achieved_porosity: Some(porosity),
        q_m3_per_s: Some(r.q),
        k_cond: Some(r.conductivity),
        k_m2: Some(r.permeability),
        residual: Some(r.residual),
        wall_s,
        status: "ok".into(),
    }
}

fn failed_row(realisation: usize, seed: u64, axis: Axis, porosity: Option<f64>, wall_s: f64, e: &CliError) -> ResultRow {
    ResultRow {
        realisation,
        direction: axis.name().to_string(),
        seed,
        achieved_porosity: porosity,
        q_m3_per_s: None,
        k_cond: None,
        k_m2: None,
        residual: None,
        wall_s,
        status: format!("error: {e}"),
    }
}

/// Output of [`run_single`].
pub struct SingleRun {
    pub row: ResultRow,
    pub fabric: FabricAssignment<f64>,
    pub result: DirectionResult,
}

/// One realisation in one direction on a prepared model.
pub fn run_single(
    cfg: &RunConfig,
    model: &Model,
    stats: &FeatureStats,
    realisation: usize,
    seed: u64,
    axis: Axis,
) -> CliResult<SingleRun> {
    let t = Instant::now();
    let fabric = build_fabric(&model.m, &model.k, stats, &cfg.material(), seed)?;
    let result = solve_direction(cfg, model, fabric.conductivity.clone(), axis)?;
    let wall_s = t.elapsed().as_secs_f64();
    let row = ok_row(realisation, seed, fabric.achieved_porosity, &result, wall_s);
    info!(
        "realisation {realisation} seed {seed} {}: porosity {:.6}, Q {:e} m3/s, k {:e} m2, residual {:e}, {wall_s:.3} s, peak memory {}",
        axis.name(),
        fabric.achieved_porosity,
        result.q,
        result.permeability,
        result.residual,
        peak_memory_bytes().map_or("n/a".into(), |b| format!("{:.1} MB", b as f64 / 1e6)),
    );
    Ok(SingleRun { row, fabric, result })
}

/// Writes pressure (CSV and VTK) and per-face outward fluxes of a run.
pub fn export_fields(dir: &Path, stem: &str, model: &Model, r: &DirectionResult) -> CliResult<()> {
    let coords = model.k.coords();
    let p = &r.solution.pressure.values;
    let rows: Vec<FieldRow> = coords
        .iter()
        .zip(p)
        .enumerate()
        .map(|(i, (&point, &pressure))| FieldRow { cell_id: i, point, pressure })
        .collect();
    write_file(dir.join(format!("{stem}_pressure.csv")), |w| write_field(w, &rows))?;
    let vtk = to_vtk_points(&format!("{stem} pressure (Pa) on Forman vertices"), coords, &[("pressure", p)])?;
    write_file(dir.join(format!("{stem}_pressure.vtk")), |w| {
        w.extend_from_slice(vtk.as_bytes());
        Ok(())
    })?;
    let mut flux = Vec::new();
    for (set, faces) in [("inlet", &r.inlet), ("outlet", &r.outlet)] {
        for (f, q) in r.solution.face_fluxes(&model.k, faces)? {
            flux.push(FluxRow {
                face_id: f,
                set: set.into(),
                area: model.m.measure(CellId::new(2, f)),
                outward_flux: q,
            });
        }
    }
    write_file(dir.join(format!("{stem}_flux.csv")), |w| write_flux_report(w, &flux))?;
    Ok(())
}

/// Mean, sample standard deviation and range of k per direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionSummary {
    pub direction: String,
    pub ok: usize,
    pub failed: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Summary statistics as a pure function of the rows, in direction order.
pub fn summarize(rows: &[ResultRow], directions: &[Axis]) -> Vec<DirectionSummary> {
    directions
        .iter()
        .map(|a| {
            let of_dir: Vec<&ResultRow> = rows.iter().filter(|r| r.direction == a.name()).collect();
            let ks: Vec<f64> = of_dir.iter().filter_map(|r| r.k_m2).collect();
            let n = ks.len() as f64;
            let mean = ks.iter().sum::<f64>() / n;
            let std = if ks.len() > 1 {
                (ks.iter().map(|k| (k - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
            } else {
                0.0
            };
            DirectionSummary {
                direction: a.name().into(),
                ok: ks.len(),
                failed: of_dir.len() - ks.len(),
                mean: if ks.is_empty() { f64::NAN } else { mean },
                std: if ks.is_empty() { f64::NAN } else { std },
                min: ks.iter().copied().fold(f64::INFINITY, f64::min),
                max: ks.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            }
        })
        .collect()
}

/// Output of [`run_montecarlo`].
pub struct MonteCarlo {
    pub rows: Vec<ResultRow>,
    pub summary: Vec<DirectionSummary>,
}

/// One realisation: fabric once, then every direction. Failures become rows.
fn realisation_rows(cfg: &RunConfig, shared: Option<&Model>, stats: &FeatureStats, index: usize, axes: &[Axis]) -> Vec<ResultRow> {
    let seed = cfg.run.base_seed.wrapping_add(index as u64);
    let start = Instant::now();
    let owned;
    let model = match shared {
        Some(m) => m,
        None => match load_mesh(cfg, seed).and_then(|raw| Model::build(&raw)) {
            Ok(m) => {
                owned = m;
                &owned
            }
            Err(e) => {
                let wall = start.elapsed().as_secs_f64();
                return axes.iter().map(|&a| failed_row(index, seed, a, None, wall, &e)).collect();
            }
        },
    };
    let fabric = match build_fabric(&model.m, &model.k, stats, &cfg.material(), seed) {
        Ok(f) => f,
        Err(e) => {
            let porosity = match &e {
                formflow::Error::Capacity { achieved_porosity, .. } => Some(*achieved_porosity),
                _ => None,
            };
            let wall = start.elapsed().as_secs_f64();
            let e = CliError::from(e);
            log::warn!("realisation {index} (seed {seed}) failed: {e}");
            return axes.iter().map(|&a| failed_row(index, seed, a, porosity, wall, &e)).collect();
        }
    };
    let fabric_s = start.elapsed().as_secs_f64();
    axes.iter()
        .map(|&a| {
            let t = Instant::now();
            let res = solve_direction(cfg, model, fabric.conductivity.clone(), a);
            let wall = fabric_s + t.elapsed().as_secs_f64();
            match res {
                Ok(r) => {
                    if cfg.run.export_fields {
                        let stem = format!("r{index}_{}", a.name());
                        if let Err(e) = export_fields(&cfg.run.output_dir, &stem, model, &r) {
                            log::warn!("realisation {index} (seed {seed}) {}: {e}", a.name());
                            return failed_row(index, seed, a, Some(fabric.achieved_porosity), wall, &e);
                        }
                    }
                    info!(
                        "realisation {index} seed {seed} {}: porosity {:.6}, k {:e} m2, residual {:e}, {wall:.3} s",
                        a.name(),
                        fabric.achieved_porosity,
                        r.permeability,
                        r.residual
                    );
                    ok_row(index, seed, fabric.achieved_porosity, &r, wall)
                }
                Err(e) => {
                    log::warn!("realisation {index} (seed {seed}) {} failed: {e}", a.name());
                    failed_row(index, seed, a, Some(fabric.achieved_porosity), wall, &e)
                }
            }
        })
        .collect()
}

/// Runs `realisations × directions` experiments with seeds `base_seed + index`.
/// Realisations run in parallel; rows come back ordered by realisation, then
/// by configured direction.
pub fn run_montecarlo(cfg: &RunConfig) -> CliResult<MonteCarlo> {
    let axes = cfg.directions()?;
    let stats = cfg.feature_stats()?;
    let shared = if cfg.run.retessellate { None } else { Some(load_model(cfg)?) };
    let run = || -> Vec<ResultRow> {
        (0..cfg.run.realisations)
            .into_par_iter()
            .map(|i| realisation_rows(cfg, shared.as_ref(), &stats, i, &axes))
            .collect::<Vec<_>>()
            .into_iter()
            .flatten()
            .collect()
    };
    let rows = if cfg.run.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.run.threads)
            .build()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?
            .install(run)
    } else {
        run()
    };
    let summary = summarize(&rows, &axes);
    if let Some(b) = peak_memory_bytes() {
        info!("peak memory {:.1} MB", b as f64 / 1e6);
    }
    Ok(MonteCarlo { rows, summary })
}
