//! Run configuration, read from TOML.
//!
//! Every field has a default, so an empty file is a valid configuration for
//! a structured-grid run once statistics are supplied.

use std::path::{Path, PathBuf};

use formflow::fabric::{
    empirical_cdf, split_voids, FeatureStats, MaterialParams, Thresholds, DEFAULT_CONDUCTIVITY, WATER_VISCOSITY,
};
use formflow::flow::Axis;
use formflow::io::table::{read_features, read_volume_cdf, read_volume_frequency};
use formflow::linalg::SolveOptions;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum MeshSource {
    /// Rectilinear hexahedral grid; `jitter` shifts interior planes by up to
    /// that fraction of the spacing.
    Grid {
        cells: [usize; 3],
        size_m: [f64; 3],
        #[serde(default)]
        jitter: f64,
    },
    /// Neper tessellation file.
    Tess { path: PathBuf },
}

impl Default for MeshSource {
    fn default() -> Self {
        MeshSource::Grid {
            cells: [10, 10, 10],
            size_m: [1e-3; 3],
            jitter: 0.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StatsConfig {
    /// `volume_m3,frequency` histogram of voluminous features.
    pub voluminous_csv: Option<PathBuf>,
    /// `volume_m3,cumulative_probability` of expansive voids.
    pub expansive_csv: Option<PathBuf>,
    /// Measured voids with extents, classified with the thresholds. Supplies
    /// the expansive CDF when `expansive_csv` and `expansive_cdf` are absent.
    pub features_csv: Option<PathBuf>,
    /// Inline alternatives to the CSV files.
    pub voluminous: Option<Vec<(f64, f64)>>,
    pub expansive_cdf: Option<Vec<(f64, f64)>>,
    pub target_porosity: f64,
    pub voluminous_void_fraction: f64,
    pub smallest_grain_volume_m3: Option<f64>,
}

impl Default for StatsConfig {
    fn default() -> Self {
        StatsConfig {
            voluminous_csv: None,
            expansive_csv: None,
            features_csv: None,
            voluminous: None,
            expansive_cdf: None,
            target_porosity: 0.21,
            voluminous_void_fraction: 0.0,
            smallest_grain_volume_m3: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ThresholdConfig {
    pub thin_long: f64,
    pub voluminous: f64,
}

impl Default for ThresholdConfig {
    fn default() -> Self {
        let t = Thresholds::default();
        ThresholdConfig {
            thin_long: t.thin_long,
            voluminous: t.voluminous,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Dynamic viscosity μ (Pa·s).
    pub viscosity_pa_s: f64,
    /// p₂ − p₁ across the sample (Pa).
    pub pressure_difference_pa: f64,
    /// Conductivity of grain K 1-cells (m³·s/kg).
    pub default_conductivity: f64,
    /// 1/Pa.
    pub fluid_compressibility: f64,
    /// 1/Pa.
    pub solid_compressibility: f64,
}

impl Default for PhysicsConfig {
    fn default() -> Self {
        let m = MaterialParams::default();
        PhysicsConfig {
            viscosity_pa_s: WATER_VISCOSITY,
            pressure_difference_pa: 1.0,
            default_conductivity: DEFAULT_CONDUCTIVITY,
            fluid_compressibility: m.fluid_compressibility,
            solid_compressibility: m.solid_compressibility,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSection {
    pub directions: Vec<String>,
    pub realisations: usize,
    pub base_seed: u64,
    /// Fresh tessellation per realisation instead of fresh fabric only.
    pub retessellate: bool,
    /// Boundary faces within this angle (degrees) of ±axis form the inlet and outlet.
    pub face_angle_deg: f64,
    pub output_dir: PathBuf,
    /// Write pressure fields and flux reports for single runs.
    pub export_fields: bool,
    /// Worker threads for Monte Carlo; 0 uses all cores.
    pub threads: usize,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection {
            directions: vec!["x".into(), "y".into(), "z".into()],
            realisations: 30,
            base_seed: 0,
            retessellate: false,
            face_angle_deg: 10.0,
            output_dir: PathBuf::from("formflow-out"),
            export_fields: false,
            threads: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    /// Required relative residual ‖Ax − b‖∞/‖b‖∞.
    pub tolerance: f64,
    pub refinement_steps: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let o = SolveOptions::default();
        SolverConfig {
            tolerance: o.tolerance,
            refinement_steps: o.refinement_steps,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: MeshSource,
    pub stats: StatsConfig,
    pub thresholds: ThresholdConfig,
    pub physics: PhysicsConfig,
    pub run: RunSection,
    pub solver: SolverConfig,
}

impl RunConfig {
    /// Parses TOML; relative paths are resolved against `base_dir`.
    pub fn from_toml(text: &str, base_dir: &Path) -> CliResult<Self> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.resolve_paths(base_dir);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let MeshSource::Tess { path } = &mut self.mesh {
            fix(path);
        }
        for p in [
            &mut self.stats.voluminous_csv,
            &mut self.stats.expansive_csv,
            &mut self.stats.features_csv,
        ]
        .into_iter()
        .flatten()
        {
            fix(p);
        }
        fix(&mut self.run.output_dir);
    }

    pub fn validate(&self) -> CliResult<()> {
        let bad = |m: String| Err(CliError::Config(m));
        match &self.mesh {
            MeshSource::Grid { cells, size_m, jitter } => {
                if cells.contains(&0) || size_m.iter().any(|&l| !(l > 0.0 && l.is_finite())) {
                    return bad("mesh.cells must be positive and mesh.size_m positive and finite".into());
                }
                if !(0.0..0.5).contains(jitter) {
                    return bad(format!("mesh.jitter must lie in [0, 0.5), got {jitter}"));
                }
                if self.run.retessellate && *jitter == 0.0 {
                    return bad("run.retessellate needs mesh.jitter > 0; an unjittered grid is the same every time".into());
                }
            }
            MeshSource::Tess { .. } => {
                if self.run.retessellate {
                    return bad("run.retessellate needs a grid mesh; .tess inputs cannot be regenerated".into());
                }
            }
        }
        let p = &self.physics;
        for (name, v) in [
            ("physics.viscosity_pa_s", p.viscosity_pa_s),
            ("physics.default_conductivity", p.default_conductivity),
            ("physics.fluid_compressibility", p.fluid_compressibility),
            ("physics.solid_compressibility", p.solid_compressibility),
            ("solver.tolerance", self.solver.tolerance),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return bad(format!("{name} must be positive and finite, got {v}"));
            }
        }
        if p.pressure_difference_pa == 0.0 || !p.pressure_difference_pa.is_finite() {
            return bad("physics.pressure_difference_pa must be nonzero and finite".into());
        }
        let t = &self.thresholds;
        if !(0.0 < t.thin_long && t.thin_long < 1.0 && 0.0 < t.voluminous && t.voluminous < 1.0) {
            return bad("thresholds must lie in (0, 1)".into());
        }
        if self.run.realisations == 0 {
            return bad("run.realisations must be at least 1".into());
        }
        if !(0.0..90.0).contains(&self.run.face_angle_deg) {
            return bad("run.face_angle_deg must lie in [0, 90)".into());
        }
        self.directions()?;
        Ok(())
    }

    /// Directions in configured order, without repeats.
    pub fn directions(&self) -> CliResult<Vec<Axis>> {
        let mut out = Vec::new();
        for d in &self.run.directions {
            let a = Axis::parse(d).ok_or_else(|| CliError::Config(format!("unknown direction '{d}'")))?;
            if out.contains(&a) {
                return Err(CliError::Config(format!("direction '{d}' repeated")));
            }
            out.push(a);
        }
        if out.is_empty() {
            return Err(CliError::Config("run.directions is empty".into()));
        }
        Ok(out)
    }

    pub fn thresholds(&self) -> Thresholds {
        Thresholds {
            thin_long: self.thresholds.thin_long,
            voluminous: self.thresholds.voluminous,
        }
    }

    pub fn material(&self) -> MaterialParams {
        MaterialParams {
            viscosity: self.physics.viscosity_pa_s,
            default_conductivity: self.physics.default_conductivity,
            fluid_compressibility: self.physics.fluid_compressibility,
            solid_compressibility: self.physics.solid_compressibility,
        }
    }

    pub fn solve_options(&self) -> SolveOptions {
        SolveOptions {
            tolerance: self.solver.tolerance,
            refinement_steps: self.solver.refinement_steps,
        }
    }

    /// Loads and checks the feature statistics.
    pub fn feature_stats(&self) -> CliResult<FeatureStats> {
        let s = &self.stats;
        let voluminous = match (&s.voluminous, &s.voluminous_csv) {
            (Some(_), Some(_)) => return Err(CliError::Config("give stats.voluminous or stats.voluminous_csv, not both".into())),
            (Some(v), None) => v.clone(),
            (None, Some(p)) => read_volume_frequency(p)?,
            (None, None) => Vec::new(),
        };
        let features = s.features_csv.as_deref().map(read_features).transpose()?;
        let smallest = s
            .smallest_grain_volume_m3
            .or_else(|| voluminous.iter().map(|v| v.0).reduce(f64::min))
            .unwrap_or(f64::INFINITY);
        let expansive_cdf = match (&s.expansive_cdf, &s.expansive_csv, &features) {
            (Some(c), None, _) => c.clone(),
            (None, Some(p), _) => read_volume_cdf(p)?,
            (Some(_), Some(_), _) => {
                return Err(CliError::Config("give stats.expansive_cdf or stats.expansive_csv, not both".into()))
            }
            (None, None, Some(f)) => {
                let split = split_voids(f, smallest, &self.thresholds())?;
                if !split.thin_long.is_empty() {
                    return Err(CliError::Config(format!(
                        "{} thin-long voids above the smallest grain volume; thin-long mapping is not supported",
                        split.thin_long.len()
                    )));
                }
                let vols: Vec<f64> = split.expansive.iter().map(|v| v.volume).collect();
                empirical_cdf(&vols)?
            }
            (None, None, None) => {
                return Err(CliError::Config(
                    "no expansive void statistics: set stats.expansive_csv, stats.expansive_cdf or stats.features_csv".into(),
                ))
            }
        };
        if s.voluminous_void_fraction > 0.0 && voluminous.is_empty() {
            return Err(CliError::Config("stats.voluminous_void_fraction needs a voluminous histogram".into()));
        }
        let stats = FeatureStats {
            voluminous,
            expansive_cdf,
            target_porosity: s.target_porosity,
            voluminous_void_fraction: s.voluminous_void_fraction,
            smallest_grain_volume: if smallest.is_finite() { smallest } else { 0.0 },
        };
        stats.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(stats)
    }
}
