//! Fabric model: classification of measured features, random mapping of
//! voids onto cells of M and local conductivities on K.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{CellComplex, CellId};
use crate::error::{Error, Result};
use crate::forman::FormanComplex;
use crate::scalar::{vec3, Real};

/// Identifier of the random generator, stored alongside results.
pub const RNG_ALGORITHM: &str = "ChaCha8Rng (rand_chacha 0.9), seeded with seed_from_u64";

/// Default conductivity of K 1-cells outside any void (m³·s/kg).
pub const DEFAULT_CONDUCTIVITY: f64 = 1e-12;
/// Dynamic viscosity of water (Pa·s).
pub const WATER_VISCOSITY: f64 = 1.0e-3;

/// Shape class of a microstructural feature.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum FeatureClass {
    ThinLong,
    Voluminous,
    Expansive,
}

/// Extent-ratio thresholds for [`classify`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Thresholds {
    /// ThinLong iff I/L is below this.
    pub thin_long: f64,
    /// Voluminous iff S/L is above this.
    pub voluminous: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            thin_long: 0.35,
            voluminous: 0.64,
        }
    }
}

/// Classifies a feature from its largest, intermediate and smallest extents.
pub fn classify(l: f64, i: f64, s: f64, t: &Thresholds) -> Result<FeatureClass> {
    if !(l >= i && i >= s && s > 0.0) || !l.is_finite() {
        return Err(Error::Validation(format!("extents must satisfy L >= I >= S > 0, got ({l}, {i}, {s})")));
    }
    Ok(if i / l < t.thin_long {
        FeatureClass::ThinLong
    } else if s / l > t.voluminous {
        FeatureClass::Voluminous
    } else {
        FeatureClass::Expansive
    })
}

/// A measured void: volume (m³) and extents L ≥ I ≥ S (m).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Feature {
    pub volume: f64,
    pub extents: [f64; 3],
}

/// Voids sorted by class.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct VoidSplit {
    pub voluminous: Vec<Feature>,
    pub expansive: Vec<Feature>,
    /// Large thin-long voids; there is no mapping for them.
    pub thin_long: Vec<Feature>,
}

/// Voids smaller than the smallest grain are expansive; larger ones are classified by shape.
pub fn split_voids(voids: &[Feature], smallest_grain_volume: f64, t: &Thresholds) -> Result<VoidSplit> {
    let mut out = VoidSplit::default();
    for v in voids {
        if !(v.volume > 0.0) {
            return Err(Error::Validation(format!("void volume must be positive, got {}", v.volume)));
        }
        if v.volume < smallest_grain_volume {
            out.expansive.push(*v);
            continue;
        }
        let [l, i, s] = v.extents;
        match classify(l, i, s, t)? {
            FeatureClass::Voluminous => out.voluminous.push(*v),
            FeatureClass::Expansive => out.expansive.push(*v),
            FeatureClass::ThinLong => out.thin_long.push(*v),
        }
    }
    Ok(out)
}

/// Step CDF `(v_i, i/n)` of the sorted volumes.
pub fn empirical_cdf(volumes: &[f64]) -> Result<Vec<(f64, f64)>> {
    if volumes.is_empty() {
        return Err(Error::Validation("no volumes to build a CDF from".into()));
    }
    let mut v = volumes.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    Ok(v.into_iter().enumerate().map(|(i, x)| (x, (i + 1) as f64 / n)).collect())
}

/// Empirical statistics driving the fabric mapping.
#[derive(Clone, Debug, PartialEq)]
pub struct FeatureStats {
    /// Histogram of voluminous feature volumes: (volume m³, frequency).
    pub voluminous: Vec<(f64, f64)>,
    /// Cumulative distribution of expansive void volumes: (volume m³, probability).
    pub expansive_cdf: Vec<(f64, f64)>,
    /// Target void fraction of the domain.
    pub target_porosity: f64,
    /// Fraction of the domain volume held by voluminous voids.
    pub voluminous_void_fraction: f64,
    /// Smallest grain volume (m³).
    pub smallest_grain_volume: f64,
}

impl FeatureStats {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.target_porosity) {
            return Err(Error::Validation(format!("target porosity {} is outside [0, 1)", self.target_porosity)));
        }
        if !(0.0..=self.target_porosity).contains(&self.voluminous_void_fraction) {
            return Err(Error::Validation(
                "voluminous void fraction must lie in [0, target porosity]".into(),
            ));
        }
        if let Some(&(v, f)) = self.voluminous.iter().find(|(v, f)| !(*v > 0.0) || !(*f >= 0.0)) {
            return Err(Error::Validation(format!("bad voluminous histogram entry ({v}, {f})")));
        }
        validate_cdf(&self.expansive_cdf)
    }
}

fn validate_cdf(cdf: &[(f64, f64)]) -> Result<()> {
    if cdf.is_empty() {
        return Err(Error::Validation("expansive CDF is empty".into()));
    }
    for w in cdf.windows(2) {
        if w[1].0 < w[0].0 || w[1].1 < w[0].1 {
            return Err(Error::Validation("expansive CDF must be nondecreasing in volume and probability".into()));
        }
    }
    if let Some(&(v, p)) = cdf.iter().find(|(v, p)| !(*v > 0.0) || !(0.0..=1.0).contains(p)) {
        return Err(Error::Validation(format!("bad CDF point ({v}, {p})")));
    }
    let last = cdf[cdf.len() - 1].1;
    if (last - 1.0).abs() > 1e-9 {
        return Err(Error::Validation(format!("expansive CDF ends at {last}, expected 1")));
    }
    Ok(())
}

/// Inverse of a piecewise-linear empirical CDF. Below the first point the
/// first volume is returned.
pub fn inverse_cdf(cdf: &[(f64, f64)], u: f64) -> f64 {
    if u <= cdf[0].1 {
        return cdf[0].0;
    }
    for w in cdf.windows(2) {
        let ((v0, p0), (v1, p1)) = (w[0], w[1]);
        if u <= p1 {
            if p1 == p0 {
                return v0;
            }
            return v0 + (u - p0) / (p1 - p0) * (v1 - v0);
        }
    }
    cdf[cdf.len() - 1].0
}

/// Role of a polyhedron of M.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellRole {
    Grain,
    VoluminousVoid,
}

/// Role of a face of M.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FaceRole {
    None,
    /// Face of a voluminous void cell.
    VoluminousBoundary,
    /// Expansive void of the given volume (m³) and aperture (m).
    ExpansiveVoid { volume: f64, aperture: f64 },
}

/// One expansive draw: the face, its void volume and the porosity after it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExpansivePick {
    pub face: usize,
    pub volume: f64,
    pub porosity: f64,
}

/// Void roles on M.
#[derive(Clone, Debug, PartialEq)]
pub struct VoidMap {
    pub cells: Vec<CellRole>,
    pub faces: Vec<FaceRole>,
    pub picks: Vec<ExpansivePick>,
    pub domain_volume: f64,
    pub void_volume: f64,
}

impl VoidMap {
    /// All polyhedra grains, no voids.
    pub fn solid<T: Real>(m: &CellComplex<T>) -> Self {
        VoidMap {
            cells: vec![CellRole::Grain; m.count(3)],
            faces: vec![FaceRole::None; m.count(2)],
            picks: Vec::new(),
            domain_volume: m.measures(3).iter().map(|v| v.to_f64_lossy()).sum(),
            void_volume: 0.0,
        }
    }

    pub fn porosity(&self) -> f64 {
        self.void_volume / self.domain_volume
    }
}

/// Assigns the given voluminous void volumes to polyhedra, largest first, each
/// to the free polyhedron of closest volume (lowest index on ties).
pub fn map_voluminous_targets<T: Real>(m: &CellComplex<T>, map: &mut VoidMap, targets: &[f64]) -> Result<()> {
    let vols: Vec<f64> = m.measures(3).iter().map(|v| v.to_f64_lossy()).collect();
    let mut order: Vec<usize> = (0..targets.len()).collect();
    order.sort_by(|&a, &b| targets[b].total_cmp(&targets[a]).then(a.cmp(&b)));
    for t in order {
        let v = targets[t];
        let best = (0..vols.len())
            .filter(|&c| map.cells[c] == CellRole::Grain)
            .min_by(|&a, &b| (vols[a] - v).abs().total_cmp(&(vols[b] - v).abs()));
        let Some(c) = best else {
            return Err(Error::Capacity {
                message: format!("{} voluminous voids but only {} polyhedra", targets.len(), vols.len()),
                achieved_porosity: map.porosity(),
            });
        };
        map.cells[c] = CellRole::VoluminousVoid;
        map.void_volume += vols[c];
        for &(f, _) in m.faces_of(CellId::new(3, c)) {
            map.faces[f] = FaceRole::VoluminousBoundary;
        }
    }
    Ok(())
}

/// Draws voluminous void volumes from the voluminous histogram until they
/// cover `stats.voluminous_void_fraction` of the domain, then maps them.
pub fn map_voluminous<T: Real>(m: &CellComplex<T>, stats: &FeatureStats, rng: &mut ChaCha8Rng) -> Result<VoidMap> {
    let mut map = VoidMap::solid(m);
    let goal = stats.voluminous_void_fraction * map.domain_volume;
    let mut targets = Vec::new();
    if goal > 0.0 {
        let weights: Vec<f64> = stats.voluminous.iter().map(|&(_, f)| f).collect();
        let dist = WeightedIndex::new(&weights)
            .map_err(|e| Error::Validation(format!("voluminous histogram cannot be sampled: {e}")))?;
        let mut total = 0.0;
        while total < goal {
            let v = stats.voluminous[dist.sample(rng)].0;
            targets.push(v);
            total += v;
            if targets.len() > m.count(3) {
                return Err(Error::Capacity {
                    message: "voluminous voids outnumber the polyhedra".into(),
                    achieved_porosity: 0.0,
                });
            }
        }
    }
    map_voluminous_targets(m, &mut map, &targets)?;
    Ok(map)
}

/// Randomly places expansive voids on interior faces that are not on a
/// voluminous void, until the porosity reaches the target.
pub fn map_expansive<T: Real>(
    m: &CellComplex<T>,
    map: &mut VoidMap,
    stats: &FeatureStats,
    rng: &mut ChaCha8Rng,
) -> Result<()> {
    validate_cdf(&stats.expansive_cdf)?;
    let goal = stats.target_porosity * map.domain_volume;
    let mut eligible: Vec<usize> = (0..m.count(2))
        .filter(|&f| !m.is_boundary(CellId::new(2, f)) && map.faces[f] == FaceRole::None)
        .collect();
    while map.void_volume < goal {
        if eligible.is_empty() {
            return Err(Error::Capacity {
                message: format!(
                    "no eligible faces left at porosity {:.6} (target {})",
                    map.porosity(),
                    stats.target_porosity
                ),
                achieved_porosity: map.porosity(),
            });
        }
        let u = loop {
            let u: f64 = rng.random();
            if u > 0.0 {
                break u;
            }
        };
        let volume = inverse_cdf(&stats.expansive_cdf, u);
        let face = eligible.swap_remove(rng.random_range(0..eligible.len()));
        let area = m.measure(CellId::new(2, face)).to_f64_lossy();
        map.faces[face] = FaceRole::ExpansiveVoid {
            volume,
            aperture: volume / area,
        };
        map.void_volume += volume;
        map.picks.push(ExpansivePick {
            face,
            volume,
            porosity: map.porosity(),
        });
    }
    Ok(())
}

/// Physical constants of the conductivity assignment.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaterialParams {
    /// Dynamic viscosity μ (Pa·s).
    pub viscosity: f64,
    /// Conductivity of non-void K 1-cells (m³·s/kg).
    pub default_conductivity: f64,
    /// Fluid compressibility on void K 0-cells (1/Pa).
    pub fluid_compressibility: f64,
    /// Solid compressibility elsewhere (1/Pa).
    pub solid_compressibility: f64,
}

impl Default for MaterialParams {
    fn default() -> Self {
        MaterialParams {
            viscosity: WATER_VISCOSITY,
            default_conductivity: DEFAULT_CONDUCTIVITY,
            fluid_compressibility: 4.5e-10,
            solid_compressibility: 1e-11,
        }
    }
}

/// Flow in a cylinder of radius `r`: π = r²/(8μ).
pub fn cylinder_conductivity(r: f64, mu: f64) -> f64 {
    r * r / (8.0 * mu)
}

/// Flow between plates at distance `h`: π = h²/(12μ).
pub fn plate_conductivity(h: f64, mu: f64) -> f64 {
    h * h / (12.0 * mu)
}

/// Complete fabric of one realisation.
#[derive(Clone, Debug, PartialEq)]
pub struct FabricAssignment<T> {
    pub voids: VoidMap,
    /// Π₁ per K 1-cell.
    pub conductivity: Vec<T>,
    /// Π₀ per K 0-cell.
    pub compressibility: Vec<T>,
    pub target_porosity: f64,
    pub achieved_porosity: f64,
    pub seed: u64,
}

/// Local conductivities on K from the void roles. Where rules overlap the
/// larger conductivity wins.
pub fn assign_conductivities<T: Real>(
    m: &CellComplex<T>,
    k: &FormanComplex<T>,
    voids: &VoidMap,
    params: &MaterialParams,
) -> Result<(Vec<T>, Vec<T>)> {
    let mu = params.viscosity;
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::Validation(format!("viscosity must be positive, got {mu}")));
    }
    if voids.cells.len() != m.count(3) || voids.faces.len() != m.count(2) {
        return Err(Error::Validation("void map does not match the complex".into()));
    }
    let mut pi = vec![params.default_conductivity; k.count(1)];
    let mut conductive = vec![false; k.count(1)];
    let centroid = |c: CellId| m.centroid(c).map(|x| x.to_f64_lossy());
    let mut raise = |upper: CellId, lower: CellId, value: f64| -> Result<()> {
        let e = k
            .index_of(upper, lower)
            .ok_or_else(|| Error::Structural(format!("K has no 1-cell for {upper:?} -> {lower:?}")))?;
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Degeneracy {
                dim: 1,
                index: e,
                measure: value,
                threshold: 0.0,
            });
        }
        pi[e] = if conductive[e] { pi[e].max(value) } else { value };
        conductive[e] = true;
        Ok(())
    };

    for (c3, role) in voids.cells.iter().enumerate() {
        if *role != CellRole::VoluminousVoid {
            continue;
        }
        let cell = CellId::new(3, c3);
        let cc = centroid(cell);
        for &f in m.closure(cell, 2) {
            let face = CellId::new(2, f);
            let area = m.measure(face).to_f64_lossy();
            let r = (area / std::f64::consts::PI).sqrt();
            raise(cell, face, cylinder_conductivity(r, mu))?;
            let h = vec3::dist(centroid(face), cc);
            for &(e, _) in m.faces_of(face) {
                raise(face, CellId::new(1, e), plate_conductivity(h, mu))?;
            }
        }
        for &e in m.closure(cell, 1) {
            let edge = CellId::new(1, e);
            let r = 0.5 * vec3::dist(centroid(edge), cc);
            for &(n, _) in m.faces_of(edge) {
                raise(edge, CellId::new(0, n), cylinder_conductivity(r, mu))?;
            }
        }
    }
    for (f, role) in voids.faces.iter().enumerate() {
        let FaceRole::ExpansiveVoid { aperture, .. } = *role else {
            continue;
        };
        let face = CellId::new(2, f);
        for &(e, _) in m.faces_of(face) {
            let edge = CellId::new(1, e);
            raise(face, edge, plate_conductivity(aperture, mu))?;
            for &(n, _) in m.faces_of(edge) {
                raise(edge, CellId::new(0, n), cylinder_conductivity(0.5 * aperture, mu))?;
            }
        }
    }

    let mut wet = vec![false; k.count(0)];
    for (e, _) in conductive.iter().enumerate().filter(|(_, &c)| c) {
        for &(v, _) in k.faces_of(1, e) {
            wet[v] = true;
        }
    }
    let pi0 = wet
        .iter()
        .map(|&w| T::lit(if w { params.fluid_compressibility } else { params.solid_compressibility }))
        .collect();
    Ok((pi.into_iter().map(T::lit).collect(), pi0))
}

/// Runs the full mapping for one seed.
pub fn build_fabric<T: Real>(
    m: &CellComplex<T>,
    k: &FormanComplex<T>,
    stats: &FeatureStats,
    params: &MaterialParams,
    seed: u64,
) -> Result<FabricAssignment<T>> {
    stats.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut voids = map_voluminous(m, stats, &mut rng)?;
    map_expansive(m, &mut voids, stats, &mut rng)?;
    let (conductivity, compressibility) = assign_conductivities(m, k, &voids, params)?;
    Ok(FabricAssignment {
        achieved_porosity: voids.porosity(),
        voids,
        conductivity,
        compressibility,
        target_porosity: stats.target_porosity,
        seed,
    })
}
