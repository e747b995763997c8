//! Structured (rectilinear) hexahedral grids.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::complex::{CellComplex, RawComplex};
use crate::error::{Error, Result};
use crate::scalar::Real;

/// Raw hexahedral complex over the tensor product of coordinate arrays.
pub fn rectilinear_raw(xs: &[f64], ys: &[f64], zs: &[f64]) -> Result<RawComplex> {
    for (name, a) in [("x", xs), ("y", ys), ("z", zs)] {
        if a.len() < 2 {
            return Err(Error::Validation(format!("{name} axis needs at least one cell")));
        }
        if a.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Validation(format!("{name} coordinates must be strictly increasing")));
        }
    }
    let (nx, ny, nz) = (xs.len() - 1, ys.len() - 1, zs.len() - 1);
    let node = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);
    let mut raw = RawComplex::default();
    for &z in zs {
        for &y in ys {
            for &x in xs {
                raw.nodes.push([x, y, z]);
            }
        }
    }
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                if i < nx {
                    raw.edges.push([node(i, j, k), node(i + 1, j, k)]);
                }
                if j < ny {
                    raw.edges.push([node(i, j, k), node(i, j + 1, k)]);
                }
                if k < nz {
                    raw.edges.push([node(i, j, k), node(i, j, k + 1)]);
                }
            }
        }
    }
    // Faces indexed by (normal axis, i, j, k).
    let mut face_id = std::collections::HashMap::new();
    for k in 0..=nz {
        for j in 0..=ny {
            for i in 0..=nx {
                if j < ny && k < nz {
                    face_id.insert((0, i, j, k), raw.faces.len());
                    raw.faces.push(vec![node(i, j, k), node(i, j + 1, k), node(i, j + 1, k + 1), node(i, j, k + 1)]);
                }
                if i < nx && k < nz {
                    face_id.insert((1, i, j, k), raw.faces.len());
                    raw.faces.push(vec![node(i, j, k), node(i + 1, j, k), node(i + 1, j, k + 1), node(i, j, k + 1)]);
                }
                if i < nx && j < ny {
                    face_id.insert((2, i, j, k), raw.faces.len());
                    raw.faces.push(vec![node(i, j, k), node(i + 1, j, k), node(i + 1, j + 1, k), node(i, j + 1, k)]);
                }
            }
        }
    }
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                raw.polyhedra.push(vec![
                    face_id[&(0, i, j, k)],
                    face_id[&(0, i + 1, j, k)],
                    face_id[&(1, i, j, k)],
                    face_id[&(1, i, j + 1, k)],
                    face_id[&(2, i, j, k)],
                    face_id[&(2, i, j, k + 1)],
                ]);
            }
        }
    }
    Ok(raw)
}

fn uniform_axis(n: usize, len: f64) -> Vec<f64> {
    (0..=n).map(|i| len * i as f64 / n as f64).collect()
}

fn check_grid(n: [usize; 3], l: [f64; 3]) -> Result<()> {
    if n.iter().any(|&c| c == 0) {
        return Err(Error::Validation(format!("grid cell counts must be positive, got {n:?}")));
    }
    if l.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(Error::Validation(format!("grid lengths must be positive, got {l:?}")));
    }
    Ok(())
}

/// Raw uniform `nx×ny×nz` grid of the box `[0,Lx]×[0,Ly]×[0,Lz]`.
pub fn structured_raw(n: [usize; 3], l: [f64; 3]) -> Result<RawComplex> {
    check_grid(n, l)?;
    rectilinear_raw(&uniform_axis(n[0], l[0]), &uniform_axis(n[1], l[1]), &uniform_axis(n[2], l[2]))
}

/// Uniform hexahedral complex.
pub fn structured_grid<T: Real>(n: [usize; 3], l: [f64; 3]) -> Result<CellComplex<T>> {
    CellComplex::build(&structured_raw(n, l)?)
}

/// Rectilinear grid whose interior grid planes are shifted by up to
/// `amplitude` (fraction of the uniform spacing, below 0.5).
pub fn jittered_raw(n: [usize; 3], l: [f64; 3], amplitude: f64, seed: u64) -> Result<RawComplex> {
    check_grid(n, l)?;
    if !(0.0..0.5).contains(&amplitude) {
        return Err(Error::Validation(format!("jitter amplitude must lie in [0, 0.5), got {amplitude}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut axes = Vec::with_capacity(3);
    for a in 0..3 {
        let mut xs = uniform_axis(n[a], l[a]);
        let h = l[a] / n[a] as f64;
        for x in xs.iter_mut().take(n[a]).skip(1) {
            *x += amplitude * h * (2.0 * rng.random::<f64>() - 1.0);
        }
        axes.push(xs);
    }
    rectilinear_raw(&axes[0], &axes[1], &axes[2])
}
