mod support;

use formflow::flow::{
    assemble_steady, boundary_hodge, pressure_drop_faces, pressure_drop_problem, solve_steady, Axis, FlowProblem,
    NeumannScheme, RowKind, TransientSolver,
};
use formflow::io::grid::{jittered_raw, rectilinear_raw};
use formflow::linalg::SolveOptions;
use formflow::{CellComplex64, CellId, DiscreteCalculus, FormanComplex64};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use support::rect_oracle::RectOracle;

struct Model {
    m: CellComplex64,
    k: FormanComplex64,
    calc: DiscreteCalculus<f64>,
}

fn model(xs: &[f64], ys: &[f64], zs: &[f64]) -> Model {
    let m = CellComplex64::build(&rectilinear_raw(xs, ys, zs).unwrap()).unwrap();
    let k = FormanComplex64::build(&m).unwrap();
    let calc = DiscreteCalculus::new(&k).unwrap();
    Model { m, k, calc }
}

/// Oracle vertex per K vertex and oracle edge per K edge.
fn correspondence(md: &Model, o: &RectOracle) -> (Vec<usize>, Vec<usize>) {
    let vmap: Vec<usize> = md.k.coords().iter().map(|&p| o.locate(p)).collect();
    let mut seen = vmap.clone();
    seen.sort_unstable();
    seen.dedup();
    assert_eq!(seen.len(), o.len(), "K vertices and oracle vertices differ");
    let emap = (0..md.k.count(1))
        .map(|e| {
            let f = md.k.faces_of(1, e);
            let (a, b) = (vmap[f[0].0], vmap[f[1].0]);
            let key = (a.min(b), a.max(b));
            o.edges.binary_search_by(|x| (x.0, x.1).cmp(&key)).expect("K edge missing from oracle")
        })
        .collect();
    (vmap, emap)
}

fn heterogeneous(p: [f64; 3]) -> f64 {
    (2.0 * (5.0 * p[0] + 1.0).sin() + (7.0 * p[1]).cos() + p[2]).exp()
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(f64::MIN_POSITIVE)
}

/// Compares system, solution and outlet flow against the oracle, returns the
/// worst relative discrepancy.
fn check_against_oracle(xs: &[f64], ys: &[f64], zs: &[f64], pi_of: impl Fn([f64; 3]) -> f64, axis: Axis) -> f64 {
    let md = model(xs, ys, zs);
    let o = RectOracle::new(xs, ys, zs);
    let (vmap, emap) = correspondence(&md, &o);
    let pi_oracle: Vec<f64> = (0..o.edges.len()).map(|e| pi_of(o.edge_midpoint(e))).collect();
    let pi: Vec<f64> = emap.iter().map(|&e| pi_oracle[e]).collect();

    let faces = pressure_drop_faces(&md.m, axis, 10.0).unwrap();
    let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, pi).unwrap();
    let sys = assemble_steady(&prob).unwrap();
    let sol = solve_steady(&prob, &SolveOptions::default()).unwrap();
    let os = o.pressure_drop(&pi_oracle, axis.index(), 1.0, 0.0);

    assert_eq!(sys.unknowns.len(), os.free.len());
    let row_of: std::collections::HashMap<usize, usize> = os.free.iter().enumerate().map(|(r, &v)| (v, r)).collect();
    let scale = os.matrix.amax();
    let mut worst: f64 = 0.0;
    for (i, &v) in sys.unknowns.iter().enumerate() {
        let r = row_of[&vmap[v]];
        for (j, &u) in sys.unknowns.iter().enumerate() {
            let c = row_of[&vmap[u]];
            worst = worst.max((sys.matrix.get(i, j) - os.matrix[(r, c)]).abs() / scale);
        }
        worst = worst.max((sys.rhs[i] - os.rhs[r]).abs() / scale);
    }
    for (v, &p) in sol.pressure.values.iter().enumerate() {
        worst = worst.max((p - os.pressure[vmap[v]]).abs());
    }
    let q = sol.outward_flux(&md.k, &faces.outlet).unwrap();
    let q_oracle = o.face_outflow(&pi_oracle, &os.pressure, axis.index(), true);
    worst.max(rel_err(q, q_oracle))
}

#[test]
fn two_hexahedra_match_dense_oracle() {
    let xs = [0.0, 1.0, 2.0];
    let ys = [0.0, 1.0];
    let zs = [0.0, 1.0];
    assert!(check_against_oracle(&xs, &ys, &zs, |_| 1.0, Axis::X) < 1e-10);
    assert!(check_against_oracle(&xs, &ys, &zs, heterogeneous, Axis::X) < 1e-10);
    assert!(check_against_oracle(&xs, &ys, &zs, heterogeneous, Axis::Y) < 1e-10);
}

#[test]
fn two_by_two_by_two_matches_dense_oracle() {
    let xs = [0.0, 0.4, 1.0];
    let ys = [0.0, 0.7, 1.2];
    let zs = [0.0, 0.5, 0.8];
    for axis in Axis::ALL {
        assert!(check_against_oracle(&xs, &ys, &zs, |_| 1.0, axis) < 1e-10);
        assert!(check_against_oracle(&xs, &ys, &zs, heterogeneous, axis) < 1e-10);
    }
}

#[test]
fn series_bilayer() {
    let (a, b) = (3.0, 0.25);
    let xs = [0.0, 1.0, 2.0];
    let pi_of = |p: [f64; 3]| if p[0] < 1.0 { a } else { b };
    assert!(check_against_oracle(&xs, &[0.0, 1.0], &[0.0, 1.0], pi_of, Axis::X) < 1e-10);
    // One-dimensional resistance in series: Q = A·ΔP / (L_a/a + L_b/b).
    let md = model(&xs, &[0.0, 1.0], &[0.0, 1.0]);
    let pi: Vec<f64> = (0..md.k.count(1))
        .map(|e| {
            let f = md.k.faces_of(1, e);
            let (p, q) = (md.k.coords()[f[0].0], md.k.coords()[f[1].0]);
            pi_of([0.5 * (p[0] + q[0]), 0.0, 0.0])
        })
        .collect();
    let faces = pressure_drop_faces(&md.m, Axis::X, 10.0).unwrap();
    let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, pi).unwrap();
    let sol = solve_steady(&prob, &SolveOptions::default()).unwrap();
    let q = sol.outward_flux(&md.k, &faces.outlet).unwrap();
    assert!(rel_err(q, 1.0 / (1.0 / a + 1.0 / b)) < 1e-12, "{q}");
}

/// Flux through a conductive mid-plane fracture parallel to the flow, with
/// the 1e-12 background on every other K 1-cell.
#[test]
fn single_fracture_matches_network_oracle() {
    let (h, mu) = (1e-4, 1e-3);
    let xs = [0.0, 1.0];
    let ys = [0.0, 0.5, 1.0];
    let zs = [0.0, 1.0];
    let cylinder = (h / 2.0) * (h / 2.0) / (8.0 * mu);
    let plate = h * h / (12.0 * mu);
    let pi_of = |p: [f64; 3]| {
        if p[1] != 0.5 {
            return 1e-12;
        }
        // Mid-plane K edges: node to edge midpoint, or edge midpoint to face centre.
        let halves = [p[0], p[2]].iter().filter(|&&c| c == 0.25 || c == 0.75).count();
        let centre_line = [p[0], p[2]].iter().filter(|&&c| c == 0.5).count();
        match (halves, centre_line) {
            (1, 0) => cylinder,
            (1, 1) => plate,
            _ => 1e-12,
        }
    };
    let md = model(&xs, &ys, &zs);
    let o = RectOracle::new(&xs, &ys, &zs);
    let (_, emap) = correspondence(&md, &o);
    let pi_oracle: Vec<f64> = (0..o.edges.len()).map(|e| pi_of(o.edge_midpoint(e))).collect();
    assert_eq!(pi_oracle.iter().filter(|&&p| p == cylinder).count(), 8);
    assert_eq!(pi_oracle.iter().filter(|&&p| p == plate).count(), 4);
    let pi: Vec<f64> = emap.iter().map(|&e| pi_oracle[e]).collect();

    let faces = pressure_drop_faces(&md.m, Axis::X, 10.0).unwrap();
    let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, pi).unwrap();
    let sol = solve_steady(&prob, &SolveOptions::default()).unwrap();
    let q = sol.outward_flux(&md.k, &faces.outlet).unwrap();
    let k = formflow::flow::permeability(q, faces.length, faces.area, 0.0, 1.0, mu).unwrap().permeability;

    let os = o.pressure_drop(&pi_oracle, 0, 1.0, 0.0);
    let q_oracle = o.face_outflow(&pi_oracle, &os.pressure, 0, true);
    let k_oracle = q_oracle * 1.0 / (1.0 * 1.0) * mu;
    assert!(rel_err(k, k_oracle) < 1e-8, "{k:e} vs {k_oracle:e}");
    // The fracture dominates the 1e-12 background by orders of magnitude.
    assert!(k > 1e4 * 1e-12 * mu, "{k:e}");
}

fn grid_problem_parts(seed: u64, jitter: f64) -> (Model, Vec<f64>) {
    let raw = jittered_raw([3, 2, 2], [1.0, 1.0, 1.0], jitter, seed).unwrap();
    let m = CellComplex64::build(&raw).unwrap();
    let k = FormanComplex64::build(&m).unwrap();
    let calc = DiscreteCalculus::new(&k).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let pi = (0..k.count(1)).map(|_| 10f64.powf(rng.random_range(-6.0..0.0))).collect();
    (Model { m, k, calc }, pi)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn inlet_equals_outlet(seed in 0u64..1000, jitter in 0.0f64..0.3, axis in 0usize..3) {
        let (md, pi) = grid_problem_parts(seed, jitter);
        let faces = pressure_drop_faces(&md.m, Axis::ALL[axis], 10.0).unwrap();
        let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, pi).unwrap();
        let sol = solve_steady(&prob, &SolveOptions::default()).unwrap();
        let out = sol.outward_flux(&md.k, &faces.outlet).unwrap();
        let inn = sol.outward_flux(&md.k, &faces.inlet).unwrap();
        prop_assert!(out > 0.0);
        prop_assert!(((out + inn) / out).abs() < 1e-8, "{} {}", out, inn);
    }

    #[test]
    fn reduced_matrix_is_symmetric_in_w0(seed in 0u64..1000) {
        let (md, pi) = grid_problem_parts(seed, 0.2);
        let faces = pressure_drop_faces(&md.m, Axis::X, 10.0).unwrap();
        let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, pi).unwrap();
        let sys = assemble_steady(&prob).unwrap();
        let w0 = md.calc.inner.weights(0);
        let wa = sys.matrix.scale_rows(&sys.unknowns.iter().map(|&v| w0[v]).collect::<Vec<_>>());
        let asym = wa.max_abs_diff(&wa.transpose());
        prop_assert!(asym <= 1e-12 * wa.max_abs());
        // Positive diagonal, non-positive off-diagonal, weakly dominant rows.
        for i in 0..sys.unknowns.len() {
            let mut off = 0.0;
            for (j, a) in wa.row(i) {
                if i == j { prop_assert!(a > 0.0) } else { prop_assert!(a <= 0.0); off -= a; }
            }
            prop_assert!(wa.get(i, i) >= off * (1.0 - 1e-12));
        }
    }
}

#[test]
fn linearity_and_scaling() {
    let (md, pi) = grid_problem_parts(11, 0.2);
    let faces = pressure_drop_faces(&md.m, Axis::Y, 10.0).unwrap();
    let opts = SolveOptions::default();
    let solve = |p2: f64, p1: f64, pi: Vec<f64>| {
        let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, p2, p1, pi).unwrap();
        solve_steady(&prob, &opts).unwrap()
    };
    let base = solve(1.0, 0.0, pi.clone());
    let double = solve(2.0, 0.0, pi.clone());
    for (a, b) in base.flow_rate.values.iter().zip(&double.flow_rate.values) {
        assert!((2.0 * a - b).abs() <= 1e-12 * b.abs().max(1e-300) + 1e-12 * base.flow_rate.values.iter().fold(0.0f64, |m, x| m.max(x.abs())));
    }
    let q = |s: &formflow::flow::FlowSolution<f64>| s.outward_flux(&md.k, &faces.outlet).unwrap();
    let k = |q: f64, p2: f64, p1: f64| formflow::flow::permeability(q, faces.length, faces.area, p1, p2, 1e-3).unwrap().permeability;
    let k0 = k(q(&base), 1.0, 0.0);
    assert!(rel_err(k(q(&double), 2.0, 0.0), k0) < 1e-12);
    let shifted = solve(101.0, 100.0, pi.clone());
    assert!(rel_err(k(q(&shifted), 101.0, 100.0), k0) < 1e-10);
    let scaled = solve(1.0, 0.0, pi.iter().map(|p| 2.0 * p).collect());
    assert!(rel_err(k(q(&scaled), 1.0, 0.0), 2.0 * k0) < 1e-12);
}

#[test]
fn prescribed_inflow_leaves_through_the_outlet() {
    let md = model(&[0.0, 0.5, 1.0, 2.0], &[0.0, 1.0], &[0.0, 0.5, 1.0]);
    let faces = pressure_drop_faces(&md.m, Axis::X, 10.0).unwrap();
    let part = formflow::flow::BoundaryPartition::with_dirichlet(&md.m, faces.outlet.clone()).unwrap();
    let prob = FlowProblem::new(&md.m, &md.k, &md.calc, &part, &vec![0.0; faces.outlet.len()], vec![2.0; md.k.count(1)]).unwrap();
    // Inject Q uniformly over the x = 0 face.
    let q_in = 3.0;
    let mut flux = vec![0.0; md.k.count(2)];
    for (i, c) in md.k.cells(2).iter().enumerate() {
        if c.upper.dim == 2 && faces.inlet.contains(&c.upper.index) {
            let s = md.k.induced_boundary_sign(i).unwrap() as f64;
            let outward = -q_in * md.k.measures(2)[i] / faces.area;
            flux[i] = outward / (-(md.k.handedness() as f64) * s);
        }
    }
    let prob = prob.with_neumann_flux(flux.clone()).unwrap();
    let sol = solve_steady(&prob, &SolveOptions::default()).unwrap();
    let out = sol.outward_flux(&md.k, &faces.outlet).unwrap();
    assert!(rel_err(out, q_in) < 1e-12, "{out}");
    // Linear profile: p(0) = Q·L/(Π·A).
    let p0 = md.k.vertex_of(CellId::new(0, 0));
    assert!(md.k.coords()[p0][0] == 0.0);
    assert!(rel_err(sol.pressure.values[p0], q_in * 2.0 / 2.0) < 1e-12, "{}", sol.pressure.values[p0]);
}

#[test]
fn boundary_hodge_matches_the_surface_cup_product() {
    // Σ_v a(v)·φ(v)·(⋆_Γσ)(v) = Σ_b s(b)·σ(b)·mean_corners(φ), with a(v) a quarter of the area around v.
    let (md, _) = grid_problem_parts(5, 0.25);
    let faces = pressure_drop_faces(&md.m, Axis::Z, 10.0).unwrap();
    let part = formflow::flow::BoundaryPartition::with_dirichlet(&md.m, faces.inlet.clone()).unwrap();
    let prob = FlowProblem::new(&md.m, &md.k, &md.calc, &part, &vec![0.0; faces.inlet.len()], vec![1.0; md.k.count(1)]).unwrap();
    let cells2 = prob.sets.neumann[2].clone();
    let star = boundary_hodge(&md.k, &cells2).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let sigma: Vec<f64> = (0..md.k.count(2)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let phi: Vec<f64> = (0..md.k.count(0)).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut quarter = vec![0.0; md.k.count(0)];
        let mut rhs = 0.0;
        for &b in &cells2 {
            let vs = md.k.vertices_of(2, b);
            let s = md.k.induced_boundary_sign(b).unwrap() as f64;
            rhs += s * sigma[b] * vs.iter().map(|&v| phi[v]).sum::<f64>() / 4.0;
            for v in vs {
                quarter[v] += md.k.measures(2)[b] / 4.0;
            }
        }
        let st = star.apply(&sigma).unwrap();
        let lhs: f64 = (0..md.k.count(0)).map(|v| quarter[v] * phi[v] * st[v]).sum();
        assert!((lhs - rhs).abs() < 1e-12 * (1.0 + rhs.abs()), "{lhs} {rhs}");
    }
}

#[test]
fn projected_neumann_rows_are_rank_deficient() {
    let xs = [0.0, 0.5, 1.0];
    let md = model(&xs, &xs, &xs);
    let faces = pressure_drop_faces(&md.m, Axis::X, 10.0).unwrap();
    let pi = vec![1.0; md.k.count(1)];
    let rank_gap = |scheme| {
        let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, pi.clone())
            .unwrap()
            .with_neumann_scheme(scheme);
        let sys = assemble_steady(&prob).unwrap();
        if scheme == NeumannScheme::Projected {
            assert!(sys.row_kind.contains(&RowKind::Neumann));
        }
        let n = sys.unknowns.len();
        let a = nalgebra::DMatrix::from_fn(n, n, |i, j| sys.matrix.get(i, j));
        let sv = a.singular_values();
        sv.iter().filter(|&&s| s < 1e-10 * sv.max()).count()
    };
    assert_eq!(rank_gap(NeumannScheme::Natural), 0);
    assert!(rank_gap(NeumannScheme::Projected) > 0);
}

fn w0_norm(w0: &[f64], a: &[f64], b: &[f64]) -> f64 {
    w0.iter().zip(a.iter().zip(b)).map(|(w, (x, y))| w * (x - y) * (x - y)).sum::<f64>().sqrt()
}

#[test]
fn transient_fixed_point_and_monotone_decay() {
    let md = model(&[0.0, 1.0, 2.0], &[0.0, 1.0], &[0.0, 1.0]);
    let faces = pressure_drop_faces(&md.m, Axis::X, 10.0).unwrap();
    let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, vec![1e-3; md.k.count(1)])
        .unwrap()
        .with_compressibility(vec![4.5e-10; md.k.count(0)])
        .unwrap();
    let opts = SolveOptions::default();
    let steady = solve_steady(&prob, &opts).unwrap().pressure.values;
    let w0 = md.calc.inner.weights(0);

    let stepper = TransientSolver::new(&prob, 1e-6, opts).unwrap();
    let again = stepper.step(&steady).unwrap();
    assert!(again.iter().zip(&steady).all(|(a, b)| (a - b).abs() < 1e-10));

    let mut p: Vec<f64> = steady.iter().map(|_| 0.0).collect();
    for (&v, &val) in &prob.fixed() {
        p[v] = val;
    }
    let mut prev = w0_norm(w0, &p, &steady);
    for _ in 0..50 {
        p = stepper.step(&p).unwrap();
        let d = w0_norm(w0, &p, &steady);
        assert!(d <= prev * (1.0 + 1e-12) + 1e-14, "{d} > {prev}");
        prev = d;
    }

    let huge = TransientSolver::new(&prob, 1e12, opts).unwrap();
    let limit = huge.step(&vec![0.0; p.len()]).unwrap();
    assert!(limit.iter().zip(&steady).all(|(a, b)| (a - b).abs() < 1e-8));

    for e in -6..=6 {
        let s = TransientSolver::new(&prob, 10f64.powi(e), opts).unwrap();
        let mut q = vec![0.0; p.len()];
        for _ in 0..5 {
            q = s.step(&q).unwrap();
            assert!(q.iter().all(|x| x.is_finite() && *x >= -1e-9 && *x <= 1.0 + 1e-9));
        }
    }
    let (end, _) = TransientSolver::new(&prob, 1.0, opts).unwrap().run_to_steady(vec![0.0; p.len()], 1e-8, 10_000).unwrap();
    assert!(end.iter().zip(&steady).all(|(a, b)| (a - b).abs() < 1e-8));
}

#[test]
fn zero_compressibility_is_rejected_for_transients() {
    let md = model(&[0.0, 1.0, 2.0], &[0.0, 1.0], &[0.0, 1.0]);
    let faces = pressure_drop_faces(&md.m, Axis::X, 10.0).unwrap();
    let prob = pressure_drop_problem(&md.m, &md.k, &md.calc, &faces, 1.0, 0.0, vec![1.0; md.k.count(1)]).unwrap();
    assert!(matches!(
        TransientSolver::new(&prob, 1.0, SolveOptions::default()),
        Err(formflow::Error::Validation(_))
    ));
}
