//! Small reference complexes used by tests, examples and benchmarks.

use crate::complex::RawComplex;
use crate::io::grid::structured_raw;

/// Two nodes joined by one edge of the given length.
pub fn single_segment(length: f64) -> RawComplex {
    RawComplex {
        nodes: vec![[0.0; 3], [length, 0.0, 0.0]],
        edges: vec![[0, 1]],
        ..RawComplex::default()
    }
}

/// The unit cube as a single hexahedron.
pub fn unit_cube() -> RawComplex {
    structured_raw([1, 1, 1], [1.0; 3]).expect("valid grid")
}

/// The corner tetrahedron with vertices at the origin and the unit points.
pub fn tetrahedron() -> RawComplex {
    RawComplex {
        nodes: vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]],
        edges: vec![[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]],
        faces: vec![vec![1, 2, 3], vec![0, 2, 3], vec![0, 1, 3], vec![0, 1, 2]],
        polyhedra: vec![vec![0, 1, 2, 3]],
    }
}

/// Unit cube with the corner at (1,1,1) cut off by the plane x+y+z = 2.5.
///
/// Every vertex keeps three incident edges, so the cell stays simple.
pub fn truncated_cube() -> RawComplex {
    let nodes = vec![
        [0.0, 0.0, 0.0], // 0
        [1.0, 0.0, 0.0], // 1
        [0.0, 1.0, 0.0], // 2
        [1.0, 1.0, 0.0], // 3
        [0.0, 0.0, 1.0], // 4
        [1.0, 0.0, 1.0], // 5
        [0.0, 1.0, 1.0], // 6
        [1.0, 1.0, 0.5], // 7: on edge 3-(1,1,1)
        [1.0, 0.5, 1.0], // 8: on edge 5-(1,1,1)
        [0.5, 1.0, 1.0], // 9: on edge 6-(1,1,1)
    ];
    let faces = vec![
        vec![0, 2, 3, 1],       // z = 0
        vec![4, 5, 8, 9, 6],    // z = 1
        vec![0, 1, 5, 4],       // y = 0
        vec![2, 6, 9, 7, 3],    // y = 1
        vec![0, 4, 6, 2],       // x = 0
        vec![1, 3, 7, 8, 5],    // x = 1
        vec![7, 9, 8],          // cut
    ];
    RawComplex {
        nodes,
        edges: edges_of(&faces),
        faces,
        polyhedra: vec![(0..7).collect()],
    }
}

/// Unit cube split by the plane x + y = 1 into two triangular prisms.
pub fn split_cube() -> RawComplex {
    let nodes = vec![
        [0.0, 0.0, 0.0], // 0
        [1.0, 0.0, 0.0], // 1
        [0.0, 1.0, 0.0], // 2
        [1.0, 1.0, 0.0], // 3
        [0.0, 0.0, 1.0], // 4
        [1.0, 0.0, 1.0], // 5
        [0.0, 1.0, 1.0], // 6
        [1.0, 1.0, 1.0], // 7
    ];
    let faces = vec![
        vec![0, 1, 2],    // 0: bottom, lower prism
        vec![4, 5, 6],    // 1: top, lower prism
        vec![0, 1, 5, 4], // 2: y = 0
        vec![0, 2, 6, 4], // 3: x = 0
        vec![1, 2, 6, 5], // 4: diagonal
        vec![1, 3, 2],    // 5: bottom, upper prism
        vec![5, 7, 6],    // 6: top, upper prism
        vec![1, 3, 7, 5], // 7: x = 1
        vec![2, 3, 7, 6], // 8: y = 1
    ];
    RawComplex {
        nodes,
        edges: edges_of(&faces),
        faces,
        polyhedra: vec![vec![0, 1, 2, 3, 4], vec![4, 5, 6, 7, 8]],
    }
}

/// Square pyramid; the apex has four incident edges.
pub fn square_pyramid() -> RawComplex {
    let nodes = vec![
        [0.0, 0.0, 0.0],
        [1.0, 0.0, 0.0],
        [1.0, 1.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.5, 0.5, 1.0],
    ];
    let faces = vec![
        vec![0, 1, 2, 3],
        vec![0, 1, 4],
        vec![1, 2, 4],
        vec![2, 3, 4],
        vec![3, 0, 4],
    ];
    RawComplex {
        nodes,
        edges: edges_of(&faces),
        faces,
        polyhedra: vec![(0..5).collect()],
    }
}

/// Edge list implied by face cycles, sorted by node pair.
pub fn edges_of(faces: &[Vec<usize>]) -> Vec<[usize; 2]> {
    let mut edges: Vec<[usize; 2]> = faces
        .iter()
        .flat_map(|c| {
            (0..c.len()).map(move |k| {
                let (a, b) = (c[k], c[(k + 1) % c.len()]);
                [a.min(b), a.max(b)]
            })
        })
        .collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}
