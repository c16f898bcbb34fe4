//! Small explicit meshes used by diagnostics and tests.

use super::{Triangulation, VertexId};

fn build(coords: Vec<[f64; 3]>, triangles: Vec<[VertexId; 3]>) -> Triangulation {
    Triangulation::from_triangles(coords, triangles).expect("valid built-in mesh")
}

pub fn octahedron() -> Triangulation {
    let coords = vec![
        [1.0, 0.0, 0.0],
        [-1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, 1.0],
        [0.0, 0.0, -1.0],
    ];
    let triangles = vec![
        [0, 2, 4],
        [2, 1, 4],
        [1, 3, 4],
        [3, 0, 4],
        [2, 0, 5],
        [1, 2, 5],
        [3, 1, 5],
        [0, 3, 5],
    ];
    build(coords, triangles)
}

pub fn icosahedron() -> Triangulation {
    let t = (1.0 + 5f64.sqrt()) / 2.0;
    let coords = vec![
        [-1.0, t, 0.0],
        [1.0, t, 0.0],
        [-1.0, -t, 0.0],
        [1.0, -t, 0.0],
        [0.0, -1.0, t],
        [0.0, 1.0, t],
        [0.0, -1.0, -t],
        [0.0, 1.0, -t],
        [t, 0.0, -1.0],
        [t, 0.0, 1.0],
        [-t, 0.0, -1.0],
        [-t, 0.0, 1.0],
    ];
    let triangles = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    build(coords, triangles)
}

/// Triangulated torus with `nu * nv` vertices; both counts must be at least 3.
pub fn torus(nu: usize, nv: usize) -> Triangulation {
    assert!(nu >= 3 && nv >= 3, "torus needs at least 3x3 vertices");
    let (big, small) = (2.0, 0.75);
    let id = |i: usize, j: usize| (i % nu) + nu * (j % nv);
    let mut coords = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let u = i as f64 / nu as f64 * std::f64::consts::TAU;
            let v = j as f64 / nv as f64 * std::f64::consts::TAU;
            let r = big + small * v.cos();
            coords.push([r * u.cos(), r * u.sin(), small * v.sin()]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * nu * nv);
    for j in 0..nv {
        for i in 0..nu {
            let (a, b, c, d) = (id(i, j), id(i + 1, j), id(i, j + 1), id(i + 1, j + 1));
            triangles.push([a, b, d]);
            triangles.push([a, d, c]);
        }
    }
    build(coords, triangles)
}

/// A 24-vertex patch of the triangular lattice shaped as a hexagon, with rows
/// of 4, 5, 6, 5 and 4 vertices numbered top to bottom, left to right.
pub fn hexagon_patch() -> Triangulation {
    let rows: [(f64, &[f64]); 5] = [
        (2.0, &[1.0, 2.0, 3.0, 4.0]),
        (1.0, &[0.5, 1.5, 2.5, 3.5, 4.5]),
        (0.0, &[0.0, 1.0, 2.0, 3.0, 4.0, 5.0]),
        (-1.0, &[0.5, 1.5, 2.5, 3.5, 4.5]),
        (-2.0, &[1.0, 2.0, 3.0, 4.0]),
    ];
    let coords: Vec<[f64; 3]> =
        rows.iter().flat_map(|(y, xs)| xs.iter().map(move |&x| [x, *y, 0.0])).collect();
    let find = |x: f64, y: f64| coords.iter().position(|c| (c[0] - x).abs() < 1e-9 && (c[1] - y).abs() < 1e-9);
    let mut triangles = Vec::new();
    for (a, c) in coords.iter().enumerate() {
        // upward and downward triangles anchored at their left vertex
        for dy in [1.0, -1.0] {
            if let (Some(b), Some(t)) = (find(c[0] + 1.0, c[1]), find(c[0] + 0.5, c[1] + dy)) {
                triangles.push([a, b, t]);
            }
        }
    }
    build(coords, triangles)
}
