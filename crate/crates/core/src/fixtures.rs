//! Deterministic test-corpus generators: polygons, grids, classical
//! triangulations, and the synthetic pinching families used in tests and by
//! the command-line front end.

use std::collections::HashMap;

use crate::complex::{EmbeddedComplex, LoopPath};
use crate::geometry::{self, PointCloud};
use crate::homology::ChainComplex;

/// Regular n-gon sample on a circle of radius `r`.
pub fn polygon_cloud(n: usize, r: f64) -> PointCloud {
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
        rows.push(vec![r * th.cos(), r * th.sin()]);
    }
    PointCloud::from_rows(&rows)
}

/// Regular n-gon with consecutive edges (no triangles).
pub fn polygon_complex(n: usize, r: f64) -> EmbeddedComplex {
    let edges = (0..n).map(|i| (i, (i + 1) % n)).collect();
    EmbeddedComplex::new(polygon_cloud(n, r), edges, vec![]).expect("valid polygon")
}

/// Loop winding `k` times around a polygon complex, based at `base`.
/// `k = 0` gives the constant loop; negative `k` reverses orientation.
pub fn polygon_winding_loop(cx: &EmbeddedComplex, k: i64, base: usize) -> LoopPath {
    let n = cx.vertex_count();
    if k == 0 {
        return LoopPath::constant(base);
    }
    let steps = n as i64 * k.abs();
    let dir = k.signum();
    let mut vertices = Vec::with_capacity(steps as usize + 1);
    for s in 0..=steps {
        let v = (base as i64 + dir * s).rem_euclid(n as i64) as usize;
        vertices.push(v);
    }
    cx.loop_from_vertices(vertices).expect("polygon loop")
}

/// Uniform sample of a straight segment [0, len] on the x-axis in R^2.
pub fn segment_cloud(n: usize, len: f64) -> PointCloud {
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|i| vec![len * i as f64 / (n - 1) as f64, 0.0])
        .collect();
    PointCloud::from_rows(&rows)
}

/// Two unit circles tangent at the origin, `n` samples each (origin shared).
pub fn tangent_circles_cloud(n: usize) -> PointCloud {
    let mut rows = Vec::new();
    for k in 0..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        rows.push(vec![-1.0 + th.cos(), th.sin()]);
    }
    for k in 0..n {
        if 2 * k == n {
            continue; // origin already present from the first circle
        }
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        rows.push(vec![1.0 + th.cos(), th.sin()]);
    }
    let (cloud, _) = geometry::dedup_points(&PointCloud::from_rows(&rows), 1e-9);
    cloud
}

/// Two tangent unit circles as an explicit curve complex: each circle is a
/// cycle of `n` edges and the tangency point is shared. Inner paths between
/// the circles must pass through the tangency vertex (index 0).
pub fn tangent_circles_complex(n: usize) -> EmbeddedComplex {
    let mut rows = vec![vec![0.0, 0.0]];
    // circle A, centre (-1, 0): indices 1..n   (angle k * 2pi/n, k = 1..n-1)
    for k in 1..n {
        let th = 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        rows.push(vec![-1.0 + th.cos(), th.sin()]);
    }
    // circle B, centre (1, 0): indices n..2n-2
    for k in 1..n {
        let th = std::f64::consts::PI + 2.0 * std::f64::consts::PI * k as f64 / n as f64;
        rows.push(vec![1.0 + th.cos(), th.sin()]);
    }
    let a = |k: usize| if k % n == 0 { 0 } else { k % n };
    let b = |k: usize| if k % n == 0 { 0 } else { n - 1 + (k % n) };
    let mut edges = Vec::new();
    for k in 0..n {
        edges.push((a(k), a(k + 1)));
        edges.push((b(k), b(k + 1)));
    }
    EmbeddedComplex::new(PointCloud::from_rows(&rows), edges, vec![])
        .expect("valid tangent circles")
}

/// Triangulated torus grid: minor circle radius `r` with `nu` steps, major
/// circle radius `big_r` with `nv` steps. Vertex (i, j) has id `i * nv + j`.
pub fn torus_grid(nu: usize, nv: usize, r: f64, big_r: f64) -> EmbeddedComplex {
    let mut rows = Vec::with_capacity(nu * nv);
    for i in 0..nu {
        let th = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
        for j in 0..nv {
            let ph = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
            let rad = big_r + r * th.cos();
            rows.push(vec![rad * ph.cos(), rad * ph.sin(), r * th.sin()]);
        }
    }
    let id = |i: usize, j: usize| (i % nu) * nv + (j % nv);
    let mut edges = Vec::new();
    let mut triangles = Vec::new();
    for i in 0..nu {
        for j in 0..nv {
            edges.push((id(i, j), id(i + 1, j)));
            edges.push((id(i, j), id(i, j + 1)));
            edges.push((id(i, j), id(i + 1, j + 1)));
            triangles.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            triangles.push([id(i, j), id(i, j + 1), id(i + 1, j + 1)]);
        }
    }
    EmbeddedComplex::new(PointCloud::from_rows(&rows), edges, triangles)
        .expect("valid torus grid")
}

/// Vertex id in the torus grid layout.
pub fn torus_grid_index(nv: usize, i: usize, j: usize) -> usize {
    i * nv + j
}

/// Fan-triangulated disk mesh of given radius: `rings` concentric rings of
/// `segs` vertices plus the center. Vertex 0 is the center.
pub fn disk_mesh(rings: usize, segs: usize, radius: f64) -> EmbeddedComplex {
    let mut rows = vec![vec![0.0, 0.0]];
    for k in 1..=rings {
        let r = radius * k as f64 / rings as f64;
        for s in 0..segs {
            let th = 2.0 * std::f64::consts::PI * s as f64 / segs as f64;
            rows.push(vec![r * th.cos(), r * th.sin()]);
        }
    }
    let id = |k: usize, s: usize| {
        if k == 0 {
            0
        } else {
            1 + (k - 1) * segs + (s % segs)
        }
    };
    let mut edges = Vec::new();
    let mut triangles = Vec::new();
    for s in 0..segs {
        edges.push((0, id(1, s)));
        edges.push((id(1, s), id(1, s + 1)));
        triangles.push([0, id(1, s), id(1, s + 1)]);
    }
    for k in 1..rings {
        for s in 0..segs {
            edges.push((id(k, s), id(k + 1, s)));
            edges.push((id(k + 1, s), id(k + 1, s + 1)));
            edges.push((id(k, s), id(k + 1, s + 1)));
            triangles.push([id(k, s), id(k + 1, s), id(k + 1, s + 1)]);
            triangles.push([id(k, s), id(k, s + 1), id(k + 1, s + 1)]);
        }
    }
    EmbeddedComplex::new(PointCloud::from_rows(&rows), edges, triangles)
        .expect("valid disk mesh")
}

/// Fibonacci sphere sample of S^2 (deterministic, near-uniform).
pub fn sphere_cloud(n: usize) -> PointCloud {
    let golden = (1.0 + 5.0f64.sqrt()) / 2.0;
    let mut rows = Vec::with_capacity(n);
    for i in 0..n {
        let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
        let rad = (1.0 - z * z).sqrt();
        let th = 2.0 * std::f64::consts::PI * i as f64 / golden;
        rows.push(vec![rad * th.cos(), rad * th.sin(), z]);
    }
    PointCloud::from_rows(&rows)
}

/// Octahedron boundary (triangulated S^2), with its natural coordinates.
pub fn octahedron_chain() -> ChainComplex {
    // vertices: +x,-x,+y,-y,+z,-z
    let pos = PointCloud::from_rows(&[
        vec![1.0, 0.0, 0.0],
        vec![-1.0, 0.0, 0.0],
        vec![0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0],
        vec![0.0, 0.0, -1.0],
    ]);
    let mut triangles = Vec::new();
    for x in [0, 1] {
        for y in [2, 3] {
            for z in [4, 5] {
                triangles.push(vec![x, y, z]);
            }
        }
    }
    let mut cx = ChainComplex::from_top_simplices(6, &triangles);
    cx = ChainComplex::new(
        6,
        cx.edges().to_vec(),
        cx.triangles().to_vec(),
        vec![],
        Some(pos),
    );
    cx
}

/// The 7-vertex (Moebius) torus triangulation: triangles {i, i+1, i+3} and
/// {i, i+2, i+3} mod 7.
pub fn torus7_chain() -> ChainComplex {
    let mut triangles = Vec::new();
    for i in 0..7usize {
        triangles.push(vec![i, (i + 1) % 7, (i + 3) % 7]);
        triangles.push(vec![i, (i + 2) % 7, (i + 3) % 7]);
    }
    ChainComplex::from_top_simplices(7, &triangles)
}

/// RP^3 as the quotient of the barycentric subdivision of the 16-cell
/// boundary by the antipodal map. 40 vertices, 192 tetrahedra.
pub fn rp3_chain() -> ChainComplex {
    // cells of the cross-polytope boundary: non-empty sign vectors over
    // distinct axes, encoded as sorted lists of (axis, sign)
    type Cell = Vec<(usize, i8)>;
    let mut cells: Vec<Cell> = Vec::new();
    for axes_mask in 1u32..16 {
        let axes: Vec<usize> = (0..4).filter(|&a| axes_mask & (1 << a) != 0).collect();
        let k = axes.len();
        for signs in 0..(1u32 << k) {
            let cell: Cell = axes
                .iter()
                .enumerate()
                .map(|(idx, &a)| (a, if signs & (1 << idx) != 0 { 1 } else { -1 }))
                .collect();
            cells.push(cell);
        }
    }
    let index: HashMap<Cell, usize> = cells.iter().cloned().zip(0..).collect();
    let negate = |c: &Cell| -> Cell { c.iter().map(|&(a, s)| (a, -s)).collect() };
    // orbit representative ids
    let mut orbit = vec![usize::MAX; cells.len()];
    let mut orbit_count = 0;
    for (i, c) in cells.iter().enumerate() {
        if orbit[i] != usize::MAX {
            continue;
        }
        let j = index[&negate(c)];
        orbit[i] = orbit_count;
        orbit[j] = orbit_count;
        orbit_count += 1;
    }
    let contains = |big: &Cell, small: &Cell| small.iter().all(|x| big.contains(x));
    // maximal flags c0 < c1 < c2 < c3 by dimension (cell size 1..4)
    let by_size: Vec<Vec<usize>> = (1..=4)
        .map(|s| {
            (0..cells.len())
                .filter(|&i| cells[i].len() == s)
                .collect()
        })
        .collect();
    let mut tetra = Vec::new();
    for &c3 in &by_size[3] {
        for &c2 in &by_size[2] {
            if !contains(&cells[c3], &cells[c2]) {
                continue;
            }
            for &c1 in &by_size[1] {
                if !contains(&cells[c2], &cells[c1]) {
                    continue;
                }
                for &c0 in &by_size[0] {
                    if contains(&cells[c1], &cells[c0]) {
                        tetra.push(vec![orbit[c0], orbit[c1], orbit[c2], orbit[c3]]);
                    }
                }
            }
        }
    }
    let cx = ChainComplex::from_top_simplices(orbit_count, &tetra);
    debug_assert_eq!(orbit_count, 40);
    debug_assert_eq!(cx.tetrahedra().len(), 192);
    cx
}

/// Resample a closed curve (given as a dense point sequence) into `n`
/// points at equal arc-length intervals.
fn resample_closed_curve(dense: &[Vec<f64>], n: usize) -> PointCloud {
    let m = dense.len();
    let mut cumulative = vec![0.0];
    for i in 0..m {
        let d = geometry::dist(&dense[i], &dense[(i + 1) % m]);
        cumulative.push(cumulative[i] + d);
    }
    let total = *cumulative.last().unwrap();
    let mut rows = Vec::with_capacity(n);
    let mut seg = 0usize;
    for k in 0..n {
        let target = total * k as f64 / n as f64;
        while seg + 1 < cumulative.len() - 1 && cumulative[seg + 1] < target {
            seg += 1;
        }
        let span = cumulative[seg + 1] - cumulative[seg];
        let t = if span > 0.0 {
            (target - cumulative[seg]) / span
        } else {
            0.0
        };
        let (a, b) = (&dense[seg], &dense[(seg + 1) % m]);
        rows.push(
            a.iter()
                .zip(b)
                .map(|(x, y)| x + t * (y - x))
                .collect::<Vec<f64>>(),
        );
    }
    let (cloud, _) = geometry::dedup_points(&PointCloud::from_rows(&rows), 1e-9);
    cloud
}

/// Lemniscate with half-width `a` (figure-eight through the origin):
/// the Hausdorff limit of the pinching family below.
pub fn lemniscate_cloud(n: usize, a: f64) -> PointCloud {
    let dense: Vec<Vec<f64>> = (0..20 * n)
        .map(|i| {
            let t = 2.0 * std::f64::consts::PI * (i as f64 + 0.31) / (20 * n) as f64;
            let denom = 1.0 + t.sin() * t.sin();
            vec![
                a * 2.0f64.sqrt() * t.cos() / denom,
                a * 2.0f64.sqrt() * t.cos() * t.sin() / denom,
            ]
        })
        .collect();
    resample_closed_curve(&dense, n)
}

/// Single closed oval around two foci at (+-a, 0): |z-a||z+a| = b^2 with
/// b > a. As b decreases toward a the waist pinches toward the lemniscate.
pub fn cassini_oval_cloud(n: usize, a: f64, b: f64) -> PointCloud {
    assert!(b > a, "single oval requires b > a");
    let dense: Vec<Vec<f64>> = (0..20 * n)
        .map(|i| {
            let th = 2.0 * std::f64::consts::PI * (i as f64 + 0.31) / (20 * n) as f64;
            let c2 = (2.0 * th).cos();
            let s2 = (2.0 * th).sin();
            let r2 = a * a * c2 + (b.powi(4) - a.powi(4) * s2 * s2).max(0.0).sqrt();
            let r = r2.max(0.0).sqrt();
            vec![r * th.cos(), r * th.sin()]
        })
        .collect();
    resample_closed_curve(&dense, n)
}

/// Torus family pinching to a wedge of two pinched tori as `delta -> 0`:
/// tube radius delta + (1 - delta) * |sin theta| around a circle of radius 2.
pub fn pinched_torus_cloud(nu: usize, nv: usize, delta: f64) -> PointCloud {
    let mut rows = Vec::with_capacity(nu * nv);
    for j in 0..nv {
        let th = 2.0 * std::f64::consts::PI * j as f64 / nv as f64;
        let rho = delta + (1.0 - delta) * th.sin().abs();
        for i in 0..nu {
            let ph = 2.0 * std::f64::consts::PI * i as f64 / nu as f64;
            let rad = 2.0 + rho * ph.cos();
            rows.push(vec![rad * th.cos(), rad * th.sin(), rho * ph.sin()]);
        }
    }
    let (cloud, _) = geometry::dedup_points(&PointCloud::from_rows(&rows), 1e-9);
    cloud
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polygon_has_expected_perimeter() {
        let cx = polygon_complex(256, 1.0);
        let perimeter: f64 = cx.edges().iter().map(|e| e.weight).sum();
        let expected = 256.0 * 2.0 * (std::f64::consts::PI / 256.0).sin();
        assert!((perimeter - expected).abs() < 1e-9);
    }

    #[test]
    fn torus_grid_counts() {
        let t = torus_grid(8, 16, 1.0, 3.0);
        assert_eq!(t.vertex_count(), 128);
        assert_eq!(t.edges().len(), 3 * 128);
        assert_eq!(t.triangles().len(), 2 * 128);
        assert!(t.is_connected());
    }

    #[test]
    fn rp3_counts() {
        let cx = rp3_chain();
        assert_eq!(cx.vertex_count(), 40);
        assert_eq!(cx.tetrahedra().len(), 192);
        // Euler characteristic of a closed odd-dimensional manifold is 0
        let chi = cx.vertex_count() as i64 - cx.edges().len() as i64
            + cx.triangles().len() as i64
            - cx.tetrahedra().len() as i64;
        assert_eq!(chi, 0);
    }

    #[test]
    fn lemniscate_passes_near_origin() {
        let c = lemniscate_cloud(256, 1.0);
        let min_norm = c
            .iter()
            .map(geometry::norm)
            .fold(f64::INFINITY, f64::min);
        assert!(min_norm < 0.05, "min norm = {min_norm}");
    }

    #[test]
    fn cassini_oval_waist() {
        // waist of the single oval sits at x = 0, y = +- sqrt(b^2 - a^2)
        let (a, b) = (1.0, 1.02);
        let c = cassini_oval_cloud(512, a, b);
        let min_norm = c.iter().map(geometry::norm).fold(f64::INFINITY, f64::min);
        let expected = (b * b - a * a).sqrt();
        assert!(
            (min_norm - expected).abs() < 0.02,
            "waist {min_norm} vs {expected}"
        );
    }
}
