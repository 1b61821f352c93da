//! Embedded simplicial 2-complexes over point samples with the shortest-path
//! inner metric. Complexes are immutable after construction; queries are pure
//! and parallelize over sources.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{self, PointCloud};
use crate::{DUP_TOL, METRIC_TOL};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// An immutable embedded complex: vertices in R^N, weighted edges, triangles.
#[derive(Debug, Clone, Serialize)]
pub struct EmbeddedComplex {
    vertices: PointCloud,
    edges: Vec<Edge>,
    triangles: Vec<[usize; 3]>,
    #[serde(skip)]
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl EmbeddedComplex {
    /// Build and validate a complex. Edge weights must equal Euclidean
    /// lengths, triangle edges must be present, vertices must be distinct.
    pub fn new(
        vertices: PointCloud,
        edges: Vec<(usize, usize)>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        let n = vertices.len();
        if let Some((i, j)) = geometry::find_duplicate(&vertices, DUP_TOL) {
            return Err(Error::DuplicateVertex(i, j));
        }
        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen = HashSet::new();
        for (a, b) in edges {
            let (a, b) = if a < b { (a, b) } else { (b, a) };
            if a == b {
                continue;
            }
            if b >= n {
                return Err(Error::VertexOutOfBounds(b, n));
            }
            if seen.insert((a, b)) {
                let weight = geometry::dist(vertices.point(a), vertices.point(b));
                canonical.push(Edge { a, b, weight });
            }
        }
        canonical.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        let edge_set: HashSet<(usize, usize)> =
            canonical.iter().map(|e| (e.a, e.b)).collect();
        let mut tris = Vec::with_capacity(triangles.len());
        for t in triangles {
            let mut t = t;
            t.sort_unstable();
            let [a, b, c] = t;
            if c >= n {
                return Err(Error::VertexOutOfBounds(c, n));
            }
            for pair in [(a, b), (a, c), (b, c)] {
                if !edge_set.contains(&pair) {
                    return Err(Error::MissingTriangleEdge(a, b, c));
                }
            }
            tris.push(t);
        }
        tris.sort_unstable();
        tris.dedup();
        let mut adjacency = vec![Vec::new(); n];
        for e in &canonical {
            adjacency[e.a].push((e.b, e.weight));
            adjacency[e.b].push((e.a, e.weight));
        }
        for adj in &mut adjacency {
            adj.sort_by(|x, y| x.0.cmp(&y.0));
        }
        Ok(Self {
            vertices,
            edges: canonical,
            triangles: tris,
            adjacency,
        })
    }

    /// Like `new`, but with explicit edge weights which are checked against
    /// the Euclidean lengths of the endpoints.
    pub fn with_weights(
        vertices: PointCloud,
        edges: Vec<(usize, usize, f64)>,
        triangles: Vec<[usize; 3]>,
    ) -> Result<Self> {
        for &(a, b, w) in &edges {
            let eu = geometry::dist(vertices.point(a), vertices.point(b));
            if (w - eu).abs() > METRIC_TOL {
                return Err(Error::EdgeWeightMismatch {
                    a,
                    b,
                    weight: w,
                    euclidean: eu,
                });
            }
        }
        Self::new(
            vertices,
            edges.into_iter().map(|(a, b, _)| (a, b)).collect(),
            triangles,
        )
    }

    /// Symmetrized k-nearest-neighbour complex over a point cloud.
    /// `validate_edge` can reject candidate edges whose chord leaves the
    /// underlying set (used by variety samplers); `None` keeps all of them.
    ///
    /// With a validator, each vertex scans a larger candidate pool in
    /// distance order and keeps its k nearest *valid* neighbours, so thin
    /// sheets rejected by the validator do not starve the graph.
    pub fn from_knn(
        points: PointCloud,
        k: usize,
        validate_edge: Option<&(dyn Fn(&[f64], &[f64]) -> bool + Sync)>,
    ) -> Result<Self> {
        let pool = match validate_edge {
            Some(_) => (4 * k).min(points.len().saturating_sub(1)),
            None => k,
        };
        let neighbors = geometry::knn_neighbors(&points, pool);
        let mut pairs: Vec<(usize, usize)> = match validate_edge {
            Some(f) => (0..points.len())
                .into_par_iter()
                .flat_map_iter(|i| {
                    let mut kept = Vec::with_capacity(k);
                    for &(j, _) in &neighbors[i] {
                        if kept.len() >= k {
                            break;
                        }
                        if f(points.point(i), points.point(j)) {
                            kept.push(if i < j { (i, j) } else { (j, i) });
                        }
                    }
                    kept
                })
                .collect(),
            None => neighbors
                .iter()
                .enumerate()
                .flat_map(|(i, nb)| {
                    nb.iter()
                        .map(move |&(j, _)| if i < j { (i, j) } else { (j, i) })
                })
                .collect(),
        };
        pairs.sort_unstable();
        pairs.dedup();
        let triangles = triangles_from_edges(points.len(), &pairs);
        Self::new(points, pairs, triangles)
    }

    pub fn vertices(&self) -> &PointCloud {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &[f64] {
        self.vertices.point(i)
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn neighbors(&self, v: usize) -> &[(usize, f64)] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].iter().any(|&(j, _)| j == b)
    }

    pub fn edge_weight(&self, a: usize, b: usize) -> Option<f64> {
        self.adjacency[a]
            .iter()
            .find(|&&(j, _)| j == b)
            .map(|&(_, w)| w)
    }

    /// Connected components as a vertex -> component-id labelling.
    pub fn components(&self) -> (usize, Vec<usize>) {
        let n = self.vertex_count();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        for s in 0..n {
            if label[s] != usize::MAX {
                continue;
            }
            let mut stack = vec![s];
            label[s] = count;
            while let Some(v) = stack.pop() {
                for &(w, _) in &self.adjacency[v] {
                    if label[w] == usize::MAX {
                        label[w] = count;
                        stack.push(w);
                    }
                }
            }
            count += 1;
        }
        (count, label)
    }

    pub fn is_connected(&self) -> bool {
        self.vertex_count() <= 1 || self.components().0 == 1
    }

    /// Single-source shortest-path distances and predecessors (Dijkstra).
    pub fn distances_from(&self, source: usize) -> (Vec<f64>, Vec<usize>) {
        let n = self.vertex_count();
        let mut dist = vec![f64::INFINITY; n];
        let mut prev = vec![usize::MAX; n];
        let mut heap = BinaryHeap::new();
        dist[source] = 0.0;
        heap.push(Reverse((OrdF64(0.0), source)));
        while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            for &(w, len) in &self.adjacency[v] {
                let nd = d + len;
                if nd < dist[w] {
                    dist[w] = nd;
                    prev[w] = v;
                    heap.push(Reverse((OrdF64(nd), w)));
                }
            }
        }
        (dist, prev)
    }

    /// Minimal-length edge path between two vertices.
    pub fn shortest_path(&self, a: usize, b: usize) -> Result<GeodesicPath> {
        let n = self.vertex_count();
        if a >= n {
            return Err(Error::VertexOutOfBounds(a, n));
        }
        if b >= n {
            return Err(Error::VertexOutOfBounds(b, n));
        }
        if a == b {
            return Ok(GeodesicPath {
                vertices: vec![a],
                length: 0.0,
            });
        }
        let (dist, prev) = self.distances_from(a);
        if !dist[b].is_finite() {
            return Err(Error::DisconnectedPair(a, b));
        }
        let mut vertices = vec![b];
        let mut v = b;
        while v != a {
            v = prev[v];
            vertices.push(v);
        }
        vertices.reverse();
        Ok(GeodesicPath {
            vertices,
            length: dist[b],
        })
    }

    /// Full symmetric matrix of inner distances. Errors on disconnected input.
    pub fn inner_distance_matrix(&self) -> Result<Vec<Vec<f64>>> {
        let (components, _) = self.components();
        if components > 1 {
            return Err(Error::DisconnectedComplex { components });
        }
        Ok((0..self.vertex_count())
            .into_par_iter()
            .map(|s| self.distances_from(s).0)
            .collect())
    }

    /// Inner distance between vertex pairs of one source, without paths.
    pub fn inner_distances(&self, source: usize) -> Vec<f64> {
        self.distances_from(source).0
    }

    /// Total Euclidean length of a vertex path, checking edges exist.
    pub fn path_length(&self, vertices: &[usize]) -> Result<f64> {
        let mut length = 0.0;
        for w in vertices.windows(2) {
            match self.edge_weight(w[0], w[1]) {
                Some(l) => length += l,
                None => return Err(Error::NotAnEdge(w[0], w[1])),
            }
        }
        Ok(length)
    }

    /// Sub-complex induced on a vertex subset. Returns the new complex and
    /// the original index of each retained vertex. The input is already
    /// validated, so this skips re-validation.
    pub fn induced(&self, keep: &[bool]) -> Result<(EmbeddedComplex, Vec<usize>)> {
        let old_of_new: Vec<usize> = (0..self.vertex_count()).filter(|&v| keep[v]).collect();
        let mut new_of_old = vec![usize::MAX; self.vertex_count()];
        for (n, &o) in old_of_new.iter().enumerate() {
            new_of_old[o] = n;
        }
        let mut points = PointCloud::empty(self.vertices.dim());
        for &o in &old_of_new {
            points.push(self.vertex(o));
        }
        let edges: Vec<Edge> = self
            .edges
            .iter()
            .filter(|e| keep[e.a] && keep[e.b])
            .map(|e| Edge {
                a: new_of_old[e.a],
                b: new_of_old[e.b],
                weight: e.weight,
            })
            .collect();
        let triangles = self
            .triangles
            .iter()
            .filter(|t| t.iter().all(|&v| keep[v]))
            .map(|t| [new_of_old[t[0]], new_of_old[t[1]], new_of_old[t[2]]])
            .collect();
        let cx = EmbeddedComplex::from_parts_trusted(points, edges, triangles);
        Ok((cx, old_of_new))
    }

    /// Assemble from pre-validated parts (edges canonical and sorted by the
    /// caller's construction, weights already Euclidean).
    fn from_parts_trusted(
        vertices: PointCloud,
        mut edges: Vec<Edge>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Self {
        edges.sort_by(|x, y| (x.a, x.b).cmp(&(y.a, y.b)));
        triangles.sort_unstable();
        let mut adjacency = vec![Vec::new(); vertices.len()];
        for e in &edges {
            adjacency[e.a].push((e.b, e.weight));
            adjacency[e.b].push((e.a, e.weight));
        }
        for adj in &mut adjacency {
            adj.sort_by(|x, y| x.0.cmp(&y.0));
        }
        Self {
            vertices,
            edges,
            triangles,
            adjacency,
        }
    }

    /// Build a loop from an edge-connected cyclic vertex sequence.
    pub fn loop_from_vertices(&self, vertices: Vec<usize>) -> Result<LoopPath> {
        assert!(!vertices.is_empty());
        assert_eq!(
            vertices.first(),
            vertices.last(),
            "loop must close (first == last)"
        );
        let length = self.path_length(&vertices)?;
        let basepoint = vertices[0];
        Ok(LoopPath {
            vertices,
            length,
            basepoint,
        })
    }
}

/// Triangles = triples of mutually adjacent vertices.
pub fn triangles_from_edges(n: usize, pairs: &[(usize, usize)]) -> Vec<[usize; 3]> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    let mut tris = Vec::new();
    for &(a, b) in pairs {
        // common neighbours above b keep each triangle unique
        let (la, lb) = (&adj[a], &adj[b]);
        let (mut i, mut j) = (0, 0);
        while i < la.len() && j < lb.len() {
            match la[i].cmp(&lb[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    if la[i] > b {
                        tris.push([a, b, la[i]]);
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
    }
    tris
}

/// Tetrahedra = 4-cliques (every face must already be a triangle).
pub fn tetrahedra_from_edges(
    n: usize,
    pairs: &[(usize, usize)],
    triangles: &[[usize; 3]],
) -> Vec<[usize; 4]> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b) in pairs {
        adj[a].push(b);
        adj[b].push(a);
    }
    for l in &mut adj {
        l.sort_unstable();
    }
    let mut tets = Vec::new();
    for &[a, b, c] in triangles {
        let mut common: Vec<usize> = adj[a]
            .iter()
            .filter(|&&d| d > c && adj[b].binary_search(&d).is_ok() && adj[c].binary_search(&d).is_ok())
            .copied()
            .collect();
        common.dedup();
        for d in common {
            tets.push([a, b, c, d]);
        }
    }
    tets
}

/// An edge path with its traversed length.
#[derive(Debug, Clone, Serialize)]
pub struct GeodesicPath {
    pub vertices: Vec<usize>,
    pub length: f64,
}

/// A closed edge path (first vertex = last vertex).
#[derive(Debug, Clone, Serialize)]
pub struct LoopPath {
    pub vertices: Vec<usize>,
    pub length: f64,
    pub basepoint: usize,
}

impl LoopPath {
    pub fn constant(v: usize) -> Self {
        Self {
            vertices: vec![v, v],
            length: 0.0,
            basepoint: v,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.length == 0.0
    }

    /// Concatenation of loops sharing a basepoint; length adds.
    pub fn concatenate(&self, other: &LoopPath) -> Result<LoopPath> {
        if self.basepoint != other.basepoint {
            return Err(Error::BasepointMismatch(self.basepoint, other.basepoint));
        }
        if self.is_constant() {
            return Ok(other.clone());
        }
        if other.is_constant() {
            return Ok(self.clone());
        }
        let mut vertices = self.vertices.clone();
        vertices.extend_from_slice(&other.vertices[1..]);
        Ok(LoopPath {
            vertices,
            length: self.length + other.length,
            basepoint: self.basepoint,
        })
    }

    /// The same loop traversed backwards.
    pub fn reversed(&self) -> LoopPath {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        LoopPath {
            vertices,
            length: self.length,
            basepoint: self.basepoint,
        }
    }

    /// Oriented edge multiset as (min, max, sign-count) over Z.
    pub fn signed_edge_counts(&self) -> std::collections::HashMap<(usize, usize), i64> {
        let mut counts = std::collections::HashMap::new();
        for w in self.vertices.windows(2) {
            let (u, v) = (w[0], w[1]);
            if u == v {
                continue;
            }
            let (key, sign) = if u < v { ((u, v), 1) } else { ((v, u), -1) };
            *counts.entry(key).or_insert(0) += sign;
        }
        counts
    }

    /// Edge support over Z2: edges traversed an odd number of times.
    pub fn z2_edge_support(&self) -> Vec<(usize, usize)> {
        let mut v: Vec<(usize, usize)> = self
            .signed_edge_counts()
            .into_iter()
            .filter(|&(_, c)| c.rem_euclid(2) != 0)
            .map(|(e, _)| e)
            .collect();
        v.sort_unstable();
        v
    }
}

/// f64 wrapper with a total order for use in heaps (no NaN by construction).
#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn square_opposite_corners() {
        let pts = PointCloud::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![1.0, 1.0],
            vec![0.0, 1.0],
        ]);
        let cx =
            EmbeddedComplex::new(pts, vec![(0, 1), (1, 2), (2, 3), (3, 0)], vec![]).unwrap();
        let p = cx.shortest_path(0, 2).unwrap();
        assert!((p.length - 2.0).abs() < 1e-12);
        assert_eq!(p.vertices.len(), 3);
    }

    #[test]
    fn polygon_antipodal_distance_near_pi() {
        let cx = fixtures::polygon_complex(256, 1.0);
        let p = cx.shortest_path(0, 128).unwrap();
        let pi = std::f64::consts::PI;
        assert!((p.length - pi).abs() / pi < 0.01, "len = {}", p.length);
    }

    #[test]
    fn trivial_self_path() {
        let cx = fixtures::polygon_complex(8, 1.0);
        let p = cx.shortest_path(3, 3).unwrap();
        assert_eq!(p.length, 0.0);
        assert_eq!(p.vertices, vec![3]);
    }

    #[test]
    fn two_vertex_matrix() {
        let pts = PointCloud::from_rows(&[vec![0.0], vec![2.5]]);
        let cx = EmbeddedComplex::new(pts, vec![(0, 1)], vec![]).unwrap();
        let m = cx.inner_distance_matrix().unwrap();
        assert_eq!(m[0][1], 2.5);
        assert_eq!(m[1][0], 2.5);
        assert_eq!(m[0][0], 0.0);
    }

    #[test]
    fn disconnected_matrix_errors() {
        let pts = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![5.0, 0.0]]);
        let cx = EmbeddedComplex::new(pts, vec![(0, 1)], vec![]).unwrap();
        match cx.inner_distance_matrix() {
            Err(Error::DisconnectedComplex { components }) => assert_eq!(components, 2),
            other => panic!("expected disconnected error, got {other:?}"),
        }
        assert!(matches!(
            cx.shortest_path(0, 2),
            Err(Error::DisconnectedPair(0, 2))
        ));
    }

    #[test]
    fn duplicate_vertices_rejected() {
        let pts = PointCloud::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0]]);
        assert!(matches!(
            EmbeddedComplex::new(pts, vec![], vec![]),
            Err(Error::DuplicateVertex(0, 1))
        ));
    }

    #[test]
    fn triangle_requires_edges() {
        let pts =
            PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0]]);
        let r = EmbeddedComplex::new(pts, vec![(0, 1), (1, 2)], vec![[0, 1, 2]]);
        assert!(matches!(r, Err(Error::MissingTriangleEdge(0, 1, 2))));
    }

    #[test]
    fn explicit_weights_validated() {
        let pts = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        let r = EmbeddedComplex::with_weights(pts, vec![(0, 1, 1.5)], vec![]);
        assert!(matches!(r, Err(Error::EdgeWeightMismatch { .. })));
    }

    #[test]
    fn loop_concatenation() {
        let cx = fixtures::polygon_complex(256, 1.0);
        let gen = fixtures::polygon_winding_loop(&cx, 1, 0);
        let constant = LoopPath::constant(0);
        let same = gen.concatenate(&constant).unwrap();
        assert_eq!(same.length, gen.length);
        let double = gen.concatenate(&gen).unwrap();
        assert!((double.length - 2.0 * gen.length).abs() < 1e-12);
        // perimeter of the 256-gon is 256 * 2 sin(pi/256); doubled ~ 4 pi
        let perimeter = 256.0 * 2.0 * (std::f64::consts::PI / 256.0).sin();
        assert!((double.length - 2.0 * perimeter).abs() < 1e-9);
        assert!((double.length - 4.0 * std::f64::consts::PI).abs() < 0.01);
    }

    #[test]
    fn loop_concat_mismatched_base_errors() {
        let cx = fixtures::polygon_complex(16, 1.0);
        let l0 = fixtures::polygon_winding_loop(&cx, 1, 0);
        let l1 = fixtures::polygon_winding_loop(&cx, 1, 3);
        assert!(matches!(
            l0.concatenate(&l1),
            Err(Error::BasepointMismatch(0, 3))
        ));
    }

    #[test]
    fn loop_inverse_cancels_over_z() {
        let cx = fixtures::polygon_complex(16, 1.0);
        let l = fixtures::polygon_winding_loop(&cx, 1, 0);
        let cat = l.concatenate(&l.reversed()).unwrap();
        assert!(cat.signed_edge_counts().values().all(|&c| c == 0));
        assert!(cat.z2_edge_support().is_empty());
    }

    #[test]
    fn knn_complex_connected_on_circle() {
        let cx = fixtures::polygon_cloud(64, 1.0);
        let g = EmbeddedComplex::from_knn(cx, 4, None).unwrap();
        assert!(g.is_connected());
        // inner >= outer on every pair
        let m = g.inner_distance_matrix().unwrap();
        for i in 0..g.vertex_count() {
            for j in 0..g.vertex_count() {
                let outer = geometry::dist(g.vertex(i), g.vertex(j));
                assert!(m[i][j] + 1e-9 >= outer);
            }
        }
    }
}
