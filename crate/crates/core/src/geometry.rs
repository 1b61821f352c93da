//! Point clouds in R^N and the elementary metric queries used everywhere else:
//! pairwise distances, nearest neighbours, Hausdorff distance, sampling gaps.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};

/// A finite set of points in R^N, stored flat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointCloud {
    coords: Vec<f64>,
    dim: usize,
}

impl PointCloud {
    pub fn new(dim: usize, coords: Vec<f64>) -> Self {
        assert!(dim > 0, "ambient dimension must be positive");
        assert_eq!(coords.len() % dim, 0, "coordinate buffer length mismatch");
        Self { coords, dim }
    }

    pub fn empty(dim: usize) -> Self {
        Self::new(dim, Vec::new())
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let dim = rows.first().map_or(1, Vec::len);
        let mut coords = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "inconsistent point dimension");
            coords.extend_from_slice(r);
        }
        Self::new(dim, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn push(&mut self, p: &[f64]) {
        assert_eq!(p.len(), self.dim);
        self.coords.extend_from_slice(p);
    }

    pub fn iter(&self) -> impl Iterator<Item = &[f64]> {
        self.coords.chunks_exact(self.dim)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    /// Largest nearest-neighbour distance; a proxy for the sampling gap.
    pub fn sampling_gap(&self) -> f64 {
        if self.len() < 2 {
            return 0.0;
        }
        (0..self.len())
            .into_par_iter()
            .map(|i| {
                let mut best = f64::INFINITY;
                for j in 0..self.len() {
                    if i != j {
                        best = best.min(dist(self.point(i), self.point(j)));
                    }
                }
                best
            })
            .reduce(|| 0.0, f64::max)
    }

    /// Scale every coordinate by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::new(self.dim, self.coords.iter().map(|c| c * s).collect())
    }
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist_sq(a, b).sqrt()
}

pub fn dist_sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Symmetric Hausdorff distance between two non-empty point sets.
pub fn hausdorff_distance(a: &PointCloud, b: &PointCloud) -> Result<f64> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

fn directed_hausdorff(a: &PointCloud, b: &PointCloud) -> f64 {
    (0..a.len())
        .into_par_iter()
        .map(|i| {
            let p = a.point(i);
            let mut best = f64::INFINITY;
            for j in 0..b.len() {
                best = best.min(dist_sq(p, b.point(j)));
            }
            best
        })
        .reduce(|| 0.0, f64::max)
        .sqrt()
}

/// For each point, its `k` nearest neighbours as `(index, distance)`,
/// sorted by distance then index. Brute force; adequate at desk scale.
pub fn knn_neighbors(cloud: &PointCloud, k: usize) -> Vec<Vec<(usize, f64)>> {
    let n = cloud.len();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let p = cloud.point(i);
            let mut all: Vec<(usize, f64)> = (0..n)
                .filter(|&j| j != i)
                .map(|j| (j, dist(p, cloud.point(j))))
                .collect();
            all.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap().then(a.0.cmp(&b.0)));
            all.truncate(k);
            all
        })
        .collect()
}

/// All pairs within `radius`, as `(i, j, distance)` with `i < j`.
pub fn pairs_within(cloud: &PointCloud, radius: f64) -> Vec<(usize, usize, f64)> {
    let n = cloud.len();
    let r2 = radius * radius;
    let mut pairs: Vec<(usize, usize, f64)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let p = cloud.point(i);
            (i + 1..n).filter_map(move |j| {
                let d2 = dist_sq(p, cloud.point(j));
                (d2 <= r2).then(|| (i, j, d2.sqrt()))
            })
        })
        .collect();
    pairs.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    pairs
}

/// Detect a pair of points closer than `tol`. Grid hash keeps this exact
/// while avoiding the full quadratic scan in the common case.
pub fn find_duplicate(cloud: &PointCloud, tol: f64) -> Option<(usize, usize)> {
    use std::collections::HashMap;
    let mut grid: HashMap<Vec<i64>, Vec<usize>> = HashMap::new();
    let key_of = |p: &[f64]| -> Vec<i64> {
        p.iter().map(|c| (c / tol).floor() as i64).collect()
    };
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let base = key_of(p);
        // check the 3^dim neighbourhood of the cell
        let mut stack = vec![(0usize, base.clone())];
        while let Some((axis, mut key)) = stack.pop() {
            if axis == base.len() {
                if let Some(bucket) = grid.get(&key) {
                    for &j in bucket {
                        if dist(p, cloud.point(j)) < tol {
                            return Some((j, i));
                        }
                    }
                }
                continue;
            }
            for delta in -1..=1 {
                key[axis] = base[axis] + delta;
                stack.push((axis + 1, key.clone()));
            }
        }
        grid.entry(base).or_default().push(i);
    }
    None
}

/// Deduplicate points closer than `tol`, keeping first occurrences.
/// Returns the pruned cloud and the index map old -> new.
pub fn dedup_points(cloud: &PointCloud, tol: f64) -> (PointCloud, Vec<usize>) {
    let mut kept = PointCloud::empty(cloud.dim());
    let mut map = Vec::with_capacity(cloud.len());
    for i in 0..cloud.len() {
        let p = cloud.point(i);
        let mut hit = None;
        for j in 0..kept.len() {
            if dist(p, kept.point(j)) < tol {
                hit = Some(j);
                break;
            }
        }
        match hit {
            Some(j) => map.push(j),
            None => {
                map.push(kept.len());
                kept.push(p);
            }
        }
    }
    (kept, map)
}

/// Summary of a distribution of ratios, reported as deciles.
#[derive(Debug, Clone, Serialize)]
pub struct RatioHistogram {
    pub deciles: Vec<f64>,
    pub count: usize,
}

impl RatioHistogram {
    pub fn from_values(mut values: Vec<f64>) -> Self {
        let count = values.len();
        if count == 0 {
            return Self {
                deciles: Vec::new(),
                count: 0,
            };
        }
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let deciles = (0..=10)
            .map(|q| values[((q * (count - 1)) / 10).min(count - 1)])
            .collect();
        Self { deciles, count }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hausdorff_identical_sets_is_zero() {
        let a = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1.0, 0.0]]);
        assert_eq!(hausdorff_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn hausdorff_concentric_circles() {
        // unit circle vs radius-1.02 circle: distance is 0.02 up to sampling
        let n = 512;
        let circle = |r: f64| {
            PointCloud::from_rows(
                &(0..n)
                    .map(|i| {
                        let th = 2.0 * std::f64::consts::PI * i as f64 / n as f64;
                        vec![r * th.cos(), r * th.sin()]
                    })
                    .collect::<Vec<_>>(),
            )
        };
        let d = hausdorff_distance(&circle(1.0), &circle(1.02)).unwrap();
        assert!((d - 0.02).abs() < 1e-3, "d = {d}");
    }

    #[test]
    fn hausdorff_point_vs_sphere() {
        let n = 200;
        let mut rows = Vec::new();
        for i in 0..n {
            let th = std::f64::consts::PI * (i as f64 + 0.5) / n as f64;
            for j in 0..n / 4 {
                let ph = 2.0 * std::f64::consts::PI * j as f64 / (n / 4) as f64;
                rows.push(vec![th.sin() * ph.cos(), th.sin() * ph.sin(), th.cos()]);
            }
        }
        let sphere = PointCloud::from_rows(&rows);
        let p = PointCloud::from_rows(&[vec![3.0, 0.0, 0.0]]);
        let d = hausdorff_distance(&p, &sphere).unwrap();
        // farthest sphere point from (3,0,0) is (-1,0,0)
        assert!((d - 4.0).abs() < 0.05, "d = {d}");
    }

    #[test]
    fn hausdorff_rejects_empty() {
        let a = PointCloud::empty(2);
        let b = PointCloud::from_rows(&[vec![0.0, 0.0]]);
        assert!(matches!(
            hausdorff_distance(&a, &b),
            Err(Error::EmptyInput)
        ));
    }

    #[test]
    fn duplicate_detection_respects_tolerance() {
        let a = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1e-13, 0.0], vec![1.0, 0.0]]);
        assert_eq!(find_duplicate(&a, 1e-12), Some((0, 1)));
        let b = PointCloud::from_rows(&[vec![0.0, 0.0], vec![1e-11, 0.0]]);
        assert_eq!(find_duplicate(&b, 1e-12), None);
    }

    #[test]
    fn knn_sorted_and_correct() {
        let c = PointCloud::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 0.0],
            vec![2.0, 0.0],
            vec![0.0, 1.5],
        ]);
        let nb = knn_neighbors(&c, 2);
        assert_eq!(nb[0].iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 3]);
        assert_eq!(nb[2].iter().map(|x| x.0).collect::<Vec<_>>(), vec![1, 0]);
    }
}
