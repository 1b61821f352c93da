//! LNE constants of complexes (exact max of inner/outer distance ratios),
//! LLNE profiles C(t) across scales, and divergence classification.

use rayon::prelude::*;
use serde::Serialize;

use crate::complex::EmbeddedComplex;
use crate::error::{Error, Result};
use crate::geometry::{self, RatioHistogram};
use crate::poly::PolynomialSystem;
use crate::sampler::{self, Mode};

/// Fitted log-log slopes at or beyond this magnitude, with residual below
/// `SLOPE_RESIDUAL_MAX`, count as genuine blow-up rather than noise.
pub const SLOPE_THRESHOLD: f64 = 0.15;
pub const SLOPE_RESIDUAL_MAX: f64 = 0.2;
/// Density-doubling agreement required to trust a profile entry.
pub const DOUBLING_AGREEMENT: f64 = 0.10;

#[derive(Debug, Clone, Serialize)]
pub struct WitnessPair {
    pub a: usize,
    pub b: usize,
    pub inner: f64,
    pub outer: f64,
    pub point_a: Vec<f64>,
    pub point_b: Vec<f64>,
}

/// The LNE constant of a complex: C = max over vertex pairs of
/// inner/outer distance, with the witness pair and a ratio histogram.
#[derive(Debug, Clone, Serialize)]
pub struct LneReport {
    pub c: f64,
    pub witness: Option<WitnessPair>,
    pub histogram: RatioHistogram,
    pub low_confidence: bool,
}

/// Exact maximum of inner/outer over all vertex pairs (all-pairs Dijkstra).
pub fn lne_constant(cx: &EmbeddedComplex) -> Result<LneReport> {
    let n = cx.vertex_count();
    if n == 0 || !cx.is_connected() {
        let (components, _) = cx.components();
        if components != 1 {
            return Err(Error::DisconnectedComplex { components });
        }
    }
    if n < 2 {
        return Ok(LneReport {
            c: 1.0,
            witness: None,
            histogram: RatioHistogram::from_values(vec![]),
            low_confidence: false,
        });
    }
    // histogram subsample stride keeps memory flat on large complexes
    let stride = ((n * (n - 1) / 2) / 20_000).max(1);
    let per_source: Vec<(f64, usize, usize, Vec<f64>)> = (0..n)
        .into_par_iter()
        .map(|s| {
            let dist = cx.inner_distances(s);
            let mut best = (0.0f64, s, s);
            let mut sampled = Vec::new();
            for t in s + 1..n {
                let outer = geometry::dist(cx.vertex(s), cx.vertex(t));
                if outer <= 0.0 {
                    continue;
                }
                let ratio = dist[t] / outer;
                if ratio > best.0 {
                    best = (ratio, s, t);
                }
                if (s * n + t) % stride == 0 {
                    sampled.push(ratio);
                }
            }
            (best.0, best.1, best.2, sampled)
        })
        .collect();
    let mut c = 0.0f64;
    let mut pair = (0usize, 0usize);
    let mut ratios = Vec::new();
    for (r, a, b, sampled) in per_source {
        if r > c || (r == c && (a, b) < pair) {
            c = r;
            pair = (a, b);
        }
        ratios.extend(sampled);
    }
    if !c.is_finite() {
        let (components, _) = cx.components();
        return Err(Error::DisconnectedComplex { components });
    }
    let c = c.max(1.0);
    let inner = cx.shortest_path(pair.0, pair.1).map(|p| p.length).unwrap_or(0.0);
    let outer = geometry::dist(cx.vertex(pair.0), cx.vertex(pair.1));
    Ok(LneReport {
        c,
        witness: Some(WitnessPair {
            a: pair.0,
            b: pair.1,
            inner,
            outer,
            point_a: cx.vertex(pair.0).to_vec(),
            point_b: cx.vertex(pair.1).to_vec(),
        }),
        histogram: RatioHistogram::from_values(ratios),
        low_confidence: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DivergenceClass {
    /// Fitted slope points at blow-up with acceptable residual.
    LlneViolating,
    /// Flat profile within the noise budget.
    BoundedEvidence,
    Inconclusive,
}

/// C(t) across scales with a fitted log-log slope.
#[derive(Debug, Clone, Serialize)]
pub struct LlneProfile {
    pub mode: Mode,
    pub entries: Vec<(f64, LneReport)>,
    pub slope: f64,
    pub intercept: f64,
    pub residual: f64,
    pub classification: DivergenceClass,
}

impl LlneProfile {
    pub fn c_values(&self) -> Vec<f64> {
        self.entries.iter().map(|(_, r)| r.c).collect()
    }
}

/// Per-scale link sample -> validated kNN complex -> LNE constant, with a
/// least-squares fit of log C against log t. `doubling_check` re-estimates
/// C at twice the sample count and flags disagreement beyond 10%.
///
/// Scales share one seed (common random numbers): for homogeneous systems
/// the rescaled links coincide, so C(t) comes out exactly constant instead
/// of scattering with per-scale sampling noise. The doubling check probes
/// that noise explicitly. At large counts it runs on the most degenerate
/// scale only (the last of the list).
pub fn llne_profile(
    system: &PolynomialSystem,
    t_list: &[f64],
    count: usize,
    seed: u64,
    mode: Mode,
    doubling_check: bool,
) -> Result<LlneProfile> {
    check_scales(t_list)?;
    let mut entries = Vec::with_capacity(t_list.len());
    for (i, &t) in t_list.iter().enumerate() {
        let mut report = scale_lne(system, t, count, seed, mode)?;
        let check_here = doubling_check && (count < 1000 || i == t_list.len() - 1);
        if check_here {
            let doubled = scale_lne(system, t, 2 * count, seed ^ 0xD0B1, mode)?;
            if (doubled.c - report.c).abs() / report.c.max(1.0) > DOUBLING_AGREEMENT {
                report.low_confidence = true;
            }
        }
        entries.push((t, report));
    }
    Ok(fit_profile(mode, entries))
}

fn scale_lne(
    system: &PolynomialSystem,
    t: f64,
    count: usize,
    seed: u64,
    mode: Mode,
) -> Result<LneReport> {
    let sample = sampler::sample_link(system, t, count, seed, mode)?;
    let cx = sampler::link_complex(system, &sample, sampler::DEFAULT_KNN)?;
    lne_constant(&cx)
}

pub fn fit_profile(mode: Mode, entries: Vec<(f64, LneReport)>) -> LlneProfile {
    let xs: Vec<f64> = entries.iter().map(|(t, _)| t.ln()).collect();
    let ys: Vec<f64> = entries.iter().map(|(_, r)| r.c.ln()).collect();
    let n = xs.len() as f64;
    let (slope, intercept, residual) = if xs.len() >= 2 {
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        let intercept = my - slope * mx;
        let res = (xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| {
                let e = y - (slope * x + intercept);
                e * e
            })
            .sum::<f64>()
            / n)
            .sqrt();
        (slope, intercept, res)
    } else {
        (0.0, ys.first().copied().unwrap_or(0.0), 0.0)
    };
    let violating = match mode {
        Mode::Germ => slope <= -SLOPE_THRESHOLD,
        Mode::Infinity => slope >= SLOPE_THRESHOLD,
    };
    let classification = if residual >= SLOPE_RESIDUAL_MAX {
        DivergenceClass::Inconclusive
    } else if violating {
        DivergenceClass::LlneViolating
    } else if slope.abs() < SLOPE_THRESHOLD {
        DivergenceClass::BoundedEvidence
    } else {
        DivergenceClass::Inconclusive
    };
    LlneProfile {
        mode,
        entries,
        slope,
        intercept,
        residual,
        classification,
    }
}

fn check_scales(t_list: &[f64]) -> Result<()> {
    if t_list.is_empty() {
        return Err(Error::InvalidConfig("empty scale list".into()));
    }
    for &t in t_list {
        if t <= 0.0 {
            return Err(Error::NonPositiveScale(t));
        }
    }
    let increasing = t_list.windows(2).all(|w| w[0] < w[1]);
    let decreasing = t_list.windows(2).all(|w| w[0] > w[1]);
    if t_list.len() > 1 && !increasing && !decreasing {
        return Err(Error::InvalidConfig(
            "scale list must be strictly monotone".into(),
        ));
    }
    Ok(())
}

/// Single-complex LNE estimate over a multi-scale sample of the germ
/// inside the ball of radius `epsilon_ball` (scales log-spaced down to
/// epsilon_ball / 1000). `count` is the total sample budget across scales.
pub fn germ_lne_estimate(
    system: &PolynomialSystem,
    epsilon_ball: f64,
    count: usize,
    seed: u64,
) -> Result<LneReport> {
    system.check_germ()?;
    let scales = 7;
    let per_scale = (count / scales).max(40);
    let (cloud, _) = sampler::germ_cloud(system, epsilon_ball, per_scale, seed, scales)?;
    let cx = sampler::germ_complex(system, &cloud, sampler::DEFAULT_KNN, epsilon_ball)?;
    let mut report = lne_constant(&cx)?;
    let (cloud2, _) =
        sampler::germ_cloud(system, epsilon_ball, 2 * per_scale, seed ^ 0xD0B1, scales)?;
    let cx2 = sampler::germ_complex(system, &cloud2, sampler::DEFAULT_KNN, epsilon_ball)?;
    let doubled = lne_constant(&cx2)?;
    if (doubled.c - report.c).abs() / report.c.max(1.0) > DOUBLING_AGREEMENT {
        report.low_confidence = true;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::EmbeddedComplex;

    #[test]
    fn segment_is_isometric() {
        let cloud = fixtures::segment_cloud(40, 2.0);
        let cx = EmbeddedComplex::from_knn(cloud, 2, None).unwrap();
        let r = lne_constant(&cx).unwrap();
        assert!((r.c - 1.0).abs() < 1e-9, "C = {}", r.c);
    }

    #[test]
    fn polygon_constant_is_half_pi() {
        let cx = fixtures::polygon_complex(256, 1.0);
        let r = lne_constant(&cx).unwrap();
        let target = std::f64::consts::FRAC_PI_2;
        assert!((r.c - target).abs() / target < 0.02, "C = {}", r.c);
        let w = r.witness.unwrap();
        // witness should be an antipodal-ish pair
        assert!((w.outer - 2.0).abs() < 0.01);
    }

    #[test]
    fn tangent_circles_witness_near_tangency() {
        let n = 64;
        let cx = fixtures::tangent_circles_complex(n);
        let r = lne_constant(&cx).unwrap();
        // the max ratio is attained by the first mirror pair: inner 2*theta
        // through the tangency vs outer 2(1 - cos theta), theta = 2 pi / n
        let theta = 2.0 * std::f64::consts::PI / n as f64;
        let expected = 2.0 * theta / (2.0 * (1.0 - theta.cos()));
        assert!(
            (r.c - expected).abs() / expected < 0.05,
            "C = {} expected ~{}",
            r.c,
            expected
        );
        let w = r.witness.unwrap();
        let mid = geometry::norm(&w.point_a).min(geometry::norm(&w.point_b));
        assert!(mid < 0.25, "witness should hug the tangency, |p| = {mid}");
    }

    #[test]
    fn disconnected_complex_rejected() {
        let cloud = fixtures::segment_cloud(10, 1.0);
        let mut rows: Vec<Vec<f64>> = cloud.iter().map(|p| p.to_vec()).collect();
        rows.push(vec![50.0, 0.0]);
        let far = crate::PointCloud::from_rows(&rows);
        let cx = EmbeddedComplex::from_knn(far, 1, None).unwrap();
        assert!(matches!(
            lne_constant(&cx),
            Err(Error::DisconnectedComplex { .. })
        ));
    }

    #[test]
    fn scale_invariance_of_c() {
        let cx1 = fixtures::polygon_complex(64, 1.0);
        let cx2 = fixtures::polygon_complex(64, 17.3);
        let r1 = lne_constant(&cx1).unwrap();
        let r2 = lne_constant(&cx2).unwrap();
        assert!((r1.c - r2.c).abs() < 1e-12);
    }

    #[test]
    fn removing_edges_never_decreases_c() {
        let cloud = fixtures::polygon_cloud(32, 1.0);
        let full = EmbeddedComplex::from_knn(cloud.clone(), 4, None).unwrap();
        let sparse = EmbeddedComplex::from_knn(cloud, 2, None).unwrap();
        let cf = lne_constant(&full).unwrap().c;
        let cs = lne_constant(&sparse).unwrap().c;
        assert!(cs + 1e-12 >= cf, "sparse {cs} vs full {cf}");
    }

    #[test]
    fn profile_fit_recovers_slope() {
        // synthetic entries with C = t^(-1/2)
        let entries: Vec<(f64, LneReport)> = [0.1f64, 0.01, 0.001]
            .iter()
            .map(|&t| {
                (
                    t,
                    LneReport {
                        c: t.powf(-0.5),
                        witness: None,
                        histogram: RatioHistogram::from_values(vec![]),
                        low_confidence: false,
                    },
                )
            })
            .collect();
        let p = fit_profile(Mode::Germ, entries);
        assert!((p.slope + 0.5).abs() < 1e-9);
        assert_eq!(p.classification, DivergenceClass::LlneViolating);
    }

    #[test]
    fn scale_list_validation() {
        assert!(check_scales(&[0.1, 0.01, 0.001]).is_ok());
        assert!(check_scales(&[1.0, 3.0, 2.0]).is_err());
        assert!(check_scales(&[1.0, -2.0]).is_err());
        assert!(check_scales(&[]).is_err());
    }
}
