//! Sampling rescaled links X_t = (1/t)X on the unit sphere by Newton
//! iteration on the augmented system {f = 0, |x| = t}, tangent-cone models
//! from initial/leading forms, and complex builders whose edges are
//! validated against the variety (chords must stay close to the set).
//!
//! All polynomial evaluation goes through a max-term-normalized form: each
//! term is priced in log magnitude and the equation is rescaled by its
//! dominant term, so systems like x^2021 + y^2021 - z^2021 remain honest at
//! any scale instead of underflowing to zero.

use nalgebra::{DMatrix, DVector};
use num::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::EmbeddedComplex;
use crate::error::{Error, Result};
use crate::geometry::{self, PointCloud};
use crate::poly::{log_abs_rational, rational_to_f64, FieldTag, PolynomialSystem, SparsePoly};
use crate::RESIDUAL_TOL;

pub use crate::geometry::hausdorff_distance;

/// Germ links rescale toward 0, infinity links rescale toward infinity.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Mode {
    Germ,
    Infinity,
}

/// Which sphere section a sample represents.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum LinkTag {
    Scale(f64),
    ConeAtZero,
    ConeAtInfinity,
}

pub const NEWTON_MAX_ITERS: usize = 50;
pub const NEWTON_RETRIES: usize = 5;
/// Chord validation: the midpoint of an edge may sit at most this fraction
/// of the edge length away from the variety.
pub const CHORD_RATIO: f64 = 0.25;

// ---------------------------------------------------------------------------
// Scaled, max-term-normalized evaluation
// ---------------------------------------------------------------------------

struct CompiledTerm {
    exps: Vec<u32>,
    /// ln|coeff| plus the rescaling weight (deg - reference) * ln t
    log_abs: f64,
    /// coeff / |coeff| (real coefficients have zero imaginary part)
    unit: Complex<f64>,
}

struct CompiledPoly {
    terms: Vec<CompiledTerm>,
}

/// A polynomial system rescaled to scale `t`: evaluating at p on the unit
/// sphere corresponds to evaluating f at t*p, normalized per polynomial by
/// t^(min deg) (germ) or t^(max deg) (infinity).
pub struct ScaledSystem {
    field: FieldTag,
    nvars: usize,
    real_dim: usize,
    polys: Vec<CompiledPoly>,
    pub t: f64,
    pub mode: Mode,
}

impl ScaledSystem {
    pub fn new(system: &PolynomialSystem, t: f64, mode: Mode) -> Result<Self> {
        if t <= 0.0 || !t.is_finite() {
            return Err(Error::NonPositiveScale(t));
        }
        let ln_t = t.ln();
        let mut polys = Vec::with_capacity(system.polys.len());
        for p in &system.polys {
            let reference = match mode {
                Mode::Germ => p.order()?,
                Mode::Infinity => p.degree()?,
            } as f64;
            let mut terms = Vec::with_capacity(p.term_count());
            for (e, c) in p.terms() {
                let deg: u32 = e.iter().sum();
                let abs = log_abs_rational(c) + (deg as f64 - reference) * ln_t;
                let cf = rational_to_f64(c);
                let unit = if cf.is_finite() && cf != 0.0 {
                    Complex::new(cf.signum(), 0.0)
                } else {
                    Complex::new(1.0, 0.0)
                };
                terms.push(CompiledTerm {
                    exps: e.clone(),
                    log_abs: abs,
                    unit,
                });
            }
            polys.push(CompiledPoly { terms });
        }
        Ok(Self {
            field: system.field,
            nvars: system.nvars(),
            real_dim: system.real_dim(),
            polys,
            t,
            mode,
        })
    }

    pub fn real_dim(&self) -> usize {
        self.real_dim
    }

    pub fn equation_count(&self) -> usize {
        match self.field {
            FieldTag::Real => self.polys.len(),
            FieldTag::Complex => 2 * self.polys.len(),
        }
    }

    /// Normalized residuals at a realified point, and optionally the
    /// Jacobian rows in the same per-equation normalization.
    pub fn eval(&self, p: &[f64], want_jacobian: bool) -> (Vec<f64>, Option<DMatrix<f64>>) {
        assert_eq!(p.len(), self.real_dim);
        let n = self.nvars;
        // complex coordinates (imaginary part zero for real systems)
        let z: Vec<Complex<f64>> = match self.field {
            FieldTag::Real => p.iter().map(|&x| Complex::new(x, 0.0)).collect(),
            FieldTag::Complex => (0..n)
                .map(|j| Complex::new(p[2 * j], p[2 * j + 1]))
                .collect(),
        };
        let logs: Vec<f64> = z
            .iter()
            .map(|w| {
                let m = w.norm();
                if m == 0.0 {
                    f64::NEG_INFINITY
                } else {
                    m.ln()
                }
            })
            .collect();
        let units: Vec<Complex<f64>> = z
            .iter()
            .zip(&logs)
            .map(|(w, &l)| {
                if l.is_finite() {
                    w / w.norm()
                } else {
                    Complex::new(1.0, 0.0)
                }
            })
            .collect();

        let eqs = self.equation_count();
        let mut residuals = vec![0.0; eqs];
        let mut jac = want_jacobian.then(|| DMatrix::zeros(eqs, self.real_dim));

        for (pi, poly) in self.polys.iter().enumerate() {
            // dominant term magnitude
            let mut m = f64::NEG_INFINITY;
            let term_logs: Vec<f64> = poly
                .terms
                .iter()
                .map(|t| {
                    let mut l = t.log_abs;
                    for (j, &e) in t.exps.iter().enumerate() {
                        if e > 0 {
                            l += e as f64 * logs[j];
                        }
                    }
                    if l > m {
                        m = l;
                    }
                    l
                })
                .collect();
            let mut value = Complex::new(0.0, 0.0);
            let mut grad = vec![Complex::new(0.0, 0.0); n];
            if m.is_finite() {
                for (t, &tl) in poly.terms.iter().zip(&term_logs) {
                    if tl.is_finite() {
                        let mut phase = t.unit;
                        for (j, &e) in t.exps.iter().enumerate() {
                            if e > 0 {
                                phase *= units[j].powi(e as i32);
                            }
                        }
                        value += phase * (tl - m).exp();
                    }
                    if want_jacobian {
                        for (k, &ek) in t.exps.iter().enumerate() {
                            if ek == 0 {
                                continue;
                            }
                            // term derivative: exponent at k reduced by one
                            let mut gl = t.log_abs;
                            let mut ok = true;
                            for (j, &e) in t.exps.iter().enumerate() {
                                let ee = if j == k { e - 1 } else { e };
                                if ee > 0 {
                                    if logs[j].is_finite() {
                                        gl += ee as f64 * logs[j];
                                    } else {
                                        ok = false;
                                        break;
                                    }
                                }
                            }
                            if !ok {
                                continue;
                            }
                            let mut phase = t.unit;
                            for (j, &e) in t.exps.iter().enumerate() {
                                let ee = if j == k { e - 1 } else { e };
                                if ee > 0 {
                                    phase *= units[j].powi(ee as i32);
                                }
                            }
                            let magnitude = (gl - m).min(700.0).exp();
                            grad[k] += phase * ek as f64 * magnitude;
                        }
                    }
                }
            }
            match self.field {
                FieldTag::Real => {
                    residuals[pi] = value.re;
                    if let Some(jac) = &mut jac {
                        for k in 0..n {
                            jac[(pi, k)] = grad[k].re;
                        }
                    }
                }
                FieldTag::Complex => {
                    residuals[2 * pi] = value.re;
                    residuals[2 * pi + 1] = value.im;
                    if let Some(jac) = &mut jac {
                        for k in 0..n {
                            // holomorphic f: d(Re f)/dx = Re f', d(Re f)/dy = -Im f'
                            jac[(2 * pi, 2 * k)] = grad[k].re;
                            jac[(2 * pi, 2 * k + 1)] = -grad[k].im;
                            jac[(2 * pi + 1, 2 * k)] = grad[k].im;
                            jac[(2 * pi + 1, 2 * k + 1)] = grad[k].re;
                        }
                    }
                }
            }
        }
        (residuals, jac)
    }

    pub fn max_residual(&self, p: &[f64]) -> f64 {
        self.eval(p, false)
            .0
            .iter()
            .fold(0.0f64, |a, &b| a.max(b.abs()))
    }
}

// ---------------------------------------------------------------------------
// Newton kernels
// ---------------------------------------------------------------------------

/// Extra affine constraints rows * p = rhs appended to the system.
pub struct AffineConstraints {
    pub rows: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

pub struct NewtonOutcome {
    pub point: Vec<f64>,
    /// final Gauss-Newton displacement: a first-order distance to the set
    pub residual: f64,
    pub iterations: usize,
    /// sigma_min / sigma_max of the final Jacobian
    pub condition: f64,
}

/// Gauss-Newton with SVD least-squares steps and step halving. The sphere
/// constraint (|p|^2 - 1)/2 = 0 is appended when `on_sphere` is set.
///
/// Convergence is declared on the step norm (the first-order distance to
/// the zero set), which stays meaningful under the per-equation max-term
/// normalization; the residual alone would be a step function for
/// single-term equations. A guard on the linearized residual rejects
/// stalls at rank-deficient points.
pub fn newton_solve(
    sys: &ScaledSystem,
    start: &[f64],
    on_sphere: bool,
    constraints: Option<&AffineConstraints>,
    max_iters: usize,
    tol: f64,
) -> Option<NewtonOutcome> {
    let dim = sys.real_dim();
    let extra = usize::from(on_sphere) + constraints.map_or(0, |c| c.rows.len());
    let rows = sys.equation_count() + extra;
    let mut p = start.to_vec();

    let assemble = |p: &[f64]| -> (DVector<f64>, DMatrix<f64>) {
        let (res, jac) = sys.eval(p, true);
        let jac = jac.unwrap();
        let mut f = DVector::zeros(rows);
        let mut j = DMatrix::zeros(rows, dim);
        for (i, &r) in res.iter().enumerate() {
            f[i] = r;
            for k in 0..dim {
                j[(i, k)] = jac[(i, k)];
            }
        }
        let mut row = res.len();
        if on_sphere {
            let norm_sq: f64 = p.iter().map(|x| x * x).sum();
            f[row] = 0.5 * (norm_sq - 1.0);
            for k in 0..dim {
                j[(row, k)] = p[k];
            }
            row += 1;
        }
        if let Some(c) = constraints {
            for (ci, crow) in c.rows.iter().enumerate() {
                let v: f64 = crow.iter().zip(p).map(|(a, b)| a * b).sum();
                f[row + ci] = v - c.rhs[ci];
                for k in 0..dim {
                    j[(row + ci, k)] = crow[k];
                }
            }
        }
        // row equilibration: per-equation normalization can make row
        // magnitudes differ by many orders, and a relative singular-value
        // cutoff would then drop the well-scaled equations
        for i in 0..rows {
            let s = (0..dim).map(|k| j[(i, k)] * j[(i, k)]).sum::<f64>().sqrt();
            if s > 0.0 {
                let inv = (1.0 / s).min(1e12);
                f[i] *= inv;
                for k in 0..dim {
                    j[(i, k)] *= inv;
                }
            }
        }
        (f, j)
    };

    let res_inf = |f: &DVector<f64>| f.iter().fold(0.0f64, |a, &b| a.max(b.abs()));

    let (mut f, mut j) = assemble(&p);
    let mut best = res_inf(&f);
    for it in 0..max_iters {
        let svd = j.clone().svd(true, true);
        let smax = svd.singular_values.max();
        if smax == 0.0 {
            return if best == 0.0 {
                Some(NewtonOutcome {
                    point: p,
                    residual: 0.0,
                    iterations: it,
                    condition: 0.0,
                })
            } else {
                None
            };
        }
        let step = svd.solve(&(-&f), smax * 1e-13).ok()?;
        let step_norm = step.norm();
        // linearized residual: the least-squares system must be solvable,
        // otherwise a small step only means a stall
        let lin_res = res_inf(&(&j * &step + &f));
        if step_norm <= tol && lin_res <= 1e-6 {
            let point: Vec<f64> = p.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
            let smin = svd
                .singular_values
                .iter()
                .fold(f64::INFINITY, |a, &b| a.min(b));
            return Some(NewtonOutcome {
                point,
                residual: step_norm,
                iterations: it,
                condition: smin / smax,
            });
        }
        // step halving keeps the iteration from overshooting
        let mut accepted = false;
        let mut scale = 1.0;
        for _ in 0..7 {
            let cand: Vec<f64> = p
                .iter()
                .zip(step.iter())
                .map(|(x, d)| x + scale * d)
                .collect();
            let (fc, jc) = assemble(&cand);
            let rc = res_inf(&fc);
            if rc < best || scale * step_norm <= tol {
                p = cand;
                f = fc;
                j = jc;
                best = rc;
                accepted = true;
                break;
            }
            scale *= 0.5;
        }
        if !accepted {
            return None;
        }
    }
    None
}

/// Deterministic per-stream RNG (seed, stream) -> generator.
pub fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    // splitmix64 over the pair keeps streams independent of scheduling
    let mut x = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    x ^= x >> 30;
    x = x.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^= x >> 31;
    ChaCha8Rng::seed_from_u64(x)
}

pub fn random_unit_vector(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    loop {
        // Box-Muller pairs; rejection keeps the norm healthy
        let v: Vec<f64> = (0..dim)
            .map(|_| {
                let u1: f64 = rng.gen_range(1e-12..1.0);
                let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                (-2.0 * u1.ln()).sqrt() * u2.cos()
            })
            .collect();
        let n = geometry::norm(&v);
        if n > 1e-6 {
            return v.iter().map(|x| x / n).collect();
        }
    }
}

// ---------------------------------------------------------------------------
// Link samples
// ---------------------------------------------------------------------------

/// Points of the rescaled link X_t on the unit sphere.
#[derive(Debug, Clone, Serialize)]
pub struct LinkSample {
    pub tag: LinkTag,
    pub t: f64,
    pub mode: Mode,
    pub points: PointCloud,
    pub residual_bound: f64,
    pub seed: u64,
    pub requested: usize,
    pub converged: usize,
}

/// Sample `count` link points at scale `t`. Deterministic per seed: each
/// target point draws its Newton starts from a stream derived from
/// (seed, index, attempt), so results do not depend on scheduling.
pub fn sample_link(
    system: &PolynomialSystem,
    t: f64,
    count: usize,
    seed: u64,
    mode: Mode,
) -> Result<LinkSample> {
    let sys = ScaledSystem::new(system, t, mode)?;
    let dim = sys.real_dim();
    let solutions: Vec<Option<(Vec<f64>, f64)>> = (0..count)
        .into_par_iter()
        .map(|i| {
            for attempt in 0..NEWTON_RETRIES {
                let mut rng = rng_for(seed, (i * NEWTON_RETRIES + attempt) as u64);
                let start = random_unit_vector(&mut rng, dim);
                if let Some(out) =
                    newton_solve(&sys, &start, true, None, NEWTON_MAX_ITERS, RESIDUAL_TOL)
                {
                    return Some((out.point, out.residual));
                }
            }
            None
        })
        .collect();
    let converged = solutions.iter().flatten().count();
    if converged * 2 < count {
        return Err(Error::InsufficientConvergence {
            converged,
            requested: count,
        });
    }
    let mut cloud = PointCloud::empty(dim);
    let mut residual_bound = 0.0f64;
    for s in solutions.into_iter().flatten() {
        cloud.push(&s.0);
        residual_bound = residual_bound.max(s.1);
    }
    let (points, _) = geometry::dedup_points(&cloud, 1e-8);
    Ok(LinkSample {
        tag: LinkTag::Scale(t),
        t,
        mode,
        points,
        residual_bound,
        seed,
        requested: count,
        converged,
    })
}

// ---------------------------------------------------------------------------
// Tangent cones
// ---------------------------------------------------------------------------

/// Cone system of initial (germ) or leading (infinity) forms with a sampled
/// cone link. `heuristic` is set when the system has several generators, in
/// which case the per-generator forms may cut out a strict superset.
#[derive(Debug, Clone)]
pub struct TangentConeModel {
    pub cone_system: PolynomialSystem,
    pub heuristic: bool,
    pub cone_link: LinkSample,
}

pub fn tangent_cone(
    system: &PolynomialSystem,
    mode: Mode,
    count: usize,
    seed: u64,
) -> Result<TangentConeModel> {
    if mode == Mode::Germ {
        system.check_germ()?;
    }
    let forms: Vec<SparsePoly> = system
        .polys
        .iter()
        .map(|p| match mode {
            Mode::Germ => p.initial_form(),
            Mode::Infinity => p.leading_form(),
        })
        .collect::<Result<Vec<_>>>()?;
    let cone_system = PolynomialSystem::new(system.field, system.vars.clone(), forms)?;
    // homogeneous systems are scale invariant; sample at t = 1
    let mut cone_link = sample_link(&cone_system, 1.0, count, seed, Mode::Germ)?;
    cone_link.tag = match mode {
        Mode::Germ => LinkTag::ConeAtZero,
        Mode::Infinity => LinkTag::ConeAtInfinity,
    };
    Ok(TangentConeModel {
        cone_system,
        heuristic: system.polys.len() > 1,
        cone_link,
    })
}

// ---------------------------------------------------------------------------
// Link and germ complexes with chord validation
// ---------------------------------------------------------------------------

pub const DEFAULT_KNN: usize = 12;

/// kNN complex over a link sample whose edges are validated: the midpoint
/// of each candidate edge must project onto the link within a fraction of
/// the edge length. This keeps graph geodesics inside the sampled set and
/// rejects shortcuts bridging nearby sheets.
pub fn link_complex(
    system: &PolynomialSystem,
    sample: &LinkSample,
    k: usize,
) -> Result<EmbeddedComplex> {
    let sys = ScaledSystem::new(system, sample.t, sample.mode)?;
    let validator = move |a: &[f64], b: &[f64]| -> bool {
        let len = geometry::dist(a, b);
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        match newton_solve(&sys, &mid, true, None, 12, RESIDUAL_TOL * 10.0) {
            Some(out) => {
                let moved = geometry::dist(&out.point, &mid);
                moved <= (CHORD_RATIO * len).max(1e-7)
            }
            None => false,
        }
    };
    EmbeddedComplex::from_knn(sample.points.clone(), k, Some(&validator))
}

/// Flag-completed validated complex: every chord-valid pair within a
/// global radius (a multiple of the sampling gap, restricted to a nearest
/// -neighbour pool) becomes an edge. Flag completion kills spurious holes
/// at sampling resolution; the chord validator self-limits edge length on
/// curved sheets and keeps degenerating tubes hollow. Used by the choking
/// probe.
pub fn adaptive_link_complex(
    system: &PolynomialSystem,
    sample: &LinkSample,
    radius_factor: f64,
    chord_ratio: f64,
) -> Result<EmbeddedComplex> {
    let points = &sample.points;
    let n = points.len();
    let pool = 48.min(n.saturating_sub(1));
    let neighbors = geometry::knn_neighbors(points, pool);
    let radius = radius_factor * points.sampling_gap();
    let sys = ScaledSystem::new(system, sample.t, sample.mode)?;
    let validator = |a: &[f64], b: &[f64]| -> bool {
        let len = geometry::dist(a, b);
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        match newton_solve(&sys, &mid, true, None, 12, RESIDUAL_TOL * 10.0) {
            Some(out) => geometry::dist(&out.point, &mid) <= (chord_ratio * len).max(1e-7),
            None => false,
        }
    };
    let mut pairs: Vec<(usize, usize)> = (0..n)
        .into_par_iter()
        .flat_map_iter(|i| {
            let mut kept = Vec::new();
            for &(j, d) in &neighbors[i] {
                if d <= radius && validator(points.point(i), points.point(j)) {
                    kept.push(if i < j { (i, j) } else { (j, i) });
                }
            }
            kept
        })
        .collect();
    pairs.sort_unstable();
    pairs.dedup();
    let triangles = crate::complex::triangles_from_edges(n, &pairs);
    EmbeddedComplex::new(points.clone(), pairs, triangles)
}

/// Multi-scale germ cloud: link samples at log-spaced scales inside the
/// ball, mapped back to absolute coordinates.
pub fn germ_cloud(
    system: &PolynomialSystem,
    epsilon_ball: f64,
    count_per_scale: usize,
    seed: u64,
    scale_count: usize,
) -> Result<(PointCloud, Vec<f64>)> {
    let scales: Vec<f64> = (0..scale_count)
        .map(|k| epsilon_ball * 10f64.powf(-3.0 * k as f64 / (scale_count - 1) as f64))
        .collect();
    let mut cloud = PointCloud::empty(system.real_dim());
    for (si, &t) in scales.iter().enumerate() {
        let sample = sample_link(system, t, count_per_scale, seed ^ (si as u64) << 32, Mode::Germ)?;
        for p in sample.points.iter() {
            let abs: Vec<f64> = p.iter().map(|x| x * t).collect();
            cloud.push(&abs);
        }
    }
    let (cloud, _) = geometry::dedup_points(&cloud, epsilon_ball * 1e-12);
    Ok((cloud, scales))
}

/// kNN complex over a germ cloud; chords are validated against the variety
/// at the local scale of each edge.
pub fn germ_complex(
    system: &PolynomialSystem,
    cloud: &PointCloud,
    k: usize,
    epsilon_ball: f64,
) -> Result<EmbeddedComplex> {
    let validator = move |a: &[f64], b: &[f64]| -> bool {
        let len = geometry::dist(a, b);
        let mid: Vec<f64> = a.iter().zip(b).map(|(x, y)| 0.5 * (x + y)).collect();
        let t_local = geometry::norm(&mid);
        if t_local < epsilon_ball * 1e-6 {
            return true;
        }
        let rescaled: Vec<f64> = mid.iter().map(|x| x / t_local).collect();
        let Ok(sys) = ScaledSystem::new(system, t_local, Mode::Germ) else {
            return false;
        };
        match newton_solve(&sys, &rescaled, false, None, 12, RESIDUAL_TOL * 10.0) {
            Some(out) => {
                let moved = geometry::dist(&out.point, &rescaled) * t_local;
                moved <= (CHORD_RATIO * len).max(1e-9 * epsilon_ball)
            }
            None => false,
        }
    };
    EmbeddedComplex::from_knn(cloud.clone(), k, Some(&validator))
}
