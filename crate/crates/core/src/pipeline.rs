//! The evidence-gathering verdict engine: link and cone-link homology,
//! choking-cycle probes, multiplicity as symbolic order and as numeric
//! covering degree over a linear tangent cone, and the aggregated
//! per-germ smoothness verdict.

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::EmbeddedComplex;
use crate::error::{Error, Result};
use crate::geometry::{self, PointCloud};
use crate::homology::{
    self, rips_complex, BettiVector, ChainComplex, CycleClass, Ring, Z2Homology, SIMPLEX_CAP,
};
use crate::lne::{self, DivergenceClass, LlneProfile};
use crate::poly::{power_of_linear_form, FieldTag, PolynomialSystem, SparsePoly};
use crate::sampler::{self, newton_solve, AffineConstraints, LinkSample, Mode, ScaledSystem};
use crate::transfer::{self, TransferCertificate};
use crate::RESIDUAL_TOL;

/// Shared knobs for the pipeline operations.
#[derive(Debug, Clone, Serialize)]
pub struct PipelineConfig {
    pub count: usize,
    pub seed: u64,
    /// Rips dimension cap (homology honest up to max_dim - 1).
    pub max_dim: usize,
    /// Complex dimension k; defaults to ambient vars - 1 (hypersurface).
    pub dim_k: Option<usize>,
    /// Rips radius = rips_factor * sampling gap.
    pub rips_factor: f64,
    pub trials: usize,
    pub scales: Vec<f64>,
    pub epsilon_ball: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            count: 400,
            seed: 1,
            max_dim: 2,
            dim_k: None,
            rips_factor: 2.2,
            trials: transfer::DEFAULT_TRIALS,
            scales: vec![1e-1, 1e-2, 1e-3],
            epsilon_ball: 0.1,
        }
    }
}

/// Curve links get by with few hundred samples; higher-dimensional links
/// need more for Rips stability.
pub fn default_count(system: &PolynomialSystem) -> usize {
    if system.real_dim() <= 4 {
        400
    } else {
        2000
    }
}

// ---------------------------------------------------------------------------
// Link homology
// ---------------------------------------------------------------------------

/// Rips Betti numbers of a sampled link. Reported dimensions stop at
/// max_dim - 1: computing b_d honestly needs (d+1)-simplices.
pub fn link_homology(
    system: &PolynomialSystem,
    t: f64,
    count: usize,
    seed: u64,
    mode: Mode,
    max_dim: usize,
    rips_factor: f64,
    ring: Ring,
) -> Result<(BettiVector, LinkSample)> {
    let sample = sampler::sample_link(system, t, count, seed, mode)?;
    let betti = sample_homology(&sample.points, max_dim, rips_factor, ring)?;
    Ok((betti, sample))
}

/// Rips homology of a point sample at an automatically chosen radius,
/// truncated to the honest dimension range.
pub fn sample_homology(
    points: &PointCloud,
    max_dim: usize,
    rips_factor: f64,
    ring: Ring,
) -> Result<BettiVector> {
    let gap = points.sampling_gap();
    let mut factor = rips_factor;
    for _ in 0..4 {
        match rips_complex(points, factor * gap, max_dim, SIMPLEX_CAP) {
            Ok((chain, _)) => {
                let mut betti = chain.betti(ring)?;
                betti.betti.truncate(max_dim.max(1));
                betti.torsion.truncate(max_dim.max(1));
                return Ok(betti);
            }
            Err(Error::SizeBudgetExceeded { .. }) => factor *= 0.85,
            Err(e) => return Err(e),
        }
    }
    Err(Error::SizeBudgetExceeded {
        count: SIMPLEX_CAP + 1,
        cap: SIMPLEX_CAP,
    })
}

// ---------------------------------------------------------------------------
// Choking probe
// ---------------------------------------------------------------------------

/// Per-scale record of the smallest locally essential cycle.
#[derive(Debug, Clone, Serialize)]
pub struct ChokeRecord {
    pub t: f64,
    /// None when no locally essential cycle was found at this scale.
    pub support_diameter: Option<f64>,
    /// None when the candidate does not bound globally (infinite filling).
    pub filling_diameter: Option<f64>,
    pub cycle_edges: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ChokeVerdict {
    NoChokingEvidence,
    ChokingSuspected,
}

/// Evidence for a family of cycles whose supports shrink while their
/// fillings cannot.
#[derive(Debug, Clone, Serialize)]
pub struct ChokeProbe {
    pub dim: usize,
    pub mode: Mode,
    pub records: Vec<ChokeRecord>,
    pub verdict: ChokeVerdict,
}

/// Filling floor and support shrink demanded before suspecting choking.
pub const CHOKE_FILL_FLOOR: f64 = 0.1;
/// Chord ratio for probe complexes: strict enough that no triangle of
/// valid chords can span a small circle (that needs ~120-degree chords,
/// whose sag/length ratio is 0.29).
pub const PROBE_CHORD_RATIO: f64 = 0.12;
pub const CHOKE_SHRINK: f64 = 4.0;
pub const CHOKE_MIN_SCALES: usize = 3;

/// Probe for choking cycles: per scale, sample the link (biased toward the
/// cone's singular directions where degeneration happens), find the
/// smallest cycle that is essential in a ball around it but has small
/// support, and measure its filling diameter in the full complex.
pub fn choking_probe(
    system: &PolynomialSystem,
    t_list: &[f64],
    dim: usize,
    count: usize,
    seed: u64,
    mode: Mode,
) -> Result<ChokeProbe> {
    if dim != 1 && dim != 2 {
        return Err(Error::InvalidConfig(format!(
            "choking probe supports dimensions 1 and 2, got {dim}"
        )));
    }
    let mut records = Vec::with_capacity(t_list.len());
    for (i, &t) in t_list.iter().enumerate() {
        let scale_seed = seed.wrapping_add(0xC0DE * i as u64);
        let sample = sample_link_enriched(system, t, count, scale_seed, mode)?;
        let cx = sampler::adaptive_link_complex(system, &sample, 1.5, PROBE_CHORD_RATIO)?;
        let record = probe_scale(&cx, dim, t)?;
        records.push(record);
    }
    let with_candidates: Vec<&ChokeRecord> = records
        .iter()
        .filter(|r| r.support_diameter.is_some())
        .collect();
    let verdict = if with_candidates.len() >= CHOKE_MIN_SCALES {
        let supports: Vec<f64> = with_candidates
            .iter()
            .map(|r| r.support_diameter.unwrap())
            .collect();
        let shrink = supports.first().unwrap() / supports.last().unwrap();
        let fillings_hold = with_candidates
            .iter()
            .all(|r| r.filling_diameter.map_or(true, |f| f >= CHOKE_FILL_FLOOR));
        if shrink >= CHOKE_SHRINK && fillings_hold {
            ChokeVerdict::ChokingSuspected
        } else {
            ChokeVerdict::NoChokingEvidence
        }
    } else {
        ChokeVerdict::NoChokingEvidence
    };
    Ok(ChokeProbe {
        dim,
        mode,
        records,
        verdict,
    })
}

/// Link sample with half the targets seeded near the cone's singular
/// directions (where the initial forms and all their derivatives vanish).
/// Falls back to uniform sampling when the cone is smooth.
fn sample_link_enriched(
    system: &PolynomialSystem,
    t: f64,
    count: usize,
    seed: u64,
    mode: Mode,
) -> Result<LinkSample> {
    let uniform = sampler::sample_link(system, t, count, seed, mode)?;
    let Some(singular) = singular_direction_sample(system, mode, count / 4, seed ^ 0x51) else {
        return Ok(uniform);
    };
    let sys = ScaledSystem::new(system, t, mode)?;
    // perturbation matched to the width of the degenerating tube so the
    // targeted starts land inside its Newton basin
    let sigma = match mode {
        Mode::Germ => (2.0 * t).sqrt(),
        Mode::Infinity => (4.0 / t).sqrt(),
    }
    .clamp(0.02, 0.3);
    let targeted: Vec<Option<Vec<f64>>> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = sampler::rng_for(seed ^ 0xBEEF, i as u64);
            let base = singular.point(i % singular.len());
            for _ in 0..sampler::NEWTON_RETRIES {
                let mut start: Vec<f64> = base
                    .iter()
                    .map(|x| x + sigma * rng.gen_range(-1.0..1.0))
                    .collect();
                let n = geometry::norm(&start);
                if n > 1e-9 {
                    start.iter_mut().for_each(|x| *x /= n);
                }
                if let Some(out) = newton_solve(
                    &sys,
                    &start,
                    true,
                    None,
                    sampler::NEWTON_MAX_ITERS,
                    RESIDUAL_TOL,
                ) {
                    return Some(out.point);
                }
            }
            None
        })
        .collect();
    let mut cloud = uniform.points.clone();
    for p in targeted.into_iter().flatten() {
        cloud.push(&p);
    }
    let (points, _) = geometry::dedup_points(&cloud, 1e-8);
    Ok(LinkSample {
        points,
        ..uniform
    })
}

/// Directions where the cone system and all its first derivatives vanish.
fn singular_direction_sample(
    system: &PolynomialSystem,
    mode: Mode,
    count: usize,
    seed: u64,
) -> Option<PointCloud> {
    let forms: Vec<SparsePoly> = system
        .polys
        .iter()
        .map(|p| match mode {
            Mode::Germ => p.initial_form(),
            Mode::Infinity => p.leading_form(),
        })
        .collect::<Result<Vec<_>>>()
        .ok()?;
    let mut polys = forms.clone();
    for f in &forms {
        for j in 0..system.nvars() {
            let d = f.derivative(j);
            if !d.is_zero() {
                polys.push(d);
            }
        }
    }
    let singular_system = PolynomialSystem::new(system.field, system.vars.clone(), polys).ok()?;
    sampler::sample_link(&singular_system, 1.0, count.max(8), seed, Mode::Germ)
        .ok()
        .map(|s| s.points)
}

/// Smallest-support cycle essential in a double ball around it, plus its
/// filling diameter in the full complex.
fn probe_scale(cx: &EmbeddedComplex, dim: usize, t: f64) -> Result<ChokeRecord> {
    let chain = full_chain(cx, dim)?;
    let n = cx.vertex_count();
    // local density per vertex from the point cloud (8th nearest), not from
    // incident edges: long connectivity edges would inflate it
    let local_gap: Vec<f64> = geometry::knn_neighbors(cx.vertices(), 8)
        .iter()
        .map(|nb| nb.last().map_or(0.0, |&(_, d)| d))
        .collect();
    // probe the densest vertices first: degeneration shows up where the
    // targeted sampling concentrated points
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| local_gap[a].partial_cmp(&local_gap[b]).unwrap().then(a.cmp(&b)));
    let centers: Vec<usize> = order.iter().copied().take((n / 8).clamp(24, 160)).collect();

    let candidates: Vec<(f64, Vec<usize>)> = centers
        .par_iter()
        .filter_map(|&v| probe_center(cx, &chain, dim, v, local_gap[v]))
        .collect();
    let best = candidates
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    match best {
        None => Ok(ChokeRecord {
            t,
            support_diameter: None,
            filling_diameter: None,
            cycle_edges: 0,
        }),
        Some((support, chain_ids)) => {
            let cycle = CycleClass::new(&chain, dim, chain_ids)?;
            let filling = match homology::filling_diameter(&cycle, &chain) {
                Ok(f) => Some(f),
                Err(Error::NeverFills) => None,
                Err(e) => return Err(e),
            };
            Ok(ChokeRecord {
                t,
                support_diameter: Some(support),
                filling_diameter: filling,
                cycle_edges: cycle.chain.len(),
            })
        }
    }
}

fn full_chain(cx: &EmbeddedComplex, dim: usize) -> Result<ChainComplex> {
    let mut chain = ChainComplex::from_embedded(cx);
    if dim == 2 {
        // dim-2 probes need tetrahedra for fillings
        let pairs: Vec<(usize, usize)> = cx.edges().iter().map(|e| (e.a, e.b)).collect();
        let tets =
            crate::complex::tetrahedra_from_edges(cx.vertex_count(), &pairs, cx.triangles());
        chain = ChainComplex::new(
            cx.vertex_count(),
            cx.edges().iter().map(|e| [e.a, e.b]).collect(),
            cx.triangles().to_vec(),
            tets,
            Some(cx.vertices().clone()),
        );
    }
    Ok(chain)
}

/// Scan growing balls around `center` for a small cycle that stays
/// essential in the doubled ball (boundary artifacts of the smaller ball
/// die there; genuinely choked cycles do not).
fn probe_center(
    cx: &EmbeddedComplex,
    chain: &ChainComplex,
    dim: usize,
    center: usize,
    gap: f64,
) -> Option<(f64, Vec<usize>)> {
    let n = cx.vertex_count();
    let dist: Vec<f64> = (0..n)
        .map(|v| geometry::dist(cx.vertex(center), cx.vertex(v)))
        .collect();
    for mult in [3.0, 5.0, 8.0] {
        let r = mult * gap;
        let keep: Vec<bool> = dist.iter().map(|&d| d <= r).collect();
        let kept = keep.iter().filter(|&&k| k).count();
        if kept < 4 || kept > 1500 {
            continue;
        }
        let (ball, old_of_new) = cx.induced(&keep).ok()?;
        if !ball_has_essential(&ball, dim) {
            continue;
        }
        let candidate = match dim {
            1 => local_essential_1cycle(&ball, &old_of_new, chain),
            2 => local_essential_2cycle(&ball, &old_of_new, chain),
            _ => None,
        };
        let Some((support, ids)) = candidate else {
            continue;
        };
        if support > 1.3 * r {
            continue;
        }
        // must stay essential in the doubled ball
        let keep2: Vec<bool> = dist.iter().map(|&d| d <= 2.0 * r).collect();
        let (sub2, emap2, tmap2) = chain.induced_subcomplex(&keep2);
        let mapped: Option<Vec<usize>> = ids
            .iter()
            .map(|id| match dim {
                1 => emap2.get(id).copied(),
                _ => tmap2.get(id).copied(),
            })
            .collect();
        let Some(mapped) = mapped else { continue };
        let Ok(cycle2) = CycleClass::new(&sub2, dim, mapped) else {
            continue;
        };
        match homology::is_null_homologous(&cycle2, &sub2) {
            Ok((false, _)) => return Some((support, ids)),
            _ => continue,
        }
    }
    None
}

fn ball_has_essential(ball: &EmbeddedComplex, dim: usize) -> bool {
    let chain = ChainComplex::from_embedded(ball);
    let z2 = Z2Homology::build(&chain);
    match dim {
        1 => z2.b1 > 0,
        _ => chain.triangles().len() > z2.rank_d2, // some 2-cycle exists
    }
}

fn local_essential_1cycle(
    ball: &EmbeddedComplex,
    old_of_new: &[usize],
    chain: &ChainComplex,
) -> Option<(f64, Vec<usize>)> {
    // restrict to the ball's largest component for the systole scan
    let (count, labels) = ball.components();
    let scan = if count > 1 {
        let mut sizes = vec![0usize; count];
        for &l in &labels {
            sizes[l] += 1;
        }
        let biggest = sizes
            .iter()
            .enumerate()
            .max_by_key(|&(_, s)| *s)
            .map(|(i, _)| i)
            .unwrap();
        let keep: Vec<bool> = labels.iter().map(|&l| l == biggest).collect();
        let (sub, map) = ball.induced(&keep).ok()?;
        let outer: Vec<usize> = map.iter().map(|&m| old_of_new[m]).collect();
        (sub, outer)
    } else {
        (ball.clone(), old_of_new.to_vec())
    };
    let est = transfer::epsilon0_estimate(&scan.0).ok()?;
    let witness = est.witness?;
    let support = est.witness_cycle?;
    // map edges back to global chain ids
    let ids: Vec<usize> = witness
        .z2_edge_support()
        .iter()
        .map(|&(a, b)| chain.edge_id(scan.1[a], scan.1[b]))
        .collect::<Option<Vec<_>>>()?;
    let diam = support.support_diameter.unwrap_or(0.0);
    Some((diam, ids))
}

fn local_essential_2cycle(
    ball: &EmbeddedComplex,
    old_of_new: &[usize],
    chain: &ChainComplex,
) -> Option<(f64, Vec<usize>)> {
    let ball_chain = ChainComplex::from_embedded(ball);
    let cols = homology::boundary_columns(&ball_chain, 1);
    let kernel = homology::Gf2Echelon::kernel_basis(cols);
    // smallest-diameter 2-cycle among the kernel generators
    let mut best: Option<(f64, Vec<usize>)> = None;
    for combo in kernel {
        let Ok(cycle) = CycleClass::new(&ball_chain, 2, combo) else {
            continue;
        };
        let d = cycle.support_diameter.unwrap_or(f64::INFINITY);
        let ids: Option<Vec<usize>> = cycle
            .chain
            .iter()
            .map(|&tid| {
                let t = ball_chain.triangles()[tid];
                chain.triangle_id([old_of_new[t[0]], old_of_new[t[1]], old_of_new[t[2]]])
            })
            .collect();
        if let Some(ids) = ids {
            if best.as_ref().map_or(true, |(bd, _)| d < *bd) {
                best = Some((d, ids));
            }
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Multiplicity: covering degree over a linear tangent cone
// ---------------------------------------------------------------------------

/// Multiplicity evidence: symbolic order of vanishing (hypersurfaces) and
/// the numeric degree of the projection onto the tangent-cone plane.
#[derive(Debug, Clone, Serialize)]
pub struct MultiplicityReport {
    pub symbolic_order: Option<u32>,
    pub covering_degree: usize,
    pub agreement: Option<bool>,
    /// last projection direction used (realified coordinates)
    pub direction: Vec<f64>,
    /// worst conditioning among accepted fiber solves
    pub min_condition: f64,
    pub scales: (f64, f64),
    pub c_bound: f64,
    pub directions_tested: usize,
}

pub const FIBER_STARTS: usize = 48;
pub const DIRECTION_DRAWS: usize = 5;
const CONDITION_FLOOR: f64 = 1e-8;
/// distinct fiber points must separate well beyond solver tolerance
const FIBER_SEPARATION: f64 = 1e-6;

/// Count the fiber of the orthogonal projection onto the (linear) reduced
/// tangent cone over the point t*v0, for several random in-plane
/// directions v0 and two scales. All runs must agree on the count.
pub fn covering_degree(
    system: &PolynomialSystem,
    cone: &sampler::TangentConeModel,
    t: f64,
    seed: u64,
) -> Result<MultiplicityReport> {
    let plane = cone_plane_basis(&cone.cone_system)?;
    let n = system.real_dim();
    let p = plane.ncols();
    if p == 0 || p >= n {
        return Err(Error::ConeNotLinear);
    }
    let symbolic_order = system.symbolic_multiplicity().ok();

    let mut c_bound = 4.0;
    for round in 0..2 {
        let mut counts = Vec::new();
        let mut min_condition = f64::INFINITY;
        let mut direction = Vec::new();
        let mut draws = 0usize;
        let mut accepted = 0usize;
        while accepted < DIRECTION_DRAWS && draws < 3 * DIRECTION_DRAWS {
            let mut rng = sampler::rng_for(seed ^ (round as u64) << 40, draws as u64);
            draws += 1;
            // random unit direction inside the cone plane
            let g: Vec<f64> = (0..p).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut v0 = vec![0.0; n];
            for (j, v) in v0.iter_mut().enumerate() {
                for (i, &gi) in g.iter().enumerate() {
                    *v += plane[(j, i)] * gi;
                }
            }
            let norm = geometry::norm(&v0);
            if norm < 1e-9 {
                continue;
            }
            v0.iter_mut().for_each(|x| *x /= norm);
            let mut ok = true;
            let mut local_counts = Vec::new();
            for scale in [t, t / 2.0] {
                match fiber_count(system, &plane, &v0, scale, c_bound, seed, &mut rng) {
                    Some((count, cond)) => {
                        min_condition = min_condition.min(cond);
                        local_counts.push(count);
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if !ok {
                continue;
            }
            accepted += 1;
            direction = v0;
            counts.extend(local_counts);
        }
        if accepted == DIRECTION_DRAWS
            && !counts.is_empty()
            && counts.iter().all(|&c| c == counts[0] && c >= 1)
        {
            let d = counts[0];
            return Ok(MultiplicityReport {
                symbolic_order,
                covering_degree: d,
                agreement: symbolic_order.map(|o| o as usize == d),
                direction,
                min_condition,
                scales: (t, t / 2.0),
                c_bound,
                directions_tested: accepted,
            });
        }
        c_bound *= 2.0;
    }
    Err(Error::FiberUnstable {
        attempts: 2 * 3 * DIRECTION_DRAWS,
    })
}

/// Fiber cardinality over t*v0, or None when any accepted solve is
/// ill-conditioned (signals proximity to the ramification locus).
fn fiber_count(
    system: &PolynomialSystem,
    plane: &DMatrix<f64>,
    v0: &[f64],
    t: f64,
    c_bound: f64,
    seed: u64,
    rng: &mut rand_chacha::ChaCha8Rng,
) -> Option<(usize, f64)> {
    let sys = ScaledSystem::new(system, t, Mode::Germ).ok()?;
    let n = sys.real_dim();
    let p = plane.ncols();
    // constraints: plane coordinates of w equal those of v0
    let mut rows = Vec::with_capacity(p);
    let mut rhs = Vec::with_capacity(p);
    for i in 0..p {
        let row: Vec<f64> = (0..n).map(|j| plane[(j, i)]).collect();
        rhs.push(row.iter().zip(v0).map(|(a, b)| a * b).sum());
        rows.push(row);
    }
    let constraints = AffineConstraints { rows, rhs };
    let _ = seed;
    let mut found: Vec<Vec<f64>> = Vec::new();
    let mut min_condition = f64::INFINITY;
    let mut ill = 0usize;
    for _ in 0..FIBER_STARTS {
        let start: Vec<f64> = (0..n)
            .map(|j| v0[j] + 0.5 * c_bound * rng.gen_range(-1.0..1.0))
            .collect();
        let Some(out) = newton_solve(
            &sys,
            &start,
            false,
            Some(&constraints),
            sampler::NEWTON_MAX_ITERS,
            RESIDUAL_TOL,
        ) else {
            continue;
        };
        if geometry::norm(&out.point) > c_bound {
            continue;
        }
        if out.condition < CONDITION_FLOOR {
            ill += 1;
            continue;
        }
        min_condition = min_condition.min(out.condition);
        if found
            .iter()
            .all(|q| geometry::dist(q, &out.point) > FIBER_SEPARATION)
        {
            found.push(out.point);
        }
    }
    if found.is_empty() || ill * 4 > FIBER_STARTS {
        return None;
    }
    Some((found.len(), min_condition))
}

/// Orthonormal basis (columns) of the realified plane cut out by the cone's
/// linear forms. Errors with ConeNotLinear when any cone polynomial is not
/// a pure power of a linear form.
pub fn cone_plane_basis(cone_system: &PolynomialSystem) -> Result<DMatrix<f64>> {
    let n = cone_system.real_dim();
    let mut constraint_rows: Vec<Vec<f64>> = Vec::new();
    for poly in &cone_system.polys {
        if poly.is_zero() {
            continue;
        }
        let linear =
            power_of_linear_form(poly, cone_system.field).ok_or(Error::ConeNotLinear)?;
        match cone_system.field {
            FieldTag::Real => {
                constraint_rows.push(linear.iter().map(|c| c.re).collect());
            }
            FieldTag::Complex => {
                // l . z = 0 splits into real and imaginary rows over
                // interleaved coordinates
                let mut re_row = vec![0.0; n];
                let mut im_row = vec![0.0; n];
                for (j, c) in linear.iter().enumerate() {
                    re_row[2 * j] = c.re;
                    re_row[2 * j + 1] = -c.im;
                    im_row[2 * j] = c.im;
                    im_row[2 * j + 1] = c.re;
                }
                constraint_rows.push(re_row);
                constraint_rows.push(im_row);
            }
        }
    }
    if constraint_rows.is_empty() {
        return Err(Error::ConeNotLinear);
    }
    let m = DMatrix::from_fn(constraint_rows.len(), n, |r, c| constraint_rows[r][c]);
    // null space of M from the small eigenvalues of M^T M
    let gram = m.transpose() * &m;
    let eig = gram.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &b| a.max(b));
    let mut null_cols: Vec<usize> = (0..n)
        .filter(|&i| eig.eigenvalues[i] <= lmax * 1e-18 + 1e-30)
        .collect();
    null_cols.sort_by(|&a, &b| {
        eig.eigenvalues[a]
            .partial_cmp(&eig.eigenvalues[b])
            .unwrap()
            .then(a.cmp(&b))
    });
    let mut basis = DMatrix::zeros(n, null_cols.len());
    for (i, &c) in null_cols.iter().enumerate() {
        for j in 0..n {
            basis[(j, i)] = eig.eigenvectors[(j, c)];
        }
    }
    Ok(basis)
}

// ---------------------------------------------------------------------------
// Smoothness verdict
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    SmoothEvidence,
    NonSmoothEvidence,
    Inconclusive,
}

/// Aggregated per-germ evidence. Every real-field report carries the
/// real-case caveat and never asserts smoothness.
#[derive(Debug, Clone, Serialize)]
pub struct SmoothnessReport {
    pub field: FieldTag,
    pub dim_k: usize,
    pub verdict: Verdict,
    pub real_case_caveat: bool,
    pub caveat: &'static str,
    pub lne_profile: Option<LlneProfile>,
    pub link_betti: Option<BettiVector>,
    pub expected_link_b1: usize,
    pub cone_betti: Option<BettiVector>,
    pub cone_range_checked: Vec<usize>,
    pub choke: Option<ChokeProbe>,
    pub multiplicity: Option<MultiplicityReport>,
    pub transfer: Option<TransferCertificate>,
    pub cone_heuristic: bool,
    pub notes: Vec<String>,
}

const REAL_CAVEAT: &str = "real field: the smoothness characterization is complex-analytic and \
                           fails over the reals; verdict suppressed";
const PROXY_CAVEAT: &str = "homotopy statements are verified at the homology level (H1/Hj proxy)";

/// Orchestrate the full pipeline and aggregate a verdict. Sub-analysis
/// failures degrade the verdict to inconclusive with partial evidence.
pub fn smoothness_verdict(
    system: &PolynomialSystem,
    config: &PipelineConfig,
) -> Result<SmoothnessReport> {
    system.check_germ()?;
    let k = config.dim_k.unwrap_or_else(|| system.nvars().saturating_sub(1).max(1));
    let mut notes = Vec::new();

    let lne_profile = match lne::llne_profile(
        system,
        &config.scales,
        config.count,
        config.seed,
        Mode::Germ,
        true,
    ) {
        Ok(p) => Some(p),
        Err(e) => {
            notes.push(format!("lne profile failed: {e}"));
            None
        }
    };

    let t_link = config.scales.last().copied().unwrap_or(1e-2);
    let link_betti = match link_homology(
        system,
        t_link,
        config.count,
        config.seed ^ 0x11,
        Mode::Germ,
        config.max_dim,
        config.rips_factor,
        Ring::Z2,
    ) {
        Ok((b, _)) => Some(b),
        Err(e) => {
            notes.push(format!("link homology failed: {e}"));
            None
        }
    };

    let cone = match sampler::tangent_cone(system, Mode::Germ, config.count, config.seed ^ 0x22) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(format!("tangent cone failed: {e}"));
            None
        }
    };
    let cone_heuristic = cone.as_ref().map_or(false, |c| c.heuristic);
    let cone_betti = cone.as_ref().and_then(|c| {
        match sample_homology(&c.cone_link.points, config.max_dim, config.rips_factor, Ring::Z2) {
            Ok(b) => Some(b),
            Err(e) => {
                notes.push(format!("cone link homology failed: {e}"));
                None
            }
        }
    });
    // H_j must vanish for 2 <= j <= 2k-2; only dimensions the Rips cap
    // makes honest are checked
    let cone_range_checked: Vec<usize> = (2..=2 * k.saturating_sub(1))
        .filter(|&j| j + 1 <= config.max_dim)
        .collect();

    let choke = match choking_probe(
        system,
        &config.scales,
        1,
        config.count,
        config.seed ^ 0x33,
        Mode::Germ,
    ) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(format!("choking probe failed: {e}"));
            None
        }
    };

    let multiplicity = cone.as_ref().and_then(|c| {
        match covering_degree(system, c, config.scales[0], config.seed ^ 0x44) {
            Ok(m) => Some(m),
            Err(e) => {
                notes.push(format!("covering degree unavailable: {e}"));
                None
            }
        }
    });
    let symbolic_order = system.symbolic_multiplicity().ok();

    let transfer_cert = match transfer::cone_link_transfer(
        system,
        t_link,
        config.count,
        config.trials,
        config.seed ^ 0x55,
        Mode::Germ,
    ) {
        Ok(c) => Some(c),
        Err(e) => {
            notes.push(format!("cone link transfer failed: {e}"));
            None
        }
    };

    // verdict assembly
    let expected_link_b1 = if k == 1 { 1 } else { 0 };
    let ord_nonsmooth = symbolic_order.map_or(false, |o| o >= 2);
    let degree_nonsmooth = multiplicity.as_ref().map_or(false, |m| m.covering_degree >= 2);
    let link_b1 = link_betti.as_ref().map(|b| b.get(1));
    let link_mismatch = link_b1.map_or(false, |b1| b1 != expected_link_b1);
    let cone_b1_obstruction =
        k >= 2 && cone_betti.as_ref().map_or(false, |b| b.get(1) > 0) && !cone_heuristic;
    let cone_hj_obstruction = cone_betti.as_ref().map_or(false, |b| {
        cone_range_checked.iter().any(|&j| b.get(j) != 0)
    });
    let choking = choke
        .as_ref()
        .map_or(false, |c| c.verdict == ChokeVerdict::ChokingSuspected);
    let cone_not_linear = system.polys.len() == 1
        && cone.is_some()
        && multiplicity.is_none()
        && notes.iter().any(|n| n.contains("not a linear subspace"));
    let lne_violating = lne_profile
        .as_ref()
        .map_or(false, |p| p.classification == DivergenceClass::LlneViolating);
    let lne_bounded = lne_profile
        .as_ref()
        .map_or(false, |p| p.classification == DivergenceClass::BoundedEvidence);

    let nonsmooth = ord_nonsmooth
        || degree_nonsmooth
        || link_mismatch
        || cone_b1_obstruction
        || cone_hj_obstruction
        || choking
        || cone_not_linear
        || lne_violating;
    let smooth_possible = symbolic_order == Some(1)
        && multiplicity.as_ref().map_or(false, |m| m.covering_degree == 1)
        && lne_bounded
        && link_b1 == Some(expected_link_b1)
        && !choking
        && cone_betti.as_ref().map_or(false, |b| {
            cone_range_checked.iter().all(|&j| b.get(j) == 0)
        } || cone_range_checked.is_empty());

    let verdict = if system.field == FieldTag::Real {
        // explicit real counterexamples rule out a smoothness verdict
        Verdict::Inconclusive
    } else if nonsmooth {
        Verdict::NonSmoothEvidence
    } else if smooth_possible {
        Verdict::SmoothEvidence
    } else {
        Verdict::Inconclusive
    };
    if system.field == FieldTag::Real {
        notes.push(REAL_CAVEAT.to_string());
    }

    Ok(SmoothnessReport {
        field: system.field,
        dim_k: k,
        verdict,
        real_case_caveat: system.field == FieldTag::Real,
        caveat: PROXY_CAVEAT,
        lne_profile,
        link_betti,
        expected_link_b1,
        cone_betti,
        cone_range_checked,
        choke,
        multiplicity,
        transfer: transfer_cert,
        cone_heuristic,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn system(field: FieldTag, vars: &[&str], exprs: &[&str]) -> PolynomialSystem {
        PolynomialSystem::parse(
            field,
            vars.iter().map(|s| s.to_string()).collect(),
            &exprs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
        )
        .unwrap()
    }

    #[test]
    fn covering_degree_of_cusp_is_two() {
        let sys = system(FieldTag::Complex, &["x", "y"], &["y^2 - x^3"]);
        let cone = sampler::tangent_cone(&sys, Mode::Germ, 50, 3).unwrap();
        let m = covering_degree(&sys, &cone, 0.1, 17).unwrap();
        assert_eq!(m.covering_degree, 2);
        assert_eq!(m.symbolic_order, Some(2));
        assert_eq!(m.agreement, Some(true));
    }

    #[test]
    fn covering_degree_of_graph_is_one() {
        let sys = system(FieldTag::Complex, &["x", "y", "z"], &["z - x*y"]);
        let cone = sampler::tangent_cone(&sys, Mode::Germ, 50, 3).unwrap();
        let m = covering_degree(&sys, &cone, 0.1, 23).unwrap();
        assert_eq!(m.covering_degree, 1);
        assert_eq!(m.symbolic_order, Some(1));
        assert_eq!(m.agreement, Some(true));
    }

    #[test]
    fn covering_degree_of_plane_is_one() {
        let sys = system(FieldTag::Complex, &["x", "y"], &["y"]);
        let cone = sampler::tangent_cone(&sys, Mode::Germ, 50, 3).unwrap();
        let m = covering_degree(&sys, &cone, 0.1, 5).unwrap();
        assert_eq!(m.covering_degree, 1);
    }

    #[test]
    fn quadric_cone_is_not_linear() {
        let sys = system(FieldTag::Complex, &["x", "y", "z"], &["x^2 + y^2 + z^2"]);
        let cone = sampler::tangent_cone(&sys, Mode::Germ, 50, 3).unwrap();
        assert!(matches!(
            covering_degree(&sys, &cone, 0.1, 5),
            Err(Error::ConeNotLinear)
        ));
    }

    #[test]
    fn cone_plane_dimensions() {
        let sys = system(FieldTag::Complex, &["x", "y"], &["y^2"]);
        let basis = cone_plane_basis(&sys).unwrap();
        // {y = 0} in C^2 realified: a 2-plane in R^4
        assert_eq!(basis.nrows(), 4);
        assert_eq!(basis.ncols(), 2);
    }

    #[test]
    fn choke_probe_on_linear_subspace_is_negative() {
        let sys = system(FieldTag::Real, &["x", "y", "z"], &["z"]);
        let probe =
            choking_probe(&sys, &[0.1, 0.01, 0.001], 1, 200, 7, Mode::Germ).unwrap();
        assert_eq!(probe.verdict, ChokeVerdict::NoChokingEvidence);
    }

    #[test]
    fn choke_probe_on_cone_is_negative() {
        // straight cone over a circle: scale invariant, nothing shrinks
        let sys = system(FieldTag::Real, &["x", "y", "z"], &["x^2 + y^2 - z^2"]);
        let probe =
            choking_probe(&sys, &[0.1, 0.01, 0.001], 1, 300, 7, Mode::Germ).unwrap();
        assert_eq!(probe.verdict, ChokeVerdict::NoChokingEvidence);
    }
}
