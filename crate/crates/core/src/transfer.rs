//! The loop-transfer machinery between Hausdorff-close complexes: systole
//! estimation (shortest H1-essential cycle over Z2), the broken-geodesic
//! transfer of loops under the dist_H < eps0 / (20 C^2) hypothesis, and
//! certificates recording hypothesis arithmetic, transferred classes, and
//! stability over randomized re-runs.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::complex::{EmbeddedComplex, LoopPath};
use crate::error::{Error, Result};
use crate::geometry;
use crate::homology::{ChainComplex, CycleClass, H1ClassZ, IntegerH1, Z2Homology};
use crate::lne::lne_constant;
use crate::poly::PolynomialSystem;
use crate::sampler::{self, Mode};

/// Homology-proxy systole: length of the shortest cycle that is essential
/// in H1(.; Z2). `epsilon0` is +infinity when H1 vanishes.
#[derive(Debug, Clone, Serialize)]
pub struct SystoleEstimate {
    pub epsilon0: f64,
    pub witness: Option<LoopPath>,
    pub witness_cycle: Option<CycleClass>,
    pub method: &'static str,
}

/// Shortest non-null-homologous loop over Z2, from per-vertex shortest-path
/// trees plus one non-tree edge. Cycle classes ride along the Dijkstra as
/// XOR signatures, so each candidate costs O(1) to classify.
pub fn epsilon0_estimate(cx: &EmbeddedComplex) -> Result<SystoleEstimate> {
    if !cx.is_connected() {
        let (components, _) = cx.components();
        return Err(Error::DisconnectedComplex { components });
    }
    let chain = ChainComplex::from_embedded(cx);
    let z2 = Z2Homology::build(&chain);
    if z2.b1 == 0 {
        return Ok(SystoleEstimate {
            epsilon0: f64::INFINITY,
            witness: None,
            witness_cycle: None,
            method: "homology-proxy",
        });
    }
    let n = cx.vertex_count();
    // adjacency annotated with chain edge ids
    let adjacency: Vec<Vec<(usize, f64, usize)>> = (0..n)
        .map(|v| {
            cx.neighbors(v)
                .iter()
                .map(|&(w, len)| (w, len, chain.edge_id(v, w).unwrap()))
                .collect()
        })
        .collect();

    let best_per_root: Vec<(f64, usize, usize)> = (0..n)
        .into_par_iter()
        .map(|root| {
            let (dist, _, sig) = dijkstra_with_signatures(&adjacency, root, &z2);
            let mut best = (f64::INFINITY, root, usize::MAX);
            let mut class = vec![0u64; z2.class_words()];
            for (e, edge) in chain.edges().iter().enumerate() {
                let (a, b) = (edge[0], edge[1]);
                if !dist[a].is_finite() || !dist[b].is_finite() {
                    continue;
                }
                class.iter_mut().for_each(|w| *w = 0);
                for ((w, x), (y, z)) in class
                    .iter_mut()
                    .zip(&sig[a])
                    .zip(sig[b].iter().zip(z2.edge_class(e)))
                {
                    *w = x ^ y ^ z;
                }
                if Z2Homology::class_is_zero(&class) {
                    continue;
                }
                let weight = cx.edge_weight(a, b).unwrap();
                let len = dist[a] + dist[b] + weight;
                if len < best.0 {
                    best = (len, root, e);
                }
            }
            best
        })
        .collect();
    let (len, root, e) = best_per_root
        .into_iter()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then((a.1, a.2).cmp(&(b.1, b.2))))
        .unwrap();
    if !len.is_finite() {
        return Ok(SystoleEstimate {
            epsilon0: f64::INFINITY,
            witness: None,
            witness_cycle: None,
            method: "homology-proxy",
        });
    }
    // reconstruct the winning loop: root -> a, edge (a,b), b -> root
    let (_, prev) = cx.distances_from(root);
    let edge = chain.edges()[e];
    let path_to = |target: usize| -> Vec<usize> {
        let mut path = vec![target];
        let mut v = target;
        while v != root {
            v = prev[v];
            path.push(v);
        }
        path.reverse();
        path
    };
    let mut vertices = path_to(edge[0]);
    let back = path_to(edge[1]);
    vertices.extend(back.iter().rev());
    let witness = cx.loop_from_vertices(vertices)?;
    let support: Vec<usize> = witness
        .z2_edge_support()
        .iter()
        .map(|&(a, b)| chain.edge_id(a, b).unwrap())
        .collect();
    let witness_cycle = CycleClass::new(&chain, 1, support)?;
    Ok(SystoleEstimate {
        epsilon0: len,
        witness: Some(witness),
        witness_cycle: Some(witness_cycle),
        method: "homology-proxy",
    })
}

fn dijkstra_with_signatures(
    adjacency: &[Vec<(usize, f64, usize)>],
    root: usize,
    z2: &Z2Homology,
) -> (Vec<f64>, Vec<usize>, Vec<Vec<u64>>) {
    use std::cmp::Reverse;
    use std::collections::BinaryHeap;
    let n = adjacency.len();
    let words = z2.class_words();
    let mut dist = vec![f64::INFINITY; n];
    let mut prev = vec![usize::MAX; n];
    let mut sig = vec![vec![0u64; words]; n];
    let mut heap = BinaryHeap::new();
    dist[root] = 0.0;
    heap.push(Reverse((OrdF64(0.0), root)));
    while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
        if d > dist[v] {
            continue;
        }
        for &(w, len, e) in &adjacency[v] {
            let nd = d + len;
            if nd < dist[w] {
                dist[w] = nd;
                prev[w] = v;
                let mut s = sig[v].clone();
                for (x, y) in s.iter_mut().zip(z2.edge_class(e)) {
                    *x ^= y;
                }
                sig[w] = s;
                heap.push(Reverse((OrdF64(nd), w)));
            }
        }
    }
    (dist, prev, sig)
}

#[derive(PartialEq, PartialOrd)]
struct OrdF64(f64);
impl Eq for OrdF64 {}
impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap()
    }
}

// ---------------------------------------------------------------------------
// Loop transfer
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
pub enum ChoiceMode {
    /// Nearest target vertex, ties broken by lowest index.
    Nearest,
    /// Uniform choice among all target vertices within eps, and a
    /// randomized admissible partition.
    Randomized,
}

/// Transfer a loop on `x1` to a broken geodesic on `x0`: partition into
/// arcs shorter than 3*C*eps (inserting interpolated breakpoints along
/// edges), pick a target vertex within eps of every breakpoint, and connect
/// consecutive targets by shortest paths. The loop basepoint always maps to
/// the same target vertex.
pub fn transfer_loop(
    x1: &EmbeddedComplex,
    input: &LoopPath,
    x0: &EmbeddedComplex,
    c: f64,
    eps: f64,
    choice: ChoiceMode,
    rng: &mut ChaCha8Rng,
) -> Result<(LoopPath, f64)> {
    let base_coords = x1.vertex(input.basepoint).to_vec();
    let y0 = nearest_within(x0, &base_coords, eps).ok_or(Error::NoNearbyPoint {
        index: 0,
        eps,
    })?;
    if input.is_constant() {
        return Ok((LoopPath::constant(y0), 0.0));
    }
    let max_arc = match choice {
        ChoiceMode::Nearest => 0.9 * 3.0 * c * eps,
        ChoiceMode::Randomized => (0.5 + 0.4 * rng.gen::<f64>()) * 3.0 * c * eps,
    };
    if max_arc <= 0.0 {
        return Err(Error::InvalidConfig("non-positive arc bound".into()));
    }
    let breakpoints = partition_loop(x1, input, max_arc);
    let mut targets = Vec::with_capacity(breakpoints.len());
    for (i, bp) in breakpoints.iter().enumerate() {
        let is_base = geometry::dist(bp, &base_coords) < 1e-12;
        if is_base {
            targets.push(y0);
            continue;
        }
        let y = match choice {
            ChoiceMode::Nearest => nearest_within(x0, bp, eps),
            ChoiceMode::Randomized => random_within(x0, bp, eps, rng),
        };
        match y {
            Some(y) => targets.push(y),
            None => return Err(Error::NoNearbyPoint { index: i, eps }),
        }
    }
    // broken geodesic through the targets
    let mut vertices = vec![targets[0]];
    let mut max_segment = 0.0f64;
    for w in targets.windows(2) {
        if w[0] == w[1] {
            continue;
        }
        let geo = x0.shortest_path(w[0], w[1])?;
        max_segment = max_segment.max(geo.length);
        vertices.extend_from_slice(&geo.vertices[1..]);
    }
    if *vertices.last().unwrap() != targets[0] {
        // numerically impossible by construction; keep the loop closed
        vertices.push(targets[0]);
    }
    let out = x0.loop_from_vertices(vertices)?;
    Ok((out, max_segment))
}

/// Points along the loop at arc spacing <= max_arc, starting and ending at
/// the basepoint. Breakpoints may sit inside edges (linear interpolation).
fn partition_loop(cx: &EmbeddedComplex, l: &LoopPath, max_arc: f64) -> Vec<Vec<f64>> {
    let total = l.length;
    let pieces = (total / max_arc).ceil().max(1.0) as usize;
    let spacing = total / pieces as f64;
    let mut out = Vec::with_capacity(pieces + 1);
    out.push(cx.vertex(l.vertices[0]).to_vec());
    let mut walked = 0.0;
    let mut next = spacing;
    for w in l.vertices.windows(2) {
        let (a, b) = (cx.vertex(w[0]), cx.vertex(w[1]));
        let len = geometry::dist(a, b);
        if len == 0.0 {
            continue;
        }
        while next < walked + len - 1e-12 {
            let t = (next - walked) / len;
            out.push(a.iter().zip(b).map(|(x, y)| x + t * (y - x)).collect());
            next += spacing;
        }
        walked += len;
    }
    out.push(cx.vertex(*l.vertices.last().unwrap()).to_vec());
    out
}

fn nearest_within(cx: &EmbeddedComplex, p: &[f64], eps: f64) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for i in 0..cx.vertex_count() {
        let d = geometry::dist(cx.vertex(i), p);
        if d <= eps && best.map_or(true, |(bd, bi)| d < bd || (d == bd && i < bi)) {
            best = Some((d, i));
        }
    }
    best.map(|(_, i)| i)
}

fn random_within(
    cx: &EmbeddedComplex,
    p: &[f64],
    eps: f64,
    rng: &mut ChaCha8Rng,
) -> Option<usize> {
    let candidates: Vec<usize> = (0..cx.vertex_count())
        .filter(|&i| geometry::dist(cx.vertex(i), p) <= eps)
        .collect();
    if candidates.is_empty() {
        None
    } else {
        Some(candidates[rng.gen_range(0..candidates.len())])
    }
}

// ---------------------------------------------------------------------------
// Certificates
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct HypothesisCheck {
    pub dist_h: f64,
    pub c0: f64,
    pub c1: f64,
    pub c: f64,
    pub eps0_x0: f64,
    pub eps0_x1: f64,
    pub eps0_override: Option<f64>,
    /// eps0(X0) / (20 C^2)
    pub bound: f64,
    /// min(eps0(X0), eps0(X1)) / (20 C^2)
    pub iso_bound: f64,
    pub pass: bool,
    pub iso_pass: bool,
    /// working nearness: dist_H plus one sampling gap of X0
    pub eps: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DirectionTag {
    EpimorphismOnly,
    Isomorphism,
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopTransferResult {
    pub input_length: f64,
    pub output: LoopPath,
    pub class_z2: Vec<u64>,
    pub class_z2_is_zero: bool,
    pub class_z: Option<H1ClassZ>,
    pub trials: usize,
    pub all_trials_agree: bool,
    pub max_segment_length: f64,
    /// 5 C^2 eps, the admissible per-segment length
    pub segment_bound: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EpimorphismObstruction {
    pub b1_source: usize,
    pub b1_target: usize,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub enum TransferOutcome {
    /// Hypothesis failed: no class is asserted.
    Refused { quantity: &'static str, value: f64, bound: f64 },
    Transferred(Vec<LoopTransferResult>),
}

#[derive(Debug, Clone, Serialize)]
pub struct TransferCertificate {
    pub hypothesis: HypothesisCheck,
    pub direction: DirectionTag,
    pub outcome: TransferOutcome,
    pub obstruction: Option<EpimorphismObstruction>,
    /// fundamental-group statements are verified at the H1 level
    pub caveat: &'static str,
}

impl TransferCertificate {
    pub fn refused(&self) -> bool {
        matches!(self.outcome, TransferOutcome::Refused { .. })
    }
}

pub const DEFAULT_TRIALS: usize = 20;
const PROXY_CAVEAT: &str =
    "classes are computed in H1 (Z2 and Z); the abelianization gap is not checked";

/// Full certificate: hypothesis arithmetic, then per-loop transfers with
/// randomized stability trials. When the bound fails the certificate
/// refuses and carries no class.
pub fn transfer_certificate(
    x0: &EmbeddedComplex,
    x1: &EmbeddedComplex,
    loops: &[LoopPath],
    trials: usize,
    seed: u64,
    eps0_override: Option<f64>,
) -> Result<TransferCertificate> {
    let c0 = lne_constant(x0)?.c;
    let c1 = lne_constant(x1)?.c;
    let c = c0.max(c1);
    let dist_h = geometry::hausdorff_distance(x0.vertices(), x1.vertices())?;
    let sys0 = epsilon0_estimate(x0)?;
    let sys1 = epsilon0_estimate(x1)?;
    let eps0_x0 = eps0_override.unwrap_or(sys0.epsilon0);
    let bound = eps0_x0 / (20.0 * c * c);
    let iso_bound = eps0_x0.min(sys1.epsilon0) / (20.0 * c * c);
    let pass = dist_h < bound;
    let iso_pass = dist_h < iso_bound;
    let eps = dist_h + x0.vertices().sampling_gap();
    let hypothesis = HypothesisCheck {
        dist_h,
        c0,
        c1,
        c,
        eps0_x0: sys0.epsilon0,
        eps0_x1: sys1.epsilon0,
        eps0_override,
        bound,
        iso_bound,
        pass,
        iso_pass,
        eps,
    };
    let direction = if iso_pass {
        DirectionTag::Isomorphism
    } else {
        DirectionTag::EpimorphismOnly
    };
    if !pass {
        return Ok(TransferCertificate {
            hypothesis,
            direction,
            outcome: TransferOutcome::Refused {
                quantity: "dist_H",
                value: dist_h,
                bound,
            },
            obstruction: None,
            caveat: PROXY_CAVEAT,
        });
    }

    let chain0 = ChainComplex::from_embedded(x0);
    let z2 = Z2Homology::build(&chain0);
    let h1z = match IntegerH1::build(&chain0) {
        Ok(h) => Some(h),
        Err(Error::SizeBudgetExceeded { .. }) => None,
        Err(e) => return Err(e),
    };
    let segment_bound = 5.0 * c * c * eps;

    let mut results = Vec::with_capacity(loops.len());
    for (li, l) in loops.iter().enumerate() {
        let mut rng = sampler::rng_for(seed, li as u64);
        let (output, max_seg) =
            transfer_loop(x1, l, x0, c, eps, ChoiceMode::Nearest, &mut rng)?;
        let classify = |out: &LoopPath| -> (Vec<u64>, Option<H1ClassZ>) {
            let ids: Vec<usize> = out
                .z2_edge_support()
                .iter()
                .map(|&(a, b)| chain0.edge_id(a, b).unwrap())
                .collect();
            let cz2 = z2.class_of_edges(&ids);
            let cz = h1z.as_ref().map(|h| h.class_of_loop(&chain0, out));
            (cz2, cz)
        };
        let (class_z2, class_z) = classify(&output);
        let mut all_agree = true;
        let mut max_segment_length = max_seg;
        for trial in 1..trials.max(1) {
            let mut trng = sampler::rng_for(seed, (li * 10_000 + trial) as u64);
            let (out_t, seg_t) =
                transfer_loop(x1, l, x0, c, eps, ChoiceMode::Randomized, &mut trng)?;
            max_segment_length = max_segment_length.max(seg_t);
            let (cz2_t, cz_t) = classify(&out_t);
            if cz2_t != class_z2 || cz_t != class_z {
                all_agree = false;
            }
        }
        results.push(LoopTransferResult {
            input_length: l.length,
            output,
            class_z2: class_z2.clone(),
            class_z2_is_zero: Z2Homology::class_is_zero(&class_z2),
            class_z,
            trials: trials.max(1),
            all_trials_agree: all_agree,
            max_segment_length,
            segment_bound,
        });
    }
    Ok(TransferCertificate {
        hypothesis,
        direction,
        outcome: TransferOutcome::Transferred(results),
        obstruction: None,
        caveat: PROXY_CAVEAT,
    })
}

/// Certificate comparing the rescaled link X_t against the tangent-cone
/// link: builds both complexes, transfers the systole witness of X_t (or a
/// constant loop), and reports the Z2 surjectivity obstruction when the
/// cone link carries H1 that the affine link lacks.
pub fn cone_link_transfer(
    system: &PolynomialSystem,
    t: f64,
    count: usize,
    trials: usize,
    seed: u64,
    mode: Mode,
) -> Result<TransferCertificate> {
    let sample = sampler::sample_link(system, t, count, seed, mode)?;
    let x1 = sampler::link_complex(system, &sample, sampler::DEFAULT_KNN)?;
    let cone = sampler::tangent_cone(system, mode, count, seed ^ 0xC04E)?;
    let x0 = sampler::link_complex(&cone.cone_system, &cone.cone_link, sampler::DEFAULT_KNN)?;

    let b1_target = Z2Homology::build(&ChainComplex::from_embedded(&x0)).b1;
    let source_sys = epsilon0_estimate(&x1)?;
    let b1_source = if source_sys.epsilon0.is_finite() { 1 } else { 0 };
    let loops = match &source_sys.witness {
        Some(w) => vec![w.clone()],
        None => vec![LoopPath::constant(0)],
    };
    let mut cert = transfer_certificate(&x0, &x1, &loops, trials, seed, None)?;
    if b1_target > 0 && b1_source == 0 {
        let at = match mode {
            Mode::Germ => "at 0",
            Mode::Infinity => "at infinity",
        };
        cert.obstruction = Some(EpimorphismObstruction {
            b1_source,
            b1_target,
            note: format!(
                "link H1(Z2) = 0 but cone link H1(Z2) = {b1_target}: no Z2-epimorphism \
                 onto the cone link is possible, so the uniform-LNE hypothesis {at} must fail"
            ),
        });
    }
    Ok(cert)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn polygon_systole_is_perimeter() {
        let cx = fixtures::polygon_complex(256, 1.0);
        let s = epsilon0_estimate(&cx).unwrap();
        let perimeter = 256.0 * 2.0 * (std::f64::consts::PI / 256.0).sin();
        assert!((s.epsilon0 - perimeter).abs() < 1e-9);
        let tau = 2.0 * std::f64::consts::PI;
        assert!((s.epsilon0 - tau).abs() / tau < 0.05);
        assert!(s.witness.is_some());
    }

    #[test]
    fn contractible_complex_has_infinite_systole() {
        let cx = fixtures::disk_mesh(4, 12, 1.0);
        let s = epsilon0_estimate(&cx).unwrap();
        assert!(s.epsilon0.is_infinite());
        assert!(s.witness.is_none());
    }

    #[test]
    fn torus_systole_is_minor_loop() {
        let cx = fixtures::torus_grid(12, 24, 1.0, 3.0);
        let s = epsilon0_estimate(&cx).unwrap();
        let expected = 12.0 * 2.0 * (std::f64::consts::PI / 12.0).sin();
        assert!(
            (s.epsilon0 - expected).abs() < 1e-9,
            "eps0 = {} expected {}",
            s.epsilon0,
            expected
        );
    }

    #[test]
    fn concentric_polygons_certificate_passes() {
        let x0 = fixtures::polygon_complex(256, 1.0);
        let x1 = fixtures::polygon_complex(256, 1.02);
        let loops: Vec<LoopPath> = [-1i64, 0, 1, 2]
            .iter()
            .map(|&k| fixtures::polygon_winding_loop(&x1, k, 0))
            .collect();
        let cert = transfer_certificate(&x0, &x1, &loops, 5, 7, None).unwrap();
        assert!(cert.hypothesis.pass, "{:?}", cert.hypothesis);
        // bound arithmetic: eps0 ~ 2 pi, C ~ pi/2 -> bound ~ 0.127
        assert!((cert.hypothesis.bound - 0.127).abs() < 0.01);
        assert_eq!(cert.direction, DirectionTag::Isomorphism);
        match &cert.outcome {
            TransferOutcome::Transferred(results) => {
                for (res, &k) in results.iter().zip(&[-1i64, 0, 1, 2]) {
                    assert!(res.all_trials_agree);
                    let z = res.class_z.as_ref().unwrap();
                    assert_eq!(z.free.len(), 1);
                    assert_eq!(z.free[0].abs(), k.unsigned_abs() as i128);
                    assert_eq!(res.class_z2_is_zero, k % 2 == 0);
                    assert!(res.max_segment_length <= res.segment_bound + 1e-9);
                }
            }
            other => panic!("expected transfer, got {other:?}"),
        }
    }

    #[test]
    fn identical_complexes_identity_on_classes() {
        let x = fixtures::polygon_complex(64, 1.0);
        let l = fixtures::polygon_winding_loop(&x, 1, 0);
        let cert = transfer_certificate(&x, &x, &[l], 3, 1, None).unwrap();
        assert!(cert.hypothesis.pass);
        match cert.outcome {
            TransferOutcome::Transferred(rs) => {
                let z = rs[0].class_z.as_ref().unwrap();
                assert_eq!(z.free[0].abs(), 1);
            }
            _ => panic!("expected transfer"),
        }
    }

    #[test]
    fn pinching_family_is_refused() {
        // wedge limit vs a pinched oval: the wedge's tangency pairs force a
        // large C, collapsing the bound below the Hausdorff distance
        let x0cloud = fixtures::lemniscate_cloud(384, 1.0);
        let x1cloud = fixtures::cassini_oval_cloud(384, 1.0, 1.02);
        let x0 = EmbeddedComplex::from_knn(x0cloud, 4, None).unwrap();
        let x1 = EmbeddedComplex::from_knn(x1cloud, 4, None).unwrap();
        let l = {
            // any essential loop on the oval
            let s = epsilon0_estimate(&x1).unwrap();
            s.witness.unwrap()
        };
        let cert = transfer_certificate(&x0, &x1, &[l], 3, 5, None).unwrap();
        assert!(!cert.hypothesis.pass, "{:?}", cert.hypothesis);
        assert!(matches!(
            cert.outcome,
            TransferOutcome::Refused { quantity: "dist_H", .. }
        ));
    }

    #[test]
    fn homomorphism_on_concatenations() {
        let x0 = fixtures::polygon_complex(128, 1.0);
        let x1 = fixtures::polygon_complex(128, 1.01);
        let a = fixtures::polygon_winding_loop(&x1, 1, 0);
        let b = fixtures::polygon_winding_loop(&x1, 2, 0);
        let ab = a.concatenate(&b).unwrap();
        let cert = transfer_certificate(&x0, &x1, &[a, b, ab], 3, 11, None).unwrap();
        match cert.outcome {
            TransferOutcome::Transferred(rs) => {
                let za = rs[0].class_z.as_ref().unwrap();
                let zb = rs[1].class_z.as_ref().unwrap();
                let zab = rs[2].class_z.as_ref().unwrap();
                assert_eq!(za.add(zb), zab.clone());
                // and over Z2
                let xor: Vec<u64> = rs[0]
                    .class_z2
                    .iter()
                    .zip(&rs[1].class_z2)
                    .map(|(x, y)| x ^ y)
                    .collect();
                assert_eq!(xor, rs[2].class_z2);
            }
            _ => panic!("expected transfer"),
        }
    }
}
