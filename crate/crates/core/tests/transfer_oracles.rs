//! Transfer and systole checks against independent oracles: planar winding
//! numbers from coordinate geometry, and a covering-space shortest-loop
//! computation on coarse torus grids.

use linkscope::complex::LoopPath;
use linkscope::fixtures;
use linkscope::transfer::{
    epsilon0_estimate, transfer_certificate, TransferOutcome,
};
use linkscope::EmbeddedComplex;

/// Winding number of a closed polyline around the origin, by summing
/// wrapped angle increments. Independent of any homology machinery.
fn winding_number(cx: &EmbeddedComplex, l: &LoopPath) -> i64 {
    let mut total = 0.0f64;
    for w in l.vertices.windows(2) {
        let a = cx.vertex(w[0]);
        let b = cx.vertex(w[1]);
        let mut d = b[1].atan2(b[0]) - a[1].atan2(a[0]);
        while d > std::f64::consts::PI {
            d -= 2.0 * std::f64::consts::PI;
        }
        while d < -std::f64::consts::PI {
            d += 2.0 * std::f64::consts::PI;
        }
        total += d;
    }
    (total / (2.0 * std::f64::consts::PI)).round() as i64
}

#[test]
fn transfer_preserves_winding_numbers() {
    let x0 = fixtures::polygon_complex(256, 1.0);
    let x1 = fixtures::polygon_complex(256, 1.02);
    let ks = [-1i64, 0, 1, 2];
    let loops: Vec<LoopPath> = ks
        .iter()
        .map(|&k| fixtures::polygon_winding_loop(&x1, k, 0))
        .collect();
    for (l, &k) in loops.iter().zip(&ks) {
        assert_eq!(winding_number(&x1, l), k, "input winding");
    }
    let cert = transfer_certificate(&x0, &x1, &loops, 20, 99, None).unwrap();
    assert!(cert.hypothesis.pass);
    let TransferOutcome::Transferred(results) = &cert.outcome else {
        panic!("expected transfer");
    };
    for (res, &k) in results.iter().zip(&ks) {
        // oracle: the output loop lives on the unit polygon in the plane,
        // so its winding number is directly computable
        assert_eq!(winding_number(&x0, &res.output), k, "output winding for k={k}");
        assert!(res.all_trials_agree);
        assert_eq!(res.trials, 20);
    }
}

#[test]
fn refusal_emits_no_class() {
    let x0cloud = fixtures::lemniscate_cloud(384, 1.0);
    let x1cloud = fixtures::cassini_oval_cloud(384, 1.0, 1.02);
    let x0 = EmbeddedComplex::from_knn(x0cloud, 4, None).unwrap();
    let x1 = EmbeddedComplex::from_knn(x1cloud, 4, None).unwrap();
    let witness = epsilon0_estimate(&x1).unwrap().witness.unwrap();
    let cert = transfer_certificate(&x0, &x1, &[witness], 5, 3, None).unwrap();
    assert!(!cert.hypothesis.pass);
    assert!(matches!(cert.outcome, TransferOutcome::Refused { .. }));
}

/// Shortest essential loop on a torus grid via the 3x3 covering block:
/// the minimum over vertices of the distance to any non-trivial translate.
fn torus_systole_oracle(nu: usize, nv: usize, r: f64, big_r: f64) -> f64 {
    // positions come from the torus embedding, repeated over the cover
    let torus = fixtures::torus_grid(nu, nv, r, big_r);
    let weight = |i0: usize, j0: usize, i1: usize, j1: usize| -> f64 {
        let a = fixtures::torus_grid_index(nv, i0 % nu, j0 % nv);
        let b = fixtures::torus_grid_index(nv, i1 % nu, j1 % nv);
        torus.edge_weight(a, b).expect("grid edge")
    };
    let (cu, cv) = (3 * nu, 3 * nv);
    let id = |i: usize, j: usize| i * cv + j;
    let mut adj = vec![Vec::new(); cu * cv];
    for i in 0..cu {
        for j in 0..cv {
            let mut push = |i2: usize, j2: usize| {
                if i2 < cu && j2 < cv {
                    let w = weight(i, j, i2, j2);
                    adj[id(i, j)].push((id(i2, j2), w));
                    adj[id(i2, j2)].push((id(i, j), w));
                }
            };
            push(i + 1, j);
            push(i, j + 1);
            push(i + 1, j + 1);
        }
    }
    // Dijkstra from every centre-block vertex to its translates
    let mut best = f64::INFINITY;
    for i in nu..2 * nu {
        for j in nv..2 * nv {
            let source = id(i, j);
            let mut dist = vec![f64::INFINITY; cu * cv];
            let mut heap = std::collections::BinaryHeap::new();
            dist[source] = 0.0;
            heap.push(std::cmp::Reverse((ordered_float(0.0), source)));
            while let Some(std::cmp::Reverse((d, v))) = heap.pop() {
                let d = d.0;
                if d > dist[v] {
                    continue;
                }
                for &(w, len) in &adj[v] {
                    let nd = d + len;
                    if nd < dist[w] {
                        dist[w] = nd;
                        heap.push(std::cmp::Reverse((ordered_float(nd), w)));
                    }
                }
            }
            for (di, dj) in [(1i64, 0i64), (0, 1), (1, 1), (1, -1)] {
                let ti = (i as i64 + di * nu as i64) as usize;
                let tj = (j as i64 + dj * nv as i64) as usize;
                if ti < cu && tj < cv {
                    best = best.min(dist[id(ti, tj)]);
                }
            }
        }
    }
    best
}

#[derive(PartialEq, PartialOrd)]
struct OrdF(f64);
impl Eq for OrdF {}
impl Ord for OrdF {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.partial_cmp(other).unwrap()
    }
}
fn ordered_float(x: f64) -> OrdF {
    OrdF(x)
}

#[test]
fn coarse_torus_systole_matches_covering_space_oracle() {
    for (nu, nv) in [(6usize, 12usize), (8, 16)] {
        let cx = fixtures::torus_grid(nu, nv, 1.0, 3.0);
        let engine = epsilon0_estimate(&cx).unwrap().epsilon0;
        let oracle = torus_systole_oracle(nu, nv, 1.0, 3.0);
        assert!(
            (engine - oracle).abs() < 1e-9,
            "{nu}x{nv}: engine {engine} vs oracle {oracle}"
        );
    }
}

#[test]
fn segment_bound_holds_on_passing_transfers() {
    let x0 = fixtures::polygon_complex(128, 1.0);
    let x1 = fixtures::polygon_complex(128, 1.01);
    let l = fixtures::polygon_winding_loop(&x1, 1, 0);
    let cert = transfer_certificate(&x0, &x1, &[l], 10, 5, None).unwrap();
    let TransferOutcome::Transferred(rs) = &cert.outcome else {
        panic!("expected transfer");
    };
    assert!(rs[0].max_segment_length <= rs[0].segment_bound + 1e-9);
}

#[test]
fn eps0_override_is_respected() {
    let x0 = fixtures::polygon_complex(64, 1.0);
    let x1 = fixtures::polygon_complex(64, 1.01);
    let l = fixtures::polygon_winding_loop(&x1, 1, 0);
    // a tiny override forces refusal regardless of the true systole
    let cert = transfer_certificate(&x0, &x1, &[l], 3, 5, Some(1e-6)).unwrap();
    assert!(!cert.hypothesis.pass);
    assert!(matches!(cert.outcome, TransferOutcome::Refused { .. }));
}
