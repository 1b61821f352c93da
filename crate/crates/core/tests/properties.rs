//! Property-based invariants of the metric and homology kernels.

use proptest::prelude::*;

use linkscope::fixtures;
use linkscope::geometry::{self, PointCloud};
use linkscope::homology::{rips_complex, ChainComplex, Ring, SIMPLEX_CAP};
use linkscope::EmbeddedComplex;

fn small_cloud() -> impl Strategy<Value = PointCloud> {
    proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 6..24).prop_map(|pts| {
        let mut cloud = PointCloud::empty(2);
        for (x, y) in pts {
            cloud.push(&[x, y]);
        }
        let (dedup, _) = geometry::dedup_points(&cloud, 1e-6);
        dedup
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn triangle_inequality_and_inner_geq_outer(cloud in small_cloud()) {
        prop_assume!(cloud.len() >= 3);
        let cx = EmbeddedComplex::from_knn(cloud, 4, None).unwrap();
        if !cx.is_connected() {
            return Ok(());
        }
        let m = cx.inner_distance_matrix().unwrap();
        let n = cx.vertex_count();
        for a in 0..n {
            for b in 0..n {
                let outer = geometry::dist(cx.vertex(a), cx.vertex(b));
                prop_assert!(m[a][b] + 1e-9 >= outer);
                for c in 0..n {
                    prop_assert!(m[a][c] <= m[a][b] + m[b][c] + 1e-9);
                }
            }
        }
    }

    #[test]
    fn densification_never_increases_distances(cloud in small_cloud()) {
        prop_assume!(cloud.len() >= 5);
        let sparse = EmbeddedComplex::from_knn(cloud.clone(), 3, None).unwrap();
        let dense = EmbeddedComplex::from_knn(cloud, 5, None).unwrap();
        if !sparse.is_connected() {
            return Ok(());
        }
        let ms = sparse.inner_distance_matrix().unwrap();
        let md = dense.inner_distance_matrix().unwrap();
        for a in 0..ms.len() {
            for b in 0..ms.len() {
                prop_assert!(md[a][b] <= ms[a][b] + 1e-9);
            }
        }
    }

    #[test]
    fn euler_characteristic_identity(cloud in small_cloud()) {
        prop_assume!(cloud.len() >= 4);
        let gap = cloud.sampling_gap();
        prop_assume!(gap > 0.0);
        let Ok((chain, _)) = rips_complex(&cloud, 1.2 * gap, 2, SIMPLEX_CAP) else {
            return Ok(());
        };
        let b = chain.betti(Ring::Z2).unwrap();
        let chi_b: i64 = b
            .betti
            .iter()
            .enumerate()
            .map(|(i, &x)| if i % 2 == 0 { x as i64 } else { -(x as i64) })
            .sum();
        let chi_s = chain.vertex_count() as i64 - chain.edges().len() as i64
            + chain.triangles().len() as i64;
        prop_assert_eq!(chi_b, chi_s);
    }

    #[test]
    fn loop_concatenation_adds_lengths(n in 8usize..40, j in 1usize..5, k in 1usize..5) {
        let cx = fixtures::polygon_complex(n, 1.0);
        let a = fixtures::polygon_winding_loop(&cx, j as i64, 0);
        let b = fixtures::polygon_winding_loop(&cx, k as i64, 0);
        let ab = a.concatenate(&b).unwrap();
        prop_assert!((ab.length - (a.length + b.length)).abs() < 1e-9);
    }

    #[test]
    fn z_and_z2_betti_agree_without_torsion(cloud in small_cloud()) {
        prop_assume!((4..=14).contains(&cloud.len()));
        let gap = cloud.sampling_gap();
        prop_assume!(gap > 0.0);
        let Ok((chain, _)) = rips_complex(&cloud, 1.3 * gap, 2, 20_000) else {
            return Ok(());
        };
        let z2 = chain.betti(Ring::Z2).unwrap();
        let z = chain.betti(Ring::Z).unwrap();
        // planar 2-complexes carry no torsion, so the ranks must agree
        if z.torsion.iter().all(Vec::is_empty) {
            prop_assert_eq!(z2.betti, z.betti);
        }
    }
}

#[test]
fn betti_union_additivity_reference() {
    // non-proptest reference instance kept alongside the properties
    let a = fixtures::octahedron_chain();
    let shifted: Vec<Vec<usize>> = a
        .triangles()
        .iter()
        .map(|t| vec![t[0] + 6, t[1] + 6, t[2] + 6])
        .collect();
    let mut all: Vec<Vec<usize>> = a.triangles().iter().map(|t| t.to_vec()).collect();
    all.extend(shifted);
    let union = ChainComplex::from_top_simplices(12, &all);
    assert_eq!(union.betti(Ring::Z2).unwrap().betti, vec![2, 0, 2]);
}
