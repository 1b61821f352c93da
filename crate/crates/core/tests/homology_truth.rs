//! Ground-truth homology checks: classical complexes, Rips on a sampled
//! sphere (verified against the octahedron first), and filling-radius
//! queries cross-checked by an independent dense GF(2) solver.

use linkscope::fixtures;
use linkscope::geometry::{self, PointCloud};
use linkscope::homology::{
    boundary_columns, filling_diameter, rips_complex, ChainComplex, CycleClass, Ring,
    SIMPLEX_CAP,
};
use linkscope::pipeline::sample_homology;

/// Independent dense GF(2) solvability check: is `target` in the span of
/// `columns`? Plain Gaussian elimination over bit vectors.
fn dense_gf2_in_span(columns: &[Vec<usize>], target: &[usize], rows: usize) -> bool {
    let mut mat: Vec<Vec<u8>> = columns
        .iter()
        .map(|c| {
            let mut v = vec![0u8; rows];
            for &i in c {
                v[i] = 1;
            }
            v
        })
        .collect();
    let mut t = vec![0u8; rows];
    for &i in target {
        t[i] = 1;
    }
    let mut used = vec![false; mat.len()];
    for r in 0..rows {
        let pivot = (0..mat.len()).find(|&c| !used[c] && mat[c][r] == 1);
        let Some(p) = pivot else { continue };
        used[p] = true;
        let col = mat[p].clone();
        for (c, m) in mat.iter_mut().enumerate() {
            if c != p && m[r] == 1 {
                for i in 0..rows {
                    m[i] ^= col[i];
                }
            }
        }
        if t[r] == 1 {
            for i in 0..rows {
                t[i] ^= col[i];
            }
        }
    }
    t.iter().all(|&x| x == 0)
}

#[test]
fn sphere_sample_matches_octahedron_ground_truth() {
    // engine first verified on the octahedron...
    let oct = fixtures::octahedron_chain();
    assert_eq!(oct.betti(Ring::Z2).unwrap().betti, vec![1, 0, 1]);
    // ...then a 500-point Rips sample of S^2 must agree
    let cloud = fixtures::sphere_cloud(500);
    let betti = sample_homology(&cloud, 3, 2.2, Ring::Z2).unwrap();
    assert_eq!(betti.betti, vec![1, 0, 1]);
}

#[test]
fn small_loop_in_disk_mesh_fills_at_its_own_scale() {
    let disk = fixtures::disk_mesh(8, 24, 1.0);
    let chain = ChainComplex::from_embedded(&disk);
    // ring at radius 3/8: vertex ids 1 + 2*24 + s
    let ring: Vec<usize> = (0..24).map(|s| 1 + 2 * 24 + s).collect();
    let mut edges = Vec::new();
    for s in 0..24 {
        edges.push(chain.edge_id(ring[s], ring[(s + 1) % 24]).unwrap());
    }
    let cycle = CycleClass::new(&chain, 1, edges).unwrap();
    let r = filling_diameter(&cycle, &chain).unwrap();
    // the filling is the inner disk: it reaches the centre, distance 3/8
    assert!((r - 0.375).abs() < 0.05, "r = {r}");

    // independent oracle: dense GF(2) solve over linearly scanned radii
    let pos = chain.positions().unwrap();
    let support = cycle.support_vertices(&chain);
    let dist: Vec<f64> = (0..chain.vertex_count())
        .map(|v| {
            support
                .iter()
                .map(|&s| geometry::dist(pos.point(v), pos.point(s)))
                .fold(f64::INFINITY, f64::min)
        })
        .collect();
    let mut radii: Vec<f64> = dist.clone();
    radii.sort_by(|a, b| a.partial_cmp(b).unwrap());
    radii.dedup();
    let mut oracle = f64::INFINITY;
    for &radius in &radii {
        let keep: Vec<bool> = dist.iter().map(|&d| d <= radius).collect();
        let (sub, emap, _) = chain.induced_subcomplex(&keep);
        let mapped: Option<Vec<usize>> =
            cycle.chain.iter().map(|id| emap.get(id).copied()).collect();
        let Some(mapped) = mapped else { continue };
        let cols = boundary_columns(&sub, 1);
        if dense_gf2_in_span(&cols, &mapped, sub.edges().len()) {
            oracle = radius;
            break;
        }
    }
    assert!(
        (r - oracle).abs() < 1e-12,
        "engine {r} vs brute force {oracle}"
    );
}

#[test]
fn adjacent_triangle_boundary_fills_within_an_edge() {
    let disk = fixtures::disk_mesh(4, 12, 1.0);
    let chain = ChainComplex::from_embedded(&disk);
    let tri = chain.triangles()[0];
    let edges = vec![
        chain.edge_id(tri[0], tri[1]).unwrap(),
        chain.edge_id(tri[0], tri[2]).unwrap(),
        chain.edge_id(tri[1], tri[2]).unwrap(),
    ];
    let cycle = CycleClass::new(&chain, 1, edges).unwrap();
    let r = filling_diameter(&cycle, &chain).unwrap();
    assert!(r <= 1e-12, "a present triangle fills at radius zero, r = {r}");
}

#[test]
fn equatorial_cycle_on_sphere_must_reach_a_pole() {
    let cloud = fixtures::sphere_cloud(400);
    let gap = cloud.sampling_gap();
    let (chain, _) = rips_complex(&cloud, 2.2 * gap, 2, SIMPLEX_CAP).unwrap();
    // assemble an equatorial loop from points near z = 0, ordered by angle
    let mut band: Vec<usize> = (0..cloud.len())
        .filter(|&i| cloud.point(i)[2].abs() < 0.12)
        .collect();
    band.sort_by(|&a, &b| {
        let pa = cloud.point(a);
        let pb = cloud.point(b);
        pa[1].atan2(pa[0]).partial_cmp(&pb[1].atan2(pb[0])).unwrap()
    });
    let mut edges = Vec::new();
    let mut ok = true;
    for k in 0..band.len() {
        match chain.edge_id(band[k], band[(k + 1) % band.len()]) {
            Some(e) => edges.push(e),
            None => {
                ok = false;
                break;
            }
        }
    }
    assert!(ok, "equatorial band must chain up at this density");
    let cycle = CycleClass::new(&chain, 1, edges).unwrap();
    let r = filling_diameter(&cycle, &chain).unwrap();
    // Euclidean distance from the equator to the pole is sqrt(2)
    assert!(
        (1.0..=1.5).contains(&r),
        "filling must reach a pole, r = {r}"
    );
}

#[test]
fn filling_diameter_monotone_under_refinement() {
    // the same cycle in a sparser complex cannot fill earlier
    let disk_fine = fixtures::disk_mesh(6, 18, 1.0);
    let chain_fine = ChainComplex::from_embedded(&disk_fine);
    let ring: Vec<usize> = (0..18).map(|s| 1 + 2 * 18 + s).collect();
    let mut edges_fine = Vec::new();
    for s in 0..18 {
        edges_fine.push(chain_fine.edge_id(ring[s], ring[(s + 1) % 18]).unwrap());
    }
    let cycle_fine = CycleClass::new(&chain_fine, 1, edges_fine.clone()).unwrap();
    let r_fine = filling_diameter(&cycle_fine, &chain_fine).unwrap();

    // drop the innermost ring of triangles: filling must reach further out
    let tris: Vec<[usize; 3]> = chain_fine
        .triangles()
        .iter()
        .copied()
        .filter(|t| !t.contains(&0))
        .collect();
    let sparse = ChainComplex::new(
        chain_fine.vertex_count(),
        chain_fine.edges().to_vec(),
        tris,
        vec![],
        chain_fine.positions().cloned(),
    );
    let cycle_sparse = CycleClass::new(&sparse, 1, edges_fine).unwrap();
    match filling_diameter(&cycle_sparse, &sparse) {
        Ok(r_sparse) => assert!(r_sparse + 1e-12 >= r_fine),
        Err(linkscope::Error::NeverFills) => {} // even stronger
        Err(e) => panic!("unexpected {e:?}"),
    }
}

#[test]
fn torus7_z_and_z2_agree_on_free_rank() {
    let cx = fixtures::torus7_chain();
    let z2 = cx.betti(Ring::Z2).unwrap();
    let z = cx.betti(Ring::Z).unwrap();
    assert_eq!(z2.betti, z.betti);
}

#[test]
fn rp3_rips_vs_abstract() {
    // the abstract quotient triangulation is the ground truth
    let abstract_rp3 = fixtures::rp3_chain();
    let b = abstract_rp3.betti(Ring::Z2).unwrap();
    assert_eq!(b.betti, vec![1, 1, 1, 1]);
}

#[test]
fn dense_solver_agrees_with_engine_on_octahedron() {
    let oct = fixtures::octahedron_chain();
    let cols = boundary_columns(&oct, 1);
    // every triangle boundary is in the span; a torus-style non-face is not
    // applicable here, so check a sum of two face boundaries as well
    let target = cols[0].clone();
    assert!(dense_gf2_in_span(&cols, &target, oct.edges().len()));
    let two: Vec<usize> = linkscope::homology::xor_sorted(&cols[0], &cols[3]);
    assert!(dense_gf2_in_span(&cols, &two, oct.edges().len()));
    let (nb, fill) = linkscope::homology::is_null_homologous(
        &CycleClass::new(&oct, 1, two.clone()).unwrap(),
        &oct,
    )
    .unwrap();
    assert!(nb);
    assert_eq!(oct.boundary_z2(2, &fill.unwrap()), two);
}

#[test]
fn cloud_of_two_spheres_has_additive_betti() {
    let a = fixtures::sphere_cloud(260);
    let mut rows: Vec<Vec<f64>> = a.iter().map(|p| p.to_vec()).collect();
    rows.extend(a.iter().map(|p| vec![p[0] + 5.0, p[1], p[2]]));
    let both = PointCloud::from_rows(&rows);
    let betti = sample_homology(&both, 3, 2.2, Ring::Z2).unwrap();
    assert_eq!(betti.betti, vec![2, 0, 2]);
}
