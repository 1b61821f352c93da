//! Sampling oracles: parametrization-based membership, Hausdorff
//! convergence of rescaled links toward the cone link, and determinism.

use linkscope::homology::Ring;
use linkscope::pipeline::sample_homology;
use linkscope::poly::{FieldTag, PolynomialSystem};
use linkscope::sampler::{self, Mode};

fn system(field: FieldTag, vars: &[&str], exprs: &[&str]) -> PolynomialSystem {
    PolynomialSystem::parse(
        field,
        vars.iter().map(|s| s.to_string()).collect(),
        &exprs.iter().map(|s| s.to_string()).collect::<Vec<_>>(),
    )
    .unwrap()
}

#[test]
fn cusp_link_is_a_closed_curve() {
    // the complex cusp's link is a knotted closed curve: b = (1, 1)
    let sys = system(FieldTag::Complex, &["x", "y"], &["y^2 - x^3"]);
    let sample = sampler::sample_link(&sys, 0.01, 400, 11, Mode::Germ).unwrap();
    let betti = sample_homology(&sample.points, 2, 2.0, Ring::Z2).unwrap();
    assert_eq!(betti.betti[0], 1, "link connected");
    assert_eq!(betti.betti[1], 1, "link is a single closed curve");
}

#[test]
fn germ_links_converge_to_cone_link_in_hausdorff() {
    // Hausdorff distance to the cone link decreases along shrinking scales
    let sys = system(FieldTag::Complex, &["x", "y"], &["y^2 - x^3"]);
    let cone = sampler::tangent_cone(&sys, Mode::Germ, 400, 3).unwrap();
    let mut previous = f64::INFINITY;
    for &t in &[0.2, 0.02, 0.002] {
        let sample = sampler::sample_link(&sys, t, 400, 3, Mode::Germ).unwrap();
        let d = sampler::hausdorff_distance(&sample.points, &cone.cone_link.points).unwrap();
        assert!(
            d < previous + 1e-9,
            "distance should decrease: {d} after {previous}"
        );
        previous = d;
    }
    // and the smallest scale should sit well inside the first one
    assert!(previous < 0.3);
}

#[test]
fn identical_seed_bit_identical_everything() {
    let sys = system(FieldTag::Complex, &["x", "y", "z"], &["x^2 + y^2 + z^2"]);
    let a = sampler::sample_link(&sys, 0.05, 300, 1234, Mode::Germ).unwrap();
    let b = sampler::sample_link(&sys, 0.05, 300, 1234, Mode::Germ).unwrap();
    assert_eq!(a.points.coords(), b.points.coords());
    assert_eq!(a.residual_bound, b.residual_bound);
    let ca = sampler::link_complex(&sys, &a, 12).unwrap();
    let cb = sampler::link_complex(&sys, &b, 12).unwrap();
    assert_eq!(ca.edges().len(), cb.edges().len());
    for (x, y) in ca.edges().iter().zip(cb.edges()) {
        assert_eq!((x.a, x.b), (y.a, y.b));
        assert_eq!(x.weight, y.weight);
    }
}

#[test]
fn every_link_point_is_on_sphere_within_tolerance() {
    let sys = system(
        FieldTag::Real,
        &["x1", "x2", "x3", "x4"],
        &["x1^2021 + x2^2021 - x3^2021"],
    );
    let sample = sampler::sample_link(&sys, 1e-2, 200, 5, Mode::Germ).unwrap();
    assert!(sample.points.len() >= 100);
    for p in sample.points.iter() {
        assert!((linkscope::geometry::norm(p) - 1.0).abs() < 1e-9);
    }
    assert!(sample.residual_bound <= 1e-10);
}
