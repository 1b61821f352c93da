//! Built-in fixture complexes addressed by spec strings like
//! "polygon:n=256,r=1.0" or "figure1:delta=0.02,n=384".

use anyhow::{anyhow, bail};
use std::collections::HashMap;

use linkscope::fixtures;
use linkscope::homology::ChainComplex;
use linkscope::EmbeddedComplex;

pub struct FixtureSpec {
    pub name: String,
    params: HashMap<String, f64>,
}

impl FixtureSpec {
    pub fn parse(spec: &str) -> anyhow::Result<Self> {
        let (name, rest) = match spec.split_once(':') {
            Some((n, r)) => (n.to_string(), r),
            None => (spec.to_string(), ""),
        };
        let mut params = HashMap::new();
        for kv in rest.split(',').filter(|s| !s.is_empty()) {
            let (k, v) = kv
                .split_once('=')
                .ok_or_else(|| anyhow!("fixture parameter '{kv}' is not key=value"))?;
            params.insert(k.trim().to_string(), v.trim().parse::<f64>()?);
        }
        Ok(Self { name, params })
    }

    pub fn get(&self, key: &str, default: f64) -> f64 {
        self.params.get(key).copied().unwrap_or(default)
    }

    pub fn get_usize(&self, key: &str, default: usize) -> usize {
        self.get(key, default as f64) as usize
    }
}

/// Fixtures that exist as embedded complexes with an inner metric.
pub fn embedded_fixture(spec: &FixtureSpec) -> anyhow::Result<EmbeddedComplex> {
    match spec.name.as_str() {
        "polygon" => Ok(fixtures::polygon_complex(
            spec.get_usize("n", 256),
            spec.get("r", 1.0),
        )),
        "torus-grid" => Ok(fixtures::torus_grid(
            spec.get_usize("nu", 24),
            spec.get_usize("nv", 48),
            spec.get("r", 1.0),
            spec.get("R", 3.0),
        )),
        "tangent-circles" => Ok(fixtures::tangent_circles_complex(spec.get_usize("n", 64))),
        "lemniscate" => {
            let cloud = fixtures::lemniscate_cloud(spec.get_usize("n", 384), spec.get("a", 1.0));
            Ok(EmbeddedComplex::from_knn(cloud, spec.get_usize("k", 4), None)?)
        }
        "cassini" => {
            let a = spec.get("a", 1.0);
            let b = spec.get("b", a * (1.0 + spec.get("delta", 0.02)));
            let cloud = fixtures::cassini_oval_cloud(spec.get_usize("n", 384), a, b);
            Ok(EmbeddedComplex::from_knn(cloud, spec.get_usize("k", 4), None)?)
        }
        "pinched-torus" => {
            let cloud = fixtures::pinched_torus_cloud(
                spec.get_usize("nu", 24),
                spec.get_usize("nv", 48),
                spec.get("delta", 0.05),
            );
            Ok(EmbeddedComplex::from_knn(cloud, spec.get_usize("k", 8), None)?)
        }
        "sphere" => {
            let cloud = fixtures::sphere_cloud(spec.get_usize("n", 500));
            Ok(EmbeddedComplex::from_knn(cloud, spec.get_usize("k", 8), None)?)
        }
        "disk" => Ok(fixtures::disk_mesh(
            spec.get_usize("rings", 6),
            spec.get_usize("segs", 24),
            spec.get("r", 1.0),
        )),
        other => bail!("unknown embedded fixture '{other}'"),
    }
}

/// Abstract reference complexes for the homology commands.
pub fn chain_fixture(spec: &FixtureSpec) -> anyhow::Result<ChainComplex> {
    match spec.name.as_str() {
        "octahedron" => Ok(fixtures::octahedron_chain()),
        "torus7" => Ok(fixtures::torus7_chain()),
        "rp3" => Ok(fixtures::rp3_chain()),
        other => {
            let cx = embedded_fixture(spec)
                .map_err(|_| anyhow!("unknown chain fixture '{other}'"))?;
            Ok(ChainComplex::from_embedded(&cx))
        }
    }
}

/// The pinching-circles family: the wedge-of-circles limit (lemniscate) as
/// X0 and the pinched oval S_delta as X1.
pub fn figure1_pair(spec: &FixtureSpec) -> anyhow::Result<(EmbeddedComplex, EmbeddedComplex)> {
    let n = spec.get_usize("n", 384);
    let a = spec.get("a", 1.0);
    let delta = spec.get("delta", 0.02);
    let k = spec.get_usize("k", 4);
    let x0 = EmbeddedComplex::from_knn(fixtures::lemniscate_cloud(n, a), k, None)?;
    let x1 =
        EmbeddedComplex::from_knn(fixtures::cassini_oval_cloud(n, a, a * (1.0 + delta)), k, None)?;
    Ok((x0, x1))
}

/// Concentric polygon pair for the happy-path transfer.
pub fn polygons_pair(spec: &FixtureSpec) -> (EmbeddedComplex, EmbeddedComplex) {
    let n = spec.get_usize("n", 256);
    let r = spec.get("r", 1.0);
    let gap = spec.get("gap", 0.02);
    (
        fixtures::polygon_complex(n, r),
        fixtures::polygon_complex(n, r + gap),
    )
}
