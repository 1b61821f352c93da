//! Variety definition files: TOML with name, field, variables, polynomials
//! and an optional default mode.

use anyhow::{bail, Context};
use serde::Deserialize;
use std::path::Path;

use linkscope::poly::{FieldTag, PolynomialSystem};
use linkscope::sampler::Mode;

#[derive(Debug, Deserialize)]
pub struct VarietyFile {
    pub name: String,
    pub field: String,
    pub variables: Vec<String>,
    pub polynomials: Vec<String>,
    #[serde(default)]
    pub mode: Option<String>,
}

pub struct Variety {
    pub name: String,
    pub system: PolynomialSystem,
    pub default_mode: Option<Mode>,
}

pub fn load_variety(path: &Path) -> anyhow::Result<Variety> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read variety file {}", path.display()))?;
    let file: VarietyFile = toml::from_str(&text)
        .with_context(|| format!("invalid variety file {}", path.display()))?;
    let field = match file.field.as_str() {
        "real" => FieldTag::Real,
        "complex" => FieldTag::Complex,
        other => bail!("field must be 'real' or 'complex', got '{other}'"),
    };
    let default_mode = match file.mode.as_deref() {
        None => None,
        Some("germ") => Some(Mode::Germ),
        Some("infinity") => Some(Mode::Infinity),
        Some(other) => bail!("mode must be 'germ' or 'infinity', got '{other}'"),
    };
    let system = PolynomialSystem::parse(field, file.variables, &file.polynomials)
        .with_context(|| format!("cannot parse polynomials in {}", path.display()))?;
    Ok(Variety {
        name: file.name,
        system,
        default_mode,
    })
}
