//! Model ingestion: bundled fixtures, inline documents and model files.

use crate::error::CliError;
use meanfield_bose::linalg::{re, CMatrix};
use meanfield_bose::model::{build_torus_model, ModelDocument, ModelSpec, TorusNormalization, TorusSpec};
use serde::Deserialize;
use sha2::{Digest, Sha256};
use std::path::Path;

/// A torus kernel given by its value on each shell `|k|_inf = r`.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialTorus {
    pub d: usize,
    #[serde(rename = "Kcut")]
    pub kcut: i64,
    pub profile: Vec<f64>,
    #[serde(default)]
    pub normalization: TorusNormalization,
}

/// Any accepted model document.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum ModelInput {
    Model(ModelDocument),
    Torus(TorusSpec),
    Radial(RadialTorus),
}

/// A resolved model, keeping the torus description when there is one.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub name: String,
    pub model: ModelSpec,
    pub torus: Option<TorusSpec>,
}

impl LoadedModel {
    /// SHA-256 of the canonical JSON model document.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(&self.model.to_document()).expect("model documents serialize");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Torus `d = 1`, `Kcut = 1`, `vhat(0) = vhat(+-1) = 3/2`.
pub fn torus_fixture() -> TorusSpec {
    TorusSpec::radial(1, 1, &[1.5, 1.5])
}

/// Three non-interacting modes with distinct energies.
pub fn free_fixture() -> ModelSpec {
    let energies = [0.0, 1.0, 2.5];
    let t = CMatrix::from_fn(3, 3, |i, j| if i == j { re(energies[i]) } else { re(0.0) });
    ModelSpec::free(t, "free").expect("diagonal one-body matrix is valid")
}

fn from_input(name: String, input: ModelInput) -> Result<LoadedModel, CliError> {
    let torus = match input {
        ModelInput::Model(doc) => {
            let model = ModelSpec::from_document(&doc)?;
            return Ok(LoadedModel { name, model, torus: None });
        }
        ModelInput::Torus(spec) => spec,
        ModelInput::Radial(r) => TorusSpec::radial(r.d, r.kcut, &r.profile).with_normalization(r.normalization),
    };
    let model = build_torus_model(&torus)?;
    Ok(LoadedModel {
        name,
        model,
        torus: Some(torus),
    })
}

fn parse_document(text: &str, toml_syntax: bool) -> Result<ModelInput, CliError> {
    if toml_syntax {
        toml::from_str(text).map_err(|e| CliError::Config(format!("model document: {e}")))
    } else {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("model document: {e}")))
    }
}

/// Resolves `--model`: `torus`, `free`, an inline JSON document, or a
/// `.json`/`.toml` file.
pub fn load(source: &str) -> Result<LoadedModel, CliError> {
    match source {
        "torus" => from_input("torus".into(), ModelInput::Torus(torus_fixture())),
        "free" => Ok(LoadedModel {
            name: "free".into(),
            model: free_fixture(),
            torus: None,
        }),
        s if s.trim_start().starts_with('{') => from_input("inline".into(), parse_document(s, false)?),
        path => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read model file {path}: {e}")))?;
            let is_toml = Path::new(path).extension().is_some_and(|x| x == "toml");
            from_input(path.into(), parse_document(&text, is_toml)?)
        }
    }
}

/// Inline model tables inside a config file.
pub fn from_value(input: ModelInput) -> Result<LoadedModel, CliError> {
    from_input("config".into(), input)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_load() {
        let torus = load("torus").unwrap();
        assert_eq!(torus.model.modes(), 3);
        assert!(torus.torus.is_some());
        assert!(!load("free").unwrap().model.is_interacting());
    }

    #[test]
    fn inline_radial_matches_fixture() {
        let inline = load(r#"{"d": 1, "Kcut": 1, "profile": [1.5, 1.5]}"#).unwrap();
        assert_eq!(inline.hash(), load("torus").unwrap().hash());
    }

    #[test]
    fn model_document_roundtrip_keeps_hash() {
        let torus = load("torus").unwrap();
        let text = serde_json::to_string(&torus.model.to_document()).unwrap();
        let back = load(&text).unwrap();
        assert_eq!(back.hash(), torus.hash());
        assert!(back.torus.is_none());
    }

    #[test]
    fn missing_file_is_a_config_error() {
        assert!(matches!(load("/nonexistent/model.json"), Err(CliError::Config(_))));
    }
}
