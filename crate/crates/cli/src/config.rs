//! Run configuration: strict JSON, unknown keys rejected.

use std::collections::BTreeSet;
use std::path::Path;

use serde::{Deserialize, Serialize};
use specdamp_core::linalg::DenseMatrix;
use specdamp_core::model::{beam_assemble, perturbed_kelvin_voigt, BeamSpec, DampingPatch};
use specdamp_core::{Model, ToleranceProfile};

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Analysis {
    Spectrum,
    Krein,
    Conditions,
    Semigroup,
    Accumulation,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PatchConfig {
    pub a: f64,
    pub from: f64,
    pub to: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Beam {
        #[serde(rename = "E")]
        e: f64,
        #[serde(rename = "N")]
        n: usize,
        patches: Vec<PatchConfig>,
    },
    Generic {
        #[serde(rename = "K")]
        k: Vec<Vec<f64>>,
        #[serde(rename = "C")]
        c: Vec<Vec<f64>>,
    },
    Perturbed {
        #[serde(rename = "K")]
        k: Vec<Vec<f64>>,
        alpha: f64,
        #[serde(rename = "B")]
        b: Vec<Vec<f64>>,
    },
}

/// Initial state for `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialState {
    /// Real part of eigenvector `k` in the spectrum ordering.
    Eigenvector(usize),
    /// Real part of `Σ w_k v_k`.
    ModalWeights(Vec<f64>),
    /// Stacked `(position, velocity)`.
    Vector(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub x0: InitialState,
    pub t_max: f64,
    #[serde(default = "default_samples")]
    pub samples: usize,
}

fn default_samples() -> usize {
    201
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AccumulationConfig {
    pub orders: Vec<usize>,
    #[serde(default = "default_radius")]
    pub radius: f64,
}

fn default_radius() -> f64 {
    0.01
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResolventConfig {
    #[serde(default = "default_re_offset")]
    pub re_offset: f64,
    #[serde(default = "default_im_min")]
    pub im_min: f64,
    #[serde(default = "default_im_max")]
    pub im_max: f64,
    #[serde(default = "default_im_count")]
    pub count: usize,
}

fn default_re_offset() -> f64 {
    1.0
}
fn default_im_min() -> f64 {
    0.1
}
fn default_im_max() -> f64 {
    1e4
}
fn default_im_count() -> usize {
    41
}

impl Default for ResolventConfig {
    fn default() -> Self {
        Self {
            re_offset: default_re_offset(),
            im_min: default_im_min(),
            im_max: default_im_max(),
            count: default_im_count(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub analyses: Vec<Analysis>,
    #[serde(default)]
    pub tolerances: ToleranceProfile,
    #[serde(default)]
    pub seed: u64,
    /// Values standing in for the essential spectrum of a generic model.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub essential_spectrum: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub accumulation: Option<AccumulationConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resolvent: Option<ResolventConfig>,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::invalid(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self =
            serde_json::from_str(text).map_err(|e| CliError::invalid(format!("malformed config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.analyses.is_empty() {
            return Err(CliError::invalid("at least one analysis must be requested"));
        }
        if let Some(name) = self.tolerances.first_invalid() {
            return Err(CliError::invalid(format!("tolerance {name} must be positive and finite")));
        }
        if let Some(s) = &self.simulate {
            if !s.t_max.is_finite() || s.t_max < 0.0 {
                return Err(CliError::invalid("simulate.t_max must be finite and nonnegative"));
            }
            if s.samples < 2 {
                return Err(CliError::invalid("simulate.samples must be at least 2"));
            }
        }
        if let Some(r) = &self.resolvent {
            if !(r.im_min > 0.0 && r.im_max > r.im_min && r.count >= 2 && r.re_offset > 0.0) {
                return Err(CliError::invalid(
                    "resolvent grid needs 0 < im_min < im_max, count ≥ 2 and re_offset > 0",
                ));
            }
        }
        if self.requested().contains(&Analysis::Accumulation) && !matches!(self.model, ModelConfig::Beam { .. }) {
            return Err(CliError::invalid("the accumulation analysis needs a beam model"));
        }
        Ok(())
    }

    pub fn requested(&self) -> BTreeSet<Analysis> {
        self.analyses.iter().copied().collect()
    }

    pub fn build_model(&self) -> Result<Model, CliError> {
        let model = match &self.model {
            ModelConfig::Beam { e, n, patches } => {
                let patches = patches
                    .iter()
                    .map(|p| DampingPatch {
                        a: p.a,
                        from: p.from,
                        to: p.to,
                    })
                    .collect();
                beam_assemble(&BeamSpec::new(*e, patches, *n)?)?
            }
            ModelConfig::Generic { k, c } => Model::new(matrix("K", k)?, matrix("C", c)?)?,
            ModelConfig::Perturbed { k, alpha, b } => perturbed_kelvin_voigt(matrix("K", k)?, *alpha, matrix("B", b)?)?,
        };
        Ok(model)
    }

    pub fn beam_spec(&self) -> Result<Option<BeamSpec<f64>>, CliError> {
        match &self.model {
            ModelConfig::Beam { e, n, patches } => {
                let patches = patches
                    .iter()
                    .map(|p| DampingPatch {
                        a: p.a,
                        from: p.from,
                        to: p.to,
                    })
                    .collect();
                Ok(Some(BeamSpec::new(*e, patches, *n)?))
            }
            _ => Ok(None),
        }
    }
}

fn matrix(name: &str, rows: &[Vec<f64>]) -> Result<DenseMatrix<f64>, CliError> {
    if rows.is_empty() {
        return Err(CliError::invalid(format!("matrix {name} is empty")));
    }
    if rows.iter().flatten().any(|x| !x.is_finite()) {
        return Err(CliError::invalid(format!("matrix {name} has non-finite entries")));
    }
    DenseMatrix::from_rows(rows).map_err(|e| CliError::invalid(format!("matrix {name}: {e}")))
}
