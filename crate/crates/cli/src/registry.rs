//! Named model manifolds available from the command line.

use crate::error::CliError;
use std::f64::consts::TAU;
use tube_core::models::builtins;
use tube_core::models::expreg::ExpRegression;
use tube_core::models::mixture::{NormalLocation, ScoreFamily, ScoreManifold};
use tube_core::quadrature::DomainRect;
use tube_core::{Dataset, EvalMode, Manifold};

/// Static description of one selectable model.
pub struct ModelEntry {
    pub name: &'static str,
    alias: Option<&'static str>,
    pub dim: usize,
    pub default_mode: EvalMode,
    /// Natural parameter box, for models that have one; others require
    /// explicit `--limits`.
    pub default_limits: Option<&'static [f64]>,
    /// Axes whose endpoints are identified by construction.
    pub periodic_axes: &'static [usize],
    pub needs_data: bool,
    pub summary: &'static str,
}

const MODELS: &[ModelEntry] = &[
    ModelEntry {
        name: "arc",
        alias: None,
        dim: 1,
        default_mode: EvalMode::Vector,
        default_limits: None,
        periodic_axes: &[],
        needs_data: false,
        summary: "unit-speed great-circle arc on the sphere in R^3",
    },
    ModelEntry {
        name: "circle",
        alias: None,
        dim: 1,
        default_mode: EvalMode::Vector,
        default_limits: Some(&[0.0, TAU]),
        periodic_axes: &[0],
        needs_data: false,
        summary: "full great circle on the sphere in R^3 (periodic)",
    },
    ModelEntry {
        name: "clifford",
        alias: None,
        dim: 2,
        default_mode: EvalMode::Vector,
        default_limits: None,
        periodic_axes: &[],
        needs_data: false,
        summary: "Clifford-torus patch on the sphere in R^4",
    },
    ModelEntry {
        name: "gnomonic",
        alias: None,
        dim: 2,
        default_mode: EvalMode::Vector,
        default_limits: None,
        periodic_axes: &[],
        needs_data: false,
        summary: "central (gnomonic) chart of the sphere in R^3",
    },
    ModelEntry {
        name: "polar-rectangle",
        alias: Some("polar"),
        dim: 2,
        default_mode: EvalMode::Vector,
        default_limits: None,
        periodic_axes: &[],
        needs_data: false,
        summary: "polar-angle rectangle on the sphere in R^3",
    },
    ModelEntry {
        name: "torus3",
        alias: None,
        dim: 3,
        default_mode: EvalMode::Vector,
        default_limits: None,
        periodic_axes: &[],
        needs_data: false,
        summary: "flat three-torus chart in R^6",
    },
    ModelEntry {
        name: "mixture",
        alias: None,
        dim: 1,
        default_mode: EvalMode::Covariance,
        default_limits: Some(&[-3.0, 3.0]),
        periodic_axes: &[],
        needs_data: false,
        summary: "normal-location mixture score-scan manifold",
    },
    ModelEntry {
        name: "expreg",
        alias: None,
        dim: 1,
        default_mode: EvalMode::Vector,
        default_limits: None,
        periodic_axes: &[],
        needs_data: true,
        summary: "exponential regression curve built from a data file",
    },
];

pub fn lookup(name: &str) -> Option<&'static ModelEntry> {
    MODELS
        .iter()
        .find(|m| m.name == name || m.alias == Some(name))
}

pub fn known_names() -> String {
    let names: Vec<&str> = MODELS.iter().map(|m| m.name).collect();
    names.join(", ")
}

pub fn build(entry: &ModelEntry, data: Option<Dataset>) -> Result<Box<dyn Manifold>, CliError> {
    match entry.name {
        "mixture" => Ok(Box::new(ScoreManifold::new(NormalLocation))),
        "expreg" => {
            let data =
                data.ok_or_else(|| CliError::usage("model 'expreg' requires --data <file>"))?;
            Ok(Box::new(ExpRegression::new(data)?))
        }
        name => {
            let key = if name == "polar-rectangle" {
                "polar"
            } else {
                name
            };
            builtins::boxed(key).ok_or_else(|| CliError::usage(format!("unknown model '{name}'")))
        }
    }
}

/// Boundary mass a model contributes beyond the visible rectangle faces
/// (the mixture scan manifold hides two arc endpoints at its gauge zero).
pub fn auto_boundary_increment(entry: &ModelEntry, domain: &DomainRect) -> f64 {
    if entry.name == "mixture" {
        NormalLocation.hidden_boundary_increment(domain)
    } else {
        0.0
    }
}
