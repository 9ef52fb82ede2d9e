//! Shared argument groups, their resolution into model objects, and the
//! resolved-configuration echo that heads every output file.

use clap::{Args, ValueEnum};
use icw::criticality::Regime;
use icw::model::ModelKind;
use icw::weights::{WeightLaw, WeightSequence};
use serde::Serialize;
use std::collections::BTreeMap;

use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    /// annealed Ising model on the generalized random graph (theta = sinh beta)
    Grg,
    /// rank-1 inhomogeneous Curie-Weiss model (theta = beta)
    Icw,
}

impl KindArg {
    pub fn kind(self) -> ModelKind {
        match self {
            KindArg::Grg => ModelKind::AnnealedGrg,
            KindArg::Icw => ModelKind::RankOneIcw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Model kind.
    #[arg(long, value_enum, default_value = "icw")]
    pub model: KindArg,

    /// Homogeneous weights w = 1.
    #[arg(long, conflicts_with = "tau")]
    pub homogeneous: bool,

    /// Power-law tail exponent; with --n builds the deterministic sequence
    /// w_i = cw (n/i)^(1/(tau-1)), without --n selects the limiting law.
    #[arg(long)]
    pub tau: Option<f64>,

    /// Weight scale constant.
    #[arg(long, default_value_t = 1.0)]
    pub cw: f64,

    /// Number of vertices.
    #[arg(long)]
    pub n: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TempArgs {
    /// Inverse temperature.
    #[arg(long, conflicts_with_all = ["beta_offset", "theta"])]
    pub beta: Option<f64>,

    /// Inverse temperature expressed as beta_cN + offset (offset may be
    /// negative), against the critical value of the resolved weights.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "theta")]
    pub beta_offset: Option<f64>,

    /// Effective coupling, bypassing the kind map.
    #[arg(long)]
    pub theta: Option<f64>,

    /// External field B >= 0.
    #[arg(long, default_value_t = 0.0)]
    pub b_field: f64,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,

    /// Output format.
    #[arg(long, value_enum, default_value = "csv")]
    pub format: FormatArg,
}

/// Weights resolved from the command line.
pub enum Weights {
    Finite(WeightSequence),
    Limiting { tau: f64, cw: f64 },
}

impl Weights {
    pub fn resolve(args: &ModelArgs, need_sequence: bool) -> Result<Self, CliError> {
        if args.homogeneous {
            let n = args.n.unwrap_or(1);
            return Ok(Weights::Finite(
                WeightSequence::homogeneous(n, 1.0).map_err(CliError::config)?,
            ));
        }
        let Some(tau) = args.tau else {
            return Err(CliError::Config(
                "weights unspecified: pass --homogeneous or --tau (optionally with --n)".into(),
            ));
        };
        match args.n {
            Some(n) => Ok(Weights::Finite(
                WeightSequence::power_law(n, tau, args.cw).map_err(CliError::config)?,
            )),
            None if need_sequence => Err(CliError::Config(
                "this command works on a finite sequence: pass --n".into(),
            )),
            None => {
                // validated by WeightLaw::power_law below
                WeightLaw::power_law(tau, args.cw).map_err(CliError::config)?;
                Ok(Weights::Limiting { tau, cw: args.cw })
            }
        }
    }

    pub fn law(&self) -> WeightLaw {
        match self {
            Weights::Finite(ws) => WeightLaw::finite(ws.clone()),
            Weights::Limiting { tau, cw } => WeightLaw::power_law(*tau, *cw).expect("validated"),
        }
    }

    pub fn sequence(&self) -> Result<&WeightSequence, CliError> {
        match self {
            Weights::Finite(ws) => Ok(ws),
            Weights::Limiting { .. } => Err(CliError::Config(
                "this command works on a finite sequence: pass --n".into(),
            )),
        }
    }

    pub fn nu(&self) -> f64 {
        self.law().moments().nu
    }

    pub fn regime(&self) -> Regime {
        icw::criticality::regime_of_law(&self.law())
    }

    pub fn describe(&self) -> &'static str {
        match self {
            Weights::Finite(ws) if ws.power_law_tag().is_some() => "power_law_sequence",
            Weights::Finite(_) => "homogeneous",
            Weights::Limiting { .. } => "limiting_power_law",
        }
    }
}

/// Resolved temperature: `(beta, theta)`.
pub fn resolve_temperature(
    args: &TempArgs,
    kind: ModelKind,
    nu: f64,
    default_critical: bool,
) -> Result<(f64, f64), CliError> {
    let beta_c = kind.beta_of_theta(1.0 / nu);
    let beta = match (args.beta, args.beta_offset, args.theta) {
        (Some(b), None, None) => b,
        (None, Some(d), None) => beta_c + d,
        (None, None, Some(t)) => kind.beta_of_theta(t),
        (None, None, None) if default_critical => beta_c,
        (None, None, None) => {
            return Err(CliError::Config(
                "temperature unspecified: pass --beta, --beta-offset or --theta".into(),
            ))
        }
        _ => {
            return Err(CliError::Config(
                "pass at most one of --beta, --beta-offset, --theta".into(),
            ))
        }
    };
    if let (None, None, Some(t)) = (args.beta, args.beta_offset, args.theta) {
        return Ok((beta, t));
    }
    Ok((beta, kind.theta_of_beta(beta)))
}

/// Fully resolved run configuration, echoed into every output header.
#[derive(Serialize)]
pub struct RunConfig {
    pub command: &'static str,
    pub model: &'static str,
    pub weights: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cw: Option<f64>,
    pub nu: f64,
    pub beta_c: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub b_field: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tol: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// command-specific parameters, in deterministic key order
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<&'static str, serde_json::Value>,
}

impl RunConfig {
    pub fn new(command: &'static str, kind: ModelKind, weights: &Weights) -> Self {
        let nu = weights.nu();
        let (n, tau, cw) = match weights {
            Weights::Finite(ws) => {
                let tag = ws.power_law_tag();
                (Some(ws.n()), tag.map(|t| t.tau), tag.map(|t| t.cw))
            }
            Weights::Limiting { tau, cw } => (None, Some(*tau), Some(*cw)),
        };
        RunConfig {
            command,
            model: match kind {
                ModelKind::AnnealedGrg => "grg",
                ModelKind::RankOneIcw => "icw",
            },
            weights: weights.describe(),
            n,
            tau,
            cw,
            nu,
            beta_c: kind.beta_of_theta(1.0 / nu),
            beta: None,
            theta: None,
            b_field: None,
            tol: None,
            seed: None,
            samples: None,
            params: BTreeMap::new(),
        }
    }

    pub fn param(&mut self, key: &'static str, value: impl Serialize) {
        self.params.insert(
            key,
            serde_json::to_value(value).expect("parameter serializes"),
        );
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(self).expect("config serializes")
    }
}
