//! The nine experiment subcommands.

use crate::config::{resolve_temperature, FormatArg, ModelArgs, OutputArgs, RunConfig, TempArgs, Weights};
use crate::output::{write_out, Report};
use crate::CliError;
use clap::{Args, ValueEnum};
use icw::clt::enumerate::{enumerate_spin_law, Measure};
use icw::clt::limit::{
    density_normalizer, limit_constant_c, limit_density_f, limit_mgf, window_density, LimitLaw,
};
use icw::clt::sample::exact_sample;
use icw::clt::{gn_limit_check, log_partition, mgf_ratio, GnFunction};
use icw::criticality::{
    critical_beta, exponent_table, fit_exponent, geometric_grid, magnetization_at_criticality,
    spontaneous_magnetization, susceptibility_offset_product, CriticalSide, FitTransform, Regime,
};
use icw::meanfield::{solve_fixed_point, thermo_point};
use icw::model::{ModelKind, ModelSpec};
use icw::weights::{MomentSet, WeightSequence};

fn spec_from(kind: ModelKind, beta: f64, theta: f64, b: f64) -> Result<ModelSpec, CliError> {
    // keep theta exactly as resolved so GRG/ICW equivalence is bit-exact
    let _ = beta;
    ModelSpec::from_theta(kind, theta, b).map_err(CliError::config)
}

fn lambda_for(regime: Regime) -> f64 {
    exponent_table(regime).expect("regime validated").lambda
}

fn moments_of(weights: &Weights) -> MomentSet {
    weights.law().moments()
}

// ---------------------------------------------------------------- critical-point

#[derive(Debug, Args)]
pub struct CriticalPointArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

pub fn critical_point(args: CriticalPointArgs) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    let weights = Weights::resolve(&args.model, false)?;
    let config = RunConfig::new("critical-point", kind, &weights);

    let mut report = Report::new(config, vec!["nu", "beta_c"]);
    let nu = weights.nu();
    let beta_c = critical_beta(kind, nu).map_err(CliError::numerical)?;
    report.row(vec![nu, beta_c]);

    // the limiting counterpart, when the finite sequence carries a tag
    if let Weights::Finite(ws) = &weights {
        if let Some(tag) = ws.power_law_tag() {
            let lim = icw::weights::limiting_moments(tag.tau, tag.cw).map_err(CliError::config)?;
            let beta_c_lim = critical_beta(kind, lim.nu).map_err(CliError::numerical)?;
            report.summary("nu_limiting", lim.nu);
            report.summary("beta_c_limiting", beta_c_lim);
        }
    }
    report.write(&args.out.output, args.out.format)
}

// ---------------------------------------------------------------- magnetization-curve

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SweepAxis {
    Beta,
    Field,
}

#[derive(Debug, Args)]
pub struct CurveArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub temp: TempArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    /// Which axis to sweep.
    #[arg(long, value_enum, default_value = "field")]
    pub sweep: SweepAxis,

    #[arg(long)]
    pub from: f64,
    #[arg(long)]
    pub to: f64,
    #[arg(long, default_value_t = 25)]
    pub points: usize,

    /// Geometric instead of linear spacing (both ends must be positive).
    #[arg(long)]
    pub log_grid: bool,

    /// Fixed-point tolerance.
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
}

fn sweep_grid(from: f64, to: f64, points: usize, log_grid: bool) -> Result<Vec<f64>, CliError> {
    if points < 2 || !(to > from) {
        return Err(CliError::Config(
            "sweep needs --points >= 2 and --to > --from".into(),
        ));
    }
    if log_grid {
        if !(from > 0.0) {
            return Err(CliError::Config("--log-grid needs --from > 0".into()));
        }
        Ok((0..points)
            .map(|i| from * (to / from).powf(i as f64 / (points - 1) as f64))
            .collect())
    } else {
        Ok((0..points)
            .map(|i| from + (to - from) * i as f64 / (points - 1) as f64)
            .collect())
    }
}

pub fn magnetization_curve(args: CurveArgs) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    let weights = Weights::resolve(&args.model, false)?;
    let law = weights.law();
    let grid = sweep_grid(args.from, args.to, args.points, args.log_grid)?;

    let mut config = RunConfig::new("magnetization-curve", kind, &weights);
    config.tol = Some(args.tol);
    config.param("sweep", format!("{:?}", args.sweep).to_lowercase());
    config.param("from", args.from);
    config.param("to", args.to);
    config.param("points", args.points);
    config.param("log_grid", args.log_grid);

    let mut points = Vec::new();
    match args.sweep {
        SweepAxis::Field => {
            let (beta, theta) = resolve_temperature(&args.temp, kind, weights.nu(), true)?;
            config.beta = Some(beta);
            config.theta = Some(theta);
            for &b in &grid {
                let spec = spec_from(kind, beta, theta, b)?;
                points.push((beta, curve_point(&spec, &law, args.tol)?));
            }
        }
        SweepAxis::Beta => {
            let b = args.temp.b_field;
            config.b_field = Some(b);
            for &beta in &grid {
                let spec = ModelSpec::new(kind, beta, b).map_err(CliError::config)?;
                points.push((beta, curve_point(&spec, &law, args.tol)?));
            }
        }
    }

    let mut report = Report::new(
        config,
        vec!["beta", "B", "z_star", "magnetization", "susceptibility"],
    );
    for (beta, p) in points {
        report.row(vec![beta, p.b_field, p.z_star, p.magnetization, p.susceptibility]);
    }
    report.write(&args.out.output, args.out.format)
}

/// A thermo point where the susceptibility is written as `inf` exactly at
/// the critical point instead of aborting the sweep.
fn curve_point(
    spec: &ModelSpec,
    law: &icw::weights::WeightLaw,
    tol: f64,
) -> Result<icw::meanfield::ThermoPoint, CliError> {
    match thermo_point(spec, law, tol) {
        Ok(p) => Ok(p),
        Err(icw::Error::CriticalDivergence) => {
            let fp = solve_fixed_point(spec, law, tol).map_err(CliError::numerical)?;
            Ok(icw::meanfield::ThermoPoint {
                beta: spec.beta,
                b_field: spec.b_field,
                z_star: fp.z_star,
                magnetization: icw::meanfield::magnetization(spec, law, fp.z_star),
                susceptibility: f64::INFINITY,
            })
        }
        Err(e) => Err(CliError::numerical(e)),
    }
}

// ---------------------------------------------------------------- exponent-fit

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExponentArg {
    /// spontaneous magnetization against beta - beta_c
    Beta,
    /// critical magnetization against B
    Delta,
    /// subcritical susceptibility divergence
    Gamma,
    /// supercritical susceptibility divergence
    GammaPrime,
    /// tau = 5 log-corrected delta form
    DeltaLog5,
}

#[derive(Debug, Args)]
pub struct ExponentFitArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    #[arg(long, value_enum)]
    pub exponent: ExponentArg,

    /// Window start (abscissa: B or beta-offset, exponent-specific default).
    #[arg(long)]
    pub from: Option<f64>,
    /// Window end.
    #[arg(long)]
    pub to: Option<f64>,
    #[arg(long, default_value_t = 12)]
    pub points_per_decade: usize,

    #[arg(long, default_value_t = 1e-13)]
    pub tol: f64,

    /// Also write the fitted curve as CSV to this path.
    #[arg(long)]
    pub curve_output: Option<std::path::PathBuf>,
}

pub fn exponent_fit(args: ExponentFitArgs) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    let weights = Weights::resolve(&args.model, false)?;
    let law = weights.law();
    let regime = weights.regime();
    let table = exponent_table(regime).map_err(CliError::config)?;

    let (default_window, expected, name): ((f64, f64), f64, &str) = match args.exponent {
        ExponentArg::Delta => ((1e-6, 1e-3), 1.0 / table.delta_exp, "delta"),
        ExponentArg::Beta => ((1e-5, 1e-2), table.beta_exp, "beta"),
        ExponentArg::Gamma => ((1e-4, 1e-2), -table.gamma_exp, "gamma"),
        ExponentArg::GammaPrime => ((1e-4, 1e-2), -table.gamma_prime_exp, "gamma_prime"),
        ExponentArg::DeltaLog5 => ((1e-8, 1e-4), 1.0, "delta_log5"),
    };
    if args.exponent == ExponentArg::DeltaLog5 && regime != Regime::Tau5LogCorrected {
        return Err(CliError::Config(
            "--exponent delta-log5 needs the tau = 5 limiting law (--tau 5, no --n)".into(),
        ));
    }
    let lo = args.from.unwrap_or(default_window.0);
    let hi = args.to.unwrap_or(default_window.1);
    if !(lo > 0.0 && hi > lo) {
        return Err(CliError::Config("fit window must satisfy 0 < from < to".into()));
    }
    let grid = geometric_grid(lo, hi, args.points_per_decade);

    let curve = match args.exponent {
        ExponentArg::Delta | ExponentArg::DeltaLog5 => {
            magnetization_at_criticality(kind, &law, &grid, args.tol)
        }
        ExponentArg::Beta => spontaneous_magnetization(kind, &law, &grid, args.tol),
        ExponentArg::Gamma | ExponentArg::GammaPrime => {
            let side = if args.exponent == ExponentArg::Gamma {
                CriticalSide::Below
            } else {
                CriticalSide::Above
            };
            // fit chi itself, so the expected log-log slope is -1
            susceptibility_offset_product(kind, &law, &grid, side, args.tol)
                .map(|pts| pts.into_iter().map(|(d, prod)| (d, prod / d)).collect())
        }
    }
    .map_err(CliError::numerical)?;

    let transform = if args.exponent == ExponentArg::DeltaLog5 {
        FitTransform::LogCorrected(1.0 / 3.0)
    } else {
        FitTransform::LogLog
    };
    let fit = fit_exponent(&curve, transform).map_err(CliError::numerical)?;

    let mut config = RunConfig::new("exponent-fit", kind, &weights);
    config.tol = Some(args.tol);
    config.param("from", lo);
    config.param("to", hi);
    config.param("points_per_decade", args.points_per_decade);

    let doc = serde_json::json!({
        "config": config.to_json(),
        "regime": regime_label(regime),
        "exponent_name": name,
        "slope": fit.slope,
        "expected": expected,
        "window": [fit.window.0, fit.window.1],
        "r_squared": fit.r_squared,
    });
    let mut body = serde_json::to_string_pretty(&doc).expect("fit report serializes");
    body.push('\n');
    match args.out.format {
        FormatArg::Json | FormatArg::Csv => write_out(&args.out.output, &body)?,
    }

    if let Some(path) = &args.curve_output {
        let mut curve_config = RunConfig::new("exponent-fit", kind, &weights);
        curve_config.param("exponent", name);
        let mut report = Report::new(curve_config, vec!["x", "y"]);
        for (x, y) in curve {
            report.row(vec![x, y]);
        }
        report.write(&Some(path.clone()), FormatArg::Csv)?;
    }
    Ok(())
}

fn regime_label(regime: Regime) -> String {
    match regime {
        Regime::FiniteFourth => "finite_fourth".into(),
        Regime::PowerLaw(tau) => format!("powerlaw({tau})"),
        Regime::Tau5LogCorrected => "tau5_logcorrected".into(),
    }
}

// ---------------------------------------------------------------- clt-density / window

#[derive(Debug, Args)]
pub struct DensityArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    /// Scaling-window offset coefficient b.
    #[arg(long, default_value_t = 0.0)]
    pub window_b: f64,

    /// Series truncation tolerance for the power-law rate function.
    #[arg(long, default_value_t = 1e-12)]
    pub truncation_tol: f64,

    #[arg(long, default_value_t = 6.0)]
    pub x_max: f64,
    #[arg(long, default_value_t = 201)]
    pub points: usize,
}

pub fn clt_density(args: DensityArgs, command: &'static str) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    let weights = Weights::resolve(&args.model, false)?;
    let mom = moments_of(&weights);
    if args.points < 2 {
        return Err(CliError::Config("--points must be at least 2".into()));
    }

    let law = match weights.regime() {
        Regime::FiniteFourth => LimitLaw::from_moments(&mom).map_err(CliError::config)?,
        Regime::PowerLaw(tau) => LimitLaw::power_law(tau).map_err(CliError::config)?,
        Regime::Tau5LogCorrected => {
            return Err(CliError::Config(
                "the limit density is defined for tau in (3,5) or finite fourth moment".into(),
            ))
        }
    }
    .with_window(args.window_b)
    .with_truncation_tol(args.truncation_tol)
    .map_err(CliError::config)?;

    let normalizer = density_normalizer(&law, &mom).map_err(CliError::numerical)?;
    let tail_c = limit_constant_c(&law).map_err(CliError::numerical)?;

    let mut config = RunConfig::new(command, kind, &weights);
    config.param("window_b", args.window_b);
    config.param("truncation_tol", args.truncation_tol);
    config.param("x_max", args.x_max);
    config.param("points", args.points);

    let mut report = Report::new(
        config,
        vec!["x", "f", "unnormalized_density", "normalized_density"],
    );
    report.summary("normalizer", normalizer);
    report.summary("tail_constant", tail_c);
    for i in 0..args.points {
        let x = -args.x_max + 2.0 * args.x_max * i as f64 / (args.points - 1) as f64;
        let f = limit_density_f(x, &law);
        let d = window_density(x, &law, &mom);
        report.row(vec![x, f, d, d / normalizer]);
    }
    report.write(&args.out.output, args.out.format)
}

// ---------------------------------------------------------------- clt-check

#[derive(Debug, Args)]
pub struct CltCheckArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub temp: TempArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    /// Scaled-exponent evaluation points.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1,2")]
    pub z: Vec<f64>,

    /// Moment-generating-function arguments.
    #[arg(long, value_delimiter = ',', default_value = "0.5,1")]
    pub r: Vec<f64>,

    /// Quadrature tolerance for the finite-N integrals.
    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
}

pub fn clt_check(args: CltCheckArgs) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    let weights = Weights::resolve(&args.model, true)?;
    let ws = weights.sequence()?.clone();
    let regime = weights.regime();
    let (beta, theta) = resolve_temperature(&args.temp, kind, weights.nu(), true)?;
    if args.temp.b_field != 0.0 {
        return Err(CliError::Config("clt-check runs at B = 0".into()));
    }
    let gn = GnFunction::new(ws, theta, lambda_for(regime)).map_err(CliError::config)?;

    let mom = moments_of(&weights);
    let limit_law = match regime {
        Regime::FiniteFourth => LimitLaw::from_moments(&mom).map_err(CliError::config)?,
        Regime::PowerLaw(tau) => LimitLaw::power_law(tau).map_err(CliError::config)?,
        Regime::Tau5LogCorrected => {
            return Err(CliError::Config(
                "the scaling limit is defined for tau in (3,5) or finite fourth moment".into(),
            ))
        }
    };

    let mut config = RunConfig::new("clt-check", kind, &weights);
    config.beta = Some(beta);
    config.theta = Some(theta);
    config.param("z", args.z.clone());
    config.param("r", args.r.clone());
    config.param("quad_tol", args.quad_tol);

    let mut report = Report::new(
        config,
        vec!["is_mgf", "z", "r", "finite_n", "limit", "abs_diff"],
    );
    for &z in &args.z {
        let (lhs, rhs) = gn_limit_check(&gn, z, 0.0, regime).map_err(CliError::numerical)?;
        report.row(vec![0.0, z, 0.0, lhs, rhs, (lhs - rhs).abs()]);
    }
    for &r in &args.r {
        let finite = mgf_ratio(r, &gn, args.quad_tol).map_err(CliError::numerical)?;
        let lim = limit_mgf(r, &limit_law, &mom).map_err(CliError::numerical)?;
        report.row(vec![1.0, 0.0, r, finite, lim, (finite - lim).abs()]);
    }
    report.write(&args.out.output, args.out.format)
}

// ---------------------------------------------------------------- sample

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub temp: TempArgs,

    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,

    /// Output file; stdout when omitted.
    #[arg(long)]
    pub output: Option<std::path::PathBuf>,
}

pub fn sample(args: SampleArgs) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    let weights = Weights::resolve(&args.model, true)?;
    let ws = weights.sequence()?.clone();
    let (beta, theta) = resolve_temperature(&args.temp, kind, weights.nu(), true)?;
    if args.temp.b_field != 0.0 {
        return Err(CliError::Config("exact sampling runs at B = 0".into()));
    }
    let spec = spec_from(kind, beta, theta, 0.0)?;

    let mut config = RunConfig::new("sample", kind, &weights);
    config.beta = Some(beta);
    config.theta = Some(theta);
    config.b_field = Some(0.0);
    config.seed = Some(args.seed);
    config.samples = Some(args.samples);

    let draws = exact_sample(&ws, &spec, args.samples, args.seed).map_err(CliError::numerical)?;
    let mut body = format!("# config {}\n", config.to_json());
    for s in draws {
        body.push_str(&format!("{s}\n"));
    }
    write_out(&args.output, &body)
}

// ---------------------------------------------------------------- enumerate

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MeasureArg {
    Tilde,
    Exact,
    Both,
}

#[derive(Debug, Args)]
pub struct EnumerateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub temp: TempArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    #[arg(long, value_enum, default_value = "tilde")]
    pub measure: MeasureArg,
}

pub fn enumerate(args: EnumerateArgs) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    let weights = Weights::resolve(&args.model, true)?;
    let ws = weights.sequence()?.clone();
    let (beta, theta) = resolve_temperature(&args.temp, kind, weights.nu(), true)?;
    if args.measure != MeasureArg::Tilde && kind != ModelKind::AnnealedGrg {
        return Err(CliError::Config(
            "the exact annealed measure needs --model grg (for the rank-1 model the two measures coincide)".into(),
        ));
    }
    let spec = spec_from(kind, beta, theta, args.temp.b_field)?;

    let mut config = RunConfig::new("enumerate", kind, &weights);
    config.beta = Some(beta);
    config.theta = Some(theta);
    config.b_field = Some(args.temp.b_field);
    config.param(
        "measure",
        match args.measure {
            MeasureArg::Tilde => "tilde",
            MeasureArg::Exact => "exact",
            MeasureArg::Both => "both",
        },
    );

    match args.measure {
        MeasureArg::Tilde | MeasureArg::Exact => {
            let m = if args.measure == MeasureArg::Tilde {
                Measure::Tilde
            } else {
                Measure::Exact
            };
            let law = enumerate_spin_law(&ws, &spec, m).map_err(CliError::numerical)?;
            let mut report = Report::new(config, vec!["s", "probability"]);
            for (s, p) in law.support() {
                report.row(vec![s as f64, p]);
            }
            report.write(&args.out.output, args.out.format)
        }
        MeasureArg::Both => {
            let tilde = enumerate_spin_law(&ws, &spec, Measure::Tilde).map_err(CliError::numerical)?;
            let exact = enumerate_spin_law(&ws, &spec, Measure::Exact).map_err(CliError::numerical)?;
            let tv = tilde.total_variation(&exact).map_err(CliError::numerical)?;
            let mut report = Report::new(config, vec!["s", "p_tilde", "p_exact"]);
            report.summary("total_variation", tv);
            for ((s, pt), (_, pe)) in tilde.support().zip(exact.support()) {
                report.row(vec![s as f64, pt, pe]);
            }
            report.write(&args.out.output, args.out.format)
        }
    }
}

// ---------------------------------------------------------------- partition

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub out: OutputArgs,

    /// Sizes to sweep; theta is pinned to the critical sequence 1/nu_N of
    /// each size.
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000,1000000")]
    pub n_list: Vec<usize>,

    #[arg(long, default_value_t = 1e-8)]
    pub quad_tol: f64,
}

pub fn partition(args: PartitionArgs) -> Result<(), CliError> {
    let kind = args.model.model.kind();
    if args.n_list.is_empty() {
        return Err(CliError::Config("--n-list must not be empty".into()));
    }
    // resolve per-size weights from the same family flags
    let family = |n: usize| -> Result<WeightSequence, CliError> {
        let m = ModelArgs {
            model: args.model.model,
            homogeneous: args.model.homogeneous,
            tau: args.model.tau,
            cw: args.model.cw,
            n: Some(n),
        };
        Ok(Weights::resolve(&m, true)?.sequence()?.clone())
    };

    let probe = Weights::resolve(
        &ModelArgs {
            model: args.model.model,
            homogeneous: args.model.homogeneous,
            tau: args.model.tau,
            cw: args.model.cw,
            n: Some(args.n_list[0]),
        },
        true,
    )?;
    let regime = probe.regime();
    let table = exponent_table(regime).map_err(CliError::config)?;
    let lambda = table.lambda;
    // finite-size exponent of Z / 2^N at the critical sequence:
    // sqrt(N/2pi) * N^{-1/(delta+1)} from the auxiliary-field representation
    let size_exp = 0.5 - 1.0 / (table.delta_exp + 1.0);

    let mut config = RunConfig::new("partition", kind, &probe);
    config.param("n_list", args.n_list.clone());
    config.param("quad_tol", args.quad_tol);
    config.param("size_exponent", size_exp);

    let mut report = Report::new(config, vec!["n", "log_z_tilde", "c_n", "diff_prev"]);
    report.summary(
        "c_n_definition",
        format!("log_z - n*log(2) - {size_exp}*log(n)"),
    );
    let mut prev: Option<f64> = None;
    for &n in &args.n_list {
        let ws = family(n)?;
        let nu_n = ws.empirical_moments().nu;
        let theta = 1.0 / nu_n;
        let gn = GnFunction::new(ws, theta, lambda).map_err(CliError::config)?;
        let lp = log_partition(&gn, args.quad_tol).map_err(CliError::numerical)?;
        let c_n = lp - n as f64 * std::f64::consts::LN_2 - size_exp * (n as f64).ln();
        let diff = prev.map(|p| c_n - p).unwrap_or(f64::NAN);
        report.row(vec![n as f64, lp, c_n, diff]);
        prev = Some(c_n);
    }
    report.write(&args.out.output, args.out.format)
}

// ---------------------------------------------------------------- dispatch helpers

pub fn window(args: DensityArgs) -> Result<(), CliError> {
    clt_density(args, "window")
}
