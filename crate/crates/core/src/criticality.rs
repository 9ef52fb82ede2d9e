//! Critical temperatures, the exponent table, regression-based exponent
//! estimation, the gamma amplitude and joint scaling checks.

use crate::error::{Error, Result};
use crate::meanfield::{magnetization, solve_fixed_point, susceptibility};
use crate::model::{ModelKind, ModelSpec};
use crate::weights::{MomentSet, WeightLaw, WeightSequence};
use serde::Serialize;

/// Universality regime of the weight law.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    FiniteFourth,
    /// Power-law tail with exponent `tau` in (3,5).
    PowerLaw(f64),
    /// Boundary case `tau = 5`: mean-field exponents with log corrections.
    Tau5LogCorrected,
}

/// Critical exponents and the total-spin scaling exponent `lambda`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExponentTable {
    pub regime: Regime,
    pub beta_exp: f64,
    pub delta_exp: f64,
    pub gamma_exp: f64,
    pub gamma_prime_exp: f64,
    /// `lambda = delta / (delta + 1)`.
    pub lambda: f64,
}

/// The exponent table:
/// `(1/2, 3, 1, 1)` when the fourth moment is finite,
/// `(1/(tau-3), tau-2, 1, 1)` for `tau` in (3,5).
/// `PowerLaw(5)` maps to the log-corrected boundary regime and
/// `PowerLaw(tau > 5)` to the finite-fourth-moment class.
pub fn exponent_table(regime: Regime) -> Result<ExponentTable> {
    let regime = match regime {
        Regime::PowerLaw(tau) if tau == 5.0 => Regime::Tau5LogCorrected,
        Regime::PowerLaw(tau) if tau > 5.0 => Regime::FiniteFourth,
        Regime::PowerLaw(tau) if tau <= 3.0 => {
            return Err(Error::InvalidParameter(format!(
                "power-law regime needs tau > 3, got {tau}"
            )))
        }
        other => other,
    };
    let (beta_exp, delta_exp) = match regime {
        Regime::FiniteFourth | Regime::Tau5LogCorrected => (0.5, 3.0),
        Regime::PowerLaw(tau) => (1.0 / (tau - 3.0), tau - 2.0),
    };
    Ok(ExponentTable {
        regime,
        beta_exp,
        delta_exp,
        gamma_exp: 1.0,
        gamma_prime_exp: 1.0,
        lambda: delta_exp / (delta_exp + 1.0),
    })
}

/// Regime of a weight law: finite sequences always have four finite moments;
/// the limiting power law is classified by its tail exponent.
pub fn regime_of_law(law: &WeightLaw) -> Regime {
    match law {
        WeightLaw::Finite(_) => Regime::FiniteFourth,
        WeightLaw::PowerLaw { tau, .. } if *tau == 5.0 => Regime::Tau5LogCorrected,
        WeightLaw::PowerLaw { tau, .. } => Regime::PowerLaw(*tau),
    }
}

/// Critical inverse temperature: `asinh(1/nu)` for the annealed GRG,
/// `1/nu` for the rank-1 ICW.
pub fn critical_beta(kind: ModelKind, nu: f64) -> Result<f64> {
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "nu must be finite and positive, got {nu}"
        )));
    }
    Ok(kind.beta_of_theta(1.0 / nu))
}

/// Finite-size critical sequence `beta_{c,N}` from the empirical `nu_N`.
pub fn critical_beta_n(kind: ModelKind, ws: &WeightSequence) -> f64 {
    kind.beta_of_theta(1.0 / ws.empirical_moments().nu)
}

/// Least-squares power-law fit.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct FitResult {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    /// Range of the regressed (transformed) abscissa.
    pub window: (f64, f64),
}

#[derive(Debug, Clone, Copy)]
pub enum FitTransform {
    /// slope of `log y` against `log x`
    LogLog,
    /// slope of `log y` against `p log(x / log(1/x))`; a curve following
    /// the tau = 5 form `y ~ (x / log(1/x))^p` fits with slope 1
    LogCorrected(f64),
}

pub fn fit_exponent(points: &[(f64, f64)], transform: FitTransform) -> Result<FitResult> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "need at least 3 points, got {}",
            points.len()
        )));
    }
    let mut xs = Vec::with_capacity(points.len());
    let mut ys = Vec::with_capacity(points.len());
    for &(x, y) in points {
        if !(x > 0.0) || !(y > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "fit requires positive coordinates, got ({x}, {y})"
            )));
        }
        let t = match transform {
            FitTransform::LogLog => x.ln(),
            FitTransform::LogCorrected(p) => {
                if x >= 1.0 {
                    return Err(Error::InvalidParameter(format!(
                        "log-corrected transform needs x < 1, got {x}"
                    )));
                }
                p * (x / (1.0 / x).ln()).ln()
            }
        };
        xs.push(t);
        ys.push(y.ln());
    }
    let n = xs.len() as f64;
    let xbar = xs.iter().sum::<f64>() / n;
    let ybar = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - xbar) * (x - xbar);
        sxy += (x - xbar) * (y - ybar);
        syy += (y - ybar) * (y - ybar);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter(
            "degenerate fit: all abscissae equal".into(),
        ));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    let lo = xs.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok(FitResult {
        slope,
        intercept: ybar - slope * xbar,
        r_squared,
        window: (lo, hi),
    })
}

/// Amplitude of the susceptibility divergence:
/// `lim (beta_c - beta) chi(beta, 0+) = (m1^2/m2) tanh(beta_c)` with
/// `beta_c = asinh(1/nu)`. Stated for the annealed GRG only; the ICW
/// analogue is not asserted.
pub fn gamma_amplitude(kind: ModelKind, mom: &MomentSet) -> Result<f64> {
    if kind != ModelKind::AnnealedGrg {
        return Err(Error::InvalidParameter(
            "gamma amplitude is defined for the annealed GRG only".into(),
        ));
    }
    let x = 1.0 / mom.nu;
    // tanh(asinh(x)) = x / sqrt(1 + x^2)
    Ok(mom.m1 * mom.m1 / mom.m2 * x / (1.0 + x * x).sqrt())
}

/// Geometric grid with at least `per_decade` points per decade of `[lo, hi]`.
pub fn geometric_grid(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    assert!(lo > 0.0 && hi > lo);
    let decades = (hi / lo).log10();
    let n = ((decades * per_decade as f64).ceil() as usize).max(2);
    (0..=n)
        .map(|i| lo * (hi / lo).powf(i as f64 / n as f64))
        .collect()
}

/// `M(beta_c, B)` over a field grid, at the critical point of the law.
pub fn magnetization_at_criticality(
    kind: ModelKind,
    law: &WeightLaw,
    b_grid: &[f64],
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let beta_c = critical_beta(kind, law.moments().nu)?;
    b_grid
        .iter()
        .map(|&b| {
            let spec = ModelSpec::new(kind, beta_c, b)?;
            let fp = solve_fixed_point(&spec, law, tol)?;
            Ok((b, magnetization(&spec, law, fp.z_star)))
        })
        .collect()
}

/// Spontaneous magnetization `M(beta_c + offset, 0+)` over supercritical offsets.
pub fn spontaneous_magnetization(
    kind: ModelKind,
    law: &WeightLaw,
    offsets: &[f64],
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let beta_c = critical_beta(kind, law.moments().nu)?;
    offsets
        .iter()
        .map(|&d| {
            let spec = ModelSpec::new(kind, beta_c + d, 0.0)?;
            let fp = solve_fixed_point(&spec, law, tol)?;
            Ok((d, magnetization(&spec, law, fp.z_star)))
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CriticalSide {
    Below,
    Above,
}

/// `(offset, offset * chi(beta, 0+))` with `beta = beta_c -/+ offset`;
/// converges to the gamma amplitude from below, stays bounded from above.
pub fn susceptibility_offset_product(
    kind: ModelKind,
    law: &WeightLaw,
    offsets: &[f64],
    side: CriticalSide,
    tol: f64,
) -> Result<Vec<(f64, f64)>> {
    let beta_c = critical_beta(kind, law.moments().nu)?;
    offsets
        .iter()
        .map(|&d| {
            let beta = match side {
                CriticalSide::Below => beta_c - d,
                CriticalSide::Above => beta_c + d,
            };
            let spec = ModelSpec::new(kind, beta, 0.0)?;
            let fp = solve_fixed_point(&spec, law, tol)?;
            let chi = susceptibility(&spec, law, &fp)?;
            Ok((d, d * chi))
        })
        .collect()
}

/// Extremes of `M(beta, B) / ((beta - beta_c)^boldbeta + B^{1/delta})` over a
/// `grid x grid` lattice of `(beta_c, beta_c + eps] x (0, eps]`. The theorem
/// asserts only that both extremes are finite and positive.
pub fn joint_scaling_ratio(
    kind: ModelKind,
    law: &WeightLaw,
    eps: f64,
    grid: usize,
    tol: f64,
) -> Result<(f64, f64)> {
    if !(eps > 0.0) || grid < 1 {
        return Err(Error::InvalidParameter(
            "joint scaling needs eps > 0 and a nonempty grid".into(),
        ));
    }
    let table = exponent_table(regime_of_law(law))?;
    if table.regime == Regime::Tau5LogCorrected {
        return Err(Error::InvalidParameter(
            "joint scaling ratio excludes the tau = 5 boundary".into(),
        ));
    }
    let beta_c = critical_beta(kind, law.moments().nu)?;
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for i in 1..=grid {
        let db = eps * i as f64 / grid as f64;
        for j in 1..=grid {
            let b = eps * j as f64 / grid as f64;
            let spec = ModelSpec::new(kind, beta_c + db, b)?;
            let fp = solve_fixed_point(&spec, law, tol)?;
            let m = magnetization(&spec, law, fp.z_star);
            let ratio = m / (db.powf(table.beta_exp) + b.powf(1.0 / table.delta_exp));
            min = min.min(ratio);
            max = max.max(ratio);
        }
    }
    Ok((min, max))
}
