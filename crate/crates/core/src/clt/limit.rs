//! The limiting critical density `exp(-f(x))`, its tail constant, the
//! scaling-window tilt, and normalization / MGF integrals of the limit law.

use super::{lc_defect, x_minus_tanh};
use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::quad;
use crate::weights::MomentSet;

/// Which limiting density applies.
#[derive(Debug, Clone, Copy)]
pub enum LimitRegime {
    /// `f(x) = (m4 / 12 m1^4) x^4`.
    FiniteFourth { m1: f64, m4: f64 },
    /// `f(x) = Σ_{i>=1} lc_defect(a x i^{-1/(tau-1)})`, `a = (tau-2)/(tau-1)`.
    PowerLaw { tau: f64 },
}

/// Parameters of the limiting density `exp(b q x^2 - f(x))` (unnormalized);
/// `b = 0` is the critical density itself.
#[derive(Debug, Clone, Copy)]
pub struct LimitLaw {
    pub regime: LimitRegime,
    pub window_b: f64,
    pub truncation_tol: f64,
}

impl LimitLaw {
    pub fn finite_fourth(m1: f64, m4: f64) -> Result<Self> {
        if !(m1 > 0.0) || !(m4 > 0.0) || !m1.is_finite() || !m4.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "finite-fourth regime needs positive finite m1, m4; got ({m1}, {m4})"
            )));
        }
        Ok(Self {
            regime: LimitRegime::FiniteFourth { m1, m4 },
            window_b: 0.0,
            truncation_tol: 1e-12,
        })
    }

    /// Finite-fourth law from a moment set (fails if `m4` diverges).
    pub fn from_moments(mom: &MomentSet) -> Result<Self> {
        Self::finite_fourth(mom.m1, mom.moment(4)?)
    }

    /// `tau` strictly inside (3,5); the boundary `tau = 5` is excluded here
    /// because the limit theorem does not cover it.
    pub fn power_law(tau: f64) -> Result<Self> {
        if !(tau > 3.0 && tau < 5.0) {
            return Err(Error::InvalidParameter(format!(
                "power-law limit law needs tau in (3,5), got {tau}"
            )));
        }
        Ok(Self {
            regime: LimitRegime::PowerLaw { tau },
            window_b: 0.0,
            truncation_tol: 1e-12,
        })
    }

    pub fn with_window(mut self, b: f64) -> Self {
        self.window_b = b;
        self
    }

    pub fn with_truncation_tol(mut self, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "truncation tolerance must be positive, got {tol}"
            )));
        }
        self.truncation_tol = tol;
        Ok(self)
    }

    /// `1 + delta` — the tail exponent of `f`.
    pub fn tail_exponent(&self) -> f64 {
        match self.regime {
            LimitRegime::FiniteFourth { .. } => 4.0,
            LimitRegime::PowerLaw { tau } => tau - 1.0,
        }
    }
}

/// The rate function `f(x)` of the limiting density.
pub fn limit_density_f(x: f64, law: &LimitLaw) -> f64 {
    match law.regime {
        LimitRegime::FiniteFourth { m1, m4 } => {
            let x2 = x * x;
            m4 / (12.0 * m1.powi(4)) * x2 * x2
        }
        LimitRegime::PowerLaw { tau } => f_power_law(x.abs(), tau, law.truncation_tol),
    }
}

/// Power-law `f`: direct compensated summation up to an index where the
/// quartic tail bound
/// `(ax)^4/12 (tau-1)/(5-tau) I^{-(5-tau)/(tau-1)} < tol`
/// is met (capped at 20000 terms), then an Euler-Maclaurin continuation of
/// the remainder. The continuation drives the truncation error far below
/// `tol` even where the bound alone would demand an astronomical index.
fn f_power_law(x: f64, tau: f64, tol: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let a = (tau - 2.0) / (tau - 1.0);
    let c = a * x;
    let q = 1.0 / (tau - 1.0);

    let bound_coeff = c.powi(4) / 12.0 * (tau - 1.0) / (5.0 - tau);
    let i_spec = if bound_coeff <= tol {
        1.0
    } else {
        (bound_coeff / tol).powf((tau - 1.0) / (5.0 - tau))
    };
    let t_start = (i_spec.clamp(64.0, 20_000.0)).ceil() as usize + 1;

    let mut direct = KahanSum::new();
    for i in 1..t_start {
        direct.add(lc_defect(c * (i as f64).powf(-q)));
    }
    direct.value() + em_tail(c, q, tau, t_start as f64)
}

/// `Σ_{i >= T} lc_defect(c i^{-q})` by Euler-Maclaurin:
/// integral + g(T)/2 - g'(T)/12 + g'''(T)/720.
fn em_tail(c: f64, q: f64, tau: f64, t: f64) -> f64 {
    let u = c * t.powf(-q);
    let integral = (tau - 1.0) * c.powf(tau - 1.0) * int_defect_u_minus_tau(u, tau);

    let g0 = lc_defect(u);
    // u-derivatives of the substituted argument
    let u1 = -q * u / t;
    let u2 = q * (q + 1.0) * u / (t * t);
    let u3 = -q * (q + 1.0) * (q + 2.0) * u / (t * t * t);
    // lc_defect derivatives: h' = x - tanh x, h'' = tanh^2 x, h''' = 2 tanh x sech^2 x
    let th = u.tanh();
    let h1 = x_minus_tanh(u);
    let h2 = th * th;
    let h3 = 2.0 * th * (1.0 - th * th);
    let g1 = h1 * u1;
    let g3 = h3 * u1 * u1 * u1 + 3.0 * h2 * u1 * u2 + h1 * u3;

    integral + 0.5 * g0 - g1 / 12.0 + g3 / 720.0
}

/// `∫_0^U lc_defect(u) u^{-tau} du`; the piece below u = 0.18 integrates the
/// defect series termwise in closed form, removing the endpoint singularity.
fn int_defect_u_minus_tau(upper: f64, tau: f64) -> f64 {
    let u0 = upper.min(0.18);
    let mut total = 0.0;
    let mut power = u0.powf(5.0 - tau); // u0^(p_j + 1 - tau) starting at p_0 = 4
    let u0sq = u0 * u0;
    for (j, coeff) in super::LC_DEFECT_SERIES.iter().enumerate() {
        let p = 4.0 + 2.0 * j as f64;
        total += coeff * power / (p + 1.0 - tau);
        power *= u0sq;
    }
    if upper > u0 {
        let rest = quad::integrate(
            |u| lc_defect(u) * u.powf(-tau),
            u0,
            upper,
            1e-300,
            1e-12,
            400,
        )
        .map(|r| r.value)
        .unwrap_or(f64::NAN);
        total += rest;
    }
    total
}

/// Tail constant `C = lim f(x)/x^{1+delta}`:
/// `m4 / (12 m1^4)` in the finite-fourth regime and
/// `(tau-1) a^{tau-1} ∫_0^∞ lc_defect(u) u^{-tau} du` for `tau` in (3,5).
pub fn limit_constant_c(law: &LimitLaw) -> Result<f64> {
    match law.regime {
        LimitRegime::FiniteFourth { m1, m4 } => Ok(m4 / (12.0 * m1.powi(4))),
        LimitRegime::PowerLaw { tau } => {
            let a = (tau - 2.0) / (tau - 1.0);
            // below 1: series-assisted; above 1: lc_defect(u) = u^2/2 - u + ln2 - ln(1+e^{-2u})
            // with the polynomial part in closed form
            let below = int_defect_u_minus_tau(1.0, tau);
            let poly = 0.5 / (tau - 3.0) - 1.0 / (tau - 2.0) + std::f64::consts::LN_2 / (tau - 1.0);
            let correction = quad::integrate(
                |u| (-2.0 * u).exp().ln_1p() * u.powf(-tau),
                1.0,
                30.0,
                1e-300,
                1e-13,
                400,
            )?;
            Ok((tau - 1.0) * a.powf(tau - 1.0) * (below + poly - correction.value))
        }
    }
}

/// Quadratic coefficient of the scaling-window tilt:
/// `q = (1/2) cosh(beta_c) m2^2 / m1^3` with `beta_c = asinh(m1/m2)`;
/// `cosh(asinh(x)) = sqrt(1 + x^2)`.
fn window_quadratic_coeff(mom: &MomentSet) -> f64 {
    let inv_nu = mom.m1 / mom.m2;
    0.5 * (1.0 + inv_nu * inv_nu).sqrt() * mom.m2 * mom.m2 / mom.m1.powi(3)
}

/// Unnormalized scaling-window density
/// `exp(b (1/2) cosh(beta_c) (m2^2/m1^3) x^2 - f(x))`; reduces to
/// `exp(-f(x))` exactly at `b = 0`.
pub fn window_density(x: f64, law: &LimitLaw, mom: &MomentSet) -> f64 {
    let tilt = if law.window_b == 0.0 {
        0.0
    } else {
        law.window_b * window_quadratic_coeff(mom) * x * x
    };
    (tilt - limit_density_f(x, law)).exp()
}

/// Smallest |x| beyond which the log-density has dropped 60 + slack below
/// its peak scale, for use as a quadrature cutoff.
fn density_cutoff(law: &LimitLaw, mom: &MomentSet, linear: f64) -> Result<f64> {
    let q = if law.window_b == 0.0 {
        0.0
    } else {
        law.window_b * window_quadratic_coeff(mom)
    };
    let mut x = 2.0;
    for _ in 0..60 {
        if limit_density_f(x, law) - q * x * x - linear.abs() * x > 80.0 {
            return Ok(x);
        }
        x *= 2.0;
    }
    Err(Error::QuadratureFailure {
        estimate: f64::INFINITY,
        tolerance: 80.0,
    })
}

/// `∫ exp(b q x^2 - f(x)) dx` over the real line.
pub fn density_normalizer(law: &LimitLaw, mom: &MomentSet) -> Result<f64> {
    let cutoff = density_cutoff(law, mom, 0.0)?;
    // the density is even in x
    let half = quad::integrate(
        |x| window_density(x, law, mom),
        0.0,
        cutoff,
        1e-300,
        1e-11,
        400,
    )?;
    Ok(2.0 * half.value)
}

/// Moment generating function of the normalized limit density:
/// `∫ e^{rx} ρ_b(x) dx / ∫ ρ_b(x) dx`.
pub fn limit_mgf(r: f64, law: &LimitLaw, mom: &MomentSet) -> Result<f64> {
    let cutoff = density_cutoff(law, mom, r)?;
    let num = quad::integrate(
        |x| (r * x).exp() * window_density(x, law, mom),
        -cutoff,
        cutoff,
        1e-300,
        1e-11,
        400,
    )?;
    let den = density_normalizer(law, mom)?;
    Ok(num.value / den)
}
