//! Finite-N exact computations through the Hubbard-Stratonovich integral
//! representation, the limiting critical densities, exact sampling, and the
//! 2^n enumeration oracles.

pub mod enumerate;
pub mod limit;
pub mod sample;

use crate::criticality::{exponent_table, Regime};
use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::quad;
use crate::weights::WeightSequence;

/// `log cosh x`, safe for large |x|.
#[inline]
pub(crate) fn ln_cosh(x: f64) -> f64 {
    let a = x.abs();
    if a > 20.0 {
        // e^{-2a} < 4e-18 is below f64 resolution of the ln_1p term
        return a - std::f64::consts::LN_2;
    }
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

// Taylor coefficients of x^2/2 - log cosh x = x^4/12 - x^6/45 + ...
const LC_DEFECT_SERIES: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 45.0,
    17.0 / 2520.0,
    -31.0 / 14175.0,
    691.0 / 935550.0,
    -10922.0 / 42567525.0,
    929569.0 / 10216206000.0,
];

/// `x^2/2 - log cosh x`, nonnegative, quartic near zero. Evaluated by series
/// below |x| = 0.18 where the direct form loses its leading digits.
#[inline]
pub(crate) fn lc_defect(x: f64) -> f64 {
    let x2 = x * x;
    if x.abs() < 0.18 {
        let mut acc = LC_DEFECT_SERIES[6];
        for c in LC_DEFECT_SERIES[..6].iter().rev() {
            acc = acc * x2 + c;
        }
        acc * x2 * x2
    } else {
        0.5 * x2 - ln_cosh(x)
    }
}

// x - tanh x = x^3/3 - 2x^5/15 + ..., the derivative of lc_defect.
const X_MINUS_TANH_SERIES: [f64; 6] = [
    1.0 / 3.0,
    -2.0 / 15.0,
    17.0 / 315.0,
    -62.0 / 2835.0,
    1382.0 / 155925.0,
    -21844.0 / 6081075.0,
];

#[inline]
pub(crate) fn x_minus_tanh(x: f64) -> f64 {
    if x.abs() < 0.15 {
        let x2 = x * x;
        let mut acc = X_MINUS_TANH_SERIES[5];
        for c in X_MINUS_TANH_SERIES[..5].iter().rev() {
            acc = acc * x2 + c;
        }
        acc * x2 * x
    } else {
        x - x.tanh()
    }
}

/// `log cosh(a + d) - log cosh(a)` without cancellation: polynomial when both
/// arguments sit inside the series radius, `d` on the saturated branch, and
/// the direct difference otherwise.
#[inline]
pub(crate) fn ln_cosh_diff(a: f64, d: f64) -> f64 {
    let b = a + d;
    if a.abs() < 0.17 && b.abs() < 0.17 {
        // lncosh x = x^2/2 - lc_defect(x)
        (a + 0.5 * d) * d - lc_defect(b) + lc_defect(a)
    } else if a > 20.0 && b > 20.0 {
        d
    } else if a < -20.0 && b < -20.0 {
        -d
    } else {
        ln_cosh(b) - ln_cosh(a)
    }
}

/// The exponent of the Hubbard-Stratonovich representation of the moment
/// generating function of `S_N / N^lambda` under the tilde measure:
///
/// `G_N(z; r) = z^2/2 - (1/N) Σ_i log cosh(alpha_N w_i z + r/N^lambda)`,
///
/// with `alpha_N = sqrt(theta / E[W_N])`.
#[derive(Debug, Clone)]
pub struct GnFunction {
    ws: WeightSequence,
    theta: f64,
    lambda: f64,
    alpha_n: f64,
    /// `alpha_N w_i`, precomputed
    scaled: Vec<f64>,
    /// `1 - theta nu_N`; vanishes (to rounding) at the critical sequence
    one_minus_theta_nu: f64,
    m1: f64,
    nu: f64,
    /// set when all weights are equal, collapsing the sums to one term
    uniform_scaled: Option<f64>,
}

impl GnFunction {
    pub fn new(ws: WeightSequence, theta: f64, lambda: f64) -> Result<Self> {
        if !(theta >= 0.0) || !theta.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "theta must be finite and >= 0, got {theta}"
            )));
        }
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "lambda must lie in (0, 1], got {lambda}"
            )));
        }
        let mom = ws.empirical_moments();
        let alpha_n = (theta / mom.m1).sqrt();
        let scaled: Vec<f64> = ws.weights().iter().map(|&w| alpha_n * w).collect();
        let uniform_scaled = if scaled.windows(2).all(|p| p[0] == p[1]) {
            Some(scaled[0])
        } else {
            None
        };
        Ok(Self {
            ws,
            theta,
            lambda,
            alpha_n,
            scaled,
            one_minus_theta_nu: 1.0 - theta * mom.nu,
            m1: mom.m1,
            nu: mom.nu,
            uniform_scaled,
        })
    }

    /// Construct with `lambda = delta/(delta+1)` taken from the regime.
    pub fn from_regime(ws: WeightSequence, theta: f64, regime: Regime) -> Result<Self> {
        let lambda = exponent_table(regime)?.lambda;
        Self::new(ws, theta, lambda)
    }

    pub fn n(&self) -> usize {
        self.ws.n()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn alpha_n(&self) -> f64 {
        self.alpha_n
    }

    pub fn weights(&self) -> &WeightSequence {
        &self.ws
    }

    pub(crate) fn scaled_weights(&self) -> &[f64] {
        &self.scaled
    }

    pub fn mean_weight(&self) -> f64 {
        self.m1
    }

    pub fn nu_n(&self) -> f64 {
        self.nu
    }

    /// `N G_N(z; r)`, evaluated as
    ///
    /// `N(1 - theta nu_N) z^2/2 + Σ_i lc_defect(s_i z) - Σ_i [lncosh(s_i z + r/N^λ) - lncosh(s_i z)]`
    ///
    /// so the Gaussian bulk cancels analytically instead of numerically; at
    /// the critical sequence the whole first term is zero to rounding and
    /// the defect sum carries the quartic (or tau) scaling intact.
    pub fn eval_n(&self, z: f64, r: f64) -> f64 {
        let n = self.ws.n() as f64;
        let quad_term = self.one_minus_theta_nu * n * z * z * 0.5;

        if let Some(s) = self.uniform_scaled {
            let a = s * z;
            let shift = if r == 0.0 {
                0.0
            } else {
                ln_cosh_diff(a, r / n.powf(self.lambda))
            };
            return quad_term + n * (lc_defect(a) - shift);
        }

        let mut defects = KahanSum::new();
        if r == 0.0 {
            for &s in &self.scaled {
                defects.add(lc_defect(s * z));
            }
            return quad_term + defects.value();
        }

        let rr = r / n.powf(self.lambda);
        let mut shift = KahanSum::new();
        for &s in &self.scaled {
            let a = s * z;
            defects.add(lc_defect(a));
            shift.add(ln_cosh_diff(a, rr));
        }
        quad_term + defects.value() - shift.value()
    }

    /// `G_N(z; r)` itself.
    pub fn eval(&self, z: f64, r: f64) -> f64 {
        self.eval_n(z, r) / self.ws.n() as f64
    }
}

/// Free-function form of the map: `g_n(z, r, gn) = G_N(z; r)`.
pub fn g_n(z: f64, r: f64, gn: &GnFunction) -> f64 {
    gn.eval(z, r)
}

/// Locate the integration window of `∫ e^{-N G_N(z;r)} dz`: a reference
/// minimum of `N G_N` (coarse scan plus local refinement; z = 0 is always a
/// scan node) and the two points where the exponent has climbed 60 above it,
/// so everything outside carries an e^-60 tail.
pub(crate) struct Window {
    pub e0: f64,
    pub lo: f64,
    pub hi: f64,
    pub wells: (f64, f64),
}

fn integration_window(gn: &GnFunction, r: f64) -> Result<Window> {
    // Φ is bounded by sqrt(theta m1), so the exponent grows like z^2/2 once
    // |z| passes a few times that scale
    let half_width = 2.0 * (gn.theta * gn.m1).sqrt() + 2.0;
    let coarse = 32;

    let mut emin = f64::INFINITY;
    let mut zmin = 0.0;
    for i in 0..=coarse {
        let z = -half_width + 2.0 * half_width * i as f64 / coarse as f64;
        let e = gn.eval_n(z, r);
        if e < emin {
            emin = e;
            zmin = z;
        }
    }
    let cell = 2.0 * half_width / coarse as f64;
    let refine = |center: f64| -> f64 {
        // golden-section descent inside one coarse cell
        let (mut a, mut b) = (center - cell, center + cell);
        let phi = 0.5 * (5.0_f64.sqrt() - 1.0);
        for _ in 0..30 {
            let c = b - phi * (b - a);
            let d = a + phi * (b - a);
            if gn.eval_n(c, r) < gn.eval_n(d, r) {
                b = d;
            } else {
                a = c;
            }
        }
        0.5 * (a + b)
    };
    // the exponent has at most two wells, near ±z*; refine around both so a
    // saddle higher than the 60-band cannot hide the mirror well
    let zref1 = refine(zmin);
    let zref2 = if zmin != 0.0 { refine(-zmin) } else { zref1 };
    let e0 = emin
        .min(gn.eval_n(zref1, r))
        .min(gn.eval_n(zref2, r));

    let crossing = |anchor: f64, dir: f64| -> Result<f64> {
        let mut step = (half_width / 64.0).max(1e-9);
        let mut inside = anchor;
        let mut x = anchor + dir * step;
        let mut guard = 0;
        while gn.eval_n(x, r) - e0 < 60.0 {
            inside = x;
            step *= 2.0;
            x += dir * step;
            guard += 1;
            if guard > 400 {
                return Err(Error::QuadratureFailure {
                    estimate: f64::INFINITY,
                    tolerance: 60.0,
                });
            }
        }
        let (mut lo, mut hi) = (inside, x);
        for _ in 0..25 {
            let mid = 0.5 * (lo + hi);
            if gn.eval_n(mid, r) - e0 < 60.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(hi)
    };
    let hi = crossing(zref1.max(zref2), 1.0)?;
    let lo = crossing(zref1.min(zref2), -1.0)?;
    Ok(Window {
        e0,
        lo,
        hi,
        wells: (zref1.min(zref2), zref1.max(zref2)),
    })
}

/// `log ∫ e^{-N G_N(z; r)} dz` by adaptive quadrature of the exponent shifted
/// to its minimum. The interval is pre-split at the wells so that narrow
/// peaks sit on segment boundaries and cannot slip between Kronrod nodes.
pub fn log_hs_integral(gn: &GnFunction, r: f64, rel_tol: f64) -> Result<f64> {
    let w = integration_window(gn, r)?;
    let mut cuts = vec![w.lo, w.wells.0, w.wells.1, w.hi];
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let mut total = 0.0;
    for pair in cuts.windows(2) {
        let result = quad::integrate(
            |z| (-(gn.eval_n(z, r) - w.e0)).exp(),
            pair[0],
            pair[1],
            1e-300,
            rel_tol,
            400,
        )?;
        total += result.value;
    }
    Ok(total.ln() - w.e0)
}

/// `P̃_N[exp(r S_N / N^lambda)]` as the ratio of two Hubbard-Stratonovich
/// integrals.
pub fn mgf_ratio(r: f64, gn: &GnFunction, rel_tol: f64) -> Result<f64> {
    Ok(mgf_ratios(&[r], gn, rel_tol)?[0])
}

/// [`mgf_ratio`] over several `r` values, computing the shared denominator
/// once.
pub fn mgf_ratios(rs: &[f64], gn: &GnFunction, rel_tol: f64) -> Result<Vec<f64>> {
    let log_den = log_hs_integral(gn, 0.0, rel_tol)?;
    rs.iter()
        .map(|&r| {
            if r == 0.0 {
                return Ok(1.0);
            }
            let log_num = log_hs_integral(gn, r, rel_tol)?;
            Ok((log_num - log_den).exp())
        })
        .collect()
}

/// `log Z̃_N = N log 2 + (1/2) log(N / 2π) + log ∫ e^{-N G_N(z; 0)} dz`.
pub fn log_partition(gn: &GnFunction, rel_tol: f64) -> Result<f64> {
    let n = gn.n() as f64;
    Ok(n * std::f64::consts::LN_2
        + 0.5 * (n / (2.0 * std::f64::consts::PI)).ln()
        + log_hs_integral(gn, 0.0, rel_tol)?)
}

/// Convergence pair for the scaled exponent: returns
/// `(N G_N(z / N^{1/(delta+1)}; r), limit)` where the limit is
/// `-zr sqrt(m1_N/nu_N) + (m4_N / 12 m2_N^2) z^4` in the finite-fourth-moment
/// regime and `-zr sqrt(m1_N/nu_N) + f(sqrt(m1_N/nu_N) z)` for tau in (3,5).
/// Empirical moments of the stored sequence are used on the right so the
/// pair isolates the N-convergence of the exponent itself.
pub fn gn_limit_check(gn: &GnFunction, z: f64, r: f64, regime: Regime) -> Result<(f64, f64)> {
    let table = exponent_table(regime)?;
    if table.regime == Regime::Tau5LogCorrected {
        return Err(Error::InvalidParameter(
            "the scaling limit excludes the tau = 5 boundary".into(),
        ));
    }
    let n = gn.n() as f64;
    let scale = n.powf(1.0 / (table.delta_exp + 1.0));
    let lhs = gn.eval_n(z / scale, r);

    let mom = gn.ws.empirical_moments();
    let root = (mom.m1 / mom.nu).sqrt();
    let linear = -z * r * root;
    let rhs = match table.regime {
        Regime::FiniteFourth => {
            let m4 = mom
                .m4
                .finite()
                .expect("finite sequences have finite fourth moments");
            linear + m4 / (12.0 * mom.m2 * mom.m2) * z.powi(4)
        }
        Regime::PowerLaw(tau) => {
            let law = limit::LimitLaw::power_law(tau)?;
            linear + limit::limit_density_f(root * z, &law)
        }
        Regime::Tau5LogCorrected => unreachable!(),
    };
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightSequence;
    use approx::assert_relative_eq;

    #[test]
    fn ln_cosh_against_naive() {
        for &x in &[0.0, 1e-8, 0.3, 1.0, 5.0, -2.5] {
            assert_relative_eq!(ln_cosh(x), x.cosh().ln(), epsilon = 1e-15, max_relative = 1e-14);
        }
        // large argument: asymptote |x| - ln 2
        assert_relative_eq!(ln_cosh(500.0), 500.0 - std::f64::consts::LN_2, max_relative = 1e-15);
    }

    #[test]
    fn lc_defect_series_matches_direct_across_the_switch() {
        for &x in &[0.01_f64, 0.05, 0.1, 0.1799, 0.1801, 0.3, 1.0] {
            let direct = 0.5 * x * x - (x.cosh()).ln();
            assert_relative_eq!(lc_defect(x), direct, max_relative = 1e-10);
        }
        assert_eq!(lc_defect(0.0), 0.0);
        assert!(lc_defect(1e-6) > 0.0);
    }

    #[test]
    fn x_minus_tanh_series_matches_direct() {
        for &x in &[0.01, 0.1, 0.1501, 0.5, 2.0] {
            assert_relative_eq!(x_minus_tanh(x), x - x.tanh(), max_relative = 1e-9);
        }
    }

    #[test]
    fn ln_cosh_diff_matches_direct_across_branches() {
        for &a in &[-30.0, -5.0, -0.3, -0.1, 0.0, 0.05, 0.169, 0.3, 7.0, 25.0] {
            for &d in &[-0.2, -1e-4, 1e-7, 3e-3, 0.15] {
                let direct = (a + d).cosh().ln() - a.cosh().ln();
                let got = ln_cosh_diff(a, d);
                assert!(
                    (got - direct).abs() < 1e-12 + 1e-10 * direct.abs(),
                    "a {a} d {d}: {got} vs {direct}"
                );
            }
        }
    }

    #[test]
    fn uniform_fast_path_matches_generic_sums() {
        // same weights, one constructed so the uniform shortcut engages and
        // one with a negligible perturbation so it does not
        let ws_u = WeightSequence::homogeneous(500, 1.3).unwrap();
        let mut w = vec![1.3; 500];
        w[499] = 1.3 + 1e-13;
        let ws_g = WeightSequence::from_vec(w).unwrap();
        let gnu = GnFunction::new(ws_u, 0.7, 0.75).unwrap();
        let gng = GnFunction::new(ws_g, 0.7, 0.75).unwrap();
        for &(z, r) in &[(0.0, 0.0), (0.3, 0.0), (1.7, 0.5), (0.02, -2.0)] {
            assert_relative_eq!(
                gnu.eval_n(z, r),
                gng.eval_n(z, r),
                epsilon = 1e-9,
                max_relative = 1e-9
            );
        }
    }

    #[test]
    fn gn_trivial_values() {
        let ws = WeightSequence::homogeneous(2, 1.0).unwrap();
        let gn = GnFunction::new(ws, 1.0, 0.75).unwrap();
        assert_eq!(gn.eval(0.0, 0.0), 0.0);
        // frozen: 0.5 - log cosh 1
        assert_relative_eq!(gn.eval(1.0, 0.0), 0.066219169516972813, max_relative = 1e-13);
    }

    #[test]
    fn gn_even_in_z_and_nonnegative_below_criticality() {
        let ws = WeightSequence::power_law(20, 4.0, 1.0).unwrap();
        let nu = ws.empirical_moments().nu;
        let gn = GnFunction::new(ws, 1.0 / nu, 2.0 / 3.0).unwrap();
        for &z in &[0.0, 0.1, 0.7, 2.0, 11.0] {
            assert_eq!(gn.eval(z, 0.0), gn.eval(-z, 0.0));
            assert!(gn.eval(z, 0.0) >= 0.0);
        }
        assert!(gn.eval(1.3, 0.0) > 0.0);
    }

    #[test]
    fn gn_symmetry_in_r() {
        let ws = WeightSequence::power_law(7, 3.5, 1.0).unwrap();
        let gn = GnFunction::new(ws, 0.4, 0.6).unwrap();
        for &(z, r) in &[(0.3, 0.5), (1.1, 2.0)] {
            assert_relative_eq!(gn.eval(z, r), gn.eval(-z, -r), max_relative = 1e-14);
        }
    }

    #[test]
    fn mgf_ratio_n2_closed_form() {
        // P̃_2[e^{r S/2^{3/4}}] = (2e cosh(2r/2^{3/4}) + 2)/(2e + 2) for w=1, theta=1
        let ws = WeightSequence::homogeneous(2, 1.0).unwrap();
        let gn = GnFunction::new(ws, 1.0, 0.75).unwrap();
        let e = std::f64::consts::E;
        for &r in &[0.5, 2.0, -1.0] {
            let expected = (2.0 * e * (2.0 * r / 2.0_f64.powf(0.75)).cosh() + 2.0) / (2.0 * e + 2.0);
            let got = mgf_ratio(r, &gn, 1e-12).unwrap();
            assert_relative_eq!(got, expected, max_relative = 1e-11);
        }
        assert_eq!(mgf_ratio(0.0, &gn, 1e-12).unwrap(), 1.0);
    }

    #[test]
    fn mgf_ratio_spin_flip_symmetry() {
        let ws = WeightSequence::power_law(9, 4.0, 1.0).unwrap();
        let nu = ws.empirical_moments().nu;
        let gn = GnFunction::new(ws, 1.0 / nu, 2.0 / 3.0).unwrap();
        let vals = mgf_ratios(&[0.7, -0.7], &gn, 1e-12).unwrap();
        assert_relative_eq!(vals[0], vals[1], max_relative = 1e-10);
    }

    #[test]
    fn log_partition_small_systems() {
        // n = 2, w = 1, theta = 1: Z̃ = 2e + 2
        let ws = WeightSequence::homogeneous(2, 1.0).unwrap();
        let gn = GnFunction::new(ws, 1.0, 0.75).unwrap();
        assert_relative_eq!(
            log_partition(&gn, 1e-12).unwrap(),
            (2.0 * std::f64::consts::E + 2.0).ln(),
            max_relative = 1e-11
        );

        // n = 1: Z̃ = 2 e^{theta/2}
        for &theta in &[0.25, 1.0, 3.0] {
            let ws = WeightSequence::homogeneous(1, 1.0).unwrap();
            let gn = GnFunction::new(ws, theta, 0.75).unwrap();
            assert_relative_eq!(
                log_partition(&gn, 1e-12).unwrap(),
                (2.0_f64).ln() + theta / 2.0,
                max_relative = 1e-11
            );
        }
    }

    #[test]
    fn supercritical_window_covers_both_wells() {
        let ws = WeightSequence::homogeneous(40, 1.0).unwrap();
        let gn = GnFunction::new(ws, 2.0, 0.75).unwrap();
        let w = integration_window(&gn, 0.0).unwrap();
        // wells sit near ±1.354 (z* of the theta = 2 fixed point)
        assert!(w.hi > 1.35 && w.lo < -1.35);
        assert!(w.wells.0 < -1.3 && w.wells.1 > 1.3);
        assert!(w.e0 < 0.0);
        let lp = log_partition(&gn, 1e-11).unwrap();
        assert!(lp.is_finite());
    }

    #[test]
    fn deep_double_well_partition_matches_enumeration() {
        // n = 20 at theta = 8: the saddle between the wells sits ~66 above
        // the minima, beyond the e^-60 band, which is exactly the case the
        // well-anchored window has to survive without dropping a well
        let ws = WeightSequence::homogeneous(20, 1.0).unwrap();
        let gn = GnFunction::new(ws.clone(), 8.0, 0.75).unwrap();
        let by_quad = log_partition(&gn, 1e-12).unwrap();
        let by_enum = enumerate::enumerate_log_partition(&ws, 8.0, 0.0).unwrap();
        assert_relative_eq!(by_quad, by_enum, max_relative = 1e-10);
    }
}
