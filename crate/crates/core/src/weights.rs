//! Vertex-weight sequences and their empirical / limiting moments.
//!
//! Two weight descriptions feed every other module:
//!   * a finite sequence `w_1..w_n` (arbitrary positive reals, or the
//!     deterministic power law `w_i = c_w (n/i)^{1/(tau-1)}`);
//!   * the limiting law of that deterministic family, with distribution
//!     function `F(w) = 1 - (c_w/w)^{tau-1}` on `(c_w, inf)`.

use crate::error::{Error, Result};
use crate::kahan::{kahan_sum, KahanSum};
use crate::quad;
use serde::Serialize;

/// A finite sequence of strictly positive vertex weights.
#[derive(Debug, Clone)]
pub struct WeightSequence {
    w: Vec<f64>,
    total: f64,
    tag: Option<PowerLawTag>,
}

/// Marks a sequence produced by [`WeightSequence::power_law`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLawTag {
    pub tau: f64,
    pub cw: f64,
}

impl WeightSequence {
    /// Wrap an explicit weight vector. All entries must be finite and > 0.
    pub fn from_vec(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(Error::InvalidParameter("weight vector is empty".into()));
        }
        if let Some(&bad) = w.iter().find(|&&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "weights must be finite and positive, got {bad}"
            )));
        }
        let total = kahan_sum(w.iter().copied());
        Ok(Self {
            w,
            total,
            tag: None,
        })
    }

    /// Homogeneous sequence `w_i = c`.
    pub fn homogeneous(n: usize, c: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(c > 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "weight must be finite and positive, got {c}"
            )));
        }
        Ok(Self {
            w: vec![c; n],
            total: c * n as f64,
            tag: None,
        })
    }

    /// Deterministic power-law sequence `w_i = c_w (n/i)^{1/(tau-1)}`, `tau` in (3,5).
    pub fn power_law(n: usize, tau: f64, cw: f64) -> Result<Self> {
        check_power_law_params(n, tau, cw)?;
        let exponent = 1.0 / (tau - 1.0);
        let w: Vec<f64> = (1..=n)
            .map(|i| cw * (n as f64 / i as f64).powf(exponent))
            .collect();
        let total = kahan_sum(w.iter().copied());
        Ok(Self {
            w,
            total,
            tag: Some(PowerLawTag { tau, cw }),
        })
    }

    pub fn n(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    /// Total weight `ℓ_N = Σ w_i`.
    pub fn total_weight(&self) -> f64 {
        self.total
    }

    pub fn max_weight(&self) -> f64 {
        self.w.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn power_law_tag(&self) -> Option<PowerLawTag> {
        self.tag
    }

    /// Empirical moments `m_k = (1/n) Σ w_i^k`, k = 1..4, via compensated sums.
    pub fn empirical_moments(&self) -> MomentSet {
        let n = self.w.len() as f64;
        let mut s = [KahanSum::new(); 4];
        for &x in &self.w {
            let x2 = x * x;
            s[0].add(x);
            s[1].add(x2);
            s[2].add(x2 * x);
            s[3].add(x2 * x2);
        }
        let m1 = s[0].value() / n;
        let m2 = s[1].value() / n;
        MomentSet {
            m1,
            m2,
            m3: MomentValue::Finite(s[2].value() / n),
            m4: MomentValue::Finite(s[3].value() / n),
            nu: m2 / m1,
            source: MomentSource::Empirical { n: self.w.len() },
        }
    }
}

fn check_power_law_params(n: usize, tau: f64, cw: f64) -> Result<()> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be at least 1".into()));
    }
    if !(tau > 3.0 && tau < 5.0) {
        return Err(Error::InvalidParameter(format!(
            "tau must lie in (3,5), got {tau}"
        )));
    }
    if !(cw > 0.0) || !cw.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cw must be finite and positive, got {cw}"
        )));
    }
    Ok(())
}

/// A moment that may diverge (`E[W^k] = inf` for `k >= tau-1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(untagged)]
pub enum MomentValue {
    Finite(f64),
    #[serde(serialize_with = "serialize_infinite")]
    Infinite,
}

fn serialize_infinite<S: serde::Serializer>(s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str("infinite")
}

impl MomentValue {
    pub fn finite(self) -> Option<f64> {
        match self {
            MomentValue::Finite(x) => Some(x),
            MomentValue::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, MomentValue::Finite(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MomentSource {
    Empirical { n: usize },
    Limiting,
}

/// First four moments of a weight law together with `nu = m2/m1`.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentSet {
    pub m1: f64,
    pub m2: f64,
    pub m3: MomentValue,
    pub m4: MomentValue,
    pub nu: f64,
    pub source: MomentSource,
}

impl MomentSet {
    /// `E[W^k]` for k = 1..4; `DivergentMoment` if the order diverges.
    pub fn moment(&self, k: u32) -> Result<f64> {
        let v = match k {
            1 => MomentValue::Finite(self.m1),
            2 => MomentValue::Finite(self.m2),
            3 => self.m3,
            4 => self.m4,
            _ => {
                return Err(Error::InvalidParameter(format!(
                    "moment order {k} not tracked (1..=4)"
                )))
            }
        };
        v.finite().ok_or(Error::DivergentMoment { order: k })
    }
}

/// Moments of the limiting law `F(w) = 1 - (c_w/w)^{tau-1}`:
/// `E[W^k] = c_w^k (tau-1)/(tau-1-k)` for `k < tau-1`, divergent otherwise.
pub fn limiting_moments(tau: f64, cw: f64) -> Result<MomentSet> {
    check_power_law_params(1, tau, cw)?;
    Ok(limiting_moments_unchecked(tau, cw))
}

fn limiting_moments_unchecked(tau: f64, cw: f64) -> MomentSet {
    let mk = |k: f64| -> MomentValue {
        if k < tau - 1.0 {
            MomentValue::Finite(cw.powf(k) * (tau - 1.0) / (tau - 1.0 - k))
        } else {
            MomentValue::Infinite
        }
    };
    let m1 = mk(1.0).finite().expect("E[W] finite for tau > 2");
    let m2 = mk(2.0).finite().expect("E[W^2] finite for tau > 3");
    MomentSet {
        m1,
        m2,
        m3: mk(3.0),
        m4: mk(4.0),
        nu: m2 / m1,
        source: MomentSource::Limiting,
    }
}

/// Empirical power-law moments without materializing the weight vector;
/// usable beyond the vector-size limit.
pub fn power_law_moments_streaming(n: usize, tau: f64, cw: f64) -> Result<MomentSet> {
    check_power_law_params(n, tau, cw)?;
    let exponent = 1.0 / (tau - 1.0);
    let nf = n as f64;
    let mut s = [KahanSum::new(); 4];
    for i in 1..=n {
        let x = cw * (nf / i as f64).powf(exponent);
        let x2 = x * x;
        s[0].add(x);
        s[1].add(x2);
        s[2].add(x2 * x);
        s[3].add(x2 * x2);
    }
    let m1 = s[0].value() / nf;
    let m2 = s[1].value() / nf;
    Ok(MomentSet {
        m1,
        m2,
        m3: MomentValue::Finite(s[2].value() / nf),
        m4: MomentValue::Finite(s[3].value() / nf),
        nu: m2 / m1,
        source: MomentSource::Empirical { n },
    })
}

/// One row of [`moment_convergence_report`]: gaps `|m_k(n) - m_k(inf)|`.
/// A gap is `None` where the limiting moment diverges.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct MomentGapRow {
    pub n: usize,
    pub m1_gap: f64,
    pub m2_gap: f64,
    pub m3_gap: Option<f64>,
    pub m4_gap: Option<f64>,
    pub nu_gap: f64,
}

/// Empirical-vs-limiting moment gaps along a list of sizes. Reported, not
/// asserted: the convergence rate is observational.
pub fn moment_convergence_report(tau: f64, cw: f64, n_list: &[usize]) -> Result<Vec<MomentGapRow>> {
    let lim = limiting_moments(tau, cw)?;
    n_list
        .iter()
        .map(|&n| {
            let emp = power_law_moments_streaming(n, tau, cw)?;
            Ok(MomentGapRow {
                n,
                m1_gap: (emp.m1 - lim.m1).abs(),
                m2_gap: (emp.m2 - lim.m2).abs(),
                m3_gap: match (emp.m3, lim.m3) {
                    (MomentValue::Finite(a), MomentValue::Finite(b)) => Some((a - b).abs()),
                    _ => None,
                },
                m4_gap: match (emp.m4, lim.m4) {
                    (MomentValue::Finite(a), MomentValue::Finite(b)) => Some((a - b).abs()),
                    _ => None,
                },
                nu_gap: (emp.nu - lim.nu).abs(),
            })
        })
        .collect()
}

/// A weight law over which mean-field expectations are taken: either the
/// exact finite average over a sequence, or the limiting power law.
#[derive(Debug, Clone)]
pub enum WeightLaw {
    Finite(WeightSequence),
    /// Density `(tau-1) c_w^{tau-1} w^{-tau}` on `(c_w, inf)`. `tau` in (3,5];
    /// tau = 5 is admitted here for the log-corrected boundary curves.
    PowerLaw { tau: f64, cw: f64 },
}

impl WeightLaw {
    pub fn finite(ws: WeightSequence) -> Self {
        WeightLaw::Finite(ws)
    }

    pub fn power_law(tau: f64, cw: f64) -> Result<Self> {
        if !(tau > 3.0 && tau <= 5.0) {
            return Err(Error::InvalidParameter(format!(
                "tau must lie in (3,5], got {tau}"
            )));
        }
        if !(cw > 0.0) || !cw.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "cw must be finite and positive, got {cw}"
            )));
        }
        Ok(WeightLaw::PowerLaw { tau, cw })
    }

    pub fn moments(&self) -> MomentSet {
        match self {
            WeightLaw::Finite(ws) => ws.empirical_moments(),
            WeightLaw::PowerLaw { tau, cw } => limiting_moments_unchecked(*tau, *cw),
        }
    }

    /// `E[f(W)]`.
    ///
    /// Finite law: exact compensated average. Power law: the substitution
    /// `W = c_w u^{-1/(tau-1)}` with `u` uniform on (0,1) maps the expectation
    /// onto `∫_0^1 f(c_w u^{-1/(tau-1)}) du` — the unbounded tail is covered
    /// exactly, with no cutoff. A further `u = s^p` flattening tames the
    /// endpoint so the integrand stays bounded for every `f` with
    /// `|f(w)| = O(w^2)`.
    pub fn expect<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        match self {
            WeightLaw::Finite(ws) => {
                let mut acc = KahanSum::new();
                for &w in ws.weights() {
                    acc.add(f(w));
                }
                acc.value() / ws.n() as f64
            }
            WeightLaw::PowerLaw { tau, cw } => {
                let q = 1.0 / (tau - 1.0);
                let p = 2.0 * (tau - 1.0) / (tau - 3.0);
                let g = |s: f64| {
                    if s <= 0.0 {
                        return 0.0;
                    }
                    let w = cw * s.powf(-p * q);
                    p * s.powf(p - 1.0) * f(w)
                };
                quad::integrate(g, 0.0, 1.0, 1e-300, 1e-12, 2000)
                    .map(|r| r.value)
                    .unwrap_or_else(|_| {
                        // fall back to the best available estimate at the
                        // subdivision cap; the mean-field maps are smooth and
                        // this path is not hit in practice
                        quad::integrate(g, 0.0, 1.0, 1e-300, 1e-9, 4000)
                            .map(|r| r.value)
                            .unwrap_or(f64::NAN)
                    })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn power_law_closed_form_values() {
        // w_i = (4/i)^{1/3} for n=4, tau=4, cw=1
        let ws = WeightSequence::power_law(4, 4.0, 1.0).unwrap();
        assert_eq!(ws.weights()[3], 1.0); // i = n forces w = cw
        assert_relative_eq!(ws.weights()[0], 4.0_f64.powf(1.0 / 3.0), max_relative = 1e-15);
        assert_relative_eq!(ws.weights()[0], 1.58740105196819947, max_relative = 1e-14);
    }

    #[test]
    fn single_vertex_sequence() {
        let ws = WeightSequence::power_law(1, 4.0, 2.0).unwrap();
        assert_eq!(ws.weights(), &[2.0]);
    }

    #[test]
    fn power_law_is_strictly_decreasing_with_floor_cw() {
        for &(n, tau, cw) in &[(10usize, 3.5, 1.0), (57, 4.0, 2.5), (100, 4.9, 0.3)] {
            let ws = WeightSequence::power_law(n, tau, cw).unwrap();
            let w = ws.weights();
            for i in 1..n {
                assert!(w[i] < w[i - 1]);
            }
            assert_relative_eq!(w[n - 1], cw, max_relative = 1e-15);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(WeightSequence::power_law(0, 4.0, 1.0).is_err());
        assert!(WeightSequence::power_law(4, 3.0, 1.0).is_err());
        assert!(WeightSequence::power_law(4, 5.0, 1.0).is_err());
        assert!(WeightSequence::power_law(4, 4.0, 0.0).is_err());
        assert!(WeightSequence::from_vec(vec![]).is_err());
        assert!(WeightSequence::from_vec(vec![1.0, -2.0]).is_err());
        assert!(WeightSequence::from_vec(vec![1.0, 0.0]).is_err());
    }

    #[test]
    fn constant_weights_have_constant_moments() {
        let ws = WeightSequence::homogeneous(17, 1.0).unwrap();
        let m = ws.empirical_moments();
        assert_eq!(m.m1, 1.0);
        assert_eq!(m.m2, 1.0);
        assert_eq!(m.m3, MomentValue::Finite(1.0));
        assert_eq!(m.m4, MomentValue::Finite(1.0));
        assert_eq!(m.nu, 1.0);

        let ws = WeightSequence::homogeneous(5, 2.0).unwrap();
        let m = ws.empirical_moments();
        assert_relative_eq!(m.m2, 4.0, max_relative = 1e-15);
        assert_relative_eq!(m.moment(4).unwrap(), 16.0, max_relative = 1e-15);
    }

    #[test]
    fn two_point_moments() {
        let ws = WeightSequence::from_vec(vec![1.0, 3.0]).unwrap();
        let m = ws.empirical_moments();
        assert_relative_eq!(m.m2, 5.0, max_relative = 1e-15);
    }

    #[test]
    fn empirical_moments_n4_tau4() {
        // frozen from an independent 30-digit summation of the closed form
        let ws = WeightSequence::power_law(4, 4.0, 1.0).unwrap();
        let m = ws.empirical_moments();
        assert_relative_eq!(m.m1, 1.23699112954032038, max_relative = 1e-14);
        assert_relative_eq!(m.m2, 1.57966422007817639, max_relative = 1e-14);
        assert_relative_eq!(m.nu, 1.27702146147579662, max_relative = 1e-14);
    }

    #[test]
    fn limiting_moments_tau4() {
        // E[W^k] = (tau-1)/(tau-1-k); cross-checked against quadrature of
        // w^k (tau-1) w^{-tau} over (1, inf)
        let m = limiting_moments(4.0, 1.0).unwrap();
        assert_relative_eq!(m.m1, 1.5, max_relative = 1e-15);
        assert_relative_eq!(m.m2, 3.0, max_relative = 1e-15);
        assert_relative_eq!(m.nu, 2.0, max_relative = 1e-15);
        assert_eq!(m.m3, MomentValue::Infinite);
        assert_eq!(m.m4, MomentValue::Infinite);
        assert!(matches!(
            m.moment(4),
            Err(crate::error::Error::DivergentMoment { order: 4, .. })
        ));
    }

    #[test]
    fn limiting_moments_match_quadrature_including_tau5_boundary() {
        for &tau in &[3.5, 4.0, 4.5, 5.0] {
            let law = WeightLaw::power_law(tau, 1.3).unwrap();
            let m = law.moments();
            let m1_quad = law.expect(|w| w);
            let m2_quad = law.expect(|w| w * w);
            assert_relative_eq!(m.m1, m1_quad, max_relative = 1e-10);
            assert_relative_eq!(m.m2, m2_quad, max_relative = 1e-10);
        }
    }

    #[test]
    fn streaming_matches_materialized() {
        let ws = WeightSequence::power_law(1000, 3.7, 1.4).unwrap();
        let a = ws.empirical_moments();
        let b = power_law_moments_streaming(1000, 3.7, 1.4).unwrap();
        assert_relative_eq!(a.m1, b.m1, max_relative = 1e-15);
        assert_relative_eq!(a.m2, b.m2, max_relative = 1e-15);
        assert_relative_eq!(
            a.m4.finite().unwrap(),
            b.m4.finite().unwrap(),
            max_relative = 1e-15
        );
    }

    #[test]
    fn convergence_report_large_n() {
        // |m1(10^6) - 1.5| < 0.01 for tau=4; n=1 has m1=cw and gap 0.5
        let rows = moment_convergence_report(4.0, 1.0, &[1, 100_000, 1_000_000]).unwrap();
        assert_relative_eq!(rows[0].m1_gap, 0.5, max_relative = 1e-12);
        assert!(rows[2].m1_gap < 0.01);
        assert!(rows[2].m2_gap < rows[1].m2_gap);
        assert!(rows[2].m3_gap.is_none() && rows[2].m4_gap.is_none());
    }

    #[test]
    fn convergence_report_tau35() {
        let rows = moment_convergence_report(3.5, 1.0, &[100_000]).unwrap();
        assert!(rows[0].m2_gap.is_finite());
    }
}
