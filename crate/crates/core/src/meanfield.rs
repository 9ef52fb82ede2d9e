//! Mean-field fixed point, magnetization and susceptibility.
//!
//! Everything here is a function of the effective coupling `theta` and the
//! field `B` alone; the model kind enters only through
//! [`ModelSpec::theta`](crate::model::ModelSpec::theta). The fixed-point map
//!
//! `Φ(z) = E[tanh(α W z + B) α W]`, with `α = sqrt(theta / E[W])`,
//!
//! is concave and increasing on `z >= 0` and bounded by `sqrt(theta E[W])`,
//! so the positive root is bracketed and the hybrid false-position solve
//! cannot escape.

use crate::error::{Error, Result};
use crate::model::ModelSpec;
use crate::weights::WeightLaw;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Zero,
    Positive,
}

/// Solution of `z = Φ(z)` together with its field derivative.
#[derive(Debug, Clone, Copy)]
pub struct FixedPointSolution {
    pub z_star: f64,
    pub residual: f64,
    pub iterations: u32,
    /// `∂z*/∂B`; `None` exactly at the critical point (`theta nu = 1`, `B = 0`),
    /// where the linearized denominator vanishes.
    pub dz_db: Option<f64>,
    pub branch: Branch,
    /// Set when the spec sits exactly at `theta nu = 1` with `B = 0`.
    pub critical: bool,
}

struct MeanField<'a> {
    theta: f64,
    b: f64,
    alpha: f64,
    m1: f64,
    nu: f64,
    law: &'a WeightLaw,
}

impl<'a> MeanField<'a> {
    fn new(spec: &ModelSpec, law: &'a WeightLaw) -> Self {
        let mom = law.moments();
        let theta = spec.theta();
        Self {
            theta,
            b: spec.b_field,
            alpha: (theta / mom.m1).sqrt(),
            m1: mom.m1,
            nu: mom.nu,
            law,
        }
    }

    fn phi(&self, z: f64) -> f64 {
        if self.theta == 0.0 {
            return 0.0;
        }
        let (alpha, b) = (self.alpha, self.b);
        alpha * self.law.expect(|w| (alpha * w * z + b).tanh() * w)
    }

    fn magnetization(&self, z_star: f64) -> f64 {
        let (alpha, b) = (self.alpha, self.b);
        self.law.expect(|w| (alpha * w * z_star + b).tanh())
    }

    /// `∂z*/∂B` from the linearized fixed-point equation:
    /// `dz = E[αW(1-t^2)] / (1 - E[α^2 W^2 (1-t^2)])`, `t = tanh(αWz* + B)`.
    fn dz_db(&self, z_star: f64) -> Option<f64> {
        if z_star == 0.0 && self.b == 0.0 {
            // t = 0: closed form, exact
            let denom = 1.0 - self.theta * self.nu;
            if denom == 0.0 {
                return None;
            }
            return Some(self.alpha * self.m1 / denom);
        }
        let (alpha, b) = (self.alpha, self.b);
        let num = alpha
            * self.law.expect(|w| {
                let t = (alpha * w * z_star + b).tanh();
                w * (1.0 - t * t)
            });
        let den = 1.0
            - alpha
                * alpha
                * self.law.expect(|w| {
                    let t = (alpha * w * z_star + b).tanh();
                    w * w * (1.0 - t * t)
                });
        if den <= 0.0 {
            return None;
        }
        Some(num / den)
    }

    fn susceptibility(&self, z_star: f64, dz: f64) -> f64 {
        let (alpha, b) = (self.alpha, self.b);
        self.law.expect(|w| {
            let t = (alpha * w * z_star + b).tanh();
            (1.0 + alpha * w * dz) * (1.0 - t * t)
        })
    }
}

/// The map `Φ(z) = E[tanh(αWz + B) αW]` of the fixed-point equation.
pub fn fixed_point_map(z: f64, spec: &ModelSpec, law: &WeightLaw) -> f64 {
    MeanField::new(spec, law).phi(z)
}

/// Solve `z = Φ(z)` on the physical branch.
///
/// * `B > 0`: the unique positive root, bracketed on `[0, sqrt(theta m1)]`.
/// * `B = 0`, `theta nu <= 1`: `z* = 0` (flagged `critical` at equality).
/// * `B = 0`, `theta nu > 1`: the positive root solved directly, which
///   realizes `z*_0 = lim_{B -> 0+} z*` without extrapolation.
pub fn solve_fixed_point(
    spec: &ModelSpec,
    law: &WeightLaw,
    tol: f64,
) -> Result<FixedPointSolution> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "tolerance must be positive, got {tol}"
        )));
    }
    let mf = MeanField::new(spec, law);

    if mf.theta == 0.0 {
        return Ok(FixedPointSolution {
            z_star: 0.0,
            residual: 0.0,
            iterations: 0,
            dz_db: Some(0.0),
            branch: Branch::Zero,
            critical: false,
        });
    }

    let tnu = mf.theta * mf.nu;
    if mf.b == 0.0 && tnu <= 1.0 {
        let critical = tnu == 1.0;
        return Ok(FixedPointSolution {
            z_star: 0.0,
            residual: 0.0,
            iterations: 0,
            dz_db: mf.dz_db(0.0),
            branch: Branch::Zero,
            critical,
        });
    }

    let g = |z: f64| mf.phi(z) - z;

    // Φ is bounded by alpha m1 = sqrt(theta m1)
    let mut hi = mf.alpha * mf.m1;
    let mut ghi = g(hi);
    let mut expand = 0;
    while ghi >= 0.0 {
        hi *= 2.0;
        ghi = g(hi);
        expand += 1;
        if expand > 8 {
            return Err(Error::RootSolve { lo: 0.0, hi });
        }
    }

    let (mut lo, mut glo) = if mf.b > 0.0 {
        (0.0, mf.phi(0.0))
    } else {
        // supercritical zero-field branch: Φ(z)/z -> theta nu > 1 near 0
        let mut lo = hi * 1e-3;
        let mut glo = g(lo);
        while glo <= 0.0 && lo > 1e-290 {
            lo *= 0.5;
            glo = g(lo);
        }
        (lo, glo)
    };
    if glo <= 0.0 {
        if glo == 0.0 {
            // landed on the root exactly
            return Ok(finish(&mf, lo, 0.0, 0));
        }
        return Err(Error::RootSolve { lo, hi });
    }

    // Illinois false position: keeps the bracket, converges superlinearly
    let mut side = 0i8;
    let mut iterations = 0u32;
    loop {
        let mut x = (lo * ghi - hi * glo) / (ghi - glo);
        if !x.is_finite() || x <= lo.min(hi) || x >= lo.max(hi) {
            x = 0.5 * (lo + hi);
        }
        let gx = g(x);
        iterations += 1;
        if gx.abs() <= tol {
            return Ok(finish(&mf, x, gx.abs(), iterations));
        }
        if iterations >= 500 {
            return Err(Error::RootSolve { lo, hi });
        }
        if gx > 0.0 {
            lo = x;
            glo = gx;
            if side == 1 {
                ghi *= 0.5;
            }
            side = 1;
        } else {
            hi = x;
            ghi = gx;
            if side == -1 {
                glo *= 0.5;
            }
            side = -1;
        }
    }
}

fn finish(mf: &MeanField, z: f64, residual: f64, iterations: u32) -> FixedPointSolution {
    FixedPointSolution {
        z_star: z,
        residual,
        iterations,
        dz_db: mf.dz_db(z),
        branch: if z > 0.0 { Branch::Positive } else { Branch::Zero },
        critical: false,
    }
}

/// Magnetization `M = E[tanh(αWz* + B)]` at a solved fixed point.
pub fn magnetization(spec: &ModelSpec, law: &WeightLaw, z_star: f64) -> f64 {
    MeanField::new(spec, law).magnetization(z_star)
}

/// Susceptibility `χ = E[(1 + αW ∂z*/∂B)(1 - tanh^2(αWz* + B))]`.
///
/// At `B = 0` below the critical point this reduces to the closed form
/// `1 + theta m1 / (1 - theta nu)`, which the zero-branch solution realizes
/// exactly. Fails with [`Error::CriticalDivergence`] when the linearized
/// denominator has vanished.
pub fn susceptibility(
    spec: &ModelSpec,
    law: &WeightLaw,
    fp: &FixedPointSolution,
) -> Result<f64> {
    let dz = fp.dz_db.ok_or(Error::CriticalDivergence)?;
    Ok(MeanField::new(spec, law).susceptibility(fp.z_star, dz))
}

/// One `(beta, B)` record of the thermodynamic curves.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ThermoPoint {
    pub beta: f64,
    pub b_field: f64,
    pub z_star: f64,
    pub magnetization: f64,
    pub susceptibility: f64,
}

pub fn thermo_point(spec: &ModelSpec, law: &WeightLaw, tol: f64) -> Result<ThermoPoint> {
    let fp = solve_fixed_point(spec, law, tol)?;
    Ok(ThermoPoint {
        beta: spec.beta,
        b_field: spec.b_field,
        z_star: fp.z_star,
        magnetization: magnetization(spec, law, fp.z_star),
        susceptibility: susceptibility(spec, law, &fp)?,
    })
}
