//! Adaptive Gauss-Kronrod quadrature (15-point rule with 7-point Gauss embedding).
//!
//! Finite intervals only; callers map infinite tails onto finite ranges
//! analytically before integrating.

use crate::error::{Error, Result};

// Nodes and weights of the 15-point Kronrod rule (positive abscissae).
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_17,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_42,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_82,
];

// Embedded 7-point Gauss weights (odd-indexed Kronrod abscissae).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy)]
pub struct QuadResult {
    pub value: f64,
    pub abs_error: f64,
    pub subdivisions: usize,
}

/// One application of the G7-K15 pair on [a, b]; returns (kronrod, error estimate).
fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);

    let f_center = f(center);
    let mut kronrod = f_center * WGK[7];
    let mut gauss = f_center * WG[3];
    let mut res_abs = kronrod.abs();

    let mut fv = [0.0_f64; 14];
    for j in 0..7 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv[j] = f1;
        fv[7 + j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }

    let mean = kronrod * 0.5;
    let mut res_asc = WGK[7] * (f_center - mean).abs();
    for j in 0..7 {
        res_asc += WGK[j] * ((fv[j] - mean).abs() + (fv[7 + j] - mean).abs());
    }

    let value = kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();

    // QUADPACK-style rescaled error estimate
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (value, err)
}

struct Interval {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

/// Integrate `f` over [a, b], bisecting the worst interval until the summed
/// error estimate satisfies `abs_tol` or `rel_tol`, whichever is looser.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    rel_tol: f64,
    max_subdivisions: usize,
) -> Result<QuadResult> {
    if a == b {
        return Ok(QuadResult {
            value: 0.0,
            abs_error: 0.0,
            subdivisions: 0,
        });
    }
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![Interval {
        a,
        b,
        value: v,
        error: e,
    }];
    let mut subdivisions = 0;

    loop {
        let total: f64 = intervals.iter().map(|i| i.value).sum();
        let err: f64 = intervals.iter().map(|i| i.error).sum();
        let target = abs_tol.max(rel_tol * total.abs());
        if err <= target {
            return Ok(QuadResult {
                value: total,
                abs_error: err,
                subdivisions,
            });
        }
        if subdivisions >= max_subdivisions {
            return Err(Error::QuadratureFailure {
                estimate: err,
                tolerance: target,
            });
        }

        let worst = intervals
            .iter()
            .enumerate()
            .max_by(|(_, x), (_, y)| x.error.total_cmp(&y.error))
            .map(|(i, _)| i)
            .expect("non-empty interval list");
        let Interval { a, b, .. } = intervals.swap_remove(worst);
        let mid = 0.5 * (a + b);
        if mid <= a || mid >= b {
            // interval at floating-point resolution; keep it and give up refining
            let (v, _) = gk15(&f, a, b);
            intervals.push(Interval {
                a,
                b,
                value: v,
                error: 0.0,
            });
            continue;
        }
        let (v1, e1) = gk15(&f, a, mid);
        let (v2, e2) = gk15(&f, mid, b);
        intervals.push(Interval {
            a,
            b: mid,
            value: v1,
            error: e1,
        });
        intervals.push(Interval {
            a: mid,
            b,
            value: v2,
            error: e2,
        });
        subdivisions += 1;
    }
}

/// Convenience wrapper with the default subdivision budget.
pub fn integrate_auto<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64) -> Result<QuadResult> {
    integrate(f, a, b, 1e-300, rel_tol, 400)
}
