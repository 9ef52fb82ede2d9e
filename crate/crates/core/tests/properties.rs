//! Property tests for the structural invariants: moment inequalities,
//! symmetries of the spin law and of the auxiliary-field exponent, coupling
//! monotonicity, and the scaling-window reduction.

use icw::clt::enumerate::{enumerate_spin_law, Measure};
use icw::clt::limit::{limit_density_f, window_density, LimitLaw};
use icw::clt::GnFunction;
use icw::meanfield::solve_fixed_point;
use icw::model::{grg_coupling, ModelKind, ModelSpec};
use icw::weights::{WeightLaw, WeightSequence};
use proptest::prelude::*;

fn weight_vec(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05f64..20.0, 1..max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cauchy_schwarz_chain_holds(w in weight_vec(40)) {
        let ws = WeightSequence::from_vec(w).unwrap();
        let m = ws.empirical_moments();
        let m3 = m.m3.finite().unwrap();
        let m4 = m.m4.finite().unwrap();
        // m2^2 <= m1 m3 and m3^2 <= m2 m4, with rounding slack
        prop_assert!(m.m2 * m.m2 <= m.m1 * m3 * (1.0 + 1e-12));
        prop_assert!(m3 * m3 <= m.m2 * m4 * (1.0 + 1e-12));
        prop_assert!(m.nu == m.m2 / m.m1);
        prop_assert!(m.m1 > 0.0 && m.m2 > 0.0);
    }

    #[test]
    fn grg_coupling_positive_and_monotone(beta in 0.01f64..3.0, p in 1e-8f64..0.999) {
        let j = grg_coupling(beta, p);
        prop_assert!(j > 0.0);
        prop_assert!(grg_coupling(beta, (p * 1.01).min(1.0)) >= j);
        prop_assert!(grg_coupling(beta + 0.05, p) > j);
    }

    #[test]
    fn gn_even_in_z(w in weight_vec(12), theta in 0.0f64..2.0, z in -8.0f64..8.0) {
        let ws = WeightSequence::from_vec(w).unwrap();
        let gn = GnFunction::new(ws, theta, 0.75).unwrap();
        prop_assert_eq!(gn.eval(z, 0.0).to_bits(), gn.eval(-z, 0.0).to_bits());
    }

    #[test]
    fn gn_nonnegative_below_criticality(w in weight_vec(12), z in -6.0f64..6.0) {
        let ws = WeightSequence::from_vec(w).unwrap();
        let nu = ws.empirical_moments().nu;
        // any theta with theta nu <= 1
        let gn = GnFunction::new(ws, 0.93 / nu, 0.75).unwrap();
        prop_assert!(gn.eval(z, 0.0) >= -1e-15);
    }

    #[test]
    fn spin_law_is_symmetric_and_normalized(
        w in weight_vec(8),
        theta in 0.0f64..1.6,
    ) {
        let ws = WeightSequence::from_vec(w).unwrap();
        let spec = ModelSpec::from_theta(ModelKind::RankOneIcw, theta, 0.0).unwrap();
        let law = enumerate_spin_law(&ws, &spec, Measure::Tilde).unwrap();
        let total: f64 = law.support().map(|(_, p)| p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        for (s, p) in law.support() {
            prop_assert!((p - law.prob_of_sum(-s)).abs() < 1e-11);
        }
    }

    #[test]
    fn window_density_reduces_at_b_zero(x in -30.0f64..30.0, tau in 3.1f64..4.9) {
        let mom = icw::weights::limiting_moments(tau, 1.0).unwrap();
        let law = LimitLaw::power_law(tau).unwrap();
        prop_assert_eq!(
            window_density(x, &law, &mom).to_bits(),
            (-limit_density_f(x, &law)).exp().to_bits()
        );
    }

    #[test]
    fn fixed_point_residual_contract(
        w in weight_vec(20),
        theta in 0.0f64..2.5,
        b in 0.0f64..2.0,
    ) {
        let law = WeightLaw::finite(WeightSequence::from_vec(w).unwrap());
        let spec = ModelSpec::from_theta(ModelKind::RankOneIcw, theta, b).unwrap();
        let fp = solve_fixed_point(&spec, &law, 1e-11).unwrap();
        prop_assert!(fp.residual <= 1e-11);
        let m1 = law.moments().m1;
        prop_assert!(fp.z_star <= (theta * m1).sqrt() * (1.0 + 1e-12));
    }
}
