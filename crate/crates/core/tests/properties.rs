use memwave::criticality::{self, exact, DataTraits, Extended, Regime};
use memwave::diagnostics::psi;
use memwave::frac_ops::{rl_integral, FracOrder, TimeGrid, TimeSeries};
use memwave::spectral::{k0_hat, k1_hat};
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn series(values: Vec<f64>) -> TimeSeries {
    let grid = TimeGrid::new(1.0 / (values.len() - 1) as f64, values.len() - 1).unwrap();
    TimeSeries::new(grid, values).unwrap()
}

fn values_strategy() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, 2..80)
}

proptest! {
    #[test]
    fn rl_integral_is_linear(
        g1 in values_strategy(),
        noise in prop::collection::vec(-10.0..10.0f64, 80),
        a in -3.0..3.0f64,
        b in -3.0..3.0f64,
        alpha in 0.05..0.95f64,
    ) {
        let g2: Vec<f64> = noise[..g1.len()].to_vec();
        let order = FracOrder::new(alpha).unwrap();
        let combo: Vec<f64> = g1.iter().zip(&g2).map(|(x, y)| a * x + b * y).collect();
        let lhs = rl_integral(&series(combo), order).unwrap();
        let j1 = rl_integral(&series(g1), order).unwrap();
        let j2 = rl_integral(&series(g2), order).unwrap();
        for ((l, x), y) in lhs.values().iter().zip(j1.values()).zip(j2.values()) {
            let want = a * x + b * y;
            let scale = 1.0 + (a * x).abs() + (b * y).abs();
            prop_assert!((l - want).abs() <= 1e-12 * scale, "{l} vs {want}");
        }
    }

    #[test]
    fn rl_integral_preserves_positivity(
        g in prop::collection::vec(0.0..10.0f64, 2..120),
        alpha in 0.01..0.99f64,
    ) {
        let out = rl_integral(&series(g), FracOrder::new(alpha).unwrap()).unwrap();
        prop_assert!(out.values().iter().all(|v| *v >= 0.0));
    }

    #[test]
    fn symbols_are_bounded(t in 0.0..200.0f64, xi2 in 0.0..50.0f64) {
        let k0 = k0_hat(t, xi2).unwrap();
        let k1 = k1_hat(t, xi2).unwrap();
        prop_assert!(k0.abs() <= 1.0 + 1e-12);
        prop_assert!(k1 >= -2.0 && k1 <= t.min(2.0) + 1e-12, "k1 = {k1}");
    }

    #[test]
    fn psi_lower_bound_and_monotonicity(
        frac in 0.0..0.999f64,
        t in 0.0..50.0f64,
        h in 1e-3..10.0f64,
        k in 0.1..10.0f64,
        angle in 0.0..std::f64::consts::TAU,
    ) {
        let r = frac * (t + k);
        let x = [r * angle.cos(), r * angle.sin()];
        let now = psi(&x, t, k).unwrap();
        let later = psi(&x, t + h, k).unwrap();
        let lower = r * r / (4.0 * (t + k));
        prop_assert!(now >= lower * (1.0 - 1e-12) - 1e-15, "{now} < {lower}");
        prop_assert!(later <= now + 1e-15);
        prop_assert!(now >= 0.0);
    }

    #[test]
    fn scaling_sign_matches_threshold(
        n in 1u32..=3,
        g_num in 1i64..1000,
        p_num in 1i64..8000,
        on_threshold in any::<bool>(),
    ) {
        let gamma = exact::rational(g_num, 1000);
        let e = exact::exponents(n, &gamma);
        let p = match (&e.p_gamma, on_threshold) {
            (Some(pg), true) => pg.clone(),
            _ => exact::rational(1000 + p_num, 1000),
        };
        let (e1, e2) = exact::scaling_exponents(n, &gamma, &p);
        prop_assert!(e1 < e2);
        match &e.p_gamma {
            Some(pg) => {
                prop_assert_eq!(e2.is_zero(), &p == pg);
                prop_assert_eq!(e2.is_negative(), &p < pg);
            }
            None => prop_assert!(e2.is_negative()),
        }
    }

    #[test]
    fn p_gamma_below_other_thresholds(n in 1u32..=3, g_num in 1i64..10_000) {
        let gamma = exact::rational(g_num, 10_000);
        let floor = exact::rational(n as i64 - 2, n as i64);
        prop_assume!(gamma > floor);
        let e = exact::exponents(n, &gamma);
        // `None` is +inf on both sides.
        let at_most = |a: &Option<BigRational>, b: &Option<BigRational>| match (a, b) {
            (_, None) => true,
            (None, Some(_)) => false,
            (Some(x), Some(y)) => x <= y,
        };
        prop_assert!(at_most(&e.p_gamma, &e.p_n()));
        prop_assert!(at_most(&e.p_gamma, &e.sobolev_cap));
        if let Some(pg) = &e.p_gamma {
            prop_assert!(*pg > BigRational::one());
        }
    }

    #[test]
    fn classify_is_total(
        n in 0u32..6,
        gamma in -0.5..1.5f64,
        p in -1.0..10.0f64,
        positive_mean in any::<bool>(),
        small_data in any::<bool>(),
        compact_support in any::<bool>(),
    ) {
        let traits = DataTraits { positive_mean, small_data, compact_support };
        let verdict = criticality::classify(n, gamma, p, traits);
        if verdict.tag != Regime::OutsideTheoremScope {
            prop_assert!(!verdict.citation.is_empty());
        }
    }

    #[test]
    fn infinite_exponents_follow_denominators(n in 1u32..=3, gamma in 0.001..0.999f64) {
        let e = criticality::compute_exponents(n, gamma).unwrap();
        let nf = n as f64;
        prop_assert_eq!(e.p_gamma == Extended::Infinite, nf - 2.0 + 2.0 * gamma <= 0.0);
        prop_assert_eq!(e.sobolev_cap == Extended::Infinite, n <= 2);
    }
}

#[test]
fn p_gamma_approaches_fujita_monotonically() {
    for n in 1..=3 {
        let gaps: Vec<f64> = criticality::gamma_limits(n).unwrap().rows.iter().map(|r| r.p_gamma_gap).collect();
        assert!(gaps.windows(2).all(|w| w[1] < w[0]), "n={n}: {gaps:?}");
    }
}
