//! Property-based checks of the numerical kernels, the m.g.f. layer, the
//! panel statistics, the Edgeworth expansions and the CSV round trip.

use panel_power::edgeworth::{edgeworth_cdf, EdgeworthQuery, Hypothesis};
use panel_power::estimators::panel_statistics;
use panel_power::fredholm::{joint_mgf, mgf_du0, mgf_du0_complex_step, mgf_dv0, mgf_dv0_complex_step};
use panel_power::io::{parse_panel, round_sig, write_panel_to};
use panel_power::kernels::{cos_coef, kappa_c, kappa_d, kappa_m, kappa_s, sin_coef};
use panel_power::power::{norm_cdf, norm_pdf};
use panel_power::{CMomentSummary, DeterministicCase, PanelDataset, TestVariant};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

fn closed_c(z: f64) -> f64 {
    if z >= 0.0 {
        z.sqrt().cos()
    } else {
        (-z).sqrt().cosh()
    }
}

fn closed_s(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else if z > 0.0 {
        z.sqrt().sin() / z.sqrt()
    } else {
        (-z).sqrt().sinh() / (-z).sqrt()
    }
}

fn series(coef: fn(usize) -> f64, skip: usize, z: f64) -> f64 {
    (skip..skip + 40).rev().fold(0.0, |acc, k| acc * z + coef(k))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

fn case_strategy() -> impl Strategy<Value = DeterministicCase> {
    prop_oneof![
        Just(DeterministicCase::None),
        Just(DeterministicCase::Intercept),
        Just(DeterministicCase::InterceptTrend),
    ]
}

fn random_panel(seed: u64, n: usize, periods: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let mut z = vec![0.0; periods + 1];
            for t in 1..=periods {
                let e: f64 = StandardNormal.sample(&mut rng);
                z[t] = 0.9 * z[t - 1] + e;
            }
            z
        })
        .collect()
}

fn statistics(values: Vec<Vec<f64>>) -> Vec<f64> {
    let panel = PanelDataset::from_series(values).unwrap();
    panel_statistics(&panel, &TestVariant::TABLE)
        .unwrap()
        .iter()
        .map(|o| o.statistic)
        .collect()
}

fn assert_close(a: &[f64], b: &[f64], keep: impl Fn(TestVariant) -> bool) {
    for ((x, y), v) in a.iter().zip(b).zip(TestVariant::TABLE) {
        if keep(v) {
            assert!((x - y).abs() <= 1e-9 * (1.0 + y.abs()), "{v}: {x} vs {y}");
        }
    }
}

proptest! {
    #[test]
    fn kernels_agree_with_closed_forms_and_series(z in -4.0f64..4.0) {
        prop_assert!(rel(kappa_c(z), closed_c(z)) < 1e-12);
        prop_assert!(rel(kappa_s(z), closed_s(z)) < 1e-12);
        prop_assert!(rel(kappa_c(z), series(cos_coef, 0, z)) < 1e-12);
        prop_assert!(rel(kappa_s(z), series(sin_coef, 0, z)) < 1e-12);
        prop_assert!(rel(kappa_m(z), series(cos_coef, 1, z)) < 1e-12);
        let d = series(sin_coef, 1, z) - series(cos_coef, 1, z);
        prop_assert!(rel(kappa_d(z), d) < 1e-12);
    }

    #[test]
    fn mgf_is_normalised(case in case_strategy(), c in -3.0f64..10.0) {
        let m = joint_mgf(case, 0.0, 0.0, c).unwrap();
        prop_assert!((m - 1.0).abs() < 1e-12, "{m}");
    }

    #[test]
    fn derivatives_match_complex_step(case in case_strategy(), v in 0.0f64..30.0, c in -2.0f64..8.0) {
        let du = mgf_du0(case, v, c).unwrap();
        let du_cs = mgf_du0_complex_step(case, v, c);
        prop_assert!((du - du_cs).abs() <= 1e-8 * du_cs.abs().max(1.0), "du {du} vs {du_cs}");
        let dv = mgf_dv0(case, v, c).unwrap();
        let dv_cs = mgf_dv0_complex_step(case, v, c);
        prop_assert!((dv - dv_cs).abs() <= 1e-8 * dv_cs.abs().max(1.0), "dv {dv} vs {dv_cs}");
    }

    #[test]
    fn statistics_are_scale_invariant(
        seed in any::<u64>(),
        n in 1usize..6,
        periods in 8usize..40,
        scales in proptest::collection::vec(0.01f64..100.0, 6),
    ) {
        let base = random_panel(seed, n, periods);
        let scaled: Vec<Vec<f64>> = base
            .iter()
            .zip(&scales)
            .map(|(z, s)| z.iter().map(|x| x * s).collect())
            .collect();
        assert_close(&statistics(scaled), &statistics(base), |_| true);
    }

    #[test]
    fn demeaned_statistics_ignore_unit_constants(
        seed in any::<u64>(),
        n in 1usize..6,
        periods in 8usize..40,
        shifts in proptest::collection::vec(-50.0f64..50.0, 6),
    ) {
        let base = random_panel(seed, n, periods);
        let shifted: Vec<Vec<f64>> = base
            .iter()
            .zip(&shifts)
            .map(|(z, b)| z.iter().map(|x| x + b).collect())
            .collect();
        assert_close(&statistics(shifted), &statistics(base), |v| v.case() != DeterministicCase::None);
    }

    #[test]
    fn detrended_statistics_ignore_unit_trends(
        seed in any::<u64>(),
        n in 1usize..6,
        periods in 8usize..40,
        b0 in proptest::collection::vec(-20.0f64..20.0, 6),
        b1 in proptest::collection::vec(-2.0f64..2.0, 6),
    ) {
        let base = random_panel(seed, n, periods);
        let trended: Vec<Vec<f64>> = base
            .iter()
            .enumerate()
            .map(|(i, z)| z.iter().enumerate().map(|(t, x)| x + b0[i] + b1[i] * t as f64).collect())
            .collect();
        assert_close(&statistics(trended), &statistics(base), |v| {
            v.case() == DeterministicCase::InterceptTrend
        });
    }

    #[test]
    fn local_expansion_with_zero_moments_is_the_null(x in -4.0f64..4.0, n in 1u64..10_000) {
        for variant in TestVariant::TABLE {
            let q = |hypothesis| EdgeworthQuery { variant, x, n, moments: CMomentSummary::zero(), hypothesis };
            let null = edgeworth_cdf(&q(Hypothesis::Null)).unwrap();
            let local = edgeworth_cdf(&q(Hypothesis::Local)).unwrap();
            if variant == TestVariant::LlcT31 {
                // Its local (x²−1)φ(x) term carries no c-moment factor, so
                // it survives at zero moments.
                let term = 118445.0 / 9555392.0 * (105.0f64 / 277.0).sqrt() / n as f64
                    * (x * x - 1.0) * norm_pdf(x);
                let unclamped = (null + term).clamp(0.0, 1.0);
                prop_assert!((local - unclamped).abs() < 1e-15);
            } else {
                prop_assert_eq!(null, local);
            }
        }
    }

    #[test]
    fn expansions_tend_to_the_normal(x in -4.0f64..4.0) {
        for variant in TestVariant::TABLE {
            let q = EdgeworthQuery {
                variant,
                x,
                n: 100_000_000,
                moments: CMomentSummary { cbar: 4.0, c2bar: 21.0, c3bar: 128.0, c4bar: 819.2 },
                hypothesis: Hypothesis::Local,
            };
            prop_assert!((edgeworth_cdf(&q).unwrap() - norm_cdf(x)).abs() < 1e-3);
        }
    }

    #[test]
    fn csv_round_trip_is_byte_stable(
        seed in any::<u64>(),
        n in 1usize..5,
        periods in 4usize..12,
        scale in -6i32..6,
    ) {
        let values: Vec<Vec<f64>> = random_panel(seed, n, periods)
            .into_iter()
            .map(|z| z.into_iter().map(|x| x * 10f64.powi(scale)).collect())
            .collect();
        let panel = PanelDataset::new((0..n).map(|i| format!("unit {i}")).collect(), values).unwrap();
        let mut first = Vec::new();
        write_panel_to(&panel, &mut first).unwrap();
        let back = parse_panel(first.as_slice()).unwrap();
        prop_assert_eq!(back.units(), panel.units());
        for (a, b) in back.all_series().iter().zip(panel.all_series()) {
            for (x, y) in a.iter().zip(b) {
                prop_assert_eq!(*x, round_sig(*y));
            }
        }
        let mut second = Vec::new();
        write_panel_to(&back, &mut second).unwrap();
        prop_assert_eq!(first, second);
    }
}
