mod common;

use agora_core::analytics::stats::stability_from_closes;
use agora_core::analytics::{
    acf_abs, ljung_box, moments, read_transactions, stratification_report, stylized_facts, SnapshotRow,
};
use agora_core::engine::{run_scenario, TRANSACTIONS_FILE};
use agora_core::WorldConfig;
use proptest::prelude::*;

#[test]
fn gaussian_moments_are_near_zero() {
    let m = moments(&common::gaussian(1_000_000, 1)).unwrap();
    assert!(m.excess_kurtosis.abs() < 0.05, "{m:?}");
    assert!(m.skewness.abs() < 0.05, "{m:?}");
    assert!((m.std - 1.0).abs() < 0.01);
}

#[test]
fn student_t_twelve_kurtosis() {
    // 6 / (nu - 4) with nu = 12; the eighth moment exists, so the estimate settles.
    let m = moments(&common::student_t(12.0, 1_000_000, 2)).unwrap();
    assert!((m.excess_kurtosis - 0.75).abs() < 0.1, "{m:?}");
}

#[test]
fn moments_of_a_known_discrete_sample() {
    // Values {-2, 0, 0, 2}: m2 = 2, m4 = 8, kurtosis 8/4 = 2, excess -1.
    let m = moments(&[-2.0, 0.0, 0.0, 2.0]).unwrap();
    assert_eq!((m.mean, m.skewness, m.excess_kurtosis), (0.0, 0.0, -1.0));
    // {0, 0, 0, 4}: mean 1, m2 = 3, m3 = 6, skewness 6 / 3^1.5.
    let m = moments(&[0.0, 0.0, 0.0, 4.0]).unwrap();
    assert!((m.skewness - 6.0 / 3f64.powf(1.5)).abs() < 1e-12);
}

#[test]
fn white_noise_has_no_volatility_memory() {
    let x = common::gaussian(100_000, 3);
    let rho = acf_abs(&x, 20).unwrap();
    assert!(rho[0].abs() < 4.0 / (x.len() as f64).sqrt());
}

#[test]
fn acf_matches_direct_formula() {
    let x = common::gaussian(500, 4);
    let a: Vec<f64> = x.iter().map(|v| v.abs()).collect();
    let mean = a.iter().sum::<f64>() / a.len() as f64;
    let denom: f64 = a.iter().map(|v| (v - mean).powi(2)).sum();
    let rho = acf_abs(&x, 5).unwrap();
    for k in 1..=5 {
        let mut num = 0.0;
        for t in k..a.len() {
            num += (a[t] - mean) * (a[t - k] - mean);
        }
        assert!((rho[k - 1] - num / denom).abs() < 1e-12);
    }
}

#[test]
fn garch_clustering_is_detected() {
    let x = common::garch(0.1, 0.85, 100_000, 5);
    assert!(acf_abs(&x, 1).unwrap()[0] > 0.1);
    assert!(ljung_box(&x, 20).unwrap().p_value < 1e-6);
}

#[test]
fn shuffling_destroys_clustering() {
    let x = common::garch(0.1, 0.85, 20_000, 6);
    let mut insignificant = 0;
    for seed in 0..40 {
        if ljung_box(&common::shuffled(&x, seed), 20).unwrap().p_value > 0.01 {
            insignificant += 1;
        }
    }
    assert!(insignificant >= 38, "{insignificant}/40");
}

#[test]
fn ljung_box_statistic_by_hand() {
    let x = common::gaussian(1000, 7);
    let rho = acf_abs(&x, 3).unwrap();
    let n = 1000.0;
    let q = n * (n + 2.0) * (rho[0].powi(2) / (n - 1.0) + rho[1].powi(2) / (n - 2.0) + rho[2].powi(2) / (n - 3.0));
    let lb = ljung_box(&x, 3).unwrap();
    assert!((lb.statistic - q).abs() < 1e-9 * q.max(1.0));
    assert_eq!(lb.dof, 3);
    assert!((0.0..=1.0).contains(&lb.p_value));
}

proptest! {
    #[test]
    fn drawdown_and_range_bounds(closes in prop::collection::vec(0.01f64..1e6, 1..200)) {
        let s = stability_from_closes(&closes).unwrap();
        prop_assert!((0.0..1.0).contains(&s.max_drawdown));
        prop_assert!(s.log_price_range >= 0.0);
        // Brute force over all peak-trough pairs.
        let mut mdd: f64 = 0.0;
        for i in 0..closes.len() {
            for j in i..closes.len() {
                mdd = mdd.max(1.0 - closes[j] / closes[i]);
            }
        }
        prop_assert!((s.max_drawdown - mdd).abs() < 1e-12);
    }
}

#[test]
fn quadratic_fit_recovers_square_law() {
    let rows: Vec<SnapshotRow> = (0..30)
        .map(|i| {
            let h = 25.0 + 50.0 * i as f64;
            SnapshotRow {
                tick: 1,
                agent_id: i,
                policy: "StudentInvestor".into(),
                tag: String::new(),
                balance: h * h,
                education: h,
                residential_tier: 3,
                job: String::new(),
                job_tier: None,
                net_worth: h * h,
                inventory: String::new(),
            }
        })
        .collect();
    let r = stratification_report(&rows).unwrap();
    let [c0, c1, c2] = r.quadratic.unwrap();
    assert!((c2 - 1.0).abs() < 1e-9, "{c2}");
    assert!(c1.abs() < 1e-6 && c0.abs() < 1e-3, "{c0} {c1}");
}

#[test]
fn report_from_a_run_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    run_scenario(WorldConfig::shipped("market-life").unwrap(), 1500, dir.path()).unwrap();
    let log = read_transactions(&dir.path().join(TRANSACTIONS_FILE)).unwrap();
    let a = serde_json::to_string(&stylized_facts(&log, "Wheat", 300, 10).unwrap()).unwrap();
    let again = read_transactions(&dir.path().join(TRANSACTIONS_FILE)).unwrap();
    let b = serde_json::to_string(&stylized_facts(&again, "Wheat", 300, 10).unwrap()).unwrap();
    assert_eq!(a, b);
}
