use nalgebra::DMatrix;
use proptest::prelude::*;
use softsvm::data::{simulate_mixture, standardize, Dataset, SimSpec, Standardization};
use softsvm::evaluation::{cross_validate, evaluate, kfold_split, mcc, ConfusionMatrix, CvOptions};
use softsvm::model::{classify, diagnose, predict_mu, soft_margin, DiagnosticThresholds, PointType};
use softsvm::solver::{fit_dataset, FitConfig, FittedModel};
use softsvm::FamilyParams;

fn grid7() -> Vec<f64> {
    (0..7).map(|i| 10f64.powi(i - 4)).collect()
}

fn model_with(params: FamilyParams, beta0: f64, beta: Vec<f64>) -> FittedModel {
    let f = beta.len();
    FittedModel {
        params,
        beta0,
        beta,
        lambda: 0.0,
        penalized_loglik: 0.0,
        n_iters: 0,
        converged: true,
        standardization: Standardization::identity(f),
    }
}

#[test]
fn cross_validation_is_reproducible() {
    let d = simulate_mixture(&SimSpec { n: 100, rho: 0.5, sigma: 1.0, seed: 3 }).unwrap();
    let opts = CvOptions { folds: 10, reps: 5, seed: 17, ..CvOptions::default() };
    let a = cross_validate(&d, &FitConfig::default(), &grid7(), &opts).unwrap();
    let b = cross_validate(&d, &FitConfig::default(), &grid7(), &opts).unwrap();
    assert_eq!(a, b);
    assert!(grid7().contains(&a.selected_lambda));
    for m in a.means.iter().flatten() {
        assert!((0.0..=1.0).contains(m), "{m}");
    }
    assert_eq!(a.metrics.len(), 7);
    assert!(a.metrics.iter().all(|r| r.len() == 5 && r.iter().all(|f| f.len() == 10)));
}

#[test]
fn parallel_and_serial_cv_agree() {
    let d = simulate_mixture(&SimSpec { n: 60, rho: 0.25, sigma: 1.0, seed: 8 }).unwrap();
    let mut opts = CvOptions { folds: 5, reps: 3, seed: 2, ..CvOptions::default() };
    let par = cross_validate(&d, &FitConfig::default(), &[0.01, 1.0], &opts).unwrap();
    opts.parallel = false;
    let ser = cross_validate(&d, &FitConfig::default(), &[0.01, 1.0], &opts).unwrap();
    assert_eq!(par, ser);
    assert_eq!(par.to_json().unwrap(), ser.to_json().unwrap());
}

#[test]
fn single_and_duplicate_lambda_grids() {
    let d = simulate_mixture(&SimSpec { n: 50, rho: 0.5, sigma: 1.0, seed: 4 }).unwrap();
    let opts = CvOptions { folds: 5, reps: 2, ..CvOptions::default() };
    let one = cross_validate(&d, &FitConfig::default(), &[0.3], &opts).unwrap();
    assert_eq!(one.selected_lambda, 0.3);
    let dup = cross_validate(&d, &FitConfig::default(), &[0.3, 0.3], &opts).unwrap();
    assert_eq!(dup.metrics[0], dup.metrics[1]);
    assert_eq!(dup.metrics[0], one.metrics[0]);
}

#[test]
fn ties_select_smallest_lambda() {
    // perfectly separated data: every penalty reaches MCC 1
    let d = simulate_mixture(&SimSpec { n: 60, rho: 0.5, sigma: 0.1, seed: 1 }).unwrap();
    let opts = CvOptions { folds: 3, reps: 1, ..CvOptions::default() };
    let r = cross_validate(&d, &FitConfig::default(), &[0.001, 0.1, 10.0], &opts).unwrap();
    assert!(r.means.iter().all(|m| *m == Some(1.0)), "{:?}", r.means);
    assert_eq!(r.selected_lambda, 0.001);
}

#[test]
fn single_class_training_folds_are_missing() {
    // one label-0 row: the fold holding it leaves a single-class training set
    let x = DMatrix::from_fn(6, 1, |i, _| i as f64);
    let d = Dataset::new(vec!["x".into()], x, vec![0, 1, 1, 1, 1, 1]).unwrap();
    let opts = CvOptions { folds: 6, reps: 1, ..CvOptions::default() };
    let r = cross_validate(&d, &FitConfig::default(), &[1.0], &opts).unwrap();
    let missing = r.metrics[0][0].iter().filter(|c| c.is_none()).count();
    assert_eq!(missing, 1);
    let mut csv = Vec::new();
    r.write_csv(&mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("lambda,rep,fold,mcc\n"));
    assert_eq!(text.matches(",NA\n").count(), 1);
    assert!(r.to_json().unwrap().contains("null"));
}

#[test]
fn evaluate_examples() {
    let half = model_with(FamilyParams::logistic(), 0.0, vec![0.0]);
    let x = DMatrix::from_column_slice(4, 1, &[1.0, 2.0, 3.0, 4.0]);
    let e = evaluate(&half, &x, &[0, 1, 0, 1]).unwrap();
    assert_eq!(e.mcc, 0.0);
    assert_eq!(e.confusion.tp + e.confusion.fp, 0);

    let m = model_with(FamilyParams::logistic(), -2.5, vec![1.0]);
    let e = evaluate(&m, &x, &[0, 0, 1, 1]).unwrap();
    assert_eq!((e.accuracy, e.mcc), (1.0, 1.0));
    let e = evaluate(&m, &x, &[0, 1, 1, 0]).unwrap();
    assert_eq!(e.confusion, ConfusionMatrix { tp: 1, fp: 1, tn: 1, fn_: 1 });
    // four points with one error
    let e = evaluate(&m, &x, &[0, 1, 1, 1]).unwrap();
    assert_eq!(e.confusion, ConfusionMatrix { tp: 2, fp: 0, tn: 1, fn_: 1 });
    assert_eq!(e.accuracy, 0.75);
    assert!(evaluate(&m, &x, &[0, 1]).is_err());
}

#[test]
fn fitted_model_classifies_separated_training_data() {
    let d = simulate_mixture(&SimSpec { n: 80, rho: 0.5, sigma: 0.2, seed: 6 }).unwrap();
    let m = fit_dataset(&d, &FitConfig::default().with_lambda(0.01), true).unwrap();
    let e = evaluate(&m, &d.features, &d.labels).unwrap();
    assert_eq!(e.accuracy, 1.0);
    assert_eq!(e.mcc, 1.0);
    let margin = soft_margin(&m).unwrap();
    assert!(margin.is_finite() && margin >= 0.0);
}

#[test]
fn composite_mean_sign_decides_class() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(99);
    for (k, a) in [(1.0, 0.0), (5.0, 4.0), (0.3, 2.0), (50.0, 10.0)] {
        let p = FamilyParams::new(k, a).unwrap();
        for _ in 0..1000 {
            let eta: f64 = rng.random_range(-10.0..10.0);
            assert_eq!(p.composite_mean(eta) > 0.5, eta > 0.0, "{k} {a} {eta}");
        }
    }
}

#[test]
fn diagnose_partitions_points() {
    let d = simulate_mixture(&SimSpec { n: 100, rho: 0.25, sigma: 1.0, seed: 12 }).unwrap();
    let m = fit_dataset(&d, &FitConfig::default(), true).unwrap();
    let th = DiagnosticThresholds::default();
    let diags = diagnose(&m, &d.features, &th).unwrap();
    let mu = predict_mu(&m, &d.features).unwrap();
    assert_eq!(diags.len(), 100);
    for (g, &u) in diags.iter().zip(&mu) {
        assert_eq!(g.mu_hat, u);
        assert_eq!(g.point_type, PointType::classify(g.mu_hat, g.variance_weight, &th));
    }
    assert_eq!(diags.iter().map(|g| g.predicted_label).collect::<Vec<_>>(), classify(&mu));
}

#[test]
fn logistic_types_follow_distance_from_half() {
    // kappa = 1, alpha = 0: V = mu (1 - mu) >= 0.1875 inside the band
    let th = DiagnosticThresholds { v_threshold: 0.25, mu_band: 0.25 };
    let m = model_with(FamilyParams::logistic(), 0.0, vec![1.0]);
    let x = DMatrix::from_fn(401, 1, |i, _| -4.0 + 0.02 * i as f64);
    let diags = diagnose(&m, &x, &th).unwrap();
    for g in &diags {
        if (g.mu_hat - 0.5).abs() < 0.25 {
            assert!(g.variance_weight >= 0.1875 - 1e-15);
        }
    }
    // monotone in |mu - 1/2|: sv at the center, inliers further out
    let rank = |t: PointType| match t {
        PointType::SoftSupportVector => 0,
        PointType::DeadZone => 1,
        PointType::Inlier => 2,
    };
    let mut by_dist: Vec<_> = diags.iter().map(|g| ((g.mu_hat - 0.5).abs(), rank(g.point_type))).collect();
    by_dist.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    assert!(by_dist.windows(2).all(|w| w[0].1 <= w[1].1));
}

#[test]
fn standardized_model_predicts_on_raw_features() {
    let d = simulate_mixture(&SimSpec { n: 50, rho: 0.5, sigma: 1.0, seed: 5 }).unwrap();
    let s = standardize(&d).unwrap();
    let m = fit_dataset(&d, &FitConfig::default(), true).unwrap();
    assert_eq!(m.standardization, s.transform);
    let direct: Vec<f64> = s
        .data
        .features
        .row_iter()
        .map(|r| m.params.composite_mean(m.beta0 + r[0] * m.beta[0] + r[1] * m.beta[1]))
        .collect();
    let via = predict_mu(&m, &d.features).unwrap();
    for (a, b) in direct.iter().zip(&via) {
        assert!((a - b).abs() <= 1e-14);
    }
}

fn counts() -> impl Strategy<Value = ConfusionMatrix> {
    (0u64..500, 0u64..500, 0u64..500, 0u64..500).prop_map(|(tp, fp, tn, fn_)| ConfusionMatrix { tp, fp, tn, fn_ })
}

proptest! {
    #[test]
    fn mcc_is_bounded_and_symmetric(c in counts()) {
        let m = mcc(&c);
        prop_assert!((-1.0..=1.0).contains(&m));
        let swapped = ConfusionMatrix { tp: c.tn, tn: c.tp, fp: c.fn_, fn_: c.fp };
        prop_assert!((mcc(&swapped) - m).abs() <= 1e-12);
        let inverted = ConfusionMatrix { tp: c.fn_, fn_: c.tp, tn: c.fp, fp: c.tn };
        prop_assert!((mcc(&inverted) + m).abs() <= 1e-12);
    }

    #[test]
    fn kfold_partitions(n in 2usize..300, k in 2usize..20, seed in any::<u64>()) {
        prop_assume!(k <= n);
        let folds = kfold_split(n, k, seed).unwrap();
        prop_assert_eq!(folds.len(), k);
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
        let mut all = folds.concat();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(folds, kfold_split(n, k, seed).unwrap());
    }
}
