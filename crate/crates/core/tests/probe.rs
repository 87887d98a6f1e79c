//! Temporary tuning probe; run with --ignored --nocapture.

use std::time::Instant;

use gpk_core::control::{Controller, ControllerConfig, ExoParams, Strategy};
use gpk_core::control::discontinuity_metric;
use gpk_core::estimators::{
    classifier_layer_sizes, classify, fit_linear, regression_layer_sizes, scaling_from_angles,
    threshold_classify, Activation, FeedforwardNet,
};
use gpk_core::gait::{generate_gait, generate_gait_with_phase, SpeedProfile};
use gpk_core::metrics::{accuracy, mean_descent_deviation, rmse};
use gpk_core::online::{run_loopback, LoopbackConfig};
use gpk_core::training::{train_lm_dataset, LMConfig, TargetKind};
use gpk_core::PhaseLabel;

#[test]
#[ignore]
fn probe_offline_quality() {
    for seed in 1u64..=5 {
        let ds = generate_gait(&SpeedProfile::calibration(), seed, 0.02).unwrap();
        let n = ds.len();
        let split = n * 7 / 10;
        let train = ds.slice(0..split);
        let test = ds.slice(split..n);
        let theta = 0.1;

        let t0 = Instant::now();
        let lin = fit_linear(&train).unwrap();
        let lin_time = t0.elapsed();
        let lin_pred: Vec<f64> = test.samples.iter().map(|s| lin.predict(&s.angles)).collect();
        let lin_labels: Vec<PhaseLabel> = lin_pred
            .iter()
            .map(|&y| threshold_classify(y, theta).label)
            .collect();
        let truth_vals = test.phase_values();
        let truth_labels: Vec<PhaseLabel> = test.samples.iter().map(|s| s.phase).collect();
        let lin_rmse = rmse(&lin_pred, &truth_vals).unwrap();
        let lin_acc = accuracy(&lin_labels, &truth_labels).unwrap();

        let config = LMConfig {
            max_epochs: 60,
            max_validation_failures: 12,
            rng_seed: seed,
            ..LMConfig::default()
        };
        let scaling = scaling_from_angles(train.samples.iter().map(|s| &s.angles));

        let t0 = Instant::now();
        let net = FeedforwardNet::random(
            regression_layer_sizes(),
            Activation::Linear,
            scaling.clone(),
            seed,
        )
        .unwrap();
        let (nn, log) = train_lm_dataset(&net, &train, TargetKind::Regression, &config).unwrap();
        let nn_time = t0.elapsed();
        let nn_pred: Vec<f64> = test
            .samples
            .iter()
            .map(|s| nn.forward(&s.angles).unwrap()[0])
            .collect();
        let nn_labels: Vec<PhaseLabel> = nn_pred
            .iter()
            .map(|&y| threshold_classify(y, theta).label)
            .collect();
        let nn_rmse = rmse(&nn_pred, &truth_vals).unwrap();
        let nn_acc = accuracy(&nn_labels, &truth_labels).unwrap();

        let t0 = Instant::now();
        let cnet = FeedforwardNet::random(
            classifier_layer_sizes(),
            Activation::Softmax,
            scaling,
            seed + 100,
        )
        .unwrap();
        let (cls, clog) = train_lm_dataset(&cnet, &train, TargetKind::OneHot, &config).unwrap();
        let cls_time = t0.elapsed();
        let cls_est: Vec<_> = test
            .samples
            .iter()
            .map(|s| classify(&cls, &s.angles).unwrap())
            .collect();
        let cls_vals: Vec<f64> = cls_est.iter().map(|e| e.value).collect();
        let cls_labels: Vec<PhaseLabel> = cls_est.iter().map(|e| e.label).collect();
        let cls_rmse = rmse(&cls_vals, &truth_vals).unwrap();
        let cls_acc = accuracy(&cls_labels, &truth_labels).unwrap();

        let lin_dev = mean_descent_deviation(&lin_pred, &truth_vals).unwrap();
        let nn_dev = mean_descent_deviation(&nn_pred, &truth_vals).unwrap();

        println!("== seed {seed} (train {split}, test {}) ==", n - split);
        println!("linear   rmse {lin_rmse:.4} acc {lin_acc:.2}% ({lin_time:?})");
        println!(
            "nn_fit   rmse {nn_rmse:.4} acc {nn_acc:.2}% epochs {} stop {:?} ({nn_time:?})",
            log.accepted_epochs(),
            log.stop
        );
        println!(
            "nn_class rmse {cls_rmse:.4} acc {cls_acc:.2}% epochs {} stop {:?} ({cls_time:?})",
            clog.accepted_epochs(),
            clog.stop
        );
        println!("monotonicity: linear {lin_dev:.5} vs nn {nn_dev:.5}");
    }
}

#[test]
#[ignore]
fn probe_online_loopback() {
    for lr in [0.01, 0.02, 0.05] {
        for seed in 1u64..=5 {
            let t0 = Instant::now();
            let mut config = LoopbackConfig {
                profile: SpeedProfile::steady(3.5, 300.0).unwrap(),
                seed,
                noise_std: 0.02,
                ..LoopbackConfig::default()
            };
            config.trainer.net_seed = seed;
            config.trainer.seq.learning_rate = lr;
            let report = run_loopback(&config).unwrap();
            let final_acc: Vec<f64> = report.metrics[25000..]
                .iter()
                .map(|p| p.acc_window)
                .collect();
            println!(
                "lr {lr} seed {seed}: updates {} post10acc {:.2} last50s {:.2} holds {} ({:?})",
                report.updates_emitted,
                report.post10s_mean_windowed_accuracy.unwrap(),
                final_acc.iter().sum::<f64>() / final_acc.len() as f64,
                report.control_stats.estimate_holds,
                t0.elapsed()
            );
        }
    }
}

#[test]
#[ignore]
fn probe_controller_smoothness() {
    let (ds, phi) =
        generate_gait_with_phase(&SpeedProfile::steady(3.5, 30.0).unwrap(), 7, 0.0).unwrap();
    for strategy in Strategy::ALL {
        let mut ctl = Controller::new(strategy, ControllerConfig::default(), ExoParams::default());
        let trace: Vec<_> = ds
            .samples
            .iter()
            .zip(&phi)
            .map(|(s, &p)| ctl.step(p, &s.angles, 0.01).0)
            .collect();
        let d = discontinuity_metric(&trace).unwrap();
        println!(
            "{:<6} max jump {:.4} mean jump {:.5}",
            strategy.name(),
            d.max_jump,
            d.mean_jump
        );
    }
}
