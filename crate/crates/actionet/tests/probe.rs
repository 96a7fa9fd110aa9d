// scratch timing probe - removed before finalizing
use actionet::data::{AugmentPolicy, WindowMode};
use actionet::model::ModelConfig;
use actionet::synth::{make_synthetic_dataset, SyntheticSpec};
use actionet::train::{train, OptimizerHyper, Schedule};
use std::time::Instant;

#[test]
#[ignore]
fn probe_overfit() {
    let data = make_synthetic_dataset(&SyntheticSpec {
        n_videos: 30,
        n_train: 30,
        n_dynamic: 26,
        n_static: 80,
        key_count: 8,
        noise_sigma: 0.0,
        seed: 501,
    })
    .unwrap();
    let config = ModelConfig { seed: 601, ..ModelConfig::default() };
    let schedule = Schedule::new(40, vec![], 8);
    let policy = AugmentPolicy {
        window_dynamic: 26,
        window_static: 80,
        mode: WindowMode::RandomShift,
    };
    let t = Instant::now();
    let (_, report) = train(&data.dataset, &config, &schedule, &policy, OptimizerHyper::default()).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    for e in &report.epochs {
        if e.epoch % 2 == 0 || e.epoch == 39 {
            println!(
                "epoch {:3}  loss {:.6}  train_rho {:?}",
                e.epoch, e.mean_loss, e.train_rho
            );
        }
    }
    println!("40 epochs took {elapsed:.1}s ({:.2}s/epoch)", elapsed / 40.0);
}

#[test]
#[ignore]
fn probe_generalize() {
    let data = make_synthetic_dataset(&SyntheticSpec {
        n_videos: 40,
        n_train: 30,
        n_dynamic: 32,
        n_static: 100,
        key_count: 16,
        noise_sigma: 0.02,
        seed: 777,
    })
    .unwrap();
    let config = ModelConfig { seed: 888, ..ModelConfig::default() };
    let schedule = Schedule::new(24, vec![8, 16], 8);
    let policy = AugmentPolicy {
        window_dynamic: 26,
        window_static: 80,
        mode: WindowMode::RandomShift,
    };
    let t = Instant::now();
    let hyper = OptimizerHyper { weight_decay: 5e-3, ..OptimizerHyper::default() };
    let (_, report) = train(&data.dataset, &config, &schedule, &policy, hyper).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    for e in &report.epochs {
        if true {
            println!(
                "epoch {:3}  loss {:.6}  train_rho {:?}  test_rho {:?}",
                e.epoch, e.mean_loss, e.train_rho, e.test_rho
            );
        }
    }
    println!("24 epochs took {elapsed:.1}s ({:.2}s/epoch)", elapsed / 24.0);
}

#[test]
#[ignore]
fn probe_five_seeds() {
    use actionet::attention::AttentionVariant;
    use actionet::model::Streams;
    let policy = AugmentPolicy {
        window_dynamic: 26,
        window_static: 26,
        mode: WindowMode::RandomShift,
    };
    let schedule = Schedule::new(30, vec![18, 24], 8);
    let hyper = OptimizerHyper { weight_decay: 5e-3, ..OptimizerHyper::default() };
    let configs: [(&str, Streams, AttentionVariant); 4] = [
        ("TS+CAA", Streams::Ts, AttentionVariant::Caa),
        ("DS+CAA", Streams::Ds, AttentionVariant::Caa),
        ("SS+CAA", Streams::Ss, AttentionVariant::Caa),
        ("TS+AVG", Streams::Ts, AttentionVariant::Avg),
    ];
    for (name, streams, variant) in configs {
        let mut rhos = Vec::new();
        for seed in 0..5u64 {
            let data = make_synthetic_dataset(&SyntheticSpec {
                n_videos: 40,
                n_train: 30,
                n_dynamic: 32,
                n_static: 32,
                key_count: 16,
                noise_sigma: 0.02,
                seed: 1000 + seed,
            })
            .unwrap();
            let config = ModelConfig {
                streams,
                attention: variant,
                seed: 2000 + seed,
                ..ModelConfig::default()
            };
            let t = Instant::now();
            let (_, report) = train(&data.dataset, &config, &schedule, &policy, hyper).unwrap();
            let rho = report.final_test_rho().unwrap();
            println!("  {name} seed {seed}: test_rho {rho:.3} ({:.0}s)", t.elapsed().as_secs_f64());
            rhos.push(rho);
        }
        let mean = rhos.iter().sum::<f64>() / rhos.len() as f64;
        println!("{name}: mean test_rho {mean:.3}");
    }
}
