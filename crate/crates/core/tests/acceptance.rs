//! Acceptance suite. Runs every criterion, prints one verdict line each and
//! exits non-zero if any fails.

use std::hint::black_box;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use emc_core::eval::{
    change_point_f1, detections, record_ari, track_emc, track_mcsw, DetectionSource,
};
use emc_core::{
    generate_modes, generate_stream, snapshot, synthesize, Emc, EmcConfig, Estimator, Phase,
    PredictionRecord, StochasticTensor, SyntheticSpec,
};

const SEEDS: u64 = 20;
const MOE: usize = 250;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn discovery_config() -> EmcConfig {
    EmcConfig {
        lambda_fast: 0.92,
        lambda_slow: 0.97,
        beta: 0.0,
        delta_fast: 0.2,
        delta_slow: 0.05,
        eta_fast: 0.35,
        eta_slow: 0.3,
        tau: 25,
        ..EmcConfig::defaults(1, 4)
    }
}

fn detection_config() -> EmcConfig {
    EmcConfig {
        lambda_fast: 0.91,
        lambda_slow: 0.95,
        beta: 0.0,
        delta_fast: 0.3,
        delta_slow: 0.05,
        eta_fast: 0.35,
        eta_slow: 0.35,
        tau: 75,
        ..EmcConfig::defaults(1, 4)
    }
}

fn tracking_config() -> EmcConfig {
    EmcConfig {
        lambda_fast: 0.94,
        lambda_slow: 0.95,
        beta: 0.0,
        delta_fast: 0.3,
        delta_slow: 0.2,
        eta_fast: 0.5,
        eta_slow: 0.25,
        tau: 100,
        ..EmcConfig::defaults(1, 4)
    }
}

/// A full run that also counts memory mutations on steps that end in drift.
struct InstrumentedRun {
    records: Vec<PredictionRecord>,
    drift_mutations: u64,
}

fn instrumented(config: EmcConfig, symbols: &[usize]) -> InstrumentedRun {
    let mut emc = Emc::new(config).unwrap();
    let mut records = Vec::with_capacity(symbols.len());
    let mut drift_mutations = 0;
    for &s in symbols {
        let before = emc.memory().mutations();
        let r = emc.step(s).unwrap();
        if r.phase == Phase::Drift {
            drift_mutations += emc.memory().mutations() - before;
        }
        records.push(r);
    }
    InstrumentedRun {
        records,
        drift_mutations,
    }
}

fn convergence() -> Verdict {
    let started = Instant::now();
    let spec = SyntheticSpec {
        n_modes: 2,
        n_regimes: 2,
        ..SyntheticSpec::five_modes(5000, 5000, 0)
    };
    let chain = generate_modes(&spec).unwrap().remove(0);
    let streams = 200;
    let mut mean = vec![0.0; chain.values().len()];
    for seed in 0..streams {
        // both regimes draw from the same chain
        let spec = SyntheticSpec {
            seed: 1000 + seed,
            ..spec
        };
        let stream = generate_stream(&spec, &[chain.clone(), chain.clone()]).unwrap();
        let mut est = Estimator::new(1, 4, 0.0).unwrap();
        for &s in &stream.symbols {
            est.observe(s, 0.99).unwrap();
        }
        for (acc, v) in mean.iter_mut().zip(est.tensor().values()) {
            *acc += v / streams as f64;
        }
    }
    let dev = mean
        .iter()
        .zip(chain.values())
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let elapsed = started.elapsed();
    verdict(
        dev <= 0.03 && elapsed < Duration::from_secs(30),
        format!(
            "max deviation {dev:.4} (<= 0.03), {:.2}s (< 30s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn closed_form() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let lambda = rng.random_range(0.5..0.999);
        let obs: Vec<usize> = (0..1000).map(|_| rng.random_range(0..4)).collect();
        let mut t = StochasticTensor::new_uniform(1, 4).unwrap();
        for &s in &obs {
            t.update_row(&[1], s, lambda).unwrap();
        }
        let n = obs.len() as i32;
        for target in 0..4 {
            let reward: f64 = obs
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == target)
                .map(|(i, _)| lambda.powi(n - 1 - i as i32))
                .sum();
            let closed = lambda.powi(n) * 0.25 + (1.0 - lambda) * reward;
            worst = worst.max((t.get(&[1], target).unwrap() - closed).abs());
        }
    }
    verdict(
        worst <= 1e-12,
        format!("max difference {worst:.3e} (<= 1e-12)"),
    )
}

fn stochastic_rows() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut t = StochasticTensor::new_uniform(2, 5).unwrap();
    let mut worst: f64 = 0.0;
    for step in 1..=100_000 {
        let cond = [rng.random_range(0..5), rng.random_range(0..5)];
        if rng.random_bool(0.5) {
            let lambda = rng.random_range(0.01..0.999);
            t.update_row(&cond, rng.random_range(0..5), lambda).unwrap();
        } else {
            t.regulate(&cond, rng.random_range(0.0..0.99)).unwrap();
        }
        if step % 1000 == 0 {
            for row in t.rows() {
                worst = worst.max((row.iter().sum::<f64>() - 1.0).abs());
            }
        }
    }
    verdict(
        worst <= 1e-9,
        format!("max row-sum error {worst:.3e} (<= 1e-9)"),
    )
}

fn mode_discovery(runs: &[Seeded], elapsed: Duration) -> Verdict {
    let mean = runs
        .iter()
        .map(|r| record_ari(&r.run.records, &r.labels).unwrap())
        .sum::<f64>()
        / runs.len() as f64;
    verdict(
        mean >= 0.75 && elapsed < Duration::from_secs(60),
        format!(
            "mean ARI {mean:.4} (>= 0.75), {:.2}s (< 60s)",
            elapsed.as_secs_f64()
        ),
    )
}

fn change_points(runs: &[Seeded]) -> Verdict {
    let (mut f1, mut fn_) = (0.0, 0.0);
    for r in runs {
        let found = detections(&r.run.records, DetectionSource::ModeSwitch);
        let report = change_point_f1(&found, &r.change_points, MOE);
        f1 += report.f1;
        fn_ += report.false_negatives as f64;
    }
    let n = runs.len() as f64;
    let (f1, fn_) = (f1 / n, fn_ / n);
    verdict(
        f1 >= 0.80 && fn_ <= 1.5,
        format!("mean F1 {f1:.4} (>= 0.80), mean FN {fn_:.2} (<= 1.5)"),
    )
}

fn tracking() -> Verdict {
    let (mut emc, mut w100, mut w500) = (0.0, 0.0, 0.0);
    for seed in 0..SEEDS {
        let stream = synthesize(&SyntheticSpec::medium(seed)).unwrap();
        emc += track_emc(tracking_config(), &stream)
            .unwrap()
            .mean_abs_error;
        w100 += track_mcsw(100, &stream).unwrap().mean_abs_error;
        w500 += track_mcsw(500, &stream).unwrap().mean_abs_error;
    }
    let n = SEEDS as f64;
    let (emc, w100, w500) = (emc / n, w100 / n, w500 / n);
    verdict(
        emc < w100 && emc < w500,
        format!("MAE emc {emc:.5} < sw100 {w100:.5} and sw500 {w500:.5}"),
    )
}

fn per_observation(order: usize, symbols: &[usize]) -> f64 {
    let mut best = f64::INFINITY;
    for _ in 0..5 {
        let mut est = Estimator::new(order, 10, 0.0).unwrap();
        let started = Instant::now();
        for &s in symbols {
            black_box(est.observe(s, 0.97).unwrap());
        }
        best = best.min(started.elapsed().as_secs_f64() / symbols.len() as f64);
    }
    best
}

fn complexity() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let symbols: Vec<usize> = (0..100_000).map(|_| rng.random_range(0..10)).collect();
    let small = per_observation(1, &symbols);
    let large = per_observation(3, &symbols);
    let ratio = large / small;
    verdict(
        ratio < 5.0,
        format!(
            "k=3 {:.1}ns vs k=1 {:.1}ns per observation, ratio {ratio:.2} (< 5)",
            large * 1e9,
            small * 1e9
        ),
    )
}

fn read_only_memory(runs: &[&[Seeded]]) -> Verdict {
    let mutations: u64 = runs
        .iter()
        .flat_map(|r| r.iter())
        .map(|r| r.run.drift_mutations)
        .sum();
    let total: usize = runs.iter().map(|r| r.len()).sum();
    verdict(
        mutations == 0,
        format!("{mutations} mutations while drifting over {total} runs (== 0)"),
    )
}

fn resume() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut mismatched = 0;
    for seed in 0..10 {
        let stream = synthesize(&SyntheticSpec::short(100 + seed)).unwrap();
        let mut cfg = discovery_config();
        cfg.beta = if seed % 2 == 0 { 0.0 } else { 0.002 };
        let cut = rng.random_range(1..stream.len());

        let whole = Emc::new(cfg)
            .unwrap()
            .run(stream.symbols.iter().copied())
            .unwrap();
        let mut first = Emc::new(cfg).unwrap();
        first.run(stream.symbols[..cut].iter().copied()).unwrap();
        let mut resumed = snapshot::decode(&snapshot::encode(&first)).unwrap();
        let tail = resumed.run(stream.symbols[cut..].iter().copied()).unwrap();

        let same = whole[cut..].iter().zip(&tail).all(|(a, b)| {
            a.distance.to_bits() == b.distance.to_bits()
                && (a.t, a.symbol, a.phase, a.mode, a.events)
                    == (b.t, b.symbol, b.phase, b.mode, b.events)
        });
        if !same || tail.len() != whole.len() - cut {
            mismatched += 1;
        }
    }
    verdict(
        mismatched == 0,
        format!("{mismatched} of 10 resumed runs diverge (== 0)"),
    )
}

struct Seeded {
    labels: Vec<usize>,
    change_points: Vec<usize>,
    run: InstrumentedRun,
}

fn run_seeds(config: EmcConfig) -> Vec<Seeded> {
    (0..SEEDS)
        .map(|seed| {
            let stream = synthesize(&SyntheticSpec::medium(seed)).unwrap();
            Seeded {
                run: instrumented(config, &stream.symbols),
                labels: stream.labels,
                change_points: stream.change_points,
            }
        })
        .collect()
}

fn main() -> ExitCode {
    let mut verdicts = vec![convergence(), closed_form(), stochastic_rows()];

    let started = Instant::now();
    let discovery = run_seeds(discovery_config());
    verdicts.push(mode_discovery(&discovery, started.elapsed()));
    let detection = run_seeds(detection_config());
    verdicts.push(change_points(&detection));

    verdicts.push(tracking());
    verdicts.push(complexity());
    verdicts.push(read_only_memory(&[&discovery, &detection]));
    verdicts.push(resume());

    for (i, v) in verdicts.iter().enumerate() {
        let tag = if v.pass { "PASS" } else { "FAIL" };
        println!("criterion {}: {tag} {}", i + 1, v.detail);
    }
    let failed = verdicts.iter().filter(|v| !v.pass).count();
    println!(
        "acceptance: {} passed, {failed} failed",
        verdicts.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
