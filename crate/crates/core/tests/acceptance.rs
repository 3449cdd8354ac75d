//! Acceptance criteria, one PASS/FAIL line each. Runs without the libtest
//! harness so the lines always reach the terminal.

mod common;

use std::process::Command;
use std::time::{Duration, Instant};

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rayon::prelude::*;

use common::{
    bin_masses, dense, dense_tv, exhaustive_max_binned_tv, feasible_k_max, random_instance, rng,
};
use stairbin::binning::{
    binned_tv, optimize_binning, partition_error_to_reference, random_binning, BinnedPair,
};
use stairbin::closeness::{closeness_test, l2_statistic, TestConfig};
use stairbin::distance::tv_distance_sparse;
use stairbin::harness::{run_granularity_eval, run_ranking_validation, BinningMethod, ExperimentConfig};
use stairbin::rng::derive_seed;
use stairbin::space::{CategoricalSpace, ElementIndex};
use stairbin::stair::{build_stair, StairSpec};
use stairbin::synthetic::SuiteSpec;

const EXACT_TOL: f64 = 1e-12;
const OPTIMALITY_INSTANCES: usize = 400;
const OPTIMALITY_BUDGET: Duration = Duration::from_secs(60);
const LOWER_BOUND_TRIPLES: usize = 2000;
const UNBIASED_SIMS: usize = 100_000;
const UNBIASED_SE: f64 = 3.0;
const UNBIASED_BUDGET: Duration = Duration::from_secs(300);
const CALIBRATION_TRIALS: usize = 300;
const CALIBRATION_MAX_RATE: f64 = 0.08;
const RANKING_TAU_FLOOR: f64 = 0.8;
const RANKING_BUDGET: Duration = Duration::from_secs(600);
const GRANULARITY_MIN_TRIALS: usize = 8;

type Criterion = (&'static str, fn() -> Verdict);

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict { pass, detail: detail.into() }
}

fn binning_optimality() -> Verdict {
    let start = Instant::now();
    let mut r = rng(0xb1);
    let mut worst: f64 = 0.0;
    let mut mismatches = 0;
    for _ in 0..OPTIMALITY_INSTANCES {
        let mut inst = random_instance(&mut r, 3);
        inst.k = inst.k.min(feasible_k_max(&inst.p));
        let b = optimize_binning(&inst.p, &inst.q, inst.k).expect("k is feasible");
        let got = BinnedPair::new(&b, &inst.p, &inst.q).tv();
        let want = exhaustive_max_binned_tv(&inst.p, &inst.q, inst.k).expect("oracle partition exists");
        let gap = (got - want).abs();
        worst = worst.max(gap);
        mismatches += usize::from(gap > EXACT_TOL);
    }
    let elapsed = start.elapsed();
    verdict(
        mismatches == 0 && elapsed < OPTIMALITY_BUDGET,
        format!("{OPTIMALITY_INSTANCES} instances, {mismatches} mismatches, max gap {worst:.1e}, {elapsed:.1?}"),
    )
}

fn lower_bound() -> Verdict {
    let mut r = rng(0xb2);
    let mut violations = 0;
    let mut checks = 0;
    for t in 0..LOWER_BOUND_TRIPLES {
        let inst = random_instance(&mut r, 3);
        let full = tv_distance_sparse(&inst.p, &inst.q).unwrap();
        let pd = inst.p.piecewise().to_dense();
        let qd = dense(&inst.q);
        let k = r.random_range(1..=pd.len());
        let labels: Vec<usize> = (0..pd.len()).map(|_| r.random_range(0..k)).collect();
        let mut binned = vec![binned_tv(&bin_masses(&pd, &labels, k), &bin_masses(&qd, &labels, k))];
        let k = inst.k.min(feasible_k_max(&inst.p));
        let ob = optimize_binning(&inst.p, &inst.q, k).unwrap();
        let rb = random_binning(&inst.p, &inst.q, k, t as u64).unwrap();
        binned.push(BinnedPair::new(&ob, &inst.p, &inst.q).tv());
        binned.push(BinnedPair::new(&rb, &inst.p, &inst.q).tv());
        for tv in binned {
            checks += 1;
            violations += usize::from(tv > full + EXACT_TOL);
        }
        violations += usize::from((dense_tv(&pd, &qd) - full).abs() > EXACT_TOL);
    }
    verdict(
        violations == 0,
        format!("{LOWER_BOUND_TRIPLES} triples ({checks} binned TVs), {violations} violations"),
    )
}

fn zero_error_family() -> Verdict {
    let mut r = rng(0xb3);
    let mut worst: f64 = 0.0;
    for t in 0..500 {
        let inst = random_instance(&mut r, 3);
        let k = inst.k.min(feasible_k_max(&inst.p));
        let ob = optimize_binning(&inst.p, &inst.q, k).unwrap();
        let rb = random_binning(&inst.p, &inst.q, k, t).unwrap();
        for b in [&ob, &rb] {
            worst = worst.max(b.error_to_reference(&inst.p).abs());
            worst = worst.max(partition_error_to_reference(&b.explicit_bins(), &inst.p).unwrap().abs());
        }
    }
    // {0,2},{1,3},{4,5} against regions {0,1},{2,3},{4,5}
    let p = build_stair(CategoricalSpace::new(1, 6).unwrap(), 3, 4.0 / 6.0, &[0.6, 0.4]).unwrap();
    let cross: Vec<Vec<ElementIndex>> = [[0, 2], [1, 3], [4, 5]]
        .iter()
        .map(|b| b.iter().copied().map(ElementIndex).collect())
        .collect();
    let cross_err = partition_error_to_reference(&cross, &p).unwrap();
    verdict(
        worst <= EXACT_TOL && cross_err > 0.0,
        format!("max error over 1000 produced binnings {worst:.1e}; cross-region partition {cross_err}"),
    )
}

fn unbiasedness() -> Verdict {
    let start = Instant::now();
    let settings: Vec<(Vec<f64>, Vec<f64>, u64)> = vec![
        (vec![0.5, 0.3, 0.2, 0.0], vec![0.5, 0.3, 0.2, 0.0], 100),
        (vec![0.5, 0.3, 0.2, 0.0], vec![0.4, 0.3, 0.2, 0.1], 100),
        (vec![0.7, 0.3], vec![0.2, 0.8], 10),
        (vec![0.25; 4], vec![0.1, 0.2, 0.3, 0.4], 50),
        (vec![0.3, 0.1, 0.3, 0.1, 0.1, 0.1, 0.0, 0.0], vec![0.2, 0.2, 0.2, 0.2, 0.05, 0.05, 0.05, 0.05], 1000),
    ];
    let results: Vec<(f64, f64, f64)> = settings
        .par_iter()
        .enumerate()
        .map(|(i, (p, q, m))| {
            let truth: f64 = p.iter().zip(q).map(|(a, b)| (a - b) * (a - b)).sum();
            let chooser = WeightedIndex::new(q).unwrap();
            let mut r = rng(0xb4 + i as u64);
            let mut counts = vec![0u64; q.len()];
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            for _ in 0..UNBIASED_SIMS {
                counts.iter_mut().for_each(|c| *c = 0);
                for _ in 0..*m {
                    counts[chooser.sample(&mut r)] += 1;
                }
                let z = l2_statistic(p, &counts, *m).unwrap();
                sum += z;
                sum_sq += z * z;
            }
            let n = UNBIASED_SIMS as f64;
            let mean = sum / n;
            let se = ((sum_sq / n - mean * mean) * n / (n - 1.0) / n).sqrt();
            (mean, truth, se)
        })
        .collect();
    let elapsed = start.elapsed();
    let z_scores: Vec<f64> = results.iter().map(|(mean, truth, se)| (mean - truth).abs() / se).collect();
    let pass = z_scores.iter().all(|&z| z <= UNBIASED_SE) && elapsed < UNBIASED_BUDGET;
    let shown: Vec<String> = z_scores.iter().map(|z| format!("{z:.2}")).collect();
    verdict(
        pass,
        format!("5 settings x {UNBIASED_SIMS} sims, |bias|/SE = [{}], {elapsed:.1?}", shown.join(", ")),
    )
}

/// Per-k rejection rates under q = p; with `split`, bins are chosen on one
/// half of the samples and tested on the other.
fn null_rejection_rates(m: usize, split: bool) -> Vec<f64> {
    let p = StairSpec::default().build().unwrap();
    let s = p.s();
    let rejections: Vec<Vec<bool>> = (0..CALIBRATION_TRIALS)
        .into_par_iter()
        .map(|trial| {
            let seed = derive_seed(0xb5, &[m as u64, trial as u64]);
            let samples = p.sample(m, seed).unwrap();
            let (select, test) = if split {
                samples.split_half(seed)
            } else {
                (samples.clone(), samples)
            };
            let q = select.empirical_pmf().unwrap();
            (s..=2 * s)
                .map(|k| {
                    let b = optimize_binning(&p, &q, k).unwrap();
                    let cfg = TestConfig { seed: derive_seed(seed, &[k as u64]), ..TestConfig::default() };
                    closeness_test(&b.induce_reference(&p), &b.bin_counts(&test), test.m(), &cfg)
                        .unwrap()
                        .reject
                })
                .collect()
        })
        .collect();
    (0..=s)
        .map(|j| rejections.iter().filter(|r| r[j]).count() as f64 / CALIBRATION_TRIALS as f64)
        .collect()
}

fn calibration() -> Verdict {
    let in_sample = null_rejection_rates(10_000, false);
    let held_out = null_rejection_rates(1000, true);
    let worst = in_sample.iter().chain(&held_out).cloned().fold(0.0, f64::max);
    let show = |rates: &[f64]| rates.iter().map(|r| format!("{r:.3}")).collect::<Vec<_>>().join(", ");
    verdict(
        worst <= CALIBRATION_MAX_RATE,
        format!(
            "q = p, {CALIBRATION_TRIALS} trials, per-k rejection rates k=s..2s: m=10000 [{}]; m=1000 held-out [{}]",
            show(&in_sample),
            show(&held_out)
        ),
    )
}

fn ranking_reproduction() -> Verdict {
    let start = Instant::now();
    let cfg = ExperimentConfig::default();
    let report = run_ranking_validation(&cfg).unwrap();
    let elapsed = start.elapsed();
    let s = cfg.stair.s;
    let mut pass = elapsed < RANKING_BUDGET;
    let mut parts = Vec::new();
    for k in s + 1..=2 * s {
        let opt = report.summary_for(k, BinningMethod::Optimized).unwrap().mean_tau;
        let rnd = report.summary_for(k, BinningMethod::Random).unwrap().mean_tau;
        pass &= opt > rnd;
        parts.push(format!("k={k} {opt:.3}>{rnd:.3}"));
    }
    let top = report.summary_for(2 * s, BinningMethod::Optimized).unwrap().mean_tau;
    pass &= top >= RANKING_TAU_FLOOR;
    verdict(
        pass,
        format!("{} trials, mean tau opt>rnd: {}; opt at k=2s {top:.3} >= {RANKING_TAU_FLOOR}, {elapsed:.1?}", cfg.trials, parts.join(", ")),
    )
}

fn granularity_analogue() -> Verdict {
    let cfg = ExperimentConfig {
        m: 10_000,
        trials: 10,
        suite: SuiteSpec { targets: vec![0.0, 0.1, 0.15, 0.2], ..SuiteSpec::default() },
        ..ExperimentConfig::default()
    };
    let report = run_granularity_eval(&cfg).unwrap();
    let s = cfg.stair.s;
    let means: Vec<f64> = report.models.iter().map(|m| m.mean_highest_passed).collect();
    let monotone = means.windows(2).all(|w| w[0] >= w[1]);
    let null_pass_all = report.models[0].failed_at().iter().filter(|f| f.is_none()).count();
    let far_early = report.models[3]
        .failed_at()
        .iter()
        .filter(|f| matches!(f, Some(k) if *k == s || *k == s + 1))
        .count();
    let shown: Vec<String> = means.iter().map(|m| format!("{m:.1}")).collect();
    verdict(
        monotone && null_pass_all >= GRANULARITY_MIN_TRIALS && far_early >= GRANULARITY_MIN_TRIALS,
        format!(
            "mean highest k by TV [{}]; TV 0 passes all in {null_pass_all}/10; TV 0.2 fails at s or s+1 in {far_early}/10",
            shown.join(", ")
        ),
    )
}

fn cli_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let exe = env!("CARGO_BIN_EXE_stairbin");
    let run = |args: &[&str]| {
        let out = Command::new(exe).current_dir(d).args(args).output().unwrap();
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    };
    let read = |name: &str| std::fs::read(d.join(name)).unwrap();
    let base = ["--seed", "17", "--trials", "3", "--bootstrap-reps", "200", "--ci-resamples", "200", "--out-dir", "out"];
    let with = |extra: &[&'static str]| -> Vec<&'static str> { [&base[..], extra].concat() };

    let commands: Vec<(Vec<&str>, Vec<&str>)> = vec![
        (with(&["generate", "--m", "6000", "--output", "model.txt", "--target-tv", "0.1"]), vec!["model.txt", "out/generate.json"]),
        (with(&["evaluate", "--m", "2000", "--samples", "model.txt"]), vec!["out/evaluate.json"]),
        (with(&["rank", "--m", "2000"]), vec!["out/rank.json", "out/rank.csv"]),
        (with(&["validate-binning"]), vec!["out/ranking_validation.json", "out/ranking_summary.csv"]),
        (with(&["export-pmf", "--samples", "model.txt"]), vec!["out/empirical_pmf.csv", "out/export_pmf.json"]),
    ];
    let mut identical = 0;
    let mut total = 0;
    for (args, outputs) in &commands {
        run(args);
        let first: Vec<Vec<u8>> = outputs.iter().map(|o| read(o)).collect();
        run(args);
        for (o, bytes) in outputs.iter().zip(first) {
            total += 1;
            identical += usize::from(read(o) == bytes);
        }
    }
    verdict(
        identical == total,
        format!("{} subcommands run twice, {identical}/{total} output files byte-identical", commands.len()),
    )
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("binning optimality vs exhaustive oracle", binning_optimality),
        ("binned TV lower-bounds full TV", lower_bound),
        ("zero-error binning family", zero_error_family),
        ("collision statistic unbiased", unbiasedness),
        ("null calibration", calibration),
        ("ranking: optimized beats random binning", ranking_reproduction),
        ("granularity ordering on synthetic suite", granularity_analogue),
        ("CLI determinism", cli_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "criterion {} [{}] {name}: {}",
            i + 1,
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
