//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::path::Path;
use std::time::Instant;

use gilbert_tess::cli::{random_lattice_config, run, ExperimentConfig};
use gilbert_tess::experiments::{
    covariance_decay_sweep, escaping_expectation, estimate_covariance, euler_experiment, oracle_check, pair_indicators,
    scaling_experiment, tail_experiment, PairConfig, SweepConfig,
};
use gilbert_tess::lattice::{ca_step, lattice_ray_simulate, Cell, LatticeState};
use gilbert_tess::{Direction, Point2, Side};

use Direction::{Horizontal as H, Vertical as V};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn euler_identities() -> Outcome {
    let s = euler_experiment(1.0, 20.0, 1000, 7).expect("euler experiment");
    let failing: Vec<usize> = s.reports.iter().enumerate().filter(|(_, r)| !r.pass).map(|(i, _)| i).collect();
    outcome(failing.is_empty(), format!("{}/{} instances pass, failing {:?}", s.passes, s.instances, failing))
}

fn engine_matches_oracle() -> Outcome {
    let dt = 1e-3;
    let s = oracle_check(1.0, 10.0, 100, 11, dt).expect("oracle check");
    let rays: usize = s.instances.iter().map(|i| 2 * i.seeds).sum();
    outcome(
        s.total_mismatches == 0 && s.max_length_error <= 2.0 * dt,
        format!(
            "{} half-rays, {} stop-cause mismatches, max |Δlength| = {:.2e} (limit {:.0e})",
            rays,
            s.total_mismatches,
            s.max_length_error,
            2.0 * dt
        ),
    )
}

fn exponential_tail() -> Outcome {
    let tail = tail_experiment(1.0, 10.0, 10_000, 21, H, 40).expect("tail experiment");
    let scaling = scaling_experiment(1.0, 4.0, 10.0, 10_000, 22, 40).expect("scaling experiment");
    let ratio = scaling.rate_ratio;
    outcome(
        tail.fit.r_squared >= 0.98 && (1.7..=2.3).contains(&ratio),
        format!(
            "r² = {:.4} on [{:.3}, {:.3}], rate(λ=4)/rate(λ=1) = {:.3}",
            tail.fit.r_squared, tail.fit.fit_range.0, tail.fit.fit_range.1, ratio
        ),
    )
}

fn scaling_law() -> Outcome {
    let s = scaling_experiment(1.0, 4.0, 10.0, 10_000, 31, 40).expect("scaling experiment");
    outcome(s.ks_distance < 0.03, format!("KS = {:.4} over {} uncensored pairs", s.ks_distance, s.pairs_used))
}

fn independence_regime() -> Outcome {
    let u = Point2::new(0.0, 0.0);
    let v = Point2::new(5.0, 3.0);
    let est = estimate_covariance(PairConfig::plus(u, H, v, V), 2.0, 1.0, 10_000, 41).expect("covariance");
    outcome(
        est.value.abs() < 3.0 * est.std_error,
        format!("‖u−v‖₁ = 8, t = 2: cov = {:.5}, SE = {:.5}", est.value, est.std_error),
    )
}

fn trap_joint_frequency() -> Outcome {
    // u+ runs right along y = 0 and must cross v+'s path at (0.5, 0); v gets there first.
    let cfg = PairConfig::plus(Point2::new(0.0, 0.0), H, Point2::new(0.5, -0.3), V);
    let t = 2.0;
    let mut joints = Vec::new();
    for (intensity, seed) in [(1.0, 51), (0.0, 52)] {
        let pairs = pair_indicators(cfg, t, intensity, 10_000, seed).expect("trap replicates");
        joints.push(pairs.iter().filter(|&&(a, b)| a && b).count());
    }
    outcome(
        joints.iter().all(|&j| j == 0),
        format!("t = 2 > ‖u−v‖₁ = 0.8: joint count {} with background, {} without", joints[0], joints[1]),
    )
}

fn positive_correlation() -> Outcome {
    let cfg = PairConfig::plus(Point2::new(0.0, 0.0), H, Point2::new(0.025, 0.025), H);
    let est = estimate_covariance(cfg, 2.0, 1.0, 100_000, 61).expect("covariance");
    outcome(
        est.value > 3.0 * est.std_error,
        format!("separation 0.05: cov = {:.5}, SE = {:.5}", est.value, est.std_error),
    )
}

fn covariance_decay() -> Outcome {
    let sweep = SweepConfig { d_u: H, side_u: Side::Plus, d_v: H, side_v: Side::Plus, heading: (0.05, 0.95) };
    let rows = covariance_decay_sweep(sweep, &[1.0, 2.0, 4.0, 8.0], 2.0, 1.0, 10_000, 71).expect("sweep");
    let (near, far) = (&rows[0], &rows[3]);
    let separation = near.abs_value - far.abs_value;
    let joint_se = (near.std_error.powi(2) + far.std_error.powi(2)).sqrt();
    let table: Vec<String> =
        rows.iter().map(|r| format!("d={}: {:.5}±{:.5}", r.distance, r.value, r.std_error)).collect();
    outcome(separation > 3.0 * joint_se && far.abs_value < 3.0 * far.std_error, table.join(", "))
}

fn escaping_rays() -> Outcome {
    let rows = escaping_expectation(1.0, &[20.0, 40.0, 80.0], 500, 81).expect("escape λ=1");
    let dense = escaping_expectation(4.0, &[40.0], 500, 82).expect("escape λ=4");
    let norm: Vec<f64> = rows.iter().map(|r| r.mean / r.n).collect();
    let mean = norm.iter().sum::<f64>() / norm.len() as f64;
    let spread = (norm.iter().cloned().fold(f64::MIN, f64::max) - norm.iter().cloned().fold(f64::MAX, f64::min)) / mean;
    let ratio = dense[0].mean / rows[1].mean;
    outcome(
        spread <= 0.2 && (ratio / 2.0 - 1.0).abs() <= 0.2,
        format!("mean/N = {:.3?}, relative spread {:.3}; λ=4 over λ=1 at N=40 = {:.3}", norm, spread, ratio),
    )
}

fn lattice_models() -> Outcome {
    let set = |cells: &[Cell]| -> BTreeSet<Cell> { cells.iter().copied().collect() };
    let examples_ok = ca_step(&LatticeState::unbounded([])).is_empty()
        && ca_step(&LatticeState::unbounded([(5, 5)])).active() == &set(&[(4, 5), (6, 5), (5, 4), (5, 6)])
        && ca_step(&LatticeState::unbounded([(4, 4)])).is_empty();
    let n = 20;
    let mut frozen = 0;
    for k in 0..100 {
        let cfg = random_lattice_config(n, 8, k).expect("lattice seeds");
        let a = lattice_ray_simulate(&cfg, n as u64);
        let b = lattice_ray_simulate(&cfg, 2 * n as u64);
        if a.trace_in_box() == b.trace_in_box() && a.lattice_points_in_box() == b.lattice_points_in_box() {
            frozen += 1;
        }
    }
    outcome(
        examples_ok && frozen == 100,
        format!(
            "worked examples {}, frozen at N vs 2N on {frozen}/100 sets",
            if examples_ok { "ok" } else { "differ" }
        ),
    )
}

fn outputs(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| matches!(p.extension().and_then(|e| e.to_str()), Some("csv" | "json")))
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

fn determinism() -> Outcome {
    let runs: [(&str, &[(&str, &str)]); 10] = [
        ("simulate", &[("box_side", "15")]),
        ("oracle-check", &[("replicates", "10")]),
        ("euler", &[("replicates", "50")]),
        ("tail", &[("replicates", "2000")]),
        ("scaling", &[("replicates", "2000")]),
        ("cov", &[("replicates", "5000"), ("u", "0,0"), ("v", "0.3,0.4")]),
        ("cov-sweep", &[("replicates", "2000")]),
        ("escape", &[("replicates", "20"), ("n_values", "10,20")]),
        ("ca", &[("cells", "1,1;2,3;5,5;6,2"), ("box_side", "8"), ("steps", "12")]),
        ("lattice-rays", &[("random", "6")]),
    ];
    let root = tempfile::tempdir().unwrap();
    let mut bad = Vec::new();
    for (name, params) in runs {
        let mut produced = Vec::new();
        for (label, threads) in [("t1", 1), ("t3", 3)] {
            let mut cfg = ExperimentConfig::defaults(name).unwrap();
            for (k, v) in params {
                cfg.set(k, v).unwrap();
            }
            cfg.master_seed = 2024;
            cfg.threads = Some(threads);
            cfg.output_dir = root.path().join(name).join(label);
            let out = run(&cfg).expect("run");
            produced.push(outputs(&cfg.output_dir));
            if label == "t1" {
                // regenerate from the manifest alone
                let text = std::fs::read_to_string(&out.manifest).unwrap();
                let mut again = ExperimentConfig::from_key_values(&text).unwrap();
                again.output_dir = root.path().join(name).join("manifest");
                run(&again).expect("rerun");
                produced.push(outputs(&again.output_dir));
            }
        }
        if produced.iter().any(|p| p != &produced[0] || p.is_empty()) {
            bad.push(name);
        }
    }
    outcome(bad.is_empty(), format!("10 experiments × (1 thread, 3 threads, manifest rerun); differing: {bad:?}"))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        ("Euler identities on 1000 instances", euler_identities),
        ("engine agrees with time-stepping oracle", engine_matches_oracle),
        ("exponential tail of segment length", exponential_tail),
        ("length scaling under intensity change", scaling_law),
        ("independence beyond a quarter of the distance", independence_regime),
        ("perpendicular trap has zero joint frequency", trap_joint_frequency),
        ("nearby parallel seeds correlate positively", positive_correlation),
        ("covariance decays with distance", covariance_decay),
        ("escaping rays scale like sqrt(lambda) N", escaping_rays),
        ("automaton examples and lattice freezing", lattice_models),
        ("byte-identical outputs across threads and reruns", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "[{}] {:>2}. {name}: {} ({:.1}s)",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail,
            start.elapsed().as_secs_f64()
        );
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
