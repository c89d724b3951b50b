//! The acceptance battery: thirteen criteria, one PASS/FAIL line each.
//!
//! Lines go straight to stdout (not through `println!`) so they show up in
//! normal `cargo test` output.

use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use splitmerge::chains::{
    ccf_step_in_place, check_detailed_balance, exact_kernel, ewens_pmf_over, stationarity_violation,
    ExactDistribution,
};
use splitmerge::coupling::run_replicas;
use splitmerge::diagnostics::{gem_moment_report, moment_sum, stationarity_residual, Estimate};
use splitmerge::partitions::{ContinuousPartition, CylinderSet, IntegerPartition, PartitionSet};
use splitmerge::samplers::{sample_gem, RngStream};
use splitmerge::spectral::{
    eigenvalue, inner_product, return_probability, verify_eigenrelation, CharacterTable, SpectralModel,
};
use splitmerge::DEFAULT_EPSILON_TRUNC;

struct Outcome {
    passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        detail: detail.into(),
    }
}

fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn secs(d: Duration) -> String {
    format!("{:.2}s", d.as_secs_f64())
}

fn detailed_balance() -> Outcome {
    let clock = Instant::now();
    let mut worst = BigRational::zero();
    for n in 2..=10 {
        let v = check_detailed_balance(&exact_kernel(n).unwrap()).unwrap();
        if v > worst {
            worst = v;
        }
    }
    let t = clock.elapsed();
    outcome(
        worst.is_zero() && t < Duration::from_secs(10),
        format!("max violation {worst} over n = 2..=10 in {}", secs(t)),
    )
}

fn stationarity() -> Outcome {
    let ok = (1..=10).all(|n| stationarity_violation(&exact_kernel(n).unwrap()).unwrap().is_zero());
    outcome(ok, "pi K = pi exactly for n = 1..=10")
}

fn orthonormality() -> Outcome {
    let clock = Instant::now();
    let mut bad = 0usize;
    let mut pairs = 0usize;
    for n in 1..=8 {
        let table = CharacterTable::build(n).unwrap();
        let pi = ewens_pmf_over(Arc::clone(table.states())).unwrap();
        let size = table.states().len();
        let chis: Vec<Vec<BigRational>> = (0..size).map(|l| table.class_function(l)).collect();
        for a in 0..size {
            for b in 0..size {
                let ip = inner_product(&chis[a], &chis[b], &pi).unwrap();
                let expected = if a == b { BigRational::one() } else { BigRational::zero() };
                pairs += 1;
                bad += usize::from(ip != expected);
            }
        }
    }
    let t = clock.elapsed();
    outcome(
        bad == 0 && t < Duration::from_secs(60),
        format!("{pairs} pairs for n <= 8, {bad} off, {}", secs(t)),
    )
}

fn eigen_relation() -> Outcome {
    let ok = (2..=8).all(|n| verify_eigenrelation(n).unwrap().is_zero());
    outcome(ok, "K chi_lambda = theta_lambda chi_lambda exactly for n = 2..=8")
}

fn hook_eigenvalues() -> Outcome {
    let mut checked = 0;
    let mut ok = true;
    for n in 2..=30 {
        for i in 1..=n {
            let hook = IntegerPartition::hook(i, n).unwrap();
            ok &= eigenvalue(&hook).unwrap() == q(2 * i as i64 - n as i64 - 1, n as i64 - 1);
            checked += 1;
        }
    }
    outcome(ok, format!("{checked} hooks for n = 2..=30"))
}

fn random_law(states: &Arc<PartitionSet>, rng: &mut RngStream) -> ExactDistribution {
    let raw: Vec<i64> = (0..states.len())
        .map(|_| if rng.below(3) == 0 { 0 } else { rng.below(50) as i64 + 1 })
        .collect();
    let raw = if raw.iter().all(|&x| x == 0) { vec![1; states.len()] } else { raw };
    let total: i64 = raw.iter().sum();
    ExactDistribution::from_weights(Arc::clone(states), raw.iter().map(|&x| q(x, total)).collect())
        .unwrap()
}

fn oracle_equivalence() -> Outcome {
    let mut rng = RngStream::new(2026, 0);
    let mut checks = 0;
    let mut mismatches = 0;
    for n in 2..=8 {
        let kernel = exact_kernel(n).unwrap();
        let model = SpectralModel::over(Arc::clone(kernel.states())).unwrap();
        for _ in 0..50 {
            let mu0 = random_law(kernel.states(), &mut rng);
            let event: Vec<bool> = (0..kernel.states().len()).map(|_| rng.below(2) == 1).collect();
            let mut mu = mu0.clone();
            for k in 0..=20u32 {
                checks += 1;
                if model.event_probability(&mu0, &event, k).unwrap() != mu.mass_of(&event) {
                    mismatches += 1;
                }
                mu = kernel.push_forward(&mu).unwrap();
            }
        }
    }
    outcome(
        mismatches == 0,
        format!("{checks} (mu0, A, k) triples for n = 2..=8, k <= 20, {mismatches} mismatches"),
    )
}

fn return_probabilities() -> Outcome {
    let base = return_probability(3, 1).unwrap() == q(2, 3);
    let mut matches = true;
    for n in 2..=8 {
        let kernel = exact_kernel(n).unwrap();
        let top = IntegerPartition::single(n);
        let mut mu = ExactDistribution::point_mass(Arc::clone(kernel.states()), &top).unwrap();
        for k in 1..=20u32 {
            mu = kernel.push_forward(&kernel.push_forward(&mu).unwrap()).unwrap();
            matches &= return_probability(n, k).unwrap() == mu.weight(&top);
        }
    }
    let mut min = (f64::INFINITY, 0, 0);
    for n in 2..=50usize {
        for k in 1..n as u32 {
            let kp = (return_probability(n, k).unwrap() * BigRational::from_integer(k.into()))
                .to_f64()
                .unwrap();
            if kp < min.0 {
                min = (kp, n, k);
            }
        }
    }
    outcome(
        base && matches && min.0 >= 0.2,
        format!(
            "P(3,1) = 2/3: {base}; matrix power agrees for n <= 8, k <= 20: {matches}; \
             min k*P = {:.4} at n = {}, k = {}",
            min.0, min.1, min.2
        ),
    )
}

/// Five cylinders whose scaled versions contain partitions of both parities at n = 8.
fn cylinder_battery() -> Vec<CylinderSet> {
    [
        "0.57,0.87",
        "0.6,0.7",
        "0.7,0.8",
        "0.35,0.4;0.35,0.4",
        "0.55,0.75",
    ]
    .iter()
    .map(|spec| CylinderSet::parse(spec).unwrap())
    .collect()
}

fn delta_c_decay() -> Outcome {
    let model = SpectralModel::new(8).unwrap();
    let start =
        ExactDistribution::point_mass(Arc::clone(model.states()), &IntegerPartition::new(vec![4, 4]).unwrap())
            .unwrap();
    let mut ok = true;
    let mut notes = Vec::new();
    for c in cylinder_battery() {
        let seq = model.delta_c_sequence(&start, &c, 60).unwrap();
        let abs: Vec<BigRational> = seq.iter().map(|d| d.abs()).collect();
        let monotone = abs[10..].windows(2).all(|w| w[1] <= w[0]);
        let last = abs[60].to_f64().unwrap();
        ok &= monotone && last < 1e-3;
        notes.push(format!("{:.1e}{}", last, if monotone { "" } else { " (not monotone)" }));
    }
    outcome(ok, format!("n = 8 from (4,4): |Delta(60)| = [{}]", notes.join(", ")))
}

fn pd_moments() -> Outcome {
    let clock = Instant::now();
    let mut ok = true;
    let mut notes = Vec::new();
    for (i, alpha) in [0.5, 0.6, 0.8].into_iter().enumerate() {
        let r = gem_moment_report(alpha, 10_000, 900 + i as u64, DEFAULT_EPSILON_TRUNC).unwrap();
        let z = (r.sample_mean - 1.0 / alpha) / r.std_error;
        ok &= z.abs() <= 3.0;
        notes.push(format!("alpha {alpha}: {:.4} (z = {z:+.2})", r.sample_mean));
    }
    let t = clock.elapsed();
    ok &= t < Duration::from_secs(5);
    outcome(ok, format!("{} in {}", notes.join("; "), secs(t)))
}

fn ccf_invariance() -> Outcome {
    let gem = |rng: &mut RngStream| sample_gem(rng, DEFAULT_EPSILON_TRUNC);
    let mut ok = true;
    let mut zs = Vec::new();
    for m in 1..=6u32 {
        let est: Estimate = stationarity_residual(gem, m, 100_000, 1000 + m as u64).unwrap();
        ok &= est.within(0.0, 3.0);
        zs.push(format!("{:+.2}", est.mean / est.std_error));
    }
    outcome(ok, format!("W_m residual z-scores for m = 1..=6: [{}]", zs.join(", ")))
}

fn coupling_invariants() -> Outcome {
    let traces = run_replicas(
        |rng| sample_gem(rng, DEFAULT_EPSILON_TRUNC),
        10_000,
        100,
        1000,
        11,
    )
    .unwrap();
    let bad: Vec<String> = traces
        .iter()
        .flat_map(|t| t.bound_violations().into_iter().map(move |v| format!("replica {}: {v}", t.stream_id)))
        .collect();
    let decoupled = traces.iter().filter(|t| t.tau.is_some()).count();
    outcome(
        bad.is_empty(),
        format!(
            "1000 replicas, n = 10^4, 100 steps: {} violations, {decoupled} decoupled{}",
            bad.len(),
            bad.first().map(|b| format!("; first: {b}")).unwrap_or_default()
        ),
    )
}

fn decoupling_scaling() -> Outcome {
    let mut rates = Vec::new();
    for (i, n) in [100usize, 1000, 10_000].into_iter().enumerate() {
        let horizon = (n as f64).powf(0.4);
        let traces = run_replicas(
            |rng| sample_gem(rng, DEFAULT_EPSILON_TRUNC),
            n,
            horizon.ceil() as usize,
            1000,
            12 + i as u64,
        )
        .unwrap();
        let early = traces
            .iter()
            .filter(|t| t.tau.is_some_and(|tau| (tau as f64) < horizon))
            .count();
        rates.push(early as f64 / 1000.0);
    }
    outcome(
        rates.windows(2).all(|w| w[1] < w[0]),
        format!("P[tau < n^0.4] for n = 10^2, 10^3, 10^4: {rates:?}"),
    )
}

fn uniqueness_corroboration() -> Outcome {
    let steps = 100_000;
    let window = 50_000;
    let mut p = ContinuousPartition::unit();
    let mut rng = RngStream::new(13, 0);
    let mut sum = 0.0;
    for k in 1..=steps {
        ccf_step_in_place(&mut p, &mut rng);
        if k > steps - window {
            sum += moment_sum(&p, 0.6).unwrap();
        }
    }
    let mean = sum / window as f64;
    let target = 1.0 / 0.6;
    let rel = (mean - target).abs() / target;
    outcome(
        rel <= 0.05,
        format!("mean of sum p^0.6 over the last {window} of {steps} steps = {mean:.4} ({:.2}% off 1/0.6)", 100.0 * rel),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

#[test]
fn acceptance_criteria() {
    let criteria: [Criterion; 13] = [
        ("exact detailed balance", detailed_balance),
        ("exact stationarity", stationarity),
        ("character orthonormality", orthonormality),
        ("eigen-relation", eigen_relation),
        ("hook eigenvalues", hook_eigenvalues),
        ("spectral vs matrix-power oracle", oracle_equivalence),
        ("return probability", return_probabilities),
        ("Delta_C decay", delta_c_decay),
        ("PD(1) moment identity", pd_moments),
        ("CCF invariance of PD(1)", ccf_invariance),
        ("coupling invariants", coupling_invariants),
        ("decoupling scaling", decoupling_scaling),
        ("uniqueness corroboration", uniqueness_corroboration),
    ];
    let mut failed = Vec::new();
    let mut out = std::io::stdout();
    for (i, (name, check)) in criteria.iter().enumerate() {
        let clock = Instant::now();
        let o = check();
        let status = if o.passed { "PASS" } else { "FAIL" };
        writeln!(
            out,
            "[{status}] criterion {:>2} {name}: {} ({})",
            i + 1,
            o.detail,
            secs(clock.elapsed())
        )
        .unwrap();
        if !o.passed {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
