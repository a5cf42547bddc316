//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any fail.

use std::alloc::{GlobalAlloc, Layout, System};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::time::{Duration, Instant};

use occupancy_cli::render::JsonReport;
use occupancy_cli::{run_with, verify};
use occupancy_core::montecarlo::estimate_cdf;
use occupancy_core::oracle::{enumerate_cdf, rational_weights, OracleBudget};
use occupancy_core::{
    build_table, cdf_prefix, cdf_scaled, cdf_weighted, p_value, Method, OccupancyProblem,
    WeightVector,
};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

struct Counting;

static CURRENT: AtomicUsize = AtomicUsize::new(0);
static PEAK: AtomicUsize = AtomicUsize::new(0);

unsafe impl GlobalAlloc for Counting {
    unsafe fn alloc(&self, layout: Layout) -> *mut u8 {
        let p = System.alloc(layout);
        if !p.is_null() {
            let now = CURRENT.fetch_add(layout.size(), Ordering::Relaxed) + layout.size();
            PEAK.fetch_max(now, Ordering::Relaxed);
        }
        p
    }

    unsafe fn dealloc(&self, ptr: *mut u8, layout: Layout) {
        System.dealloc(ptr, layout);
        CURRENT.fetch_sub(layout.size(), Ordering::Relaxed);
    }
}

#[global_allocator]
static ALLOC: Counting = Counting;

const PRINTED: f64 = 5e-7;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    details: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Self {
            passed: true,
            details: Vec::new(),
        }
    }

    fn check(&mut self, ok: bool, detail: String) {
        if !ok {
            self.passed = false;
            self.details.push(format!("miss: {detail}"));
        }
    }

    fn note(&mut self, detail: String) {
        self.details.push(detail);
    }
}

fn cli_json(args: &[&str]) -> (JsonReport, Duration) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let start = Instant::now();
    let code = run_with(
        std::iter::once("occupancy").chain(args.iter().copied()),
        &mut out,
        &mut err,
    );
    let elapsed = start.elapsed();
    assert_eq!(code, 0, "{}", String::from_utf8_lossy(&err));
    (serde_json::from_slice(&out).expect("json output"), elapsed)
}

fn printed_table(args: &[&str], printed: &[(u64, f64, f64)]) -> Outcome {
    let mut o = Outcome::new();
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--format", "json"]);
    let (report, elapsed) = cli_json(&full);
    o.check(
        report.rows.len() == printed.len(),
        format!("{} rows", report.rows.len()),
    );
    let mut worst = 0.0f64;
    // whether every print is the exact CDF cut to six decimals, with each
    // P-value printed as one minus the previous printed CDF
    let mut truncated = true;
    let mut prev_print: Option<f64> = None;
    for (row, &(m, cdf, pv)) in report.rows.iter().zip(printed) {
        let cut = (row.cdf.unwrap() * 1e6 + 1e-9).floor() / 1e6;
        truncated &= (cut - cdf).abs() < 1e-9;
        truncated &= prev_print.is_none_or(|prev| (1.0 - prev - pv).abs() < 1e-9);
        prev_print = Some(cdf);
        let (c, p) = (row.cdf.unwrap(), row.p_value.unwrap());
        worst = worst.max((c - cdf).abs()).max((p - pv).abs());
        o.check(row.m == m, format!("row m={} expected {m}", row.m));
        o.check(
            (c - cdf).abs() <= PRINTED,
            format!("m={m} cdf {c:.9} vs printed {cdf}"),
        );
        o.check(
            (p - pv).abs() <= PRINTED,
            format!("m={m} p-value {p:.9} vs printed {pv}"),
        );
    }
    o.check(
        elapsed < Duration::from_secs(1),
        format!("took {elapsed:?}"),
    );
    if !o.passed {
        o.note(format!(
            "prints consistent with truncation instead of rounding: {truncated}"
        ));
    }
    o.note(format!(
        "{} values, largest deviation from print {worst:.2e}, {elapsed:?}",
        2 * printed.len()
    ));
    o
}

fn table_14400_9000() -> Outcome {
    printed_table(
        &[
            "table", "-r", "14400", "-n", "9000", "--m-min", "6", "--m-max", "12", "--method",
            "scaled",
        ],
        &[
            (6, 0.000005, 1.000000),
            (7, 0.095395, 0.999995),
            (8, 0.664954, 0.904605),
            (9, 0.937864, 0.335046),
            (10, 0.990843, 0.062136),
            (11, 0.998788, 0.009157),
            (12, 0.999852, 0.001212),
        ],
    )
}

fn table_8000_12000() -> Outcome {
    printed_table(
        &[
            "table", "-r", "8000", "-n", "12000", "--m-min", "4", "--m-max", "8",
        ],
        &[
            (4, 0.000472, 1.000000),
            (5, 0.436361, 0.999528),
            (6, 0.925122, 0.563639),
            (7, 0.993604, 0.074878),
            (8, 0.999528, 0.006396),
        ],
    )
}

fn printed_coincidence() -> Outcome {
    let mut o = Outcome::new();
    let cdf8 = cdf_scaled(&OccupancyProblem::new(8000, 12000, 8).unwrap())
        .unwrap()
        .value;
    let pv5 = p_value(8000, 12000, 5).unwrap().value;
    let pv9 = p_value(8000, 12000, 9).unwrap().value;
    o.check(
        (cdf8 - 0.999528).abs() <= PRINTED,
        format!("P(8000,12000,8) = {cdf8:.9}"),
    );
    o.check(
        (pv5 - 0.999528).abs() <= PRINTED,
        format!("pvalue(m=5) = {pv5:.9}"),
    );
    o.check(
        (cdf8 - (1.0 - pv9)).abs() <= 1e-12,
        format!("1 - pvalue(m=9) = {:.12}", 1.0 - pv9),
    );
    let (a, b) = (format!("{cdf8:.6}"), format!("{pv5:.6}"));
    o.check(a == b, format!("rendered {a} and {b}"));
    o.note(format!("P(8) = {cdf8:.9}, pvalue(5) = {pv5:.9}"));
    o
}

fn oracle_equivalence() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let c = verify::oracle_grid().expect("grid runs");
    let elapsed = start.elapsed();
    o.check(
        c.mismatches == 0,
        format!("{} exact mismatches", c.mismatches),
    );
    o.check(
        c.max_error <= 1e-12,
        format!("scaled error {:.2e}", c.max_error),
    );
    o.check(
        elapsed < Duration::from_secs(30),
        format!("took {elapsed:?}"),
    );
    o.note(format!(
        "{} points, max error {:.2e}, {elapsed:?}",
        c.points, c.max_error
    ));
    o
}

fn cross_engine() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let c = verify::cross_engine_grid().expect("grid runs");
    let elapsed = start.elapsed();
    o.check(
        c.max_error <= 1e-12,
        format!("max |scaled - rational| {:.2e}", c.max_error),
    );
    o.check(
        elapsed < Duration::from_secs(120),
        format!("took {elapsed:?}"),
    );
    o.note(format!(
        "{} points, max error {:.2e}, {elapsed:?}",
        c.points, c.max_error
    ));
    o
}

fn weighted_consistency() -> Outcome {
    let mut o = Outcome::new();
    let mut worst = 0.0f64;
    let mut points = 0;
    for n in [1u64, 2, 3, 4, 5, 7, 10, 16, 25, 37, 50] {
        let w = WeightVector::uniform(n as usize).unwrap();
        for r in [0u64, 1, 2, 5, 10, 33, 64, 100, 150, 200] {
            for m in 0..=10 {
                let a = cdf_weighted(r, &w, m).unwrap().value;
                let b = cdf_scaled(&OccupancyProblem::new(r, n, m).unwrap())
                    .unwrap()
                    .value;
                worst = worst.max((a - b).abs());
                points += 1;
            }
        }
    }
    o.check(worst <= 1e-10, format!("uniform max deviation {worst:.2e}"));
    let budget = OracleBudget::default();
    let vectors: [&[f64]; 8] = [
        &[1.0],
        &[0.5, 0.5],
        &[0.2, 0.8],
        &[0.25, 0.25, 0.5],
        &[0.6, 0.3, 0.1],
        &[0.25, 0.25, 0.25, 0.25],
        &[0.1, 0.2, 0.3, 0.4],
        &[0.05, 0.05, 0.45, 0.45],
    ];
    let mut oracle_worst = 0.0f64;
    let mut oracle_points = 0;
    for v in vectors {
        let exact = rational_weights(v).unwrap();
        let w = WeightVector::new(v.to_vec()).unwrap();
        for r in 0..=6 {
            for m in 0..=r {
                let e = enumerate_cdf(r, v.len() as u64, m, Some(&exact), &budget)
                    .unwrap()
                    .to_f64();
                oracle_worst = oracle_worst.max((cdf_weighted(r, &w, m).unwrap().value - e).abs());
                oracle_points += 1;
            }
        }
    }
    o.check(
        oracle_worst <= 1e-10,
        format!("enumeration max deviation {oracle_worst:.2e}"),
    );
    o.note(format!(
        "uniform: {points} points, max {worst:.2e}; enumeration: {oracle_points} points, max {oracle_worst:.2e}"
    ));
    o
}

fn monte_carlo() -> Outcome {
    let mut o = Outcome::new();
    let start = Instant::now();
    let a = estimate_cdf(14400, 9000, 6, 12, 100_000, 20040, 0.95).unwrap();
    let first = start.elapsed();
    let b = estimate_cdf(14400, 9000, 6, 12, 100_000, 20040, 0.95).unwrap();
    let exact = build_table(14400, 9000, 6, 12, Method::Scaled).unwrap();
    let worst = a
        .empirical_cdf
        .iter()
        .zip(&exact.rows)
        .map(|(e, row)| (e - row.cdf).abs())
        .fold(0.0, f64::max);
    o.check(worst <= 0.01, format!("max |empirical - exact| {worst:.4}"));
    o.check(
        a.hits == b.hits
            && a.empirical_cdf == b.empirical_cdf
            && a.ci_half_widths == b.ci_half_widths,
        "repeated run differs".into(),
    );
    o.check(first < Duration::from_secs(300), format!("took {first:?}"));
    o.note(format!(
        "T = 1e5, max deviation {worst:.4}, {first:?} per run"
    ));
    o
}

fn properties() -> Outcome {
    let mut o = Outcome::new();
    let cases = 1000;
    let mut runner = TestRunner::new(Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    });
    let cdf = |r: u64, n: u64, m: u64| {
        let res = cdf_scaled(&OccupancyProblem::new(r, n, m).unwrap()).unwrap();
        (res.value, res.error_estimate.unwrap_or(0.0))
    };
    let strategy = (0u64..400, 1u64..200, 0u64..15);
    let results = [
        (
            "monotone in m",
            runner
                .run(&strategy, |(r, n, m)| {
                    let ((a, ea), (b, eb)) = (cdf(r, n, m), cdf(r, n, m + 1));
                    prop_assert!((0.0..=1.0).contains(&a) && a <= b + ea + eb + 1e-15);
                    Ok(())
                })
                .map_err(|e| e.to_string()),
        ),
        (
            "monotone in r",
            runner
                .run(&strategy, |(r, n, m)| {
                    let ((a, ea), (b, eb)) = (cdf(r + 1, n, m), cdf(r, n, m));
                    prop_assert!(a <= b + ea + eb + 1e-15);
                    Ok(())
                })
                .map_err(|e| e.to_string()),
        ),
        (
            "boundary identities",
            runner
                .run(&strategy, |(r, n, m)| {
                    prop_assert_eq!(cdf(0, n, m).0, 1.0);
                    prop_assert_eq!(cdf(r, n, r + m).0, 1.0);
                    prop_assert_eq!(cdf(r, 1, m).0, if r <= m { 1.0 } else { 0.0 });
                    if n * m < r {
                        prop_assert_eq!(cdf(r, n, m).0, 0.0);
                    }
                    Ok(())
                })
                .map_err(|e| e.to_string()),
        ),
        (
            "prefix nonincreasing",
            runner
                .run(&strategy, |(r, n, m)| {
                    let q = cdf_prefix(&OccupancyProblem::new(r, n, m).unwrap()).unwrap();
                    prop_assert!(q[0] == 1.0 && q.windows(2).all(|w| w[1] <= w[0] + 1e-13));
                    Ok(())
                })
                .map_err(|e| e.to_string()),
        ),
        (
            "table complementarity",
            runner
                .run(
                    &(1u64..300, 1u64..100, 0u64..6, 0u64..8),
                    |(r, n, lo, span)| {
                        let t = build_table(r, n, lo, lo + span, Method::Scaled).unwrap();
                        for row in &t.rows {
                            let below = if row.m == 0 {
                                0.0
                            } else {
                                cdf(r, n, row.m - 1).0
                            };
                            prop_assert!((row.p_value + below - 1.0).abs() <= 1e-12);
                        }
                        prop_assert!(t.masses().iter().all(|&x| x >= -1e-12));
                        Ok(())
                    },
                )
                .map_err(|e| e.to_string()),
        ),
    ];
    for (name, res) in results {
        if let Err(e) = res {
            o.check(false, format!("{name}: {e}"));
        }
    }
    o.note(format!("5 properties x {cases} sampled problems"));
    o
}

fn median_time(problem: &OccupancyProblem) -> Duration {
    let mut times: Vec<Duration> = (0..5)
        .map(|_| {
            let start = Instant::now();
            std::hint::black_box(cdf_scaled(problem).unwrap());
            start.elapsed()
        })
        .collect();
    times.sort();
    times[2]
}

fn performance() -> Outcome {
    let mut o = Outcome::new();
    let small = OccupancyProblem::new(1_000_000, 1_000_000, 8).unwrap();
    let large = OccupancyProblem::new(2_000_000, 1_000_000, 8).unwrap();
    let (a, b) = (median_time(&small), median_time(&large));
    let ratio = b.as_secs_f64() / a.as_secs_f64();
    o.check(ratio <= 2.5, format!("doubling r took {ratio:.2}x"));

    let problem = OccupancyProblem::new(15000, 10000, 8).unwrap();
    let base = CURRENT.load(Ordering::Relaxed);
    PEAK.store(base, Ordering::Relaxed);
    let res = std::hint::black_box(cdf_scaled(&problem).unwrap());
    let high_water = PEAK.load(Ordering::Relaxed) - base;
    let window = (problem.threshold() as usize + 1) * std::mem::size_of::<f64>();
    let bound = 8 * window + 1024;
    o.check(
        high_water <= bound,
        format!("high water {high_water} bytes, bound {bound}"),
    );
    o.note(format!(
        "r 1e6 -> 2e6: {a:?} -> {b:?} ({ratio:.2}x); (15000,10000,8) via {:?}: {high_water} heap bytes, \
         window {window}, bound {bound}, an r-length buffer would be {}",
        res.route,
        15001 * std::mem::size_of::<f64>()
    ));
    o
}

fn main() {
    let criteria: [Criterion; 9] = [
        (
            "table r=14400 n=9000 m=6..12 matches print",
            table_14400_9000,
        ),
        (
            "table r=8000 n=12000 m=4..8 matches print",
            table_8000_12000,
        ),
        (
            "P(8000,12000,8) and P-value at m=5 both print 0.999528",
            printed_coincidence,
        ),
        ("oracle equivalence r<=8, n<=5", oracle_equivalence),
        ("cross-engine grid scaled vs rational", cross_engine),
        ("weighted consistency", weighted_consistency),
        ("monte carlo validation at (14400, 9000)", monte_carlo),
        ("property suites", properties),
        ("performance scaling and memory", performance),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = f();
        let status = if outcome.passed { "PASS" } else { "FAIL" };
        println!("{status} [{}] {name}", i + 1);
        for d in &outcome.details {
            println!("       {d}");
        }
        failed += usize::from(!outcome.passed);
    }
    println!(
        "{} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
