//! Acceptance suite A1–A8. Runs sequentially and prints one line per
//! criterion; exits non-zero if any criterion fails.
//!
//! Reference values come from oracles written here (closed-form densities,
//! a Gauss–Legendre iterated integral, jittered rejection sampling, and a
//! characteristic-polynomial eigenvalue solver), not from the library paths
//! being checked.

#![allow(clippy::needless_range_loop)]

use std::path::Path;
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use momentmap::dhlab::{dh_big, dh_chamber, int_map};
use momentmap::liegc::{check_strong_datum, gc_map, gc_polytope, gc_polytope_volume, orbit_volume, random_lie_point};
use momentmap::linalg::{eig_h, principal_submatrix};
use momentmap::measure::{compare, compare_where, push_forward, Grid, Sampling};
use momentmap::rng::SampleStream;
use momentmap::spaces::{cpn_space, orbit_space, su2_orbit, product_space};
use momentmap::{ChamberPoint, GroupSpec, HermitianMatrix};
use momentmap_cli::{run, ExperimentConfig, Outcome};
use num_complex::Complex;

const N: u64 = 1_000_000;

struct Verdict {
    passed: bool,
    detail: String,
}

fn verdict(passed: bool, detail: String) -> Verdict {
    Verdict { passed, detail }
}

fn threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn sampling(seed: u64) -> Sampling {
    Sampling::new(N, seed).with_threads(threads())
}

fn within_budget(start: Instant, budget: Duration) -> (bool, String) {
    let t = start.elapsed();
    (t < budget, format!("{:.1}s (limit {}s)", t.as_secs_f64(), budget.as_secs()))
}

fn a1_torus_baseline() -> Verdict {
    let start = Instant::now();
    let cp1 = cpn_space(1).unwrap();
    let g1 = Grid::new(vec![0.0], vec![1.0], vec![50]).unwrap();
    let e1 = dh_big(&cp1, &g1, sampling(11)).unwrap();
    let r1 = compare(&e1, |_| 1.0, 500.0, 0.03);

    let cp2 = cpn_space(2).unwrap();
    let g2 = Grid::new(vec![0.0, 0.0], vec![1.0, 1.0], vec![10, 10]).unwrap();
    let e2 = dh_big(&cp2, &g2, sampling(12)).unwrap();
    // bins entirely inside the open simplex
    let r2 = compare_where(&e2, |_| 1.0, 500.0, 0.03, |_, hi| hi[0] + hi[1] <= 1.0 + 1e-12);

    let m1 = e1.total_mass_estimate();
    let m2 = e2.total_mass_estimate();
    let mass_ok = (m1 - 1.0).abs() < 0.01 && (m2 - 0.5).abs() < 0.01 * 0.5;
    let (time_ok, time) = within_budget(start, Duration::from_secs(30));
    verdict(
        r1.passed && r2.passed && r1.bins_used == 50 && r2.bins_used > 0 && mass_ok && time_ok,
        format!(
            "CP1 max rel err {:.4} over {} bins, mass {m1:.5}; CP2 max rel err {:.4} over {} bins, mass {m2:.5}; {time}",
            r1.max_rel_error, r1.bins_used, r2.max_rel_error, r2.bins_used
        ),
    )
}

/// Gauss–Legendre nodes and weights on [-1, 1], exact for degree 7.
const GL4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Volume of all interlacing rows below `row`. With `row` fixed the next row
/// ranges over a box and the volume below it is a polynomial of degree at
/// most 3 in each coordinate (n <= 5), so tensor Gauss–Legendre is exact.
fn interlacing_volume_below(row: &[f64]) -> f64 {
    let k = row.len() - 1;
    if k == 0 {
        return 1.0;
    }
    let mut next = vec![0.0; k];
    let mut total = 0.0;
    let combos = GL4.len().pow(k as u32);
    for code in 0..combos {
        let mut c = code;
        let mut w = 1.0;
        for i in 0..k {
            let (x, wx) = GL4[c % GL4.len()];
            c /= GL4.len();
            let (lo, hi) = (row[i + 1], row[i]);
            next[i] = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x;
            w *= 0.5 * (hi - lo) * wx;
        }
        total += w * interlacing_volume_below(&next);
    }
    total
}

/// Membership in the interlacing polytope over `top`; `x` holds rows of
/// length n-1, n-2, ..., 1.
fn interlaces(top: &[f64], x: &[f64]) -> bool {
    let mut above = top.to_vec();
    let mut offset = 0;
    for k in (1..top.len()).rev() {
        let row = &x[offset..offset + k];
        if (0..k).any(|i| !(above[i + 1] <= row[i] && row[i] <= above[i])) {
            return false;
        }
        above = row.to_vec();
        offset += k;
    }
    true
}

fn a2_polytope_volumes() -> Verdict {
    let start = Instant::now();
    let mut worst: f64 = 0.0;
    let mut worst_lib: f64 = 0.0;
    for n in 2..=4 {
        for i in 0..10 {
            let mut rng = SampleStream::new(21, (n * 100 + i) as u64);
            let mut lambda: Vec<f64> = (0..n).map(|_| rng.uniform_in(-5.0, 5.0)).collect();
            lambda.sort_by(|a, b| b.total_cmp(a));
            let oracle = interlacing_volume_below(&lambda);
            let c = ChamberPoint::new(GroupSpec::un(n), lambda).unwrap();
            worst = worst.max((orbit_volume(&c) - oracle).abs() / oracle);
            worst_lib = worst_lib.max((gc_polytope_volume(&gc_polytope(&c)) - oracle).abs() / oracle);
        }
    }

    // jittered rejection sampling over the bounding box of the un(4) polytope
    let top = [3.0, 1.0, -1.0, -3.0];
    let mut bbox = Vec::new();
    for k in (1..4).rev() {
        for i in 0..k {
            bbox.push((top[i + 4 - k], top[i]));
        }
    }
    let box_vol: f64 = bbox.iter().map(|(lo, hi)| hi - lo).product();
    let strata = 10u64;
    let cells = strata.pow(bbox.len() as u32);
    let mut x = vec![0.0; bbox.len()];
    let mut hits = 0u64;
    for i in 0..cells {
        let mut rng = SampleStream::new(22, i);
        let mut cell = i;
        for (xi, (lo, hi)) in x.iter_mut().zip(&bbox) {
            let k = (cell % strata) as f64;
            cell /= strata;
            *xi = lo + (hi - lo) * (k + rng.uniform()) / strata as f64;
        }
        hits += u64::from(interlaces(&top, &x));
    }
    let mc = box_vol * hits as f64 / cells as f64;
    let closed = orbit_volume(&ChamberPoint::new(GroupSpec::un(4), top.to_vec()).unwrap());
    let mc_err = (mc - closed).abs() / closed;
    let (time_ok, time) = within_budget(start, Duration::from_secs(60));
    verdict(
        worst < 1e-9 && worst_lib < 1e-9 && mc_err < 0.005 && cells == N && time_ok,
        format!(
            "closed vs quadrature max rel {worst:.2e}, library vs quadrature {worst_lib:.2e}; un4 MC {mc:.4} vs {closed} (rel {mc_err:.4}); {time}"
        ),
    )
}

fn a3_interior_uniformity() -> Verdict {
    let start = Instant::now();
    let c = ChamberPoint::new(GroupSpec::un(3), vec![2.0, 0.0, -2.0]).unwrap();
    let space = orbit_space(&c).unwrap();
    let grid = Grid::new(vec![0.0, -2.0, -2.0], vec![2.0, 0.0, 2.0], vec![12, 12, 24]).unwrap();
    let est = push_forward(&space, &int_map(&space), &grid, sampling(31)).unwrap();
    // interior coordinates (m1, m2, k) with 0 <= m1 <= 2, -2 <= m2 <= 0, m2 <= k <= m1
    let inside = |lo: &[f64], hi: &[f64]| lo[2] >= hi[1] && hi[2] <= lo[0];
    let r = compare_where(&est, |_| 1.0, 0.0, 1.0, inside);
    let mass = est.total_mass_estimate();
    let (time_ok, time) = within_budget(start, Duration::from_secs(60));
    verdict(
        r.bins_used >= 1000 && r.p_value > 0.001 && (mass - 8.0).abs() < 0.08 && time_ok,
        format!(
            "chi2 {:.1} on {} dof over {} bins, p = {:.4}; mass {mass:.4}; {time}",
            r.chi_square, r.dof, r.bins_used, r.p_value
        ),
    )
}

fn a4_horn_density() -> Verdict {
    let start = Instant::now();
    let space = product_space(vec![su2_orbit(1.0).unwrap(), su2_orbit(0.5).unwrap()]).unwrap();
    let grid = Grid::new(vec![0.5], vec![1.5], vec![200]).unwrap();
    let est = dh_chamber(&space, &grid, sampling(41)).unwrap();
    let interior = |lo: &[f64], hi: &[f64]| lo[0] > 0.5 + 1e-12 && hi[0] < 1.5 - 1e-12;
    let r = compare_where(&est, |x| 2.0 * x[0], 0.0, 0.05, interior);
    let mass = est.total_mass_estimate();
    let (_, time) = within_budget(start, Duration::from_secs(60));
    verdict(
        r.passed && r.bins_used == 198 && (mass - 2.0).abs() < 0.02,
        format!("max rel err {:.4} over {} bins; mass {mass:.4}; {time}", r.max_rel_error, r.bins_used),
    )
}

fn verify_via_cli(orbits: &str, seed: u64, dir: &Path) -> (bool, String) {
    let out = dir.join(format!("verify-{seed}.json"));
    let text = format!(
        "target=verify\ngroup=su2\norbits={orbits}\nsamples={N}\nseed={seed}\ntolerance=0.1,3\nout={}\n",
        out.display()
    );
    let config = ExperimentConfig::from_kv(&text).unwrap();
    let outcome = run(&config, threads(), &mut std::io::sink()).unwrap();
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    let count = |fam: &str| rows.iter().filter(|r| r["family"] == fam).count();
    let all_pass = rows.iter().all(|r| r["passed"] == true);
    let corollary = count("corollary");
    let fiber = count("fiber");
    let ok = outcome == Outcome::Pass && report["passed"] == true && all_pass && corollary >= 5 && fiber >= 5;
    (
        ok,
        format!("{orbits}: {corollary} corollary, {fiber} fiber, {} interior rows", count("interior")),
    )
}

fn a5_main_theorem() -> Verdict {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let (ok1, d1) = verify_via_cli("1,0.5", 51, dir.path());
    let (ok2, d2) = verify_via_cli("1,1,1", 52, dir.path());
    let (time_ok, time) = within_budget(start, Duration::from_secs(120));
    verdict(ok1 && ok2 && time_ok, format!("{d1}; {d2}; {time}"))
}

fn a6_strong_datum() -> Verdict {
    let groups = [GroupSpec::torus(2), GroupSpec::su2(), GroupSpec::un(2), GroupSpec::un(3)];
    let mut passed = true;
    let mut worst: f64 = 0.0;
    for g in groups {
        let report = check_strong_datum(g, 61, 10_000).unwrap();
        passed &= report.passed && report.conditions.len() == 4 && report.conditions.iter().all(|c| c.passed);
        for i in 0..10_000 {
            let xi = random_lie_point(g, &mut SampleStream::new(62, i));
            let small = gc_map(&xi).unwrap().small;
            let norm_small = small.iter().map(|x| x * x).sum::<f64>().sqrt();
            worst = worst.max((xi.norm() - norm_small).abs());
        }
    }
    verdict(passed && worst <= 1e-10, format!("all four conditions for torus2, su2, un2, un3; properness max deviation {worst:.2e}"))
}

fn run_mm(args: &[&str], threads: usize) -> i32 {
    Command::new(env!("CARGO_BIN_EXE_mm"))
        .args(args)
        .arg("--threads")
        .arg(threads.to_string())
        .stdout(Stdio::null())
        .status()
        .unwrap()
        .code()
        .unwrap_or(-1)
}

fn a7_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let experiments: [(&str, Vec<&str>); 3] = [
        ("csv", vec!["dh-chamber", "--group", "su2", "--orbits", "1,0.5", "--samples", "200000", "--seed", "71", "--bins", "50"]),
        ("csv", vec!["dh-big", "--space", "cpn:2", "--samples", "200000", "--seed", "72"]),
        ("json", vec!["verify", "--group", "su2", "--orbits", "1,1,1", "--samples", "200000", "--seed", "73"]),
    ];
    let mut identical = 0;
    for (k, (ext, args)) in experiments.iter().enumerate() {
        let mut outputs = Vec::new();
        for (run, threads) in [1usize, 8, 8].into_iter().enumerate() {
            let path = dir.path().join(format!("out-{k}-{run}.{ext}"));
            let mut full = args.clone();
            let p = path.to_str().unwrap().to_string();
            full.extend(["--out", &p]);
            let code = run_mm(&full, threads);
            assert!(code == 0 || code == 2, "exit code {code}");
            outputs.push(std::fs::read(&path).unwrap());
        }
        if outputs.windows(2).all(|w| w[0] == w[1]) && !outputs[0].is_empty() {
            identical += 1;
        }
    }
    verdict(identical == experiments.len(), format!("{identical}/{} experiments byte-identical across threads 1, 8, 8", experiments.len()))
}

/// Characteristic polynomial by Faddeev–LeVerrier, monic, highest degree first.
fn char_poly(h: &HermitianMatrix<f64>) -> Vec<f64> {
    let n = h.dim();
    let a = |i: usize, j: usize| h.entry(i, j);
    let mut m = vec![vec![Complex::new(0.0, 0.0); n]; n];
    let mut coeffs = vec![1.0];
    let mut c_prev = Complex::new(1.0, 0.0);
    for k in 1..=n {
        // M_k = A M_{k-1} + c_{k-1} I
        let mut next = vec![vec![Complex::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex::new(0.0, 0.0);
                for l in 0..n {
                    acc += a(i, l) * m[l][j];
                }
                next[i][j] = acc;
            }
            next[i][i] += c_prev;
        }
        m = next;
        let mut tr = Complex::new(0.0, 0.0);
        for i in 0..n {
            for l in 0..n {
                tr += a(i, l) * m[l][i];
            }
        }
        c_prev = -tr / k as f64;
        coeffs.push(c_prev.re);
    }
    coeffs
}

fn poly_eval(p: &[f64], x: Complex<f64>) -> Complex<f64> {
    p.iter().fold(Complex::new(0.0, 0.0), |acc, &c| acc * x + c)
}

/// Real roots of a polynomial with real spectrum: Durand–Kerner, then Newton.
fn real_roots(p: &[f64]) -> Vec<f64> {
    let n = p.len() - 1;
    let scale = 1.0 + p[1..].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let seed = Complex::new(0.4, 0.9);
    let mut z: Vec<Complex<f64>> = (0..n).map(|k| seed.powu(k as u32) * scale).collect();
    for _ in 0..500 {
        let mut delta: f64 = 0.0;
        for i in 0..n {
            let mut denom = Complex::new(1.0, 0.0);
            for j in 0..n {
                if i != j {
                    denom *= z[i] - z[j];
                }
            }
            let step = poly_eval(p, z[i]) / denom;
            z[i] -= step;
            delta = delta.max(step.norm());
        }
        if delta < 1e-15 * scale {
            break;
        }
    }
    let mut roots: Vec<f64> = z
        .iter()
        .map(|r| {
            let mut x = r.re;
            for _ in 0..5 {
                let (f, df) = p.iter().fold((0.0, 0.0), |(f, df), &c| (f * x + c, df * x + f));
                if df != 0.0 {
                    x -= f / df;
                }
            }
            x
        })
        .collect();
    roots.sort_by(|a, b| b.total_cmp(a));
    roots
}

fn a8_linear_algebra() -> Verdict {
    let mut worst: f64 = 0.0;
    let mut violations = 0usize;
    for i in 0..1000u64 {
        let n = 1 + (i % 5) as usize;
        let mut rng = SampleStream::new(81, i);
        let mut entries = vec![Complex::new(0.0, 0.0); n * n];
        for r in 0..n {
            entries[r * n + r] = Complex::new(rng.normal(), 0.0);
            for c in r + 1..n {
                let z: Complex<f64> = rng.complex_normal();
                entries[r * n + c] = z;
                entries[c * n + r] = z.conj();
            }
        }
        let h = HermitianMatrix::new(n, entries).unwrap();
        let eig = eig_h(&h).unwrap();
        let oracle = real_roots(&char_poly(&h));
        for (a, b) in eig.values().iter().zip(&oracle) {
            worst = worst.max((a - b).abs());
        }
        for k in 1..n {
            let outer = eig_h(&principal_submatrix(&h, k + 1).unwrap()).unwrap();
            let inner = eig_h(&principal_submatrix(&h, k).unwrap()).unwrap();
            violations += usize::from(!outer.interlaced_by(&inner, 1e-10));
        }
    }
    verdict(worst < 1e-8 && violations == 0, format!("max abs eigenvalue error {worst:.2e}; interlacing violations {violations}"))
}

type Criterion = (&'static str, &'static str, fn() -> Verdict);

fn main() {
    let criteria: [Criterion; 8] = [
        ("A1", "torus baseline on CP1 and CP2", a1_torus_baseline),
        ("A2", "Gelfand–Cetlin polytope volumes", a2_polytope_volumes),
        ("A3", "uniform interior pushforward on un3 orbit", a3_interior_uniformity),
        ("A4", "chamber density 2t for su2 O1 x O0.5", a4_horn_density),
        ("A5", "corollary and main-theorem reports", a5_main_theorem),
        ("A6", "strong datum suite", a6_strong_datum),
        ("A7", "determinism across thread counts", a7_determinism),
        ("A8", "eigenvalue and interlacing floor", a8_linear_algebra),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (id, name, check) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str())) {
            continue;
        }
        let v = check();
        println!("{id} {} {name}: {}", if v.passed { "PASS" } else { "FAIL" }, v.detail);
        failed += usize::from(!v.passed);
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
