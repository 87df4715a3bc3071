//! Acceptance suite: one line per criterion.
//!
//! Checks known not to be attainable as stated (see README) are reported as
//! `FAIL (known open)` and fail the run only with `LIPBOUND_STRICT=1`.
//! `LIPBOUND_ACCEPTANCE_ONLY=1,3` runs a subset.

use std::f64::consts::{PI, TAU};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use lipbound_core::geometry::{sff_sandwich, triangulate, CurvatureProfile};
use lipbound_core::norm_field::{check_divergence_identity, Poly2, PolyField2};
use lipbound_core::rearrangement::{lorentz_norm, LorentzOptions};
use lipbound_core::solver::{gradient_bound_ratio, solve, KazdanKramer};
use lipbound_core::young::check_auxiliary_functions;
use lipbound_core::{BoundaryCondition, Domain, Norm2, Problem, SampledFunction, YoungFunctionF64};
use lipbound_harness::build::cell_average;
use lipbound_harness::config::AssertSpec;
use lipbound_harness::properties::{property_suite, PropertyOutcome, SuiteOptions};
use lipbound_harness::run::{compute_rows, evaluate, log_slope, Row};
use lipbound_harness::ExperimentConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    passed: bool,
    // checks that are reported but known not to be attainable as stated
    open_passed: bool,
    detail: String,
}

fn outcome(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed,
        open_passed: true,
        detail: detail.into(),
    }
}

fn open(passed: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        passed: true,
        open_passed: passed,
        detail: detail.into(),
    }
}

type Criterion = (u8, &'static str, fn() -> Outcome);

fn unit_disk_problem(h: f64, p: f64, f0: f64) -> Problem {
    let mesh = Arc::new(triangulate(&Domain::disk(1.0).unwrap(), h).unwrap());
    let f = SampledFunction::new(vec![f0; mesh.num_triangles()], mesh.areas()).unwrap();
    Problem::new(
        mesh,
        BoundaryCondition::Dirichlet,
        f,
        YoungFunctionF64::power(p).unwrap(),
        Norm2::euclidean(),
    )
    .unwrap()
}

// |u'(1)| of the radial solution: integrate (r φ)' = r f by RK4, then invert b by bisection.
fn radial_oracle(p: f64, f0: f64) -> f64 {
    let n = 1000;
    let dr = 1.0 / n as f64;
    let mut w = 0.0;
    for k in 0..n {
        let r = k as f64 * dr;
        let rhs = |s: f64| s * f0;
        let (k1, k2, k4) = (rhs(r), rhs(r + dr / 2.0), rhs(r + dr));
        w += dr / 6.0 * (k1 + 4.0 * k2 + k4);
    }
    let flux = w; // r b(|u'|) at r = 1
    let b = |t: f64| t.powf(p - 1.0);
    let (mut lo, mut hi) = (0.0, 1.0);
    while b(hi) < flux {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if b(mid) < flux {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn radial_exactness() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for p in [1.5, 2.0, 3.0, 4.0] {
        let oracle = radial_oracle(p, 1.0);
        let closed = 0.5f64.powf(1.0 / (p - 1.0));
        let start = Instant::now();
        let sol = solve(&unit_disk_problem(1.0 / 64.0, p, 1.0)).unwrap();
        let secs = start.elapsed().as_secs_f64();
        let rel = (sol.grad_sup - oracle).abs() / oracle;
        ok &= rel <= 0.02 && secs < 60.0 && (oracle - closed).abs() < 1e-9;
        parts.push(format!("p={p}: rel {rel:.2e} in {secs:.1}s"));
    }
    outcome(ok, parts.join(", "))
}

fn homogeneity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for p in [1.5, 2.0, 3.0, 4.0] {
        let base = unit_disk_problem(1.0 / 32.0, p, 1.0);
        let ratios: Vec<f64> = [1.0, 4.0, 16.0]
            .iter()
            .map(|s| {
                let prob = base.with_source(base.source().map(|v| v * s)).unwrap();
                gradient_bound_ratio(&solve(&prob).unwrap(), &prob).unwrap()
            })
            .collect();
        let spread = ratios.iter().map(|r| (r - ratios[0]).abs() / ratios[0]).fold(0.0, f64::max);
        worst = worst.max(spread);
        parts.push(format!("p={p}: {spread:.1e}"));
    }
    outcome(worst <= 0.005, format!("max relative spread {worst:.2e} ({})", parts.join(", ")))
}

fn rows(text: &str) -> Vec<Row> {
    let cfg = ExperimentConfig::parse(text).expect("valid acceptance config");
    compute_rows(&cfg).expect("config resolves")
}

fn check(spec: AssertSpec, rows: &[Row]) -> (bool, String) {
    let o = evaluate(&spec, rows);
    (o.passed, o.detail)
}

fn anisotropic_convergence() -> Outcome {
    let r = rows(
        r#"
        [domain]
        kind = "disk"
        r = 1.0
        [norm]
        kind = "gauge"
        matrix = [[4.0, 0.0], [0.0, 1.0]]
        [young]
        kind = "power"
        p = 3.0
        [source]
        kind = "manufactured"
        solution = "bump"
        [mesh]
        sizes = [0.05, 0.025, 0.0125]
        "#,
    );
    let errs: Vec<String> = r.iter().map(|r| format!("{:.3e}", r.column("grad_err").unwrap_or(f64::NAN))).collect();
    let (ok, detail) = check(
        AssertSpec::Convergence {
            column: "grad_err".into(),
            min_rate: 0.9,
        },
        &r,
    );
    outcome(ok, format!("h = 0.05, 0.025, 0.0125: errors [{}], {detail}", errs.join(", ")))
}

fn summarize(out: &[PropertyOutcome]) -> Outcome {
    let ok = out.iter().all(|o| o.passed());
    let mut parts: Vec<String> = out.iter().map(|o| format!("{} {}/{}", o.name, o.draws - o.failures, o.draws)).collect();
    if let Some(w) = out.iter().find_map(|o| o.witness.clone()) {
        parts.push(format!("witness: {w}"));
    }
    outcome(ok, parts.join(", "))
}

fn suite(prefixes: &[&str]) -> Vec<PropertyOutcome> {
    prefixes
        .iter()
        .flat_map(|p| property_suite(&SuiteOptions::default(), Some(p)))
        .collect()
}

fn field_suite() -> Outcome {
    summarize(&suite(&["field.", "young.regularized_ratio_bounds"]))
}

fn young_suite() -> Outcome {
    let props = suite(&[
        "young.convexity",
        "young.half_point_sandwich",
        "young.power_growth",
        "young.young_inequality",
        "young.conjugate_at_derivative",
        "young.power_conjugate",
    ]);
    let mut o = summarize(&props);
    // auxiliary-function sandwiches with finite constants, stable under grid refinement
    let registered = [
        YoungFunctionF64::power(1.5).unwrap(),
        YoungFunctionF64::power(2.0).unwrap(),
        YoungFunctionF64::power(3.0).unwrap(),
        YoungFunctionF64::power_sum(2.0, 4.0, 1.0, 1.0).unwrap(),
        YoungFunctionF64::tabulated(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 1.0, 1.5, 4.0]).unwrap(),
    ];
    let grid = |per: usize| lipbound_core::numerics::geometric_grid(1e-3, 1e3, per);
    let mut worst: f64 = 0.0;
    for yf in &registered {
        let coarse = check_auxiliary_functions(yf, &grid(10)).unwrap();
        let fine = check_auxiliary_functions(yf, &grid(40)).unwrap();
        let finite = [coarse.beta_over_big_b, coarse.gamma_over_conjugate, coarse.tb2_over_f]
            .iter()
            .all(|r| r.0.is_finite() && r.1.is_finite());
        o.passed &= coarse.violations.is_empty() && fine.violations.is_empty() && finite;
        let pairs = [
            (coarse.beta_over_big_b.1, fine.beta_over_big_b.1),
            (coarse.gamma_over_conjugate.1, fine.gamma_over_conjugate.1),
            (coarse.tb2_over_f.1, fine.tb2_over_f.1),
        ];
        for (a, b) in pairs {
            worst = worst.max((a - b).abs() / b);
        }
    }
    o.passed &= worst <= 0.01;
    o.detail.push_str(&format!(", auxiliary constants finite, refinement change {worst:.1e}"));
    o
}

fn rearrangement_suite() -> Outcome {
    let mut o = summarize(&suite(&["rearrangement."]));
    let exact = 4.0 * PI.sqrt();
    let l21 = |h: f64| {
        let mesh = triangulate(&Domain::disk(1.0).unwrap(), h).unwrap();
        let values = mesh
            .triangles()
            .iter()
            .map(|t| cell_average(t.map(|i| mesh.vertices()[i]), 8, |x| (x[0] * x[0] + x[1] * x[1]).sqrt().powf(-0.5)))
            .collect();
        let f = SampledFunction::new(values, mesh.areas()).unwrap();
        lorentz_norm(&f, 2.0, 1.0, LorentzOptions::star()).unwrap()
    };
    let (coarse, fine) = (l21(1.0 / 64.0), l21(1.0 / 128.0));
    let rel = (fine - exact).abs() / exact;
    // cell data miss O(h^1/2) of the mass of f* near t = 0; extrapolate in sqrt(h)
    let extrapolated = (fine - coarse / 2f64.sqrt()) / (1.0 - 1.0 / 2f64.sqrt());
    o.open_passed = rel <= 0.01;
    o.detail.push_str(&format!(
        ", L(2,1) norm of |x|^-1/2 at h=1/128 = {fine:.5} vs {exact:.5} (rel {rel:.1e}, need 1e-2; \
         sqrt(h) extrapolation {extrapolated:.5}, rel {:.1e})",
        (extrapolated - exact).abs() / exact
    ));
    o
}

fn geometry_suite() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let smooth = [
        Domain::disk(1.0).unwrap(),
        Domain::ellipse(2.0, 0.5).unwrap(),
        Domain::superellipse(1.0, 1.5, 4.0).unwrap(),
    ];
    let gb = smooth
        .iter()
        .map(|d| (d.total_curvature().unwrap() - TAU).abs())
        .fold(0.0, f64::max);
    ok &= gb < 1e-6;
    parts.push(format!("Gauss-Bonnet error {gb:.1e}"));

    let norms = [
        Norm2::euclidean(),
        Norm2::gauge([[4.0, 0.0], [0.0, 1.0]]).unwrap(),
        Norm2::power_sum(2.0, 4.0, 1.0, 1.0).unwrap(),
    ];
    let convex: Vec<Domain> = smooth.iter().cloned().chain([Domain::stadium(0.5, 1.0).unwrap()]).collect();
    let (mut min_trace, mut lo, mut hi) = (f64::INFINITY, f64::INFINITY, 0.0f64);
    for d in &convex {
        for h in &norms {
            let s = sff_sandwich(d, h, 400).unwrap();
            min_trace = min_trace.min(s.min_trace);
            lo = lo.min(s.min_ratio);
            hi = hi.max(s.max_ratio);
        }
    }
    ok &= min_trace >= 0.0 && lo > 0.0 && hi.is_finite();
    parts.push(format!("min tr B^H {min_trace:.2e}, tr B^H / kappa in [{lo:.3}, {hi:.3}]"));

    let mut g_ok = true;
    for d in [Domain::ellipse(2.0, 0.5).unwrap(), Domain::stadium(0.5, 1.0).unwrap(), Domain::disk(1.0).unwrap()] {
        let prof = CurvatureProfile::new(&d, 2000);
        let area = d.area();
        let g: Vec<f64> = (1..200).map(|k| prof.g(area * k as f64 / 200.0, 1.0).unwrap()).collect();
        g_ok &= g.windows(2).all(|w| w[1] > w[0]);
        g_ok &= prof.g(area * 1e-12, 1.0).unwrap() < 1e-4;
    }
    ok &= g_ok;
    parts.push(format!("G increasing with G(0+) = 0: {g_ok}"));

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut poly = || {
        Poly2::new(
            (0..3)
                .map(|i| (0..3 - i).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect(),
        )
    };
    let square = Domain::polygon(vec![[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]).unwrap();
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let v = PolyField2::new(poly(), poly());
        let w = PolyField2::new(poly(), poly());
        for d in [&square, &smooth[0]] {
            worst = worst.max(check_divergence_identity(&v, &w, d, 8).unwrap().max());
        }
    }
    ok &= worst < 1e-10;
    parts.push(format!("divergence identity residual {worst:.1e}"));
    outcome(ok, parts.join(", "))
}

fn energy_estimate() -> Outcome {
    let domains = [
        ("disk", "kind = \"disk\"\nr = 1.0"),
        ("ellipse", "kind = \"ellipse\"\na = 1.5\nb = 0.75"),
        ("square", "kind = \"polygon\"\nvertices = [[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]]"),
    ];
    let youngs = [
        ("p=3", "kind = \"power\"\np = 3.0"),
        ("b=t+t^3", "kind = \"power_sum\"\np = 2.0\nq = 4.0"),
    ];
    let loads = [
        ("f=1", "kind = \"constant\"\nvalue = 1.0"),
        ("f=|x|^-1/2", "kind = \"radial_power\"\nexponent = 0.5"),
    ];
    const BOUND: f64 = 1.0;
    let mut ok = true;
    let mut max_ratio: f64 = 0.0;
    let mut max_change: f64 = 0.0;
    for (dn, d) in domains {
        for (yn, y) in youngs {
            for (ln, l) in loads {
                let r = rows(&format!(
                    "[domain]\n{d}\n[young]\n{y}\n[source]\n{l}\n[mesh]\nsizes = [0.1, 0.05]\n"
                ));
                let (bounded, _) = check(
                    AssertSpec::Bounded {
                        column: "energy_ratio".into(),
                        max: BOUND,
                    },
                    &r,
                );
                let (stable, _) = check(
                    AssertSpec::Stable {
                        column: "energy_ratio".into(),
                        rel_tol: 0.05,
                    },
                    &r,
                );
                let v: Vec<f64> = r.iter().filter_map(|r| r.column("energy_ratio")).collect();
                if v.len() == 2 {
                    max_ratio = max_ratio.max(v[0].max(v[1]));
                    max_change = max_change.max((v[1] - v[0]).abs() / v[1]);
                }
                if !(bounded && stable) {
                    ok = false;
                    eprintln!("  energy estimate: {dn} {yn} {ln}: {v:?}");
                }
            }
        }
    }
    outcome(
        ok,
        format!("12 instances: max ratio {max_ratio:.4} <= {BOUND}, max refinement change {max_change:.2e}"),
    )
}

fn natural_growth() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut worst: f64 = 0.0;
    for kappa in [-0.5, 0.5] {
        for p in [1.5, 2.0, 3.0] {
            let k = KazdanKramer::new(kappa, p).unwrap();
            for _ in 0..10_000 {
                let u: f64 = rng.gen_range(-3.0..3.0);
                worst = worst.max((k.psi_inv(k.psi(u)).unwrap() - u).abs() / (1.0 + u.abs()));
            }
        }
    }
    ok &= worst <= 1e-12;
    parts.push(format!("round trip {worst:.1e}"));
    for kappa in [-0.5, 0.5] {
        let r = rows(&format!(
            "[domain]\nkind = \"disk\"\nr = 1.0\n[young]\nkind = \"power\"\np = 2.0\n\
             [source]\nkind = \"manufactured\"\nsolution = \"bump\"\n[mesh]\nsizes = [0.1, 0.05, 0.025]\n\
             [solver]\nkappa = {kappa}\n"
        ));
        let (conv, detail) = check(
            AssertSpec::Convergence {
                column: "grad_err".into(),
                min_rate: 0.9,
            },
            &r,
        );
        ok &= conv;
        parts.push(format!("kappa={kappa} manufactured {detail}"));
        let r = rows(&format!(
            "[domain]\nkind = \"disk\"\nr = 1.0\n[young]\nkind = \"power\"\np = 2.0\n\
             [source]\nkind = \"constant\"\n[mesh]\nsizes = [0.1, 0.05, 0.025]\n[solver]\nkappa = {kappa}\n"
        ));
        let (stable, detail) = check(
            AssertSpec::Stable {
                column: "natural_ratio".into(),
                rel_tol: 0.05,
            },
            &r,
        );
        let finite = r.iter().all(|r| r.column("natural_ratio").is_some_and(f64::is_finite));
        ok &= stable && finite;
        let vals: Vec<String> = r.iter().map(|r| format!("{:.4}", r.column("natural_ratio").unwrap_or(f64::NAN))).collect();
        parts.push(format!("ratio [{}] {detail}", vals.join(", ")));
    }
    outcome(ok, parts.join("; "))
}

fn concentration() -> Outcome {
    let r = rows(
        r#"
        [domain]
        kind = "disk"
        r = 1.0
        [young]
        kind = "power"
        p = 2.0
        [source]
        kind = "concentrating"
        k = 1.0
        [mesh]
        sizes = [0.015625]
        [sweep]
        parameter = "source.k"
        values = [1.0, 2.0, 4.0, 8.0]
        "#,
    );
    let pts = |col: &str| -> Vec<(f64, f64)> {
        r.iter().filter_map(|r| Some((r.value?, r.column(col)?))).collect()
    };
    let xn = log_slope(&pts("grad_ratio"));
    let l2 = log_slope(&pts("l2_ratio"));
    let bounded = xn.is_some_and(|s| s.abs() <= 0.1);
    let grows = l2.is_some_and(|s| s > 0.1);
    // radial solution: grad_sup = k/2 and the X norm of f_k is 2 sqrt(pi) k (1 + ln k)
    let vals: Vec<String> = pts("grad_ratio")
        .iter()
        .map(|(k, v)| format!("k={k}: {v:.4} (radial {:.4})", 1.0 / (4.0 * PI.sqrt() * (1.0 + k.ln()))))
        .collect();
    open(
        bounded && grows,
        format!(
            "X-normalized slope {} (need |s| <= 0.1), L2-normalized slope {} (need > 0.1); {}",
            xn.map_or("n/a".into(), |s| format!("{s:.3}")),
            l2.map_or("n/a".into(), |s| format!("{s:.3}")),
            vals.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        (1, "radial exactness", radial_exactness),
        (2, "gradient-bound homogeneity", homogeneity),
        (3, "anisotropic manufactured convergence", anisotropic_convergence),
        (4, "field property suite", field_suite),
        (5, "Young suite", young_suite),
        (6, "rearrangement suite", rearrangement_suite),
        (7, "geometry suite", geometry_suite),
        (8, "energy estimate", energy_estimate),
        (9, "natural-growth pipeline", natural_growth),
        (10, "concentration robustness", concentration),
    ];
    let only: Option<Vec<u8>> = std::env::var("LIPBOUND_ACCEPTANCE_ONLY")
        .ok()
        .map(|s| s.split(',').filter_map(|x| x.trim().parse().ok()).collect());
    let strict = std::env::var("LIPBOUND_STRICT").is_ok_and(|v| v == "1");
    let total = Instant::now();
    let mut hard_failures = 0;
    let mut open_failures = 0;
    for (id, title, f) in criteria {
        if only.as_ref().is_some_and(|o| !o.contains(&id)) {
            continue;
        }
        let start = Instant::now();
        let o = f();
        let secs = start.elapsed().as_secs_f64();
        let tag = match (o.passed, o.open_passed) {
            (true, true) => "PASS",
            (true, false) => "FAIL (known open)",
            (false, _) => "FAIL",
        };
        println!("{tag} [{id}] {title} ({secs:.1}s): {}", o.detail);
        if !o.passed {
            hard_failures += 1;
        } else if !o.open_passed {
            open_failures += 1;
        }
    }
    println!(
        "acceptance: {hard_failures} failed, {open_failures} known open, {:.1}s total",
        total.elapsed().as_secs_f64()
    );
    if hard_failures > 0 || (strict && open_failures > 0) {
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}
