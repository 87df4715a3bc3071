//! Seeded randomized checks of the core invariants.
//!
//! Every property draws its inputs from its own generator, seeded from the suite seed
//! and the property index, so results do not depend on which properties run.

use std::f64::consts::TAU;

use lipbound_core::geometry::sff_sandwich;
use lipbound_core::norm_field::{field_convergence_report, MonotoneField, NormError};
use lipbound_core::rearrangement::{hardy_littlewood_check, pseudo_rearrangement, pseudo_rearrangement_gap};
use lipbound_core::scalar::symmetric_eigenvalues;
use lipbound_core::young::Growth;
use lipbound_core::{Domain, Norm2, RegularizedYoungF64, SampledFunction, YoungFunctionF64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Result of one property over its draws.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub name: &'static str,
    pub draws: usize,
    pub failures: usize,
    /// Inputs of the first failing draw.
    pub witness: Option<String>,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Draw counts are multiplied by this factor (at least one draw each).
    pub draw_scale: f64,
    /// Replace the Young functions of the field checks by a `b` with a decreasing
    /// segment, as a negative control.
    pub broken_young: bool,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self {
            seed: 0,
            draw_scale: 1.0,
            broken_young: false,
        }
    }
}

const TOL: f64 = 1e-8;

type Check = fn(&mut ChaCha8Rng, &Pools) -> Result<(), String>;

struct Property {
    name: &'static str,
    draws: usize,
    check: Check,
}

/// Objects that are expensive to construct, shared across draws.
struct Pools {
    norms: Vec<Norm2>,
    regularized: Vec<RegularizedYoungF64>,
    broken: Option<YoungFunctionF64>,
}

impl Pools {
    fn new(broken: bool) -> Self {
        let norms = vec![
            Norm2::euclidean(),
            Norm2::gauge([[4.0, 0.0], [0.0, 1.0]]).expect("spd"),
            Norm2::gauge([[2.0, 0.7], [0.7, 1.0]]).expect("spd"),
            Norm2::power_sum(2.0, 4.0, 1.0, 1.0).expect("admissible"),
            Norm2::power_sum(3.0, 3.0, 1.0, 0.5).expect("admissible"),
        ];
        let mut regularized = Vec::new();
        for (yf, eps) in [
            (YoungFunctionF64::power(1.5), 0.1),
            (YoungFunctionF64::power(2.0), 0.01),
            (YoungFunctionF64::power(3.0), 0.1),
            (YoungFunctionF64::power(3.0), 0.001),
            (YoungFunctionF64::power(4.0), 0.01),
            (YoungFunctionF64::power_sum(1.5, 3.0, 1.0, 1.0), 0.05),
        ] {
            let yf = yf.expect("admissible");
            regularized.push(RegularizedYoungF64::new(yf, eps).expect("epsilon in range"));
        }
        Self {
            norms,
            regularized,
            broken: broken.then(broken_young),
        }
    }

    fn norm(&self, rng: &mut ChaCha8Rng) -> (usize, &Norm2) {
        let i = rng.gen_range(0..self.norms.len());
        (i, &self.norms[i])
    }
}

/// `b(t) = t` up to `1/2`, decreasing to `0.05` at `t = 5`, then increasing again.
pub fn broken_young() -> YoungFunctionF64 {
    YoungFunctionF64::from_derivative_unchecked(|t: f64| {
        if t <= 0.5 {
            t
        } else if t <= 5.0 {
            0.5 - 0.1 * (t - 0.5)
        } else {
            0.05 + (t - 5.0)
        }
    })
    .expect("positive on the index grid")
}

fn random_young(rng: &mut ChaCha8Rng) -> YoungFunctionF64 {
    match rng.gen_range(0..3) {
        0 => YoungFunctionF64::power(rng.gen_range(1.2..5.0)).expect("p > 1"),
        1 => YoungFunctionF64::power_sum(
            rng.gen_range(1.3..2.5),
            rng.gen_range(2.5..5.0),
            rng.gen_range(0.2..2.0),
            rng.gen_range(0.2..2.0),
        )
        .expect("admissible"),
        // steep samples give tail exponents whose powers overflow f64 within the
        // sampled range of |ξ|; redraw until the upper index is moderate
        _ => loop {
            let mut grid = vec![0.0];
            let mut values = vec![0.0];
            let mut t = 0.0;
            let mut v = 0.0;
            for _ in 0..rng.gen_range(2..8) {
                t += rng.gen_range(0.1..2.0);
                v += rng.gen_range(0.05..2.0);
                grid.push(t);
                values.push(v);
            }
            let yf = YoungFunctionF64::tabulated(grid, values).expect("monotone samples");
            if yf.indices().upper <= 10.0 {
                break yf;
            }
        },
    }
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

fn random_vector(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> [f64; 2] {
    let r = log_uniform(rng, lo, hi);
    let th = rng.gen_range(0.0..TAU);
    [r * th.cos(), r * th.sin()]
}

fn random_sampled(rng: &mut ChaCha8Rng, n: usize) -> SampledFunction<f64> {
    let values = (0..n).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let weights = (0..n).map(|_| rng.gen_range(0.01..1.0)).collect();
    SampledFunction::new(values, weights).expect("positive weights")
}

fn fail(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn young_convexity(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let yf = random_young(rng);
    let (s, t, th) = (rng.gen_range(0.0..10.0), rng.gen_range(0.0..10.0), rng.gen_range(0.0..1.0));
    let mid = yf.value(th * s + (1.0 - th) * t);
    let chord = th * yf.value(s) + (1.0 - th) * yf.value(t);
    fail(mid <= chord + TOL * (1.0 + chord), || {
        format!("{:?}: s={s}, t={t}, theta={th}: {mid} > {chord}", yf.kind())
    })
}

fn young_half_point(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let yf = random_young(rng);
    let t = log_uniform(rng, 1e-4, 1e3);
    let big = yf.value(t);
    let lo = 0.5 * t * yf.derivative(0.5 * t);
    let hi = t * yf.derivative(t);
    fail(lo <= big * (1.0 + TOL) && big <= hi * (1.0 + TOL), || {
        format!("{:?}: t={t}: {lo} <= {big} <= {hi} fails", yf.kind())
    })
}

fn young_power_growth(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let yf = random_young(rng);
    let t = log_uniform(rng, 1e-4, 1e3);
    let idx = yf.indices();
    let b1 = yf.derivative(1.0);
    let (pi, ps) = (t.powf(idx.lower), t.powf(idx.upper));
    let b = yf.derivative(t);
    fail(b1 * pi.min(ps) <= b * (1.0 + TOL) && b <= b1 * pi.max(ps) * (1.0 + TOL), || {
        format!("{:?}: t={t}: b={b}, bounds {} {}", yf.kind(), b1 * pi.min(ps), b1 * pi.max(ps))
    })
}

fn young_inequality(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let yf = random_young(rng);
    let s = log_uniform(rng, 1e-3, 1e2);
    let t = log_uniform(rng, 1e-3, 1e2);
    let conj = yf.conjugate(t).map_err(|e| e.to_string())?;
    let rhs = yf.value(s) + conj;
    fail(s * t <= rhs + TOL * (1.0 + rhs), || {
        format!("{:?}: s={s}, t={t}: {} > {rhs}", yf.kind(), s * t)
    })
}

fn young_conjugate_at_derivative(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    // equality case of Young's inequality, conj(b(t)) = t b(t) − B(t), and the bound
    // conj(b(t)) ≤ s_b B(t) that follows from t b(t) ≤ (1 + s_b) B(t)
    let yf = random_young(rng);
    let t = log_uniform(rng, 1e-3, 1e2);
    let b = yf.derivative(t);
    let big = yf.value(t);
    let conj = yf.conjugate(b).map_err(|e| e.to_string())?;
    let exact = t * b - big;
    let bound = yf.indices().upper * big;
    fail((conj - exact).abs() <= 1e-6 * (1.0 + exact) && conj <= bound * (1.0 + TOL) + 1e-300, || {
        format!("{:?}: t={t}: conj(b(t))={conj}, t b - B = {exact}, s_b B = {bound}", yf.kind())
    })
}

fn young_power_conjugate(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let p: f64 = rng.gen_range(1.2..6.0);
    let yf = YoungFunctionF64::power(p).expect("p > 1");
    let t = log_uniform(rng, 1e-3, 1e3);
    let q = p / (p - 1.0);
    let exact = t.powf(q) / q;
    let got = yf.conjugate(t).map_err(|e| e.to_string())?;
    fail((got - exact).abs() <= 1e-10 * exact.max(1e-300), || {
        format!("p={p}, t={t}: {got} vs {exact}")
    })
}

fn regularized_ratio(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let yf = random_young(rng);
    let eps = log_uniform(rng, 1e-6, 0.9);
    let reg = RegularizedYoungF64::new(yf, eps).map_err(|e| e.to_string())?;
    let t = if rng.gen_bool(0.1) { 0.0 } else { log_uniform(rng, 1e-8, 1e6) };
    let a = reg.ratio(t);
    fail(a >= eps * (1.0 - TOL) && a <= (1.0 + TOL) / eps, || {
        format!("{:?}, eps={eps}, t={t}: a_eps={a}", reg.base().kind())
    })
}

fn norm_homogeneity(rng: &mut ChaCha8Rng, pools: &Pools) -> Result<(), String> {
    let (i, h) = pools.norm(rng);
    let xi = random_vector(rng, 1e-3, 1e3);
    let t = log_uniform(rng, 1e-3, 1e3);
    let v = h.eval(&xi);
    let scaled = h.eval(&[t * xi[0], t * xi[1]]);
    let g = h.grad(&xi);
    let euler = g[0] * xi[0] + g[1] * xi[1];
    fail((scaled - t * v).abs() <= TOL * t * v && (euler - v).abs() <= TOL * v, || {
        format!("norm #{i}, xi={xi:?}, t={t}: H(t xi)={scaled}, t H={}, grad.xi={euler}", t * v)
    })
}

fn norm_ellipticity(rng: &mut ChaCha8Rng, pools: &Pools) -> Result<(), String> {
    let (i, h) = pools.norm(rng);
    let xi = random_vector(rng, 1e-3, 1e3);
    let h2 = h.eval(&xi).powi(2);
    let n2 = xi[0] * xi[0] + xi[1] * xi[1];
    let ev = symmetric_eigenvalues(&h.half_hessian_h2(&xi));
    let ok = h2 >= h.lambda() * n2 * (1.0 - TOL)
        && h2 <= h.big_lambda() * n2 * (1.0 + TOL)
        && ev[0] >= h.lambda() * (1.0 - TOL)
        && ev[1] <= h.big_lambda() * (1.0 + TOL);
    fail(ok, || {
        format!(
            "norm #{i}, xi={xi:?}: H^2={h2}, |xi|^2={n2}, eig={ev:?}, lambda={}, Lambda={}",
            h.lambda(),
            h.big_lambda()
        )
    })
}

fn field_monotonicity(rng: &mut ChaCha8Rng, pools: &Pools) -> Result<(), String> {
    let (i, h) = pools.norm(rng);
    let yf = match &pools.broken {
        Some(b) => b.clone(),
        None => random_young(rng),
    };
    let xi = random_vector(rng, 1e-2, 1e2);
    let eta = random_vector(rng, 1e-2, 1e2);
    let field = MonotoneField::new(h.clone(), yf);
    let (a, b) = (field.eval(&xi), field.eval(&eta));
    let d = (a[0] - b[0]) * (xi[0] - eta[0]) + (a[1] - b[1]) * (xi[1] - eta[1]);
    let scale = (a[0] - b[0]).hypot(a[1] - b[1]) * (xi[0] - eta[0]).hypot(xi[1] - eta[1]);
    fail(d >= -TOL * scale, || {
        format!(
            "norm #{i}, {:?}, xi={xi:?}, eta={eta:?}: (A(xi)-A(eta)).(xi-eta) = {d}",
            field.growth().kind()
        )
    })
}

fn field_jacobian_sandwich(rng: &mut ChaCha8Rng, pools: &Pools) -> Result<(), String> {
    let (i, h) = pools.norm(rng);
    let yf = match &pools.broken {
        Some(b) => b.clone(),
        None => random_young(rng),
    };
    let xi = random_vector(rng, 1e-2, 1e2);
    let field = MonotoneField::new(h.clone(), yf);
    let ev = symmetric_eigenvalues(&field.jacobian(&xi).map_err(|e| e.to_string())?);
    let (lo, hi) = field.jacobian_bounds(&xi).map_err(|e| e.to_string())?;
    fail(ev[0] >= lo * (1.0 - TOL) && ev[1] <= hi * (1.0 + TOL), || {
        format!("norm #{i}, {:?}, xi={xi:?}: eig {ev:?} outside [{lo}, {hi}]", field.growth().kind())
    })
}

fn regularized_field_bounds(rng: &mut ChaCha8Rng, pools: &Pools) -> Result<(), String> {
    let (i, h) = pools.norm(rng);
    let k = rng.gen_range(0..pools.regularized.len());
    let reg = pools.regularized[k].clone();
    let (eps, idx) = (reg.epsilon(), reg.base().indices());
    let xi = random_vector(rng, 1e-6, 1e4);
    let field = MonotoneField::new(h.clone(), reg);
    let ev = symmetric_eigenvalues(&field.jacobian(&xi).map_err(|e| e.to_string())?);
    let lo = eps * h.lambda() * idx.lower.min(1.0);
    let hi = h.big_lambda() * idx.upper.max(1.0) / eps;
    fail(ev[0] >= lo * (1.0 - TOL) && ev[1] <= hi * (1.0 + TOL), || {
        format!("norm #{i}, regularized #{k}, xi={xi:?}: eig {ev:?} outside [{lo}, {hi}]")
    })
}

// uniform convergence on balls: the sup deviation over |ξ| ≤ M must shrink with ε
fn regularized_field_convergence(rng: &mut ChaCha8Rng, pools: &Pools) -> Result<(), String> {
    let (i, h) = pools.norm(rng);
    let p: f64 = rng.gen_range(1.5..4.5);
    let m = if rng.gen_bool(0.5) { 1.0 } else { 10.0 };
    let base = YoungFunctionF64::power(p).map_err(|e| e.to_string())?;
    let field = MonotoneField::new(h.clone(), base.clone());
    let rows = field_convergence_report(
        &field,
        |e| {
            let reg = RegularizedYoungF64::new(base.clone(), e).map_err(|e| NormError::InvalidParameters(e.to_string()))?;
            Ok(MonotoneField::new(h.clone(), reg))
        },
        &[1e-1, 1e-2, 1e-3],
        &[m],
    )
    .map_err(|e| e.to_string())?;
    let devs: Vec<f64> = rows.iter().map(|r| r.deviation).collect();
    fail(devs.windows(2).all(|w| w[1] < w[0]), || {
        format!("norm #{i}, p={p}, M={m}: sup deviations {devs:?} not decreasing")
    })
}

fn equimeasurability(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let n = rng.gen_range(1..60);
    let f = random_sampled(rng, n);
    let fs = f.decreasing_rearrangement();
    for &level in f.values().iter().chain([0.0, 6.0].iter()) {
        let t = level.abs();
        let mu: f64 = fs
            .values()
            .iter()
            .zip(fs.breaks().windows(2))
            .filter(|(v, _)| **v > t)
            .map(|(_, w)| w[1] - w[0])
            .sum();
        let direct = f.distribution_function(t);
        if (mu - direct).abs() > 1e-12 * (1.0 + direct) {
            return Err(format!("n={n}, level {t}: {mu} vs {direct}; values {:?}", f.values()));
        }
    }
    Ok(())
}

fn hardy_littlewood(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let n = rng.gen_range(1..60);
    let f = random_sampled(rng, n);
    let g = f
        .with_values((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .expect("same length");
    let (lhs, rhs) = hardy_littlewood_check(&f, &g).map_err(|e| e.to_string())?;
    fail(lhs <= rhs * (1.0 + 1e-12), || {
        format!("f={:?}, g={:?}: {lhs} > {rhs}", f.values(), g.values())
    })
}

fn pseudo_rearrangement_prop(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let n = rng.gen_range(1..60);
    let f = random_sampled(rng, n);
    let v = f
        .with_values((0..n).map(|_| rng.gen_range(-5.0..5.0)).collect())
        .expect("same length");
    let phi = pseudo_rearrangement(&f, &v).map_err(|e| e.to_string())?;
    let gap = pseudo_rearrangement_gap(&phi, &f);
    fail(gap <= 1e-12, || format!("f={:?}, v={:?}: gap {gap}", f.values(), v.values()))
}

fn gauss_bonnet(rng: &mut ChaCha8Rng, _: &Pools) -> Result<(), String> {
    let a = rng.gen_range(0.3..3.0);
    let b = rng.gen_range(0.3..3.0);
    let dom = match rng.gen_range(0..3) {
        0 => Domain::disk(a),
        1 => Domain::ellipse(a, b),
        _ => Domain::superellipse(a, b, rng.gen_range(2.0..6.0)),
    }
    .map_err(|e| e.to_string())?;
    let total = dom.total_curvature().map_err(|e| e.to_string())?;
    fail((total - TAU).abs() < 1e-6, || format!("{:?}: total curvature {total}", dom.shape()))
}

fn anisotropic_curvature_sign(rng: &mut ChaCha8Rng, pools: &Pools) -> Result<(), String> {
    let (i, h) = pools.norm(rng);
    let dom = Domain::superellipse(rng.gen_range(0.5..2.0), rng.gen_range(0.5..2.0), rng.gen_range(2.0..5.0))
        .map_err(|e| e.to_string())?;
    let s = sff_sandwich(&dom, h, 200).map_err(|e| e.to_string())?;
    let ok = s.min_trace >= -TOL && s.min_ratio > 0.0 && s.max_ratio.is_finite();
    fail(ok, || format!("norm #{i}, {:?}: {s:?}", dom.shape()))
}

fn registry() -> Vec<Property> {
    let p = |name, draws, check| Property { name, draws, check };
    vec![
        p("young.convexity", 10_000, young_convexity as Check),
        p("young.half_point_sandwich", 10_000, young_half_point),
        p("young.power_growth", 10_000, young_power_growth),
        p("young.young_inequality", 10_000, young_inequality),
        p("young.conjugate_at_derivative", 10_000, young_conjugate_at_derivative),
        p("young.power_conjugate", 10_000, young_power_conjugate),
        p("young.regularized_ratio_bounds", 10_000, regularized_ratio),
        p("norm.homogeneity_euler", 10_000, norm_homogeneity),
        p("norm.ellipticity", 10_000, norm_ellipticity),
        p("field.monotonicity", 10_000, field_monotonicity),
        p("field.jacobian_sandwich", 10_000, field_jacobian_sandwich),
        p("field.regularized_bounds", 10_000, regularized_field_bounds),
        p("field.regularized_convergence", 40, regularized_field_convergence),
        p("rearrangement.equimeasurability", 1_000, equimeasurability),
        p("rearrangement.hardy_littlewood", 1_000, hardy_littlewood),
        p("rearrangement.pseudo_rearrangement", 1_000, pseudo_rearrangement_prop),
        p("geometry.gauss_bonnet", 50, gauss_bonnet),
        p("geometry.anisotropic_curvature_sign", 50, anisotropic_curvature_sign),
    ]
}

/// Names of all registered properties, in run order.
pub fn property_names() -> Vec<&'static str> {
    registry().iter().map(|p| p.name).collect()
}

/// Runs every property (or those whose name starts with `filter`).
pub fn property_suite(opts: &SuiteOptions, filter: Option<&str>) -> Vec<PropertyOutcome> {
    let pools = Pools::new(opts.broken_young);
    registry()
        .into_iter()
        .enumerate()
        .filter(|(_, p)| filter.is_none_or(|f| p.name.starts_with(f)))
        .map(|(k, p)| {
            let seed = opts.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(k as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let draws = ((p.draws as f64 * opts.draw_scale).round() as usize).max(1);
            let mut failures = 0;
            let mut witness = None;
            for _ in 0..draws {
                if let Err(w) = (p.check)(&mut rng, &pools) {
                    failures += 1;
                    witness.get_or_insert(w);
                }
            }
            PropertyOutcome {
                name: p.name,
                draws,
                failures,
                witness,
            }
        })
        .collect()
}
