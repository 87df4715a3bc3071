//! One-dimensional numerical kernels: adaptive quadrature, Gauss–Legendre rules,
//! golden-section maximization and bracketed root finding.

use crate::scalar::Real;

/// Outcome of an adaptive quadrature that did not reach the requested tolerance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureFailure {
    pub value: f64,
    pub achieved: f64,
}

// Gauss–Kronrod 7/15 nodes and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_728_8,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

fn gk15<T: Real, F: Fn(T) -> T>(f: &F, a: T, b: T) -> (T, T) {
    let half = T::lit(0.5);
    let c = half * (a + b);
    let h = half * (b - a);
    let fc = f(c);
    let mut kron = fc * T::lit(WGK[7]);
    let mut gauss = fc * T::lit(WG[3]);
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = h * T::lit(x);
        let pair = f(c - dx) + f(c + dx);
        kron += pair * T::lit(w);
        if j % 2 == 1 {
            gauss += pair * T::lit(WG[j / 2]);
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss–Kronrod (7/15) integration of `f` over `[a, b]`.
///
/// Subdivides the interval with the largest error estimate until the total estimate
/// drops below `max(abs_tol, rel_tol·|I|)` or the interval budget is exhausted.
pub fn integrate<T: Real, F: Fn(T) -> T>(
    f: F,
    a: T,
    b: T,
    abs_tol: T,
    rel_tol: T,
) -> Result<T, QuadratureFailure> {
    if a == b {
        return Ok(T::zero());
    }
    const MAX_INTERVALS: usize = 2000;
    let (v, e) = gk15(&f, a, b);
    let mut intervals = vec![(a, b, v, e)];
    let mut total = v;
    let mut err = e;
    // round-off floor relative to the integrand scale
    let floor = T::epsilon() * T::lit(50.0);
    while err > abs_tol.max(rel_tol * total.abs()) && err > floor * total.abs() {
        if intervals.len() >= MAX_INTERVALS {
            return Err(QuadratureFailure {
                value: total.as_f64(),
                achieved: err.as_f64(),
            });
        }
        let (idx, _) = intervals
            .iter()
            .enumerate()
            .fold((0, T::neg_infinity()), |best, (i, iv)| {
                if iv.3 > best.1 {
                    (i, iv.3)
                } else {
                    best
                }
            });
        let (lo, hi, v0, e0) = intervals.swap_remove(idx);
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi {
            // interval can no longer be split in this precision
            intervals.push((lo, hi, v0, T::zero()));
            err -= e0;
            continue;
        }
        let (v1, e1) = gk15(&f, lo, mid);
        let (v2, e2) = gk15(&f, mid, hi);
        total += v1 + v2 - v0;
        err += e1 + e2 - e0;
        intervals.push((lo, mid, v1, e1));
        intervals.push((mid, hi, v2, e2));
        if err < T::zero() {
            err = intervals.iter().fold(T::zero(), |acc, iv| acc + iv.3);
        }
    }
    Ok(total)
}

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = T::lit(-x);
        nodes[n - 1 - i] = T::lit(x);
        weights[i] = T::lit(w);
        weights[n - 1 - i] = T::lit(w);
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// Maximizes a unimodal function on `[lo, hi]` by golden-section search.
///
/// Returns the abscissa and the function value.
pub fn golden_max<T: Real, F: Fn(T) -> T>(f: F, mut lo: T, mut hi: T, rel_tol: T) -> (T, T) {
    let inv_phi = T::lit((5.0f64.sqrt() - 1.0) / 2.0);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    for _ in 0..400 {
        let scale = x1.abs().max(x2.abs()).max(T::min_positive_value());
        if (hi - lo) <= rel_tol * scale {
            break;
        }
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = f(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = f(x1);
        }
    }
    if f1 >= f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Finds `x ≥ 0` with `g(x) = target` for a non-decreasing `g` with `g(0) ≤ target`.
///
/// The upper bracket is grown geometrically; `None` when `g` never reaches `target`.
pub fn monotone_inverse<T: Real, F: Fn(T) -> T>(g: F, target: T, rel_tol: T) -> Option<T> {
    if target <= g(T::zero()) {
        return Some(T::zero());
    }
    let two = T::lit(2.0);
    let mut hi = T::one();
    let mut lo = T::zero();
    let mut grown = 0;
    while g(hi) < target {
        lo = hi;
        hi *= two;
        grown += 1;
        if grown > 2000 || !hi.is_finite() {
            return None;
        }
    }
    for _ in 0..400 {
        let mid = T::lit(0.5) * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= rel_tol * hi {
            break;
        }
        if g(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Some(T::lit(0.5) * (lo + hi))
}

/// Geometric grid of `per_decade` points per decade spanning `[lo, hi]`.
pub fn geometric_grid<T: Real>(lo: T, hi: T, per_decade: usize) -> Vec<T> {
    let decades = (hi / lo).log10();
    let n = ((decades * T::from_count(per_decade)).ceil().as_f64() as usize).max(2);
    let step = (hi / lo).ln() / T::from_count(n - 1);
    (0..n).map(|k| lo * (step * T::from_count(k)).exp()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gk_integrates_polynomials_and_smooth_functions() {
        let v = integrate(|x: f64| x * x * x, 0.0, 2.0, 1e-14, 1e-14).unwrap();
        assert!((v - 4.0).abs() < 1e-13);
        let v = integrate(|x: f64| x.sqrt(), 0.0, 1.0, 1e-13, 1e-13).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
        let v = integrate(|x: f64| (-x * x).exp(), -8.0, 8.0, 1e-14, 1e-14).unwrap();
        assert!((v - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn gauss_legendre_is_exact_to_degree_2n_minus_1() {
        for n in 1..12 {
            let (x, w) = gauss_legendre::<f64>(n);
            for deg in 0..(2 * n) {
                let approx: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(deg as i32)).sum();
                let exact = if deg % 2 == 1 { 0.0 } else { 2.0 / (deg as f64 + 1.0) };
                assert!((approx - exact).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, v) = golden_max(|x: f64| -(x - 1.3).powi(2) + 2.0, 0.0, 5.0, 1e-12);
        assert!((x - 1.3).abs() < 1e-7);
        assert!((v - 2.0).abs() < 1e-15);
    }

    #[test]
    fn monotone_inverse_of_cube() {
        let x = monotone_inverse(|t: f64| t * t * t, 27.0, 1e-14).unwrap();
        assert!((x - 3.0).abs() < 1e-12);
        assert!(monotone_inverse(|t: f64| t.min(1.0), 2.0, 1e-12).is_none());
    }
}
