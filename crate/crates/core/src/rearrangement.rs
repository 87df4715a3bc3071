//! Distribution functions, decreasing rearrangements, maximal functions and the
//! Lorentz, Orlicz and `X_n` norms of functions sampled on finite measure spaces.

use std::cmp::Ordering;

use thiserror::Error;

use crate::numerics;
use crate::scalar::Real;
use crate::young::{Growth, YoungFunction};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RearrangementError {
    #[error("weights must be positive and finite (cell {0})")]
    BadWeight(usize),
    #[error("values and weights differ in length ({0} vs {1})")]
    Length(usize, usize),
    #[error("functions live on different measure spaces")]
    Shape,
    #[error("argument {0} is outside the domain")]
    Domain(f64),
    #[error("invalid Lorentz exponents q={q}, sigma={sigma}")]
    Exponents { q: f64, sigma: f64 },
    #[error("the (q=1, star_star) integral over (0, ∞) diverges; enable truncation at the total measure")]
    Divergent,
    #[error("quadrature did not converge (achieved error {0})")]
    Quadrature(f64),
}

/// A function given by one value per cell of a finite measure space.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction<T> {
    values: Vec<T>,
    weights: Vec<T>,
    total_measure: T,
}

impl<T: Real> SampledFunction<T> {
    pub fn new(values: Vec<T>, weights: Vec<T>) -> Result<Self, RearrangementError> {
        if values.len() != weights.len() {
            return Err(RearrangementError::Length(values.len(), weights.len()));
        }
        if let Some(k) = weights.iter().position(|w| !(*w > T::zero() && w.is_finite())) {
            return Err(RearrangementError::BadWeight(k));
        }
        let total_measure = weights.iter().fold(T::zero(), |a, w| a + *w);
        Ok(Self {
            values,
            weights,
            total_measure,
        })
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn total_measure(&self) -> T {
        self.total_measure
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Same measure space with new values.
    pub fn with_values(&self, values: Vec<T>) -> Result<Self, RearrangementError> {
        if values.len() != self.values.len() {
            return Err(RearrangementError::Length(values.len(), self.values.len()));
        }
        Ok(Self {
            values,
            weights: self.weights.clone(),
            total_measure: self.total_measure,
        })
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self {
            values: self.values.iter().map(|v| f(*v)).collect(),
            weights: self.weights.clone(),
            total_measure: self.total_measure,
        }
    }

    pub fn same_space(&self, other: &Self) -> bool {
        self.weights == other.weights
    }

    /// `μ(t) = |{|f| > t}|`.
    pub fn distribution_function(&self, t: T) -> T {
        self.values
            .iter()
            .zip(&self.weights)
            .filter(|(v, _)| v.abs() > t)
            .fold(T::zero(), |a, (_, w)| a + *w)
    }

    /// `f*`, the non-increasing rearrangement of `|f|` on `(0, total_measure)`.
    pub fn decreasing_rearrangement(&self) -> StepFunction<T> {
        let mut order: Vec<usize> = (0..self.values.len()).collect();
        // stable: equal values keep cell order
        order.sort_by(|&a, &b| {
            self.values[b]
                .abs()
                .partial_cmp(&self.values[a].abs())
                .unwrap_or(Ordering::Equal)
        });
        StepFunction::from_cells(
            order
                .iter()
                .map(|&k| (self.values[k].abs(), self.weights[k])),
        )
    }

    /// `Σ w |f|^p`, raised to `1/p`.
    pub fn lp_norm(&self, p: T) -> T {
        let s = self
            .values
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |a, (v, w)| a + *w * v.abs().powf(p));
        s.powf(T::one() / p)
    }

    pub fn sup_norm(&self) -> T {
        self.values.iter().fold(T::zero(), |a, v| a.max(v.abs()))
    }

    /// `Σ w f`.
    pub fn integral(&self) -> T {
        self.values
            .iter()
            .zip(&self.weights)
            .fold(T::zero(), |a, (v, w)| a + *v * *w)
    }
}

/// Right-continuous step function on `(0, breaks.last())`.
///
/// Value `values[k]` holds on `[breaks[k], breaks[k+1])` with `breaks[0] = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction<T> {
    values: Vec<T>,
    breaks: Vec<T>,
    // prefix integrals at the breakpoints
    prefix: Vec<T>,
}

impl<T: Real> StepFunction<T> {
    /// Builds from `(value, length)` pairs laid out left to right.
    pub fn from_cells(cells: impl IntoIterator<Item = (T, T)>) -> Self {
        let mut values = Vec::new();
        let mut breaks = vec![T::zero()];
        let mut prefix = vec![T::zero()];
        for (v, w) in cells {
            values.push(v);
            let s = *breaks.last().unwrap() + w;
            breaks.push(s);
            prefix.push(*prefix.last().unwrap() + v * w);
        }
        Self {
            values,
            breaks,
            prefix,
        }
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn breaks(&self) -> &[T] {
        &self.breaks
    }

    pub fn measure(&self) -> T {
        *self.breaks.last().unwrap()
    }

    fn cell(&self, s: T) -> usize {
        // last k with breaks[k] ≤ s
        let k = self.breaks.partition_point(|b| *b <= s);
        k.saturating_sub(1)
    }

    /// Value at `s`; zero beyond the measure.
    pub fn eval(&self, s: T) -> T {
        if s < T::zero() || s >= self.measure() || self.values.is_empty() {
            return T::zero();
        }
        self.values[self.cell(s)]
    }

    /// `∫₀ˢ` of the step function.
    pub fn prefix_integral(&self, s: T) -> T {
        if s <= T::zero() || self.values.is_empty() {
            return T::zero();
        }
        if s >= self.measure() {
            return *self.prefix.last().unwrap();
        }
        let k = self.cell(s);
        self.prefix[k] + self.values[k] * (s - self.breaks[k])
    }

    /// Prefix integrals at every breakpoint.
    pub fn prefix_integrals(&self) -> &[T] {
        &self.prefix
    }

    /// `f**(s) = (1/s) ∫₀ˢ f*`.
    pub fn maximal(&self, s: T) -> Result<T, RearrangementError> {
        if !(s > T::zero()) {
            return Err(RearrangementError::Domain(s.as_f64()));
        }
        Ok(self.prefix_integral(s) / s)
    }

    /// `∫₀ˣ f**(t) dt`, exact for step data (the integrand is `(A + v t)/t` per cell).
    pub fn integral_of_maximal(&self, x: T) -> T {
        if x <= T::zero() || self.values.is_empty() {
            return T::zero();
        }
        let mut total = T::zero();
        for k in 0..self.values.len() {
            let (s0, s1) = (self.breaks[k], self.breaks[k + 1].min(x));
            if s1 <= s0 {
                break;
            }
            let v = self.values[k];
            let a = self.prefix[k] - v * s0;
            total += v * (s1 - s0);
            if s0 > T::zero() && a != T::zero() {
                total += a * (s1 / s0).ln();
            }
        }
        let m = self.measure();
        if x > m {
            total += *self.prefix.last().unwrap() * (x / m).ln();
        }
        total
    }

    /// Pointwise square of the values (same breakpoints).
    pub fn squared(&self) -> Self {
        Self::from_cells(
            self.values
                .iter()
                .zip(self.breaks.windows(2))
                .map(|(v, b)| (*v * *v, b[1] - b[0])),
        )
    }
}

/// Which function the Lorentz functional is built on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LorentzVariant {
    /// `f*`
    Star,
    /// `f**`
    StarStar,
}

/// Options of [`lorentz_norm`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LorentzOptions {
    pub variant: LorentzVariant,
    /// Integrate over `(0, total_measure)` rather than `(0, ∞)`.
    pub truncate: bool,
}

impl LorentzOptions {
    pub fn star() -> Self {
        Self {
            variant: LorentzVariant::Star,
            truncate: false,
        }
    }

    pub fn star_star(truncate: bool) -> Self {
        Self {
            variant: LorentzVariant::StarStar,
            truncate,
        }
    }
}

// ∫_{s0}^{s1} s^e ds
fn power_integral<T: Real>(e: T, s0: T, s1: T) -> T {
    if (e + T::one()).abs() < T::lit(1e-14) {
        (s1 / s0).ln()
    } else {
        let e1 = e + T::one();
        (s1.powf(e1) - s0.powf(e1)) / e1
    }
}

/// `‖s^(1/q − 1/σ) f^♦(s)‖_{L^σ}` with `f^♦ = f*` or `f**`.
///
/// Step data make the `star` integral exact for every `σ`; for `star_star` the cases
/// `σ ∈ {1, 2}` and `(q, σ) = (1, ½)` are integrated in closed form, others by adaptive
/// quadrature per cell.
pub fn lorentz_norm<T: Real>(
    f: &SampledFunction<T>,
    q: T,
    sigma: T,
    opts: LorentzOptions,
) -> Result<T, RearrangementError> {
    if !(q >= T::one()) || !(sigma > T::zero()) || !q.is_finite() || !sigma.is_finite() {
        return Err(RearrangementError::Exponents {
            q: q.as_f64(),
            sigma: sigma.as_f64(),
        });
    }
    let fs = f.decreasing_rearrangement();
    lorentz_of_rearrangement(&fs, q, sigma, opts)
}

/// [`lorentz_norm`] evaluated from an already computed rearrangement.
pub fn lorentz_of_rearrangement<T: Real>(
    fs: &StepFunction<T>,
    q: T,
    sigma: T,
    opts: LorentzOptions,
) -> Result<T, RearrangementError> {
    let one = T::one();
    let ratio = sigma / q;
    let q_is_one = (q - one).abs() < T::lit(1e-14);
    if opts.variant == LorentzVariant::StarStar && q_is_one && !opts.truncate {
        return Err(RearrangementError::Divergent);
    }
    if fs.values.iter().all(|v| *v == T::zero()) {
        return Ok(T::zero());
    }
    let mut total = T::zero();
    match opts.variant {
        LorentzVariant::Star => {
            for k in 0..fs.values.len() {
                let (s0, s1) = (fs.breaks[k], fs.breaks[k + 1]);
                total += fs.values[k].powf(sigma) / ratio * (s1.powf(ratio) - s0.powf(ratio));
            }
        }
        LorentzVariant::StarStar => {
            for k in 0..fs.values.len() {
                let (s0, s1) = (fs.breaks[k], fs.breaks[k + 1]);
                let v = fs.values[k];
                let a = fs.prefix[k] - v * s0;
                total += star_star_cell(a, v, s0, s1, q, sigma, q_is_one)?;
            }
            if !opts.truncate {
                // beyond the measure f** = P/s
                let m = fs.measure();
                let p = *fs.prefix.last().unwrap();
                total += p.powf(sigma) * m.powf(ratio - sigma) / (sigma - ratio);
            }
        }
    }
    Ok(total.powf(one / sigma))
}

// ∫_{s0}^{s1} s^{σ/q − 1} ((a + v s)/s)^σ ds
fn star_star_cell<T: Real>(
    a: T,
    v: T,
    s0: T,
    s1: T,
    q: T,
    sigma: T,
    q_is_one: bool,
) -> Result<T, RearrangementError> {
    let one = T::one();
    let two = T::lit(2.0);
    let ratio = sigma / q;
    if s0 == T::zero() || a == T::zero() {
        // f** = v on the first cell
        return Ok(v.powf(sigma) * power_integral(ratio - one, s0, s1));
    }
    if (sigma - one).abs() < T::lit(1e-14) {
        let e = ratio - one;
        return Ok(a * power_integral(e - one, s0, s1) + v * power_integral(e, s0, s1));
    }
    if (sigma - two).abs() < T::lit(1e-14) {
        let e = ratio - T::lit(3.0);
        return Ok(a * a * power_integral(e, s0, s1)
            + two * a * v * power_integral(e + one, s0, s1)
            + v * v * power_integral(e + two, s0, s1));
    }
    if q_is_one && (sigma - T::lit(0.5)).abs() < T::lit(1e-14) {
        // ∫ √(a + v s)/s ds = 2w + √a ln((w − √a)/(w + √a)),  w = √(a + v s)
        let ra = a.sqrt();
        if v == T::zero() {
            return Ok(ra * (s1 / s0).ln());
        }
        let (w0, w1) = ((a + v * s0).sqrt(), (a + v * s1).sqrt());
        // w − √a = v s/(w + √a) avoids cancellation
        let log_term = (s1 / s0).ln() - two * ((w1 + ra) / (w0 + ra)).ln();
        return Ok(two * v * (s1 - s0) / (w1 + w0) + ra * log_term);
    }
    let g = |s: T| s.powf(ratio - one) * ((a + v * s) / s).powf(sigma);
    numerics::integrate(g, s0, s1, T::lit(1e-300), T::lit(1e-12))
        .map_err(|e| RearrangementError::Quadrature(e.achieved))
}

/// The `X_n` norm: `L^{n,1}` for `n ≥ 3`, and `‖f²‖^{1/2}` in `L^{(1,½)}` truncated at
/// the total measure for `n = 2`.
pub fn xn_norm<T: Real>(f: &SampledFunction<T>, n: usize) -> Result<T, RearrangementError> {
    if n < 2 {
        return Err(RearrangementError::Domain(n as f64));
    }
    if n >= 3 {
        return lorentz_norm(f, T::from_count(n), T::one(), LorentzOptions::star());
    }
    let sq = f.map(|v| v * v);
    Ok(lorentz_norm(&sq, T::one(), T::lit(0.5), LorentzOptions::star_star(true))?.sqrt())
}

/// Luxemburg norm `inf{t > 0 : Σ w B(|f|/t) ≤ 1}`, by bisection in `log t`.
pub fn orlicz_luxemburg_norm<T: Real>(f: &SampledFunction<T>, yf: &YoungFunction<T>) -> T {
    let modular = |t: T| {
        f.values
            .iter()
            .zip(&f.weights)
            .fold(T::zero(), |a, (v, w)| a + *w * yf.value(v.abs() / t))
    };
    let sup = f.sup_norm();
    if sup == T::zero() {
        return T::zero();
    }
    let two = T::lit(2.0);
    let (mut lo, mut hi) = (sup, sup);
    while modular(lo) <= T::one() {
        lo /= two;
    }
    while modular(hi) > T::one() {
        hi *= two;
    }
    for _ in 0..200 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if modular(mid) > T::one() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// `(Σ w |f g|, ∫ f* g*)`, the two sides of the Hardy–Littlewood inequality.
pub fn hardy_littlewood_check<T: Real>(
    f: &SampledFunction<T>,
    g: &SampledFunction<T>,
) -> Result<(T, T), RearrangementError> {
    if !f.same_space(g) {
        return Err(RearrangementError::Shape);
    }
    let lhs = f
        .values
        .iter()
        .zip(&g.values)
        .zip(&f.weights)
        .fold(T::zero(), |a, ((x, y), w)| a + *w * (*x * *y).abs());
    let (fs, gs) = (f.decreasing_rearrangement(), g.decreasing_rearrangement());
    Ok((lhs, product_integral(&fs, &gs)))
}

/// `∫ f g` of two step functions by merging their breakpoints.
pub fn product_integral<T: Real>(f: &StepFunction<T>, g: &StepFunction<T>) -> T {
    let (mut i, mut j) = (0, 0);
    let mut s = T::zero();
    let mut total = T::zero();
    while i < f.values.len() && j < g.values.len() {
        let e = f.breaks[i + 1].min(g.breaks[j + 1]);
        total += f.values[i] * g.values[j] * (e - s);
        s = e;
        if f.breaks[i + 1] <= e {
            i += 1;
        }
        if g.breaks[j + 1] <= e {
            j += 1;
        }
    }
    total
}

/// The pseudo-rearrangement of `f` relative to `v`.
///
/// Cells are ordered by `v` descending, ties broken by cell index; on each cell the
/// value is `(f² mass / weight)^{1/2} = |f|`.
pub fn pseudo_rearrangement<T: Real>(
    f: &SampledFunction<T>,
    v: &SampledFunction<T>,
) -> Result<StepFunction<T>, RearrangementError> {
    if !f.same_space(v) {
        return Err(RearrangementError::Shape);
    }
    let mut order: Vec<usize> = (0..v.values.len()).collect();
    order.sort_by(|&a, &b| {
        v.values[b]
            .partial_cmp(&v.values[a])
            .unwrap_or(Ordering::Equal)
            .then(a.cmp(&b))
    });
    Ok(StepFunction::from_cells(order.iter().map(|&k| {
        let mass = f.values[k] * f.values[k] * f.weights[k];
        ((mass / f.weights[k]).sqrt(), f.weights[k])
    })))
}

/// Largest violation of `∫₀ˢ φ² ≤ ∫₀ˢ (f*)²` over the breakpoints of `φ`, and of the
/// same inequality with `φ` replaced by its own rearrangement. Non-positive means the
/// inequality holds.
pub fn pseudo_rearrangement_gap<T: Real>(phi: &StepFunction<T>, f: &SampledFunction<T>) -> T {
    let fs2 = f.decreasing_rearrangement().squared();
    let phi2 = phi.squared();
    let phi_star2 = StepFunction::from_cells({
        let mut cells: Vec<(T, T)> = phi2
            .values
            .iter()
            .zip(phi2.breaks.windows(2))
            .map(|(v, b)| (*v, b[1] - b[0]))
            .collect();
        cells.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(Ordering::Equal));
        cells
    });
    let mut worst = T::neg_infinity();
    for (k, s) in phi2.breaks.iter().enumerate() {
        let rhs = fs2.prefix_integral(*s);
        let scale = T::one().max(rhs.abs());
        worst = worst.max((phi2.prefix[k] - rhs) / scale);
    }
    for s in phi_star2.breaks.iter() {
        let rhs = fs2.prefix_integral(*s);
        let scale = T::one().max(rhs.abs());
        worst = worst.max((phi_star2.prefix_integral(*s) - rhs) / scale);
    }
    worst
}
