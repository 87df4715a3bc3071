//! Young functions `B(t) = ∫₀ᵗ b`, their growth indices and conjugates, and the
//! ε-regularized family with uniformly bounded ratio `b_ε(t)/t`.

use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::numerics::{self, geometric_grid, golden_max, monotone_inverse};
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum YoungError {
    #[error("argument {0} is outside the domain [0, ∞)")]
    Domain(f64),
    #[error("b vanishes at t = {0} > 0; the function is degenerate")]
    Degenerate(f64),
    #[error("lower growth index {0} is not positive")]
    NotAdmissible(f64),
    #[error("invalid parameters: {0}")]
    InvalidParameters(String),
    #[error("quadrature did not converge (value {value}, achieved error {achieved})")]
    Quadrature { value: f64, achieved: f64 },
    #[error("supremum defining the conjugate at t = {0} is unbounded")]
    UnboundedConjugate(f64),
    #[error("regularization parameter {0} must lie in (0, 1)")]
    Epsilon(f64),
}

impl From<numerics::QuadratureFailure> for YoungError {
    fn from(q: numerics::QuadratureFailure) -> Self {
        YoungError::Quadrature {
            value: q.value,
            achieved: q.achieved,
        }
    }
}

/// Lower and upper growth indices `inf tb'/b` and `sup tb'/b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GrowthIndices<T> {
    pub lower: T,
    pub upper: T,
}

/// Common interface of the growth profiles that drive the monotone fields.
///
/// `derivative` is `b`, `value` is `B`, and `ratio` is `a(t) = b(t)/t`. Callers pass
/// `t ≥ 0`; the checked entry points on [`YoungFunction`] validate that.
pub trait Growth<T: Real>: Send + Sync {
    fn derivative(&self, t: T) -> T;
    fn value(&self, t: T) -> T;
    fn ratio(&self, t: T) -> T;
    fn ratio_derivative(&self, t: T) -> T;
    fn indices(&self) -> GrowthIndices<T>;
}

/// Monotone piecewise-linear samples of `b` with power-law tails.
#[derive(Debug, Clone, PartialEq)]
pub struct Tabulated<T> {
    grid: Vec<T>,
    values: Vec<T>,
    // cumulative exact integral at each grid point
    cumulative: Vec<T>,
    left_exponent: T,
    right_exponent: T,
}

impl<T: Real> Tabulated<T> {
    fn new(grid: Vec<T>, values: Vec<T>) -> Result<Self, YoungError> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(YoungError::InvalidParameters(
                "tabulated b needs at least two (grid, value) pairs of equal length".into(),
            ));
        }
        if grid[0] < T::zero() || grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(YoungError::InvalidParameters(
                "tabulated grid must be non-negative and strictly increasing".into(),
            ));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(YoungError::InvalidParameters(
                "tabulated values must be non-decreasing".into(),
            ));
        }
        for (t, v) in grid.iter().zip(&values) {
            if *t > T::zero() && *v <= T::zero() {
                return Err(YoungError::Degenerate(t.as_f64()));
            }
            if *t == T::zero() && *v != T::zero() {
                return Err(YoungError::InvalidParameters("b(0) must vanish".into()));
            }
        }
        // tb'/b is monotone on each linear piece, so its extremes sit at the knots
        let mut lo = T::infinity();
        let mut hi = T::neg_infinity();
        for k in 0..grid.len() - 1 {
            let slope = (values[k + 1] - values[k]) / (grid[k + 1] - grid[k]);
            for (t, v) in [(grid[k], values[k]), (grid[k + 1], values[k + 1])] {
                if v > T::zero() {
                    let idx = t * slope / v;
                    lo = lo.min(idx);
                    hi = hi.max(idx);
                } else if t == T::zero() && slope > T::zero() {
                    // b(t) ≈ slope·t near the origin
                    lo = lo.min(T::one());
                    hi = hi.max(T::one());
                }
            }
        }
        if lo <= T::zero() {
            return Err(YoungError::NotAdmissible(lo.as_f64()));
        }
        let mut cumulative = vec![T::zero(); grid.len()];
        if grid[0] > T::zero() {
            cumulative[0] = values[0] * grid[0] / (lo + T::one());
        }
        for k in 1..grid.len() {
            cumulative[k] = cumulative[k - 1]
                + T::lit(0.5) * (values[k] + values[k - 1]) * (grid[k] - grid[k - 1]);
        }
        Ok(Self {
            grid,
            values,
            cumulative,
            left_exponent: lo,
            right_exponent: hi,
        })
    }

    fn segment(&self, t: T) -> usize {
        match self
            .grid
            .binary_search_by(|g| g.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less))
        {
            Ok(k) => k.min(self.grid.len() - 2),
            Err(k) => k.saturating_sub(1).min(self.grid.len() - 2),
        }
    }

    fn eval(&self, t: T) -> T {
        let n = self.grid.len();
        if t < self.grid[0] {
            return self.values[0] * (t / self.grid[0]).powf(self.left_exponent);
        }
        if t > self.grid[n - 1] {
            return self.values[n - 1] * (t / self.grid[n - 1]).powf(self.right_exponent);
        }
        let k = self.segment(t);
        let w = (t - self.grid[k]) / (self.grid[k + 1] - self.grid[k]);
        self.values[k] + w * (self.values[k + 1] - self.values[k])
    }

    fn slope(&self, t: T) -> T {
        let n = self.grid.len();
        if t < self.grid[0] {
            return self.left_exponent * self.eval(t) / t;
        }
        if t > self.grid[n - 1] {
            return self.right_exponent * self.eval(t) / t;
        }
        let k = self.segment(t);
        (self.values[k + 1] - self.values[k]) / (self.grid[k + 1] - self.grid[k])
    }

    fn integral(&self, t: T) -> T {
        let n = self.grid.len();
        if t < self.grid[0] {
            let e = self.left_exponent + T::one();
            return self.values[0] * self.grid[0] / e * (t / self.grid[0]).powf(e);
        }
        if t > self.grid[n - 1] {
            let e = self.right_exponent + T::one();
            let tl = self.grid[n - 1];
            return self.cumulative[n - 1]
                + self.values[n - 1] * tl / e * ((t / tl).powf(e) - T::one());
        }
        let k = self.segment(t);
        let bt = self.eval(t);
        self.cumulative[k] + T::lit(0.5) * (self.values[k] + bt) * (t - self.grid[k])
    }
}

type ScalarFn<T> = Arc<dyn Fn(T) -> T + Send + Sync>;

/// The closed forms and representations a Young function can be declared with.
#[derive(Clone)]
pub enum YoungKind<T> {
    /// `B(t) = t^p / p`.
    Power { p: T },
    /// `b(t) = α t^(p-1) + β t^(q-1)`.
    PowerSum { p: T, q: T, alpha: T, beta: T },
    Tabulated(Tabulated<T>),
    /// `b` given as a closure; `B` is obtained by adaptive quadrature.
    Derivative(ScalarFn<T>),
}

impl<T: Real> fmt::Debug for YoungKind<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            YoungKind::Power { p } => write!(f, "Power {{ p: {p} }}"),
            YoungKind::PowerSum { p, q, alpha, beta } => {
                write!(f, "PowerSum {{ p: {p}, q: {q}, alpha: {alpha}, beta: {beta} }}")
            }
            YoungKind::Tabulated(t) => write!(f, "Tabulated({} knots)", t.grid.len()),
            YoungKind::Derivative(_) => write!(f, "Derivative(<closure>)"),
        }
    }
}

/// A Young function `B` together with its derivative `b` and growth indices.
#[derive(Debug, Clone)]
pub struct YoungFunction<T: Real> {
    kind: YoungKind<T>,
    indices: GrowthIndices<T>,
}

const QUAD_TOL: f64 = 1e-13;

impl<T: Real> YoungFunction<T> {
    pub fn power(p: T) -> Result<Self, YoungError> {
        if !(p > T::one()) || !p.is_finite() {
            return Err(YoungError::InvalidParameters(format!("power exponent {p} must exceed 1")));
        }
        let idx = p - T::one();
        Ok(Self {
            kind: YoungKind::Power { p },
            indices: GrowthIndices { lower: idx, upper: idx },
        })
    }

    pub fn power_sum(p: T, q: T, alpha: T, beta: T) -> Result<Self, YoungError> {
        if !(p > T::one() && q > T::one()) {
            return Err(YoungError::InvalidParameters(format!(
                "power_sum exponents p={p}, q={q} must exceed 1"
            )));
        }
        if alpha < T::zero() || beta < T::zero() || alpha + beta <= T::zero() {
            return Err(YoungError::InvalidParameters(
                "power_sum coefficients must be non-negative and not both zero".into(),
            ));
        }
        // tb'/b is a weighted mean of p-1 and q-1 over the active terms
        let (lower, upper) = match (alpha > T::zero(), beta > T::zero()) {
            (true, true) => (p.min(q) - T::one(), p.max(q) - T::one()),
            (true, false) => (p - T::one(), p - T::one()),
            _ => (q - T::one(), q - T::one()),
        };
        Ok(Self {
            kind: YoungKind::PowerSum { p, q, alpha, beta },
            indices: GrowthIndices { lower, upper },
        })
    }

    /// Monotone samples of `b`; knots must be strictly increasing and values non-decreasing.
    pub fn tabulated(grid: Vec<T>, values: Vec<T>) -> Result<Self, YoungError> {
        let tab = Tabulated::new(grid, values)?;
        let indices = GrowthIndices {
            lower: tab.left_exponent,
            upper: tab.right_exponent,
        };
        Ok(Self {
            kind: YoungKind::Tabulated(tab),
            indices,
        })
    }

    /// `b` supplied as a closure. Indices are estimated on the default grid and the
    /// function is rejected unless the lower index is positive and finite.
    pub fn from_derivative<F>(b: F) -> Result<Self, YoungError>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        let yf = Self::from_derivative_unchecked(b)?;
        if !(yf.indices.lower > T::zero()) {
            return Err(YoungError::NotAdmissible(yf.indices.lower.as_f64()));
        }
        Ok(yf)
    }

    /// Like [`from_derivative`](Self::from_derivative) but skips the admissibility test.
    /// Used to build negative controls for the property suite.
    pub fn from_derivative_unchecked<F>(b: F) -> Result<Self, YoungError>
    where
        F: Fn(T) -> T + Send + Sync + 'static,
    {
        let f: ScalarFn<T> = Arc::new(b);
        let mut yf = Self {
            kind: YoungKind::Derivative(f),
            indices: GrowthIndices {
                lower: T::nan(),
                upper: T::nan(),
            },
        };
        yf.indices = growth_indices(&yf, &default_index_grid())?;
        Ok(yf)
    }

    pub fn kind(&self) -> &YoungKind<T> {
        &self.kind
    }

    /// Exponent `p` when the function is the pure power `t^p/p`.
    pub fn power_exponent(&self) -> Option<T> {
        match self.kind {
            YoungKind::Power { p } => Some(p),
            _ => None,
        }
    }

    /// Checked `b(t)`.
    pub fn eval_b(&self, t: T) -> Result<T, YoungError> {
        check_nonneg(t)?;
        Ok(self.derivative(t))
    }

    /// Checked `B(t)`; quadrature failures are reported for closure-defined functions.
    pub fn eval_big_b(&self, t: T) -> Result<T, YoungError> {
        check_nonneg(t)?;
        match &self.kind {
            YoungKind::Derivative(b) => Ok(numerics::integrate(
                |s| b(s),
                T::zero(),
                t,
                T::lit(1e-300),
                T::lit(QUAD_TOL),
            )?),
            _ => Ok(self.value(t)),
        }
    }

    /// The Young conjugate `sup_{s≥0} (st − B(s))`.
    pub fn conjugate(&self, t: T) -> Result<T, YoungError> {
        conjugate_of(self, t)
    }

    /// Generalized inverse of `b`: the smallest `s` with `b(s) ≥ t`.
    pub fn inverse_derivative(&self, t: T) -> Result<T, YoungError> {
        check_nonneg(t)?;
        if let YoungKind::Power { p } = self.kind {
            return Ok(t.powf(T::one() / (p - T::one())));
        }
        monotone_inverse(|s| self.derivative(s), t, T::lit(1e-13))
            .ok_or(YoungError::UnboundedConjugate(t.as_f64()))
    }

    /// `F(t) = ∫₀ᵗ b²`.
    pub fn squared_integral(&self, t: T) -> Result<T, YoungError> {
        check_nonneg(t)?;
        if let YoungKind::Power { p } = self.kind {
            let e = T::lit(2.0) * p - T::one();
            return Ok(t.powf(e) / e);
        }
        Ok(numerics::integrate(
            |s| self.derivative(s).powi(2),
            T::zero(),
            t,
            T::lit(1e-300),
            T::lit(QUAD_TOL),
        )?)
    }

    /// ε-regularization with `ε ≤ b_ε(t)/t ≤ 1/ε`.
    pub fn regularize(&self, epsilon: T) -> Result<RegularizedYoung<T>, YoungError> {
        RegularizedYoung::new(self.clone(), epsilon)
    }
}

impl<T: Real> Growth<T> for YoungFunction<T> {
    fn derivative(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        match &self.kind {
            YoungKind::Power { p } => t.powf(*p - T::one()),
            YoungKind::PowerSum { p, q, alpha, beta } => {
                *alpha * t.powf(*p - T::one()) + *beta * t.powf(*q - T::one())
            }
            YoungKind::Tabulated(tab) => tab.eval(t),
            YoungKind::Derivative(b) => b(t),
        }
    }

    fn value(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        match &self.kind {
            YoungKind::Power { p } => t.powf(*p) / *p,
            YoungKind::PowerSum { p, q, alpha, beta } => {
                *alpha * t.powf(*p) / *p + *beta * t.powf(*q) / *q
            }
            YoungKind::Tabulated(tab) => tab.integral(t),
            YoungKind::Derivative(b) => {
                numerics::integrate(|s| b(s), T::zero(), t, T::lit(1e-300), T::lit(QUAD_TOL))
                    .unwrap_or_else(|e| T::lit(e.value))
            }
        }
    }

    fn ratio(&self, t: T) -> T {
        match &self.kind {
            YoungKind::Power { p } => t.powf(*p - T::lit(2.0)),
            YoungKind::PowerSum { p, q, alpha, beta } => {
                *alpha * t.powf(*p - T::lit(2.0)) + *beta * t.powf(*q - T::lit(2.0))
            }
            _ => self.derivative(t) / t,
        }
    }

    fn ratio_derivative(&self, t: T) -> T {
        let two = T::lit(2.0);
        match &self.kind {
            YoungKind::Power { p } => (*p - two) * t.powf(*p - T::lit(3.0)),
            YoungKind::PowerSum { p, q, alpha, beta } => {
                *alpha * (*p - two) * t.powf(*p - T::lit(3.0))
                    + *beta * (*q - two) * t.powf(*q - T::lit(3.0))
            }
            YoungKind::Tabulated(tab) => (tab.slope(t) * t - tab.eval(t)) / (t * t),
            YoungKind::Derivative(b) => {
                let h = T::lit(1e-5) * t.max(T::lit(1e-300));
                let bp = (b(t + h) - b(t - h)) / (two * h);
                (bp * t - b(t)) / (t * t)
            }
        }
    }

    fn indices(&self) -> GrowthIndices<T> {
        self.indices
    }
}

fn check_nonneg<T: Real>(t: T) -> Result<(), YoungError> {
    if t < T::zero() || t.is_nan() {
        Err(YoungError::Domain(t.as_f64()))
    } else {
        Ok(())
    }
}

/// Default geometric grid for index estimation: `[1e-6, 1e6]`, 200 points per decade.
pub fn default_index_grid<T: Real>() -> Vec<T> {
    geometric_grid(T::lit(1e-6), T::lit(1e6), 200)
}

/// Estimates `(inf, sup)` of `t b'(t)/b(t)` over a grid by centered log-log differences.
///
/// Each estimate is a mean value of the log-slope over a grid cell, so the returned
/// interval is contained in the true index interval.
pub fn growth_indices<T: Real, G: Growth<T> + ?Sized>(
    g: &G,
    grid: &[T],
) -> Result<GrowthIndices<T>, YoungError> {
    if grid.len() < 3 {
        return Err(YoungError::InvalidParameters(
            "index grid needs at least three points".into(),
        ));
    }
    let mut logs = Vec::with_capacity(grid.len());
    for &t in grid {
        if t <= T::zero() {
            return Err(YoungError::InvalidParameters("index grid must be positive".into()));
        }
        let b = g.derivative(t);
        if !(b > T::zero()) {
            return Err(YoungError::Degenerate(t.as_f64()));
        }
        logs.push((t.ln(), b.ln()));
    }
    let mut lower = T::infinity();
    let mut upper = T::neg_infinity();
    for w in logs.windows(3) {
        let slope = (w[2].1 - w[0].1) / (w[2].0 - w[0].0);
        lower = lower.min(slope);
        upper = upper.max(slope);
    }
    Ok(GrowthIndices { lower, upper })
}

/// Conjugate of any growth profile, by golden-section maximization of `st − B(s)`.
pub fn conjugate_of<T: Real, G: Growth<T> + ?Sized>(g: &G, t: T) -> Result<T, YoungError> {
    check_nonneg(t)?;
    if t == T::zero() {
        return Ok(T::zero());
    }
    let phi = |s: T| s * t - g.value(s);
    // the supremand peaks where b(s) reaches t; grow the bracket until it does
    let two = T::lit(2.0);
    let mut hi = T::one();
    let mut grown = 0;
    while g.derivative(hi) < t {
        hi *= two;
        grown += 1;
        if grown > 1000 || !hi.is_finite() {
            return Err(YoungError::UnboundedConjugate(t.as_f64()));
        }
    }
    let lo = if grown > 0 { hi / two } else { T::zero() };
    let (_, v) = golden_max(phi, lo, hi, T::lit(1e-12));
    Ok(v.max(T::zero()))
}

/// A Young function regularized so that its ratio `a_ε = b_ε/t` lies in `[ε, 1/ε]`.
#[derive(Debug, Clone)]
pub struct RegularizedYoung<T: Real> {
    base: YoungFunction<T>,
    epsilon: T,
    indices: GrowthIndices<T>,
}

impl<T: Real> RegularizedYoung<T> {
    pub fn new(base: YoungFunction<T>, epsilon: T) -> Result<Self, YoungError> {
        if !(epsilon > T::zero() && epsilon < T::one()) {
            return Err(YoungError::Epsilon(epsilon.as_f64()));
        }
        let mut r = Self {
            base,
            epsilon,
            indices: GrowthIndices {
                lower: T::nan(),
                upper: T::nan(),
            },
        };
        r.indices = growth_indices(&r, &default_index_grid())?;
        Ok(r)
    }

    pub fn base(&self) -> &YoungFunction<T> {
        &self.base
    }

    pub fn epsilon(&self) -> T {
        self.epsilon
    }

    /// Growth indices of the ratio `a_ε` (those of `b_ε` minus one).
    pub fn ratio_indices(&self) -> GrowthIndices<T> {
        GrowthIndices {
            lower: self.indices.lower - T::one(),
            upper: self.indices.upper - T::one(),
        }
    }

    #[inline]
    fn smoothed_radius(&self, t: T) -> T {
        (self.epsilon + t * t).sqrt()
    }
}

impl<T: Real> Growth<T> for RegularizedYoung<T> {
    fn derivative(&self, t: T) -> T {
        self.ratio(t) * t
    }

    fn value(&self, t: T) -> T {
        if t <= T::zero() {
            return T::zero();
        }
        // the ratio varies on the scale √ε near the origin; split there
        let knee = self.epsilon.sqrt().min(t);
        let tol = T::lit(QUAD_TOL);
        let f = |s: T| self.derivative(s);
        let head = numerics::integrate(f, T::zero(), knee, T::lit(1e-300), tol)
            .unwrap_or_else(|e| T::lit(e.value));
        let tail = numerics::integrate(f, knee, t, T::lit(1e-300), tol)
            .unwrap_or_else(|e| T::lit(e.value));
        head + tail
    }

    fn ratio(&self, t: T) -> T {
        let a = self.base.ratio(self.smoothed_radius(t));
        let e = self.epsilon;
        if a > T::one() {
            // divided through by a so that a = ∞ gives 1/ε
            (T::one() + e / a) / (e + a.recip())
        } else {
            (a + e) / (T::one() + e * a)
        }
    }

    fn ratio_derivative(&self, t: T) -> T {
        let rho = self.smoothed_radius(t);
        let a = self.base.ratio(rho);
        if !a.is_finite() {
            return T::zero();
        }
        let denom = T::one() + self.epsilon * a;
        let da = self.base.ratio_derivative(rho) * t / rho;
        (T::one() - self.epsilon * self.epsilon) / (denom * denom) * da
    }

    fn indices(&self) -> GrowthIndices<T> {
        self.indices
    }
}

/// Tightest empirical constants of the auxiliary-function sandwiches on a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryReport<T> {
    /// Range of `β(t)/B(t)` with `β = b(t)·t`.
    pub beta_over_big_b: (T, T),
    /// Range of `γ(t)/B̃(t)` with `γ = b⁻¹(t)·t`.
    pub gamma_over_conjugate: (T, T),
    /// Range of `t b(t)² / F(t)` with `F = ∫₀ᵗ b²`.
    pub tb2_over_f: (T, T),
    /// Sandwich sides that failed beyond tolerance.
    pub violations: Vec<String>,
}

/// Sweeps the auxiliary functions `β`, `γ`, `F` over a positive grid.
///
/// The lower constants of `β/B`, `γ/B̃` and `tb²/F` are at least one by monotonicity of
/// `b`; anything below `1 − 1e-9` is recorded as a violation.
pub fn check_auxiliary_functions<T: Real>(
    yf: &YoungFunction<T>,
    grid: &[T],
) -> Result<AuxiliaryReport<T>, YoungError> {
    let mut beta = (T::infinity(), T::neg_infinity());
    let mut gamma = (T::infinity(), T::neg_infinity());
    let mut fr = (T::infinity(), T::neg_infinity());
    let widen = |r: &mut (T, T), v: T| {
        r.0 = r.0.min(v);
        r.1 = r.1.max(v);
    };
    for &t in grid {
        let b = yf.derivative(t);
        widen(&mut beta, b * t / yf.value(t));
        let conj = yf.conjugate(t)?;
        if conj > T::zero() {
            widen(&mut gamma, yf.inverse_derivative(t)? * t / conj);
        }
        let f = yf.squared_integral(t)?;
        widen(&mut fr, t * b * b / f);
    }
    let floor = T::one() - T::lit(1e-9);
    let mut violations = Vec::new();
    for (name, range) in [("beta/B", beta), ("gamma/conj", gamma), ("t b^2/F", fr)] {
        if !(range.0 >= floor) {
            violations.push(format!("{name} lower constant {} < 1", range.0));
        }
        if !range.1.is_finite() {
            violations.push(format!("{name} upper constant is not finite"));
        }
    }
    Ok(AuxiliaryReport {
        beta_over_big_b: beta,
        gamma_over_conjugate: gamma,
        tb2_over_f: fr,
        violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    type Yf = YoungFunction<f64>;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn power_b_and_big_b() {
        let yf = Yf::power(3.0).unwrap();
        assert_eq!(yf.eval_b(2.0).unwrap(), 4.0);
        assert_eq!(yf.eval_b(0.0).unwrap(), 0.0);
        let quad = Yf::power(2.0).unwrap();
        assert_eq!(quad.eval_big_b(3.0).unwrap(), 4.5);
        assert_eq!(quad.eval_big_b(0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_argument_is_a_domain_error() {
        let yf = Yf::power(2.0).unwrap();
        assert!(matches!(yf.eval_b(-1.0), Err(YoungError::Domain(_))));
        assert!(matches!(yf.eval_big_b(-0.5), Err(YoungError::Domain(_))));
        assert!(matches!(yf.conjugate(-0.5), Err(YoungError::Domain(_))));
    }

    #[test]
    fn tabulated_interpolates_linearly() {
        let yf = Yf::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 3.0]).unwrap();
        assert!(close(yf.eval_b(1.5).unwrap(), 2.0, 1e-15));
        // exact trapezoid integral
        assert!(close(yf.eval_big_b(2.0).unwrap(), 0.5 + 2.0, 1e-15));
        let idx = yf.indices();
        assert!(close(idx.lower, 1.0, 1e-15));
        assert!(close(idx.upper, 2.0, 1e-15));
    }

    #[test]
    fn tabulated_plateau_is_rejected() {
        let r = Yf::tabulated(vec![0.0, 1.0, 2.0, 3.0], vec![0.0, 1.0, 1.0, 2.0]);
        assert!(matches!(r, Err(YoungError::NotAdmissible(_))));
        let r = Yf::tabulated(vec![0.0, 1.0, 2.0], vec![0.0, 0.0, 2.0]);
        assert!(matches!(r, Err(YoungError::Degenerate(_))));
    }

    #[test]
    fn tabulated_tail_is_continuous_and_integrates() {
        let yf = Yf::tabulated(vec![0.5, 1.0, 2.0], vec![0.25, 1.0, 4.0]).unwrap();
        for t in [0.5, 2.0] {
            let below = yf.eval_b(t * (1.0 - 1e-12)).unwrap();
            let above = yf.eval_b(t * (1.0 + 1e-12)).unwrap();
            assert!(close(below, above, 1e-9));
        }
        let quad = numerics::integrate(|s| yf.derivative(s), 0.0, 5.0, 1e-14, 1e-13).unwrap();
        assert!(close(yf.eval_big_b(5.0).unwrap(), quad, 1e-9));
    }

    #[test]
    fn closure_b_integrates_by_quadrature() {
        // B(t) = t² log(1+t), given through its derivative
        let yf = Yf::from_derivative(|t: f64| 2.0 * t * t.ln_1p() + t * t / (1.0 + t))
            .unwrap();
        let oracle = numerics::integrate(
            |s: f64| 2.0 * s * s.ln_1p() + s * s / (1.0 + s),
            0.0,
            1.0,
            1e-16,
            1e-15,
        )
        .unwrap();
        let got = yf.eval_big_b(1.0).unwrap();
        assert!((got - oracle).abs() < 1e-10);
        assert!((got - 2f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn power_indices_are_exact_on_a_grid() {
        let yf = Yf::power(2.5).unwrap();
        let est = growth_indices(&yf, &default_index_grid()).unwrap();
        assert!((est.lower - 1.5).abs() < 1e-8);
        assert!((est.upper - 1.5).abs() < 1e-8);
    }

    #[test]
    fn blended_indices_cover_one_to_three() {
        // b = t + t³: t b'/b = (1 + 3t²)/(1 + t²) ranges over (1, 3)
        let yf = Yf::power_sum(2.0, 4.0, 1.0, 1.0).unwrap();
        let grid = geometric_grid(1e-4, 1e4, 200);
        let est = growth_indices(&yf, &grid).unwrap();
        assert!(est.lower >= 1.0 && est.lower < 1.0 + 1e-6);
        assert!(est.upper <= 3.0 && est.upper > 3.0 - 1e-6);
    }

    #[test]
    fn degenerate_b_is_reported() {
        let yf = Yf::power(2.0).unwrap();
        struct Zero;
        impl Growth<f64> for Zero {
            fn derivative(&self, _: f64) -> f64 {
                0.0
            }
            fn value(&self, _: f64) -> f64 {
                0.0
            }
            fn ratio(&self, _: f64) -> f64 {
                0.0
            }
            fn ratio_derivative(&self, _: f64) -> f64 {
                0.0
            }
            fn indices(&self) -> GrowthIndices<f64> {
                GrowthIndices { lower: 0.0, upper: 0.0 }
            }
        }
        assert!(growth_indices(&yf, &[1.0, 2.0, 3.0]).is_ok());
        assert!(matches!(
            growth_indices(&Zero, &[1.0, 2.0, 3.0]),
            Err(YoungError::Degenerate(_))
        ));
    }

    #[test]
    fn conjugate_of_cubic_power() {
        let yf = Yf::power(3.0).unwrap();
        assert!((yf.conjugate(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert_eq!(yf.conjugate(0.0).unwrap(), 0.0);
        for t in [0.1f64, 0.7, 3.0, 40.0] {
            let exact = t.powf(1.5) / 1.5;
            assert!(close(yf.conjugate(t).unwrap(), exact, 1e-12), "t = {t}");
        }
    }

    #[test]
    fn conjugate_of_blend_matches_grid_search() {
        let yf = Yf::power_sum(2.0, 4.0, 1.0, 1.0).unwrap();
        let t = 2.0;
        let got = yf.conjugate(t).unwrap();
        // dense scan of s ↦ st − B(s) over [0, 3]
        let n = 3_000_000;
        let mut best = f64::NEG_INFINITY;
        for k in 0..=n {
            let s = 3.0 * k as f64 / n as f64;
            best = best.max(s * t - (s * s / 2.0 + s.powi(4) / 4.0));
        }
        assert!((got - best).abs() < 1e-11, "{got} vs {best}");
    }

    #[test]
    fn linear_growth_has_unbounded_conjugate() {
        let yf = Yf::from_derivative_unchecked(|t: f64| t.min(1.0)).unwrap();
        assert!(matches!(yf.conjugate(2.0), Err(YoungError::UnboundedConjugate(_))));
    }

    #[test]
    fn regularized_ratio_examples() {
        let quad = Yf::power(2.0).unwrap();
        let r = quad.regularize(0.3).unwrap();
        for t in [0.0, 0.2, 1.0, 10.0] {
            assert!((r.ratio(t) - 1.0).abs() < 1e-15);
        }
        let idx = r.indices();
        assert!((idx.lower - 1.0).abs() < 1e-9 && (idx.upper - 1.0).abs() < 1e-9);

        let cubic = Yf::power(3.0).unwrap();
        let r = cubic.regularize(0.5).unwrap();
        let s = 0.5f64.sqrt();
        assert!((r.ratio(0.0) - (s + 0.5) / (1.0 + 0.5 * s)).abs() < 1e-15);
    }

    #[test]
    fn regularized_ratio_saturates_when_base_overflows() {
        // tail exponent about 1000: a(t) is infinite well before t = 1e3
        let steep = Yf::tabulated(vec![0.0, 1.0, 1.001], vec![0.0, 1.0, 1000.0]).unwrap();
        assert!(steep.ratio(500.0).is_infinite());
        let r = steep.regularize(1e-3).unwrap();
        assert_eq!(r.ratio(500.0), 1e3);
        assert_eq!(r.ratio_derivative(500.0), 0.0);
    }

    #[test]
    fn regularization_converges_uniformly_on_bounded_sets() {
        let yf = Yf::power(3.0).unwrap();
        let devs: Vec<f64> = [1e-1, 1e-2, 1e-3]
            .iter()
            .map(|&e| {
                let r = yf.regularize(e).unwrap();
                (0..=2000)
                    .map(|k| 10.0 * k as f64 / 2000.0)
                    .map(|t| (r.derivative(t) - yf.derivative(t)).abs())
                    .fold(0.0, f64::max)
            })
            .collect();
        assert!(devs[0] > devs[1] && devs[1] > devs[2], "{devs:?}");
    }

    #[test]
    fn bad_epsilon_is_rejected() {
        let yf = Yf::power(3.0).unwrap();
        assert!(matches!(yf.regularize(0.0), Err(YoungError::Epsilon(_))));
        assert!(matches!(yf.regularize(1.0), Err(YoungError::Epsilon(_))));
    }

    #[test]
    fn ratio_derivative_matches_finite_differences() {
        let cases: Vec<Box<dyn Growth<f64>>> = vec![
            Box::new(Yf::power(1.5).unwrap()),
            Box::new(Yf::power_sum(2.0, 4.0, 1.0, 0.5).unwrap()),
            Box::new(Yf::power(3.0).unwrap().regularize(0.01).unwrap()),
            Box::new(Yf::power(1.5).unwrap().regularize(0.01).unwrap()),
        ];
        for g in &cases {
            for t in [0.05, 0.3, 1.0, 4.0] {
                let h = 1e-6 * t;
                let fd = (g.ratio(t + h) - g.ratio(t - h)) / (2.0 * h);
                assert!(close(g.ratio_derivative(t), fd, 1e-6), "t = {t}");
            }
        }
    }

    #[test]
    fn auxiliary_constants_for_quadratic_and_cubic() {
        let grid = geometric_grid(1e-3, 1e3, 10);
        let quad = Yf::power(2.0).unwrap();
        let rep = check_auxiliary_functions(&quad, &grid).unwrap();
        assert!(close(rep.beta_over_big_b.0, 2.0, 1e-12) && close(rep.beta_over_big_b.1, 2.0, 1e-12));
        assert!(rep.violations.is_empty());

        let cubic = Yf::power(3.0).unwrap();
        let rep = check_auxiliary_functions(&cubic, &grid).unwrap();
        // F = t⁵/5 and t b² = t⁵
        assert!(close(rep.tb2_over_f.0, 5.0, 1e-10) && close(rep.tb2_over_f.1, 5.0, 1e-10));

        let blend = Yf::power_sum(2.0, 4.0, 1.0, 1.0).unwrap();
        let rep = check_auxiliary_functions(&blend, &grid).unwrap();
        assert!(rep.violations.is_empty(), "{:?}", rep.violations);
        assert!(rep.gamma_over_conjugate.1.is_finite() && rep.tb2_over_f.1 < 10.0);
    }

    #[test]
    fn generic_over_f32() {
        let yf = YoungFunction::<f32>::power(3.0).unwrap();
        assert_eq!(yf.eval_b(2.0).unwrap(), 4.0);
        assert!((yf.conjugate(1.0).unwrap() - 2.0 / 3.0).abs() < 1e-5);
    }
}
