use crate::norm_field::AnisotropicNorm;
use crate::rearrangement::{SampledFunction, StepFunction};
use crate::scalar::{bilinear, Real};

use super::domain::Domain2D;
use super::GeometryError;

/// Minimum number of arclength cells used to sample the boundary curvature.
pub const MIN_CURVATURE_CELLS: usize = 1000;

/// Decreasing rearrangement of `|κ|` over arclength.
///
/// `None` for boundaries with corners, whose curvature has atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureProfile<T> {
    rearranged: Option<StepFunction<T>>,
    perimeter: T,
    area: T,
}

impl<T: Real> CurvatureProfile<T> {
    /// Samples `|κ|` at the midpoints of `cells` arclength cells (at least
    /// [`MIN_CURVATURE_CELLS`]), aligned so that no cell straddles a piece break.
    pub fn new(dom: &Domain2D<T>, cells: usize) -> Self {
        let perimeter = dom.perimeter();
        let area = dom.area();
        if !dom.is_smooth() {
            return Self {
                rearranged: None,
                perimeter,
                area,
            };
        }
        let cells = cells.max(MIN_CURVATURE_CELLS);
        let breaks = dom.piece_breaks();
        let mut values = Vec::with_capacity(cells + breaks.len());
        let mut weights = Vec::with_capacity(cells + breaks.len());
        for w in breaks.windows(2) {
            let len = w[1] - w[0];
            let n = ((len / perimeter).as_f64() * cells as f64).ceil().max(1.0) as usize;
            let ds = len / T::from_count(n);
            for i in 0..n {
                let s = w[0] + ds * (T::from_count(i) + T::lit(0.5));
                let k = dom.boundary_at(s).curvature.unwrap_or_else(T::zero);
                values.push(k.abs());
                weights.push(ds);
            }
        }
        let f = SampledFunction::new(values, weights).expect("positive arclength cells");
        Self {
            rearranged: Some(f.decreasing_rearrangement()),
            perimeter,
            area,
        }
    }

    pub fn rearrangement(&self) -> Option<&StepFunction<T>> {
        self.rearranged.as_ref()
    }

    /// `∫₀^{|∂Ω|} κ**(r) dr`; `+∞` for boundaries with corners.
    pub fn lorentz_norm(&self) -> T {
        match &self.rearranged {
            Some(k) => k.integral_of_maximal(self.perimeter),
            None => T::infinity(),
        }
    }

    /// `G(s) = ∫₀^{√s} κ**(c′ r) dr` for `s ∈ (0, |Ω|)`; `+∞` for boundaries with corners.
    pub fn g(&self, s: T, cprime: T) -> Result<T, GeometryError> {
        if !(s > T::zero() && s < self.area) {
            return Err(GeometryError::Domain(format!(
                "s = {s} must lie in (0, {})",
                self.area
            )));
        }
        if !(cprime > T::zero()) {
            return Err(GeometryError::InvalidParameters(format!(
                "c' = {cprime} must be positive"
            )));
        }
        Ok(match &self.rearranged {
            Some(k) => k.integral_of_maximal(cprime * s.sqrt()) / cprime,
            None => T::infinity(),
        })
    }

    /// Largest `s₀ ≤ |Ω|/2` with `G(s₀) ≤ 1/(2ĉ)`, by bisection on the monotone `G`.
    pub fn find_s0(&self, chat: T, cprime: T) -> Result<T, GeometryError> {
        if !(chat > T::zero()) {
            return Err(GeometryError::InvalidParameters(format!(
                "c-hat = {chat} must be positive"
            )));
        }
        let target = T::one() / (T::lit(2.0) * chat);
        let mut hi = self.area * T::lit(0.5);
        if self.g(hi, cprime)? <= target {
            return Ok(hi);
        }
        let mut lo = self.area * T::lit(1e-12);
        let g_min = self.g(lo, cprime)?;
        if g_min > target {
            return Err(GeometryError::Threshold {
                g_min: g_min.as_f64(),
            });
        }
        while hi - lo > T::lit(1e-13) * hi {
            let mid = T::lit(0.5) * (lo + hi);
            if self.g(mid, cprime)? <= target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }
}

/// `‖κ‖` in the Lorentz space `L^{(1,1)}(∂Ω)` computed as `∫₀^{|∂Ω|} κ**(r) dr`.
///
/// Returns `+∞` for polygons.
pub fn curvature_lorentz_norm<T: Real>(dom: &Domain2D<T>) -> T {
    CurvatureProfile::new(dom, MIN_CURVATURE_CELLS).lorentz_norm()
}

/// `G(s) = ∫₀^{√s} κ**(c′ r) dr`.
pub fn g_function<T: Real>(dom: &Domain2D<T>, s: T, cprime: T) -> Result<T, GeometryError> {
    CurvatureProfile::new(dom, MIN_CURVATURE_CELLS).g(s, cprime)
}

/// Largest `s₀ ≤ |Ω|/2` with `G(s₀) ≤ 1/(2ĉ)`.
pub fn find_s0<T: Real>(dom: &Domain2D<T>, chat: T, cprime: T) -> Result<T, GeometryError> {
    CurvatureProfile::new(dom, MIN_CURVATURE_CELLS).find_s0(chat, cprime)
}

/// Trace of the anisotropic second fundamental form at arclength `s`:
/// the tangential derivative of `∇H(ν(s))` along `τ`, i.e. `κ τᵀ∇²H(ν)τ`.
pub fn anisotropic_sff<T: Real>(
    dom: &Domain2D<T>,
    h: &AnisotropicNorm<T, 2>,
    s: T,
) -> Result<T, GeometryError> {
    let bp = dom.boundary_at(s);
    let kappa = bp.curvature.ok_or(GeometryError::Corner(s.as_f64()))?;
    let hess = h.hessian(&bp.normal);
    Ok(kappa * bilinear(&hess, &bp.tangent, &bp.tangent))
}

/// Extremes of `tr B^H / κ` over boundary samples with `|κ|` above a threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SffSandwich<T> {
    pub min_ratio: T,
    pub max_ratio: T,
    /// Smallest value of `tr B^H` over all samples.
    pub min_trace: T,
    pub samples: usize,
}

/// Samples `n` equally spaced boundary points away from corners.
pub fn sff_sandwich<T: Real>(
    dom: &Domain2D<T>,
    h: &AnisotropicNorm<T, 2>,
    n: usize,
) -> Result<SffSandwich<T>, GeometryError> {
    let per = dom.perimeter();
    let mut out = SffSandwich {
        min_ratio: T::infinity(),
        max_ratio: T::neg_infinity(),
        min_trace: T::infinity(),
        samples: 0,
    };
    for i in 0..n {
        let s = per * (T::from_count(i) + T::lit(0.5)) / T::from_count(n);
        let bp = dom.boundary_at(s);
        let Some(kappa) = bp.curvature else { continue };
        let tr = anisotropic_sff(dom, h, s)?;
        out.min_trace = out.min_trace.min(tr);
        if kappa.abs() > T::lit(1e-10) {
            let r = tr / kappa;
            out.min_ratio = out.min_ratio.min(r);
            out.max_ratio = out.max_ratio.max(r);
            out.samples += 1;
        }
    }
    Ok(out)
}
