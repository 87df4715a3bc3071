use std::f64::consts::PI;

use crate::numerics::{self, gauss_legendre};
use crate::scalar::Real;

use super::GeometryError;

/// A planar domain described by its boundary.
#[derive(Debug, Clone, PartialEq)]
pub enum Shape<T> {
    Disk { r: T },
    Ellipse { a: T, b: T },
    /// Two half-disks of radius `r` joined by straight edges of length `l`.
    Stadium { r: T, l: T },
    /// `|x/a|^m + |y/b|^m < 1`, `m ≥ 2`.
    Superellipse { a: T, b: T, m: T },
    /// Counter-clockwise simple polygon.
    Polygon { vertices: Vec<[T; 2]> },
}

/// One smooth piece of the boundary, parametrized over `u ∈ [0, 1]` counter-clockwise.
#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Piece<T> {
    Segment { a: [T; 2], b: [T; 2] },
    Arc { center: [T; 2], radius: T, start: T, sweep: T },
    Curve(ParamCurve<T>),
}

/// A smooth closed curve `t ↦ c(t)`, `t ∈ [0, 2π)`, with an arclength table.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct ParamCurve<T> {
    kind: CurveKind<T>,
    // parameter nodes and the arclength at each
    nodes: Vec<T>,
    lengths: Vec<T>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum CurveKind<T> {
    Ellipse { a: T, b: T },
    Superellipse { a: T, b: T, m: T },
}

const TABLE_CELLS: usize = 1024;

impl<T: Real> ParamCurve<T> {
    fn new(kind: CurveKind<T>) -> Self {
        let two_pi = T::lit(2.0 * PI);
        let (gx, gw) = gauss_legendre::<T>(16);
        let mut nodes = Vec::with_capacity(TABLE_CELLS + 1);
        let mut lengths = Vec::with_capacity(TABLE_CELLS + 1);
        let mut acc = T::zero();
        let mut curve = Self {
            kind,
            nodes: Vec::new(),
            lengths: Vec::new(),
        };
        for k in 0..=TABLE_CELLS {
            let t = two_pi * T::from_count(k) / T::from_count(TABLE_CELLS);
            if k > 0 {
                let t0 = nodes[k - 1];
                acc += curve.speed_integral(t0, t, &gx, &gw);
            }
            nodes.push(t);
            lengths.push(acc);
        }
        curve.nodes = nodes;
        curve.lengths = lengths;
        curve
    }

    fn speed_integral(&self, t0: T, t1: T, gx: &[T], gw: &[T]) -> T {
        let half = T::lit(0.5) * (t1 - t0);
        let mid = T::lit(0.5) * (t1 + t0);
        gx.iter()
            .zip(gw)
            .fold(T::zero(), |a, (x, w)| a + *w * norm2(&self.d1(mid + half * *x)))
            * half
    }

    fn length(&self) -> T {
        *self.lengths.last().unwrap()
    }

    /// Parameter value at arclength `s ∈ [0, length]`.
    fn param_at(&self, s: T) -> T {
        let k = self
            .lengths
            .partition_point(|l| *l <= s)
            .saturating_sub(1)
            .min(TABLE_CELLS - 1);
        let (t0, s0) = (self.nodes[k], self.lengths[k]);
        let (t1, s1) = (self.nodes[k + 1], self.lengths[k + 1]);
        let mut t = t0 + (t1 - t0) * (s - s0) / (s1 - s0);
        let (gx, gw) = gauss_legendre::<T>(16);
        for _ in 0..30 {
            let g = s0 + self.speed_integral(t0, t, &gx, &gw) - s;
            let dt = g / norm2(&self.d1(t));
            t -= dt;
            if dt.abs() <= T::epsilon() * T::lit(8.0) * (T::one() + t.abs()) {
                break;
            }
        }
        t
    }

    fn point(&self, t: T) -> [T; 2] {
        match self.kind {
            CurveKind::Ellipse { a, b } => [a * t.cos(), b * t.sin()],
            CurveKind::Superellipse { .. } => {
                let (r, _, _) = self.polar(t);
                [r * t.cos(), r * t.sin()]
            }
        }
    }

    fn d1(&self, t: T) -> [T; 2] {
        match self.kind {
            CurveKind::Ellipse { a, b } => [-a * t.sin(), b * t.cos()],
            CurveKind::Superellipse { .. } => {
                let (r, dr, _) = self.polar(t);
                let (c, s) = (t.cos(), t.sin());
                [dr * c - r * s, dr * s + r * c]
            }
        }
    }

    fn d2(&self, t: T) -> [T; 2] {
        match self.kind {
            CurveKind::Ellipse { a, b } => [-a * t.cos(), -b * t.sin()],
            CurveKind::Superellipse { .. } => {
                let (r, dr, ddr) = self.polar(t);
                let (c, s) = (t.cos(), t.sin());
                let two = T::lit(2.0);
                [(ddr - r) * c - two * dr * s, (ddr - r) * s + two * dr * c]
            }
        }
    }

    /// Radius and its first two derivatives for the superellipse in polar form.
    fn polar(&self, t: T) -> (T, T, T) {
        let CurveKind::Superellipse { a, b, m } = self.kind else {
            unreachable!("polar form requested for an ellipse");
        };
        let one = T::one();
        let (c, s) = (t.cos(), t.sin());
        let (u, v) = (c / a, s / b);
        let pu = |e: T| u.abs().powf(e);
        let pv = |e: T| v.abs().powf(e);
        let f = pu(m) + pv(m);
        let fp = m * (-pu(m - T::lit(2.0)) * u * s / a + pv(m - T::lit(2.0)) * v * c / b);
        let fpp = m
            * ((m - one) * pu(m - T::lit(2.0)) * (s / a) * (s / a) - pu(m - T::lit(2.0)) * u * c / a
                + (m - one) * pv(m - T::lit(2.0)) * (c / b) * (c / b)
                - pv(m - T::lit(2.0)) * v * s / b);
        let inv = one / m;
        let r = f.powf(-inv);
        let dr = -inv * f.powf(-inv - one) * fp;
        let ddr = inv * (inv + one) * f.powf(-inv - T::lit(2.0)) * fp * fp
            - inv * f.powf(-inv - one) * fpp;
        (r, dr, ddr)
    }
}

fn norm2<T: Real>(v: &[T; 2]) -> T {
    (v[0] * v[0] + v[1] * v[1]).sqrt()
}

fn cross<T: Real>(a: &[T; 2], b: &[T; 2]) -> T {
    a[0] * b[1] - a[1] * b[0]
}

impl<T: Real> Piece<T> {
    fn length(&self) -> T {
        match self {
            Piece::Segment { a, b } => norm2(&[b[0] - a[0], b[1] - a[1]]),
            Piece::Arc { radius, sweep, .. } => *radius * sweep.abs(),
            Piece::Curve(c) => c.length(),
        }
    }

    /// Point, derivative in `u`, and signed curvature at `u ∈ [0, 1]`.
    fn eval_u(&self, u: T) -> ([T; 2], [T; 2], T) {
        match self {
            Piece::Segment { a, b } => {
                let d = [b[0] - a[0], b[1] - a[1]];
                ([a[0] + u * d[0], a[1] + u * d[1]], d, T::zero())
            }
            Piece::Arc {
                center,
                radius,
                start,
                sweep,
            } => {
                let th = *start + u * *sweep;
                let (c, s) = (th.cos(), th.sin());
                (
                    [center[0] + *radius * c, center[1] + *radius * s],
                    [-*radius * *sweep * s, *radius * *sweep * c],
                    T::one() / *radius,
                )
            }
            Piece::Curve(pc) => {
                let t = u * T::lit(2.0 * PI);
                let scale = T::lit(2.0 * PI);
                let d1 = pc.d1(t);
                let d2 = pc.d2(t);
                let sp = norm2(&d1);
                (
                    pc.point(t),
                    [d1[0] * scale, d1[1] * scale],
                    cross(&d1, &d2) / (sp * sp * sp),
                )
            }
        }
    }

    /// `u` at arclength `s` measured from the start of the piece.
    fn u_at(&self, s: T) -> T {
        match self {
            Piece::Curve(pc) => pc.param_at(s) / T::lit(2.0 * PI),
            _ => s / self.length(),
        }
    }

    /// Sub-intervals of `[0, 1]` on which the piece is smooth enough for Gauss rules.
    fn panels(&self) -> usize {
        match self {
            Piece::Segment { .. } => 1,
            Piece::Arc { sweep, .. } => (sweep.abs().as_f64() / (PI / 16.0)).ceil() as usize,
            // multiples of four keep the superellipse axes on panel edges
            Piece::Curve(_) => 64,
        }
    }
}

/// A point on the boundary with its frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryPoint<T> {
    pub point: [T; 2],
    /// Unit tangent, counter-clockwise.
    pub tangent: [T; 2],
    /// Unit outward normal.
    pub normal: [T; 2],
    /// Signed curvature, positive where the domain is locally convex; `None` at corners.
    pub curvature: Option<T>,
}

/// A bounded planar domain with a piecewise-C² boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain2D<T> {
    shape: Shape<T>,
    pieces: Vec<Piece<T>>,
    // arclength at the start of each piece, plus the perimeter
    offsets: Vec<T>,
    // pieces meet at a corner at the start of piece k
    corners: Vec<bool>,
    convex: bool,
    area: T,
    diameter: T,
    center: [T; 2],
}

impl<T: Real> Domain2D<T> {
    pub fn disk(r: T) -> Result<Self, GeometryError> {
        positive(&[r])?;
        let pieces = vec![Piece::Arc {
            center: [T::zero(); 2],
            radius: r,
            start: T::zero(),
            sweep: T::lit(2.0 * PI),
        }];
        Ok(Self::assemble(Shape::Disk { r }, pieces, [T::zero(); 2]))
    }

    pub fn ellipse(a: T, b: T) -> Result<Self, GeometryError> {
        positive(&[a, b])?;
        let pieces = vec![Piece::Curve(ParamCurve::new(CurveKind::Ellipse { a, b }))];
        Ok(Self::assemble(Shape::Ellipse { a, b }, pieces, [T::zero(); 2]))
    }

    pub fn superellipse(a: T, b: T, m: T) -> Result<Self, GeometryError> {
        positive(&[a, b])?;
        if !(m >= T::lit(2.0)) || !m.is_finite() {
            return Err(GeometryError::InvalidParameters(format!(
                "superellipse exponent {m} must be at least 2"
            )));
        }
        let pieces = vec![Piece::Curve(ParamCurve::new(CurveKind::Superellipse { a, b, m }))];
        Ok(Self::assemble(Shape::Superellipse { a, b, m }, pieces, [T::zero(); 2]))
    }

    pub fn stadium(r: T, l: T) -> Result<Self, GeometryError> {
        positive(&[r])?;
        if !(l >= T::zero()) {
            return Err(GeometryError::InvalidParameters("stadium length must be >= 0".into()));
        }
        let half = T::lit(0.5) * l;
        let pi = T::lit(PI);
        let pieces = vec![
            Piece::Segment {
                a: [-half, -r],
                b: [half, -r],
            },
            Piece::Arc {
                center: [half, T::zero()],
                radius: r,
                start: -T::lit(0.5) * pi,
                sweep: pi,
            },
            Piece::Segment {
                a: [half, r],
                b: [-half, r],
            },
            Piece::Arc {
                center: [-half, T::zero()],
                radius: r,
                start: T::lit(0.5) * pi,
                sweep: pi,
            },
        ];
        let pieces = pieces.into_iter().filter(|p| p.length() > T::zero()).collect();
        Ok(Self::assemble(Shape::Stadium { r, l }, pieces, [T::zero(); 2]))
    }

    /// Simple polygon; clockwise input is reversed.
    pub fn polygon(mut vertices: Vec<[T; 2]>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::InvalidParameters(
                "polygon needs at least three vertices".into(),
            ));
        }
        let signed = (0..n).fold(T::zero(), |acc, i| {
            acc + cross(&vertices[i], &vertices[(i + 1) % n])
        });
        if signed == T::zero() {
            return Err(GeometryError::InvalidParameters("polygon has zero area".into()));
        }
        if signed < T::zero() {
            vertices.reverse();
        }
        if !is_simple(&vertices) {
            return Err(GeometryError::InvalidParameters("polygon is not simple".into()));
        }
        let c = vertices.iter().fold([T::zero(); 2], |acc, v| [acc[0] + v[0], acc[1] + v[1]]);
        let nf = T::from_count(n);
        let center = [c[0] / nf, c[1] / nf];
        let pieces = (0..n)
            .map(|i| Piece::Segment {
                a: vertices[i],
                b: vertices[(i + 1) % n],
            })
            .collect();
        Ok(Self::assemble(Shape::Polygon { vertices }, pieces, center))
    }

    fn assemble(shape: Shape<T>, pieces: Vec<Piece<T>>, center: [T; 2]) -> Self {
        let mut offsets = vec![T::zero()];
        for p in &pieces {
            let last = *offsets.last().unwrap();
            offsets.push(last + p.length());
        }
        let np = pieces.len();
        let corners = (0..np)
            .map(|k| {
                let prev = &pieces[(k + np - 1) % np];
                let (_, d_in, _) = prev.eval_u(T::one());
                let (_, d_out, _) = pieces[k].eval_u(T::zero());
                let turn = cross(&d_in, &d_out) / (norm2(&d_in) * norm2(&d_out));
                let dot = d_in[0] * d_out[0] + d_in[1] * d_out[1];
                turn.abs() > T::lit(1e-12) || dot < T::zero()
            })
            .collect();
        let mut dom = Self {
            shape,
            pieces,
            offsets,
            corners,
            convex: false,
            area: T::zero(),
            diameter: T::zero(),
            center,
        };
        dom.area = dom
            .interior_quadrature(8)
            .iter()
            .fold(T::zero(), |a, (_, w)| a + *w);
        dom.convex = dom.check_convex();
        let samples = dom.boundary_samples(720);
        let mut d = T::zero();
        for (i, p) in samples.iter().enumerate() {
            for q in &samples[i + 1..] {
                d = d.max(norm2(&[p[0] - q[0], p[1] - q[1]]));
            }
        }
        dom.diameter = d;
        dom
    }

    fn check_convex(&self) -> bool {
        let tol = T::lit(-1e-12);
        let corners_ok = self.pieces.iter().enumerate().all(|(k, _)| {
            let np = self.pieces.len();
            let (_, d_in, _) = self.pieces[(k + np - 1) % np].eval_u(T::one());
            let (_, d_out, _) = self.pieces[k].eval_u(T::zero());
            cross(&d_in, &d_out) >= tol * norm2(&d_in) * norm2(&d_out)
        });
        let smooth_ok = self.pieces.iter().all(|p| {
            (0..=256).all(|i| p.eval_u(T::from_count(i) / T::lit(256.0)).2 >= tol)
        });
        corners_ok && smooth_ok
    }

    pub fn shape(&self) -> &Shape<T> {
        &self.shape
    }

    pub fn convex(&self) -> bool {
        self.convex
    }

    pub fn area(&self) -> T {
        self.area
    }

    pub fn perimeter(&self) -> T {
        *self.offsets.last().unwrap()
    }

    pub fn diameter(&self) -> T {
        self.diameter
    }

    /// The point the interior quadrature fans out from; inside for convex domains.
    pub fn center(&self) -> [T; 2] {
        self.center
    }

    /// True when the boundary has no corners.
    pub fn is_smooth(&self) -> bool {
        !self.corners.iter().any(|c| *c)
    }

    /// Arclength positions where the boundary switches pieces (curvature may jump).
    pub fn piece_breaks(&self) -> &[T] {
        &self.offsets
    }

    fn locate(&self, s: T) -> (usize, T) {
        let per = self.perimeter();
        let mut s = s % per;
        if s < T::zero() {
            s += per;
        }
        let k = self
            .offsets
            .partition_point(|o| *o <= s)
            .saturating_sub(1)
            .min(self.pieces.len() - 1);
        (k, s - self.offsets[k])
    }

    fn is_corner_at(&self, s: T) -> bool {
        let per = self.perimeter();
        let tol = T::lit(1e-12) * per;
        let mut s = s % per;
        if s < T::zero() {
            s += per;
        }
        self.offsets[..self.pieces.len()]
            .iter()
            .zip(&self.corners)
            .any(|(o, c)| *c && ((s - *o).abs() <= tol || (per - s + *o).abs() <= tol))
    }

    /// Boundary point and frame at arclength `s` (taken modulo the perimeter).
    pub fn boundary_at(&self, s: T) -> BoundaryPoint<T> {
        let (k, local) = self.locate(s);
        let piece = &self.pieces[k];
        let u = piece.u_at(local);
        let (x, d, kappa) = piece.eval_u(u);
        let sp = norm2(&d);
        let tangent = [d[0] / sp, d[1] / sp];
        BoundaryPoint {
            point: x,
            tangent,
            normal: [tangent[1], -tangent[0]],
            curvature: if self.is_corner_at(s) { None } else { Some(kappa) },
        }
    }

    /// Signed curvature at arclength `s`; an error at corners.
    pub fn curvature(&self, s: T) -> Result<T, GeometryError> {
        self.boundary_at(s)
            .curvature
            .ok_or(GeometryError::Corner(s.as_f64()))
    }

    /// `∫_{∂Ω} κ ds` by adaptive quadrature on each piece.
    pub fn total_curvature(&self) -> Result<T, GeometryError> {
        let mut total = T::zero();
        for p in &self.pieces {
            let n = p.panels();
            for i in 0..n {
                let (u0, u1) = (T::from_count(i) / T::from_count(n), T::from_count(i + 1) / T::from_count(n));
                total += numerics::integrate(
                    |u| {
                        let (_, d, k) = p.eval_u(u);
                        k * norm2(&d)
                    },
                    u0,
                    u1,
                    T::lit(1e-15),
                    T::lit(1e-13),
                )
                .map_err(|e| GeometryError::Quadrature(e.achieved))?;
            }
        }
        Ok(total)
    }

    /// `n` boundary points equally spaced in arclength, starting at `s = 0`.
    pub fn boundary_samples(&self, n: usize) -> Vec<[T; 2]> {
        let per = self.perimeter();
        (0..n)
            .map(|i| self.boundary_at(per * T::from_count(i) / T::from_count(n)).point)
            .collect()
    }

    /// Area quadrature `(point, weight)`: Gauss rules of the given order on the fan
    /// `x = c + ρ(γ(u) − c)` over every boundary panel.
    pub fn interior_quadrature(&self, order: usize) -> Vec<([T; 2], T)> {
        let (gx, gw) = gauss_legendre::<T>(order);
        let half = T::lit(0.5);
        let c = self.center;
        let mut out = Vec::new();
        for p in &self.pieces {
            let n = p.panels();
            for i in 0..n {
                let (u0, u1) = (T::from_count(i) / T::from_count(n), T::from_count(i + 1) / T::from_count(n));
                for (xu, wu) in gx.iter().zip(&gw) {
                    let u = half * (u0 + u1) + half * (u1 - u0) * *xu;
                    let (g, dg, _) = p.eval_u(u);
                    let rel = [g[0] - c[0], g[1] - c[1]];
                    let jac = cross(&rel, &dg) * half * (u1 - u0);
                    for (xr, wr) in gx.iter().zip(&gw) {
                        let rho = half * (T::one() + *xr);
                        let w = *wu * *wr * half * rho * jac;
                        out.push(([c[0] + rho * rel[0], c[1] + rho * rel[1]], w));
                    }
                }
            }
        }
        out
    }

    /// Boundary quadrature `(point, outward normal, weight)`.
    pub fn boundary_quadrature(&self, order: usize) -> Vec<([T; 2], [T; 2], T)> {
        let (gx, gw) = gauss_legendre::<T>(order);
        let half = T::lit(0.5);
        let mut out = Vec::new();
        for p in &self.pieces {
            let n = p.panels();
            for i in 0..n {
                let (u0, u1) = (T::from_count(i) / T::from_count(n), T::from_count(i + 1) / T::from_count(n));
                for (xu, wu) in gx.iter().zip(&gw) {
                    let u = half * (u0 + u1) + half * (u1 - u0) * *xu;
                    let (g, dg, _) = p.eval_u(u);
                    let sp = norm2(&dg);
                    out.push((g, [dg[1] / sp, -dg[0] / sp], *wu * sp * half * (u1 - u0)));
                }
            }
        }
        out
    }

    /// Boundary polyline with spacing at most `h`; every piece end is a vertex.
    /// Closed curves get an even number of points so that the domain symmetries survive.
    pub fn boundary_polyline(&self, h: T) -> Vec<[T; 2]> {
        let mut out = Vec::new();
        for (k, p) in self.pieces.iter().enumerate() {
            let len = p.length();
            let mut n = (len / h).ceil().as_f64().max(1.0) as usize;
            if self.pieces.len() == 1 && n % 2 == 1 {
                n += 1;
            }
            for i in 0..n {
                let s = self.offsets[k] + len * T::from_count(i) / T::from_count(n);
                out.push(self.boundary_at(s).point);
            }
        }
        out
    }

    /// Point-in-domain test by winding number against a fine polyline.
    pub fn contains(&self, x: &[T; 2]) -> bool {
        let poly = self.boundary_polyline(self.perimeter() / T::lit(4096.0));
        winding_inside(&poly, x)
    }

    /// Lipschitz characteristic `(L, R)`: `R` is half the distance from the center to
    /// the boundary, and `L = tan(spread/2)` with `spread` the largest angle between
    /// outward normals of boundary points closer than `R` (corners contribute both
    /// one-sided normals). Infinite when the spread reaches `π`.
    pub fn lipschitz_characteristic(&self) -> (T, T) {
        let n = 720;
        let per = self.perimeter();
        let mut pts: Vec<([T; 2], [T; 2])> = Vec::new();
        for i in 0..n {
            let s = per * T::from_count(i) / T::from_count(n);
            let bp = self.boundary_at(s);
            pts.push((bp.point, bp.normal));
        }
        for (k, p) in self.pieces.iter().enumerate() {
            if !self.corners[k] {
                continue;
            }
            let np = self.pieces.len();
            let (x, d_in, _) = self.pieces[(k + np - 1) % np].eval_u(T::one());
            let (_, d_out, _) = p.eval_u(T::zero());
            for d in [d_in, d_out] {
                let sp = norm2(&d);
                pts.push((x, [d[1] / sp, -d[0] / sp]));
            }
        }
        let c = self.center;
        let r = pts
            .iter()
            .map(|(x, _)| norm2(&[x[0] - c[0], x[1] - c[1]]))
            .fold(T::infinity(), T::min)
            * T::lit(0.5);
        let mut spread = T::zero();
        for (i, (x, nx)) in pts.iter().enumerate() {
            for (y, ny) in &pts[i + 1..] {
                if norm2(&[x[0] - y[0], x[1] - y[1]]) < r {
                    let cosang = (nx[0] * ny[0] + nx[1] * ny[1]).max(-T::one()).min(T::one());
                    spread = spread.max(cosang.acos());
                }
            }
        }
        let l = if spread >= T::lit(PI) - T::lit(1e-12) {
            T::infinity()
        } else {
            (T::lit(0.5) * spread).tan()
        };
        (l, r)
    }
}

fn positive<T: Real>(xs: &[T]) -> Result<(), GeometryError> {
    if xs.iter().all(|x| *x > T::zero() && x.is_finite()) {
        Ok(())
    } else {
        Err(GeometryError::InvalidParameters("lengths must be positive and finite".into()))
    }
}

fn is_simple<T: Real>(v: &[[T; 2]]) -> bool {
    let n = v.len();
    let orient = |a: &[T; 2], b: &[T; 2], c: &[T; 2]| {
        cross(&[b[0] - a[0], b[1] - a[1]], &[c[0] - a[0], c[1] - a[1]])
    };
    for i in 0..n {
        let (a, b) = (v[i], v[(i + 1) % n]);
        for j in (i + 2)..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            let (c, d) = (v[j], v[(j + 1) % n]);
            let d1 = orient(&a, &b, &c);
            let d2 = orient(&a, &b, &d);
            let d3 = orient(&c, &d, &a);
            let d4 = orient(&c, &d, &b);
            if d1 * d2 < T::zero() && d3 * d4 < T::zero() {
                return false;
            }
        }
    }
    true
}

pub(crate) fn winding_inside<T: Real>(poly: &[[T; 2]], x: &[T; 2]) -> bool {
    let n = poly.len();
    let mut wn = 0i32;
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        let side = cross(&[b[0] - a[0], b[1] - a[1]], &[x[0] - a[0], x[1] - a[1]]);
        if a[1] <= x[1] {
            if b[1] > x[1] && side > T::zero() {
                wn += 1;
            }
        } else if b[1] <= x[1] && side < T::zero() {
            wn -= 1;
        }
    }
    wn != 0
}

#[cfg(test)]
mod tests {
    use super::*;

    type D = Domain2D<f64>;

    #[test]
    fn circle_curvature_and_measures() {
        let d = D::disk(2.0).unwrap();
        assert!((d.curvature(1.3).unwrap() - 0.5).abs() < 1e-15);
        assert!((d.area() - 4.0 * PI).abs() < 1e-12);
        assert!((d.perimeter() - 4.0 * PI).abs() < 1e-14);
        assert!((d.diameter() - 4.0).abs() < 1e-9);
        assert!(d.convex() && d.is_smooth());
    }

    #[test]
    fn ellipse_curvature_at_vertex() {
        let (a, b) = (2.0, 0.5);
        let d = D::ellipse(a, b).unwrap();
        assert!((d.curvature(0.0).unwrap() - a / (b * b)).abs() < 1e-12);
        // perimeter against a high-order quadrature of the speed
        let per = numerics::integrate(
            |t: f64| (a * a * t.sin().powi(2) + b * b * t.cos().powi(2)).sqrt(),
            0.0,
            2.0 * PI,
            1e-14,
            1e-14,
        )
        .unwrap();
        assert!((d.perimeter() - per).abs() < 1e-11);
        assert!((d.area() - PI * a * b).abs() < 1e-12);
    }

    #[test]
    fn arclength_inversion_is_consistent() {
        let d = D::superellipse(1.0, 0.7, 3.5).unwrap();
        let per = d.perimeter();
        // chord lengths of a fine sampling approach the arclength step
        let n = 4000;
        let pts = d.boundary_samples(n);
        let chord: f64 = (0..n)
            .map(|i| {
                let (p, q) = (pts[i], pts[(i + 1) % n]);
                ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()
            })
            .sum();
        assert!((chord - per).abs() < 1e-5 * per);
    }

    #[test]
    fn polygon_edges_and_corners() {
        let sq = D::polygon(vec![[0.0, 0.0], [0.0, 1.0], [1.0, 1.0], [1.0, 0.0]]).unwrap();
        assert!((sq.area() - 1.0).abs() < 1e-14);
        assert_eq!(sq.curvature(0.5).unwrap(), 0.0);
        assert!(matches!(sq.curvature(1.0), Err(GeometryError::Corner(_))));
        assert!(matches!(sq.curvature(0.0), Err(GeometryError::Corner(_))));
        assert!(sq.convex() && !sq.is_smooth());
        let (l, _) = sq.lipschitz_characteristic();
        assert!((l - 1.0).abs() < 1e-9);
    }

    #[test]
    fn stadium_is_smooth_and_convex() {
        let st = D::stadium(0.5, 1.0).unwrap();
        assert!(st.is_smooth() && st.convex());
        assert!((st.perimeter() - (PI + 2.0)).abs() < 1e-14);
        assert!((st.area() - (PI * 0.25 + 1.0)).abs() < 1e-13);
        assert_eq!(st.curvature(0.5).unwrap(), 0.0);
        assert!((st.curvature(1.0 + 0.3).unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn nonconvex_polygon_is_flagged() {
        let l = D::polygon(vec![
            [0.0, 0.0],
            [2.0, 0.0],
            [2.0, 1.0],
            [1.0, 1.0],
            [1.0, 2.0],
            [0.0, 2.0],
        ])
        .unwrap();
        assert!(!l.convex());
        assert!((l.area() - 3.0).abs() < 1e-13);
        assert!(l.contains(&[0.5, 1.5]) && !l.contains(&[1.5, 1.5]));
    }

    #[test]
    fn gauss_bonnet_on_smooth_shapes() {
        for d in [
            D::disk(0.3).unwrap(),
            D::ellipse(1.0, 0.25).unwrap(),
            D::superellipse(1.0, 1.0, 4.0).unwrap(),
            D::superellipse(1.2, 0.8, 2.5).unwrap(),
            D::stadium(1.0, 2.0).unwrap(),
        ] {
            let tc = d.total_curvature().unwrap();
            assert!((tc - 2.0 * PI).abs() < 1e-9, "{:?}: {tc}", d.shape());
        }
    }
}
