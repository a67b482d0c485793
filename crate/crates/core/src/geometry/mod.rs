//! Parametrized mid-surfaces: charts, fundamental forms, thin-shell coordinates and
//! surface quadrature.
//!
//! Sign convention: the shape operator is the derivative of the unit normal,
//! `eta . Pi tau = eta . d_tau n`, so the sphere with outward normal has `Pi = Id / R`.

mod family;
pub mod grid;
mod jet;
mod profile;
pub mod quadrature;
pub mod spline;

use nalgebra::{Matrix2, Vector3};
use serde::{Deserialize, Serialize};

pub use family::{CapChart, ChartJet, RevolutionProfile, SurfaceFamily};
pub use grid::Grid;
pub use jet::VectorJet;
pub use profile::{ScalarJet, ScalarProfile};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DerivativeMode {
    /// Closed-form chart derivatives.
    #[default]
    Analytic,
    /// Central differences of the chart with the grid spacing as step; order 2 or 4.
    FiniteDifference { order: usize },
}

fn default_quad_order() -> usize {
    4
}

/// Serializable description of a surface patch.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceDescriptor {
    #[serde(flatten)]
    pub family: SurfaceFamily,
    #[serde(default)]
    pub domain: Option<[[f64; 2]; 2]>,
    pub grid: [usize; 2],
    #[serde(default)]
    pub derivative_mode: DerivativeMode,
    /// Gauss points per cell and direction.
    #[serde(default = "default_quad_order")]
    pub quad_order: usize,
    #[serde(default)]
    pub flip_normal: bool,
}

impl SurfaceDescriptor {
    pub fn new(family: SurfaceFamily, grid: usize) -> Self {
        Self {
            family,
            domain: None,
            grid: [grid, grid],
            derivative_mode: DerivativeMode::Analytic,
            quad_order: default_quad_order(),
            flip_normal: false,
        }
    }

    pub fn plate(grid: usize) -> Self {
        Self::new(SurfaceFamily::Plate, grid)
    }

    pub fn with_domain(mut self, domain: [[f64; 2]; 2]) -> Self {
        self.domain = Some(domain);
        self
    }

    pub fn with_quad_order(mut self, q: usize) -> Self {
        self.quad_order = q;
        self
    }

    /// Domain with defaults materialized.
    pub fn resolved_domain(&self) -> [[f64; 2]; 2] {
        self.domain.unwrap_or_else(|| self.family.default_domain())
    }
}

/// First and second fundamental forms at a point, in the chart basis `a_1, a_2`.
#[derive(Clone, Copy, Debug)]
pub struct FundamentalForms<T: Real> {
    pub chart: ChartJet<T>,
    pub a: [Vector3<T>; 2],
    pub n: Vector3<T>,
    /// Metric `g_ij = a_i . a_j`.
    pub g: Matrix2<T>,
    /// Second fundamental form `b_ij = a_i . d_j n`.
    pub b: Matrix2<T>,
    /// Shape operator `g^{-1} b` acting on chart coordinates.
    pub shape: Matrix2<T>,
    /// Principal curvatures, largest first.
    pub kappa: [T; 2],
    /// `d_u n`, `d_v n`.
    pub dn: [Vector3<T>; 2],
    /// Columns are the chart coordinates of an orthonormal tangent frame `e_1, e_2`.
    pub frame: Matrix2<T>,
    pub e: [Vector3<T>; 2],
    pub sqrt_g: T,
}

impl<T: Real> FundamentalForms<T> {
    pub fn from_chart(chart: ChartJet<T>, orientation: T) -> Result<Self> {
        let (ru, rv) = (chart.ru, chart.rv);
        let m = ru.cross(&rv);
        let area = m.norm();
        let scale = ru.norm() * rv.norm();
        if !(area > T::lit(1e-12) * scale) || !(scale > T::zero()) {
            return Err(Error::DegenerateChart(format!(
                "|r_u x r_v| = {:e}",
                area.as_f64()
            )));
        }
        let n = m * (orientation / area);
        let g = Matrix2::new(ru.dot(&ru), ru.dot(&rv), rv.dot(&ru), rv.dot(&rv));
        let b = Matrix2::new(
            -chart.ruu.dot(&n),
            -chart.ruv.dot(&n),
            -chart.ruv.dot(&n),
            -chart.rvv.dot(&n),
        );
        let ginv = g
            .try_inverse()
            .ok_or_else(|| Error::DegenerateChart("singular metric".into()))?;
        let shape = ginv * b;
        let dn = [ru * shape[(0, 0)] + rv * shape[(1, 0)], ru * shape[(0, 1)] + rv * shape[(1, 1)]];
        let l1 = ru.norm();
        let e1 = ru / l1;
        let w = rv - e1 * rv.dot(&e1);
        let l2 = w.norm();
        let e2 = w / l2;
        let frame = Matrix2::new(T::one() / l1, -rv.dot(&e1) / (l1 * l2), T::zero(), T::one() / l2);
        let ortho = frame.transpose() * b * frame;
        let kappa = sym_eigenvalues(&ortho);
        Ok(Self {
            chart,
            a: [ru, rv],
            n,
            g,
            b,
            shape,
            kappa,
            dn,
            frame,
            e: [e1, e2],
            sqrt_g: area,
        })
    }

    /// Components `e_a . X e_b` of a covariant chart tensor `X_ij` in the orthonormal frame.
    #[inline]
    pub fn to_orthonormal(&self, x: &Matrix2<T>) -> Matrix2<T> {
        self.frame.transpose() * x * self.frame
    }

    /// Shape operator in the orthonormal frame (symmetric).
    pub fn shape_orthonormal(&self) -> Matrix2<T> {
        self.to_orthonormal(&self.b)
    }

    pub fn ginv(&self) -> Matrix2<T> {
        self.g.try_inverse().unwrap_or_else(Matrix2::zeros)
    }

    /// Dual basis `a^i = g^{ij} a_j`.
    pub fn dual(&self) -> [Vector3<T>; 2] {
        let gi = self.ginv();
        [
            self.a[0] * gi[(0, 0)] + self.a[1] * gi[(0, 1)],
            self.a[0] * gi[(1, 0)] + self.a[1] * gi[(1, 1)],
        ]
    }

    /// `det(Id + t Pi)`, the thickness-direction volume factor.
    pub fn volume_factor(&self, t: T) -> T {
        (T::one() + t * self.kappa[0]) * (T::one() + t * self.kappa[1])
    }
}

/// Eigenvalues of a symmetric 2x2 matrix, largest first.
pub fn sym_eigenvalues<T: Real>(m: &Matrix2<T>) -> [T; 2] {
    let half = T::lit(0.5);
    let off = (m[(0, 1)] + m[(1, 0)]) * half;
    let mean = (m[(0, 0)] + m[(1, 1)]) * half;
    let d = (m[(0, 0)] - m[(1, 1)]) * half;
    let r = (d * d + off * off).sqrt();
    [mean + r, mean - r]
}

fn fd_chart_jet<T: Real>(family: &SurfaceFamily, u: T, v: T, hu: T, hv: T, order: usize) -> ChartJet<T> {
    let r = |du: T, dv: T| family.chart_jet(u + du, v + dv).r;
    let z = T::zero();
    let two = T::lit(2.0);
    let (ru, rv, ruu, rvv) = if order >= 4 {
        let c = T::lit(12.0);
        let d1 = |s: &dyn Fn(T) -> Vector3<T>, h: T| {
            (s(-two * h) - s(two * h) + (s(h) - s(-h)) * T::lit(8.0)) / (c * h)
        };
        let d2 = |s: &dyn Fn(T) -> Vector3<T>, h: T| {
            ((s(h) + s(-h)) * T::lit(16.0) - s(two * h) - s(-two * h) - s(z) * T::lit(30.0)) / (c * h * h)
        };
        let su = |x: T| r(x, z);
        let sv = |y: T| r(z, y);
        (d1(&su, hu), d1(&sv, hv), d2(&su, hu), d2(&sv, hv))
    } else {
        (
            (r(hu, z) - r(-hu, z)) / (two * hu),
            (r(z, hv) - r(z, -hv)) / (two * hv),
            (r(hu, z) - r(z, z) * two + r(-hu, z)) / (hu * hu),
            (r(z, hv) - r(z, z) * two + r(z, -hv)) / (hv * hv),
        )
    };
    let ruv = if order >= 4 {
        let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut acc = Vector3::zeros();
        for (a, wa) in w {
            for (b, wb) in w {
                acc += r(hu * T::lit(a), hv * T::lit(b)) * T::lit(wa * wb);
            }
        }
        acc / (T::lit(144.0) * hu * hv)
    } else {
        (r(hu, hv) - r(hu, -hv) - r(-hu, hv) + r(-hu, -hv)) / (T::lit(4.0) * hu * hv)
    };
    ChartJet { r: r(z, z), ru, rv, ruu, ruv, rvv }
}

/// Surface quadrature point with its geometry.
#[derive(Clone, Copy, Debug)]
pub struct QuadPoint<T: Real> {
    pub uv: [T; 2],
    /// Parameter-space weight (without the area element).
    pub weight: T,
    pub forms: FundamentalForms<T>,
}

impl<T: Real> QuadPoint<T> {
    /// Weight including `sqrt(det g)`.
    #[inline]
    pub fn area_weight(&self) -> T {
        self.weight * self.forms.sqrt_g
    }
}

/// A thin-shell coordinate `x(uv) + t n(uv)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TubularPoint<T: Real> {
    pub uv: [T; 2],
    pub t: T,
}

impl<T: Real> TubularPoint<T> {
    pub fn position(&self, patch: &SurfacePatch<T>) -> Result<Vector3<T>> {
        let f = patch.frames(self.uv)?;
        Ok(f.chart.r + f.n * self.t)
    }
}

/// An immutable surface patch: chart, node grid, cached node geometry and quadrature.
#[derive(Clone, Debug)]
pub struct SurfacePatch<T: Real> {
    descriptor: SurfaceDescriptor,
    grid: Grid<T>,
    orientation: T,
    node_forms: Vec<FundamentalForms<T>>,
    pole_nodes: Vec<bool>,
    quad: Vec<QuadPoint<T>>,
}

/// Builds and validates a patch from its descriptor.
pub fn build_surface<T: Real>(descriptor: &SurfaceDescriptor) -> Result<SurfacePatch<T>> {
    SurfacePatch::new(descriptor.clone())
}

impl<T: Real> SurfacePatch<T> {
    pub fn new(descriptor: SurfaceDescriptor) -> Result<Self> {
        descriptor.family.validate()?;
        if descriptor.grid[0] < 8 || descriptor.grid[1] < 8 {
            return Err(Error::BadDescriptor(format!(
                "grid {:?} is below the 8x8 minimum",
                descriptor.grid
            )));
        }
        if descriptor.quad_order == 0 {
            return Err(Error::BadDescriptor("quadrature order must be positive".into()));
        }
        if let DerivativeMode::FiniteDifference { order } = descriptor.derivative_mode {
            if order != 2 && order != 4 {
                return Err(Error::BadDescriptor(format!("finite-difference order {order} unsupported")));
            }
        }
        let dom = descriptor.resolved_domain();
        if !(dom[0][1] > dom[0][0] && dom[1][1] > dom[1][0]) {
            return Err(Error::BadDescriptor(format!("empty domain {dom:?}")));
        }
        let grid = Grid::new(
            descriptor.grid,
            [T::lit(dom[0][0]), T::lit(dom[1][0])],
            [T::lit(dom[0][1]), T::lit(dom[1][1])],
        );
        let mut orientation = descriptor.family.default_orientation();
        if descriptor.flip_normal {
            orientation = -orientation;
        }
        let mut patch = Self {
            descriptor,
            grid,
            orientation: T::lit(orientation),
            node_forms: Vec::new(),
            pole_nodes: Vec::new(),
            quad: Vec::new(),
        };
        let poles = patch.descriptor.family.pole_edges();
        let mut node_forms = Vec::with_capacity(patch.grid.len());
        let mut pole_nodes = Vec::with_capacity(patch.grid.len());
        for k in 0..patch.grid.len() {
            let (i, j) = patch.grid.ij(k);
            let on_pole = poles.iter().any(|&(axis, side)| {
                let idx = if axis == 0 { i } else { j };
                idx == if side == 0 { 0 } else { patch.grid.n[axis] - 1 }
            });
            let mut uv = patch.grid.node(k);
            if on_pole {
                // coordinate pole: sample the geometry just inside the edge
                let (axis, side) = poles[0];
                let shift = patch.grid.spacing(axis) * T::lit(1e-6);
                uv[axis] += if side == 0 { shift } else { -shift };
            }
            let f = patch.frames_unchecked(uv).map_err(|e| match e {
                Error::DegenerateChart(m) => Error::DegenerateChart(format!("node {k}: {m}")),
                e => e,
            })?;
            let tol = T::lit(1e-12) * (T::one() + f.a[0].norm() + f.a[1].norm());
            if f.a[0].dot(&f.n).abs() > tol || f.a[1].dot(&f.n).abs() > tol {
                return Err(Error::DegenerateChart(format!("node {k}: normal not orthogonal to frame")));
            }
            node_forms.push(f);
            pole_nodes.push(on_pole);
        }
        patch.node_forms = node_forms;
        patch.pole_nodes = pole_nodes;
        patch.quad = patch.build_quadrature()?;
        Ok(patch)
    }

    fn build_quadrature(&self) -> Result<Vec<QuadPoint<T>>> {
        let q = self.descriptor.quad_order;
        let [n0, n1] = self.grid.n;
        let (hu, hv) = (self.grid.spacing(0), self.grid.spacing(1));
        let (xs, ws) = quadrature::gauss_legendre::<T>(q);
        let half = T::lit(0.5);
        let mut out = Vec::with_capacity((n0 - 1) * (n1 - 1) * q * q);
        for cj in 0..n1 - 1 {
            for ci in 0..n0 - 1 {
                let u0 = self.grid.lo[0] + hu * T::lit(ci as f64);
                let v0 = self.grid.lo[1] + hv * T::lit(cj as f64);
                for b in 0..q {
                    for a in 0..q {
                        let uv = [u0 + hu * half * (xs[a] + T::one()), v0 + hv * half * (xs[b] + T::one())];
                        let forms = self.frames_unchecked(uv)?;
                        out.push(QuadPoint { uv, weight: ws[a] * ws[b] * hu * hv * half * half, forms });
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn descriptor(&self) -> &SurfaceDescriptor {
        &self.descriptor
    }

    pub fn family(&self) -> &SurfaceFamily {
        &self.descriptor.family
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn orientation(&self) -> T {
        self.orientation
    }

    pub fn is_plate(&self) -> bool {
        matches!(self.descriptor.family, SurfaceFamily::Plate)
    }

    pub fn has_pole(&self) -> bool {
        self.pole_nodes.iter().any(|&p| p)
    }

    /// Node-based solvers need a genuine immersion at every node.
    pub fn require_regular_nodes(&self) -> Result<()> {
        if self.has_pole() {
            Err(Error::DegenerateChart(
                "chart has a coordinate pole; node-based operations need a regular chart".into(),
            ))
        } else {
            Ok(())
        }
    }

    pub fn node_forms(&self) -> &[FundamentalForms<T>] {
        &self.node_forms
    }

    pub fn quad_points(&self) -> &[QuadPoint<T>] {
        &self.quad
    }

    /// Chart jet according to the descriptor's derivative mode.
    pub fn chart_jet(&self, uv: [T; 2]) -> ChartJet<T> {
        match self.descriptor.derivative_mode {
            DerivativeMode::Analytic => self.descriptor.family.chart_jet(uv[0], uv[1]),
            DerivativeMode::FiniteDifference { order } => fd_chart_jet(
                &self.descriptor.family,
                uv[0],
                uv[1],
                self.grid.spacing(0),
                self.grid.spacing(1),
                order,
            ),
        }
    }

    fn frames_unchecked(&self, uv: [T; 2]) -> Result<FundamentalForms<T>> {
        FundamentalForms::from_chart(self.chart_jet(uv), self.orientation)
    }

    /// Fundamental forms at a parameter point inside the domain.
    pub fn frames(&self, uv: [T; 2]) -> Result<FundamentalForms<T>> {
        if !self.grid.contains(uv) {
            return Err(Error::OutOfDomain(uv[0].as_f64(), uv[1].as_f64()));
        }
        self.frames_unchecked(uv)
    }

    /// Surface area by quadrature.
    pub fn area(&self) -> T {
        surface_integral(self, |_| T::one())
    }

    /// Largest principal curvature magnitude over nodes and quadrature points.
    pub fn max_abs_curvature(&self) -> T {
        self.node_forms
            .iter()
            .chain(self.quad.iter().map(|q| &q.forms))
            .fold(T::zero(), |m, f| m.max(f.kappa[0].abs()).max(f.kappa[1].abs()))
    }

    /// Checks `h max|kappa| < 1` and returns that product.
    pub fn check_tubular(&self, h: T) -> Result<T> {
        let p = h * self.max_abs_curvature();
        if !(h > T::zero()) || !(p < T::one()) {
            return Err(Error::TubularViolation(p.as_f64()));
        }
        let half = h * T::lit(0.5);
        for f in self.quad.iter().map(|q| &q.forms) {
            if !(f.volume_factor(half) > T::zero() && f.volume_factor(-half) > T::zero()) {
                return Err(Error::TubularViolation(p.as_f64()));
            }
        }
        Ok(p)
    }

    /// Trapezoidal area weights at the nodes (`sqrt(det g)` included).
    pub fn node_area_weights(&self) -> Vec<T> {
        self.grid
            .trapezoid_weights()
            .into_iter()
            .zip(&self.node_forms)
            .map(|(w, f)| w * f.sqrt_g)
            .collect()
    }
}

/// Tensor Gauss–Legendre quadrature of `f * sqrt(det g)` over the parameter domain.
///
/// Points are visited in a fixed order so the result is bit-reproducible.
pub fn surface_integral<T: Real, F>(patch: &SurfacePatch<T>, f: F) -> T
where
    F: Fn(&QuadPoint<T>) -> T,
{
    patch
        .quad_points()
        .iter()
        .fold(T::zero(), |acc, q| acc + f(q) * q.area_weight())
}

/// Trapezoidal integral of node data against the area element.
pub fn node_integral<T: Real>(patch: &SurfacePatch<T>, values: &[T]) -> Result<T> {
    if values.len() != patch.grid().len() {
        return Err(Error::ShapeMismatch(format!(
            "{} values for {} nodes",
            values.len(),
            patch.grid().len()
        )));
    }
    Ok(patch
        .node_area_weights()
        .iter()
        .zip(values)
        .fold(T::zero(), |acc, (w, f)| acc + *w * *f))
}

#[derive(Clone, Debug, Serialize)]
pub struct EllipticityReport {
    pub is_elliptic: bool,
    /// Uniformity constant `max(kappa_max, 1 / kappa_min)` on `|kappa|`; `None` if not elliptic.
    pub c: Option<f64>,
    pub min_kappa: f64,
    pub max_kappa: f64,
}

pub const DEFAULT_ELLIPTICITY_THRESHOLD: f64 = 1e-6;

/// Uniform definiteness of the shape operator over the nodes.
pub fn ellipticity_check<T: Real>(patch: &SurfacePatch<T>, threshold: f64) -> EllipticityReport {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for f in patch.node_forms() {
        lo = lo.min(f.kappa[1].as_f64());
        hi = hi.max(f.kappa[0].as_f64());
    }
    let positive = lo >= threshold;
    let negative = hi <= -threshold;
    let is_elliptic = positive || negative;
    let c = if positive {
        Some(hi.max(1.0 / lo))
    } else if negative {
        Some((-lo).max(-1.0 / hi))
    } else {
        None
    };
    EllipticityReport { is_elliptic, c, min_kappa: lo, max_kappa: hi }
}

#[cfg(test)]
mod tests;
