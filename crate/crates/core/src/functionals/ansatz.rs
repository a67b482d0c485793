//! Thin-shell deformations `u(x + t n) = c_0(x) + t c_1(x) + t^2 c_2(x) + t^3 c_3(x)`.

use std::fmt::Debug;
use std::sync::Arc;

use nalgebra::{Matrix2, Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::geometry::{SurfacePatch, VectorJet};
use crate::kinematics::MidsurfaceDeformation;
use crate::material::Material;
use crate::scalar::Real;

/// Coefficient field of an ansatz. Only values are required; chart derivatives default to
/// fourth-order central differences with steps proportional to the grid spacing.
pub trait CoefficientField<T: Real>: Send + Sync + Debug {
    fn value(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vector3<T>;

    fn gradient(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> [Vector3<T>; 2] {
        let f = |d: [T; 2]| self.value(patch, [uv[0] + d[0], uv[1] + d[1]]);
        let mut out = [Vector3::zeros(); 2];
        for (axis, o) in out.iter_mut().enumerate() {
            let h = T::fd_step() * patch.grid().spacing(axis);
            let e = |s: T| if axis == 0 { [s, T::zero()] } else { [T::zero(), s] };
            let two = T::lit(2.0);
            *o = ((f(e(h)) - f(e(-h))) * T::lit(8.0) - f(e(two * h)) + f(e(-two * h))) / (T::lit(12.0) * h);
        }
        out
    }

    fn jet(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> VectorJet<T> {
        let f = |du: T, dv: T| self.value(patch, [uv[0] + du, uv[1] + dv]);
        let (hu, hv) = (
            T::fd_step() * T::lit(10.0) * patch.grid().spacing(0),
            T::fd_step() * T::lit(10.0) * patch.grid().spacing(1),
        );
        let z = T::zero();
        let two = T::lit(2.0);
        let c = T::lit(12.0);
        let f0 = f(z, z);
        let d2 = |p: &dyn Fn(T) -> Vector3<T>, h: T| {
            ((p(h) + p(-h)) * T::lit(16.0) - p(two * h) - p(-two * h) - f0 * T::lit(30.0)) / (c * h * h)
        };
        let w = [(-2.0, 1.0), (-1.0, -8.0), (1.0, 8.0), (2.0, -1.0)];
        let mut duv = Vector3::zeros();
        for (a, wa) in w {
            for (b, wb) in w {
                duv += f(hu * T::lit(a), hv * T::lit(b)) * T::lit(wa * wb);
            }
        }
        let [du, dv] = self.gradient(patch, uv);
        VectorJet {
            v: f0,
            du,
            dv,
            duu: d2(&|s| f(s, z), hu),
            duv: duv / (T::lit(144.0) * hu * hv),
            dvv: d2(&|s| f(z, s), hv),
        }
    }
}

/// Mid-surface deformation used as a coefficient (closed-form derivatives).
#[derive(Clone, Debug)]
pub struct MapField<T: Real>(pub MidsurfaceDeformation<T>);

impl<T: Real> CoefficientField<T> for MapField<T> {
    fn value(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vector3<T> {
        self.0.jet(patch, uv).v
    }

    fn gradient(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> [Vector3<T>; 2] {
        let j = self.0.jet(patch, uv);
        [j.du, j.dv]
    }

    fn jet(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> VectorJet<T> {
        self.0.jet(patch, uv)
    }
}

/// Unit normal `n` of the reference surface.
#[derive(Clone, Copy, Debug)]
pub struct ReferenceNormal;

impl<T: Real> CoefficientField<T> for ReferenceNormal {
    fn value(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vector3<T> {
        crate::geometry::FundamentalForms::from_chart(patch.chart_jet(uv), patch.orientation())
            .map(|f| f.n)
            .unwrap_or_else(|_| Vector3::zeros())
    }

    fn gradient(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> [Vector3<T>; 2] {
        crate::geometry::FundamentalForms::from_chart(patch.chart_jet(uv), patch.orientation())
            .map(|f| f.dn)
            .unwrap_or_else(|_| [Vector3::zeros(); 2])
    }
}

/// Constant vector field.
#[derive(Clone, Copy, Debug)]
pub struct ConstantField<T: Real>(pub Vector3<T>);

impl<T: Real> CoefficientField<T> for ConstantField<T> {
    fn value(&self, _: &SurfacePatch<T>, _: [T; 2]) -> Vector3<T> {
        self.0
    }

    fn gradient(&self, _: &SurfacePatch<T>, _: [T; 2]) -> [Vector3<T>; 2] {
        [Vector3::zeros(); 2]
    }
}

/// Unit normal of the image of a map coefficient.
#[derive(Clone, Debug)]
pub struct ImageNormal<T: Real> {
    pub map: Arc<dyn CoefficientField<T>>,
}

impl<T: Real> CoefficientField<T> for ImageNormal<T> {
    fn value(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vector3<T> {
        let [a, b] = self.map.gradient(patch, uv);
        let m = a.cross(&b);
        let l = m.norm();
        if l > T::zero() {
            m * (patch.orientation() / l)
        } else {
            Vector3::zeros()
        }
    }
}

/// `x -> q x + b` applied to another coefficient.
#[derive(Clone, Debug)]
pub struct AffineField<T: Real> {
    pub q: Matrix3<T>,
    pub b: Vector3<T>,
    pub inner: Arc<dyn CoefficientField<T>>,
}

impl<T: Real> CoefficientField<T> for AffineField<T> {
    fn value(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vector3<T> {
        self.q * self.inner.value(patch, uv) + self.b
    }

    fn gradient(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> [Vector3<T>; 2] {
        let [a, b] = self.inner.gradient(patch, uv);
        [self.q * a, self.q * b]
    }
}

/// Tangent vectors `T_alpha = d_{e_alpha} c_0` of a map in the reference orthonormal frame.
fn frame_tangents<T: Real>(frame: &Matrix2<T>, grad: &[Vector3<T>; 2]) -> [Vector3<T>; 2] {
    [
        grad[0] * frame[(0, 0)] + grad[1] * frame[(1, 0)],
        grad[0] * frame[(0, 1)] + grad[1] * frame[(1, 1)],
    ]
}

fn gram<T: Real>(t: &[Vector3<T>; 2]) -> Matrix2<T> {
    Matrix2::new(t[0].dot(&t[0]), t[0].dot(&t[1]), t[1].dot(&t[0]), t[1].dot(&t[1]))
}

/// Director `c_1` whose normal strain entries at `t = 0` are the relaxed optimum for the
/// tangential strain of `c_0`: `T_alpha . c_1 = 2 z_alpha`, `|c_1|^2 = 1 + 2 z_3`.
#[derive(Clone, Debug)]
pub struct RelaxedDirector<T: Real> {
    pub map: Arc<dyn CoefficientField<T>>,
    pub material: Material<T>,
}

impl<T: Real> CoefficientField<T> for RelaxedDirector<T> {
    fn value(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vector3<T> {
        let Ok(forms) = crate::geometry::FundamentalForms::from_chart(patch.chart_jet(uv), patch.orientation())
        else {
            return Vector3::zeros();
        };
        let t = frame_tangents(&forms.frame, &self.map.gradient(patch, uv));
        let tt = gram(&t);
        let e_tan = (tt - Matrix2::identity()) * T::lit(0.5);
        let (z, _) = self.material.relax(&e_tan);
        let two = T::lit(2.0);
        let a = tt
            .try_inverse()
            .map(|inv| inv * nalgebra::Vector2::new(z[0] * two, z[1] * two))
            .unwrap_or_else(nalgebra::Vector2::zeros);
        let m = t[0].cross(&t[1]);
        let l = m.norm();
        if !(l > T::zero()) {
            return Vector3::zeros();
        }
        let normal = m * (patch.orientation() / l);
        let tang = t[0] * a[0] + t[1] * a[1];
        let s2 = T::one() + two * z[2] - tang.norm_squared();
        tang + normal * s2.max(T::zero()).sqrt()
    }
}

/// Second coefficient `c_2` relaxing the normal entries of the first `t`-derivative of the
/// strain, given `c_0` and `c_1`.
#[derive(Clone, Debug)]
pub struct RelaxedCurvature<T: Real> {
    pub map: Arc<dyn CoefficientField<T>>,
    pub director: Arc<dyn CoefficientField<T>>,
    pub material: Material<T>,
}

impl<T: Real> CoefficientField<T> for RelaxedCurvature<T> {
    fn value(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vector3<T> {
        let Ok(forms) = crate::geometry::FundamentalForms::from_chart(patch.chart_jet(uv), patch.orientation())
        else {
            return Vector3::zeros();
        };
        let t = frame_tangents(&forms.frame, &self.map.gradient(patch, uv));
        let c1 = self.director.value(patch, uv);
        let dc1 = frame_tangents(&forms.frame, &self.director.gradient(patch, uv));
        let pi = forms.shape_orthonormal();
        let tp = [
            dc1[0] - t[0] * pi[(0, 0)] - t[1] * pi[(1, 0)],
            dc1[1] - t[0] * pi[(0, 1)] - t[1] * pi[(1, 1)],
        ];
        let half = T::lit(0.5);
        let c = |a: usize, b: usize| (t[a].dot(&tp[b]) + t[b].dot(&tp[a])) * half;
        let e1 = Matrix2::new(c(0, 0), c(0, 1), c(1, 0), c(1, 1));
        let (z, _) = self.material.relax(&e1);
        let rows = Matrix3::from_rows(&[t[0].transpose(), t[1].transpose(), c1.transpose()]);
        let rhs = Vector3::new(z[0] - half * c1.dot(&tp[0]), z[1] - half * c1.dot(&tp[1]), half * z[2]);
        rows.lu().solve(&rhs).unwrap_or_else(Vector3::zeros)
    }
}

/// Polynomial-in-`t` ansatz for deformations of the thin shell.
#[derive(Clone, Debug)]
pub struct ThinShellAnsatz<T: Real> {
    coeffs: Vec<Arc<dyn CoefficientField<T>>>,
}

impl<T: Real> ThinShellAnsatz<T> {
    pub fn new(coeffs: Vec<Arc<dyn CoefficientField<T>>>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > 4 {
            return Err(Error::Config(format!("ansatz needs 1 to 4 coefficients, got {}", coeffs.len())));
        }
        Ok(Self { coeffs })
    }

    /// `u(x + t n) = x + t n`.
    pub fn identity() -> Self {
        Self { coeffs: vec![Arc::new(MapField(MidsurfaceDeformation::identity())), Arc::new(ReferenceNormal)] }
    }

    /// Kirchhoff-Love form `c_0 = y`, `c_1 = N(y)`.
    pub fn kirchhoff_love(y: MidsurfaceDeformation<T>) -> Self {
        let map: Arc<dyn CoefficientField<T>> = Arc::new(MapField(y));
        Self { coeffs: vec![map.clone(), Arc::new(ImageNormal { map })] }
    }

    /// `c_0` with relaxed `c_1` and `c_2`.
    pub fn relaxed(map: Arc<dyn CoefficientField<T>>, material: Material<T>) -> Self {
        let director: Arc<dyn CoefficientField<T>> = Arc::new(RelaxedDirector { map: map.clone(), material });
        let curvature = Arc::new(RelaxedCurvature { map: map.clone(), director: director.clone(), material });
        Self { coeffs: vec![map, director, curvature] }
    }

    /// Composition `q u + b` with a rigid motion.
    pub fn compose_rigid(&self, q: Matrix3<T>, b: Vector3<T>) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| {
                let shift = if k == 0 { b } else { Vector3::zeros() };
                Arc::new(AffineField { q, b: shift, inner: c.clone() }) as Arc<dyn CoefficientField<T>>
            })
            .collect();
        Self { coeffs }
    }

    /// Adds a constant to `c_0`.
    pub fn translate(&self, b: Vector3<T>) -> Self {
        self.compose_rigid(Matrix3::identity(), b)
    }

    pub fn coefficients(&self) -> &[Arc<dyn CoefficientField<T>>] {
        &self.coeffs
    }

    pub fn midsurface(&self) -> &Arc<dyn CoefficientField<T>> {
        &self.coeffs[0]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Values and chart gradients of all coefficients at a point.
    pub fn sample(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> Vec<(Vector3<T>, [Vector3<T>; 2])> {
        self.coeffs.iter().map(|c| (c.value(patch, uv), c.gradient(patch, uv))).collect()
    }

    /// `u(x + t n)` from sampled coefficients.
    pub fn eval(sample: &[(Vector3<T>, [Vector3<T>; 2])], t: T) -> Vector3<T> {
        sample.iter().rev().fold(Vector3::zeros(), |acc, (c, _)| acc * t + c)
    }
}
