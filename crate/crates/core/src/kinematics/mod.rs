//! Deformations and displacement hierarchies of the mid-surface: pullback forms, the
//! skew field of an infinitesimal isometry, metric-expansion coefficients, isometry
//! solvers and membership in the finite-strain space.
//!
//! Tensors on the surface are returned in chart (covariant) components unless noted;
//! `FundamentalForms::to_orthonormal` converts them.

mod discrete;
mod field;
mod order;

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::Serialize;

pub use discrete::{
    discrete_metric_defect, finite_strain_project, rayleigh_quotient, reference_tangents, rigid_fields,
    solve_infinitesimal_isometries, tangents_of, BoundaryCondition, IsometryModes, ProjectOptions, StrainOperator,
    StrainProjection, V1_QUOTIENT_TOLERANCE, ZERO_QUOTIENT,
};
pub use field::{
    nodal_jets, DeformationSpec, DisplacementField, DisplacementHierarchy, FieldSpec, MidsurfaceDeformation,
    SampledField, StrainField,
};
pub(crate) use order::fit_line;
pub use order::{isometry_order, EpsilonFamily, IsometryOrderReport, OrderOptions, RollFamily};

use crate::error::{Error, Result};
use crate::geometry::{surface_integral, FundamentalForms, SurfacePatch, VectorJet};
use crate::scalar::Real;

/// `(grad y)^T grad y` in chart components.
pub fn metric_of<T: Real>(y: &VectorJet<T>) -> Matrix2<T> {
    let (a, b) = (y.du, y.dv);
    Matrix2::new(a.dot(&a), a.dot(&b), b.dot(&a), b.dot(&b))
}

/// Unit normal of the image, oriented like the reference normal for `y = id`.
pub fn image_normal<T: Real>(y: &VectorJet<T>, orientation: T) -> Result<Vector3<T>> {
    let m = y.du.cross(&y.dv);
    let area = m.norm();
    let scale = y.du.norm() * y.dv.norm();
    if !(area > T::lit(1e-12) * scale) || !(scale > T::zero()) {
        return Err(Error::DegenerateImage(area.as_f64()));
    }
    Ok(m * (orientation / area))
}

/// Second fundamental form `d_i y . d_j N` of the image.
pub fn second_form_of<T: Real>(y: &VectorJet<T>, orientation: T) -> Result<Matrix2<T>> {
    let n = image_normal(y, orientation)?;
    let (b11, b12, b22) = (-y.duu.dot(&n), -y.duv.dot(&n), -y.dvv.dot(&n));
    Ok(Matrix2::new(b11, b12, b12, b22))
}

/// Shape operator `G^{-1} b` of the image acting on chart coordinates.
pub fn shape_of<T: Real>(y: &VectorJet<T>, orientation: T) -> Result<Matrix2<T>> {
    let b = second_form_of(y, orientation)?;
    let gi = metric_of(y)
        .try_inverse()
        .ok_or_else(|| Error::DegenerateImage(0.0))?;
    Ok(gi * b)
}

/// `sym (grad r)^T grad w`: half the linearized change of metric.
pub fn sym_tangential_gradient<T: Real>(forms: &FundamentalForms<T>, w: &VectorJet<T>) -> Matrix2<T> {
    let half = T::lit(0.5);
    let c = |i: usize, j: usize| (forms.a[i].dot(&w.d(j)) + forms.a[j].dot(&w.d(i))) * half;
    let off = c(0, 1);
    Matrix2::new(c(0, 0), off, off, c(1, 1))
}

/// Metric change `a_i . D_j + D_i . a_j + D_i . D_j` caused by a displacement jet `D`,
/// assembled without cancellation against `g`.
pub fn metric_change<T: Real>(forms: &FundamentalForms<T>, d: &VectorJet<T>) -> Matrix2<T> {
    let c = |i: usize, j: usize| forms.a[i].dot(&d.d(j)) + d.d(i).dot(&forms.a[j]) + d.d(i).dot(&d.d(j));
    let off = (c(0, 1) + c(1, 0)) * T::lit(0.5);
    Matrix2::new(c(0, 0), off, off, c(1, 1))
}

/// Coefficients `A_1..A_k` of `eps^i` in `(grad u_eps)^T grad u_eps - g` for
/// `u_eps = r + sum eps^i V_i` (the `V_i` given as jets at one point).
pub fn metric_coefficients<T: Real>(forms: &FundamentalForms<T>, v: &[VectorJet<T>], k: usize) -> Vec<Matrix2<T>> {
    let grad = |m: usize| -> [Vector3<T>; 2] {
        if m == 0 {
            forms.a
        } else {
            [v[m - 1].du, v[m - 1].dv]
        }
    };
    let n = v.len();
    (1..=k)
        .map(|i| {
            let mut c = Matrix2::zeros();
            for j in i.saturating_sub(n)..=i.min(n) {
                let (p, q) = (grad(j), grad(i - j));
                for a in 0..2 {
                    for b in 0..2 {
                        c[(a, b)] += p[a].dot(&q[b]);
                    }
                }
            }
            (c + c.transpose()) * T::lit(0.5)
        })
        .collect()
}

/// Least-squares axial vector `w` of `w x a_i = d_i V` and the pointwise squared defect
/// `sum_alpha |w x e_alpha - d_alpha V|^2`.
pub fn axial_vector<T: Real>(forms: &FundamentalForms<T>, v: &VectorJet<T>) -> (Vector3<T>, T) {
    let dual = forms.dual();
    let b = dual[0].cross(&v.du) + dual[1].cross(&v.dv);
    let w = b - forms.n * (forms.n.dot(&b) * T::lit(0.5));
    let mut defect = T::zero();
    for alpha in 0..2 {
        let e = forms.e[alpha];
        let dv = v.du * forms.frame[(0, alpha)] + v.dv * forms.frame[(1, alpha)];
        defect += (w.cross(&e) - dv).norm_squared();
    }
    (w, defect)
}

/// Chart derivatives `d_k w` of the least-squares axial vector.
pub fn axial_gradient<T: Real>(forms: &FundamentalForms<T>, v: &VectorJet<T>) -> [Vector3<T>; 2] {
    let half = T::lit(0.5);
    let gi = forms.ginv();
    let dual = forms.dual();
    let r2 = |i: usize, j: usize| match (i, j) {
        (0, 0) => forms.chart.ruu,
        (1, 1) => forms.chart.rvv,
        _ => forms.chart.ruv,
    };
    let b = dual[0].cross(&v.du) + dual[1].cross(&v.dv);
    let nb = forms.n.dot(&b);
    let mut out = [Vector3::zeros(); 2];
    for (k, o) in out.iter_mut().enumerate() {
        let mut dg = Matrix2::zeros();
        for l in 0..2 {
            for m in 0..2 {
                dg[(l, m)] = r2(l, k).dot(&forms.a[m]) + forms.a[l].dot(&r2(m, k));
            }
        }
        let dgi = -(gi * dg * gi);
        let mut db = Vector3::zeros();
        for i in 0..2 {
            let mut dai = Vector3::zeros();
            for j in 0..2 {
                dai += forms.a[j] * dgi[(i, j)] + r2(j, k) * gi[(i, j)];
            }
            db += dai.cross(&v.d(i)) + dual[i].cross(&v.dd(i, k));
        }
        let dn = forms.dn[k];
        let dnb = dn.dot(&b) + forms.n.dot(&db);
        *o = db - (forms.n * dnb + dn * nb) * half;
    }
    out
}

/// First-order change `a_i . (d_j w x n)` of the second fundamental form under
/// `id + eps V` for `V` an infinitesimal isometry with axial field `w`.
pub fn bending_of<T: Real>(forms: &FundamentalForms<T>, v: &VectorJet<T>) -> Matrix2<T> {
    let dw = axial_gradient(forms, v);
    let c = |i: usize, j: usize| forms.a[i].dot(&dw[j].cross(&forms.n));
    let off = (c(0, 1) + c(1, 0)) * T::lit(0.5);
    Matrix2::new(c(0, 0), off, off, c(1, 1))
}

/// Pullback metric of `y o r` at the nodes.
pub fn pullback_metric<T: Real>(patch: &SurfacePatch<T>, y: &MidsurfaceDeformation<T>) -> Vec<Matrix2<T>> {
    y.node_jets(patch).iter().map(metric_of).collect()
}

/// Second fundamental form of the image at the nodes, in chart components.
pub fn pullback_second_form<T: Real>(patch: &SurfacePatch<T>, y: &MidsurfaceDeformation<T>) -> Result<Vec<Matrix2<T>>> {
    y.node_jets(patch)
        .iter()
        .map(|j| second_form_of(j, patch.orientation()))
        .collect()
}

/// Shape operator of the image at the nodes, acting on chart coordinates.
pub fn pullback_shape<T: Real>(patch: &SurfacePatch<T>, y: &MidsurfaceDeformation<T>) -> Result<Vec<Matrix2<T>>> {
    y.node_jets(patch)
        .iter()
        .map(|j| shape_of(j, patch.orientation()))
        .collect()
}

/// Axial-vector representation `A xi = w x xi` of a skew field, with the L2 defect of
/// `d_tau V = A tau`.
#[derive(Clone, Debug)]
pub struct SkewField<T: Real> {
    pub w: Vec<Vector3<T>>,
    pub residual: T,
    /// Residual divided by the L2 norm of `grad V` (zero when `grad V` vanishes).
    pub relative_residual: T,
}

impl<T: Real> SkewField<T> {
    pub fn matrix(&self, k: usize) -> Matrix3<T> {
        self.w[k].cross_matrix()
    }
}

pub fn recover_rotation_field<T: Real>(patch: &SurfacePatch<T>, v: &DisplacementField<T>) -> SkewField<T> {
    let jets = v.node_jets(patch);
    let weights = patch.node_area_weights();
    let mut w = Vec::with_capacity(jets.len());
    let (mut res, mut norm) = (T::zero(), T::zero());
    for ((f, j), wt) in patch.node_forms().iter().zip(&jets).zip(&weights) {
        let (axial, d) = axial_vector(f, j);
        w.push(axial);
        res += *wt * d;
        let gi = f.ginv();
        let grad_sq = (0..2)
            .flat_map(|i| (0..2).map(move |k| (i, k)))
            .fold(T::zero(), |s, (i, k)| s + gi[(i, k)] * j.d(i).dot(&j.d(k)));
        norm += *wt * grad_sq;
    }
    let residual = res.sqrt();
    let relative_residual = if norm > T::zero() { residual / norm.sqrt() } else { T::zero() };
    SkewField { w, residual, relative_residual }
}

pub const DEFAULT_ISOMETRY_TOLERANCE: f64 = 1e-6;

/// Membership in V1. Analytic fields need a rotation-field residual `<= tol`; sampled
/// fields (numerical modes) are judged by the discrete strain form they come from.
pub fn check_v1<T: Real>(patch: &SurfacePatch<T>, v: &DisplacementField<T>, tol: T) -> Result<()> {
    if v.is_sampled() {
        let curvature = surface_integral(patch, |q| q.forms.shape_orthonormal().norm_squared());
        let q = rayleigh_quotient(patch, &v.node_values(patch));
        if q <= T::lit(V1_QUOTIENT_TOLERANCE) * (curvature + T::one()) {
            return Ok(());
        }
        return Err(Error::NotAnIsometry(format!("Rayleigh quotient {:e} of sampled field", q.as_f64())));
    }
    let r = recover_rotation_field(patch, v).relative_residual;
    if r <= tol {
        Ok(())
    } else {
        Err(Error::NotAnIsometry(format!("relative rotation-field residual {:e}", r.as_f64())))
    }
}

/// First-order bending field of an infinitesimal isometry at the nodes (chart components).
///
/// Fails with `NotAnIsometry` when the relative rotation-field residual exceeds `tol`.
pub fn first_order_bending<T: Real>(
    patch: &SurfacePatch<T>,
    v: &DisplacementField<T>,
    tol: T,
) -> Result<Vec<Matrix2<T>>> {
    let skew = recover_rotation_field(patch, v);
    if !(skew.relative_residual <= tol) {
        return Err(Error::NotAnIsometry(format!(
            "relative rotation-field residual {:e}",
            skew.relative_residual.as_f64()
        )));
    }
    Ok(patch
        .node_forms()
        .iter()
        .zip(v.node_jets(patch))
        .map(|(f, j)| bending_of(f, &j))
        .collect())
}

#[derive(Clone, Debug, Serialize)]
pub struct PlateSecondOrder {
    pub in_v2: bool,
    pub max_abs_det_hessian: f64,
    /// Largest in-plane strain `|sym grad (V^1, V^2)|`.
    pub max_inplane_strain: f64,
}

/// Checks that the in-plane part is an infinitesimal planar rigid motion and that
/// `det grad^2 V^3` vanishes.
pub fn plate_second_order_check<T: Real>(
    patch: &SurfacePatch<T>,
    v: &DisplacementField<T>,
    tol: f64,
) -> Result<PlateSecondOrder> {
    if !patch.is_plate() {
        return Err(Error::NotAPlate);
    }
    let (mut det_max, mut strain_max, mut hess_max) = (0.0f64, 0.0f64, 0.0f64);
    for j in v.node_jets(patch) {
        let (hu, hv, huv) = (j.duu.z.as_f64(), j.dvv.z.as_f64(), j.duv.z.as_f64());
        det_max = det_max.max((hu * hv - huv * huv).abs());
        hess_max = hess_max.max(hu.abs().max(hv.abs()).max(huv.abs()));
        let (e11, e22, e12) = (j.du.x.as_f64(), j.dv.y.as_f64(), 0.5 * (j.du.y + j.dv.x).as_f64());
        strain_max = strain_max.max((e11 * e11 + e22 * e22 + 2.0 * e12 * e12).sqrt());
    }
    let in_v2 = det_max <= tol * (1.0 + hess_max * hess_max) && strain_max <= tol;
    Ok(PlateSecondOrder { in_v2, max_abs_det_hessian: det_max, max_inplane_strain: strain_max })
}

/// Metric expansion coefficients `A_1..A_k` of a hierarchy at the nodes.
pub fn metric_expansion<T: Real>(
    patch: &SurfacePatch<T>,
    h: &DisplacementHierarchy<T>,
    k: usize,
) -> Result<Vec<Vec<Matrix2<T>>>> {
    let max = 2 * h.order();
    if k > max {
        return Err(Error::OrderTooHigh { requested: k, max });
    }
    let jets: Vec<Vec<VectorJet<T>>> = h.fields.iter().map(|f| f.node_jets(patch)).collect();
    let mut out = vec![Vec::with_capacity(patch.grid().len()); k];
    for (node, forms) in patch.node_forms().iter().enumerate() {
        let local: Vec<VectorJet<T>> = jets.iter().map(|j| j[node]).collect();
        for (i, c) in metric_coefficients(forms, &local, k).into_iter().enumerate() {
            out[i].push(c);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests;
