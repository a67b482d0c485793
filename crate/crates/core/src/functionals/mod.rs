//! The three-dimensional thin-shell energy and the two-dimensional limit functionals.

mod ansatz;

use nalgebra::{Matrix2, Matrix3, Vector3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use ansatz::{
    AffineField, CoefficientField, ConstantField, ImageNormal, MapField, ReferenceNormal, RelaxedCurvature,
    RelaxedDirector, ThinShellAnsatz,
};

use crate::error::{Error, Result};
use crate::experiments::order_for_scaling;
use crate::geometry::quadrature::gauss_on;
use crate::geometry::{surface_integral, FundamentalForms, SurfacePatch, VectorJet};
use crate::kinematics::{
    axial_vector, bending_of, metric_change, metric_coefficients, recover_rotation_field, second_form_of,
    DisplacementField, DisplacementHierarchy, FieldSpec, MidsurfaceDeformation, StrainField,
};
use crate::material::Material;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnergyOptions {
    /// Gauss points across the thickness.
    pub t_points: usize,
}

impl Default for EnergyOptions {
    fn default() -> Self {
        Self { t_points: 3 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuadratureInfo {
    pub surface_points: usize,
    pub quad_order: usize,
    pub t_points: usize,
}

/// Energy value with its breakdown where the functional defines one.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyRecord {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stretching: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bending: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub work: Option<f64>,
    pub quadrature: QuadratureInfo,
    pub warnings: Vec<String>,
}

impl EnergyRecord {
    fn surface<T: Real>(patch: &SurfacePatch<T>, value: T) -> Self {
        Self {
            value: value.as_f64(),
            stretching: None,
            bending: None,
            work: None,
            quadrature: QuadratureInfo {
                surface_points: patch.quad_points().len(),
                quad_order: patch.descriptor().quad_order,
                t_points: 0,
            },
            warnings: Vec::new(),
        }
    }
}

/// Body force `f^h = h^alpha f` with an `h`-independent profile.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ForceSpec {
    pub field: FieldSpec,
    pub alpha: f64,
}

/// Which prefactor the Kirchhoff functional carries: none, or the `1/24` of the bending terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    Raw,
    Scaled,
}

impl Normalization {
    pub fn factor(self) -> f64 {
        match self {
            Normalization::Raw => 1.0,
            Normalization::Scaled => 1.0 / 24.0,
        }
    }
}

struct ShellSums<T> {
    energy: T,
    work: T,
    degenerate: usize,
}

fn shell_integral<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    ansatz: &ThinShellAnsatz<T>,
    h: T,
    force: Option<(&DisplacementField<T>, T)>,
    opts: &EnergyOptions,
) -> Result<ShellSums<T>> {
    patch.check_tubular(h)?;
    let half = h * T::lit(0.5);
    let tq = gauss_on(opts.t_points.max(1), -half, half);
    let parts: Vec<(T, T, usize)> = patch
        .quad_points()
        .par_iter()
        .map(|q| {
            let f = &q.forms;
            let sample = ansatz.sample(patch, q.uv);
            let fvec = force.map(|(field, scale)| field.jet(patch, q.uv).v * scale);
            let (mut e, mut w, mut bad) = (T::zero(), T::zero(), 0usize);
            for &(t, wt) in &tq {
                let (mut du, mut dv, mut dt) = (Vector3::zeros(), Vector3::zeros(), Vector3::zeros());
                let mut p = T::one();
                for (k, (_, g)) in sample.iter().enumerate() {
                    du += g[0] * p;
                    dv += g[1] * p;
                    if k + 1 < sample.len() {
                        dt += sample[k + 1].0 * (p * T::lit((k + 1) as f64));
                    }
                    p *= t;
                }
                let x = Matrix3::from_columns(&[f.a[0] + f.dn[0] * t, f.a[1] + f.dn[1] * t, f.n]);
                let fm = Matrix3::from_columns(&[du, dv, dt]);
                let grad = x.try_inverse().map(|xi| fm * xi).unwrap_or_else(Matrix3::zeros);
                if grad.determinant() <= T::zero() {
                    bad += 1;
                }
                let vol = f.sqrt_g * f.volume_factor(t) * wt * q.weight;
                e += material.energy_density(&grad) * vol;
                if let Some(fv) = fvec {
                    w += fv.dot(&ThinShellAnsatz::eval(&sample, t)) * vol;
                }
            }
            (e, w, bad)
        })
        .collect();
    let (energy, work, degenerate) = parts
        .into_iter()
        .fold((T::zero(), T::zero(), 0), |(a, b, c), (e, w, d)| (a + e, b + w, c + d));
    Ok(ShellSums { energy: energy / h, work: work / h, degenerate })
}

fn shell_record<T: Real>(patch: &SurfacePatch<T>, opts: &EnergyOptions, sums: &ShellSums<T>, value: T) -> EnergyRecord {
    let mut r = EnergyRecord::surface(patch, value);
    r.quadrature.t_points = opts.t_points.max(1);
    if sums.degenerate > 0 {
        r.warnings.push(format!("degenerate gradient (det <= 0) at {} quadrature nodes", sums.degenerate));
    }
    r
}

/// `E^h(u) = (1/h) int_{S^h} W(grad u)` by tensor Gauss quadrature over the chart and the
/// thickness. Requires `h max|kappa| < 1`.
pub fn thin_shell_energy<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    ansatz: &ThinShellAnsatz<T>,
    h: T,
    opts: &EnergyOptions,
) -> Result<EnergyRecord> {
    let sums = shell_integral(patch, material, ansatz, h, None, opts)?;
    Ok(shell_record(patch, opts, &sums, sums.energy))
}

/// `J^h(u) = E^h(u) - (1/h) int_{S^h} f^h . u`.
pub fn total_energy<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    ansatz: &ThinShellAnsatz<T>,
    h: T,
    force: &ForceSpec,
    opts: &EnergyOptions,
) -> Result<EnergyRecord> {
    if !(force.alpha >= 0.0) {
        return Err(Error::NegativeAlpha(force.alpha));
    }
    let field = DisplacementField::from_spec(patch, &force.field)?;
    let scale = h.powf(T::lit(force.alpha));
    let sums = shell_integral(patch, material, ansatz, h, Some((&field, scale)), opts)?;
    let mut r = shell_record(patch, opts, &sums, sums.energy - sums.work);
    r.stretching = None;
    r.work = Some(sums.work.as_f64());
    Ok(r)
}

fn norm_sq<T: Real>(m: &Matrix2<T>) -> T {
    m.iter().fold(T::zero(), |s, x| s + *x * *x)
}

/// L2 norm of the metric defect of a deformation (orthonormal components).
pub fn metric_defect_norm<T: Real>(patch: &SurfacePatch<T>, y: &MidsurfaceDeformation<T>) -> T {
    surface_integral(patch, |q| {
        let j = y.jet(patch, q.uv);
        let d = j.add(&VectorJet::from(q.forms.chart).scale(-T::one()));
        norm_sq(&q.forms.to_orthonormal(&metric_change(&q.forms, &d)))
    })
    .sqrt()
}

pub const ISOMETRY_DEFECT_TOLERANCE: f64 = 1e-6;

/// `int_S Q_2(Pi(y) - Pi)`, times `1/24` in scaled mode. The isometry constraint is checked:
/// the L2 metric defect must not exceed `1e-6 * area`.
pub fn kirchhoff_energy<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    y: &MidsurfaceDeformation<T>,
    normalization: Normalization,
) -> Result<EnergyRecord> {
    let defect = metric_defect_norm(patch, y);
    let area = patch.area();
    if !(defect <= T::lit(ISOMETRY_DEFECT_TOLERANCE) * area) {
        return Err(Error::NotAnIsometry(format!(
            "metric defect {:e} exceeds {:e}",
            defect.as_f64(),
            ISOMETRY_DEFECT_TOLERANCE * area.as_f64()
        )));
    }
    let forms: Vec<Matrix2<T>> = patch
        .quad_points()
        .iter()
        .map(|q| second_form_of(&y.jet(patch, q.uv), patch.orientation()))
        .collect::<Result<_>>()?;
    let integral = patch
        .quad_points()
        .iter()
        .zip(&forms)
        .fold(T::zero(), |s, (q, b)| s + material.q2_form(&q.forms.to_orthonormal(&(b - q.forms.b))) * q.area_weight());
    let value = integral * T::lit(normalization.factor());
    let mut r = EnergyRecord::surface(patch, value);
    r.bending = Some(value.as_f64());
    Ok(r)
}

fn check_infinitesimal_isometry<T: Real>(patch: &SurfacePatch<T>, v: &DisplacementField<T>, tol: T) -> Result<()> {
    crate::kinematics::check_v1(patch, v, tol)
}

/// `(A^2)_tan` in chart components for the axial field `w`.
fn skew_square<T: Real>(forms: &FundamentalForms<T>, w: &Vector3<T>) -> Matrix2<T> {
    let p = [w.dot(&forms.a[0]), w.dot(&forms.a[1])];
    let ww = w.norm_squared();
    Matrix2::new(
        p[0] * p[0] - ww * forms.g[(0, 0)],
        p[0] * p[1] - ww * forms.g[(0, 1)],
        p[1] * p[0] - ww * forms.g[(1, 0)],
        p[1] * p[1] - ww * forms.g[(1, 1)],
    )
}

/// Nodal `(A^2)_tan / 2` for an infinitesimal isometry `V`; a matched in-plane correction
/// `w` has `sym grad w` close to it.
pub fn quadratic_strain<T: Real>(patch: &SurfacePatch<T>, v: &DisplacementField<T>) -> Result<StrainField<T>> {
    let skew = recover_rotation_field(patch, v);
    let half = T::lit(0.5);
    let values = patch.node_forms().iter().zip(&skew.w).map(|(f, w)| skew_square(f, w) * half).collect();
    StrainField::nodal(patch.grid(), values)
}

fn bending_integral<T: Real>(patch: &SurfacePatch<T>, material: &Material<T>, v: &DisplacementField<T>) -> T {
    surface_integral(patch, |q| {
        material.q2_form(&q.forms.to_orthonormal(&bending_of(&q.forms, &v.jet(patch, q.uv))))
    }) / T::lit(24.0)
}

/// `1/2 int Q_2(B_tan - 1/2 (A^2)_tan) + 1/24 int Q_2((grad(A n) - A Pi)_tan)` for an
/// infinitesimal isometry `V` with axial field `A`.
pub fn vonkarman_energy<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    v: &DisplacementField<T>,
    b: &StrainField<T>,
    tol: T,
) -> Result<EnergyRecord> {
    check_infinitesimal_isometry(patch, v, tol)?;
    let half = T::lit(0.5);
    let stretching = surface_integral(patch, |q| {
        let (w, _) = axial_vector(&q.forms, &v.jet(patch, q.uv));
        let m = b.at(patch, q.uv, &q.forms) - skew_square(&q.forms, &w) * half;
        material.q2_form(&q.forms.to_orthonormal(&m))
    }) * half;
    let bending = bending_integral(patch, material, v);
    let mut r = EnergyRecord::surface(patch, stretching + bending);
    r.stretching = Some(stretching.as_f64());
    r.bending = Some(bending.as_f64());
    Ok(r)
}

/// `1/24 int Q_2((grad(A n) - A Pi)_tan)`.
pub fn linear_bending_energy<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    v: &DisplacementField<T>,
    tol: T,
) -> Result<EnergyRecord> {
    check_infinitesimal_isometry(patch, v, tol)?;
    let bending = bending_integral(patch, material, v);
    let mut r = EnergyRecord::surface(patch, bending);
    r.bending = Some(bending.as_f64());
    Ok(r)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjectureRegime {
    /// `beta = beta_{N+1}`: stretching of order `N + 1` plus bending.
    Boundary,
    /// `beta` strictly inside `(beta_{N+1}, beta_N)`: bending only.
    Interior,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConjectureEnergy {
    pub order: usize,
    pub regime: ConjectureRegime,
    pub record: EnergyRecord,
}

/// Relative tolerance for the vanishing of `A_1..A_N` (relative to `1 + max |grad V_i|^2`).
pub const CONSTRAINT_TOLERANCE: f64 = 1e-8;

/// Limit functional of the hierarchy regime containing `beta`.
///
/// With `N = order_for_scaling(beta)`, the coefficients `A_1..A_N` must vanish. At
/// `beta = beta_{N+1}` the functional is `1/2 int Q_2(1/2 A_{N+1}) + 1/24 int Q_2(delta_1 Pi)`,
/// otherwise only the bending term.
pub fn conjecture_energy<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    h: &DisplacementHierarchy<T>,
    beta: f64,
) -> Result<ConjectureEnergy> {
    let bracket = order_for_scaling(beta)?;
    let n = bracket.n;
    let k = (n + 1).min(2 * h.order());
    let mut norms = vec![T::zero(); k];
    let mut grad_scale = T::zero();
    let mut stretching = T::zero();
    let half = T::lit(0.5);
    for q in patch.quad_points() {
        let jets: Vec<VectorJet<T>> = h.fields.iter().map(|f| f.jet(patch, q.uv)).collect();
        for j in &jets {
            grad_scale = grad_scale.max(j.du.norm_squared()).max(j.dv.norm_squared());
        }
        let coeffs = metric_coefficients(&q.forms, &jets, k);
        for (acc, c) in norms.iter_mut().zip(&coeffs) {
            *acc += norm_sq(&q.forms.to_orthonormal(c)) * q.area_weight();
        }
        if k == n + 1 {
            stretching += material.q2_form(&q.forms.to_orthonormal(&(coeffs[n] * half))) * q.area_weight();
        }
    }
    let tol = T::lit(CONSTRAINT_TOLERANCE) * (T::one() + grad_scale) * patch.area().sqrt();
    for (i, a) in norms.iter().enumerate().take(n) {
        let a = a.sqrt();
        if !(a <= tol) {
            return Err(Error::InsufficientOrder { order: n, index: i + 1, defect: a.as_f64() });
        }
    }
    let boundary = (beta - bracket.lower).abs() <= 1e-12 * beta;
    let bending = bending_integral(patch, material, &h.fields[0]);
    let stretching = if boundary { stretching * half } else { T::zero() };
    let mut record = EnergyRecord::surface(patch, stretching + bending);
    record.bending = Some(bending.as_f64());
    if boundary {
        record.stretching = Some(stretching.as_f64());
    }
    Ok(ConjectureEnergy {
        order: n,
        regime: if boundary { ConjectureRegime::Boundary } else { ConjectureRegime::Interior },
        record,
    })
}

/// Scaled fiber average `h^{1 - beta/2} (mean_t u(x + t n) - x)` at the nodes.
pub fn averaged_displacement<T: Real>(
    patch: &SurfacePatch<T>,
    ansatz: &ThinShellAnsatz<T>,
    h: T,
    beta: T,
    t_points: usize,
) -> Result<DisplacementField<T>> {
    let half = h * T::lit(0.5);
    let tq = gauss_on(t_points.max(2), -half, half);
    let scale = h.powf(T::one() - beta * T::lit(0.5));
    let values = patch
        .grid()
        .nodes()
        .iter()
        .zip(patch.node_forms())
        .map(|(uv, f)| {
            let sample: Vec<(Vector3<T>, [Vector3<T>; 2])> = ansatz
                .coefficients()
                .iter()
                .map(|c| (c.value(patch, *uv), [Vector3::zeros(); 2]))
                .collect();
            let mean = tq
                .iter()
                .fold(Vector3::zeros(), |acc, (t, w)| acc + ThinShellAnsatz::eval(&sample, *t) * *w)
                / h;
            (mean - f.chart.r) * scale
        })
        .collect();
    DisplacementField::sampled(patch.grid(), values)
}


#[cfg(test)]
mod tests;
