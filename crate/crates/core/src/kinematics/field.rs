//! Displacement fields, mid-surface deformations and strain fields.

use nalgebra::{Matrix2, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::spline::TensorSpline;
use crate::geometry::{FundamentalForms, Grid, ScalarProfile, SurfacePatch, VectorJet};
use crate::material::rotation;
use crate::scalar::Real;

fn zero_profile() -> ScalarProfile {
    ScalarProfile::zero()
}

/// Serializable displacement field: built-in analytic families or flat node arrays.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FieldSpec {
    Zero,
    Constant { value: [f64; 3] },
    /// Linearized rotation `V(x) = axis x x`.
    Rotation { axis: [f64; 3] },
    /// Componentwise scalar profiles of the chart parameters.
    Components {
        #[serde(default = "zero_profile")]
        x: ScalarProfile,
        #[serde(default = "zero_profile")]
        y: ScalarProfile,
        #[serde(default = "zero_profile")]
        z: ScalarProfile,
    },
    /// Node values on the patch grid, `u` fastest.
    Sampled { grid: [usize; 2], values: Vec<[f64; 3]> },
    Sum { parts: Vec<FieldSpec> },
    Scaled { factor: f64, field: Box<FieldSpec> },
}

impl FieldSpec {
    pub fn out_of_plane(profile: ScalarProfile) -> Self {
        FieldSpec::Components { x: ScalarProfile::zero(), y: ScalarProfile::zero(), z: profile }
    }
}

/// Node data with its spline interpolant.
#[derive(Clone, Debug)]
pub struct SampledField<T: Real> {
    values: Vec<Vector3<T>>,
    spline: TensorSpline<T>,
}

impl<T: Real> SampledField<T> {
    pub fn new(grid: &Grid<T>, values: Vec<Vector3<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!("{} values for {} nodes", values.len(), grid.len())));
        }
        if values.iter().any(|v| !v.iter().all(|x| x.is_finite())) {
            return Err(Error::ShapeMismatch("non-finite node value".into()));
        }
        let spline = TensorSpline::new(grid, &values);
        Ok(Self { values, spline })
    }

    pub fn values(&self) -> &[Vector3<T>] {
        &self.values
    }

    pub fn grid(&self) -> &Grid<T> {
        self.spline.grid()
    }
}

#[derive(Clone, Debug)]
enum Repr<T: Real> {
    Analytic(FieldSpec),
    Sampled(SampledField<T>),
    Combination(Vec<(T, DisplacementField<T>)>),
}

/// Displacement field `V: S -> R^3`, evaluable with derivatives anywhere on the chart and
/// at the grid nodes.
///
/// Analytic fields use closed-form derivatives everywhere. Sampled fields use fourth-order
/// differences at the nodes and their cubic spline elsewhere.
#[derive(Clone, Debug)]
pub struct DisplacementField<T: Real> {
    repr: Repr<T>,
}

impl<T: Real> DisplacementField<T> {
    pub fn analytic(spec: FieldSpec) -> Self {
        Self { repr: Repr::Analytic(spec) }
    }

    pub fn zero() -> Self {
        Self::analytic(FieldSpec::Zero)
    }

    pub fn sampled(grid: &Grid<T>, values: Vec<Vector3<T>>) -> Result<Self> {
        Ok(Self { repr: Repr::Sampled(SampledField::new(grid, values)?) })
    }

    /// Resolves a spec against a patch (sampled specs must match the patch grid).
    pub fn from_spec(patch: &SurfacePatch<T>, spec: &FieldSpec) -> Result<Self> {
        validate_spec(patch, spec)?;
        Ok(match spec {
            FieldSpec::Sampled { values, .. } => Self::sampled(
                patch.grid(),
                values.iter().map(|v| Vector3::new(T::lit(v[0]), T::lit(v[1]), T::lit(v[2]))).collect(),
            )?,
            other => Self::analytic(other.clone()),
        })
    }

    pub fn combination(terms: Vec<(T, DisplacementField<T>)>) -> Self {
        Self { repr: Repr::Combination(terms) }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::combination(vec![(s, self.clone())])
    }

    pub fn plus(&self, other: &Self) -> Self {
        Self::combination(vec![(T::one(), self.clone()), (T::one(), other.clone())])
    }

    pub fn is_sampled(&self) -> bool {
        matches!(self.repr, Repr::Sampled(_))
    }

    pub fn jet(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> VectorJet<T> {
        match &self.repr {
            Repr::Analytic(spec) => analytic_jet(patch, spec, uv),
            Repr::Sampled(s) => s.spline.jet(uv[0], uv[1]),
            Repr::Combination(terms) => terms
                .iter()
                .fold(VectorJet::zero(), |acc, (c, f)| acc.add(&f.jet(patch, uv).scale(*c))),
        }
    }

    pub fn node_values(&self, patch: &SurfacePatch<T>) -> Vec<Vector3<T>> {
        match &self.repr {
            Repr::Sampled(s) => s.values.clone(),
            _ => self.node_jets(patch).into_iter().map(|j| j.v).collect(),
        }
    }

    pub fn node_jets(&self, patch: &SurfacePatch<T>) -> Vec<VectorJet<T>> {
        match &self.repr {
            Repr::Analytic(spec) => patch.grid().nodes().into_iter().map(|uv| analytic_jet(patch, spec, uv)).collect(),
            Repr::Sampled(s) => nodal_jets(s.spline.grid(), &s.values),
            Repr::Combination(terms) => {
                let mut out = vec![VectorJet::zero(); patch.grid().len()];
                for (c, f) in terms {
                    for (o, j) in out.iter_mut().zip(f.node_jets(patch)) {
                        *o = o.add(&j.scale(*c));
                    }
                }
                out
            }
        }
    }

    /// Serializable form; sampled data is written as node arrays.
    pub fn to_spec(&self, patch: &SurfacePatch<T>) -> FieldSpec {
        match &self.repr {
            Repr::Analytic(spec) => spec.clone(),
            _ => FieldSpec::Sampled {
                grid: patch.grid().n,
                values: self
                    .node_values(patch)
                    .iter()
                    .map(|v| [v.x.as_f64(), v.y.as_f64(), v.z.as_f64()])
                    .collect(),
            },
        }
    }
}

/// Fourth-order difference jets of node data.
pub fn nodal_jets<T: Real>(grid: &Grid<T>, values: &[Vector3<T>]) -> Vec<VectorJet<T>> {
    let [du, dv, duu, duv, dvv] = grid.vector_derivatives(values);
    (0..grid.len())
        .map(|k| VectorJet { v: values[k], du: du[k], dv: dv[k], duu: duu[k], duv: duv[k], dvv: dvv[k] })
        .collect()
}

fn validate_spec<T: Real>(patch: &SurfacePatch<T>, spec: &FieldSpec) -> Result<()> {
    match spec {
        FieldSpec::Sampled { grid, values } => {
            if *grid != patch.grid().n || values.len() != patch.grid().len() {
                Err(Error::ShapeMismatch(format!(
                    "sampled field on {grid:?} with {} values, patch grid {:?}",
                    values.len(),
                    patch.grid().n
                )))
            } else {
                Ok(())
            }
        }
        FieldSpec::Sum { parts } => parts.iter().try_for_each(|p| validate_spec(patch, p)),
        FieldSpec::Scaled { field, .. } => validate_spec(patch, field),
        _ => Ok(()),
    }
}

fn vec3<T: Real>(a: [f64; 3]) -> Vector3<T> {
    Vector3::new(T::lit(a[0]), T::lit(a[1]), T::lit(a[2]))
}

fn analytic_jet<T: Real>(patch: &SurfacePatch<T>, spec: &FieldSpec, uv: [T; 2]) -> VectorJet<T> {
    match spec {
        FieldSpec::Zero => VectorJet::zero(),
        FieldSpec::Constant { value } => VectorJet::constant(vec3(*value)),
        FieldSpec::Rotation { axis } => {
            let e: Vector3<T> = vec3(*axis);
            let r = VectorJet::from(patch.chart_jet(uv));
            r.affine(&e.cross_matrix(), &Vector3::zeros())
        }
        FieldSpec::Components { x, y, z } => {
            let (a, b, c) = (x.jet(uv[0], uv[1]), y.jet(uv[0], uv[1]), z.jet(uv[0], uv[1]));
            VectorJet {
                v: Vector3::new(a.f, b.f, c.f),
                du: Vector3::new(a.fu, b.fu, c.fu),
                dv: Vector3::new(a.fv, b.fv, c.fv),
                duu: Vector3::new(a.fuu, b.fuu, c.fuu),
                duv: Vector3::new(a.fuv, b.fuv, c.fuv),
                dvv: Vector3::new(a.fvv, b.fvv, c.fvv),
            }
        }
        FieldSpec::Sampled { values, .. } => {
            // only reachable through `analytic(...)` with raw node data
            let grid = patch.grid();
            let vals: Vec<Vector3<T>> = values.iter().map(|v| vec3(*v)).collect();
            TensorSpline::new(grid, &vals).jet(uv[0], uv[1])
        }
        FieldSpec::Sum { parts } => parts
            .iter()
            .fold(VectorJet::zero(), |acc, p| acc.add(&analytic_jet(patch, p, uv))),
        FieldSpec::Scaled { factor, field } => analytic_jet(patch, field, uv).scale(T::lit(*factor)),
    }
}

/// Ordered tuple `(V_1, ..., V_N)` generating `u_eps = id + sum eps^i V_i`.
#[derive(Clone, Debug)]
pub struct DisplacementHierarchy<T: Real> {
    pub fields: Vec<DisplacementField<T>>,
}

impl<T: Real> DisplacementHierarchy<T> {
    pub fn new(fields: Vec<DisplacementField<T>>) -> Result<Self> {
        if fields.is_empty() {
            return Err(Error::Config("a displacement hierarchy needs at least one field".into()));
        }
        Ok(Self { fields })
    }

    pub fn from_specs(patch: &SurfacePatch<T>, specs: &[FieldSpec]) -> Result<Self> {
        Self::new(specs.iter().map(|s| DisplacementField::from_spec(patch, s)).collect::<Result<_>>()?)
    }

    pub fn order(&self) -> usize {
        self.fields.len()
    }

    /// Jet of `sum eps^i V_i` (the displacement of `u_eps` from the identity).
    pub fn displacement_jet(&self, patch: &SurfacePatch<T>, uv: [T; 2], eps: T) -> VectorJet<T> {
        let mut acc = VectorJet::zero();
        let mut p = eps;
        for f in &self.fields {
            acc = acc.add(&f.jet(patch, uv).scale(p));
            p *= eps;
        }
        acc
    }
}

/// Serializable mid-surface deformation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DeformationSpec {
    Identity,
    /// `y = id + V`.
    Displaced { field: FieldSpec },
    /// Plate rolled onto a cylinder of the given radius about an axis parallel to `e_2`:
    /// `y = (R sin(x_1/R), x_2, R (1 - cos(x_1/R)) + x_3)`.
    Roll { radius: f64 },
    /// Uniform dilation `y = s id`.
    Dilation { factor: f64 },
    /// `y = Q inner + b` with `Q` the rotation by `angle` about `axis`.
    Rigid {
        axis: [f64; 3],
        angle: f64,
        #[serde(default)]
        translation: [f64; 3],
        inner: Box<DeformationSpec>,
    },
}

#[derive(Clone, Debug)]
enum DeformationRepr<T: Real> {
    Identity,
    Displaced(DisplacementField<T>),
    Roll(T),
    Dilation(T),
    Rigid { q: Matrix3<T>, b: Vector3<T>, inner: Box<MidsurfaceDeformation<T>> },
}

/// Deformation `y: S -> R^3` of the mid-surface, composed with the chart.
#[derive(Clone, Debug)]
pub struct MidsurfaceDeformation<T: Real> {
    repr: DeformationRepr<T>,
}

impl<T: Real> MidsurfaceDeformation<T> {
    pub fn identity() -> Self {
        Self { repr: DeformationRepr::Identity }
    }

    pub fn displaced(v: DisplacementField<T>) -> Self {
        Self { repr: DeformationRepr::Displaced(v) }
    }

    pub fn roll(radius: T) -> Self {
        Self { repr: DeformationRepr::Roll(radius) }
    }

    pub fn dilation(s: T) -> Self {
        Self { repr: DeformationRepr::Dilation(s) }
    }

    pub fn rigid(q: Matrix3<T>, b: Vector3<T>, inner: Self) -> Self {
        Self { repr: DeformationRepr::Rigid { q, b, inner: Box::new(inner) } }
    }

    pub fn from_spec(patch: &SurfacePatch<T>, spec: &DeformationSpec) -> Result<Self> {
        Ok(match spec {
            DeformationSpec::Identity => Self::identity(),
            DeformationSpec::Displaced { field } => Self::displaced(DisplacementField::from_spec(patch, field)?),
            DeformationSpec::Roll { radius } => {
                if !(*radius > 0.0) {
                    return Err(Error::Config("roll radius must be positive".into()));
                }
                Self::roll(T::lit(*radius))
            }
            DeformationSpec::Dilation { factor } => Self::dilation(T::lit(*factor)),
            DeformationSpec::Rigid { axis, angle, translation, inner } => Self::rigid(
                rotation(&vec3(*axis), T::lit(*angle)),
                vec3(*translation),
                Self::from_spec(patch, inner)?,
            ),
        })
    }

    fn compose(&self, r: VectorJet<T>, disp: impl Fn() -> VectorJet<T>) -> VectorJet<T> {
        match &self.repr {
            DeformationRepr::Identity => r,
            DeformationRepr::Displaced(_) => r.add(&disp()),
            DeformationRepr::Dilation(s) => r.scale(*s),
            DeformationRepr::Roll(radius) => roll_jet(&r, *radius),
            DeformationRepr::Rigid { q, b, inner } => inner.compose(r, disp).affine(q, b),
        }
    }

    fn displacement(&self) -> Option<&DisplacementField<T>> {
        match &self.repr {
            DeformationRepr::Displaced(v) => Some(v),
            DeformationRepr::Rigid { inner, .. } => inner.displacement(),
            _ => None,
        }
    }

    pub fn jet(&self, patch: &SurfacePatch<T>, uv: [T; 2]) -> VectorJet<T> {
        let r = VectorJet::from(patch.chart_jet(uv));
        self.compose(r, || self.displacement().map(|v| v.jet(patch, uv)).unwrap_or_else(VectorJet::zero))
    }

    pub fn node_jets(&self, patch: &SurfacePatch<T>) -> Vec<VectorJet<T>> {
        let disp = self.displacement().map(|v| v.node_jets(patch));
        patch
            .node_forms()
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let r = VectorJet::from(f.chart);
                self.compose(r, || disp.as_ref().map(|d| d[k]).unwrap_or_else(VectorJet::zero))
            })
            .collect()
    }
}

fn roll_jet<T: Real>(r: &VectorJet<T>, radius: T) -> VectorJet<T> {
    // y = (R sin(x1/R), x2, R(1 - cos(x1/R)) + x3), chain rule through the chart jet
    let x1 = r.v.x;
    let (s, c) = ((x1 / radius).sin(), (x1 / radius).cos());
    let d1 = Vector3::new(c, T::zero(), s);
    let d11 = Vector3::new(-s / radius, T::zero(), c / radius);
    let lin = |d: &Vector3<T>| Vector3::new(T::zero(), d.y, d.z);
    let first = |d: &Vector3<T>| d1 * d.x + lin(d);
    let second = |dij: &Vector3<T>, di: &Vector3<T>, dj: &Vector3<T>| d11 * (di.x * dj.x) + d1 * dij.x + lin(dij);
    VectorJet {
        v: Vector3::new(radius * s, r.v.y, radius * (T::one() - c) + r.v.z),
        du: first(&r.du),
        dv: first(&r.dv),
        duu: second(&r.duu, &r.du, &r.du),
        duv: second(&r.duv, &r.du, &r.dv),
        dvv: second(&r.dvv, &r.dv, &r.dv),
    }
}

/// Symmetric strain field `B_tan`, in chart (covariant) components.
#[derive(Clone, Debug)]
pub enum StrainField<T: Real> {
    Zero,
    /// Node values `(B_11, B_12, B_22)` interpolated by spline.
    Nodal { values: Vec<Matrix2<T>>, spline: TensorSpline<T> },
    /// `sym (grad r)^T grad w` of a displacement `w`.
    Induced(DisplacementField<T>),
}

impl<T: Real> StrainField<T> {
    pub fn nodal(grid: &Grid<T>, values: Vec<Matrix2<T>>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::ShapeMismatch(format!("{} strain values for {} nodes", values.len(), grid.len())));
        }
        let packed: Vec<Vector3<T>> = values.iter().map(|m| Vector3::new(m[(0, 0)], m[(0, 1)], m[(1, 1)])).collect();
        let spline = TensorSpline::new(grid, &packed);
        Ok(StrainField::Nodal { values, spline })
    }

    pub fn at(&self, patch: &SurfacePatch<T>, uv: [T; 2], forms: &FundamentalForms<T>) -> Matrix2<T> {
        match self {
            StrainField::Zero => Matrix2::zeros(),
            StrainField::Nodal { spline, .. } => {
                let p = spline.jet(uv[0], uv[1]).v;
                Matrix2::new(p.x, p.y, p.y, p.z)
            }
            StrainField::Induced(w) => super::sym_tangential_gradient(forms, &w.jet(patch, uv)),
        }
    }

    pub fn node_values(&self, patch: &SurfacePatch<T>) -> Vec<Matrix2<T>> {
        match self {
            StrainField::Zero => vec![Matrix2::zeros(); patch.grid().len()],
            StrainField::Nodal { values, .. } => values.clone(),
            // grid differences throughout, matching the discrete strain operator
            StrainField::Induced(w) => {
                let tw = super::tangents_of(patch, &w.node_values(patch));
                let tr = super::reference_tangents(patch);
                tw.iter()
                    .zip(&tr)
                    .map(|(d, a)| {
                        let c = |i: usize, j: usize| (a[i].dot(&d[j]) + a[j].dot(&d[i])) * T::lit(0.5);
                        Matrix2::new(c(0, 0), c(0, 1), c(0, 1), c(1, 1))
                    })
                    .collect()
            }
        }
    }
}
