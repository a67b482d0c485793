//! Node-based discretization of the linearized change of metric.
//!
//! Unknowns are node displacements (three components per node, `col = 3 * node + c`);
//! derivatives are the fourth-order grid differences, and the reference tangents are the
//! differences of the chart itself, so rigid motions lie exactly in the kernel.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use serde::Serialize;

use super::field::{DisplacementField, StrainField};
use crate::error::{Error, Result};
use crate::geometry::{surface_integral, SurfacePatch};
use crate::scalar::Real;

/// Sparse rows `sqrt(w_k) (e_11, sqrt2 e_12, e_22)` of the orthonormal-frame linearized
/// strain `sym T^T D x` at selected nodes, for given tangents `T_1, T_2` per node.
#[derive(Clone, Debug)]
pub struct StrainOperator<T: Real> {
    pub rows: Vec<Vec<(usize, T)>>,
    pub ncols: usize,
}

impl<T: Real> StrainOperator<T> {
    pub fn new(patch: &SurfacePatch<T>, tangents: &[[Vector3<T>; 2]], nodes: &[usize], weights: &[T]) -> Self {
        let grid = patch.grid();
        let half = T::lit(0.5);
        let root2 = T::lit(std::f64::consts::SQRT_2);
        let rows = nodes
            .iter()
            .flat_map(|&k| {
                let jm = patch.node_forms()[k].frame;
                let drow = [grid.derivative_row(k, (1, 0)), grid.derivative_row(k, (0, 1))];
                let sw = weights[k].sqrt();
                [(0, 0, T::one()), (0, 1, root2), (1, 1, T::one())]
                    .into_iter()
                    .map(|(al, be, f)| {
                        let mut acc: BTreeMap<usize, T> = BTreeMap::new();
                        for i in 0..2 {
                            for j in 0..2 {
                                let s = (jm[(i, al)] * jm[(j, be)] + jm[(i, be)] * jm[(j, al)]) * half * f * sw;
                                if s == T::zero() {
                                    continue;
                                }
                                for &(m, c) in &drow[j] {
                                    for comp in 0..3 {
                                        let v = s * c * tangents[k][i][comp];
                                        *acc.entry(3 * m + comp).or_insert(T::zero()) += v;
                                    }
                                }
                            }
                        }
                        acc.into_iter().filter(|(_, v)| *v != T::zero()).collect::<Vec<_>>()
                    })
                    .collect::<Vec<_>>()
            })
            .collect();
        Self { rows, ncols: 3 * grid.len() }
    }

    /// Operator at all nodes about the reference surface, weighted by the node area weights.
    pub fn reference(patch: &SurfacePatch<T>) -> Self {
        let nodes: Vec<usize> = (0..patch.grid().len()).collect();
        Self::new(patch, &reference_tangents(patch), &nodes, &patch.node_area_weights())
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(T::zero(), |s, (c, v)| s + *v * x[*c]))
            .collect()
    }

    pub fn apply_transpose(&self, y: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); self.ncols];
        for (r, yi) in self.rows.iter().zip(y) {
            for (c, v) in r {
                out[*c] += *v * *yi;
            }
        }
        out
    }

    /// `L^T L` as a dense matrix.
    pub fn normal_matrix(&self) -> DMatrix<T> {
        let mut k = DMatrix::zeros(self.ncols, self.ncols);
        for r in &self.rows {
            for (a, va) in r {
                for (b, vb) in r {
                    k[(*a, *b)] += *va * *vb;
                }
            }
        }
        k
    }

    /// `L L^T` as a dense matrix.
    pub fn gram_matrix(&self) -> DMatrix<T> {
        let dense: Vec<BTreeMap<usize, T>> = self.rows.iter().map(|r| r.iter().cloned().collect()).collect();
        let m = self.rows.len();
        let mut g = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let s = self.rows[i]
                    .iter()
                    .fold(T::zero(), |s, (c, v)| s + dense[j].get(c).map_or(T::zero(), |w| *v * *w));
                g[(i, j)] = s;
                g[(j, i)] = s;
            }
        }
        g
    }
}

/// Grid differences of the chart node positions.
pub fn reference_tangents<T: Real>(patch: &SurfacePatch<T>) -> Vec<[Vector3<T>; 2]> {
    let r: Vec<Vector3<T>> = patch.node_forms().iter().map(|f| f.chart.r).collect();
    tangents_of(patch, &r)
}

pub fn tangents_of<T: Real>(patch: &SurfacePatch<T>, y: &[Vector3<T>]) -> Vec<[Vector3<T>; 2]> {
    let grid = patch.grid();
    let du = grid.apply(y, (1, 0));
    let dv = grid.apply(y, (0, 1));
    du.into_iter().zip(dv).map(|(a, b)| [a, b]).collect()
}

/// `G(y) - G(r)` at the nodes with both metrics from grid differences.
pub fn discrete_metric_defect<T: Real>(patch: &SurfacePatch<T>, y: &[Vector3<T>]) -> Vec<Matrix2<T>> {
    let ty = tangents_of(patch, y);
    let tr = reference_tangents(patch);
    ty.iter()
        .zip(&tr)
        .map(|(a, r)| {
            let d = [a[0] - r[0], a[1] - r[1]];
            let c = |i: usize, j: usize| r[i].dot(&d[j]) + d[i].dot(&r[j]) + d[i].dot(&d[j]);
            let off = (c(0, 1) + c(1, 0)) * T::lit(0.5);
            Matrix2::new(c(0, 0), off, off, c(1, 1))
        })
        .collect()
}

/// Translations `e_c` and linearized rotations `e_c x r` at the nodes.
pub fn rigid_fields<T: Real>(patch: &SurfacePatch<T>) -> Vec<Vec<Vector3<T>>> {
    let r: Vec<Vector3<T>> = patch.node_forms().iter().map(|f| f.chart.r).collect();
    let mut out = Vec::with_capacity(6);
    for c in 0..3 {
        out.push(vec![Vector3::ith(c, T::one()); r.len()]);
    }
    for c in 0..3 {
        let e = Vector3::ith(c, T::one());
        out.push(r.iter().map(|x| e.cross(x)).collect());
    }
    out
}

fn flatten<T: Real>(v: &[Vector3<T>]) -> Vec<T> {
    v.iter().flat_map(|x| [x.x, x.y, x.z]).collect()
}

fn unflatten<T: Real>(x: &[T]) -> Vec<Vector3<T>> {
    x.chunks(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect()
}

/// M-orthonormal basis (columns, in `M^{1/2}` coordinates) of the rigid fields.
fn rigid_basis<T: Real>(patch: &SurfacePatch<T>, sqrt_m: &[T]) -> DMatrix<T> {
    let fields = rigid_fields(patch);
    let n = sqrt_m.len();
    let mut q = DMatrix::<T>::zeros(n, fields.len());
    let mut kept = 0;
    for f in &fields {
        let mut v = DVector::from_iterator(n, flatten(f).into_iter().zip(sqrt_m).map(|(x, s)| x * *s));
        let scale = v.norm();
        for _ in 0..2 {
            for c in 0..kept {
                let col = q.column(c).clone_owned();
                let p = col.dot(&v);
                v -= col * p;
            }
        }
        let nv = v.norm();
        if nv > T::lit(1e-10) * scale {
            q.set_column(kept, &(v / nv));
            kept += 1;
        }
    }
    q.columns(0, kept).clone_owned()
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryCondition {
    #[default]
    Free,
    /// Displacement fixed to zero along the edge `u = u_min`.
    ClampedEdge,
}

#[derive(Clone, Debug)]
pub struct IsometryModes<T: Real> {
    pub modes: Vec<DisplacementField<T>>,
    /// Rayleigh quotients `|sym grad V|^2 / |V|^2` of the returned modes, ascending.
    pub quotients: Vec<T>,
    pub in_v1: Vec<bool>,
    /// Scale-aware quotient threshold for membership in the infinitesimal isometries.
    pub tolerance: T,
    /// Quotients of the six analytic rigid fields (free boundary only).
    pub rigid_quotients: Vec<T>,
    /// Number of quotients `<= 1e-12` in the full spectrum, rigid modes included.
    pub zero_mode_count: usize,
}

pub const ZERO_QUOTIENT: f64 = 1e-12;

/// Quotient threshold for membership in V1, relative to `int |Pi|^2 + 1`.
pub const V1_QUOTIENT_TOLERANCE: f64 = 1e-8;

/// Rayleigh quotient of the discrete strain form for node data.
pub fn rayleigh_quotient<T: Real>(patch: &SurfacePatch<T>, values: &[Vector3<T>]) -> T {
    let op = StrainOperator::reference(patch);
    let x = flatten(values);
    let num = op.apply(&x).iter().fold(T::zero(), |s, y| s + *y * *y);
    let den = patch
        .node_area_weights()
        .iter()
        .zip(values)
        .fold(T::zero(), |s, (w, v)| s + *w * v.norm_squared());
    num / den
}

/// Lowest `k` generalized eigenmodes of the discrete strain form against the lumped mass,
/// with the rigid motions deflated (free boundary) or excluded by the clamp.
pub fn solve_infinitesimal_isometries<T: Real>(
    patch: &SurfacePatch<T>,
    k: usize,
    bc: BoundaryCondition,
) -> Result<IsometryModes<T>> {
    patch.require_regular_nodes()?;
    if k == 0 {
        return Err(Error::Config("requested zero modes".into()));
    }
    let grid = patch.grid();
    let op = StrainOperator::reference(patch);
    let full_k = op.normal_matrix();
    let mass: Vec<T> = patch.node_area_weights().iter().flat_map(|w| [*w, *w, *w]).collect();
    let dofs: Vec<usize> = match bc {
        BoundaryCondition::Free => (0..op.ncols).collect(),
        BoundaryCondition::ClampedEdge => (0..op.ncols).filter(|c| grid.ij(c / 3).0 != 0).collect(),
    };
    let n = dofs.len();
    if k > n.saturating_sub(6) {
        return Err(Error::Config(format!("requested {k} modes of a {n}-dimensional space")));
    }
    let sqrt_m: Vec<T> = dofs.iter().map(|&c| mass[c].sqrt()).collect();
    let mut ks = DMatrix::from_fn(n, n, |a, b| full_k[(dofs[a], dofs[b])] / (sqrt_m[a] * sqrt_m[b]));

    let (rigid_quotients, q) = match bc {
        BoundaryCondition::Free => {
            let rq = rigid_fields(patch).iter().map(|f| rayleigh_quotient(patch, f)).collect();
            (rq, Some(rigid_basis(patch, &sqrt_m)))
        }
        BoundaryCondition::ClampedEdge => (Vec::new(), None),
    };
    let deflated = q.as_ref().map_or(0, |q| q.ncols());
    if let Some(q) = &q {
        let p = DMatrix::<T>::identity(n, n) - q * q.transpose();
        let shift = (0..n).fold(T::zero(), |s, i| s + ks[(i, i)]) + T::one();
        ks = &p * ks * &p + q * q.transpose() * shift;
        ks = (&ks + ks.transpose()) * T::lit(0.5);
    }
    let eig = nalgebra::SymmetricEigen::try_new(ks, T::default_epsilon(), 0)
        .ok_or_else(|| Error::SolverFailure("symmetric eigensolver did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|a, b| {
        eig.eigenvalues[*a]
            .partial_cmp(&eig.eigenvalues[*b])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.cmp(b))
    });
    let spectrum: Vec<T> = order.iter().take(n - deflated).map(|&i| eig.eigenvalues[i]).collect();

    let zero = T::lit(ZERO_QUOTIENT);
    let zero_mode_count = rigid_quotients.iter().filter(|q: &&T| q.abs() <= zero).count()
        + spectrum.iter().filter(|v| v.abs() <= zero).count();
    let curvature = surface_integral(patch, |qp| {
        let s = qp.forms.shape_orthonormal();
        s.iter().fold(T::zero(), |a, x| a + *x * *x)
    });
    let tolerance = T::lit(V1_QUOTIENT_TOLERANCE) * (curvature + T::one());

    let mut modes = Vec::with_capacity(k);
    let mut quotients = Vec::with_capacity(k);
    for &i in order.iter().take(k) {
        let y = eig.eigenvectors.column(i);
        let mut x = vec![T::zero(); op.ncols];
        for (a, &c) in dofs.iter().enumerate() {
            x[c] = y[a] / sqrt_m[a];
        }
        let norm = x.iter().zip(&mass).fold(T::zero(), |s, (v, m)| s + *v * *v * *m).sqrt();
        let pivot = x
            .iter()
            .enumerate()
            .fold((0, T::zero()), |(bi, bv), (j, v)| if v.abs() > bv.abs() * T::lit(1.0 + 1e-9) { (j, *v) } else { (bi, bv) })
            .1;
        let sign = if pivot < T::zero() { -T::one() } else { T::one() };
        let values = unflatten(&x.iter().map(|v| *v * sign / norm).collect::<Vec<_>>());
        modes.push(DisplacementField::sampled(grid, values)?);
        quotients.push(eig.eigenvalues[i].max(T::zero()));
    }
    let in_v1 = quotients.iter().map(|q| *q <= tolerance).collect();
    Ok(IsometryModes { modes, quotients, in_v1, tolerance, rigid_quotients, zero_mode_count })
}

#[derive(Clone, Copy, Debug)]
pub struct ProjectOptions {
    /// Tikhonov weight relative to the mean diagonal of the normal matrix, used when the
    /// strain operator has a kernel beyond the rigid motions (plates).
    pub regularization: f64,
}

impl Default for ProjectOptions {
    fn default() -> Self {
        Self { regularization: 1e-13 }
    }
}

#[derive(Clone, Debug)]
pub struct StrainProjection<T: Real> {
    pub w: DisplacementField<T>,
    /// `|sym grad w - B|_{L2}` on the grid.
    pub residual: T,
    pub relative_residual: T,
}

/// Least-squares `w` with `sym grad w` closest to `B` in L2, rigid part removed.
pub fn finite_strain_project<T: Real>(
    patch: &SurfacePatch<T>,
    b: &StrainField<T>,
    opts: &ProjectOptions,
) -> Result<StrainProjection<T>> {
    patch.require_regular_nodes()?;
    let op = StrainOperator::reference(patch);
    let weights = patch.node_area_weights();
    let root2 = T::lit(std::f64::consts::SQRT_2);
    let rhs: Vec<T> = b
        .node_values(patch)
        .iter()
        .zip(patch.node_forms())
        .zip(&weights)
        .flat_map(|((m, f), w)| {
            let o = f.to_orthonormal(m);
            let s = w.sqrt();
            [o[(0, 0)] * s, (o[(0, 1)] + o[(1, 0)]) * T::lit(0.5) * root2 * s, o[(1, 1)] * s]
        })
        .collect();
    let bnorm = rhs.iter().fold(T::zero(), |s, v| s + *v * *v).sqrt();
    let n = op.ncols;
    let mass: Vec<T> = weights.iter().flat_map(|w| [*w, *w, *w]).collect();
    let sqrt_m: Vec<T> = mass.iter().map(|m| m.sqrt()).collect();
    let q = rigid_basis(patch, &sqrt_m);
    // penalizing the M-orthonormal rigid fields removes the rigid kernel without biasing
    // the minimizer; Tikhonov is only added if further kernel directions remain
    let mut k = op.normal_matrix();
    let mean_diag = (0..n).fold(T::zero(), |s, i| s + k[(i, i)]) / T::lit(n as f64);
    let mq = DMatrix::from_fn(n, q.ncols(), |i, j| q[(i, j)] * sqrt_m[i]);
    k += &mq * mq.transpose() * mean_diag;
    let rhs_n = DVector::from_vec(op.apply_transpose(&rhs));
    let mut x = match k.clone().cholesky() {
        Some(c) => c.solve(&rhs_n),
        None => {
            let delta = T::lit(opts.regularization) * mean_diag.max(T::lit(1e-300));
            for i in 0..n {
                k[(i, i)] += delta;
            }
            k.cholesky()
                .ok_or_else(|| Error::SolverFailure("normal equations are not positive definite".into()))?
                .solve(&rhs_n)
        }
    };

    let mut y = DVector::from_iterator(n, x.iter().zip(&sqrt_m).map(|(v, s)| *v * *s));
    let coeff = q.transpose() * &y;
    y -= &q * coeff;
    for i in 0..n {
        x[i] = y[i] / sqrt_m[i];
    }

    let xs: Vec<T> = x.iter().cloned().collect();
    let residual = op
        .apply(&xs)
        .iter()
        .zip(&rhs)
        .fold(T::zero(), |s, (a, b)| s + (*a - *b) * (*a - *b))
        .sqrt();
    let relative_residual = if bnorm > T::zero() { residual / bnorm } else { T::zero() };
    Ok(StrainProjection {
        w: DisplacementField::sampled(patch.grid(), unflatten(&xs))?,
        residual,
        relative_residual,
    })
}
