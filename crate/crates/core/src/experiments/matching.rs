//! Newton solver for exact isometries `id + eps V + eps^2 w` near an infinitesimal isometry.
//!
//! The metric equations are imposed at the interior nodes, with metrics taken from grid
//! differences of the node positions. The interior system is underdetermined; Newton steps
//! are minimum-norm solutions of the linearized equations.

use nalgebra::{DMatrix, DVector, Vector3};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{ellipticity_check, SurfacePatch, DEFAULT_ELLIPTICITY_THRESHOLD};
use crate::kinematics::{
    discrete_metric_defect, rayleigh_quotient, reference_tangents, tangents_of, DisplacementField, StrainOperator,
};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, serde::Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MatchingOptions {
    /// Required sup-norm of the metric defect (orthonormal components).
    pub tol: f64,
    pub max_iter: usize,
    /// Largest accepted Rayleigh quotient of `V`, relative to `int |Pi|^2 + 1`.
    pub v1_tolerance: f64,
    /// Weight of the second-derivative part of the norm the iterates minimize.
    pub smoothing: f64,
}

impl Default for MatchingOptions {
    fn default() -> Self {
        Self { tol: 1e-10, max_iter: 30, v1_tolerance: 1e-8, smoothing: 1.0 }
    }
}

#[derive(Clone, Debug)]
pub struct MatchingSolution<T: Real> {
    pub eps: f64,
    pub w: DisplacementField<T>,
    pub defect: f64,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub sup_norm: f64,
    /// `max |w| + max |Dw| + max |D^2 w|` over the nodes.
    pub c2_norm: f64,
    /// Size of the correction projecting `V` onto the interior discrete kernel.
    pub projection: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MatchingResult {
    pub eps: Vec<f64>,
    pub sup_norms: Vec<f64>,
    pub c2_norms: Vec<f64>,
    pub defects: Vec<f64>,
    pub iterations: Vec<usize>,
    /// `sup|w_{eps_{k+1}}| / sup|w_{eps_k}|`.
    pub sup_ratios: Vec<f64>,
}

fn interior<T: Real>(patch: &SurfacePatch<T>) -> Vec<usize> {
    (0..patch.grid().len()).filter(|k| !patch.grid().is_boundary(*k)).collect()
}

fn flatten<T: Real>(v: &[Vector3<T>]) -> DVector<T> {
    DVector::from_iterator(3 * v.len(), v.iter().flat_map(|x| [x.x, x.y, x.z]))
}

fn unflatten<T: Real>(x: &DVector<T>) -> Vec<Vector3<T>> {
    x.as_slice().chunks(3).map(|c| Vector3::new(c[0], c[1], c[2])).collect()
}

/// Inverse of the node metric `S = M + gamma (D_uu^T M D_uu + 2 D_uv^T M D_uv + D_vv^T M D_vv)`,
/// `M` the node area weights, acting on each component. Steps minimizing `x^T S x` avoid the
/// odd-even oscillations the centered first-difference stencils cannot see.
struct NodeMetric<T: Real> {
    inv: DMatrix<T>,
}

impl<T: Real> NodeMetric<T> {
    fn new(patch: &SurfacePatch<T>, gamma: T) -> Result<Self> {
        let grid = patch.grid();
        let n = grid.len();
        let wts = patch.node_area_weights();
        let mut s = DMatrix::<T>::zeros(n, n);
        for k in 0..n {
            s[(k, k)] += wts[k];
        }
        if gamma > T::zero() {
            for (order, f) in [((2, 0), 1.0), ((1, 1), 2.0), ((0, 2), 1.0)] {
                for k in 0..n {
                    let row = grid.derivative_row(k, order);
                    let c = gamma * T::lit(f) * wts[k];
                    for (a, va) in &row {
                        for (b, vb) in &row {
                            s[(*a, *b)] += c * *va * *vb;
                        }
                    }
                }
            }
        }
        let inv = s
            .cholesky()
            .ok_or_else(|| Error::SolverFailure("node metric is not positive definite".into()))?
            .inverse();
        Ok(Self { inv })
    }

    /// Solution of `L x = b` with the least `x^T S x`: `x = S^-1 L^T (L S^-1 L^T)^-1 b`.
    fn solve(&self, op: &StrainOperator<T>, b: &DVector<T>) -> Result<DVector<T>> {
        let (m, n3) = (op.rows.len(), op.ncols);
        let mut x = DMatrix::<T>::zeros(n3, m);
        for (r, row) in op.rows.iter().enumerate() {
            for (c, v) in row {
                let (node, comp) = (c / 3, c % 3);
                for i in 0..self.inv.nrows() {
                    x[(3 * i + comp, r)] += *v * self.inv[(i, node)];
                }
            }
        }
        let mut g = DMatrix::<T>::zeros(m, m);
        for (r, row) in op.rows.iter().enumerate() {
            for q in 0..m {
                g[(r, q)] = row.iter().fold(T::zero(), |acc, (c, v)| acc + *v * x[(*c, q)]);
            }
        }
        let g = (&g + g.transpose()) * T::lit(0.5);
        let y = match g.clone().cholesky() {
            Some(ch) => ch.solve(b),
            None => {
                let mut g = g;
                let delta = (0..m).fold(T::zero(), |s, i| s + g[(i, i)]) / T::lit(m as f64) * T::lit(1e-12);
                for i in 0..m {
                    g[(i, i)] += delta;
                }
                g.cholesky()
                    .ok_or_else(|| Error::SolverFailure("singular linearized metric operator".into()))?
                    .solve(b)
            }
        };
        Ok(x * y)
    }
}

/// Residual entries `(C_11, sqrt2 C_12, C_22) / scale` of the orthonormal metric defect at
/// the given nodes, and its sup-norm (unscaled).
fn residual<T: Real>(patch: &SurfacePatch<T>, y: &[Vector3<T>], nodes: &[usize], scale: T) -> (DVector<T>, T) {
    let c = discrete_metric_defect(patch, y);
    let root2 = T::lit(std::f64::consts::SQRT_2);
    let mut sup = T::zero();
    let mut out = Vec::with_capacity(3 * nodes.len());
    for &k in nodes {
        let o = patch.node_forms()[k].to_orthonormal(&c[k]);
        sup = sup.max(o.abs().max());
        out.extend([o[(0, 0)] / scale, o[(0, 1)] * root2 / scale, o[(1, 1)] / scale]);
    }
    (DVector::from_vec(out), sup)
}

/// Solves the discrete exact-isometry equations for `w` by damped Newton iteration from
/// `w = 0`. `V` is first projected onto the kernel of the interior linearized operator.
pub fn matching_solve<T: Real>(
    patch: &SurfacePatch<T>,
    v: &DisplacementField<T>,
    eps: T,
    opts: &MatchingOptions,
) -> Result<MatchingSolution<T>> {
    patch.require_regular_nodes()?;
    let ell = ellipticity_check(patch, DEFAULT_ELLIPTICITY_THRESHOLD);
    if !ell.is_elliptic {
        return Err(Error::NotElliptic);
    }
    let grid = patch.grid();
    let n = grid.len();
    let vn = v.node_values(patch);
    let zero = || -> Result<MatchingSolution<T>> {
        Ok(MatchingSolution {
            eps: eps.as_f64(),
            w: DisplacementField::sampled(grid, vec![Vector3::zeros(); n])?,
            defect: 0.0,
            iterations: 0,
            trace: vec![0.0],
            sup_norm: 0.0,
            c2_norm: 0.0,
            projection: 0.0,
        })
    };
    if vn.iter().all(|x| x.norm() == T::zero()) {
        return zero();
    }
    let curvature = crate::geometry::surface_integral(patch, |q| q.forms.shape_orthonormal().norm_squared());
    let quotient = rayleigh_quotient(patch, &vn);
    if !(quotient <= T::lit(opts.v1_tolerance) * (curvature + T::one())) {
        return Err(Error::NotAnIsometry(format!("Rayleigh quotient {:e}", quotient.as_f64())));
    }

    let nodes = interior(patch);
    let unit = vec![T::one(); n];
    let metric = NodeMetric::new(patch, T::lit(opts.smoothing))?;
    let l0 = StrainOperator::new(patch, &reference_tangents(patch), &nodes, &unit);
    let vx = flatten(&vn);
    let lv = DVector::from_vec(l0.apply(vx.as_slice()));
    let dv = metric.solve(&l0, &lv)?;
    let vx = vx - &dv;
    let projection = dv.amax().as_f64();
    let vn = unflatten(&vx);

    let r: Vec<Vector3<T>> = patch.node_forms().iter().map(|f| f.chart.r).collect();
    let eps2 = eps * eps;
    let position = |w: &DVector<T>| -> Vec<Vector3<T>> {
        let wn = unflatten(w);
        (0..n).map(|k| r[k] + vn[k] * eps + wn[k] * eps2).collect()
    };
    let mut w = DVector::<T>::zeros(3 * n);
    let (mut f, mut sup) = residual(patch, &position(&w), &nodes, eps2);
    let target = T::lit(opts.tol * 1e-2);
    let mut trace = vec![sup.as_f64()];
    let mut iterations = 0;
    while sup > target && iterations < opts.max_iter {
        iterations += 1;
        let tangents = tangents_of(patch, &position(&w));
        let mut jac = StrainOperator::new(patch, &tangents, &nodes, &unit);
        for row in jac.rows.iter_mut() {
            for (_, c) in row.iter_mut() {
                *c *= T::lit(2.0);
            }
        }
        // smoothest w_new with J w_new = J w - F; the step is w - w_new
        let rhs = DVector::from_vec(jac.apply(w.as_slice())) - &f;
        let step = &w - metric.solve(&jac, &rhs)?;
        let fnorm = f.norm();
        let mut alpha = T::one();
        let mut accepted = None;
        for _ in 0..30 {
            let trial = &w - &step * alpha;
            let (ft, st) = residual(patch, &position(&trial), &nodes, eps2);
            if ft.norm() < fnorm {
                accepted = Some((trial, ft, st));
                break;
            }
            alpha *= T::lit(0.5);
        }
        match accepted {
            Some((wt, ft, st)) => {
                let stalled = st <= T::lit(opts.tol) && st > sup * T::lit(0.5);
                w = wt;
                f = ft;
                sup = st;
                trace.push(sup.as_f64());
                if stalled {
                    // converged to the roundoff floor of the residual
                    break;
                }
            }
            None => break,
        }
    }
    if !(sup <= T::lit(opts.tol)) {
        return Err(Error::NewtonDiverged { iterations, trace });
    }
    let wn = unflatten(&w);
    let [du, dv_, duu, duv, dvv] = grid.vector_derivatives(&wn);
    let mx = |v: &[Vector3<T>]| v.iter().fold(0.0f64, |m, x| m.max(x.norm().as_f64()));
    let sup_norm = mx(&wn);
    let c2_norm = sup_norm + mx(&du).max(mx(&dv_)) + mx(&duu).max(mx(&duv)).max(mx(&dvv));
    Ok(MatchingSolution {
        eps: eps.as_f64(),
        w: DisplacementField::sampled(grid, wn)?,
        defect: sup.as_f64(),
        iterations,
        trace,
        sup_norm,
        c2_norm,
        projection,
    })
}

/// `matching_solve` over a list of `eps` (in the given order).
pub fn matching_sweep<T: Real>(
    patch: &SurfacePatch<T>,
    v: &DisplacementField<T>,
    eps: &[f64],
    opts: &MatchingOptions,
) -> Result<(MatchingResult, Vec<MatchingSolution<T>>)> {
    let sols = eps
        .iter()
        .map(|e| matching_solve(patch, v, T::lit(*e), opts))
        .collect::<Result<Vec<_>>>()?;
    let sup_norms: Vec<f64> = sols.iter().map(|s| s.sup_norm).collect();
    let sup_ratios = sup_norms
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] } else { f64::NAN })
        .collect();
    Ok((
        MatchingResult {
            eps: eps.to_vec(),
            c2_norms: sols.iter().map(|s| s.c2_norm).collect(),
            defects: sols.iter().map(|s| s.defect).collect(),
            iterations: sols.iter().map(|s| s.iterations).collect(),
            sup_norms,
            sup_ratios,
        },
        sols,
    ))
}
