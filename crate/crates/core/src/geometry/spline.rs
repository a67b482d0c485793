//! Tensor-product cubic spline interpolation of node data (not-a-knot end conditions).
//!
//! Sampled fields produced by the solvers are evaluated off the grid through this
//! interpolant; it is C^2, so difference quotients across knots stay well behaved.

use nalgebra::{DMatrix, Vector3};

use super::grid::Grid;
use super::jet::VectorJet;
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct TensorSpline<T: Real> {
    grid: Grid<T>,
    /// `(n0 + 2) x (n1 + 2)` B-spline coefficients, u fastest.
    coef: Vec<Vector3<T>>,
}

/// Inverse of the not-a-knot collocation matrix for `n` nodes.
fn collocation_inverse<T: Real>(n: usize) -> DMatrix<T> {
    let m = n + 2;
    let mut a = DMatrix::<T>::zeros(m, m);
    let sixth = T::lit(1.0 / 6.0);
    // row 0 and row m-1: third-derivative continuity at x_1 and x_{n-2}
    for (k, w) in [-1.0, 4.0, -6.0, 4.0, -1.0].iter().enumerate() {
        a[(0, k)] = T::lit(*w);
        a[(m - 1, m - 5 + k)] = T::lit(*w);
    }
    for i in 0..n {
        // s(x_i) = (c_{i-1} + 4 c_i + c_{i+1}) / 6, coefficient c_k stored at k + 1
        a[(i + 1, i)] = sixth;
        a[(i + 1, i + 1)] = T::lit(4.0) * sixth;
        a[(i + 1, i + 2)] = sixth;
    }
    a.try_inverse().expect("spline collocation matrix is invertible")
}

fn basis<T: Real>(t: T) -> [[T; 4]; 3] {
    let six = T::lit(6.0);
    let one = T::one();
    let (t2, t3) = (t * t, t * t * t);
    let s = one - t;
    let l = |x: f64| T::lit(x);
    [
        [
            s * s * s / six,
            (l(3.0) * t3 - l(6.0) * t2 + l(4.0)) / six,
            (-l(3.0) * t3 + l(3.0) * t2 + l(3.0) * t + one) / six,
            t3 / six,
        ],
        [
            -s * s / l(2.0),
            (l(9.0) * t2 - l(12.0) * t) / six,
            (-l(9.0) * t2 + l(6.0) * t + l(3.0)) / six,
            t2 / l(2.0),
        ],
        [s, l(3.0) * t - l(2.0), -l(3.0) * t + one, t],
    ]
}

impl<T: Real> TensorSpline<T> {
    pub fn new(grid: &Grid<T>, values: &[Vector3<T>]) -> Self {
        assert_eq!(values.len(), grid.len());
        let [n0, n1] = grid.n;
        let (m0, m1) = (n0 + 2, n1 + 2);
        let inv0 = collocation_inverse::<T>(n0);
        let inv1 = collocation_inverse::<T>(n1);
        // along u for each grid row
        let mut tmp = vec![Vector3::zeros(); m0 * n1];
        for j in 0..n1 {
            for a in 0..m0 {
                let mut acc = Vector3::zeros();
                for i in 0..n0 {
                    acc += values[grid.index(i, j)] * inv0[(a, i + 1)];
                }
                tmp[a + m0 * j] = acc;
            }
        }
        let mut coef = vec![Vector3::zeros(); m0 * m1];
        for a in 0..m0 {
            for b in 0..m1 {
                let mut acc = Vector3::zeros();
                for j in 0..n1 {
                    acc += tmp[a + m0 * j] * inv1[(b, j + 1)];
                }
                coef[a + m0 * b] = acc;
            }
        }
        Self { grid: grid.clone(), coef }
    }

    fn locate(&self, axis: usize, x: T) -> (usize, T) {
        let h = self.grid.spacing(axis);
        let s = (x - self.grid.lo[axis]) / h;
        let last = self.grid.n[axis] - 2;
        let j = s.floor().as_f64().clamp(0.0, last as f64) as usize;
        (j, s - T::lit(j as f64))
    }

    pub fn jet(&self, u: T, v: T) -> VectorJet<T> {
        let (ju, tu) = self.locate(0, u);
        let (jv, tv) = self.locate(1, v);
        let bu = basis(tu);
        let bv = basis(tv);
        let (hu, hv) = (self.grid.spacing(0), self.grid.spacing(1));
        let m0 = self.grid.n[0] + 2;
        let mut out = VectorJet::zero();
        for b in 0..4 {
            for a in 0..4 {
                // local basis index a corresponds to coefficient c_{ju - 1 + a}, stored at ju + a
                let c = self.coef[(ju + a) + m0 * (jv + b)];
                out.v += c * (bu[0][a] * bv[0][b]);
                out.du += c * (bu[1][a] * bv[0][b] / hu);
                out.dv += c * (bu[0][a] * bv[1][b] / hv);
                out.duu += c * (bu[2][a] * bv[0][b] / (hu * hu));
                out.duv += c * (bu[1][a] * bv[1][b] / (hu * hv));
                out.dvv += c * (bu[0][a] * bv[2][b] / (hv * hv));
            }
        }
        out
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_cubics_exactly() {
        let g = Grid::new([8, 9], [0.0, -1.0], [2.0, 1.0]);
        let f = |u: f64, v: f64| Vector3::new(u * u * u - v, u * v * v, 2.0 - v * v * v + u * u * v);
        let vals: Vec<_> = g.nodes().iter().map(|p| f(p[0], p[1])).collect();
        let s = TensorSpline::new(&g, &vals);
        for &(u, v) in &[(0.13, 0.77), (1.91, -0.95), (1.0, 0.0), (0.5, -0.33)] {
            let j = s.jet(u, v);
            assert!((j.v - f(u, v)).norm() < 1e-11);
            let du = Vector3::new(3.0 * u * u, v * v, 2.0 * u * v);
            let duv = Vector3::new(0.0, 2.0 * v, 2.0 * u);
            let dvv = Vector3::new(0.0, 2.0 * u, -6.0 * v);
            assert!((j.du - du).norm() < 1e-10);
            assert!((j.duv - duv).norm() < 1e-9);
            assert!((j.dvv - dvv).norm() < 1e-9);
        }
    }

    #[test]
    fn interpolates_nodes() {
        let g = Grid::new([10, 7], [0.0, 0.0], [1.0, 1.0]);
        let vals: Vec<_> = g
            .nodes()
            .iter()
            .map(|p| Vector3::new((5.0f64 * p[0]).sin(), f64::exp(p[1]), p[0] * p[1]))
            .collect();
        let s = TensorSpline::new(&g, &vals);
        for (k, p) in g.nodes().iter().enumerate() {
            assert!((s.jet(p[0], p[1]).v - vals[k]).norm() < 1e-12);
        }
    }
}
