//! Tensor node grid over the parameter rectangle and fourth-order difference operators.

use nalgebra::Vector3;

use crate::scalar::Real;

/// Uniform `n[0] x n[1]` node grid; node `(i, j)` has flat index `i + n[0] * j`.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T: Real> {
    pub n: [usize; 2],
    pub lo: [T; 2],
    pub hi: [T; 2],
}

const D1_CENTER: [f64; 5] = [1.0, -8.0, 0.0, 8.0, -1.0];
const D1_EDGE0: [f64; 5] = [-25.0, 48.0, -36.0, 16.0, -3.0];
const D1_EDGE1: [f64; 5] = [-3.0, -10.0, 18.0, -6.0, 1.0];
const D2_CENTER: [f64; 5] = [-1.0, 16.0, -30.0, 16.0, -1.0];
const D2_EDGE0: [f64; 6] = [45.0, -154.0, 214.0, -156.0, 61.0, -10.0];
const D2_EDGE1: [f64; 6] = [10.0, -15.0, -4.0, 14.0, -6.0, 1.0];

/// 1D stencil `(offset index, weight)` of the first (`order == 1`) or second derivative at
/// node `i` of `n` equispaced nodes, in units of the spacing.
pub fn stencil_1d(n: usize, i: usize, order: usize) -> Vec<(usize, f64)> {
    assert!(n >= 6, "difference stencils need at least 6 nodes");
    let w = |c: &[f64], start: usize, flip: f64| -> Vec<(usize, f64)> {
        c.iter().enumerate().map(|(k, c)| (start + k, flip * c / 12.0)).collect()
    };
    let mirror = |c: &[f64], from_end: usize, flip: f64| -> Vec<(usize, f64)> {
        c.iter().enumerate().map(|(k, c)| (n - 1 - from_end - k, flip * c / 12.0)).collect()
    };
    match order {
        1 => match i {
            0 => w(&D1_EDGE0, 0, 1.0),
            1 => w(&D1_EDGE1, 0, 1.0),
            _ if i == n - 1 => mirror(&D1_EDGE0, 0, -1.0),
            _ if i == n - 2 => mirror(&D1_EDGE1, 0, -1.0),
            _ => w(&D1_CENTER, i - 2, 1.0),
        },
        2 => match i {
            0 => w(&D2_EDGE0, 0, 1.0),
            1 => w(&D2_EDGE1, 0, 1.0),
            _ if i == n - 1 => mirror(&D2_EDGE0, 0, 1.0),
            _ if i == n - 2 => mirror(&D2_EDGE1, 0, 1.0),
            _ => w(&D2_CENTER, i - 2, 1.0),
        },
        _ => panic!("only first and second derivatives"),
    }
}

impl<T: Real> Grid<T> {
    pub fn new(n: [usize; 2], lo: [T; 2], hi: [T; 2]) -> Self {
        Self { n, lo, hi }
    }

    pub fn len(&self) -> usize {
        self.n[0] * self.n[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn spacing(&self, axis: usize) -> T {
        (self.hi[axis] - self.lo[axis]) / T::lit((self.n[axis] - 1) as f64)
    }

    #[inline]
    pub fn index(&self, i: usize, j: usize) -> usize {
        i + self.n[0] * j
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n[0], k / self.n[0])
    }

    pub fn node(&self, k: usize) -> [T; 2] {
        let (i, j) = self.ij(k);
        [
            self.lo[0] + self.spacing(0) * T::lit(i as f64),
            self.lo[1] + self.spacing(1) * T::lit(j as f64),
        ]
    }

    pub fn nodes(&self) -> Vec<[T; 2]> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }

    pub fn is_boundary(&self, k: usize) -> bool {
        let (i, j) = self.ij(k);
        i == 0 || j == 0 || i + 1 == self.n[0] || j + 1 == self.n[1]
    }

    pub fn contains(&self, uv: [T; 2]) -> bool {
        let tol = T::lit(1e-12) * (self.hi[0] - self.lo[0] + self.hi[1] - self.lo[1]);
        (0..2).all(|a| uv[a] >= self.lo[a] - tol && uv[a] <= self.hi[a] + tol)
    }

    /// Trapezoidal weights of the node grid (parameter measure).
    pub fn trapezoid_weights(&self) -> Vec<T> {
        let half = T::lit(0.5);
        let w1 = |axis: usize, i: usize| {
            let h = self.spacing(axis);
            if i == 0 || i + 1 == self.n[axis] {
                h * half
            } else {
                h
            }
        };
        (0..self.len())
            .map(|k| {
                let (i, j) = self.ij(k);
                w1(0, i) * w1(1, j)
            })
            .collect()
    }

    /// Sparse row of a derivative operator at node `k`: `order = (ou, ov)` with
    /// `ou + ov <= 2`.
    pub fn derivative_row(&self, k: usize, order: (usize, usize)) -> Vec<(usize, T)> {
        let (i, j) = self.ij(k);
        let hu = self.spacing(0);
        let hv = self.spacing(1);
        let along = |axis: usize, ord: usize, fixed: usize, pos: usize| -> Vec<(usize, T)> {
            let h = if axis == 0 { hu } else { hv };
            let scale = if ord == 1 { h } else { h * h };
            stencil_1d(self.n[axis], pos, ord)
                .into_iter()
                .map(|(m, w)| {
                    let idx = if axis == 0 { self.index(m, fixed) } else { self.index(fixed, m) };
                    (idx, T::lit(w) / scale)
                })
                .collect()
        };
        match order {
            (0, 0) => vec![(k, T::one())],
            (1, 0) => along(0, 1, j, i),
            (2, 0) => along(0, 2, j, i),
            (0, 1) => along(1, 1, i, j),
            (0, 2) => along(1, 2, i, j),
            (1, 1) => {
                let mut row = Vec::new();
                for (m, wv) in stencil_1d(self.n[1], j, 1) {
                    for (l, wu) in stencil_1d(self.n[0], i, 1) {
                        row.push((self.index(l, m), T::lit(wu * wv) / (hu * hv)));
                    }
                }
                row
            }
            _ => panic!("unsupported derivative order {order:?}"),
        }
    }

    /// Applies a derivative operator to node data.
    pub fn apply<V>(&self, values: &[V], order: (usize, usize)) -> Vec<V>
    where
        V: Copy + std::ops::Add<Output = V> + std::ops::Mul<T, Output = V> + num_traits::Zero,
    {
        assert_eq!(values.len(), self.len());
        (0..self.len())
            .map(|k| {
                self.derivative_row(k, order)
                    .into_iter()
                    .fold(V::zero(), |acc, (m, w)| acc + values[m] * w)
            })
            .collect()
    }

    /// All first and second derivatives of a vector node field, as
    /// `[d_u, d_v, d_uu, d_uv, d_vv]`.
    pub fn vector_derivatives(&self, values: &[Vector3<T>]) -> [Vec<Vector3<T>>; 5] {
        [
            self.apply(values, (1, 0)),
            self.apply(values, (0, 1)),
            self.apply(values, (2, 0)),
            self.apply(values, (1, 1)),
            self.apply(values, (0, 2)),
        ]
    }
}
