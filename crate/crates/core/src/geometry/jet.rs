use nalgebra::Vector3;

use super::family::ChartJet;
use crate::scalar::Real;

/// Value and partial derivatives up to second order of a vector field on the chart.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VectorJet<T: Real> {
    pub v: Vector3<T>,
    pub du: Vector3<T>,
    pub dv: Vector3<T>,
    pub duu: Vector3<T>,
    pub duv: Vector3<T>,
    pub dvv: Vector3<T>,
}

impl<T: Real> VectorJet<T> {
    pub fn zero() -> Self {
        let z = Vector3::zeros();
        Self { v: z, du: z, dv: z, duu: z, duv: z, dvv: z }
    }

    pub fn constant(v: Vector3<T>) -> Self {
        Self { v, ..Self::zero() }
    }

    #[inline]
    pub fn d(&self, i: usize) -> Vector3<T> {
        if i == 0 {
            self.du
        } else {
            self.dv
        }
    }

    #[inline]
    pub fn dd(&self, i: usize, j: usize) -> Vector3<T> {
        match (i, j) {
            (0, 0) => self.duu,
            (1, 1) => self.dvv,
            _ => self.duv,
        }
    }

    pub fn scale(&self, s: T) -> Self {
        Self {
            v: self.v * s,
            du: self.du * s,
            dv: self.dv * s,
            duu: self.duu * s,
            duv: self.duv * s,
            dvv: self.dvv * s,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self {
            v: self.v + o.v,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }

    /// Jet of `x -> m x + b` applied to this jet.
    pub fn affine(&self, m: &nalgebra::Matrix3<T>, b: &Vector3<T>) -> Self {
        Self {
            v: m * self.v + b,
            du: m * self.du,
            dv: m * self.dv,
            duu: m * self.duu,
            duv: m * self.duv,
            dvv: m * self.dvv,
        }
    }
}

impl<T: Real> From<ChartJet<T>> for VectorJet<T> {
    fn from(c: ChartJet<T>) -> Self {
        Self { v: c.r, du: c.ru, dv: c.rv, duu: c.ruu, duv: c.ruv, dvv: c.rvv }
    }
}
