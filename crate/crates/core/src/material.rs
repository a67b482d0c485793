//! Saint Venant–Kirchhoff stored energy and its quadratic forms at the identity.

use nalgebra::{Matrix2, Matrix3, Vector3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Lamé moduli as they appear in configuration files.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaterialConfig {
    pub mu: f64,
    pub lambda: f64,
}

impl Default for MaterialConfig {
    fn default() -> Self {
        Self { mu: 1.0, lambda: 1.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Q2Mode {
    /// Closed-form reduced moduli.
    Analytic,
    /// Explicit minimization of `Q3` over the normal row and column.
    Relaxed,
}

/// Isotropic Saint Venant–Kirchhoff material,
/// `W(F) = mu/4 |F^T F - I|^2 + lambda/8 tr(F^T F - I)^2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Material<T: Real> {
    pub mu: T,
    pub lambda: T,
}

impl<T: Real> Material<T> {
    pub fn new(mu: T, lambda: T) -> Result<Self> {
        if !(mu > T::zero()) || !(T::lit(2.0) * mu + lambda > T::zero()) {
            return Err(Error::Config(format!(
                "Lamé moduli need mu > 0 and 2 mu + lambda > 0 (mu = {}, lambda = {})",
                mu.as_f64(),
                lambda.as_f64()
            )));
        }
        Ok(Self { mu, lambda })
    }

    pub fn from_config(c: &MaterialConfig) -> Result<Self> {
        Self::new(T::lit(c.mu), T::lit(c.lambda))
    }

    pub fn energy_density(&self, f: &Matrix3<T>) -> T {
        let c = f.transpose() * f - Matrix3::identity();
        let tr = c.trace();
        self.mu / T::lit(4.0) * c.norm_squared() + self.lambda / T::lit(8.0) * tr * tr
    }

    /// Energy density written in terms of the Green–St Venant strain `E = (F^T F - I) / 2`.
    pub fn energy_of_strain(&self, e: &Matrix3<T>) -> T {
        let tr = e.trace();
        self.mu * e.norm_squared() + self.lambda * T::lit(0.5) * tr * tr
    }

    /// Polarized `Q3(F, G) = 2 mu sym F : sym G + lambda tr F tr G`.
    pub fn q3_bilinear(&self, f: &Matrix3<T>, g: &Matrix3<T>) -> T {
        let half = T::lit(0.5);
        let sf = (f + f.transpose()) * half;
        let sg = (g + g.transpose()) * half;
        T::lit(2.0) * self.mu * sf.dot(&sg) + self.lambda * f.trace() * g.trace()
    }

    /// `Q3(F) = D^2 W(Id)(F, F)`.
    pub fn q3(&self, f: &Matrix3<T>) -> T {
        self.q3_bilinear(f, f)
    }

    /// Reduced modulus multiplying `(tr F_tan)^2` in `Q2`.
    pub fn reduced_lambda(&self) -> T {
        let two_mu = T::lit(2.0) * self.mu;
        two_mu * self.lambda / (two_mu + self.lambda)
    }

    pub fn q2(&self, f_tan: &Matrix2<T>, mode: Q2Mode) -> T {
        match mode {
            Q2Mode::Analytic => {
                let half = T::lit(0.5);
                let s = (f_tan + f_tan.transpose()) * half;
                let tr = f_tan.trace();
                T::lit(2.0) * self.mu * s.norm_squared() + self.reduced_lambda() * tr * tr
            }
            Q2Mode::Relaxed => self.relax(f_tan).1,
        }
    }

    /// Closed-form `Q2`, the default used by the functionals.
    #[inline]
    pub fn q2_form(&self, f_tan: &Matrix2<T>) -> T {
        self.q2(f_tan, Q2Mode::Analytic)
    }

    /// Optimal symmetric normal entries `(E_13, E_23, E_33)` for a given tangential block,
    /// and the resulting minimum of `Q3`.
    ///
    /// Solves the 3x3 normal equations of `Q3` restricted to the free entries exactly.
    pub fn relax(&self, f_tan: &Matrix2<T>) -> (Vector3<T>, T) {
        let half = T::lit(0.5);
        let mut base = Matrix3::zeros();
        for i in 0..2 {
            for j in 0..2 {
                base[(i, j)] = (f_tan[(i, j)] + f_tan[(j, i)]) * half;
            }
        }
        let basis = [
            {
                let mut m = Matrix3::zeros();
                m[(0, 2)] = T::one();
                m[(2, 0)] = T::one();
                m
            },
            {
                let mut m = Matrix3::zeros();
                m[(1, 2)] = T::one();
                m[(2, 1)] = T::one();
                m
            },
            {
                let mut m = Matrix3::zeros();
                m[(2, 2)] = T::one();
                m
            },
        ];
        let mut h = Matrix3::zeros();
        let mut rhs = Vector3::zeros();
        for k in 0..3 {
            for l in 0..3 {
                h[(k, l)] = self.q3_bilinear(&basis[k], &basis[l]);
            }
            rhs[k] = -self.q3_bilinear(&base, &basis[k]);
        }
        let p = h.lu().solve(&rhs).unwrap_or_else(Vector3::zeros);
        let full = base + basis[0] * p[0] + basis[1] * p[1] + basis[2] * p[2];
        (p, self.q3(&full))
    }
}

/// `dist(F, SO(3))` via the singular value decomposition.
pub fn dist_to_so3<T: Real>(f: &Matrix3<T>) -> T {
    let svd = f.svd(true, true);
    let mut s = svd.singular_values;
    let (u, vt) = (svd.u.unwrap(), svd.v_t.unwrap());
    if (u * vt).determinant() < T::zero() {
        // nearest rotation flips the smallest singular direction
        let (imin, _) = s.argmin();
        s[imin] = -s[imin];
    }
    s.iter().fold(T::zero(), |acc, x| acc + (*x - T::one()) * (*x - T::one())).sqrt()
}

/// Rotation about a unit axis (Rodrigues).
pub fn rotation<T: Real>(axis: &Vector3<T>, angle: T) -> Matrix3<T> {
    let k = axis.normalize();
    let kx = k.cross_matrix();
    Matrix3::identity() + kx * angle.sin() + kx * kx * (T::one() - angle.cos())
}

/// Sampled checks of the stored-energy axioms and of the quadratic forms.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MaterialCheck {
    pub samples: usize,
    pub seed: u64,
    /// `max |W(RF) - W(F)| / (1 + W(F))`.
    pub frame_indifference: f64,
    /// `max W(R)` over sampled rotations.
    pub rotation_energy: f64,
    /// `min W(F) / dist^2(F, SO(3))` for `F` within 0.5 of `SO(3)`.
    pub nondegeneracy: f64,
    /// `max |Q2 closed form - Q2 relaxed| / (1 + |Q2|)`.
    pub q2_mismatch: f64,
    /// Largest entry of the difference between the `Q3` matrix and a central-difference
    /// Hessian of `W` at the identity, relative to the largest entry.
    pub q3_hessian_error: f64,
}

pub fn random_rotation(rng: &mut ChaCha8Rng) -> Matrix3<f64> {
    let axis = Vector3::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0));
    if axis.norm() < 1e-3 {
        return Matrix3::identity();
    }
    rotation(&axis, rng.gen_range(0.0..std::f64::consts::PI))
}

pub fn random_matrix(rng: &mut ChaCha8Rng, scale: f64) -> Matrix3<f64> {
    Matrix3::from_fn(|_, _| rng.gen_range(-scale..scale))
}

fn unit_entry(a: usize) -> Matrix3<f64> {
    let mut e = Matrix3::zeros();
    e[(a / 3, a % 3)] = 1.0;
    e
}

/// Central-difference Hessian of `W` at the identity over the nine entries of `F`.
pub fn energy_hessian_fd(m: &Material<f64>, step: f64) -> nalgebra::SMatrix<f64, 9, 9> {
    let w = |f: Matrix3<f64>| m.energy_density(&f);
    let id = Matrix3::identity();
    nalgebra::SMatrix::<f64, 9, 9>::from_fn(|a, b| {
        let (ea, eb) = (unit_entry(a) * step, unit_entry(b) * step);
        (w(id + ea + eb) - w(id + ea - eb) - w(id - ea + eb) + w(id - ea - eb)) / (4.0 * step * step)
    })
}

/// Runs every check with `samples` draws from a seeded stream.
pub fn axiom_check(m: &Material<f64>, samples: usize, seed: u64) -> MaterialCheck {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut frame = 0.0f64;
    let mut rot = 0.0f64;
    let mut nondeg = f64::INFINITY;
    let mut q2 = 0.0f64;
    for _ in 0..samples {
        let r = random_rotation(&mut rng);
        let f = random_matrix(&mut rng, 1.5);
        let wf = m.energy_density(&f);
        frame = frame.max((m.energy_density(&(r * f)) - wf).abs() / (1.0 + wf));
        rot = rot.max(m.energy_density(&r));

        let p = random_matrix(&mut rng, 1.0);
        let p = p * (rng.gen_range(0.01..0.5) / p.norm());
        let near = r * (Matrix3::identity() + p);
        let d = dist_to_so3(&near);
        if d > 1e-6 {
            nondeg = nondeg.min(m.energy_density(&near) / (d * d));
        }

        let g = Matrix2::from_fn(|_, _| rng.gen_range(-2.0..2.0));
        let a = m.q2(&g, Q2Mode::Analytic);
        q2 = q2.max((a - m.q2(&g, Q2Mode::Relaxed)).abs() / (1.0 + a.abs()));
    }
    let fd = energy_hessian_fd(m, 1e-4);
    let exact = nalgebra::SMatrix::<f64, 9, 9>::from_fn(|a, b| m.q3_bilinear(&unit_entry(a), &unit_entry(b)));
    MaterialCheck {
        samples,
        seed,
        frame_indifference: frame,
        rotation_energy: rot,
        nondegeneracy: nondeg,
        q2_mismatch: q2,
        q3_hessian_error: (fd - exact).abs().max() / exact.abs().max(),
    }
}
