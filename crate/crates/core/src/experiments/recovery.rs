//! Recovery sequences for the scaling regimes.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::functionals::{metric_defect_norm, CoefficientField, MapField, ThinShellAnsatz, ISOMETRY_DEFECT_TOLERANCE};
use crate::geometry::SurfacePatch;
use crate::kinematics::{check_v1, DisplacementField, MidsurfaceDeformation, DEFAULT_ISOMETRY_TOLERANCE};
use crate::material::Material;
use crate::scalar::Real;

/// Input data of a recovery sequence.
#[derive(Clone, Debug)]
pub enum Regime<T: Real> {
    /// `beta = 2`: an isometric immersion `y`.
    Kirchhoff { y: MidsurfaceDeformation<T> },
    /// `beta = 4`: `V` an infinitesimal isometry, `w` the in-plane correction.
    VonKarman { v: DisplacementField<T>, w: DisplacementField<T> },
    /// `beta > 4`: `V` an infinitesimal isometry.
    Linear { v: DisplacementField<T>, beta: f64 },
    /// `2 < beta < 4`: `w` makes `id + eps V + eps^2 w` an exact isometry at `eps = h^{beta/2 - 1}`.
    Intermediate { v: DisplacementField<T>, w: DisplacementField<T>, beta: f64 },
}

impl<T: Real> Regime<T> {
    pub fn beta(&self) -> f64 {
        match self {
            Regime::Kirchhoff { .. } => 2.0,
            Regime::VonKarman { .. } => 4.0,
            Regime::Linear { beta, .. } | Regime::Intermediate { beta, .. } => *beta,
        }
    }
}

fn require_v1<T: Real>(patch: &SurfacePatch<T>, v: &DisplacementField<T>) -> Result<()> {
    check_v1(patch, v, T::lit(DEFAULT_ISOMETRY_TOLERANCE)).map_err(|e| match e {
        Error::NotAnIsometry(m) => Error::ConstraintViolated(format!("V is not an infinitesimal isometry ({m})")),
        e => e,
    })
}

/// Ansatz `c_0 + t c_1 + t^2 c_2` for thickness `h`: `c_0` is the regime's mid-surface map,
/// `c_1`, `c_2` realize the pointwise optimal normal strains.
pub fn build_recovery_sequence<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    regime: &Regime<T>,
    h: T,
) -> Result<ThinShellAnsatz<T>> {
    let map = match regime {
        Regime::Kirchhoff { y } => {
            let d = metric_defect_norm(patch, y);
            if !(d <= T::lit(ISOMETRY_DEFECT_TOLERANCE) * patch.area()) {
                return Err(Error::ConstraintViolated(format!("y is not an isometry (metric defect {:e})", d.as_f64())));
            }
            y.clone()
        }
        Regime::VonKarman { v, w } => {
            require_v1(patch, v)?;
            MidsurfaceDeformation::displaced(DisplacementField::combination(vec![(h, v.clone()), (h * h, w.clone())]))
        }
        Regime::Linear { v, beta } => {
            if !(*beta > 4.0) {
                return Err(Error::Config(format!("linear regime needs beta > 4, got {beta}")));
            }
            require_v1(patch, v)?;
            let eps = h.powf(T::lit(beta / 2.0 - 1.0));
            MidsurfaceDeformation::displaced(v.scaled(eps))
        }
        Regime::Intermediate { v, w, beta } => {
            if !(*beta > 2.0 && *beta < 4.0) {
                return Err(Error::Config(format!("intermediate regime needs 2 < beta < 4, got {beta}")));
            }
            require_v1(patch, v)?;
            let eps = h.powf(T::lit(beta / 2.0 - 1.0));
            MidsurfaceDeformation::displaced(DisplacementField::combination(vec![
                (eps, v.clone()),
                (eps * eps, w.clone()),
            ]))
        }
    };
    let c0: Arc<dyn CoefficientField<T>> = Arc::new(MapField(map));
    Ok(ThinShellAnsatz::relaxed(c0, *material))
}
