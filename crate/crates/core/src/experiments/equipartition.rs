//! Split of the energy into mid-surface stretching and bending.

use serde::Serialize;

use crate::error::Result;
use crate::functionals::{thin_shell_energy, EnergyOptions, ThinShellAnsatz};
use crate::geometry::{SurfacePatch, VectorJet};
use crate::kinematics::{metric_change, second_form_of};
use crate::material::Material;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EquipartitionReport {
    pub h: f64,
    /// `int |delta g|^2`.
    pub stretching: f64,
    /// `h^2 int |delta Pi|^2`.
    pub bending: f64,
    pub energy: f64,
    /// `|E^h - (stretching + bending)| / E^h`.
    pub heuristic_error: f64,
    /// `1/2 int Q_2(delta g / 2)`.
    pub q_stretching: f64,
    /// `h^2/24 int Q_2(delta Pi)`.
    pub q_bending: f64,
    pub q_heuristic_error: f64,
}

fn rel(e: f64, approx: f64) -> f64 {
    // both at machine zero, as along rigid sequences
    if e.abs() <= 1e-14 && approx.abs() <= 1e-14 {
        0.0
    } else {
        (e - approx).abs() / e.abs().max(f64::MIN_POSITIVE)
    }
}

/// `delta g = G(c_0) - g` and `delta Pi = b(c_0) - b` in the reference orthonormal frame.
/// `energy` may pass an already computed `E^h`.
pub fn equipartition_report<T: Real>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    ansatz: &ThinShellAnsatz<T>,
    h: T,
    opts: &EnergyOptions,
    energy: Option<f64>,
) -> Result<EquipartitionReport> {
    let c0 = ansatz.midsurface();
    let (mut s, mut b, mut qs, mut qb) = (T::zero(), T::zero(), T::zero(), T::zero());
    let half = T::lit(0.5);
    for q in patch.quad_points() {
        let j = c0.jet(patch, q.uv);
        let d = j.add(&VectorJet::from(q.forms.chart).scale(-T::one()));
        let dg = q.forms.to_orthonormal(&metric_change(&q.forms, &d));
        let dpi = q.forms.to_orthonormal(&(second_form_of(&j, patch.orientation())? - q.forms.b));
        let w = q.area_weight();
        s += dg.norm_squared() * w;
        b += dpi.norm_squared() * w;
        qs += material.q2_form(&(dg * half)) * w;
        qb += material.q2_form(&dpi) * w;
    }
    let h2 = h * h;
    let energy = match energy {
        Some(e) => e,
        None => thin_shell_energy(patch, material, ansatz, h, opts)?.value,
    };
    let (stretching, bending) = (s.as_f64(), (b * h2).as_f64());
    let (q_stretching, q_bending) = ((qs * half).as_f64(), (qb * h2 / T::lit(24.0)).as_f64());
    Ok(EquipartitionReport {
        h: h.as_f64(),
        stretching,
        bending,
        energy,
        heuristic_error: rel(energy, stretching + bending),
        q_stretching,
        q_bending,
        q_heuristic_error: rel(energy, q_stretching + q_bending),
    })
}
