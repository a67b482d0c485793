//! Energy-scaling sweeps over the thickness.

use serde::Serialize;

use super::equipartition::equipartition_report;
use crate::error::{Error, Result};
use crate::functionals::{thin_shell_energy, EnergyOptions, ThinShellAnsatz};
use crate::geometry::SurfacePatch;
use crate::kinematics::fit_line;
use crate::material::Material;
use crate::scalar::Real;

/// Named reference value for the limit of `E^h / h^beta`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingTarget {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TargetComparison {
    pub name: String,
    pub value: f64,
    pub relative_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LimitCheck {
    /// Richardson extrapolation (first order in `h`) from the two finest levels.
    pub extrapolated: f64,
    /// Same from the next coarser pair; the three-level consistency check compares both.
    pub coarse_extrapolated: f64,
    pub consistency: f64,
    pub targets: Vec<TargetComparison>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScalingReport {
    pub h: Vec<f64>,
    pub energies: Vec<f64>,
    pub beta: f64,
    pub ratios: Vec<f64>,
    pub stretching: Vec<f64>,
    pub bending: Vec<f64>,
    pub beta_hat: Option<f64>,
    pub fit_residual: Option<f64>,
    pub fit_degenerate: bool,
    pub limit: Option<LimitCheck>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct ScalingOptions {
    pub energy: EnergyOptions,
    /// Energies at or below this count as machine zero.
    pub zero_energy: f64,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        Self { energy: EnergyOptions::default(), zero_energy: 1e-14 }
    }
}

fn richardson(h: &[f64], r: &[f64], i: usize, j: usize) -> f64 {
    (h[i] * r[j] - h[j] * r[i]) / (h[i] - h[j])
}

/// Evaluates `E^h` along a sequence, fits the exponent and, with targets, extrapolates
/// `E^h / h^beta`.
pub fn scaling_study<T: Real, F>(
    patch: &SurfacePatch<T>,
    material: &Material<T>,
    sequence: F,
    h_list: &[f64],
    beta: f64,
    targets: &[ScalingTarget],
    opts: &ScalingOptions,
) -> Result<ScalingReport>
where
    F: Fn(T) -> Result<ThinShellAnsatz<T>>,
{
    if h_list.len() < 4 {
        return Err(Error::Config(format!("a scaling study needs at least 4 values of h, got {}", h_list.len())));
    }
    if h_list.windows(2).any(|w| !(w[1] < w[0])) || h_list.iter().any(|h| !(*h > 0.0)) {
        return Err(Error::Config("h values must be positive and strictly decreasing".into()));
    }
    let mut energies = Vec::with_capacity(h_list.len());
    let mut stretching = Vec::with_capacity(h_list.len());
    let mut bending = Vec::with_capacity(h_list.len());
    let mut warnings = Vec::new();
    for &h in h_list {
        let ansatz = sequence(T::lit(h))?;
        let rec = thin_shell_energy(patch, material, &ansatz, T::lit(h), &opts.energy)?;
        warnings.extend(rec.warnings.iter().map(|w| format!("h = {h}: {w}")));
        let eq = equipartition_report(patch, material, &ansatz, T::lit(h), &opts.energy, Some(rec.value))?;
        energies.push(rec.value);
        stretching.push(eq.stretching);
        bending.push(eq.bending);
    }
    let ratios: Vec<f64> = h_list.iter().zip(&energies).map(|(h, e)| e / h.powf(beta)).collect();
    let fit_degenerate = energies.iter().any(|e| *e <= opts.zero_energy);
    let (beta_hat, fit_residual) = if fit_degenerate {
        (None, None)
    } else {
        let x: Vec<f64> = h_list.iter().map(|h| h.ln()).collect();
        let y: Vec<f64> = energies.iter().map(|e| e.ln()).collect();
        let (s, _, r) = fit_line(&x, &y);
        (Some(s), Some(r))
    };
    let limit = (!targets.is_empty() && !fit_degenerate).then(|| {
        let k = h_list.len();
        let fine = richardson(h_list, &ratios, k - 2, k - 1);
        let coarse = richardson(h_list, &ratios, k - 3, k - 2);
        LimitCheck {
            extrapolated: fine,
            coarse_extrapolated: coarse,
            consistency: (fine - coarse).abs() / fine.abs().max(f64::MIN_POSITIVE),
            targets: targets
                .iter()
                .map(|t| TargetComparison {
                    name: t.name.clone(),
                    value: t.value,
                    relative_error: (fine - t.value).abs() / t.value.abs().max(f64::MIN_POSITIVE),
                })
                .collect(),
        }
    });
    Ok(ScalingReport {
        h: h_list.to_vec(),
        energies,
        beta,
        ratios,
        stretching,
        bending,
        beta_hat,
        fit_residual,
        fit_degenerate,
        limit,
        warnings,
    })
}
