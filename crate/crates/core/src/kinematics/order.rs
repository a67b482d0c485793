//! Empirical order of metric preservation of an eps-family of deformations.

use serde::Serialize;

use super::field::{DisplacementHierarchy, MidsurfaceDeformation};
use super::{metric_change, metric_coefficients};
use crate::error::{Error, Result};
use crate::geometry::{FundamentalForms, SurfacePatch, VectorJet};
use crate::scalar::Real;

/// One-parameter family `u_eps` of deformations with `u_0 = id`.
pub trait EpsilonFamily<T: Real> {
    /// Jet of `u_eps - r` at a chart point.
    fn displacement_jet(&self, patch: &SurfacePatch<T>, uv: [T; 2], eps: T) -> VectorJet<T>;

    /// Polynomial families report their hierarchy so the expansion can be cross-checked.
    fn hierarchy(&self) -> Option<&DisplacementHierarchy<T>> {
        None
    }
}

impl<T: Real> EpsilonFamily<T> for DisplacementHierarchy<T> {
    fn displacement_jet(&self, patch: &SurfacePatch<T>, uv: [T; 2], eps: T) -> VectorJet<T> {
        DisplacementHierarchy::displacement_jet(self, patch, uv, eps)
    }

    fn hierarchy(&self) -> Option<&DisplacementHierarchy<T>> {
        Some(self)
    }
}

/// Plate rolled onto the cylinder of radius `radius / eps`: an exact isometry for every eps.
#[derive(Clone, Copy, Debug)]
pub struct RollFamily<T: Real> {
    pub radius: T,
}

impl<T: Real> EpsilonFamily<T> for RollFamily<T> {
    fn displacement_jet(&self, patch: &SurfacePatch<T>, uv: [T; 2], eps: T) -> VectorJet<T> {
        let y = MidsurfaceDeformation::roll(self.radius / eps).jet(patch, uv);
        y.add(&VectorJet::from(patch.chart_jet(uv)).scale(-T::one()))
    }
}

#[derive(Clone, Debug)]
pub struct OrderOptions {
    pub eps: Vec<f64>,
    /// Order reported for families whose defect is at machine noise throughout.
    pub sweep_cap: usize,
    /// Largest accepted RMS residual of the log-log fit (natural logarithms).
    pub fit_threshold: f64,
    /// Defects below `noise_floor * sqrt(area)` are treated as zero.
    pub noise_floor: f64,
}

impl Default for OrderOptions {
    fn default() -> Self {
        Self {
            eps: (3..=10).map(|k| 0.5f64.powi(k)).collect(),
            sweep_cap: 8,
            fit_threshold: 0.05,
            noise_floor: 1e-13,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct IsometryOrderReport {
    pub n_est: usize,
    pub eps: Vec<f64>,
    pub defects: Vec<f64>,
    pub slope: Option<f64>,
    pub fit_residual: Option<f64>,
    /// `round(slope) - 1` before capping at the hierarchy length.
    pub raw_order: Option<usize>,
    /// First nonvanishing expansion coefficient index minus one, capped likewise.
    pub expansion_order: Option<usize>,
    /// L2 norms of `A_1..A_2N` for hierarchies.
    pub coefficient_norms: Vec<f64>,
    pub exact: bool,
}

fn l2_orthonormal<T: Real>(forms: &FundamentalForms<T>, c: &nalgebra::Matrix2<T>) -> T {
    let o = forms.to_orthonormal(c);
    o.iter().fold(T::zero(), |s, x| s + *x * *x)
}

/// Least-squares line through `(x, y)`; returns slope, intercept and RMS residual.
pub(crate) fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let icpt = my - slope * mx;
    let rms = (x.iter().zip(y).map(|(a, b)| (b - icpt - slope * a).powi(2)).sum::<f64>() / n).sqrt();
    (slope, icpt, rms)
}

/// Largest `N` with `|(grad u_eps)^T grad u_eps - g|_{L2} = O(eps^{N+1})`, from a log-log fit
/// over the eps sweep. Hierarchies are capped at their length.
pub fn isometry_order<T: Real>(
    patch: &SurfacePatch<T>,
    family: &dyn EpsilonFamily<T>,
    opts: &OrderOptions,
) -> Result<IsometryOrderReport> {
    let area = patch.area().as_f64();
    let floor = opts.noise_floor * area.sqrt();
    let defects: Vec<f64> = opts
        .eps
        .iter()
        .map(|&e| {
            let eps = T::lit(e);
            patch
                .quad_points()
                .iter()
                .fold(T::zero(), |s, q| {
                    let d = family.displacement_jet(patch, q.uv, eps);
                    s + l2_orthonormal(&q.forms, &metric_change(&q.forms, &d)) * q.area_weight()
                })
                .sqrt()
                .as_f64()
        })
        .collect();

    let cap = family.hierarchy().map(|h| h.order());
    let (coefficient_norms, expansion_order) = match family.hierarchy() {
        Some(h) => {
            let k = 2 * h.order();
            let mut norms = vec![T::zero(); k];
            for q in patch.quad_points() {
                let jets: Vec<VectorJet<T>> = h.fields.iter().map(|f| f.jet(patch, q.uv)).collect();
                for (n, c) in norms.iter_mut().zip(metric_coefficients(&q.forms, &jets, k)) {
                    *n += l2_orthonormal(&q.forms, &c) * q.area_weight();
                }
            }
            let norms: Vec<f64> = norms.into_iter().map(|n| n.sqrt().as_f64()).collect();
            let scale = 1.0 + norms.iter().cloned().fold(0.0, f64::max);
            let first = norms.iter().position(|n| *n > 1e-10 * scale * area.sqrt().max(1.0));
            let order = first.map_or(h.order(), |i| i.min(h.order()));
            (norms, Some(order))
        }
        None => (Vec::new(), None),
    };

    let usable: Vec<(f64, f64)> = opts
        .eps
        .iter()
        .zip(&defects)
        .filter(|(_, d)| **d > floor)
        .map(|(e, d)| (e.ln(), d.ln()))
        .collect();
    if usable.is_empty() {
        return Ok(IsometryOrderReport {
            n_est: cap.unwrap_or(opts.sweep_cap),
            eps: opts.eps.clone(),
            defects,
            slope: None,
            fit_residual: None,
            raw_order: None,
            expansion_order,
            coefficient_norms,
            exact: true,
        });
    }
    if usable.len() < 3 {
        return Err(Error::InconclusiveFit(f64::INFINITY));
    }
    let (x, y): (Vec<f64>, Vec<f64>) = usable.into_iter().unzip();
    let (slope, _, rms) = fit_line(&x, &y);
    if !(rms <= opts.fit_threshold) || !((slope - slope.round()).abs() <= 0.25) || slope.round() < 1.0 {
        return Err(Error::InconclusiveFit(rms));
    }
    let raw = slope.round() as usize - 1;
    let n_est = cap.map_or(raw, |c| raw.min(c));
    Ok(IsometryOrderReport {
        n_est,
        eps: opts.eps.clone(),
        defects,
        slope: Some(slope),
        fit_residual: Some(rms),
        raw_order: Some(raw),
        expansion_order,
        coefficient_norms,
        exact: false,
    })
}
