//! JSON study configurations and the drivers behind each subcommand.
//!
//! A configuration is resolved before anything runs: overrides are applied and every
//! default is written out, so the echoed file replays the run on its own.

use std::path::PathBuf;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::experiments::{
    alpha_to_beta, build_recovery_sequence, equipartition_report, matching_solve, matching_sweep, order_for_scaling,
    parse_exponent, scaling_study, MatchingOptions, Regime, ScalingOptions, ScalingReport, ScalingTarget,
};
use crate::functionals::{
    kirchhoff_energy, linear_bending_energy, quadratic_strain, thin_shell_energy, total_energy, EnergyOptions,
    ForceSpec, MapField, Normalization, ThinShellAnsatz,
};
use crate::geometry::{ellipticity_check, SurfaceDescriptor, SurfacePatch};
use crate::kinematics::{
    finite_strain_project, solve_infinitesimal_isometries, BoundaryCondition, DeformationSpec, DisplacementField,
    FieldSpec, MidsurfaceDeformation, ProjectOptions, StrainField,
};
use crate::material::{axiom_check, Material, MaterialConfig};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    SurfaceShow,
    MaterialCheck,
    EnergyEval,
    IsometrySolve,
    Classify,
    MatchRun,
    ScalingRun,
    EquipartitionRun,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::SurfaceShow,
        Command::MaterialCheck,
        Command::EnergyEval,
        Command::IsometrySolve,
        Command::Classify,
        Command::MatchRun,
        Command::ScalingRun,
        Command::EquipartitionRun,
    ];

    /// Command-line spelling, e.g. `"scaling run"`.
    pub fn words(self) -> &'static str {
        match self {
            Command::SurfaceShow => "surface show",
            Command::MaterialCheck => "material check",
            Command::EnergyEval => "energy eval",
            Command::IsometrySolve => "isometry solve",
            Command::Classify => "classify",
            Command::MatchRun => "match run",
            Command::ScalingRun => "scaling run",
            Command::EquipartitionRun => "equipartition run",
        }
    }
}

/// Where a displacement comes from: an analytic or sampled spec, or a numerical mode of the
/// discrete strain form (index among the non-rigid modes, ascending quotient).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FieldSource {
    Mode { mode: usize },
    Spec(FieldSpec),
}

/// In-plane correction `w`. `matched` projects `(A^2)_tan / 2` onto symmetric gradients in
/// the von Karman regime and solves the exact-isometry equations in the intermediate one.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InPlaneSpec {
    #[default]
    Matched,
    Zero,
    Field {
        field: FieldSpec,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RegimeSpec {
    Kirchhoff {
        map: DeformationSpec,
    },
    VonKarman {
        v: FieldSource,
        #[serde(default)]
        w: InPlaneSpec,
    },
    Linear {
        v: FieldSource,
        beta: f64,
    },
    Intermediate {
        v: FieldSource,
        beta: f64,
        #[serde(default)]
        w: InPlaneSpec,
    },
}

impl RegimeSpec {
    pub fn beta(&self) -> f64 {
        match self {
            RegimeSpec::Kirchhoff { .. } => 2.0,
            RegimeSpec::VonKarman { .. } => 4.0,
            RegimeSpec::Linear { beta, .. } | RegimeSpec::Intermediate { beta, .. } => *beta,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AnsatzSpec {
    #[default]
    Identity,
    KirchhoffLove {
        map: DeformationSpec,
    },
    /// Mid-surface map with the pointwise optimal normal strains.
    Relaxed {
        map: DeformationSpec,
    },
    /// The recovery sequence of the configured regime at each `h`.
    Recovery,
}

fn default_modes() -> usize {
    8
}
fn default_samples() -> usize {
    1000
}
fn default_eps() -> Vec<f64> {
    vec![0.1, 0.05, 0.025, 0.0125]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Inputs {
    #[serde(default)]
    pub ansatz: AnsatzSpec,
    #[serde(default)]
    pub force: Option<ForceSpec>,
    /// Non-rigid modes requested from the eigen solver.
    #[serde(default = "default_modes")]
    pub modes: usize,
    #[serde(default)]
    pub boundary: BoundaryCondition,
    /// Infinitesimal isometry for `match run`.
    #[serde(default)]
    pub v: Option<FieldSource>,
    #[serde(default = "default_eps")]
    pub eps: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    /// Exact exponents for `classify`, e.g. `"8/3"`.
    #[serde(default)]
    pub beta: Option<String>,
    #[serde(default)]
    pub alpha: Option<String>,
}

impl Default for Inputs {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

fn default_isometry() -> f64 {
    1e-6
}
fn default_t_points() -> usize {
    3
}
fn default_ellipticity() -> f64 {
    1e-6
}
fn default_regularization() -> f64 {
    1e-13
}
fn default_zero_energy() -> f64 {
    1e-14
}
fn default_limit() -> f64 {
    0.02
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    /// Relative residual accepted for infinitesimal isometries.
    #[serde(default = "default_isometry")]
    pub isometry: f64,
    #[serde(default)]
    pub matching: MatchingOptions,
    #[serde(default = "default_t_points")]
    pub t_points: usize,
    #[serde(default = "default_ellipticity")]
    pub ellipticity: f64,
    #[serde(default = "default_regularization")]
    pub projection_regularization: f64,
    #[serde(default = "default_zero_energy")]
    pub zero_energy: f64,
    /// Relative error under which an extrapolated limit counts as matching a target.
    #[serde(default = "default_limit")]
    pub limit: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
}

fn default_surface() -> SurfaceDescriptor {
    SurfaceDescriptor::plate(16)
}

fn default_h_list() -> Vec<f64> {
    (4..=8).map(|k| 2f64.powi(-k)).collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudyConfig {
    #[serde(default = "default_surface")]
    pub surface: SurfaceDescriptor,
    #[serde(default)]
    pub material: MaterialConfig,
    #[serde(default)]
    pub regime: Option<RegimeSpec>,
    #[serde(default)]
    pub inputs: Inputs,
    #[serde(default = "default_h_list")]
    pub h_list: Vec<f64>,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub seed: u64,
}

impl Default for StudyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Command-line overrides, applied on top of the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub grid: Option<usize>,
    pub quad: Option<usize>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub beta: Option<String>,
    pub alpha: Option<String>,
}

impl StudyConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn resolve(mut self, o: &Overrides) -> Self {
        if let Some(n) = o.grid {
            self.surface.grid = [n, n];
        }
        if let Some(q) = o.quad {
            self.surface.quad_order = q;
        }
        if let Some(s) = o.seed {
            self.seed = s;
        }
        if o.out.is_some() {
            self.output.dir = o.out.clone();
        }
        if o.beta.is_some() || o.alpha.is_some() {
            self.inputs.beta = o.beta.clone();
            self.inputs.alpha = o.alpha.clone();
        }
        self.surface.domain = Some(self.surface.resolved_domain());
        self
    }
}

/// Named two-column series.
#[derive(Clone, Debug, PartialEq)]
pub struct PlotData {
    pub name: String,
    pub columns: [String; 2],
    pub points: Vec<[f64; 2]>,
}

impl PlotData {
    fn new(name: &str, x: &str, y: &str, xs: &[f64], ys: &[f64]) -> Self {
        Self {
            name: name.into(),
            columns: [x.into(), y.into()],
            points: xs.iter().zip(ys).map(|(a, b)| [*a, *b]).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DataRow {
    pub h: f64,
    #[serde(rename = "E_h")]
    pub e_h: f64,
    #[serde(rename = "E_h_over_h_beta")]
    pub e_h_over_h_beta: Option<f64>,
    pub stretching: Option<f64>,
    pub bending: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool_version: String,
    pub command: Command,
    pub config_echo: StudyConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub results: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl Report {
    pub fn empty(command: Command, config: StudyConfig) -> Self {
        Self {
            schema_version: SCHEMA_VERSION,
            tool_version: env!("CARGO_PKG_VERSION").into(),
            command,
            config_echo: config,
            results: None,
            error: None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub report: Report,
    pub rows: Vec<DataRow>,
    pub plots: Vec<PlotData>,
    /// Short human-readable summary for the terminal.
    pub summary: String,
    /// The error behind `report.error`, kept for the exit code.
    pub failure: Option<Arc<Error>>,
}

struct Outcome {
    results: Value,
    rows: Vec<DataRow>,
    plots: Vec<PlotData>,
    summary: String,
}

impl Outcome {
    fn new<S: Serialize>(results: &S, summary: String) -> Result<Self> {
        Ok(Self { results: serde_json::to_value(results)?, rows: vec![], plots: vec![], summary })
    }
}

/// Runs one subcommand on a resolved configuration. Errors end up in the report and in
/// `failure`.
pub fn run_config(command: Command, config: &StudyConfig) -> RunOutput {
    let mut report = Report::empty(command, config.clone());
    match dispatch(command, config) {
        Ok(o) => {
            report.results = Some(o.results);
            RunOutput { report, rows: o.rows, plots: o.plots, summary: o.summary, failure: None }
        }
        Err(e) => {
            report.error = Some(e.to_string());
            RunOutput { report, rows: vec![], plots: vec![], summary: format!("error: {e}"), failure: Some(Arc::new(e)) }
        }
    }
}

fn dispatch(command: Command, c: &StudyConfig) -> Result<Outcome> {
    match command {
        Command::Classify => classify(c),
        Command::MaterialCheck => {
            let m = Material::<f64>::from_config(&c.material)?;
            let r = axiom_check(&m, c.inputs.samples, c.seed);
            let s = format!(
                "frame indifference {:.1e}, W(R) {:.1e}, nondegeneracy {:.3}, Q2 mismatch {:.1e}, Q3 Hessian {:.1e}",
                r.frame_indifference, r.rotation_energy, r.nondegeneracy, r.q2_mismatch, r.q3_hessian_error
            );
            Outcome::new(&r, s)
        }
        _ => {
            let patch = SurfacePatch::<f64>::new(c.surface.clone())?;
            let material = Material::<f64>::from_config(&c.material)?;
            let ctx = Context { c, patch, material };
            match command {
                Command::SurfaceShow => ctx.surface_show(),
                Command::EnergyEval => ctx.energy_eval(),
                Command::IsometrySolve => ctx.isometry_solve(),
                Command::MatchRun => ctx.match_run(),
                Command::ScalingRun => ctx.scaling_run(),
                Command::EquipartitionRun => ctx.equipartition_run(),
                Command::Classify | Command::MaterialCheck => unreachable!(),
            }
        }
    }
}

#[derive(Serialize)]
struct ClassifyResult {
    alpha: Option<String>,
    beta: String,
    n: usize,
    lower: String,
    upper: Option<String>,
}

fn classify(c: &StudyConfig) -> Result<Outcome> {
    let (alpha, beta) = match (&c.inputs.alpha, &c.inputs.beta) {
        (Some(_), Some(_)) => return Err(Error::Config("give either beta or alpha, not both".into())),
        (Some(a), None) => {
            let a = parse_exponent(a)?;
            (Some(a), alpha_to_beta(a)?)
        }
        (None, Some(b)) => (None, parse_exponent(b)?),
        (None, None) => return Err(Error::Config("classify needs beta or alpha".into())),
    };
    let b = order_for_scaling(beta)?;
    let upper = b.upper.map(|u| u.to_string()).unwrap_or_else(|| "inf".into());
    let summary = format!("beta = {beta}: N = {}, bracket [{}, {upper})", b.n, b.lower);
    Outcome::new(
        &ClassifyResult {
            alpha: alpha.map(|a| a.to_string()),
            beta: beta.to_string(),
            n: b.n,
            lower: b.lower.to_string(),
            upper: b.upper.map(|u| u.to_string()),
        },
        summary,
    )
}

struct Context<'a> {
    c: &'a StudyConfig,
    patch: SurfacePatch<f64>,
    material: Material<f64>,
}

#[derive(Serialize)]
struct SurfaceSummary {
    family: &'static str,
    grid: [usize; 2],
    domain: [[f64; 2]; 2],
    area: f64,
    max_abs_curvature: f64,
    gauss_curvature: [f64; 2],
    mean_curvature: [f64; 2],
    ellipticity: crate::geometry::EllipticityReport,
}

#[derive(Serialize)]
struct EnergyRow {
    h: f64,
    energy: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    work: Option<f64>,
    stretching: f64,
    bending: f64,
    warnings: Vec<String>,
}

#[derive(Serialize)]
struct ModeSummary {
    quotients: Vec<f64>,
    in_v1: Vec<bool>,
    tolerance: f64,
    rigid_quotients: Vec<f64>,
    zero_mode_count: usize,
}

#[derive(Serialize)]
struct ScalingSummary {
    #[serde(flatten)]
    report: ScalingReport,
    /// Kirchhoff runs only: the normalization whose target the limit matches.
    #[serde(skip_serializing_if = "Option::is_none")]
    selected_normalization: Option<Option<Normalization>>,
}

fn minmax(xs: impl Iterator<Item = f64>) -> [f64; 2] {
    xs.fold([f64::INFINITY, f64::NEG_INFINITY], |[lo, hi], x| [lo.min(x), hi.max(x)])
}

impl Context<'_> {
    fn energy_opts(&self) -> EnergyOptions {
        EnergyOptions { t_points: self.c.tolerances.t_points }
    }

    fn field(&self, src: &FieldSource) -> Result<DisplacementField<f64>> {
        match src {
            FieldSource::Spec(s) => DisplacementField::from_spec(&self.patch, s),
            FieldSource::Mode { mode } => {
                let m = solve_infinitesimal_isometries(&self.patch, mode + 1, self.c.inputs.boundary)?;
                m.modes.into_iter().nth(*mode).ok_or_else(|| Error::Config(format!("mode {mode} not available")))
            }
        }
    }

    fn regime_spec(&self) -> Result<&RegimeSpec> {
        self.c.regime.as_ref().ok_or_else(|| Error::Config("this command needs a regime".into()))
    }

    /// Builds the regime data; the intermediate regime with a matched `w` is resolved per
    /// thickness by the sequence itself.
    fn regime(&self) -> Result<(Regime<f64>, Option<DisplacementField<f64>>)> {
        let in_plane = |w: &InPlaneSpec, v: &DisplacementField<f64>, vk: bool| -> Result<DisplacementField<f64>> {
            match w {
                InPlaneSpec::Zero => Ok(DisplacementField::zero()),
                InPlaneSpec::Field { field } => DisplacementField::from_spec(&self.patch, field),
                InPlaneSpec::Matched if vk => {
                    let target = quadratic_strain(&self.patch, v)?;
                    let opts = ProjectOptions { regularization: self.c.tolerances.projection_regularization };
                    Ok(finite_strain_project(&self.patch, &target, &opts)?.w)
                }
                InPlaneSpec::Matched => Ok(DisplacementField::zero()),
            }
        };
        Ok(match self.regime_spec()? {
            RegimeSpec::Kirchhoff { map } => {
                (Regime::Kirchhoff { y: MidsurfaceDeformation::from_spec(&self.patch, map)? }, None)
            }
            RegimeSpec::VonKarman { v, w } => {
                let v = self.field(v)?;
                let w = in_plane(w, &v, true)?;
                (Regime::VonKarman { v, w }, None)
            }
            RegimeSpec::Linear { v, beta } => (Regime::Linear { v: self.field(v)?, beta: *beta }, None),
            RegimeSpec::Intermediate { v, beta, w } => {
                let v = self.field(v)?;
                let matched = matches!(w, InPlaneSpec::Matched).then(|| v.clone());
                let w = in_plane(w, &v, false)?;
                (Regime::Intermediate { v, w, beta: *beta }, matched)
            }
        })
    }

    fn sequence(&self) -> Result<impl Fn(f64) -> Result<ThinShellAnsatz<f64>> + '_> {
        let (regime, matched) = self.regime()?;
        Ok(move |h: f64| match (&regime, &matched) {
            (Regime::Intermediate { beta, .. }, Some(v)) => {
                let eps = h.powf(beta / 2.0 - 1.0);
                let sol = matching_solve(&self.patch, v, eps, &self.c.tolerances.matching)?;
                let r = Regime::Intermediate { v: v.clone(), w: sol.w, beta: *beta };
                build_recovery_sequence(&self.patch, &self.material, &r, h)
            }
            _ => build_recovery_sequence(&self.patch, &self.material, &regime, h),
        })
    }

    fn require_h_list(&self) -> Result<&[f64]> {
        let h = &self.c.h_list;
        if h.is_empty() || h.iter().any(|h| !(*h > 0.0)) {
            return Err(Error::Config("h_list must hold positive thicknesses".into()));
        }
        Ok(h)
    }

    fn surface_show(&self) -> Result<Outcome> {
        let p = &self.patch;
        let nodes = p.node_forms();
        let s = SurfaceSummary {
            family: p.family().name(),
            grid: p.grid().n,
            domain: p.descriptor().resolved_domain(),
            area: p.area(),
            max_abs_curvature: p.max_abs_curvature(),
            gauss_curvature: minmax(nodes.iter().map(|f| f.kappa[0] * f.kappa[1])),
            mean_curvature: minmax(nodes.iter().map(|f| 0.5 * (f.kappa[0] + f.kappa[1]))),
            ellipticity: ellipticity_check(p, self.c.tolerances.ellipticity),
        };
        let summary = format!(
            "{} on a {}x{} grid: area {:.6}, max |kappa| {:.6}, elliptic {}",
            s.family, s.grid[0], s.grid[1], s.area, s.max_abs_curvature, s.ellipticity.is_elliptic
        );
        let mut o = Outcome::new(&s, summary)?;
        let n = p.grid().n[0];
        let diag: Vec<usize> = (0..n.min(p.grid().n[1])).map(|i| p.grid().index(i, i)).collect();
        let u: Vec<f64> = diag.iter().map(|k| p.grid().node(*k)[0]).collect();
        let gk: Vec<f64> = diag.iter().map(|k| nodes[*k].kappa[0] * nodes[*k].kappa[1]).collect();
        o.plots.push(PlotData::new("gauss_curvature_diagonal", "u", "K", &u, &gk));
        Ok(o)
    }

    fn ansatz(&self, h: f64) -> Result<ThinShellAnsatz<f64>> {
        Ok(match &self.c.inputs.ansatz {
            AnsatzSpec::Identity => ThinShellAnsatz::identity(),
            AnsatzSpec::KirchhoffLove { map } => {
                ThinShellAnsatz::kirchhoff_love(MidsurfaceDeformation::from_spec(&self.patch, map)?)
            }
            AnsatzSpec::Relaxed { map } => ThinShellAnsatz::relaxed(
                Arc::new(MapField(MidsurfaceDeformation::from_spec(&self.patch, map)?)),
                self.material,
            ),
            AnsatzSpec::Recovery => return (self.sequence()?)(h),
        })
    }

    fn energy_eval(&self) -> Result<Outcome> {
        let hs = self.require_h_list()?;
        let beta = self.c.regime.as_ref().map(|r| r.beta());
        let opts = self.energy_opts();
        let mut rows = Vec::new();
        let mut out = Vec::new();
        for &h in hs {
            let a = self.ansatz(h)?;
            let rec = match &self.c.inputs.force {
                Some(f) => total_energy(&self.patch, &self.material, &a, h, f, &opts)?,
                None => thin_shell_energy(&self.patch, &self.material, &a, h, &opts)?,
            };
            let eq = equipartition_report(&self.patch, &self.material, &a, h, &opts, Some(rec.value))?;
            rows.push(DataRow {
                h,
                e_h: rec.value,
                e_h_over_h_beta: beta.map(|b| rec.value / h.powf(b)),
                stretching: Some(eq.stretching),
                bending: Some(eq.bending),
            });
            out.push(EnergyRow {
                h,
                energy: rec.value,
                work: rec.work,
                stretching: eq.stretching,
                bending: eq.bending,
                warnings: rec.warnings,
            });
        }
        let summary = out.iter().map(|r| format!("h = {}: E = {:e}", r.h, r.energy)).collect::<Vec<_>>().join("\n");
        let mut o = Outcome::new(&out, summary)?;
        let e: Vec<f64> = rows.iter().map(|r| r.e_h).collect();
        o.plots.push(PlotData::new("energy", "h", "E_h", hs, &e));
        o.rows = rows;
        Ok(o)
    }

    fn isometry_solve(&self) -> Result<Outcome> {
        let m = solve_infinitesimal_isometries(&self.patch, self.c.inputs.modes, self.c.inputs.boundary)?;
        let s = ModeSummary {
            quotients: m.quotients.clone(),
            in_v1: m.in_v1.clone(),
            tolerance: m.tolerance,
            rigid_quotients: m.rigid_quotients.clone(),
            zero_mode_count: m.zero_mode_count,
        };
        let summary = format!(
            "{} modes, {} in V1 (tolerance {:.2e}), {} zero modes",
            s.quotients.len(),
            s.in_v1.iter().filter(|b| **b).count(),
            s.tolerance,
            s.zero_mode_count
        );
        let mut o = Outcome::new(&s, summary)?;
        let idx: Vec<f64> = (0..s.quotients.len()).map(|i| i as f64).collect();
        o.plots.push(PlotData::new("quotients", "mode", "quotient", &idx, &s.quotients));
        Ok(o)
    }

    fn match_run(&self) -> Result<Outcome> {
        let src = self.c.inputs.v.as_ref().ok_or_else(|| Error::Config("match run needs inputs.v".into()))?;
        let v = self.field(src)?;
        let (res, _) = matching_sweep(&self.patch, &v, &self.c.inputs.eps, &self.c.tolerances.matching)?;
        let summary = format!("sup|w| = {:?}, ratios = {:?}, defects = {:?}", res.sup_norms, res.sup_ratios, res.defects);
        let mut o = Outcome::new(&res, summary)?;
        o.plots.push(PlotData::new("sup_norm", "eps", "sup_w", &res.eps, &res.sup_norms));
        o.plots.push(PlotData::new("c2_norm", "eps", "c2_w", &res.eps, &res.c2_norms));
        o.plots.push(PlotData::new("defect", "eps", "defect", &res.eps, &res.defects));
        Ok(o)
    }

    fn targets(&self) -> Result<Vec<ScalingTarget>> {
        let tol = self.c.tolerances.isometry;
        let t = |name: &str, value: f64| ScalingTarget { name: name.into(), value };
        Ok(match self.regime_spec()? {
            RegimeSpec::Kirchhoff { map } => {
                let y = MidsurfaceDeformation::from_spec(&self.patch, map)?;
                let raw = kirchhoff_energy(&self.patch, &self.material, &y, Normalization::Raw)?.value;
                let scaled = kirchhoff_energy(&self.patch, &self.material, &y, Normalization::Scaled)?.value;
                if raw == 0.0 {
                    vec![]
                } else {
                    vec![t("kirchhoff_raw", raw), t("kirchhoff_scaled", scaled)]
                }
            }
            RegimeSpec::VonKarman { .. } => {
                let (Regime::VonKarman { v, w }, _) = self.regime()? else { unreachable!() };
                let r = crate::functionals::vonkarman_energy(&self.patch, &self.material, &v, &StrainField::Induced(w), tol)?;
                vec![t("vonkarman", r.value)]
            }
            RegimeSpec::Linear { v, .. } | RegimeSpec::Intermediate { v, .. } => {
                let r = linear_bending_energy(&self.patch, &self.material, &self.field(v)?, tol)?;
                vec![t("linear_bending", r.value)]
            }
        }
        .into_iter()
        .filter(|t| t.value > 0.0)
        .collect())
    }

    fn scaling_run(&self) -> Result<Outcome> {
        let hs = self.require_h_list()?;
        let regime = self.regime_spec()?;
        let targets = self.targets()?;
        let opts = ScalingOptions { energy: self.energy_opts(), zero_energy: self.c.tolerances.zero_energy };
        let report = scaling_study(&self.patch, &self.material, self.sequence()?, hs, regime.beta(), &targets, &opts)?;
        let selected = matches!(regime, RegimeSpec::Kirchhoff { .. }).then(|| {
            let within: Vec<Normalization> = report
                .limit
                .iter()
                .flat_map(|l| &l.targets)
                .filter(|t| t.relative_error <= self.c.tolerances.limit)
                .map(|t| if t.name == "kirchhoff_raw" { Normalization::Raw } else { Normalization::Scaled })
                .collect();
            (within.len() == 1).then(|| within[0])
        });
        let mut summary = match report.beta_hat {
            Some(b) => format!("fitted exponent {b:.4} (residual {:.1e})", report.fit_residual.unwrap_or(f64::NAN)),
            None => "energies at machine zero: exponent fit degenerate".to_string(),
        };
        if let Some(l) = &report.limit {
            summary += &format!("\nextrapolated E_h/h^beta = {:.6e}", l.extrapolated);
            for t in &l.targets {
                summary += &format!("\n  {}: {:.6e} (relative error {:.2e})", t.name, t.value, t.relative_error);
            }
        }
        let rows = (0..hs.len())
            .map(|i| DataRow {
                h: hs[i],
                e_h: report.energies[i],
                e_h_over_h_beta: Some(report.ratios[i]),
                stretching: Some(report.stretching[i]),
                bending: Some(report.bending[i]),
            })
            .collect();
        let plots = vec![
            PlotData::new("energy", "h", "E_h", hs, &report.energies),
            PlotData::new("ratio", "h", "E_h_over_h_beta", hs, &report.ratios),
        ];
        let mut o = Outcome::new(&ScalingSummary { report, selected_normalization: selected }, summary)?;
        o.rows = rows;
        o.plots = plots;
        Ok(o)
    }

    fn equipartition_run(&self) -> Result<Outcome> {
        let hs = self.require_h_list()?;
        let beta = self.regime_spec()?.beta();
        let seq = self.sequence()?;
        let opts = self.energy_opts();
        let reports = hs
            .iter()
            .map(|&h| equipartition_report(&self.patch, &self.material, &seq(h)?, h, &opts, None))
            .collect::<Result<Vec<_>>>()?;
        let summary = reports
            .iter()
            .map(|r| format!("h = {}: stretching {:.3e}, bending {:.3e}, E {:.3e}", r.h, r.stretching, r.bending, r.energy))
            .collect::<Vec<_>>()
            .join("\n");
        let rows: Vec<DataRow> = reports
            .iter()
            .map(|r| DataRow {
                h: r.h,
                e_h: r.energy,
                e_h_over_h_beta: Some(r.energy / r.h.powf(beta)),
                stretching: Some(r.stretching),
                bending: Some(r.bending),
            })
            .collect();
        let s: Vec<f64> = reports.iter().map(|r| r.stretching).collect();
        let b: Vec<f64> = reports.iter().map(|r| r.bending).collect();
        let mut o = Outcome::new(&reports, summary)?;
        o.plots = vec![PlotData::new("stretching", "h", "stretching", hs, &s), PlotData::new("bending", "h", "bending", hs, &b)];
        o.rows = rows;
        Ok(o)
    }
}
