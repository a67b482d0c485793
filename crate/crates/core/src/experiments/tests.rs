use super::*;
use crate::error::Error;
use crate::functionals::{kirchhoff_energy, Normalization};
use crate::geometry::{CapChart, ScalarProfile, SurfaceDescriptor, SurfaceFamily, SurfacePatch};
use crate::kinematics::{DisplacementField, FieldSpec, MidsurfaceDeformation};
use crate::material::Material;

fn mat() -> Material<f64> {
    Material::new(1.0, 1.0).unwrap()
}

fn plate(n: usize) -> SurfacePatch<f64> {
    SurfacePatch::new(SurfaceDescriptor::plate(n)).unwrap()
}

fn cap(n: usize) -> SurfacePatch<f64> {
    SurfacePatch::new(SurfaceDescriptor::new(
        SurfaceFamily::SphericalCap { radius: 1.0, polar_angle: std::f64::consts::FRAC_PI_3, chart: CapChart::Orthographic },
        n,
    ))
    .unwrap()
}

const H: [f64; 4] = [0.0625, 0.03125, 0.015625, 0.0078125];

#[test]
fn identity_recovery_sequence_has_zero_energy() {
    let s = cap(8);
    let id = Regime::Kirchhoff { y: MidsurfaceDeformation::identity() };
    let seq = |h: f64| build_recovery_sequence(&s, &mat(), &id, h);
    let r = scaling_study(&s, &mat(), seq, &H, 2.0, &[], &ScalingOptions::default()).unwrap();
    assert!(r.energies.iter().all(|e| e.abs() <= 1e-14));
    assert!(r.fit_degenerate && r.beta_hat.is_none() && r.limit.is_none());

    let eq = equipartition_report(&s, &mat(), &seq(0.1).unwrap(), 0.1, &Default::default(), None).unwrap();
    assert_eq!((eq.stretching, eq.bending, eq.heuristic_error), (0.0, 0.0, 0.0));
}

#[test]
fn roll_sequence_scales_like_h_squared() {
    let p = plate(8);
    let y = MidsurfaceDeformation::roll(2.0);
    let limit = kirchhoff_energy(&p, &mat(), &y, Normalization::Scaled).unwrap().value;
    let regime = Regime::Kirchhoff { y };
    let target = ScalingTarget { name: "kirchhoff".into(), value: limit };
    let r = scaling_study(
        &p,
        &mat(),
        |h| build_recovery_sequence(&p, &mat(), &regime, h),
        &H,
        2.0,
        &[target],
        &ScalingOptions::default(),
    )
    .unwrap();
    assert!((r.beta_hat.unwrap() - 2.0).abs() <= 1e-2);
    assert!(r.limit.unwrap().targets[0].relative_error <= 1e-3);
    // bending dominates along an isometric sequence
    assert!(r.stretching.iter().zip(&r.bending).all(|(s, b)| s < &(1e-12 * b)));
}

#[test]
fn scaling_input_validation() {
    let p = plate(8);
    let id = Regime::Kirchhoff { y: MidsurfaceDeformation::identity() };
    let seq = |h: f64| build_recovery_sequence(&p, &mat(), &id, h);
    let o = ScalingOptions::default();
    assert!(matches!(scaling_study(&p, &mat(), seq, &H[..3], 2.0, &[], &o), Err(Error::Config(_))));
    assert!(matches!(scaling_study(&p, &mat(), seq, &[0.1, 0.2, 0.05, 0.01], 2.0, &[], &o), Err(Error::Config(_))));
}

#[test]
fn recovery_constraints() {
    let p = plate(8);
    let bad = Regime::Kirchhoff { y: MidsurfaceDeformation::dilation(1.2) };
    assert!(matches!(build_recovery_sequence(&p, &mat(), &bad, 0.1), Err(Error::ConstraintViolated(_))));
    let stretch = DisplacementField::analytic(FieldSpec::Components {
        x: ScalarProfile::monomial(1.0, 1, 0),
        y: ScalarProfile::zero(),
        z: ScalarProfile::zero(),
    });
    let r = Regime::Linear { v: stretch, beta: 6.0 };
    assert!(matches!(build_recovery_sequence(&p, &mat(), &r, 0.1), Err(Error::ConstraintViolated(_))));
    let v = DisplacementField::analytic(FieldSpec::out_of_plane(ScalarProfile::monomial(1.0, 2, 0)));
    let r = Regime::Linear { v, beta: 3.0 };
    assert!(matches!(build_recovery_sequence(&p, &mat(), &r, 0.1), Err(Error::Config(_))));
}

#[test]
fn matching_zero_and_rigid_fields() {
    let s = cap(10);
    let opts = MatchingOptions::default();
    let z = matching_solve(&s, &DisplacementField::zero(), 0.1, &opts).unwrap();
    assert_eq!((z.sup_norm, z.defect), (0.0, 0.0));

    let rot = DisplacementField::analytic(FieldSpec::Rotation { axis: [0.2, -0.4, 1.0] });
    let (res, sols) = matching_sweep(&s, &rot, &[0.1, 0.05], &opts).unwrap();
    assert!(res.defects.iter().all(|d| *d <= opts.tol));
    assert!(sols.iter().all(|s| s.w.is_sampled()));
}

#[test]
fn matching_preconditions() {
    let p = plate(8);
    let v = DisplacementField::analytic(FieldSpec::out_of_plane(ScalarProfile::monomial(1.0, 2, 0)));
    assert!(matches!(matching_solve(&p, &v, 0.1, &MatchingOptions::default()), Err(Error::NotElliptic)));
    let stretch = DisplacementField::analytic(FieldSpec::Constant { value: [0.0, 0.0, 0.0] })
        .plus(&DisplacementField::analytic(FieldSpec::Components {
            x: ScalarProfile::monomial(1.0, 1, 0),
            y: ScalarProfile::zero(),
            z: ScalarProfile::zero(),
        }));
    assert!(matches!(
        matching_solve(&cap(8), &stretch, 0.1, &MatchingOptions::default()),
        Err(Error::NotAnIsometry(_))
    ));
}

#[test]
fn equipartition_of_a_pure_dilation() {
    let p = plate(8);
    let seq = crate::functionals::ThinShellAnsatz::kirchhoff_love(MidsurfaceDeformation::dilation(1.01));
    let r = equipartition_report(&p, &mat(), &seq, 0.05, &Default::default(), None).unwrap();
    assert!(r.bending.abs() <= 1e-20);
    // |G - g|^2 for y = 1.01 x: two diagonal entries of 1.01^2 - 1
    assert!((r.stretching - 2.0 * (1.0201f64 - 1.0).powi(2)).abs() <= 1e-12);
}
