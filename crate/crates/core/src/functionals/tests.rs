use std::sync::Arc;

use nalgebra::{Matrix2, Vector3};

use super::*;
use crate::geometry::{CapChart, ScalarProfile, SurfaceDescriptor, SurfaceFamily};
use crate::material::rotation;

fn mat() -> Material<f64> {
    Material::new(1.0, 1.0).unwrap()
}

fn plate(n: usize) -> SurfacePatch<f64> {
    SurfacePatch::new(SurfaceDescriptor::plate(n)).unwrap()
}

fn cap(n: usize) -> SurfacePatch<f64> {
    SurfacePatch::new(SurfaceDescriptor::new(
        SurfaceFamily::SphericalCap { radius: 1.0, polar_angle: 1.0, chart: CapChart::Orthographic },
        n,
    ))
    .unwrap()
}

fn opts() -> EnergyOptions {
    EnergyOptions::default()
}

fn phi(p: ScalarProfile) -> DisplacementField<f64> {
    DisplacementField::analytic(FieldSpec::out_of_plane(p))
}

fn roll_ansatz(r: f64) -> ThinShellAnsatz<f64> {
    let map: Arc<dyn CoefficientField<f64>> = Arc::new(MapField(MidsurfaceDeformation::roll(r)));
    ThinShellAnsatz::relaxed(map, mat())
}

#[test]
fn identity_and_rigid_motions_cost_nothing() {
    for s in [plate(8), cap(8)] {
        let id = ThinShellAnsatz::identity();
        assert!(thin_shell_energy(&s, &mat(), &id, 0.1, &opts()).unwrap().value.abs() <= 1e-14);
        let moved = id.compose_rigid(rotation(&Vector3::new(1.0, 2.0, -1.0), 0.8), Vector3::new(3.0, 0.0, 1.0));
        assert!(thin_shell_energy(&s, &mat(), &moved, 0.1, &opts()).unwrap().value.abs() <= 1e-14);
    }
}

#[test]
fn energy_is_frame_indifferent_and_nonnegative() {
    let p = plate(10);
    let a = roll_ansatz(2.0);
    let e = thin_shell_energy(&p, &mat(), &a, 0.05, &opts()).unwrap().value;
    assert!(e > 0.0);
    let q = rotation(&Vector3::new(0.2, -1.0, 0.4), 1.1);
    let e2 = thin_shell_energy(&p, &mat(), &a.compose_rigid(q, Vector3::new(1.0, 1.0, 1.0)), 0.05, &opts())
        .unwrap()
        .value;
    assert!((e - e2).abs() <= 1e-12 * e.max(1.0));
}

#[test]
fn quadrature_order_doubling_is_stable() {
    let p4 = SurfacePatch::<f64>::new(SurfaceDescriptor::plate(10).with_quad_order(4)).unwrap();
    let p8 = SurfacePatch::<f64>::new(SurfaceDescriptor::plate(10).with_quad_order(8)).unwrap();
    let a = roll_ansatz(2.0);
    let e4 = thin_shell_energy(&p4, &mat(), &a, 0.05, &opts()).unwrap().value;
    let e8 = thin_shell_energy(&p8, &mat(), &a, 0.05, &opts()).unwrap().value;
    assert!((e4 - e8).abs() <= 1e-6 * e8);
    let t5 = thin_shell_energy(&p4, &mat(), &a, 0.05, &EnergyOptions { t_points: 5 }).unwrap().value;
    assert!((e4 - t5).abs() <= 1e-6 * e4);
}

#[test]
fn energy_preconditions() {
    let cyl = SurfacePatch::<f64>::new(SurfaceDescriptor::new(SurfaceFamily::Cylinder { radius: 2.0 }, 8)).unwrap();
    let r = thin_shell_energy(&cyl, &mat(), &ThinShellAnsatz::identity(), 2.5, &opts());
    assert!(matches!(r, Err(Error::TubularViolation(_))));
    let flipped = ThinShellAnsatz::new(vec![
        Arc::new(MapField(MidsurfaceDeformation::identity())),
        Arc::new(AffineField { q: -nalgebra::Matrix3::identity(), b: Vector3::zeros(), inner: Arc::new(ReferenceNormal) }),
    ])
    .unwrap();
    let rec = thin_shell_energy(&plate(8), &mat(), &flipped, 0.1, &opts()).unwrap();
    // a reflection has F^T F = I, so the energy is blind to it
    assert!(rec.value.abs() <= 1e-14);
    assert_eq!(rec.warnings.len(), 1);
    assert!(ThinShellAnsatz::<f64>::new(vec![]).is_err());
}

#[test]
fn total_energy_examples() {
    let p = plate(8);
    let id = ThinShellAnsatz::identity();
    let zero = ForceSpec { field: FieldSpec::Zero, alpha: 0.0 };
    let e = thin_shell_energy(&p, &mat(), &roll_ansatz(2.0), 0.1, &opts()).unwrap().value;
    let j = total_energy(&p, &mat(), &roll_ansatz(2.0), 0.1, &zero, &opts()).unwrap().value;
    assert_eq!(e, j);

    let up = ForceSpec { field: FieldSpec::Constant { value: [0.0, 0.0, 1.0] }, alpha: 0.0 };
    // the plate's mean height over the thickness is zero
    assert!(total_energy(&p, &mat(), &id, 0.1, &up, &opts()).unwrap().value.abs() <= 1e-15);
    let s = cap(10);
    let h = 0.1;
    let j0 = total_energy(&s, &mat(), &id, h, &up, &opts()).unwrap();
    // -(1/h) int z dV against a direct node-free evaluation of the same integral
    let direct = -surface_integral(&s, |q| {
        gauss_on(3, -h / 2.0, h / 2.0)
            .iter()
            .map(|(t, w)| (q.forms.chart.r.z + t * q.forms.n.z) * q.forms.volume_factor(*t) * w)
            .sum::<f64>()
    }) / h;
    assert!((j0.value - direct).abs() <= 1e-13);

    let b = Vector3::new(0.5, -1.0, 2.0);
    let f = ForceSpec { field: FieldSpec::Constant { value: [1.0, 1.0, 1.0] }, alpha: 0.0 };
    let before = total_energy(&s, &mat(), &id, h, &f, &opts()).unwrap().value;
    let after = total_energy(&s, &mat(), &id.translate(b), h, &f, &opts()).unwrap().value;
    let fb = b.x + b.y + b.z;
    let drop = before - after;
    assert!((drop / (fb * s.area()) - 1.0).abs() <= h * h);

    let scaled = ForceSpec { field: FieldSpec::Constant { value: [0.0, 0.0, 1.0] }, alpha: 2.0 };
    let js = total_energy(&s, &mat(), &id, h, &scaled, &opts()).unwrap();
    assert!((js.work.unwrap() - j0.work.unwrap() * h * h).abs() <= 1e-15);
    assert!(total_energy(&s, &mat(), &id, h, &ForceSpec { field: FieldSpec::Zero, alpha: -1.0 }, &opts()).is_err());
}

#[test]
fn kirchhoff_examples() {
    let p = plate(10);
    for norm in [Normalization::Raw, Normalization::Scaled] {
        assert_eq!(kirchhoff_energy(&p, &mat(), &MidsurfaceDeformation::identity(), norm).unwrap().value, 0.0);
    }
    let raw = kirchhoff_energy(&p, &mat(), &MidsurfaceDeformation::roll(2.0), Normalization::Raw).unwrap();
    assert!((raw.value - 8.0 / 3.0 / 4.0).abs() <= 1e-12);
    let scaled = kirchhoff_energy(&p, &mat(), &MidsurfaceDeformation::roll(2.0), Normalization::Scaled).unwrap();
    assert!((scaled.value * 24.0 - raw.value).abs() <= 1e-14);

    let s = cap(10);
    let rigid = MidsurfaceDeformation::rigid(
        rotation(&Vector3::new(0.0, 1.0, 1.0), 0.4),
        Vector3::new(1.0, 0.0, 0.0),
        MidsurfaceDeformation::identity(),
    );
    assert!(kirchhoff_energy(&s, &mat(), &rigid, Normalization::Raw).unwrap().value <= 1e-24);
    let rolled = MidsurfaceDeformation::rigid(
        rotation(&Vector3::new(1.0, 0.0, 0.0), 0.3),
        Vector3::zeros(),
        MidsurfaceDeformation::roll(2.0),
    );
    let moved = kirchhoff_energy(&p, &mat(), &rolled, Normalization::Raw).unwrap().value;
    assert!((moved - raw.value).abs() <= 1e-12);
    assert!(matches!(
        kirchhoff_energy(&p, &mat(), &MidsurfaceDeformation::dilation(1.1), Normalization::Raw),
        Err(Error::NotAnIsometry(_))
    ));
}

#[test]
fn vonkarman_examples() {
    let p = plate(10);
    let tol = 1e-6;
    let zero = DisplacementField::zero();
    assert_eq!(vonkarman_energy(&p, &mat(), &zero, &StrainField::Zero, tol).unwrap().value, 0.0);

    // constant axial field e_3: -(A^2)_tan = Id, so the stretching term is 1/2 Q_2(Id / 2)
    let rot = DisplacementField::analytic(FieldSpec::Rotation { axis: [0.0, 0.0, 1.0] });
    let r = vonkarman_energy(&p, &mat(), &rot, &StrainField::Zero, tol).unwrap();
    assert!((r.value - 5.0 / 6.0).abs() <= 1e-13);
    assert!(r.bending.unwrap().abs() <= 1e-20);

    let vals: Vec<Matrix2<f64>> = p
        .grid()
        .nodes()
        .iter()
        .map(|uv| Matrix2::new(uv[0], 0.3, 0.3, 1.0 - uv[1] * uv[1]))
        .collect();
    let b = StrainField::nodal(p.grid(), vals).unwrap();
    let direct = surface_integral(&p, |q| mat().q2_form(&b.at(&p, q.uv, &q.forms))) * 0.5;
    let r = vonkarman_energy(&p, &mat(), &zero, &b, tol).unwrap();
    assert!((r.value - direct).abs() <= 1e-14);

    let stretch = DisplacementField::analytic(FieldSpec::Components {
        x: ScalarProfile::monomial(1.0, 1, 0),
        y: ScalarProfile::zero(),
        z: ScalarProfile::zero(),
    });
    assert!(matches!(vonkarman_energy(&p, &mat(), &stretch, &StrainField::Zero, tol), Err(Error::NotAnIsometry(_))));
}

#[test]
fn linear_bending_examples() {
    let p = plate(10);
    let tol = 1e-6;
    let r = linear_bending_energy(&p, &mat(), &phi(ScalarProfile::monomial(1.0, 2, 0)), tol).unwrap();
    assert!((r.value - 4.0 / 9.0).abs() <= 1e-13);
    let rot = DisplacementField::analytic(FieldSpec::Rotation { axis: [0.3, 0.1, -0.5] });
    assert!(linear_bending_energy(&cap(10), &mat(), &rot, tol).unwrap().value <= 1e-24);
    assert_eq!(linear_bending_energy(&p, &mat(), &DisplacementField::zero(), tol).unwrap().value, 0.0);

    // adding an infinitesimal rigid motion changes nothing
    let v = phi(ScalarProfile::SinProduct { amplitude: 0.3, freq: [2.0, 1.0], phase: [0.0, 0.5] });
    let base = linear_bending_energy(&p, &mat(), &v, tol).unwrap().value;
    let shifted = linear_bending_energy(&p, &mat(), &v.plus(&rot), tol).unwrap().value;
    assert!((base - shifted).abs() <= 1e-12 * base);
}

fn order2_hierarchy() -> DisplacementHierarchy<f64> {
    DisplacementHierarchy::new(vec![
        phi(ScalarProfile::monomial(1.0, 2, 0)),
        DisplacementField::analytic(FieldSpec::Components {
            x: ScalarProfile::monomial(-2.0 / 3.0, 3, 0),
            y: ScalarProfile::zero(),
            z: ScalarProfile::zero(),
        }),
    ])
    .unwrap()
}

#[test]
fn conjecture_examples() {
    let p = plate(10);
    let v = phi(ScalarProfile::SinProduct { amplitude: 0.5, freq: [1.0, 2.0], phase: [0.0, 0.0] });
    let h = DisplacementHierarchy::new(vec![v.clone()]).unwrap();
    let c = conjecture_energy(&p, &mat(), &h, 4.0).unwrap();
    let i4 = vonkarman_energy(&p, &mat(), &v, &StrainField::Zero, 1e-6).unwrap();
    assert_eq!(c.regime, ConjectureRegime::Boundary);
    assert!((c.record.value - i4.value).abs() <= 1e-12 * i4.value);

    let c = conjecture_energy(&p, &mat(), &order2_hierarchy(), 3.5).unwrap();
    assert_eq!((c.order, c.regime), (2, ConjectureRegime::Interior));
    assert!((c.record.value - 4.0 / 9.0).abs() <= 1e-13);
    assert!(matches!(
        conjecture_energy(&p, &mat(), &DisplacementHierarchy::new(vec![phi(ScalarProfile::monomial(1.0, 2, 0))]).unwrap(), 3.5),
        Err(Error::InsufficientOrder { order: 2, index: 2, .. })
    ));

    // truncated exponential of the rotation about e_3: V_1 = e x x, V_2 = e x (e x x) / 2
    let rigid = DisplacementHierarchy::new(vec![
        DisplacementField::analytic(FieldSpec::Rotation { axis: [0.0, 0.0, 1.0] }),
        DisplacementField::analytic(FieldSpec::Components {
            x: ScalarProfile::monomial(-0.5, 1, 0),
            y: ScalarProfile::monomial(-0.5, 0, 1),
            z: ScalarProfile::zero(),
        }),
    ])
    .unwrap();
    let c = conjecture_energy(&p, &mat(), &rigid, 3.5).unwrap();
    assert!(c.record.value.abs() <= 1e-24);
    assert!(matches!(conjecture_energy(&p, &mat(), &rigid, 2.0), Err(Error::OutOfRegime(_))));
}

#[test]
fn averaged_displacement_examples() {
    let s = cap(8);
    let (h, beta) = (0.05, 4.0);
    let zero = averaged_displacement(&s, &ThinShellAnsatz::identity(), h, beta, 3).unwrap();
    let worst = zero.node_values(&s).iter().map(|v| v.norm()).fold(0.0, f64::max);
    assert!(worst <= 1e-13, "{worst}");

    let v = DisplacementField::analytic(FieldSpec::Components {
        x: ScalarProfile::monomial(0.5, 1, 1),
        y: ScalarProfile::zero(),
        z: ScalarProfile::monomial(1.0, 2, 0),
    });
    let scale = h.powf(beta / 2.0 - 1.0);
    let a = ThinShellAnsatz::new(vec![
        Arc::new(MapField(MidsurfaceDeformation::displaced(v.scaled(scale)))),
        Arc::new(ReferenceNormal),
    ])
    .unwrap();
    let got = averaged_displacement(&s, &a, h, beta, 3).unwrap().node_values(&s);
    for (g, want) in got.iter().zip(v.node_values(&s)) {
        assert!((g - want).norm() <= 1e-12);
    }
    let b = Vector3::new(1.0, 0.0, -2.0);
    let shifted = averaged_displacement(&s, &a.translate(b), h, beta, 3).unwrap().node_values(&s);
    for (x, y) in shifted.iter().zip(&got) {
        assert!((x - y - b / scale).norm() <= 1e-10);
    }
}
