use nalgebra::{Matrix2, Vector3};

use super::*;
use crate::geometry::{CapChart, ScalarProfile, SurfaceDescriptor, SurfaceFamily};

fn plate(n: usize) -> SurfacePatch<f64> {
    SurfacePatch::new(SurfaceDescriptor::plate(n)).unwrap()
}

fn cap(n: usize) -> SurfacePatch<f64> {
    let d = SurfaceDescriptor::new(
        SurfaceFamily::SphericalCap { radius: 1.0, polar_angle: std::f64::consts::FRAC_PI_3, chart: CapChart::Orthographic },
        n,
    );
    SurfacePatch::new(d).unwrap()
}

fn cylinder(n: usize) -> SurfacePatch<f64> {
    SurfacePatch::new(SurfaceDescriptor::new(SurfaceFamily::Cylinder { radius: 2.0 }, n)).unwrap()
}

fn phi_field(p: ScalarProfile) -> DisplacementField<f64> {
    DisplacementField::analytic(FieldSpec::out_of_plane(p))
}

fn max_diff(a: &[Matrix2<f64>], b: &[Matrix2<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs().max()).fold(0.0, f64::max)
}

#[test]
fn pullback_metric_examples() {
    let s = cap(10);
    let g: Vec<_> = s.node_forms().iter().map(|f| f.g).collect();
    assert_eq!(pullback_metric(&s, &MidsurfaceDeformation::identity()), g);

    let p = plate(10);
    let rolled = pullback_metric(&p, &MidsurfaceDeformation::roll(2.0));
    assert!(max_diff(&rolled, &vec![Matrix2::identity(); rolled.len()]) <= 1e-10);
    let dil = pullback_metric(&p, &MidsurfaceDeformation::dilation(2.0));
    assert!(max_diff(&dil, &vec![Matrix2::identity() * 4.0; dil.len()]) <= 1e-14);
}

#[test]
fn pullback_shape_examples() {
    let s = cap(10);
    let own: Vec<_> = s.node_forms().iter().map(|f| f.shape).collect();
    let id = pullback_shape(&s, &MidsurfaceDeformation::identity()).unwrap();
    assert!(max_diff(&id, &own) <= 1e-14);

    let rigid = MidsurfaceDeformation::rigid(
        crate::material::rotation(&Vector3::new(1.0, -2.0, 0.5), 0.7),
        Vector3::new(0.3, 1.0, -4.0),
        MidsurfaceDeformation::identity(),
    );
    assert!(max_diff(&pullback_shape(&s, &rigid).unwrap(), &own) <= 1e-12);

    let p = plate(10);
    let rolled = pullback_shape(&p, &MidsurfaceDeformation::roll(2.0)).unwrap();
    for m in &rolled {
        assert!((m - Matrix2::new(-0.5, 0.0, 0.0, 0.0)).abs().max() <= 1e-12);
    }
    // agrees with a directly built cylinder in arc-length coordinates
    let cyl = cylinder(10);
    let k = cyl.node_forms()[0].shape;
    assert!((k.abs() - rolled[0].abs()).abs().max() <= 1e-12);

    let flat = MidsurfaceDeformation::displaced(DisplacementField::analytic(FieldSpec::Constant { value: [0.0; 3] }));
    assert!(pullback_shape(&p, &flat).is_ok());
    let collapse = MidsurfaceDeformation::dilation(0.0);
    assert!(matches!(pullback_shape(&p, &collapse), Err(Error::DegenerateImage(_))));
}

#[test]
fn rotation_field_examples() {
    let s = cap(10);
    let c = recover_rotation_field(&s, &DisplacementField::analytic(FieldSpec::Constant { value: [1.0, 2.0, 3.0] }));
    assert!(c.w.iter().all(|w| w.norm() == 0.0) && c.residual == 0.0);

    let e = [0.3, -1.0, 0.7];
    let rot = recover_rotation_field(&s, &DisplacementField::analytic(FieldSpec::Rotation { axis: e }));
    for w in &rot.w {
        assert!((w - Vector3::from(e)).norm() <= 1e-13);
    }
    assert!(rot.residual <= 1e-13);
    assert!((rot.matrix(3) + rot.matrix(3).transpose()).norm() == 0.0);

    let p = plate(12);
    let phi = ScalarProfile::SinProduct { amplitude: 0.5, freq: [1.0, 2.0], phase: [0.1, 0.0] };
    let v = phi_field(phi.clone());
    let r = recover_rotation_field(&p, &v);
    assert!(r.residual <= 1e-8);
    for (w, uv) in r.w.iter().zip(p.grid().nodes()) {
        let j = phi.jet::<f64>(uv[0], uv[1]);
        assert!((w - Vector3::new(j.fv, -j.fu, 0.0)).norm() <= 1e-12);
    }

    let stretch = DisplacementField::analytic(FieldSpec::Components {
        x: ScalarProfile::monomial(1.0, 1, 0),
        y: ScalarProfile::zero(),
        z: ScalarProfile::zero(),
    });
    assert!(recover_rotation_field(&p, &stretch).relative_residual > 0.1);
}

#[test]
fn bending_examples() {
    let s = cap(10);
    let tol = DEFAULT_ISOMETRY_TOLERANCE;
    let rot = DisplacementField::analytic(FieldSpec::Rotation { axis: [0.2, 0.5, -1.0] });
    for m in first_order_bending(&s, &rot, tol).unwrap() {
        assert!(m.abs().max() <= 1e-12);
    }
    for m in first_order_bending(&s, &DisplacementField::zero(), tol).unwrap() {
        assert_eq!(m, Matrix2::zeros());
    }

    let p = plate(10);
    let phi = ScalarProfile::SinProduct { amplitude: 0.5, freq: [1.0, 1.0], phase: [0.0, 0.3] };
    let b = first_order_bending(&p, &phi_field(phi.clone()), tol).unwrap();
    for (m, uv) in b.iter().zip(p.grid().nodes()) {
        let j = phi.jet::<f64>(uv[0], uv[1]);
        assert!((m + Matrix2::new(j.fuu, j.fuv, j.fuv, j.fvv)).abs().max() <= 1e-12);
    }

    let stretch = DisplacementField::analytic(FieldSpec::Components {
        x: ScalarProfile::monomial(1.0, 1, 0),
        y: ScalarProfile::zero(),
        z: ScalarProfile::zero(),
    });
    assert!(matches!(first_order_bending(&p, &stretch, tol), Err(Error::NotAnIsometry(_))));
}

/// Compares the bending formula with eps-differences of the image second fundamental form
/// for an infinitesimal isometry of a curved surface.
#[test]
fn bending_matches_pullback_difference() {
    let s = cylinder(10);
    let rot = DisplacementField::analytic(FieldSpec::Rotation { axis: [0.0, 1.0, 0.3] });
    let formula = first_order_bending(&s, &rot, 1e-6).unwrap();
    for m in formula {
        assert!(m.abs().max() <= 1e-12);
    }

    let p = plate(10);
    let phi = ScalarProfile::SinProduct { amplitude: 0.5, freq: [1.0, 1.5], phase: [0.2, 0.0] };
    let v = phi_field(phi);
    let formula = first_order_bending(&p, &v, 1e-6).unwrap();
    let second = |eps: f64| pullback_second_form(&p, &MidsurfaceDeformation::displaced(v.scaled(eps))).unwrap();
    let (h, h2) = (1e-3, 5e-4);
    let d1: Vec<Matrix2<f64>> = second(h).iter().zip(second(-h)).map(|(a, b)| (a - b) / (2.0 * h)).collect();
    let d2: Vec<Matrix2<f64>> = second(h2).iter().zip(second(-h2)).map(|(a, b)| (a - b) / (2.0 * h2)).collect();
    for ((f, a), b) in formula.iter().zip(&d1).zip(&d2) {
        let extrap = (b * 4.0 - a) / 3.0;
        assert!((f - extrap).abs().max() <= 1e-4 * (1.0 + f.abs().max()));
    }
}

#[test]
fn bending_of_cylinder_isometry() {
    // On the cylinder of radius R, V = psi(u) t + phi(u) n with phi = -R psi' is an
    // infinitesimal isometry (w = (psi/R + phi') along the generator direction).
    let r = 2.0;
    let s = cylinder(12);
    // t = (cos(u/R), 0, -sin(u/R)), n = (sin(u/R), 0, cos(u/R)); psi = u^2 gives phi = -2 R u
    let nodes = s.grid().nodes();
    let values: Vec<Vector3<f64>> = nodes
        .iter()
        .map(|p| {
            let u = p[0];
            let (c, sn) = ((u / r).cos(), (u / r).sin());
            let psi = u * u;
            let phi = -2.0 * r * u;
            Vector3::new(psi * c + phi * sn, 0.0, -psi * sn + phi * c)
        })
        .collect();
    let v = DisplacementField::sampled(s.grid(), values).unwrap();
    let skew = recover_rotation_field(&s, &v);
    assert!(skew.relative_residual <= 1e-3, "{}", skew.relative_residual);
    let b = first_order_bending(&s, &v, 1e-3).unwrap();
    // w = (0, -(psi/R + phi'), 0) up to sign; bending only in the (u, u) entry
    assert!(b.iter().all(|m| m[(1, 1)].abs() <= 1e-3 && m[(0, 1)].abs() <= 1e-3));
}

#[test]
fn expansion_examples() {
    let p = plate(10);
    let h = DisplacementHierarchy::new(vec![phi_field(ScalarProfile::monomial(1.0, 2, 0))]).unwrap();
    let a = metric_expansion(&p, &h, 2).unwrap();
    for ((a1, a2), uv) in a[0].iter().zip(&a[1]).zip(p.grid().nodes()) {
        assert_eq!(*a1, Matrix2::zeros());
        assert!((a2 - Matrix2::new(4.0 * uv[0] * uv[0], 0.0, 0.0, 0.0)).abs().max() <= 1e-14);
    }
    assert!(matches!(metric_expansion(&p, &h, 3), Err(Error::OrderTooHigh { requested: 3, max: 2 })));

    let s = cap(10);
    let e = Vector3::new(0.4, -0.2, 1.0);
    let h = DisplacementHierarchy::new(vec![DisplacementField::analytic(FieldSpec::Rotation { axis: [0.4, -0.2, 1.0] })])
        .unwrap();
    let a = metric_expansion(&s, &h, 2).unwrap();
    for (k, f) in s.node_forms().iter().enumerate() {
        assert!(a[0][k].abs().max() <= 1e-14);
        let wa = [e.cross(&f.a[0]), e.cross(&f.a[1])];
        let want = Matrix2::new(wa[0].dot(&wa[0]), wa[0].dot(&wa[1]), wa[1].dot(&wa[0]), wa[1].dot(&wa[1]));
        assert!((a[1][k] - want).abs().max() <= 1e-14);
    }

    let h = DisplacementHierarchy::new(vec![DisplacementField::zero(), phi_field(ScalarProfile::monomial(1.0, 1, 1))])
        .unwrap();
    assert!(metric_expansion(&s, &h, 1).unwrap()[0].iter().all(|m| *m == Matrix2::zeros()));
}

#[test]
fn expansion_reproduces_exact_defect() {
    let s = cap(10);
    let h = DisplacementHierarchy::new(vec![
        DisplacementField::analytic(FieldSpec::Components {
            x: ScalarProfile::monomial(0.3, 1, 1),
            y: ScalarProfile::SinProduct { amplitude: 0.2, freq: [1.0, 0.5], phase: [0.0, 0.4] },
            z: ScalarProfile::monomial(-0.5, 2, 0),
        }),
        DisplacementField::analytic(FieldSpec::Rotation { axis: [0.1, 0.7, -0.3] }),
    ])
    .unwrap();
    let coeffs = metric_expansion(&s, &h, 4).unwrap();
    for eps in [0.3, 0.1, 0.01] {
        for (k, (f, uv)) in s.node_forms().iter().zip(s.grid().nodes()).enumerate() {
            let d = h.displacement_jet(&s, uv, eps);
            let exact = metric_change(f, &d);
            let series = (0..4).fold(Matrix2::zeros(), |acc, i| acc + coeffs[i][k] * eps.powi(i as i32 + 1));
            assert!((exact - series).abs().max() <= 1e-13);
        }
    }
}

fn order2_plate() -> (SurfacePatch<f64>, DisplacementHierarchy<f64>) {
    let p = plate(10);
    let h = DisplacementHierarchy::new(vec![
        phi_field(ScalarProfile::monomial(1.0, 2, 0)),
        DisplacementField::analytic(FieldSpec::Components {
            x: ScalarProfile::monomial(-2.0 / 3.0, 3, 0),
            y: ScalarProfile::zero(),
            z: ScalarProfile::zero(),
        }),
    ])
    .unwrap();
    (p, h)
}

#[test]
fn isometry_order_examples() {
    let opts = OrderOptions::default();
    let p = plate(10);
    let roll = isometry_order(&p, &RollFamily { radius: 2.0 }, &opts).unwrap();
    assert!(roll.exact);
    assert_eq!(roll.n_est, opts.sweep_cap);

    let h = DisplacementHierarchy::new(vec![phi_field(ScalarProfile::monomial(1.0, 2, 0))]).unwrap();
    let r = isometry_order(&p, &h, &opts).unwrap();
    assert_eq!(r.n_est, 1);
    assert_eq!(r.expansion_order, Some(1));
    assert!((r.slope.unwrap() - 2.0).abs() < 1e-6 && r.fit_residual.unwrap() <= 0.02);

    let (p, h) = order2_plate();
    let r = isometry_order(&p, &h, &opts).unwrap();
    assert_eq!(r.n_est, 2);
    assert_eq!(r.expansion_order, Some(2));
    assert!(r.fit_residual.unwrap() <= 0.02);
    assert_eq!(r.raw_order, Some(3));
}

#[test]
fn plate_second_order_examples() {
    let p = plate(10);
    let cyl = plate_second_order_check(&p, &phi_field(ScalarProfile::monomial(1.0, 2, 0)), 1e-8).unwrap();
    assert!(cyl.in_v2 && cyl.max_abs_det_hessian <= 1e-8);
    let bowl = phi_field(ScalarProfile::Polynomial { terms: vec![[1.0, 2.0, 0.0], [1.0, 0.0, 2.0]] });
    let r = plate_second_order_check(&p, &bowl, 1e-8).unwrap();
    assert!(!r.in_v2 && (r.max_abs_det_hessian - 4.0).abs() <= 1e-8);
    let rot = DisplacementField::analytic(FieldSpec::Rotation { axis: [0.3, -0.1, 0.8] });
    assert!(plate_second_order_check(&p, &rot, 1e-8).unwrap().in_v2);
    assert!(matches!(plate_second_order_check(&cap(10), &rot, 1e-8), Err(Error::NotAPlate)));
}

#[test]
fn plate_out_of_plane_fields_have_zero_strain() {
    let p = plate(12);
    let modes = solve_infinitesimal_isometries(&p, 4, BoundaryCondition::Free).unwrap();
    assert!(modes.quotients.iter().all(|q| *q <= 1e-12));
    assert!(modes.rigid_quotients.iter().all(|q| *q <= 1e-12));
    let values: Vec<Vector3<f64>> = p
        .grid()
        .nodes()
        .iter()
        .map(|uv| Vector3::new(0.0, 0.0, (3.0 * uv[0]).sin() * uv[1] * uv[1]))
        .collect();
    assert!(rayleigh_quotient(&p, &values) <= 1e-12);
}

#[test]
fn cap_has_only_rigid_zero_modes() {
    let s = cap(12);
    let modes = solve_infinitesimal_isometries(&s, 3, BoundaryCondition::Free).unwrap();
    assert_eq!(modes.zero_mode_count, 6, "{:?}", modes.quotients);
    assert!(modes.rigid_quotients.iter().all(|q| *q <= 1e-12));
    assert!(modes.quotients[0] > 1e-12);
    let clamped = solve_infinitesimal_isometries(&s, 2, BoundaryCondition::ClampedEdge).unwrap();
    assert_eq!(clamped.zero_mode_count, 0);
    assert!(solve_infinitesimal_isometries(&cap(8), 0, BoundaryCondition::Free).is_err());
}

#[test]
fn strain_projection_examples() {
    let s = cap(12);
    let w0 = DisplacementField::analytic(FieldSpec::Components {
        x: ScalarProfile::monomial(0.3, 2, 1),
        y: ScalarProfile::SinProduct { amplitude: 0.2, freq: [1.0, 2.0], phase: [0.0, 0.1] },
        z: ScalarProfile::monomial(-0.4, 0, 2),
    });
    let opts = ProjectOptions::default();
    let r = finite_strain_project(&s, &StrainField::Induced(w0), &opts).unwrap();
    assert!(r.residual <= 1e-8, "{}", r.residual);

    let z = finite_strain_project(&s, &StrainField::Zero, &opts).unwrap();
    assert_eq!(z.residual, 0.0);
    assert!(z.w.node_values(&s).iter().all(|v| v.norm() == 0.0));
}

#[test]
fn sampled_fields_reject_bad_shapes() {
    let p = plate(8);
    let spec = FieldSpec::Sampled { grid: [9, 9], values: vec![[0.0; 3]; 81] };
    assert!(matches!(DisplacementField::from_spec(&p, &spec), Err(Error::ShapeMismatch(_))));
    let spec = FieldSpec::Sampled { grid: [8, 8], values: vec![[f64::NAN, 0.0, 0.0]; 64] };
    assert!(DisplacementField::from_spec(&p, &spec).is_err());
    let json = serde_json::to_string(&FieldSpec::out_of_plane(ScalarProfile::monomial(1.0, 2, 0))).unwrap();
    let back: FieldSpec = serde_json::from_str(&json).unwrap();
    assert_eq!(back, FieldSpec::out_of_plane(ScalarProfile::monomial(1.0, 2, 0)));
}
