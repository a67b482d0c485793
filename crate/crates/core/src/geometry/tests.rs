use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use nalgebra::Matrix2;

use super::*;

fn cap(polar: f64, chart: CapChart, grid: usize) -> SurfacePatch<f64> {
    build_surface(&SurfaceDescriptor::new(
        SurfaceFamily::SphericalCap { radius: 1.0, polar_angle: polar, chart },
        grid,
    ))
    .unwrap()
}

#[test]
fn plate_is_flat() {
    let p: SurfacePatch<f64> = build_surface(&SurfaceDescriptor::plate(64)).unwrap();
    for f in p.node_forms() {
        assert_eq!(f.g, Matrix2::identity());
        assert_eq!(f.shape, Matrix2::zeros());
        assert_eq!(f.n, Vector3::new(0.0, 0.0, 1.0));
    }
    let f = p.frames([0.3, 0.9]).unwrap();
    assert_eq!(f.b, Matrix2::zeros());
}

#[test]
fn spherical_cap_has_unit_curvatures_and_outward_normal() {
    let p = cap(FRAC_PI_3, CapChart::Orthographic, 16);
    for f in p.node_forms() {
        assert!((f.kappa[0] - 1.0).abs() < 1e-12 && (f.kappa[1] - 1.0).abs() < 1e-12);
        // outward normal of the unit sphere is the position
        assert!((f.n - f.chart.r).norm() < 1e-12);
    }
    // finite-difference derivative of the normal reproduces Pi = Id in the orthonormal frame
    let uv = [0.1, -0.2];
    let d = 1e-6;
    let f = p.frames(uv).unwrap();
    let nu = (p.frames([uv[0] + d, uv[1]]).unwrap().n - p.frames([uv[0] - d, uv[1]]).unwrap().n) / (2.0 * d);
    let nv = (p.frames([uv[0], uv[1] + d]).unwrap().n - p.frames([uv[0], uv[1] - d]).unwrap().n) / (2.0 * d);
    let b = Matrix2::new(f.a[0].dot(&nu), f.a[0].dot(&nv), f.a[1].dot(&nu), f.a[1].dot(&nv));
    let pi = f.to_orthonormal(&b);
    assert!((pi - Matrix2::identity()).norm() < 1e-8, "{pi}");
}

#[test]
fn cylinder_curvatures() {
    let p: SurfacePatch<f64> = build_surface(
        &SurfaceDescriptor::new(SurfaceFamily::Cylinder { radius: 2.0 }, 16)
            .with_domain([[0.0, 2.0 * FRAC_PI_2], [0.0, 1.0]]),
    )
    .unwrap();
    for f in p.node_forms() {
        assert!((f.kappa[0] - 0.5).abs() < 1e-14 && f.kappa[1].abs() < 1e-14);
    }
}

#[test]
fn unit_sphere_shape_operator_is_identity_in_orthonormal_frame() {
    let p = cap(1.2, CapChart::Orthographic, 10);
    let f = p.frames([0.2, 0.35]).unwrap();
    assert!((f.shape_orthonormal() - Matrix2::identity()).norm() < 1e-12);
    let fp = cap(1.2, CapChart::Polar, 10).frames([0.4, 1.0]).unwrap();
    assert!((fp.shape_orthonormal() - Matrix2::identity()).norm() < 1e-12);
}

#[test]
fn parabolic_cylinder_graph_at_origin() {
    let p: SurfacePatch<f64> = build_surface(&SurfaceDescriptor::new(
        SurfaceFamily::Graph { height: ScalarProfile::monomial(0.5, 2, 0) },
        9,
    ))
    .unwrap();
    let f = p.frames([0.0, 0.0]).unwrap();
    assert!((f.kappa[0] - 1.0).abs() < 1e-14 && f.kappa[1].abs() < 1e-14);
}

#[test]
fn frames_are_orthogonal_everywhere() {
    let fams = [
        SurfaceFamily::Cylinder { radius: 0.7 },
        SurfaceFamily::Graph {
            height: ScalarProfile::SinProduct { amplitude: 0.3, freq: [2.0, 1.0], phase: [0.0, 0.5] },
        },
        SurfaceFamily::Revolution { profile: RevolutionProfile::Torus { major: 2.0, minor: 0.5 } },
    ];
    for fam in fams {
        let p: SurfacePatch<f64> = build_surface(&SurfaceDescriptor::new(fam, 12)).unwrap();
        for f in p.node_forms().iter().chain(p.quad_points().iter().map(|q| &q.forms)) {
            assert!(f.a[0].dot(&f.n).abs() < 1e-12 && f.a[1].dot(&f.n).abs() < 1e-12);
            let id = f.frame.transpose() * f.g * f.frame;
            assert!((id - Matrix2::identity()).norm() < 1e-12);
        }
    }
}

#[test]
fn area_integrals() {
    let p: SurfacePatch<f64> = build_surface(&SurfaceDescriptor::plate(8)).unwrap();
    assert!((surface_integral(&p, |_| 1.0) - 1.0).abs() < 1e-14);
    assert_eq!(surface_integral(&p, |_| 0.0), 0.0);
    for theta in [0.4, FRAC_PI_3, 2.0] {
        let c = cap(theta, CapChart::Polar, 16);
        let exact = 2.0 * PI * (1.0 - theta.cos());
        assert!((c.area() - exact).abs() < 1e-8, "theta {theta}: {} vs {exact}", c.area());
    }
}

#[test]
fn polar_chart_flags_its_pole() {
    let c = cap(1.0, CapChart::Polar, 10);
    assert!(c.has_pole());
    assert!(c.require_regular_nodes().is_err());
    assert!(!cap(1.0, CapChart::Orthographic, 10).has_pole());
}

#[test]
fn ellipticity() {
    let r = ellipticity_check(&cap(FRAC_PI_3, CapChart::Orthographic, 12), DEFAULT_ELLIPTICITY_THRESHOLD);
    assert!(r.is_elliptic);
    assert!((r.c.unwrap() - 1.0).abs() < 1e-12);
    let plate: SurfacePatch<f64> = build_surface(&SurfaceDescriptor::plate(8)).unwrap();
    assert!(!ellipticity_check(&plate, DEFAULT_ELLIPTICITY_THRESHOLD).is_elliptic);
    let cyl: SurfacePatch<f64> =
        build_surface(&SurfaceDescriptor::new(SurfaceFamily::Cylinder { radius: 1.0 }, 8)).unwrap();
    assert!(!ellipticity_check(&cyl, DEFAULT_ELLIPTICITY_THRESHOLD).is_elliptic);
    // flipping the normal gives a uniformly negative operator, still elliptic
    let mut d = SurfaceDescriptor::new(
        SurfaceFamily::SphericalCap { radius: 2.0, polar_angle: 0.5, chart: CapChart::Orthographic },
        8,
    );
    d.flip_normal = true;
    let r = ellipticity_check(&build_surface::<f64>(&d).unwrap(), 1e-6);
    assert!(r.is_elliptic && (r.c.unwrap() - 2.0).abs() < 1e-12);
}

#[test]
fn finite_difference_mode_converges_at_nominal_order() {
    let err = |grid: usize, order: usize| {
        let mut d = SurfaceDescriptor::new(
            SurfaceFamily::Graph {
                height: ScalarProfile::SinProduct { amplitude: 0.4, freq: [2.0, 3.0], phase: [0.3, 0.1] },
            },
            grid,
        );
        d.derivative_mode = DerivativeMode::FiniteDifference { order };
        let fd: SurfacePatch<f64> = build_surface(&d).unwrap();
        d.derivative_mode = DerivativeMode::Analytic;
        let an: SurfacePatch<f64> = build_surface(&d).unwrap();
        fd.node_forms()
            .iter()
            .zip(an.node_forms())
            .map(|(a, b)| (a.b - b.b).norm() + (a.g - b.g).norm())
            .fold(0.0, f64::max)
    };
    for order in [2usize, 4] {
        let rate = (err(11, order) / err(21, order)).log2();
        assert!((rate - order as f64).abs() < 0.3, "order {order}: observed {rate}");
    }
}

#[test]
fn tubular_volume_element_positive_below_focal_distance() {
    let c = cap(1.0, CapChart::Orthographic, 10);
    assert!(c.check_tubular(0.5).is_ok());
    assert!(matches!(c.check_tubular(1.5), Err(Error::TubularViolation(_))));
    let tp = TubularPoint { uv: [0.0, 0.0], t: 0.1 };
    assert!((tp.position(&c).unwrap() - Vector3::new(0.0, 0.0, 1.1)).norm() < 1e-14);
}

#[test]
fn construction_errors() {
    let bad = SurfaceDescriptor::new(
        SurfaceFamily::SphericalCap { radius: 1.0, polar_angle: 1.0, chart: CapChart::Orthographic },
        8,
    )
    .with_domain([[-1.0, 1.0], [-1.0, 1.0]]);
    assert!(matches!(build_surface::<f64>(&bad), Err(Error::DegenerateChart(_))));
    assert!(matches!(build_surface::<f64>(&SurfaceDescriptor::plate(4)), Err(Error::BadDescriptor(_))));
    let unknown = serde_json::from_str::<SurfaceDescriptor>(r#"{"family":"klein_bottle","grid":[8,8]}"#);
    assert!(unknown.is_err());
    let p: SurfacePatch<f64> = build_surface(&SurfaceDescriptor::plate(8)).unwrap();
    assert!(matches!(p.frames([1.5, 0.0]), Err(Error::OutOfDomain(..))));
}

#[test]
fn descriptor_json_round_trip() {
    let text = r#"{"family":"cylinder","params":{"radius":2.0},"domain":[[0,1],[0,1]],"grid":[16,12],"derivative_mode":{"finite_difference":{"order":4}}}"#;
    let d: SurfaceDescriptor = serde_json::from_str(text).unwrap();
    assert_eq!(d.family, SurfaceFamily::Cylinder { radius: 2.0 });
    assert_eq!(d.grid, [16, 12]);
    assert_eq!(d.quad_order, 4);
    let back: SurfaceDescriptor = serde_json::from_str(&serde_json::to_string(&d).unwrap()).unwrap();
    assert_eq!(back, d);
    let plate: SurfaceDescriptor = serde_json::from_str(r#"{"family":"plate","grid":[8,8]}"#).unwrap();
    assert_eq!(plate.family, SurfaceFamily::Plate);
}

#[test]
fn single_precision_kernels() {
    let p: SurfacePatch<f32> = build_surface(&SurfaceDescriptor::new(
        SurfaceFamily::SphericalCap { radius: 1.0, polar_angle: 0.8, chart: CapChart::Orthographic },
        8,
    ))
    .unwrap();
    let f = p.frames([0.1, 0.1]).unwrap();
    assert!((f.kappa[0] - 1.0).abs() < 1e-4);
}
