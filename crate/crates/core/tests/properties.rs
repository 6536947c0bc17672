//! Property tests across modules.

use mageom::curvature::{self, MetricJet};
use mageom::expr::{fd_jet2, DEFAULT_FD_STEP};
use mageom::exterior::{self, KForm, MAStructure};
use mageom::lr::{self, FamilyParams, PluckerPoint};
use mageom::pullback::{self, Point2, SurfaceFunction};
use mageom::{parse, Point4, ScalarField, Var};
use proptest::prelude::*;

/// Exponent vectors of total degree <= 2 in four variables (15 monomials).
fn quadratic_monomials() -> Vec<[i32; 4]> {
    let mut out = Vec::new();
    for a in 0..=2 {
        for b in 0..=2 - a {
            for c in 0..=2 - a - b {
                for d in 0..=2 - a - b - c {
                    out.push([a, b, c, d]);
                }
            }
        }
    }
    out
}

fn field_from(coeffs: &[f64]) -> ScalarField {
    quadratic_monomials()
        .iter()
        .zip(coeffs)
        .fold(ScalarField::zero(), |acc, (e, &c)| {
            let m = Var::ALL
                .iter()
                .zip(e)
                .fold(ScalarField::constant(c), |m, (&v, &n)| m * ScalarField::var(v).powi(n));
            acc + m
        })
}

fn coeffs() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 15)
}

fn point() -> impl Strategy<Value = Point4> {
    prop::array::uniform4(-1.5f64..1.5).prop_map(Point4::from_array)
}

fn structure() -> impl Strategy<Value = MAStructure> {
    prop::collection::vec(coeffs(), 5).prop_map(|c| {
        MAStructure::new(
            field_from(&c[0]),
            field_from(&c[1]),
            field_from(&c[2]),
            field_from(&c[3]),
            field_from(&c[4]),
        )
    })
}

/// A smooth non-polynomial field built from a quadratic.
fn transcendental(c: &[f64]) -> ScalarField {
    let q = field_from(c);
    q.sin() * ScalarField::x().exp() + (q.clone() * q + ScalarField::constant(1.0)).ln()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

fn metric_from_fd(ma: &MAStructure, pt: &Point4) -> MetricJet<4> {
    let fields = lr::lr_metric_fields(ma);
    let mut mj = MetricJet::constant([[0.0; 4]; 4]);
    for i in 0..4 {
        for j in 0..4 {
            let jet = fd_jet2(&fields[i][j], pt, DEFAULT_FD_STEP).unwrap();
            mj.g[i][j] = jet.value;
            mj.dg[i][j] = jet.gradient;
            mj.ddg[i][j] = jet.hessian;
        }
    }
    mj
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jet_matches_finite_differences(c in coeffs(), pt in point()) {
        let f = transcendental(&c);
        let exact = f.jet2(&pt).unwrap();
        let fd = fd_jet2(&f, &pt, DEFAULT_FD_STEP).unwrap();
        prop_assert!(close(fd.value, exact.value, 1e-12));
        for i in 0..4 {
            prop_assert!(close(fd.gradient[i], exact.gradient[i], 1e-5));
            for j in 0..4 {
                prop_assert!(close(fd.hessian[i][j], exact.hessian[i][j], 1e-4), "{i}{j}");
            }
        }
    }

    #[test]
    fn hessian_is_exactly_symmetric(c in coeffs(), pt in point()) {
        let h = transcendental(&c).jet2(&pt).unwrap().hessian;
        for i in 0..4 {
            for j in 0..4 {
                prop_assert_eq!(h[i][j], h[j][i]);
            }
        }
    }

    #[test]
    fn derivative_is_linear(a in coeffs(), b in coeffs(), s in -3.0f64..3.0, pt in point()) {
        let (f, g) = (field_from(&a), transcendental(&b));
        let combo = f.scale(s) + g.clone();
        for v in Var::ALL {
            let lhs = combo.diff(v).eval(&pt).unwrap();
            let rhs = s * f.diff(v).eval(&pt).unwrap() + g.diff(v).eval(&pt).unwrap();
            prop_assert!(close(lhs, rhs, 1e-12));
        }
    }

    #[test]
    fn printed_fields_reparse_to_the_same_values(c in coeffs(), pt in point()) {
        let f = transcendental(&c);
        let back = parse(&f.to_string()).unwrap();
        prop_assert!(close(back.eval(&pt).unwrap(), f.eval(&pt).unwrap(), 1e-14));
    }

    #[test]
    fn wedge_is_associative_and_graded_commutative(
        a in prop::array::uniform4(-2.0f64..2.0),
        b in prop::array::uniform4(-2.0f64..2.0),
        c in prop::array::uniform4(-2.0f64..2.0),
    ) {
        let one = |w: [f64; 4]| Var::ALL.iter().zip(w).fold(KForm::zero(1), |acc, (&v, x)| {
            acc.add(&KForm::monomial(ScalarField::constant(x), &[v]))
        });
        let (fa, fb, fc) = (one(a), one(b), one(c));
        let pt = Point4::default();
        let left = fa.wedge(&fb).unwrap().wedge(&fc).unwrap().eval(&pt).unwrap();
        let right = fa.wedge(&fb.wedge(&fc).unwrap()).unwrap().eval(&pt).unwrap();
        prop_assert_eq!(left.len(), right.len());
        for ((ka, va), (kb, vb)) in left.iter().zip(&right) {
            prop_assert_eq!(ka, kb);
            prop_assert!(close(*va, *vb, 1e-12));
        }
        let ab = fa.wedge(&fb).unwrap();
        let ba = fb.wedge(&fa).unwrap();
        let sum = ab.add(&ba).eval(&pt).unwrap();
        prop_assert!(sum.iter().all(|(_, v)| v.abs() <= 1e-12));
        // Two-forms commute.
        let (two, other) = (ab, fb.wedge(&fc).unwrap());
        let lhs = two.wedge(&other).unwrap().top_coefficient().eval(&pt).unwrap();
        let rhs = other.wedge(&two).unwrap().top_coefficient().eval(&pt).unwrap();
        prop_assert!(close(lhs, rhs, 1e-12));
    }

    #[test]
    fn intrinsic_metric_equals_matrix(ma in structure(), pt in point()) {
        let m = lr::lr_metric_matrix(&ma, &pt).unwrap();
        let i = exterior::lr_metric_intrinsic(&ma, &pt).unwrap();
        for r in 0..4 {
            for c in 0..4 {
                prop_assert!(close(i[r][c], m[r][c], 1e-12));
            }
        }
    }

    #[test]
    fn ricci_is_symmetric_and_independent_of_e(ma in structure(), pt in point(), e in coeffs()) {
        prop_assume!(ma.d.eval(&pt).unwrap().abs() > 0.2);
        let a = lr::lr_curvature(&ma, &pt).unwrap();
        let b = lr::lr_curvature(&ma.with_e(field_from(&e)), &pt).unwrap();
        let scale = 1.0 + a.term_scale;
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((a.ricci[i][j] - a.ricci[j][i]).abs() <= 1e-10 * scale);
                prop_assert_eq!(a.ricci[i][j], b.ricci[i][j]);
            }
        }
    }

    #[test]
    fn symbolic_ricci_matches_finite_difference_ricci(ma in structure(), pt in point()) {
        prop_assume!(ma.d.eval(&pt).unwrap().abs() > 0.3);
        let exact = lr::lr_curvature(&ma, &pt).unwrap();
        let fd = curvature::curvature(&metric_from_fd(&ma, &pt)).unwrap();
        let scale = 1.0 + exact.term_scale;
        for i in 0..4 {
            for j in 0..4 {
                prop_assert!((exact.ricci[i][j] - fd.ricci[i][j]).abs() <= 1e-5 * scale,
                    "{i}{j}: {} vs {}", exact.ricci[i][j], fd.ricci[i][j]);
            }
        }
    }

    #[test]
    fn pullback_is_jacobian_sandwich(ma in structure(), c in prop::collection::vec(-1.0f64..1.0, 10), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let f = SurfaceFunction::new(
            quadratic_monomials().iter().zip(&c).filter(|(e, _)| e[2] == 0 && e[3] == 0)
                .fold(ScalarField::zero(), |acc, (e, &k)| {
                    acc + ScalarField::constant(k) * ScalarField::x().powi(e[0] + 1) * ScalarField::y().powi(e[1])
                }),
        ).unwrap();
        let pt = Point2::new(x, y);
        let lifted = pullback::lift(&f, &pt).unwrap();
        let g = lr::lr_metric_matrix(&ma, &lifted).unwrap();
        let h = f.jet(&pt).unwrap();
        let jac = [[1.0, 0.0], [0.0, 1.0], [h.fxx, h.fxy], [h.fxy, h.fyy]];
        let got = pullback::pullback_metric(&ma, &f, &pt).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let mut s = 0.0;
                for i in 0..4 {
                    for j in 0..4 {
                        s += jac[i][a] * g[i][j] * jac[j][b];
                    }
                }
                prop_assert!(close(got[a][b], s, 1e-12));
            }
        }
    }

    #[test]
    fn koszul_first_form_is_half_log_det_gradient(c in prop::collection::vec(-1.0f64..1.0, 6), x in -1.0f64..1.0, y in -1.0f64..1.0) {
        let (xx, yy) = (ScalarField::x(), ScalarField::y());
        let f = ScalarField::constant(1.0 + c[0].abs()) * xx.powi(2) + ScalarField::constant(1.0 + c[1].abs()) * yy.powi(2)
            + ScalarField::constant(c[2]) * xx.powi(4) / ScalarField::constant(12.0)
            + ScalarField::constant(0.3 * c[3]) * (xx.clone() * yy.clone()).sin()
            + ScalarField::constant(0.2 * c[4]) * (xx + yy * ScalarField::constant(c[5])).exp();
        let sf = SurfaceFunction::new(f).unwrap();
        let pt = Point2::new(x, y);
        prop_assume!(sf.jet(&pt).unwrap().hessian_det().abs() > 0.1);
        let a = pullback::koszul_first(&sf, &pt).unwrap();
        let (a_log, b_log) = pullback::koszul_from_hessian_determinant(&sf, &pt).unwrap();
        let b = pullback::koszul_second(&sf, &pt).unwrap();
        for i in 0..2 {
            prop_assert!(close(a[i], a_log[i], 1e-9));
            for j in 0..2 {
                prop_assert!(close(b[i][j], b_log[i][j], 1e-9));
            }
        }
    }

    #[test]
    fn plucker_round_trip(c in prop::array::uniform6(-5.0f64..5.0)) {
        prop_assume!(c.iter().any(|v| *v != 0.0));
        let params = FamilyParams::new(c).unwrap();
        let p = lr::plucker_from_params(&params);
        prop_assert_eq!(p.to_params().unwrap(), params);
        let [p12, p13, p14, p23, p24, p34] = p.coords();
        prop_assert_eq!(PluckerPoint::new(p12, p13, p14, p23, p24, p34).unwrap(), p);
        prop_assert_eq!(p.quadric_residual(), lr::cond_residual(&params));
    }

    #[test]
    fn perturbed_family_is_not_ricci_flat(c in prop::array::uniform6(-1.0f64..1.0), pts in prop::collection::vec(point(), 5)) {
        let params = FamilyParams::new(c).unwrap();
        prop_assume!(params.cond_residual().abs() >= 0.1);
        prop_assume!(pts.iter().all(|p| !params.is_singular(p)));
        let report = lr::ricci_flat_check(&params, &ScalarField::zero(), &pts).unwrap();
        prop_assert!(report.max_ricci >= 1e-3);
        prop_assert!(!report.ricci_flat && report.consistent);
    }

    #[test]
    fn solved_instances_have_det_four_pf(ma in structure(), c in prop::collection::vec(-1.0f64..1.0, 6), x in -1.5f64..1.5, y in -1.5f64..1.5) {
        let (xx, yy) = (ScalarField::x(), ScalarField::y());
        let f = ScalarField::constant(c[0]) * xx.powi(3) + ScalarField::constant(c[1]) * xx.clone() * yy.clone()
            + ScalarField::constant(c[2]) * yy.powi(2) + ScalarField::constant(c[3]) * (xx * ScalarField::constant(c[4])).cos()
            + ScalarField::constant(c[5]) * yy.powi(3);
        let sf = SurfaceFunction::new(f).unwrap();
        let [[fxx, fxy], [_, fyy]] = sf.hessian_fields();
        let e = -(ma.a.clone() * fxx.clone() + ScalarField::constant(2.0) * ma.b.clone() * fxy.clone()
            + ma.c.clone() * fyy.clone() + ma.d.clone() * (fxx * fyy - fxy.powi(2)));
        let solved = ma.with_e(e);
        let pt = Point2::new(x, y);
        let r = pullback::pf_det_relation(&solved, &sf, &pt).unwrap();
        let g = pullback::pullback_metric(&solved, &sf, &pt).unwrap();
        let scale = 1.0 + curvature::max_abs(&g).powi(2);
        prop_assert!(r.gap.abs() <= 1e-12 * scale);
        let roots = pullback::pullback_eigenvalues(&solved, &sf, &pt).unwrap();
        let direct = curvature::symmetric_eigenvalues(&g);
        prop_assert!((roots.0 - direct[0]).abs() <= 1e-9 * (1.0 + curvature::max_abs(&g)));
        prop_assert!((roots.1 - direct[1]).abs() <= 1e-9 * (1.0 + curvature::max_abs(&g)));
    }
}
