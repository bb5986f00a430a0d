use liepert_core::detsolve::*;
use liepert_core::error::Error;
use liepert_core::jet::{Generator, OdeProblem, PointGenerator};
use liepert_core::numverify::*;
use liepert_core::parser::parse_expr;
use liepert_core::symexpr::{EpsSeries, NormalForm, Symbol};
use proptest::prelude::*;

fn nf(s: &str) -> NormalForm {
    parse_expr(s).unwrap().normalize().unwrap()
}

fn ode(n: u32, f0: &str, f1: &str) -> OdeProblem {
    OdeProblem::new(n, nf(f0), nf(f1)).unwrap()
}

fn apt(xi0: &str, eta0: &str, xi1: &str, eta1: &str) -> Generator {
    Generator::Point(PointGenerator::new(
        EpsSeries::new(nf(xi0), nf(xi1)),
        EpsSeries::new(nf(eta0), nf(eta1)),
    ))
}

#[test]
fn rk4_exponential() {
    let t = rk4(|_, y| Ok(vec![y[0]]), &[1.0], (0.0, 1.0), 1e-3).unwrap();
    assert_eq!(t.len(), 1001);
    assert_eq!(*t.xs.last().unwrap(), 1.0);
    assert!((t.final_state()[0] - std::f64::consts::E).abs() < 1e-8);
}

#[test]
fn rk4_rejects_bad_input() {
    assert!(matches!(rk4(|_, y| Ok(y.to_vec()), &[1.0], (0.0, 1.0), 0.0), Err(Error::ValidationError(_))));
    let r = rk4(|_, y| Ok(vec![y[0] * y[0]]), &[1.0], (0.0, 2.0), 1e-2);
    assert!(matches!(r, Err(Error::NonFiniteState(_))));
}

#[test]
fn rk4_backwards_and_empty_span() {
    let t = rk4(|_, y| Ok(vec![y[0]]), &[1.0], (0.0, -1.0), 1e-3).unwrap();
    assert!((t.final_state()[0] - (-1f64).exp()).abs() < 1e-10);
    assert!(t.xs.windows(2).all(|w| w[1] < w[0]));
    let t = rk4(|_, y| Ok(vec![y[0]]), &[3.0], (2.0, 2.0), 1e-3).unwrap();
    assert_eq!(t.states, vec![vec![3.0]]);
}

#[test]
fn rk4_fourth_order_problem() {
    let p = ode(4, "-y''", "2*y*y'' + 2*y'^2");
    let t = rk4(ode_rhs(&p, 0.0).unwrap(), &[1.0, 1.0, -1.0, -1.0], (0.0, 10.0), 1e-3).unwrap();
    let err = t
        .xs
        .iter()
        .zip(&t.states)
        .map(|(x, s)| (s[0] - (x.sin() + x.cos())).abs())
        .fold(0.0, f64::max);
    assert!(err < 1e-6, "{}", err);
}

#[test]
fn rk4_convergence_order() {
    let p = ode(2, "-y", "0");
    let f = ode_rhs(&p, 0.0).unwrap();
    let order = self_convergence_order(&f, &[1.0, 0.0], (0.0, 5.0), 0.05).unwrap();
    assert!(order >= 3.8, "{}", order);
}

#[test]
fn ode_rhs_needs_numeric_coefficients() {
    let mut p = ode(1, "y", "0");
    p.f0 = NormalForm::symbol(Symbol::param("k"));
    assert!(matches!(ode_rhs(&p, 0.0), Err(Error::MissingSymbol(_))));
}

fn shift_field() -> VectorField {
    VectorField::new(vec![Symbol::X], vec![EpsSeries::new(NormalForm::one(), nf("x"))]).unwrap()
}

#[test]
fn flows_of_the_shift_generator() {
    let eps = 0.1;
    let x = 2.0;
    for a in [0.25, 0.5, 1.0] {
        let ap = lie_flow(&shift_field(), &[x], a, eps, FlowMode::Approximate, 1e-3).unwrap();
        assert!((ap.point[0] - (x + a + eps * (a * x + a * a / 2.0))).abs() < 1e-8);
        let ex = lie_flow(&shift_field(), &[x], a, eps, FlowMode::Exact, 1e-3).unwrap();
        let e = (a * eps).exp();
        assert!((ex.point[0] - (x * e + (e - 1.0) / eps)).abs() < 1e-8);
    }
}

#[test]
fn flow_at_zero_is_identity() {
    for mode in [FlowMode::Exact, FlowMode::Approximate] {
        let r = lie_flow(&shift_field(), &[0.7], 0.0, 0.3, mode, 1e-3).unwrap();
        assert_eq!(r.point, vec![0.7]);
        assert_eq!(r.steps, 0);
    }
}

#[test]
fn approximate_flow_truncates_exact_flow() {
    let eps = 0.1;
    let x = 2.0;
    for i in 0..=10 {
        let a = i as f64 / 10.0;
        let ap = lie_flow(&shift_field(), &[x], a, eps, FlowMode::Approximate, 1e-3).unwrap();
        let (f0, f1) = ap.parts.unwrap();
        // exact flow expanded in eps: x + a + eps (a x + a^2/2) + O(eps^2)
        assert!((f0[0] - (x + a)).abs() < 1e-10);
        assert!((f1[0] - (a * x + a * a / 2.0)).abs() < 1e-10);
        // first-order truncation of the exact flow, by central differences in eps
        let d = 1e-4;
        let at = |e: f64| lie_flow(&shift_field(), &[x], a, e, FlowMode::Exact, 1e-3).unwrap().point[0];
        let trunc = at(0.0) + eps * (at(d) - at(-d)) / (2.0 * d);
        assert!((ap.point[0] - trunc).abs() <= 1e-7);
    }
}

#[test]
fn circles_are_sheared_rigidly() {
    let r = Symbol::var("r");
    let th = Symbol::var("t");
    let field = VectorField::new(
        vec![r.clone(), th],
        vec![EpsSeries::zero(), EpsSeries::exact(NormalForm::symbol(r))],
    )
    .unwrap();
    let a = 0.03;
    let curve: Vec<Vec<f64>> = (0..64).map(|i| vec![1.5, i as f64 * 0.1]).collect();
    let out = transform_curve(&curve, |p| Ok(lie_flow(&field, p, a, 0.0, FlowMode::Exact, 1e-3)?.point)).unwrap();
    for (p, q) in curve.iter().zip(&out) {
        assert!((q[0] - p[0]).abs() < 1e-12);
        assert!((q[1] - (p[1] + a * p[0])).abs() < 1e-12);
    }
    let same = transform_curve(&curve, |p| Ok(lie_flow(&field, p, 0.0, 0.0, FlowMode::Exact, 1e-3)?.point)).unwrap();
    assert_eq!(same, curve);
}

fn circle_field(k: &str) -> VectorField {
    let r = Symbol::var("r");
    let th = Symbol::var("t");
    let ctx = liepert_core::parser::ParseContext {
        vars: vec!["r".into(), "t".into()],
        ..Default::default()
    };
    let p = |s: &str| liepert_core::parser::parse_expr_with(s, &ctx).unwrap().normalize().unwrap();
    VectorField::new(
        vec![r, th],
        vec![
            EpsSeries::new(NormalForm::zero(), p(&format!("{k}*r*exp(-{k}*t)"))),
            EpsSeries::exact(p("r")),
        ],
    )
    .unwrap()
}

#[test]
fn perturbed_circles_keep_their_level() {
    let (k, eps, a) = (0.5, 0.3, 0.03);
    let field = circle_field("1/2");
    for i in 0..40 {
        let (r, th) = (1.0 + 0.05 * i as f64, -2.0 + 0.2 * i as f64);
        let c = circle_level(r, th, k, eps);
        let (rs, ts) = perturbed_circle_flow(r, th, a, k, eps);
        assert!((circle_level(rs, ts, k, eps) - c).abs() < 1e-8);
        let num = lie_flow(&field, &[r, th], a, eps, FlowMode::Exact, 1e-4).unwrap();
        assert!((num.point[0] - rs).abs() < 1e-10);
        assert!((num.point[1] - ts).abs() < 1e-10);
        assert!((circle_level(num.point[0], num.point[1], k, eps) - c).abs() < 1e-8);
        assert_eq!(perturbed_circle_flow(r, th, 0.0, k, eps), (r, th));
    }
}

#[test]
fn flow_group_law() {
    let field = VectorField::from_point(&PointGenerator::exact(nf("x*y"), nf("1 + y^2/4")));
    let p = [0.3, -0.2];
    let ab = lie_flow(&field, &p, 0.4, 0.0, FlowMode::Exact, 1e-3).unwrap();
    let a = lie_flow(&field, &p, 0.15, 0.0, FlowMode::Exact, 1e-3).unwrap();
    let b = lie_flow(&field, &a.point, 0.25, 0.0, FlowMode::Exact, 1e-3).unwrap();
    for i in 0..2 {
        assert!((ab.point[i] - b.point[i]).abs() < 1e-10);
    }
}

#[test]
fn symmetries_carry_solutions_to_solutions() {
    // y'' = 0 with the projective generator x^2 d/dx + x y d/dy
    let field = VectorField::from_point(&PointGenerator::exact(nf("x^2"), nf("x*y")));
    let line: Vec<Vec<f64>> = rk4(|_, s| Ok(vec![s[1], 0.0]), &[0.5, -0.7], (0.0, 1.0), 0.05)
        .unwrap()
        .xs
        .iter()
        .map(|&x| vec![x, 0.5 - 0.7 * x])
        .collect();
    let moved = transform_curve(&line, |p| Ok(lie_flow(&field, p, 0.2, 0.0, FlowMode::Exact, 1e-3)?.point)).unwrap();
    // Three consecutive points on a line have zero second divided difference.
    for w in moved.windows(3) {
        let d1 = (w[1][1] - w[0][1]) / (w[1][0] - w[0][0]);
        let d2 = (w[2][1] - w[1][1]) / (w[2][0] - w[1][0]);
        assert!((d2 - d1).abs() / (w[2][0] - w[0][0]) < 1e-8);
    }
}

#[test]
fn residual_slopes() {
    let p = ode(2, "0", "1/y'");
    let grid = [1e-2, 1e-3, 1e-4];
    let good = symmetry_residual(&p, &apt("y", "0", "0", "2*x^2"), &grid, 50, 7).unwrap();
    assert!(good.slope >= 1.9, "{:?}", good);
    // Adding x to eta1 is harmless (x d/dy is a symmetry of y'' = 0); y^2 is not.
    let harmless = symmetry_residual(&p, &apt("y", "0", "0", "2*x^2 + x"), &grid, 50, 7).unwrap();
    assert!(harmless.slope >= 1.9);
    let bad = symmetry_residual(&p, &apt("y", "0", "0", "2*x^2 + y^2"), &grid, 50, 7).unwrap();
    assert!(bad.slope <= 1.2, "{:?}", bad);
    assert!(!bad.passes(1.9));

    let unperturbed = ode(2, "0", "0");
    let s = ResidualSampler::new(&unperturbed, &apt("x^2", "x*y", "0", "0"), 50, 1).unwrap();
    assert!(s.max_residual(0.0).unwrap() <= 1e-12);
    let r = symmetry_residual(&unperturbed, &apt("x^2", "x*y", "0", "0"), &grid, 10, 1).unwrap();
    assert!(r.slope.is_infinite(), "{:?}", r);
}

#[test]
fn sampling_avoids_poles_and_is_reproducible() {
    let p = ode(2, "0", "1/y'");
    let g = apt("x", "0", "-x^2/2", "0");
    let a = ResidualSampler::new(&p, &g, 30, 11).unwrap();
    let b = ResidualSampler::new(&p, &g, 30, 11).unwrap();
    assert_eq!(a.points, b.points);
    let k = a.slots.iter().position(|s| *s == Symbol::Jet(1)).unwrap();
    assert!(a.points.iter().all(|pt| pt[k].abs() >= 0.1));
    assert!(matches!(
        symmetry_residual(&p, &g, &[1e-2, 1e-3], 5, 0),
        Err(Error::ValidationError(_))
    ));
}

#[test]
fn every_reported_generator_is_second_order() {
    let p = ode(2, "0", "1/y'");
    let basis: Vec<Generator> = [
        ("x^2", "x*y"),
        ("0", "x"),
        ("x*y/2", "y^2/2"),
        ("0", "y"),
        ("0", "1"),
        ("y", "0"),
        ("x", "0"),
        ("1", "0"),
    ]
    .iter()
    .map(|(a, b)| apt(a, b, "0", "0"))
    .collect();
    let xy2 = GeneratorAnsatz::point(Ansatz::polynomial(&jet_args(0), 2));
    let r = approx_symmetries_with(&p, &basis, &xy2).unwrap();
    for g in &r.generators {
        let rep = symmetry_residual(&p, &g.generator, &[1e-2, 1e-3, 1e-4], 20, 3).unwrap();
        assert!(rep.slope >= 1.9, "{:?}", rep);
    }
}

fn bouss_solution() -> (NormalForm, Vec<NormalForm>) {
    (
        nf("sin(x) + cos(x) + eps*(16 - sin(2*x))/3"),
        vec![nf("1 + 16/3*eps"), nf("1 - 2/3*eps"), nf("-1"), nf("-1 + 8/3*eps")],
    )
}

#[test]
fn boussinesq_solution_is_second_order_accurate() {
    let p = ode(4, "-y''", "2*y*y'' + 2*y'^2");
    let (sol, ics) = bouss_solution();
    let r = compare_solution(&p, &sol, Some(&ics), &[0.02, 0.01, 0.005], (0.0, 10.0), 1e-3).unwrap();
    assert!(r.slope >= 1.9, "{:?}", r);
    assert!(r.errors[1] < r.errors[0]);
    let r0 = compare_solution(&p, &sol, None, &[0.0], (0.0, 10.0), 1e-3).unwrap();
    assert!(r0.errors[0] < 1e-6);
}

#[test]
fn inconsistent_initial_data() {
    let p = ode(4, "-y''", "2*y*y'' + 2*y'^2");
    let (sol, mut ics) = bouss_solution();
    ics[1] = nf("1");
    assert!(matches!(
        compare_solution(&p, &sol, Some(&ics), &[0.01], (0.0, 1.0), 1e-2),
        Err(Error::InconsistentICs(_))
    ));
}

#[test]
fn csv_layout() {
    let mut buf = Vec::new();
    write_csv(&mut buf, &["x", "y"], &[vec![0.0, 1.5], vec![0.25, -2.0]]).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap(), "x,y\n0,1.5\n0.25,-2\n");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn linear_flows_match_matrix_exponential(b in -1.0f64..1.0, x in -2.0f64..2.0, a in -1.0f64..1.0) {
        let field = VectorField::new(
            vec![Symbol::X],
            vec![EpsSeries::exact(&NormalForm::x().scale(&liepert_core::symexpr::q(1)) + &NormalForm::zero())],
        ).unwrap();
        let r = lie_flow(&field, &[x], a, 0.0, FlowMode::Exact, 1e-3).unwrap();
        prop_assert!((r.point[0] - x * a.exp()).abs() < 1e-9);
        let r = rk4(|_, y| Ok(vec![b * y[0]]), &[x], (0.0, a), 1e-3).unwrap();
        prop_assert!((r.final_state()[0] - x * (b * a).exp()).abs() < 1e-10);
    }

    #[test]
    fn slope_of_power_law(p in 0.5f64..3.0, c in 0.1f64..10.0) {
        let xs = [1e-2, 3e-3, 1e-3, 1e-4];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| c * x.powf(p)).collect();
        prop_assert!((fit_slope(&xs, &ys) - p).abs() < 1e-9);
    }
}
