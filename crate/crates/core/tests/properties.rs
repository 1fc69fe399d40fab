use std::sync::Arc;

use proptest::prelude::*;
use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints};
use singlag::evolution::EvolutionContext;
use singlag::sampling::{box_point, trial_rng};
use singlag::symbolic::{parse, Expr, Role, VariableRegistry};
use singlag::{Chart, LagrangianSystem, VectorField};

type Terms = Vec<(i32, [u32; 3])>;

fn xyz() -> Arc<VariableRegistry> {
    VariableRegistry::new(&[("x", Role::Config), ("y", Role::Config), ("z", Role::Config)]).unwrap()
}

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((-4i32..=4, [0u32..3, 0u32..3, 0u32..3]), 1..4)
}

fn build(reg: &Arc<VariableRegistry>, vars: &[usize], t: &Terms) -> Expr {
    t.iter().fold(Expr::zero(reg), |acc, (c, e)| {
        let m = vars
            .iter()
            .zip(e)
            .fold(Expr::int(reg, *c as i64), |m, (&v, &k)| &m * &Expr::var(reg, v).pow(k as i32).unwrap());
        &acc + &m
    })
}

fn poly(reg: &Arc<VariableRegistry>, t: &Terms) -> Expr {
    build(reg, &[0, 1, 2], t)
}

fn conformal() -> EvolutionContext {
    let sys = Arc::new(LagrangianSystem::new("c", &["x", "lambda"], Some(&["p", "pi"]), "(dx^2 - lambda*x^2)/2").unwrap());
    let cs = classify_first_class(&sys, &primary_constraints(&sys).unwrap()).unwrap();
    let h = hamiltonian(&sys, None).unwrap();
    EvolutionContext::new(sys, h, &cs).unwrap()
}

fn phase(sys: &LagrangianSystem, t: &Terms) -> Expr {
    let vars = [sys.q()[0], sys.q()[1], sys.p()[0]];
    build(sys.registry(), &vars, t)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ring_laws(a in terms(), b in terms(), c in terms()) {
        let reg = xyz();
        let (a, b, c) = (poly(&reg, &a), poly(&reg, &b), poly(&reg, &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert!((&(&a + &b) - &b - &a).is_zero());
    }

    #[test]
    fn division_inverts_multiplication(a in terms(), b in terms()) {
        let reg = xyz();
        let (a, b) = (poly(&reg, &a), poly(&reg, &b));
        prop_assume!(!b.is_zero());
        let q = a.checked_div(&b).unwrap();
        prop_assert_eq!(&q * &b, a);
    }

    #[test]
    fn canonical_form_is_stable(a in terms(), b in terms()) {
        let reg = xyz();
        let b = poly(&reg, &b);
        prop_assume!(!b.is_zero());
        let f = poly(&reg, &a).checked_div(&b).unwrap();
        prop_assert_eq!(f.canonicalize(), f.clone());
        let again = parse(&f.to_string(), &reg).unwrap();
        prop_assert_eq!(again, f);
    }

    #[test]
    fn product_rule(a in terms(), b in terms(), v in 0usize..3) {
        let reg = xyz();
        let (a, b) = (poly(&reg, &a), poly(&reg, &b));
        prop_assert_eq!((&a * &b).diff(v), &(&a.diff(v) * &b) + &(&a * &b.diff(v)));
    }

    #[test]
    fn derivative_matches_finite_difference(a in terms(), b in terms(), v in 0usize..3, seed in any::<u64>()) {
        let reg = xyz();
        let den = &poly(&reg, &b) * &poly(&reg, &b);
        let f = poly(&reg, &a).checked_div(&(&den + &Expr::int(&reg, 1))).unwrap();
        let df = f.diff(v);
        let x = box_point(&mut trial_rng(seed, 0), 3, -1.0, 1.0);
        let h = 1e-5;
        let (mut up, mut dn) = (x.clone(), x.clone());
        up[v] += h;
        dn[v] -= h;
        let fd = (f.eval_f64(&up).unwrap() - f.eval_f64(&dn).unwrap()) / (2.0 * h);
        let exact = df.eval_f64(&x).unwrap();
        prop_assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "fd {} vs {}", fd, exact);
    }

    #[test]
    fn poisson_bracket_is_a_lie_bracket(f in terms(), g in terms(), h in terms()) {
        let ctx = conformal();
        let sys = ctx.system();
        let (f, g, h) = (phase(sys, &f), phase(sys, &g), phase(sys, &h));
        prop_assert!((&sys.bracket(&f, &g) + &sys.bracket(&g, &f)).is_zero());
        let jacobi = &(&sys.bracket(&f, &sys.bracket(&g, &h)) + &sys.bracket(&g, &sys.bracket(&h, &f)))
            + &sys.bracket(&h, &sys.bracket(&f, &g));
        prop_assert!(jacobi.is_zero());
    }

    #[test]
    fn k_is_a_derivation_along_fl(f in terms(), g in terms()) {
        let ctx = conformal();
        let sys = ctx.system();
        let (f, g) = (phase(sys, &f), phase(sys, &g));
        let lhs = ctx.k(&(&f * &g)).unwrap();
        let rhs = &(&ctx.k(&f).unwrap() * &sys.pullback(&g).unwrap())
            + &(&sys.pullback(&f).unwrap() * &ctx.k(&g).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn lie_bracket_of_fields(a in prop::collection::vec(terms(), 4), b in prop::collection::vec(terms(), 4), f in terms()) {
        let ctx = conformal();
        let sys = ctx.system();
        let tq = sys.tq_dirs();
        let field = |t: &Vec<Terms>| {
            VectorField::new(Chart::TQ, tq.clone(), t.iter().map(|c| build(sys.registry(), &tq[..3], c)).collect())
        };
        let (x, y) = (field(&a), field(&b));
        let f = build(sys.registry(), &tq[..3], &f);
        prop_assert!(x.lie_bracket(&y).add(&y.lie_bracket(&x)).is_zero());
        let commutator = &x.apply(&y.apply(&f)) - &y.apply(&x.apply(&f));
        prop_assert_eq!(x.lie_bracket(&y).apply(&f), commutator);
    }

    #[test]
    fn sampling_is_reproducible(seed in any::<u64>(), trial in 0u64..1000) {
        let a = box_point(&mut trial_rng(seed, trial), 5, -2.0, 2.0);
        let b = box_point(&mut trial_rng(seed, trial), 5, -2.0, 2.0);
        prop_assert_eq!(&a, &b);
        prop_assert!(a.iter().all(|v| (-2.0..2.0).contains(v)));
    }
}
