//! Hamiltonian side: primary constraints, a Hamiltonian, first/second-class
//! split, stabilization chains, and weak/strong equality tests.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::legendre::LagrangianSystem;
use crate::sampling::{box_point, rational_point, RANK_SEED};
use crate::symbolic::compiled::CompiledExpr;
use crate::symbolic::gcd::squarefree_part;
use crate::symbolic::matrix::rational_rank;
use crate::symbolic::{Expr, ExprMatrix, Poly, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstraintClass {
    First,
    Second,
    Unclassified,
}

#[derive(Clone, Debug)]
pub struct Constraint {
    pub expr: Expr,
    pub generation: usize,
    pub class: ConstraintClass,
}

#[derive(Clone, Debug, Default)]
pub struct ConstraintSet {
    items: Vec<Constraint>,
}

impl ConstraintSet {
    pub fn new(items: Vec<Constraint>) -> Self {
        ConstraintSet { items }
    }

    pub fn items(&self) -> &[Constraint] {
        &self.items
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn exprs(&self) -> Vec<Expr> {
        self.items.iter().map(|c| c.expr.clone()).collect()
    }

    pub fn primaries(&self) -> Vec<Expr> {
        self.items.iter().filter(|c| c.generation == 0).map(|c| c.expr.clone()).collect()
    }

    pub fn first_class_primaries(&self) -> Vec<Expr> {
        self.items
            .iter()
            .filter(|c| c.generation == 0 && c.class == ConstraintClass::First)
            .map(|c| c.expr.clone())
            .collect()
    }
}

/// Primary constraints `φ_μ = γ_μ(q)ᵀ(p − a(q))` for a Lagrangian at most
/// quadratic in the velocities, with `a = ∂L/∂dq` at zero velocity.
pub fn primary_constraints(sys: &LagrangianSystem) -> Result<ConstraintSet> {
    match sys.velocity_degree() {
        Some(d) if d <= 2 => {}
        _ => {
            return Err(Error::Unsupported(
                "automatic constraints need a lagrangian at most quadratic in the velocities; \
                 supply the primary constraints explicitly"
                    .into(),
            ))
        }
    }
    let a: Vec<Expr> = sys.momenta().iter().map(|m| sys.at_zero_velocity(m)).collect::<Result<_>>()?;
    let mut items = Vec::new();
    for gamma in sys.kernel_basis() {
        if let Some(v) = gamma.iter().flat_map(Expr::vars).find(|v| !sys.q().contains(v)) {
            return Err(Error::Internal(format!(
                "kernel vector depends on `{}` for a velocity-quadratic lagrangian",
                sys.registry().name(v)
            )));
        }
        let phi = gamma.iter().zip(sys.p()).zip(&a).fold(sys.zero(), |acc, ((g, &p), a)| {
            &acc + &(g * &(&sys.var(p) - a))
        });
        items.push(Constraint { expr: phi, generation: 0, class: ConstraintClass::Unclassified });
    }
    let cs = ConstraintSet::new(items);
    for c in cs.items() {
        let pulled = sys.pullback(&c.expr)?;
        if !pulled.is_zero() {
            return Err(Error::Internal(format!("derived constraint `{}` pulls back to `{pulled}`", c.expr)));
        }
    }
    Ok(cs)
}

/// Accepts user-supplied primary constraints when each vanishes on the image
/// of FL, their number equals the corank of W, and their momentum Jacobian has
/// full rank on the image.
pub fn verify_constraints(sys: &LagrangianSystem, candidates: &[Expr]) -> Result<ConstraintSet> {
    let mut problems = Vec::new();
    for c in candidates {
        if let Err(e) = sys.require_phase_space(c) {
            problems.push(e.to_string());
            continue;
        }
        match sys.pullback(c) {
            Ok(z) if z.is_zero() => {}
            Ok(z) => problems.push(format!("candidate `{c}` does not vanish on image (pulls back to `{z}`)")),
            Err(e) => problems.push(format!("candidate `{c}`: {e}")),
        }
    }
    let corank = sys.kernel_basis().len();
    if candidates.len() != corank {
        problems.push(format!(
            "{} candidates given but the fibre hessian has corank {corank}",
            candidates.len()
        ));
    }
    if problems.is_empty() && !candidates.is_empty() {
        let jac = ExprMatrix::from_rows(
            sys.registry(),
            candidates
                .iter()
                .map(|c| sys.gamma_vector(c))
                .collect::<Result<Vec<_>>>()?,
        );
        let r = jac.rank();
        if r != candidates.len() {
            problems.push(format!(
                "candidates are not independent on the image: momentum jacobian has rank {r}, expected {}",
                candidates.len()
            ));
        }
    }
    if !problems.is_empty() {
        return Err(Error::ConstraintsRejected(problems));
    }
    Ok(ConstraintSet::new(
        candidates
            .iter()
            .map(|c| Constraint { expr: c.clone(), generation: 0, class: ConstraintClass::Unclassified })
            .collect(),
    ))
}

/// A Hamiltonian with `FL*H = E_L`. Without a user candidate the closed form
/// `½(p−a)ᵀG(p−a) + V` is used, where G inverts W on its pivot block.
pub fn hamiltonian(sys: &LagrangianSystem, user: Option<&Expr>) -> Result<Expr> {
    let h = match user {
        Some(h) => {
            sys.require_phase_space(h)?;
            h.clone()
        }
        None => quadratic_hamiltonian(sys)?,
    };
    let r = &sys.pullback(&h)? - sys.energy();
    if !r.is_zero() {
        let msg = format!("FL*H - E_L = {r} for H = {h}");
        return Err(if user.is_some() { Error::ConstraintsRejected(vec![msg]) } else { Error::Internal(msg) });
    }
    Ok(h)
}

fn quadratic_hamiltonian(sys: &LagrangianSystem) -> Result<Expr> {
    match sys.velocity_degree() {
        Some(d) if d <= 2 => {}
        _ => {
            return Err(Error::Unsupported(
                "closed-form hamiltonian needs a lagrangian at most quadratic in the velocities; \
                 supply one explicitly"
                    .into(),
            ))
        }
    }
    let n = sys.dim();
    let piv = sys.pivots();
    let block = sys.hessian().submatrix(piv, piv);
    let inv = block
        .inverse()
        .ok_or_else(|| Error::Internal("pivot block of the fibre hessian is singular".into()))?;
    let a: Vec<Expr> = sys.momenta().iter().map(|m| sys.at_zero_velocity(m)).collect::<Result<_>>()?;
    let shifted: Vec<Expr> = (0..n).map(|i| &sys.var(sys.p()[i]) - &a[i]).collect();
    let sub: Vec<Expr> = piv.iter().map(|&i| shifted[i].clone()).collect();
    let kinetic = inv.bilinear(&sub, &sub).scale(&Rational::new(1.into(), 2.into()));
    let v = -&sys.at_zero_velocity(sys.lagrangian())?;
    Ok(&kinetic + &v)
}

/// Splits the primaries into first-class combinations followed by
/// second-class members. Uses the nullspace of the pulled-back bracket matrix
/// when it is velocity-free, otherwise the bracket matrix on phase space.
pub fn classify_first_class(sys: &LagrangianSystem, cs: &ConstraintSet) -> Result<ConstraintSet> {
    let phis = cs.primaries();
    let m = phis.len();
    if m == 0 {
        return Ok(cs.clone());
    }
    let reg = sys.registry();
    let c = ExprMatrix::from_fn(reg, m, m, |i, j| sys.bracket(&phis[i], &phis[j]));
    let pulled = ExprMatrix::from_fn(reg, m, m, |i, j| {
        sys.pullback(c.get(i, j)).unwrap_or_else(|_| c.get(i, j).clone())
    });
    let velocity_free = (0..m).all(|i| (0..m).all(|j| sys.is_phase_space_fn(pulled.get(i, j))));
    let basis = if velocity_free { &pulled } else { &c };

    let generic = pulled.rank();
    let mut rng = ChaCha8Rng::seed_from_u64(RANK_SEED ^ 0xC1A55);
    let mut witnesses = Vec::new();
    for _ in 0..crate::legendre::RANK_SAMPLES {
        let pt = rational_point(&mut rng, reg.len());
        if let Some(vals) = pulled.eval_rational(&pt) {
            let r = rational_rank(vals);
            if r != generic {
                witnesses.push(format!("bracket matrix rank {r} at a sample point"));
            }
        }
    }
    if !witnesses.is_empty() {
        return Err(Error::NonConstantRank { generic, witnesses });
    }

    let (_, pivots) = basis.echelon();
    let mut items = Vec::new();
    for null in basis.nullspace() {
        let null = clear(&null);
        let psi = null.iter().zip(&phis).fold(sys.zero(), |acc, (a, p)| &acc + &(a * p));
        items.push(Constraint { expr: psi, generation: 0, class: ConstraintClass::First });
    }
    for &p in &pivots {
        items.push(Constraint { expr: phis[p].clone(), generation: 0, class: ConstraintClass::Second });
    }
    let mut rest: Vec<Constraint> = cs.items().iter().filter(|c| c.generation > 0).cloned().collect();
    items.append(&mut rest);
    Ok(ConstraintSet::new(items))
}

fn clear(v: &[Expr]) -> Vec<Expr> {
    let reg = v[0].registry().clone();
    let mut l = Poly::one(reg.len());
    for e in v {
        let g = crate::symbolic::gcd::gcd(&l, e.denom());
        l = &l * &e.denom().div_exact(&g).expect("gcd divides");
    }
    let f = Expr::from_poly(&reg, l);
    v.iter().map(|e| e * &f).collect()
}

/// Outcome of a weak-equality test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Weak {
    /// Division by the constraints leaves no remainder.
    Exact,
    /// Division leaves a remainder but `|f| < 1e-9` at every projected sample.
    Numerical,
    False,
}

impl Weak {
    pub fn holds(self) -> bool {
        self != Weak::False
    }
}

pub const WEAK_SAMPLES: usize = 200;
pub const WEAK_TOL: f64 = 1e-9;
const PROJECTION_TOL2: f64 = 1e-24;
const PROJECTION_ITERS: usize = 500;

/// Remainder of the numerator of `f` under division by the numerators of the
/// constraints, in the given order.
pub fn reduce(f: &Expr, constraints: &[Expr]) -> Poly {
    let divs: Vec<Poly> = constraints.iter().filter(|c| !c.is_zero()).map(|c| c.numer().clone()).collect();
    f.numer().divide_by_set(&divs).1
}

/// Dirac's weak equality `f ≈ 0` on the zero set of `constraints`.
pub fn weak_equality(f: &Expr, constraints: &[Expr], seed: u64) -> Weak {
    if f.is_zero() || reduce(f, constraints).is_zero() {
        return Weak::Exact;
    }
    if numerically_weak_zero(f, constraints, seed) {
        Weak::Numerical
    } else {
        Weak::False
    }
}

/// Samples points, projects them onto the surface with damped Gauss–Newton
/// and checks `|f|` there. Constraints are replaced by the squarefree parts
/// of their numerators, which cut out the same set and keep the projection
/// quadratically convergent.
pub fn numerically_weak_zero(f: &Expr, constraints: &[Expr], seed: u64) -> bool {
    let reg = f.registry().clone();
    let gens: Vec<Expr> = constraints
        .iter()
        .filter(|c| !c.is_zero())
        .map(|c| Expr::from_poly(&reg, squarefree_part(c.numer())))
        .collect();
    let mut vars: Vec<usize> = f.vars();
    for g in &gens {
        vars.extend(g.vars());
    }
    vars.sort_unstable();
    vars.dedup();
    let cf = CompiledExpr::new(f);
    let cg: Vec<CompiledExpr> = gens.iter().map(CompiledExpr::new).collect();
    let cj: Vec<Vec<CompiledExpr>> =
        gens.iter().map(|g| vars.iter().map(|&v| CompiledExpr::new(&g.diff(v))).collect()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut landed = 0;
    for _ in 0..WEAK_SAMPLES {
        let mut x = vec![0.0; reg.len()];
        for (&v, s) in vars.iter().zip(box_point(&mut rng, vars.len(), -2.0, 2.0)) {
            x[v] = s;
        }
        if !project(&mut x, &vars, &cg, &cj) {
            continue;
        }
        let (num, den) = cf.eval_parts(&x);
        if den.abs() < 1e-8 {
            continue;
        }
        landed += 1;
        if (num / den).abs() >= WEAK_TOL {
            return false;
        }
    }
    landed > 0
}

fn project(x: &mut [f64], vars: &[usize], g: &[CompiledExpr], jac: &[Vec<CompiledExpr>]) -> bool {
    if g.is_empty() {
        return true;
    }
    let m = g.len();
    let k = vars.len();
    let resid = |x: &[f64]| DVector::from_iterator(m, g.iter().map(|c| c.eval(x)));
    let mut r = resid(x);
    let mut mu = 1e-3;
    for _ in 0..PROJECTION_ITERS {
        let norm2 = r.norm_squared();
        if !norm2.is_finite() {
            return false;
        }
        if norm2 < PROJECTION_TOL2 {
            return true;
        }
        let j = DMatrix::from_fn(m, k, |a, b| jac[a][b].eval(x));
        let jt = j.transpose();
        let a = &jt * &j + DMatrix::identity(k, k) * mu;
        let rhs = -(&jt * &r);
        let Some(step) = a.lu().solve(&rhs) else { return false };
        let mut trial = x.to_vec();
        for (i, &v) in vars.iter().enumerate() {
            trial[v] += step[i];
        }
        let rt = resid(&trial);
        if rt.norm_squared() < norm2 {
            x.copy_from_slice(&trial);
            r = rt;
            mu = (mu * 0.3).max(1e-15);
        } else {
            mu *= 10.0;
            if mu > 1e12 {
                return false;
            }
        }
    }
    false
}

#[derive(Clone, Debug)]
pub struct Stabilization {
    pub constraints: ConstraintSet,
    /// One chain per first-class primary: `φ⁰, φ¹, …`.
    pub chains: Vec<Vec<Expr>>,
    pub stabilized: bool,
}

/// Adjoins `φ^{i+1} = {φ^i, H}` for every first-class primary until the new
/// bracket reduces to zero on the accumulated set, with at most `2·dim`
/// generations per chain. Second-class primaries are not extended.
pub fn stabilize(sys: &LagrangianSystem, cs: &ConstraintSet, h: &Expr) -> Stabilization {
    let mut acc: Vec<Expr> = cs.primaries();
    let mut items: Vec<Constraint> = cs.items().iter().filter(|c| c.generation == 0).cloned().collect();
    let mut chains = Vec::new();
    let mut stabilized = true;
    let bound = 2 * sys.dim();
    for root in cs.first_class_primaries() {
        let mut chain = vec![root.clone()];
        let mut done = false;
        for gen in 1..=bound {
            let next = sys.bracket(chain.last().unwrap(), h);
            if next.is_zero() || reduce(&next, &acc).is_zero() {
                done = true;
                break;
            }
            acc.push(next.clone());
            items.push(Constraint { expr: next.clone(), generation: gen, class: ConstraintClass::Unclassified });
            chain.push(next);
        }
        stabilized &= done;
        chains.push(chain);
    }
    if stabilized {
        label_secondaries(sys, &mut items);
    }
    Stabilization { constraints: ConstraintSet::new(items), chains, stabilized }
}

/// Labels generation ≥ 1 members first-class when all their brackets with
/// the full set vanish weakly.
fn label_secondaries(sys: &LagrangianSystem, items: &mut [Constraint]) {
    let all: Vec<Expr> = items.iter().map(|c| c.expr.clone()).collect();
    let mut labels = Vec::with_capacity(items.len());
    for c in items.iter() {
        if c.generation == 0 {
            labels.push(c.class);
            continue;
        }
        let first = all
            .iter()
            .all(|d| weak_equality(&sys.bracket(&c.expr, d), &all, RANK_SEED).holds());
        labels.push(if first { ConstraintClass::First } else { ConstraintClass::Unclassified });
    }
    for (c, l) in items.iter_mut().zip(labels) {
        c.class = l;
    }
}

/// Outcome of the strong-equality test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Strong {
    Strong,
    NotStrong,
    /// Exact reduction failed but numerics suggest membership.
    Inconclusive,
}

/// Strong equality `f ≃ g`: `f − g` lies in the square of the constraint
/// ideal. Tested by dividing by all products `φ_i φ_j`, then by dividing by
/// the `φ_i` and checking that every quotient is itself weakly zero.
pub fn strong_equality(f: &Expr, g: &Expr, constraints: &[Expr], seed: u64) -> Strong {
    let d = f - g;
    if d.is_zero() {
        return Strong::Strong;
    }
    let lin: Vec<Poly> = constraints.iter().filter(|c| !c.is_zero()).map(|c| c.numer().clone()).collect();
    let mut products = Vec::new();
    for i in 0..lin.len() {
        for j in i..lin.len() {
            products.push(&lin[i] * &lin[j]);
        }
    }
    if d.numer().divide_by_set(&products).1.is_zero() {
        return Strong::Strong;
    }
    let (quots, rem) = d.numer().divide_by_set(&lin);
    let reg = d.registry().clone();
    if rem.is_zero() {
        let mut numeric = false;
        for q in &quots {
            let qe = Expr::from_poly(&reg, q.clone());
            match weak_equality(&qe, constraints, seed) {
                Weak::Exact => {}
                Weak::Numerical => numeric = true,
                Weak::False => return Strong::NotStrong,
            }
        }
        return if numeric { Strong::Inconclusive } else { Strong::Strong };
    }
    if numerically_weak_zero(&d, constraints, seed) {
        Strong::Inconclusive
    } else {
        Strong::NotStrong
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conformal() -> LagrangianSystem {
        LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(1/2)*(dx^2 - lambda*x^2)")
            .unwrap()
    }

    #[test]
    fn conformal_constraint_and_hamiltonian() {
        let s = conformal();
        let cs = primary_constraints(&s).unwrap();
        assert_eq!(cs.primaries(), vec![s.parse("pi").unwrap()]);
        let h = hamiltonian(&s, None).unwrap();
        assert_eq!(h, s.parse("(p^2 + lambda*x^2)/2").unwrap());
        let alt = s.parse("(p^2 + lambda*x^2)/2 + x*pi").unwrap();
        assert!(hamiltonian(&s, Some(&alt)).is_ok());
    }

    #[test]
    fn conformal_chain() {
        let s = conformal();
        let cs = classify_first_class(&s, &primary_constraints(&s).unwrap()).unwrap();
        assert_eq!(cs.items()[0].class, ConstraintClass::First);
        let h = hamiltonian(&s, None).unwrap();
        let st = stabilize(&s, &cs, &h);
        assert!(st.stabilized);
        let want = ["pi", "-x^2/2", "-p*x", "lambda*x^2 - p^2"];
        let got: Vec<Expr> = st.chains[0].clone();
        assert_eq!(got, want.iter().map(|w| s.parse(w).unwrap()).collect::<Vec<_>>());
        assert!(st.constraints.items().iter().all(|c| c.class == ConstraintClass::First));
    }

    #[test]
    fn candidate_checks() {
        let s = conformal();
        assert!(verify_constraints(&s, &[s.parse("pi").unwrap()]).is_ok());
        let sq = verify_constraints(&s, &[s.parse("pi^2").unwrap()]).unwrap_err();
        assert!(sq.to_string().contains("not independent"));
        let x = verify_constraints(&s, &[s.parse("x").unwrap()]).unwrap_err();
        assert!(x.to_string().contains("does not vanish on image"));
    }

    #[test]
    fn second_class_pair() {
        let s = LagrangianSystem::new("pair", &["x", "y"], None, "y*dx - (x^2 + y^2)/2").unwrap();
        let cs = classify_first_class(&s, &primary_constraints(&s).unwrap()).unwrap();
        assert!(cs.items().iter().all(|c| c.class == ConstraintClass::Second));
    }

    #[test]
    fn weak_and_strong() {
        let s = conformal();
        let chain: Vec<Expr> = ["pi", "-x^2/2", "-p*x", "lambda*x^2 - p^2"]
            .iter()
            .map(|w| s.parse(w).unwrap())
            .collect();
        assert_eq!(weak_equality(&chain[1], &chain, 1), Weak::Exact);
        assert_eq!(weak_equality(&Expr::one(s.registry()), &chain, 1), Weak::False);
        assert_eq!(weak_equality(&s.parse("p^2").unwrap(), &chain, 1), Weak::Numerical);
        let (a, b) = (s.parse("x").unwrap(), s.parse("p").unwrap());
        let g = s.parse("lambda + 1").unwrap();
        let f = &g + &(&a * &b);
        assert_eq!(strong_equality(&f, &g, &[a.clone(), b.clone()], 1), Strong::Strong);
        assert_eq!(strong_equality(&(&g + &a), &g, &[a, b], 1), Strong::NotStrong);
    }
}
