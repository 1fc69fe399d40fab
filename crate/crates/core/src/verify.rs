//! Identity suite: every identity is a list of components, each a list of
//! terms whose sum must vanish. Checked exactly, then numerically by
//! evaluating the terms separately at seeded random points.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::canonical::KernelBasis;
use crate::error::{Error, Result};
use crate::evolution::EvolutionContext;
use crate::fields::VectorField;
use crate::legendre::LagrangianSystem;
use crate::sampling::{box_point, trial_rng};
use crate::symbolic::compiled::CompiledExpr;
use crate::symbolic::matrix::rational_nullspace;
use crate::symbolic::{Expr, Monomial, Poly, Rational};

pub const DEFAULT_TRIALS: usize = 100;
pub const DEFAULT_TOL: f64 = 1e-9;
pub const DEFAULT_SEED: u64 = 42;
pub const SAMPLE_BOX: (f64, f64) = (-2.0, 2.0);
/// Samples where some term has `|denominator|` below this are skipped.
pub const SINGULAR_DEN: f64 = 1e-8;

/// Salt mixed into the master seed when drawing test functions, so that the
/// functions and the sample points come from different streams.
const FUNCTION_SALT: u64 = 0xF00D_CAFE;

#[derive(Clone, Debug)]
pub struct Identity {
    pub tag: String,
    pub instances: usize,
    pub components: Vec<Vec<Expr>>,
}

impl Identity {
    pub fn new(tag: &str) -> Self {
        Identity { tag: tag.to_string(), instances: 0, components: Vec::new() }
    }

    /// Scalar identity `Σ terms = 0`.
    pub fn scalar(tag: &str, terms: Vec<Expr>) -> Self {
        let mut id = Identity::new(tag);
        id.push_scalar(terms);
        id
    }

    /// Two-sided form `lhs = rhs`.
    pub fn equation(tag: &str, lhs: &Expr, rhs: &Expr) -> Self {
        Identity::scalar(tag, vec![lhs.clone(), -rhs])
    }

    pub fn push_scalar(&mut self, terms: Vec<Expr>) {
        self.components.push(terms);
        self.instances += 1;
    }

    /// Component-wise `Σ fields = 0`. All fields must share chart and dirs.
    pub fn push_fields(&mut self, fields: &[VectorField]) {
        if let Some(first) = fields.first() {
            for f in fields {
                assert_eq!(f.dirs(), first.dirs(), "identity `{}` mixes charts", self.tag);
            }
            for k in 0..first.dim() {
                self.components.push(fields.iter().map(|f| f.component(k).clone()).collect());
            }
        }
        self.instances += 1;
    }

    pub fn absorb(&mut self, other: Identity) {
        self.instances += other.instances;
        self.components.extend(other.components);
    }

    /// Exact residual of each component.
    pub fn residuals(&self) -> Vec<Expr> {
        self.components
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| c.iter().skip(1).fold(c[0].clone(), |acc, t| &acc + t))
            .collect()
    }

    pub fn first_nonzero(&self) -> Option<Expr> {
        self.residuals().into_iter().find(|r| !r.is_zero())
    }

    pub fn is_exact_zero(&self) -> bool {
        self.first_nonzero().is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NumericCheck {
    pub max_residual: f64,
    pub samples: usize,
    pub skipped: usize,
    pub seed: u64,
    pub tol: f64,
}

impl NumericCheck {
    pub fn passed(&self) -> bool {
        self.samples > 0 && self.max_residual <= self.tol
    }
}

/// Evaluates the identity at `trials` uniform points of `[lo, hi]^N` over the
/// full registry and reports the largest component residual.
pub fn random_point_verify(
    id: &Identity,
    dim: usize,
    (lo, hi): (f64, f64),
    trials: usize,
    tol: f64,
    seed: u64,
) -> Result<NumericCheck> {
    if trials == 0 || !(tol > 0.0) {
        return Err(Error::InvalidArgument("trials must be at least 1 and tol positive".into()));
    }
    let compiled: Vec<Vec<CompiledExpr>> =
        id.components.iter().map(|c| c.iter().map(CompiledExpr::new).collect()).collect();
    let mut max = 0.0f64;
    let mut samples = 0;
    let mut skipped = 0;
    'trial: for t in 0..trials {
        let mut rng = trial_rng(seed, t as u64);
        let x = box_point(&mut rng, dim, lo, hi);
        let mut local = 0.0f64;
        for comp in &compiled {
            let mut sum = 0.0;
            for term in comp {
                let (n, d) = term.eval_parts(&x);
                if d.abs() < SINGULAR_DEN || !n.is_finite() || !d.is_finite() {
                    skipped += 1;
                    continue 'trial;
                }
                sum += n / d;
            }
            local = local.max(sum.abs());
        }
        samples += 1;
        max = max.max(local);
    }
    if samples == 0 {
        return Err(Error::AllSamplesSkipped(trials));
    }
    Ok(NumericCheck { max_residual: max, samples, skipped, seed, tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityRow {
    pub tag: String,
    pub instances: usize,
    pub exact_zero: bool,
    /// First nonzero exact residual, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub numeric: Option<NumericCheck>,
    pub passed: bool,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct VerificationReport {
    pub rows: Vec<IdentityRow>,
}

impl VerificationReport {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    pub fn failing_tags(&self) -> Vec<&str> {
        self.rows.iter().filter(|r| !r.passed).map(|r| r.tag.as_str()).collect()
    }

    pub fn row(&self, tag: &str) -> Option<&IdentityRow> {
        self.rows.iter().find(|r| r.tag == tag)
    }
}

/// Numeric settings; `None` runs the exact checks only.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NumericOptions {
    pub trials: usize,
    pub tol: f64,
    pub seed: u64,
}

impl Default for NumericOptions {
    fn default() -> Self {
        NumericOptions { trials: DEFAULT_TRIALS, tol: DEFAULT_TOL, seed: DEFAULT_SEED }
    }
}

pub fn check_identities(
    ids: &[Identity],
    dim: usize,
    numeric: Option<NumericOptions>,
) -> Result<VerificationReport> {
    let mut rows = Vec::with_capacity(ids.len());
    for id in ids {
        let witness = id.first_nonzero().map(|e| e.to_string());
        let exact_zero = witness.is_none();
        let numeric = match numeric {
            Some(o) if !id.components.is_empty() => {
                Some(random_point_verify(id, dim, SAMPLE_BOX, o.trials, o.tol, o.seed)?)
            }
            _ => None,
        };
        let passed = exact_zero && numeric.as_ref().is_none_or(NumericCheck::passed);
        rows.push(IdentityRow { tag: id.tag.clone(), instances: id.instances, exact_zero, witness, numeric, passed });
    }
    Ok(VerificationReport { rows })
}

/// Test functions fed to the identity suite.
#[derive(Clone, Debug, Default)]
pub struct SuiteInputs {
    /// `(g, h)` pairs of phase-space functions.
    pub pairs: Vec<(Expr, Expr)>,
    /// First-class functions with respect to the primaries.
    pub first_class: Vec<Expr>,
    /// Elements of the primary constraint ideal.
    pub ideal: Vec<Expr>,
    /// Noether generators (`K·G` constant).
    pub noether: Vec<Expr>,
}

impl SuiteInputs {
    /// Seeded inputs: two random pairs plus `(H, h)` for every user `h`.
    pub fn seeded(ctx: &EvolutionContext, seed: u64, user: &[Expr]) -> Result<Self> {
        let sys = ctx.system();
        let mut rng = trial_rng(seed ^ FUNCTION_SALT, 0);
        let mut pairs = vec![
            (ctx.hamiltonian().clone(), random_phase_function(sys, &mut rng, 4)),
            (random_phase_function(sys, &mut rng, 4), random_phase_function(sys, &mut rng, 4)),
        ];
        for h in user {
            pairs.push((ctx.hamiltonian().clone(), h.clone()));
        }
        let basis = first_class_basis(ctx)?;
        let mut first_class = Vec::new();
        if !basis.is_empty() {
            for _ in 0..2 {
                let picks: Vec<&Expr> = basis.choose_multiple(&mut rng, 3.min(basis.len())).collect();
                let g = picks
                    .into_iter()
                    .fold(sys.zero(), |acc, b| &acc + &(&Expr::int(sys.registry(), rng.gen_range(1..=3)) * b));
                first_class.push(g);
            }
        }
        let mut ideal = Vec::new();
        for k in 0..2 {
            if let Some(phi) = ctx.primaries().get(k % ctx.primaries().len().max(1)) {
                let a = &Expr::one(sys.registry()) + &random_linear(sys, &mut rng);
                ideal.push(&a * phi);
            }
        }
        Ok(SuiteInputs { pairs, first_class, ideal, noether: Vec::new() })
    }
}

fn phase_monomials(sys: &LagrangianSystem, max_degree: u32) -> Vec<Monomial> {
    let vars: Vec<usize> = sys.tstar_dirs();
    let n = sys.registry().len();
    let mut out = vec![Monomial::one(n)];
    let mut last = vec![Monomial::one(n)];
    for _ in 0..max_degree {
        let mut next = Vec::new();
        for m in &last {
            // Multiply only by variables at or after the largest one present,
            // so each monomial is generated once.
            let start = vars.iter().rposition(|&v| m.exp(v) > 0).unwrap_or(0);
            for &v in &vars[start..] {
                next.push(m.mul(&Monomial::var(n, v, 1)));
            }
        }
        out.extend(next.iter().cloned());
        last = next;
    }
    out
}

/// Sparse polynomial of degree ≤ 2 on phase space with small integer
/// coefficients.
pub fn random_phase_function(sys: &LagrangianSystem, rng: &mut ChaCha8Rng, terms: usize) -> Expr {
    let monos = phase_monomials(sys, 2);
    let mut p = Poly::zero(sys.registry().len());
    for m in monos.choose_multiple(rng, terms.min(monos.len())) {
        let c = loop {
            let c: i64 = rng.gen_range(-3..=3);
            if c != 0 {
                break c;
            }
        };
        p = &p + &Poly::monomial(m.clone(), Rational::from_integer(c.into()));
    }
    Expr::from_poly(sys.registry(), p)
}

fn random_linear(sys: &LagrangianSystem, rng: &mut ChaCha8Rng) -> Expr {
    let v = *sys.tstar_dirs().choose(rng).expect("nonempty phase space");
    &Expr::int(sys.registry(), rng.gen_range(1..=2)) * &sys.var(v)
}

/// Basis of the polynomials of degree ≤ 2 on phase space (without constant
/// term) with `FL*{g, φ_μ} ≡ 0` for every primary. Empty when some bracket
/// pulls back to a non-polynomial function.
pub fn first_class_basis(ctx: &EvolutionContext) -> Result<Vec<Expr>> {
    let sys = ctx.system();
    let reg = sys.registry();
    let monos: Vec<Monomial> = phase_monomials(sys, 2).into_iter().skip(1).collect();
    let mut rows: Vec<(usize, Monomial)> = Vec::new();
    let mut entries: Vec<Vec<Rational>> = Vec::new();
    for (mu, phi) in ctx.primaries().iter().enumerate() {
        for (k, m) in monos.iter().enumerate() {
            let e = Expr::from_poly(reg, Poly::monomial(m.clone(), Rational::from_integer(1.into())));
            let b = ctx.fl_bracket(&e, phi)?;
            if !b.is_polynomial() {
                return Ok(Vec::new());
            }
            for (bm, c) in b.numer().terms() {
                let key = (mu, bm.clone());
                let r = match rows.iter().position(|x| *x == key) {
                    Some(r) => r,
                    None => {
                        rows.push(key);
                        entries.push(vec![Rational::from_integer(0.into()); monos.len()]);
                        rows.len() - 1
                    }
                };
                entries[r][k] = c.clone();
            }
        }
    }
    Ok(rational_nullspace(entries, monos.len())
        .into_iter()
        .map(|v| {
            let p = v.iter().zip(&monos).fold(Poly::zero(reg.len()), |acc, (c, m)| {
                &acc + &Poly::monomial(m.clone(), c.clone())
            });
            Expr::from_poly(reg, p)
        })
        .collect())
}

/// Ordered tag → identity map; each tag appears once.
#[derive(Default)]
struct Collector {
    ids: Vec<Identity>,
}

impl Collector {
    fn slot(&mut self, tag: &str) -> &mut Identity {
        match self.ids.iter().position(|i| i.tag == tag) {
            Some(k) => &mut self.ids[k],
            None => {
                self.ids.push(Identity::new(tag));
                self.ids.last_mut().unwrap()
            }
        }
    }

    fn scalar(&mut self, tag: &str, terms: Vec<Expr>) {
        self.slot(tag).push_scalar(terms);
    }

    fn fields(&mut self, tag: &str, fields: &[VectorField]) {
        self.slot(tag).push_fields(fields);
    }

    fn declare(&mut self, tag: &str) {
        self.slot(tag);
    }
}

fn neg(f: &VectorField) -> VectorField {
    f.scale(&Expr::int(f.components()[0].registry(), -1))
}

/// Builds the full identity suite for a context.
pub fn identity_suite(ctx: &EvolutionContext, inputs: &SuiteInputs) -> Result<Vec<Identity>> {
    let sys = ctx.system();
    let reg = sys.registry();
    let n = sys.dim();
    let h_ham = ctx.hamiltonian();
    let phis = ctx.primaries();
    let v = ctx.v();
    let gammas = ctx.kernel_fields();
    let chi = ctx.chi()?;
    let fl = |e: &Expr| sys.pullback(e);
    let mut c = Collector::default();

    // Resolution of the identity.
    for i in 0..n {
        let mut terms = vec![sys.var(sys.dq()[i]), -&fl(&h_ham.diff(sys.p()[i]))?];
        for (g, vm) in ctx.gammas().iter().zip(v) {
            terms.push(-&(&g[i] * vm));
        }
        c.scalar("(lam)", terms);
    }
    c.declare("(lam-gam)");
    for (nu, g) in gammas.iter().enumerate() {
        for (mu, vm) in v.iter().enumerate() {
            let d = Expr::int(reg, if mu == nu { 1 } else { 0 });
            c.scalar("(lam-gam)", vec![g.apply(vm), -&d]);
        }
    }
    let mw = ctx.m_tensor().mul(sys.hessian());
    for i in 0..n {
        for j in 0..n {
            let mut terms = vec![mw.get(i, j).clone()];
            for (g, vm) in ctx.gammas().iter().zip(v) {
                terms.push(&g[i] * &vm.diff(sys.dq()[j]));
            }
            terms.push(Expr::int(reg, if i == j { -1 } else { 0 }));
            c.scalar("(IMW)", terms);
        }
    }
    c.declare("(K-ELform)");
    for (phi, x) in phis.iter().zip(&chi) {
        c.scalar("(K-ELform)", vec![x.clone(), -&ctx.el_contraction(&sys.gamma_vector(phi)?)]);
    }

    // K.
    c.declare("(Gamma-K)");
    for (g, h) in &inputs.pairs {
        let kh = ctx.k(h)?;
        let mut terms = vec![kh.clone(), -&ctx.fl_bracket(h, h_ham)?];
        for (phi, vm) in phis.iter().zip(v) {
            terms.push(-&(&ctx.fl_bracket(h, phi)? * vm));
        }
        c.scalar("(K-H')", terms);
        for (gm, phi) in gammas.iter().zip(phis) {
            c.scalar("(Gamma-K)", vec![gm.apply(&kh), -&ctx.fl_bracket(h, phi)?]);
        }
        c.scalar(
            "(K-EL)",
            vec![kh.clone(), -&sys.total_time_derivative(&fl(h)?), -&ctx.el_contraction(&sys.gamma_vector(h)?)],
        );
        let kg = ctx.k(g)?;
        c.scalar("(K-deriv)", vec![ctx.k(&(g * h))?, -&(&fl(g)? * &kh), -&(&fl(h)? * &kg)]);
    }

    // Y, R, Δ for generic pairs.
    for (g, h) in &inputs.pairs {
        let (fg, fh) = (fl(g)?, fl(h)?);
        let (kg, kh) = (ctx.k(g)?, ctx.k(h)?);
        let (gam_g, gam_h) = (sys.gamma_field(g)?, sys.gamma_field(h)?);
        let (yg, yh) = (ctx.y_field(g)?, ctx.y_field(h)?);
        let (rg, rh) = (ctx.r_field(g)?, ctx.r_field(h)?);
        let (dg, dh) = (ctx.delta_field(g)?, ctx.delta_field(h)?);
        let br_g: Vec<Expr> = phis.iter().map(|p| ctx.fl_bracket(g, p)).collect::<Result<_>>()?;
        let br_h: Vec<Expr> = phis.iter().map(|p| ctx.fl_bracket(h, p)).collect::<Result<_>>()?;
        let zg = sys.hamiltonian_field_along(g)?;

        c.scalar("(Wsim)", vec![gam_h.apply(&fg), -&gam_g.apply(&fh)]);
        c.scalar("(Y-Leg)", vec![yg.apply(&fh), -&ctx.fl_bracket(h, g)?, -&gam_h.apply(&kg)]);
        c.scalar("(Y-K)", vec![yg.apply(&kh), -&ctx.k(&sys.bracket(h, g))?, -&yh.apply(&kg)]);
        c.fields("(Leg-Y)", &[sys.push_forward(&yg), neg(&zg), neg(&sys.upsilon_field(&kg)?)]);
        c.fields("(J-Y)", &[sys.vertical_endomorphism(&yh), neg(&gam_h)]);

        let mut terms = vec![rg.apply(&fh), -&gam_h.apply(&kg)];
        for (b, vm) in br_g.iter().zip(v) {
            terms.push(b * &gam_h.apply(vm));
        }
        c.scalar("(R-Leg)", terms);

        let newop = |r: &VectorField, k: &Expr, br: &[Expr], y: &VectorField| -> Vec<Expr> {
            let mut t = vec![r.apply(k)];
            for (b, vm) in br.iter().zip(v) {
                t.push(b * &y.apply(vm));
            }
            t
        };
        let mut terms = newop(&rh, &kg, &br_h, &yg);
        terms.extend(newop(&rg, &kh, &br_g, &yh).into_iter().map(|t| -&t));
        c.scalar("(newop)", terms);

        let mut terms = Vec::new();
        for ((bh, bg), vm) in br_h.iter().zip(&br_g).zip(v) {
            terms.push(bh * &dg.apply(vm));
            terms.push(-&(bg * &dh.apply(vm)));
        }
        c.scalar("(Delta-lam-previ)", terms);

        c.fields("(J-Delta)", &[sys.vertical_endomorphism(&dg), neg(&gam_g)]);
        c.declare("(Delta-lam)");
        for vm in v {
            let mut terms = vec![dg.apply(vm)];
            for (b, vn) in br_g.iter().zip(v) {
                terms.push(b * &ctx.m_form(vm, vn));
            }
            c.scalar("(Delta-lam)", terms);
        }
        let mut terms = vec![dg.apply(&fh), -&ctx.fl_bracket(h, g)?];
        for (b, vm) in br_g.iter().zip(v) {
            terms.push(-&(b * &gam_h.apply(vm)));
        }
        c.scalar("(Delta-Leg)", terms);
        let mut fs = vec![sys.push_forward(&dg), neg(&zg)];
        for (b, vm) in br_g.iter().zip(v) {
            fs.push(neg(&sys.upsilon_field(vm)?.scale(b)));
        }
        c.fields("(Leg-Delta)", &fs);

        // Leibniz rules on the product gh.
        let gh = g * h;
        c.fields(
            "(prod-Gam)",
            &[sys.gamma_field(&gh)?, neg(&gam_h.scale(&fg)), neg(&gam_g.scale(&fh))],
        );
        c.fields(
            "(prod-Ups)",
            &[
                sys.upsilon_field(&(&kg * &kh))?,
                neg(&sys.upsilon_field(&kh)?.scale(&kg)),
                neg(&sys.upsilon_field(&kg)?.scale(&kh)),
            ],
        );
        let extra = [neg(&gam_h.scale(&kg)), neg(&gam_g.scale(&kh))];
        let mut fs = vec![ctx.y_field(&gh)?, neg(&yh.scale(&fg)), neg(&yg.scale(&fh))];
        fs.extend(extra.iter().cloned());
        c.fields("(prod-Y)", &fs);
        let mut fs = vec![ctx.r_field(&gh)?, neg(&rh.scale(&fg)), neg(&rg.scale(&fh))];
        fs.extend(extra.iter().cloned());
        c.fields("(prod-R)", &fs);
        c.fields("(prod-Delta)", &[ctx.delta_field(&gh)?, neg(&dh.scale(&fg)), neg(&dg.scale(&fh))]);
    }

    // First-class functions.
    for (i, g) in inputs.first_class.iter().enumerate() {
        let dg = ctx.delta_field(g)?;
        for vm in v {
            c.scalar("(Delta-lam')", vec![dg.apply(vm)]);
        }
        let h = &inputs.pairs[i % inputs.pairs.len()].1;
        c.scalar("(Delta-Leg')", vec![dg.apply(&fl(h)?), -&ctx.fl_bracket(h, g)?]);
        c.fields("(Leg-Delta')", &[sys.push_forward(&dg), neg(&sys.hamiltonian_field_along(g)?)]);
    }

    // Commutators.
    c.declare("(com-Gam-Gam)");
    for a in &inputs.ideal {
        for b in &inputs.ideal {
            let (ga, gb) = (sys.gamma_field(a)?, sys.gamma_field(b)?);
            c.fields("(com-Gam-Gam)", &[ga.lie_bracket(&gb)]);
        }
    }
    c.declare("(com-Del-mu)");
    c.declare("(com-Del-Del)");
    c.declare("(com-Del-Gam)");
    c.declare("(com-Del-Gam')");
    for (i, g) in inputs.first_class.iter().enumerate() {
        let dg = ctx.delta_field(g)?;
        for gm in &gammas {
            c.fields("(com-Del-mu)", &[dg.lie_bracket(gm)]);
        }
        for g2 in &inputs.first_class[i + 1..] {
            let d2 = ctx.delta_field(g2)?;
            c.fields("(com-Del-Del)", &[dg.lie_bracket(&d2), ctx.delta_field(&sys.bracket(g, g2))?]);
        }
        let rg = ctx.r_field(g)?;
        let gam_gh = sys.gamma_field(&sys.bracket(g, h_ham))?;
        for phi in &inputs.ideal {
            let gphi = sys.gamma_field(phi)?;
            let lhs = dg.lie_bracket(&gphi);
            let gam_gphi = sys.gamma_field(&sys.bracket(g, phi))?;
            c.fields("(com-Del-Gam)", &[lhs.clone(), gam_gphi.clone(), rg.sub(&gam_gh).lie_bracket(&gphi)]);
            let mut fs = vec![lhs, gam_gphi];
            for (p, vm) in phis.iter().zip(v) {
                fs.push(neg(&sys.gamma_field(&sys.bracket(g, p))?.scale(&gphi.apply(vm))));
            }
            c.fields("(com-Del-Gam')", &fs);
        }
    }

    // Primary dynamics.
    let xl = ctx.x_l_primary()?;
    let mut fs = vec![sys.push_forward(&xl), neg(&ctx.k_along())];
    for (x, vm) in chi.iter().zip(v) {
        fs.push(sys.upsilon_field(vm)?.scale(x));
    }
    c.fields("(K-XL)", &fs);
    c.fields("(J-XL)", &[sys.vertical_endomorphism(&xl), neg(&sys.liouville())]);
    let mut fs = vec![xl.clone(), neg(&ctx.y_field(h_ham)?)];
    for (phi, vm) in phis.iter().zip(v) {
        fs.push(neg(&ctx.y_field(phi)?.scale(vm)));
    }
    c.fields("(XL-Y)", &fs);
    let mut fs = vec![ctx.r_field(h_ham)?];
    for (phi, vm) in phis.iter().zip(v) {
        fs.push(ctx.r_field(phi)?.scale(vm));
    }
    c.fields("(RH-vR)", &fs);
    c.declare("(XL-lam)");
    for vn in v {
        let mut terms = vec![xl.apply(vn)];
        for (x, vm) in chi.iter().zip(v) {
            terms.push(-&(x * &ctx.m_form(vn, vm)));
        }
        c.scalar("(XL-lam)", terms);
    }
    for (_, h) in &inputs.pairs {
        let gam_h = sys.gamma_field(h)?;
        let mut terms = vec![xl.apply(&fl(h)?), -&ctx.k(h)?];
        for (x, vm) in chi.iter().zip(v) {
            terms.push(x * &gam_h.apply(vm));
        }
        c.scalar("(XL-Leg)", terms);

        let rh = ctx.r_field(h)?;
        let br_h: Vec<Expr> = phis.iter().map(|p| ctx.fl_bracket(h, p)).collect::<Result<_>>()?;
        let mut terms = vec![xl.apply(&ctx.k(h)?), -&ctx.k(&sys.bracket(h, h_ham))?];
        for (p, vm) in phis.iter().zip(v) {
            terms.push(-&(vm * &ctx.k(&sys.bracket(h, p))?));
        }
        for (x, vn) in chi.iter().zip(v) {
            terms.push(x * &rh.apply(vn));
            for (b, vm) in br_h.iter().zip(v) {
                terms.push(-&(&(x * b) * &ctx.m_form(vm, vn)));
            }
        }
        c.scalar("(XL-K)", terms);
    }

    // Symmetry generators.
    for g in &inputs.noether {
        let yg = ctx.y_field(g)?;
        for (_, h) in &inputs.pairs {
            c.scalar("(goodcomm)", vec![yg.apply(&ctx.k(h)?), -&ctx.k(&sys.bracket(h, g))?]);
        }
    }

    // Regular case.
    if sys.is_regular() {
        let inv = ctx.omega_inverse()?;
        for (_, h) in &inputs.pairs {
            let x_h = ctx.omega_hamiltonian_field(&inv, &fl(h)?);
            let x_hh = ctx.omega_hamiltonian_field(&inv, &ctx.fl_bracket(h, h_ham)?);
            let j_hh = sys.vertical_endomorphism(&x_hh);
            c.fields("(Gam-reg)", &[sys.gamma_field(h)?, neg(&sys.vertical_endomorphism(&x_h))]);
            c.fields("(R-reg)", &[ctx.r_field(h)?, neg(&j_hh)]);
            c.fields("(Delta-reg)", &[ctx.delta_field(h)?, neg(&x_h)]);
            let yh = ctx.y_field(h)?;
            c.fields("(Y-reg)", &[yh.clone(), neg(&x_h), neg(&j_hh)]);
            c.fields("(newtonoid)", &[sys.vertical_endomorphism(&yh.lie_bracket(&xl))]);
        }
    }
    Ok(c.ids)
}

/// Kernel checks as identities: every member annihilates ω_L.
pub fn kernel_identity(sys: &LagrangianSystem, kernel: &KernelBasis) -> Identity {
    let omega = sys.presymplectic_matrix();
    let mut id = Identity::new("(ker-omega)");
    for f in kernel.members() {
        for e in omega.mul_vec(f.components()) {
            id.components.push(vec![e]);
        }
        id.instances += 1;
    }
    id
}
