//! Classical RK4 integration of the primary dynamical fields on TQ and T*Q,
//! and the related-solutions checks between the two sides.

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::evolution::EvolutionContext;
use crate::fields::{Chart, VectorField};
use crate::symbolic::compiled::CompiledExpr;
use crate::symbolic::Expr;

/// Tolerance for the initial state to count as on a constraint surface.
pub const SURFACE_TOL: f64 = 1e-9;
/// State norm treated as numeric blow-up.
pub const BLOW_UP: f64 = 1e12;

#[derive(Clone, Debug, Serialize)]
pub struct Trajectory {
    pub chart: Chart,
    /// Registry names of the state variables, in state order.
    pub names: Vec<String>,
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    /// Largest constraint value at each grid point.
    pub drift: Vec<f64>,
    pub dt: f64,
    pub integrator: &'static str,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn max_drift(&self) -> f64 {
        self.drift.iter().cloned().fold(0.0, f64::max)
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectory has the initial state")
    }

    /// CSV with header `t,<names>`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,{}", self.names.join(","))?;
        for (t, s) in self.times.iter().zip(&self.states) {
            let row: Vec<String> = s.iter().map(|v| v.to_string()).collect();
            writeln!(w, "{t},{}", row.join(","))?;
        }
        Ok(())
    }
}

/// Uniform grid from `t0` to `t1`; `t1 − t0` must be a whole number of steps.
pub fn time_grid(t0: f64, t1: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0) || !(t1 >= t0) || !t0.is_finite() || !t1.is_finite() {
        return Err(Error::InvalidArgument(format!("bad time span [{t0}, {t1}] with dt {dt}")));
    }
    let steps = ((t1 - t0) / dt).round();
    if ((t1 - t0) - steps * dt).abs() > 1e-9 * dt.max(1.0) {
        return Err(Error::InvalidArgument(format!("span {} is not a multiple of dt {dt}", t1 - t0)));
    }
    Ok((0..=steps as usize).map(|k| t0 + k as f64 * dt).collect())
}

struct Flow {
    slots: Vec<usize>,
    comps: Vec<CompiledExpr>,
    constraints: Vec<CompiledExpr>,
    width: usize,
}

impl Flow {
    fn new(field: &VectorField, constraints: &[Expr], width: usize) -> Self {
        Flow {
            slots: field.dirs().to_vec(),
            comps: field.components().iter().map(CompiledExpr::new).collect(),
            constraints: constraints.iter().map(CompiledExpr::new).collect(),
            width,
        }
    }

    fn embed(&self, s: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.width];
        for (&k, v) in self.slots.iter().zip(s) {
            x[k] = *v;
        }
        x
    }

    fn rate(&self, s: &[f64]) -> Vec<f64> {
        let x = self.embed(s);
        self.comps.iter().map(|c| c.eval(&x)).collect()
    }

    fn violation(&self, s: &[f64]) -> f64 {
        let x = self.embed(s);
        self.constraints.iter().map(|c| c.eval(&x).abs()).fold(0.0, f64::max)
    }

    fn rk4_step(&self, s: &[f64], dt: f64) -> Vec<f64> {
        let add = |a: &[f64], b: &[f64], h: f64| -> Vec<f64> { a.iter().zip(b).map(|(x, y)| x + h * y).collect() };
        let k1 = self.rate(s);
        let k2 = self.rate(&add(s, &k1, dt / 2.0));
        let k3 = self.rate(&add(s, &k2, dt / 2.0));
        let k4 = self.rate(&add(s, &k3, dt));
        (0..s.len()).map(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])).collect()
    }

    fn run(&self, chart: Chart, names: Vec<String>, initial: &[f64], grid: Vec<f64>, dt: f64) -> Result<Trajectory> {
        let mut states = vec![initial.to_vec()];
        let mut drift = vec![self.violation(initial)];
        for &t in &grid[1..] {
            let next = self.rk4_step(states.last().unwrap(), dt);
            let norm = next.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !norm.is_finite() || norm > BLOW_UP {
                return Err(Error::BlowUp { t });
            }
            drift.push(self.violation(&next));
            states.push(next);
        }
        Ok(Trajectory { chart, names, times: grid, states, drift, dt, integrator: "rk4" })
    }
}

fn check_surface(ctx: &EvolutionContext, constraints: &[Expr], slots: &[usize], initial: &[f64]) -> Result<()> {
    let width = ctx.system().registry().len();
    let mut x = vec![0.0; width];
    for (&k, v) in slots.iter().zip(initial) {
        x[k] = *v;
    }
    let bad: Vec<String> = constraints
        .iter()
        .filter_map(|c| {
            let v = CompiledExpr::new(c).eval(&x);
            (!(v.abs() < SURFACE_TOL)).then(|| format!("{c} = {v}"))
        })
        .collect();
    if bad.is_empty() {
        Ok(())
    } else {
        Err(Error::OffSurface(bad))
    }
}

fn names(ctx: &EvolutionContext, slots: &[usize]) -> Vec<String> {
    let reg = ctx.system().registry();
    slots.iter().map(|&k| reg.name(k).to_string()).collect()
}

/// RK4 flow of `X^L_o + ε^μ Γ_μ` from a point of V₁ (all `|χ_μ|` below
/// [`SURFACE_TOL`]). The state is `(q, dq)`; drift records `max |χ_μ|`.
pub fn integrate_lagrangian(
    ctx: &EvolutionContext,
    initial: &[f64],
    eps: &[Expr],
    (t0, t1): (f64, f64),
    dt: f64,
) -> Result<Trajectory> {
    let sys = ctx.system();
    let slots = sys.tq_dirs();
    if initial.len() != slots.len() {
        return Err(Error::InvalidArgument(format!("expected {} initial values", slots.len())));
    }
    let chi = ctx.chi()?;
    check_surface(ctx, &chi, &slots, initial)?;
    let grid = time_grid(t0, t1, dt)?;
    let field = ctx.lagrangian_field(eps)?;
    Flow::new(&field, &chi, sys.registry().len()).run(Chart::TQ, names(ctx, &slots), initial, grid, dt)
}

/// RK4 flow of `Z_H + λ^μ Z_μ` from a point of P_o. The state is `(q, p)`;
/// drift records `max |φ_μ|`.
pub fn integrate_hamiltonian(
    ctx: &EvolutionContext,
    initial: &[f64],
    lambda: &[Expr],
    (t0, t1): (f64, f64),
    dt: f64,
) -> Result<Trajectory> {
    let sys = ctx.system();
    let slots = sys.tstar_dirs();
    if initial.len() != slots.len() {
        return Err(Error::InvalidArgument(format!("expected {} initial values", slots.len())));
    }
    check_surface(ctx, ctx.primaries(), &slots, initial)?;
    let grid = time_grid(t0, t1, dt)?;
    let field = ctx.hamiltonian_field(lambda)?;
    Flow::new(&field, ctx.primaries(), sys.registry().len()).run(
        Chart::TStarQ,
        names(ctx, &slots),
        initial,
        grid,
        dt,
    )
}

/// `FL(q, dq)`.
pub fn legendre_point(ctx: &EvolutionContext, tq: &[f64]) -> Vec<f64> {
    let sys = ctx.system();
    let mut x = vec![0.0; sys.registry().len()];
    for (&k, v) in sys.tq_dirs().iter().zip(tq) {
        x[k] = *v;
    }
    let n = sys.dim();
    let mut out = tq[..n].to_vec();
    out.extend(sys.momenta().iter().map(|m| CompiledExpr::new(m).eval(&x)));
    out
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationRow {
    pub tag: String,
    pub max_residual: f64,
    pub samples: usize,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct RelationReport {
    pub rows: Vec<RelationRow>,
}

impl RelationReport {
    pub fn get(&self, tag: &str) -> Option<f64> {
        self.rows.iter().find(|r| r.tag == tag).map(|r| r.max_residual)
    }
}

/// Compares a Lagrangian path ξ with a Hamiltonian path η on the same grid:
/// `η ≈ FL∘ξ`, and, when the multipliers are given, `λ^μ(η) ≈ v^μ(ξ)`
/// (arb-ham) and `ε^μ(ξ) ≈ (K·λ^μ)(ξ)` (arb-lag).
pub fn relate_solutions(
    ctx: &EvolutionContext,
    xi: &Trajectory,
    eta: &Trajectory,
    lambda: Option<&[Expr]>,
    eps: Option<&[Expr]>,
) -> Result<RelationReport> {
    if xi.chart != Chart::TQ || eta.chart != Chart::TStarQ {
        return Err(Error::GridMismatch("expected a TQ path and a T*Q path".into()));
    }
    if xi.len() != eta.len() || xi.times.iter().zip(&eta.times).any(|(a, b)| (a - b).abs() > 1e-12) {
        return Err(Error::GridMismatch(format!("{} vs {} grid points", xi.len(), eta.len())));
    }
    let sys = ctx.system();
    let width = sys.registry().len();
    let embed = |slots: &[usize], s: &[f64]| {
        let mut x = vec![0.0; width];
        for (&k, v) in slots.iter().zip(s) {
            x[k] = *v;
        }
        x
    };
    let (tq, ts) = (sys.tq_dirs(), sys.tstar_dirs());
    let mut leg = 0.0f64;
    for (a, b) in xi.states.iter().zip(&eta.states) {
        let fl = legendre_point(ctx, a);
        leg = leg.max(fl.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
    }
    let mut rows = vec![RelationRow { tag: "(FL-xi-eta)".into(), max_residual: leg, samples: xi.len() }];
    if let Some(lambda) = lambda {
        let lam: Vec<CompiledExpr> = lambda.iter().map(CompiledExpr::new).collect();
        let v: Vec<CompiledExpr> = ctx.v().iter().map(CompiledExpr::new).collect();
        let mut r = 0.0f64;
        for (a, b) in xi.states.iter().zip(&eta.states) {
            let (xa, xb) = (embed(&tq, a), embed(&ts, b));
            for (l, vm) in lam.iter().zip(&v) {
                r = r.max((l.eval(&xb) - vm.eval(&xa)).abs());
            }
        }
        rows.push(RelationRow { tag: "(arb-ham)".into(), max_residual: r, samples: xi.len() });
        if let Some(eps) = eps {
            let kl: Vec<CompiledExpr> =
                lambda.iter().map(|l| ctx.k(l).map(|e| CompiledExpr::new(&e))).collect::<Result<_>>()?;
            let ep: Vec<CompiledExpr> = eps.iter().map(CompiledExpr::new).collect();
            let mut r = 0.0f64;
            for a in &xi.states {
                let xa = embed(&tq, a);
                for (e, k) in ep.iter().zip(&kl) {
                    r = r.max((e.eval(&xa) - k.eval(&xa)).abs());
                }
            }
            rows.push(RelationRow { tag: "(arb-lag)".into(), max_residual: r, samples: xi.len() });
        }
    }
    Ok(RelationReport { rows })
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::constraints::{classify_first_class, hamiltonian, primary_constraints};
    use crate::legendre::LagrangianSystem;

    fn ctx(coords: &[&str], momenta: Option<&[&str]>, l: &str) -> EvolutionContext {
        let sys = Arc::new(LagrangianSystem::new("t", coords, momenta, l).unwrap());
        let cs = classify_first_class(&sys, &primary_constraints(&sys).unwrap()).unwrap();
        let h = hamiltonian(&sys, None).unwrap();
        EvolutionContext::new(sys, h, &cs).unwrap()
    }

    fn conformal() -> EvolutionContext {
        ctx(&["x", "lambda"], Some(&["p", "pi"]), "(1/2)*(dx^2 - lambda*x^2)")
    }

    #[test]
    fn free_particle_is_linear() {
        let c = ctx(&["q"], None, "dq^2/2");
        let tr = integrate_lagrangian(&c, &[0.0, 1.0], &[], (0.0, 1.0), 1e-3).unwrap();
        for (t, s) in tr.times.iter().zip(&tr.states) {
            assert!((s[0] - t).abs() < 1e-10);
        }
    }

    #[test]
    fn conformal_fixed_point() {
        let c = conformal();
        let s = c.system();
        let zero = [s.zero()];
        let xi = integrate_lagrangian(&c, &[0.0, 1.0, 0.0, 0.0], &zero, (0.0, 1.0), 0.1).unwrap();
        assert!(xi.states.iter().all(|st| st == &[0.0, 1.0, 0.0, 0.0]));
        assert_eq!(xi.max_drift(), 0.0);
        let eta = integrate_hamiltonian(&c, &[0.0, 1.0, 0.0, 0.0], &zero, (0.0, 1.0), 0.1).unwrap();
        let rel = relate_solutions(&c, &xi, &eta, Some(&zero), Some(&zero)).unwrap();
        assert!(rel.rows.iter().all(|r| r.max_residual == 0.0));
    }

    #[test]
    fn unit_eps_accelerates_lambda() {
        let c = conformal();
        let one = [Expr::one(c.system().registry())];
        let xi = integrate_lagrangian(&c, &[0.0, 1.0, 0.0, 0.0], &one, (0.0, 1.0), 0.1).unwrap();
        for (t, s) in xi.times.iter().zip(&xi.states) {
            assert!((s[3] - t).abs() < 1e-12);
        }
    }

    #[test]
    fn off_surface_is_rejected() {
        let c = conformal();
        let zero = [c.system().zero()];
        let err = integrate_lagrangian(&c, &[1.0, 0.0, 0.0, 0.0], &zero, (0.0, 1.0), 0.1).unwrap_err();
        assert!(matches!(err, Error::OffSurface(_)));
    }

    #[test]
    fn csv_header() {
        let c = conformal();
        let zero = [c.system().zero()];
        let tr = integrate_lagrangian(&c, &[0.0, 1.0, 0.0, 0.0], &zero, (0.0, 0.2), 0.1).unwrap();
        let mut out = Vec::new();
        tr.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text.lines().next(), Some("t,x,lambda,dx,dlambda"));
        assert_eq!(text.lines().count(), 4);
    }
}
