//! Integrates the Lagrangian and Hamiltonian sides with RK4, compares them,
//! and shows fourth-order convergence of the multiplier relation.

use std::io::stdout;
use std::sync::Arc;

use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints};
use singlag::dynamics::{integrate_hamiltonian, integrate_lagrangian, legendre_point, relate_solutions};
use singlag::evolution::EvolutionContext;
use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    let sys = Arc::new(LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(dx^2 - lambda*x^2)/2")?);
    let cs = classify_first_class(&sys, &primary_constraints(&sys)?)?;
    let ctx = EvolutionContext::new(sys.clone(), hamiltonian(&sys, None)?, &cs)?;

    // Multiplier λ(q, p) = lambda² on the Hamiltonian side; ε = K·λ on the
    // Lagrangian side.
    let lambda = [sys.parse("lambda^2")?];
    let eps = [ctx.k(&lambda[0])?];
    let xi0 = [0.0, 0.5, 0.0, 0.25];
    let eta0 = legendre_point(&ctx, &xi0);

    let mut last = None;
    for dt in [0.1, 0.05, 0.025, 0.0125] {
        let xi = integrate_lagrangian(&ctx, &xi0, &eps, (0.0, 1.0), dt)?;
        let eta = integrate_hamiltonian(&ctx, &eta0, &lambda, (0.0, 1.0), dt)?;
        let rel = relate_solutions(&ctx, &xi, &eta, Some(&lambda), Some(&eps))?;
        let r = rel.get("(arb-ham)").unwrap_or(f64::NAN);
        match last {
            Some(prev) => println!("dt = {dt:<7} (arb-ham) = {r:.3e}  ratio {:.2}", prev / r),
            None => println!("dt = {dt:<7} (arb-ham) = {r:.3e}"),
        }
        last = Some(r);
        if dt == 0.1 {
            xi.write_csv(stdout())?;
        }
    }
    Ok(())
}
