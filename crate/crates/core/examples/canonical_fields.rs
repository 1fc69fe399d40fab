//! The velocity-space fields Y_h, R_h and Δ_h = Y_h − R_h, and the
//! projectability test for Δ_h.

use std::sync::Arc;

use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints};
use singlag::evolution::EvolutionContext;
use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    let sys = Arc::new(LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(dx^2 - lambda*x^2)/2")?);
    let cs = classify_first_class(&sys, &primary_constraints(&sys)?)?;
    let ctx = EvolutionContext::new(sys.clone(), hamiltonian(&sys, None)?, &cs)?;
    let reg = sys.registry();

    for h in [sys.parse("pi")?, ctx.hamiltonian().clone(), sys.parse("x*p")?] {
        println!("h = {h}");
        println!("  Y     = {}", ctx.y_field(&h)?.describe(reg));
        println!("  R     = {}", ctx.r_field(&h)?.describe(reg));
        println!("  Delta = {}", ctx.delta_field(&h)?.describe(reg));
        let pr = ctx.projectability_test(&h, &[])?;
        println!("  first class: {}, T(FL)Delta = Z o FL: {:?}", pr.strict, pr.leg_delta_prime);
    }
    println!("X^L_o = {}", ctx.x_l_primary()?.describe(reg));
    Ok(())
}
