//! The time-evolution operator K, the functions v^μ and the Lagrangian
//! constraints χ_μ = K·φ_μ.

use std::sync::Arc;

use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints};
use singlag::evolution::EvolutionContext;
use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    let sys = Arc::new(LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(dx^2 - lambda*x^2)/2")?);
    let cs = classify_first_class(&sys, &primary_constraints(&sys)?)?;
    let h = hamiltonian(&sys, None)?;
    let ctx = EvolutionContext::new(sys.clone(), h.clone(), &cs)?;

    println!("v = {:?}", ctx.v().iter().map(|e| e.to_string()).collect::<Vec<_>>());
    println!("chi = {:?}", ctx.chi()?.iter().map(|e| e.to_string()).collect::<Vec<_>>());
    for text in ["x", "p", "p*x", "pi"] {
        let f = sys.parse(text)?;
        println!("K.({text}) = {}", ctx.k(&f)?);
    }

    // (K-H'): K·h = FL*{h, H} + v^μ FL*{h, φ_μ}.
    let f = sys.parse("p^2*x + lambda")?;
    let mut rhs = ctx.fl_bracket(&f, &h)?;
    for (v, phi) in ctx.v().iter().zip(ctx.primaries()) {
        rhs = &rhs + &(v * &ctx.fl_bracket(&f, phi)?);
    }
    assert_eq!(ctx.k(&f)?, rhs);
    println!("(K-H') holds for h = {f}");
    Ok(())
}
