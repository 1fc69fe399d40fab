//! Kernel of the presymplectic form ω_L: one Γ_μ per primary plus one
//! Δ_μ per first-class primary, with the structure functions of their
//! algebra.

use std::sync::Arc;

use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints};
use singlag::evolution::EvolutionContext;
use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    // Particle in a rotating frame, held on the unit circle by b.
    let sys = Arc::new(LagrangianSystem::new(
        "gauge",
        &["x", "y", "a", "b"],
        None,
        "(dx - a*y)^2/2 + (dy + a*x)^2/2 - b*(x^2 + y^2 - 1)",
    )?);
    let cs = classify_first_class(&sys, &primary_constraints(&sys)?)?;
    let ctx = EvolutionContext::new(sys.clone(), hamiltonian(&sys, None)?, &cs)?;
    let kb = ctx.kernel_omega_l()?;
    let reg = sys.registry();

    println!("{} primaries, {} first class", ctx.primaries().len(), ctx.first_class_primaries().len());
    println!("dim Ker omega_L = {} (from the rank), basis size {}", kb.kernel_dim, kb.len());
    for m in kb.members() {
        println!("  {}", m.describe(reg));
    }
    let omega = sys.presymplectic_matrix();
    assert!(kb.members().all(|m| omega.mul_vec(m.components()).iter().all(|e| e.is_zero())));
    for s in &kb.structure {
        let b = s.coefficients.as_ref().map(|c| c.iter().map(|e| e.to_string()).collect::<Vec<_>>());
        println!("  {{phi_{}, phi_{}}}: B = {b:?}, closes: {}", s.b, s.a, s.closes_modulo_gamma);
    }
    Ok(())
}
