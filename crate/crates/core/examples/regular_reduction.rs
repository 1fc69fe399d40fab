//! For a regular Lagrangian Δ_h is the ω_L-Hamiltonian field of FL*h and
//! Y_h adds the vertical lift of the field of FL*{h, H}.

use std::sync::Arc;

use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints};
use singlag::evolution::EvolutionContext;
use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    let sys = Arc::new(LagrangianSystem::new(
        "regular2",
        &["x", "y"],
        None,
        "(1 + x^2)*dx^2/2 + dy^2/2 + x*dy - (x^2 + y^2)/2",
    )?);
    let cs = classify_first_class(&sys, &primary_constraints(&sys)?)?;
    let ctx = EvolutionContext::new(sys.clone(), hamiltonian(&sys, None)?, &cs)?;
    let inv = ctx.omega_inverse()?;
    let xl = ctx.x_l_primary()?;
    let reg = sys.registry();

    for text in ["p_x", "x*p_y", "p_x*p_y - y^2"] {
        let h = sys.parse(text)?;
        let x_h = ctx.omega_hamiltonian_field(&inv, &sys.pullback(&h)?);
        let x_hh = ctx.omega_hamiltonian_field(&inv, &ctx.fl_bracket(&h, ctx.hamiltonian())?);
        let y = ctx.y_field(&h)?;
        println!("h = {text}");
        println!("  X_FL*h = {}", x_h.describe(reg));
        println!("  Delta_h = X_FL*h: {}", ctx.delta_field(&h)? == x_h);
        println!("  Y_h = X_FL*h + J X_FL*{{h,H}}: {}", y == x_h.add(&sys.vertical_endomorphism(&x_hh)));
        println!("  newtonoid J[Y_h, X^L_o] = 0: {}", sys.vertical_endomorphism(&y.lie_bracket(&xl)).is_zero());
    }
    Ok(())
}
