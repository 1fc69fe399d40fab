//! Classifies candidate generators as Noether symmetries (K·G constant),
//! dynamical symmetries (K·G strongly constant on the final constraint
//! surface) or neither.

use std::sync::Arc;

use singlag::canonical::working_vf;
use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints, stabilize};
use singlag::evolution::EvolutionContext;
use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    let sys = Arc::new(LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(dx^2 - lambda*x^2)/2")?);
    let cs = classify_first_class(&sys, &primary_constraints(&sys)?)?;
    let h = hamiltonian(&sys, None)?;
    let ctx = EvolutionContext::new(sys.clone(), h.clone(), &cs)?;

    let st = stabilize(&sys, &cs, &h);
    let mut chis = ctx.chi()?;
    for chain in &st.chains {
        chis.extend(ctx.chain_chi(chain)?);
    }
    let vf = working_vf(&sys, &st.chains, &chis)?;
    println!("V_f: {:?}", vf.iter().map(|e| e.to_string()).collect::<Vec<_>>());

    for g in [h.clone(), sys.parse("x^2")?, sys.parse("3")?, sys.parse("x")?] {
        let r = ctx.symmetry_test(&g, &vf)?;
        println!("G = {g}: K.G = {}, {:?}, c = {}", r.k_g, r.kind, r.c);
    }
    Ok(())
}
