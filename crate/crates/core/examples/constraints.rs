//! Primary constraints, the first/second-class split and stabilization
//! chains for two systems.

use singlag::constraints::{classify_first_class, hamiltonian, primary_constraints, stabilize};
use singlag::LagrangianSystem;

fn run(sys: &LagrangianSystem) -> singlag::Result<()> {
    let cs = classify_first_class(sys, &primary_constraints(sys)?)?;
    let h = hamiltonian(sys, None)?;
    println!("{}: H = {h}", sys.name());
    for c in cs.items() {
        println!("  primary {}  ({:?} class)", c.expr, c.class);
    }
    let st = stabilize(sys, &cs, &h);
    for (i, chain) in st.chains.iter().enumerate() {
        let shown: Vec<String> = chain.iter().map(|e| e.to_string()).collect();
        println!("  chain {i}: {}", shown.join(" -> "));
    }
    println!("  stabilized: {}", st.stabilized);
    Ok(())
}

fn main() -> singlag::Result<()> {
    run(&LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(dx^2 - lambda*x^2)/2")?)?;
    run(&LagrangianSystem::new("first_order", &["x", "y"], None, "y*dx - (x^2 + y^2)/2")?)?;
    Ok(())
}
