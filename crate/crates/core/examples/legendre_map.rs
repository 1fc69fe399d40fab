//! Legendre map, fibre hessian and energy of a singular Lagrangian.

use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    let sys = LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(dx^2 - lambda*x^2)/2")?;
    let reg = sys.registry();
    for (i, m) in sys.momenta().iter().enumerate() {
        println!("FL*{} = {m}", reg.name(sys.p()[i]));
    }
    println!("hessian rank {} of {}", sys.rank(), sys.dim());
    println!("E_L = {}", sys.energy());
    for g in sys.kernel_fields() {
        println!("Ker T(FL) contains {}", g.describe(reg));
    }
    // E_L is constant along the kernel, so it is the pullback of a Hamiltonian.
    let h = sys.parse("(p^2 + lambda*x^2)/2")?;
    assert_eq!(sys.pullback(&h)?, *sys.energy());
    println!("E_L = FL*H with H = {h}");
    Ok(())
}
