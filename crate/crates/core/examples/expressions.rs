//! Exact rational-function arithmetic: parsing, canonical form,
//! derivatives, Poisson brackets and evaluation.

use singlag::symbolic::{parse, Role, VariableRegistry};
use singlag::LagrangianSystem;

fn main() -> singlag::Result<()> {
    let reg = VariableRegistry::new(&[("x", Role::Config), ("y", Role::Config)])?;
    let f = parse("(x^2 - y^2)/(x - y) + 1/2", &reg)?;
    println!("f        = {f}");
    println!("df/dx    = {}", f.diff_named("x")?);
    let g = parse("x/(x + y)", &reg)?;
    println!("f*g      = {}", &f * &g);
    println!("f(3, 1)  = {}", f.eval_f64(&[3.0, 1.0])?);

    // Brackets live on a system's phase space.
    let sys = LagrangianSystem::new("pendulum", &["th"], None, "dth^2/2 + th^2/2")?;
    let h = sys.parse("p_th^2/2 - th^2/2")?;
    let th = sys.parse("th")?;
    println!("{{th, H}} = {}", sys.bracket(&th, &h));
    Ok(())
}
