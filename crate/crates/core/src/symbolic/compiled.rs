//! Expressions lowered to flat f64 term lists for fast repeated evaluation.

use super::expr::Expr;
use super::poly::{rat_to_f64, Poly};

#[derive(Clone, Debug)]
struct CompiledPoly {
    terms: Vec<(f64, Vec<(usize, i32)>)>,
}

impl CompiledPoly {
    fn new(p: &Poly) -> Self {
        let terms = p
            .terms()
            .map(|(m, c)| {
                let factors = m
                    .exps()
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(v, &e)| (v, e as i32))
                    .collect();
                (rat_to_f64(c), factors)
            })
            .collect();
        CompiledPoly { terms }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(c, fs)| fs.iter().fold(*c, |acc, &(v, e)| acc * x[v].powi(e)))
            .sum()
    }
}

/// A rational function ready for f64 evaluation.
#[derive(Clone, Debug)]
pub struct CompiledExpr {
    num: CompiledPoly,
    den: Option<CompiledPoly>,
}

impl CompiledExpr {
    pub fn new(e: &Expr) -> Self {
        let den = if e.is_polynomial() { None } else { Some(CompiledPoly::new(e.denom())) };
        CompiledExpr { num: CompiledPoly::new(e.numer()), den }
    }

    /// Numerator and denominator values.
    pub fn eval_parts(&self, x: &[f64]) -> (f64, f64) {
        let d = self.den.as_ref().map_or(1.0, |d| d.eval(x));
        (self.num.eval(x), d)
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let (n, d) = self.eval_parts(x);
        n / d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::{parse, VariableRegistry};

    #[test]
    fn agrees_with_exact_evaluation() {
        let r = VariableRegistry::with_names(&["x", "y"]).unwrap();
        let e = parse("(x^3 - 2*x*y + 1/3)/(1 + y^2)", &r).unwrap();
        let c = CompiledExpr::new(&e);
        let pt = [0.7, -1.3];
        assert!((c.eval(&pt) - e.eval_f64(&pt).unwrap()).abs() < 1e-14);
    }
}
