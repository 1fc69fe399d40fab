//! The evolution operator K and the resolution-of-identity data `v^μ`, M and
//! the primary Lagrangian constraints `χ_μ`.

use std::sync::Arc;

use crate::constraints::{ConstraintClass, ConstraintSet};
use crate::error::{Error, Result};
use crate::fields::{Chart, VectorField};
use crate::legendre::LagrangianSystem;
use crate::symbolic::{Expr, ExprMatrix, Solution};

/// Compile-time fault: flips the sign of the second term of K.
pub const K_SIGN_FAULT: bool = cfg!(feature = "fault-k-sign");

#[derive(Clone, Debug)]
pub struct EvolutionContext {
    sys: Arc<LagrangianSystem>,
    h: Expr,
    phis: Vec<Expr>,
    classes: Vec<ConstraintClass>,
    gammas: Vec<Vec<Expr>>,
    v: Vec<Expr>,
    m: ExprMatrix,
    k_sign: Expr,
}

impl EvolutionContext {
    /// Solves `dq − FL*(∂H/∂p) = Σ γ_μ v^μ` and builds M. Checks (lam-gam)
    /// and (IMW) exactly; K-dependent identities are left to verification.
    pub fn new(sys: Arc<LagrangianSystem>, h: Expr, primaries: &ConstraintSet) -> Result<Self> {
        Self::with_fault(sys, h, primaries, false)
    }

    #[doc(hidden)]
    pub fn with_fault(
        sys: Arc<LagrangianSystem>,
        h: Expr,
        primaries: &ConstraintSet,
        inject_k_fault: bool,
    ) -> Result<Self> {
        sys.require_phase_space(&h)?;
        let prim: Vec<_> = primaries.items().iter().filter(|c| c.generation == 0).collect();
        let phis: Vec<Expr> = prim.iter().map(|c| c.expr.clone()).collect();
        let classes = prim.iter().map(|c| c.class).collect();
        let gammas: Vec<Vec<Expr>> = phis.iter().map(|p| sys.gamma_vector(p)).collect::<Result<_>>()?;
        let reg = sys.registry().clone();
        let n = sys.dim();

        let gamma_h = sys.gamma_vector(&h)?;
        let rhs: Vec<Expr> = (0..n).map(|i| &sys.var(sys.dq()[i]) - &gamma_h[i]).collect();
        let v = if phis.is_empty() {
            if let Some(r) = rhs.iter().find(|r| !r.is_zero()) {
                return Err(Error::Inconsistent(format!("dq - FL*(dH/dp) = {r} with no constraints")));
            }
            Vec::new()
        } else {
            let a = ExprMatrix::from_columns(&reg, n, &gammas);
            match a.solve(&rhs) {
                Solution::Unique(v) => v,
                Solution::Underdetermined { .. } => {
                    return Err(Error::Inconsistent(
                        "constraint gradients are dependent: v is not unique".into(),
                    ))
                }
                Solution::Inconsistent { residual, .. } => {
                    return Err(Error::Inconsistent(format!(
                        "dq - FL*(dH/dp) is not in the span of the kernel vectors (residual {residual})"
                    )))
                }
            }
        };

        let hess = |f: &Expr| -> Result<ExprMatrix> {
            let rows = sys
                .p()
                .iter()
                .map(|&a| sys.p().iter().map(|&b| sys.pullback(&f.diff(a).diff(b))).collect())
                .collect::<Result<Vec<Vec<Expr>>>>()?;
            Ok(ExprMatrix::from_rows(&reg, rows))
        };
        let mut m = hess(&h)?;
        for (phi, vm) in phis.iter().zip(&v) {
            m = m.add(&hess(phi)?.scale(vm));
        }

        let sign = if K_SIGN_FAULT ^ inject_k_fault { -1 } else { 1 };
        let ctx = EvolutionContext { sys, h, phis, classes, gammas, v, m, k_sign: Expr::int(&reg, sign) };
        ctx.check_lam_gam()?;
        ctx.check_imw()?;
        Ok(ctx)
    }

    fn check_lam_gam(&self) -> Result<()> {
        for (nu, g) in self.kernel_fields().iter().enumerate() {
            for (mu, vm) in self.v.iter().enumerate() {
                let r = g.apply(vm);
                let want = if mu == nu { 1 } else { 0 };
                if !(&r - &Expr::int(self.sys.registry(), want)).is_zero() {
                    return Err(Error::Internal(format!("Γ_{nu}·v^{mu} = {r}, expected {want}")));
                }
            }
        }
        Ok(())
    }

    fn check_imw(&self) -> Result<()> {
        let r = self.imw_residual();
        if r.is_zero() {
            Ok(())
        } else {
            Err(Error::Internal("M·W + Σ γ_μ ⊗ ∂v^μ/∂dq differs from the identity".into()))
        }
    }

    /// `M·W + Σ γ_μ ⊗ ∂v^μ/∂dq − I`.
    pub fn imw_residual(&self) -> ExprMatrix {
        let sys = &self.sys;
        let n = sys.dim();
        let mut r = self.m.mul(sys.hessian());
        for (g, vm) in self.gammas.iter().zip(&self.v) {
            let dv: Vec<Expr> = sys.dq().iter().map(|&d| vm.diff(d)).collect();
            r = r.add(&ExprMatrix::from_fn(sys.registry(), n, n, |i, j| &g[i] * &dv[j]));
        }
        r.sub(&ExprMatrix::identity(sys.registry(), n))
    }

    pub fn system(&self) -> &Arc<LagrangianSystem> {
        &self.sys
    }

    pub fn hamiltonian(&self) -> &Expr {
        &self.h
    }

    pub fn primaries(&self) -> &[Expr] {
        &self.phis
    }

    pub fn classes(&self) -> &[ConstraintClass] {
        &self.classes
    }

    pub fn first_class_primaries(&self) -> Vec<Expr> {
        self.phis
            .iter()
            .zip(&self.classes)
            .filter(|(_, c)| **c == ConstraintClass::First)
            .map(|(p, _)| p.clone())
            .collect()
    }

    /// `γ_μ = FL*(∂φ_μ/∂p)`.
    pub fn gammas(&self) -> &[Vec<Expr>] {
        &self.gammas
    }

    pub fn v(&self) -> &[Expr] {
        &self.v
    }

    pub fn m_tensor(&self) -> &ExprMatrix {
        &self.m
    }

    /// Γ_μ for each primary.
    pub fn kernel_fields(&self) -> Vec<VectorField> {
        self.gammas.iter().map(|g| self.sys.vertical_field(g.clone())).collect()
    }

    /// `M(Fa, Fb) = (∂a/∂dq)ᵀ M (∂b/∂dq)` for velocity-space functions.
    pub fn m_form(&self, a: &Expr, b: &Expr) -> Expr {
        let da: Vec<Expr> = self.sys.dq().iter().map(|&d| a.diff(d)).collect();
        let db: Vec<Expr> = self.sys.dq().iter().map(|&d| b.diff(d)).collect();
        self.m.bilinear(&da, &db)
    }

    /// `FL*{f, g}`.
    pub fn fl_bracket(&self, f: &Expr, g: &Expr) -> Result<Expr> {
        self.sys.pullback(&self.sys.bracket(f, g))
    }

    /// `K·h = FL*(∂h/∂q)·dq + FL*(∂h/∂p)·∂L/∂q`.
    pub fn k(&self, h: &Expr) -> Result<Expr> {
        let sys = &self.sys;
        sys.require_phase_space(h)?;
        let mut first = sys.zero();
        let mut second = sys.zero();
        for i in 0..sys.dim() {
            let hq = h.diff(sys.q()[i]);
            if !hq.is_zero() {
                first = &first + &(&sys.pullback(&hq)? * &sys.var(sys.dq()[i]));
            }
            let hp = h.diff(sys.p()[i]);
            if !hp.is_zero() {
                second = &second + &(&sys.pullback(&hp)? * &sys.lagrangian().diff(sys.q()[i]));
            }
        }
        Ok(&first + &(&self.k_sign * &second))
    }

    /// K as a field along FL: `(dq, ∂L/∂q)`.
    pub fn k_along(&self) -> VectorField {
        let sys = &self.sys;
        let mut comps: Vec<Expr> = sys.dq().iter().map(|&d| sys.var(d)).collect();
        comps.extend(sys.q().iter().map(|&q| &self.k_sign * &sys.lagrangian().diff(q)));
        VectorField::new(Chart::AlongFL, sys.tstar_dirs(), comps)
    }

    /// `χ_μ = K·φ_μ`.
    pub fn chi(&self) -> Result<Vec<Expr>> {
        self.phis.iter().map(|p| self.k(p)).collect()
    }

    /// `⟨[L], γ⟩` on the second-order chart.
    pub fn el_contraction(&self, gamma: &[Expr]) -> Expr {
        let el = self.sys.euler_lagrange_form();
        el.iter().zip(gamma).fold(self.sys.zero(), |acc, (e, g)| &acc + &(e * g))
    }

    /// Lagrangian counterparts `χ^i = K·φ^{i-1}` of a stabilization chain.
    pub fn chain_chi(&self, chain: &[Expr]) -> Result<Vec<Expr>> {
        chain.iter().take(chain.len().saturating_sub(1).max(1)).map(|p| self.k(p)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::{classify_first_class, hamiltonian, primary_constraints};

    fn ctx(coords: &[&str], momenta: Option<&[&str]>, l: &str) -> EvolutionContext {
        let sys = Arc::new(LagrangianSystem::new("t", coords, momenta, l).unwrap());
        let cs = classify_first_class(&sys, &primary_constraints(&sys).unwrap()).unwrap();
        let h = hamiltonian(&sys, None).unwrap();
        EvolutionContext::new(sys, h, &cs).unwrap()
    }

    #[test]
    fn conformal_k_and_v() {
        let c = ctx(&["x", "lambda"], Some(&["p", "pi"]), "(1/2)*(dx^2 - lambda*x^2)");
        let s = c.system().clone();
        assert_eq!(c.v(), &[s.parse("dlambda").unwrap()]);
        assert_eq!(c.k(&s.parse("pi").unwrap()).unwrap(), s.parse("-x^2/2").unwrap());
        assert_eq!(c.k(&s.parse("x").unwrap()).unwrap(), s.parse("dx").unwrap());
        assert!(c.k(&s.parse("7").unwrap()).unwrap().is_zero());
        assert_eq!(*c.m_tensor().get(0, 0), Expr::one(s.registry()));
        assert!(c.m_tensor().get(1, 1).is_zero());
        let mwm = c.m_tensor().mul(s.hessian()).mul(c.m_tensor());
        assert_eq!(&mwm, c.m_tensor());
    }

    #[test]
    fn regular_m_is_inverse_hessian() {
        let c = ctx(&["x", "y"], None, "(2*dx^2 + 2*dx*dy + 3*dy^2)/2 - x*y");
        let s = c.system();
        assert_eq!(c.m_tensor(), &s.hessian().inverse().unwrap());
        assert!(c.v().is_empty());
    }

    #[test]
    fn difference_lagrangian_solves() {
        let c = ctx(&["q1", "q2"], None, "(dq1 - dq2)^2/2");
        let s = c.system();
        assert_eq!(*c.hamiltonian(), s.parse("p_q1^2/2").unwrap());
        assert!(c.imw_residual().is_zero());
    }
}
