//! The canonical fields Y_h, R_h, Δ_h on velocity space, the kernel of ω_L,
//! the primary dynamical field X^L_o, the regular-case reductions and the
//! symmetry tests.

use serde::Serialize;

use crate::constraints::{reduce, strong_equality, weak_equality, Strong, Weak};
use crate::error::{Error, Result};
use crate::evolution::EvolutionContext;
use crate::fields::{Chart, VectorField};
use crate::legendre::LagrangianSystem;
use crate::sampling::RANK_SEED;
use crate::symbolic::gcd::squarefree_part;
use crate::symbolic::{Expr, ExprMatrix, Poly, Rational};

impl EvolutionContext {
    /// `Y_h = FL*{q,h} ∂/∂q + K·{q,h} ∂/∂dq`, with `{q^i, h} = ∂h/∂p_i`.
    pub fn y_field(&self, h: &Expr) -> Result<VectorField> {
        let sys = self.system();
        sys.require_phase_space(h)?;
        let dhdp = sys.dh_dp(h);
        let mut comps = Vec::with_capacity(2 * sys.dim());
        for d in &dhdp {
            comps.push(sys.pullback(d)?);
        }
        for d in &dhdp {
            comps.push(self.k(d)?);
        }
        Ok(VectorField::new(Chart::TQ, sys.tq_dirs(), comps))
    }

    /// `R_h = Γ_{h,H} + v^μ Γ_{h,φ_μ}`.
    pub fn r_field(&self, h: &Expr) -> Result<VectorField> {
        let sys = self.system();
        let mut r = sys.gamma_field(&sys.bracket(h, self.hamiltonian()))?;
        for (phi, vm) in self.primaries().iter().zip(self.v()) {
            let b = sys.bracket(h, phi);
            if b.is_zero() {
                continue;
            }
            r = r.add(&sys.gamma_field(&b)?.scale(vm));
        }
        Ok(r)
    }

    /// `Δ_h = Y_h − R_h`.
    pub fn delta_field(&self, h: &Expr) -> Result<VectorField> {
        Ok(self.y_field(h)?.sub(&self.r_field(h)?))
    }

    /// `X^L_o = Δ_H + v^μ Δ_μ`.
    pub fn x_l_primary(&self) -> Result<VectorField> {
        let mut x = self.delta_field(self.hamiltonian())?;
        for (phi, vm) in self.primaries().iter().zip(self.v()) {
            x = x.add(&self.delta_field(phi)?.scale(vm));
        }
        Ok(x)
    }

    /// `X^L = X^L_o + ε^μ Γ_μ`.
    pub fn lagrangian_field(&self, eps: &[Expr]) -> Result<VectorField> {
        if eps.len() != self.primaries().len() {
            return Err(Error::InvalidArgument(format!(
                "{} arbitrary functions for {} primary constraints",
                eps.len(),
                self.primaries().len()
            )));
        }
        let mut x = self.x_l_primary()?;
        for (g, e) in self.kernel_fields().iter().zip(eps) {
            self.system().require_velocity_space(e)?;
            x = x.add(&g.scale(e));
        }
        Ok(x)
    }

    /// `X^H = Z_H + λ^μ Z_μ`.
    pub fn hamiltonian_field(&self, lambda: &[Expr]) -> Result<VectorField> {
        if lambda.len() != self.primaries().len() {
            return Err(Error::InvalidArgument(format!(
                "{} multipliers for {} primary constraints",
                lambda.len(),
                self.primaries().len()
            )));
        }
        let sys = self.system();
        let mut z = sys.hamiltonian_vector_field(self.hamiltonian());
        for (phi, l) in self.primaries().iter().zip(lambda) {
            sys.require_phase_space(l)?;
            z = z.add(&sys.hamiltonian_vector_field(phi).scale(l));
        }
        Ok(z)
    }

    /// Basis of Ker ω_L: Γ_μ for every primary and Δ_μ for the first-class
    /// ones, with annihilation and independence checked exactly.
    pub fn kernel_omega_l(&self) -> Result<KernelBasis> {
        let sys = self.system();
        let omega = sys.presymplectic_matrix();
        let gammas = self.kernel_fields();
        let first = self.first_class_primaries();
        let deltas: Vec<VectorField> = first.iter().map(|p| self.delta_field(p)).collect::<Result<_>>()?;
        for (i, f) in gammas.iter().chain(&deltas).enumerate() {
            if omega.mul_vec(f.components()).iter().any(|e| !e.is_zero()) {
                return Err(Error::Internal(format!("kernel member {i} does not annihilate ω_L")));
            }
        }
        let all: Vec<Vec<Expr>> =
            gammas.iter().chain(&deltas).map(|f| f.components().to_vec()).collect();
        if !all.is_empty() {
            let rank = ExprMatrix::from_columns(sys.registry(), 2 * sys.dim(), &all).rank();
            if rank != all.len() {
                return Err(Error::Internal(format!(
                    "kernel members are dependent: rank {rank} for {} fields",
                    all.len()
                )));
            }
        }
        let omega_rank = omega.rank();
        let mut structure = Vec::new();
        for a in 0..first.len() {
            for b in 0..first.len() {
                if a == b {
                    continue;
                }
                structure.push(self.structure_functions(&first, &deltas, &gammas, a, b)?);
            }
        }
        Ok(KernelBasis { gammas, deltas, structure, kernel_dim: 2 * sys.dim() - omega_rank })
    }

    fn structure_functions(
        &self,
        first: &[Expr],
        deltas: &[VectorField],
        gammas: &[VectorField],
        a: usize,
        b: usize,
    ) -> Result<StructureFunctions> {
        let sys = self.system();
        // {φ_b, φ_a} = B_{ba}^c φ_c + O(φ²)
        let br = sys.bracket(&first[b], &first[a]);
        let divs: Vec<Poly> = first.iter().map(|f| f.numer().clone()).collect();
        let (quots, rem) = br.numer().divide_by_set(&divs);
        let reg = sys.registry();
        let den = Expr::from_poly(reg, br.denom().clone());
        let coeffs: Option<Vec<Expr>> = if weak_equality(&Expr::from_poly(reg, rem), first, RANK_SEED) == Weak::Exact {
            Some(quots.into_iter().map(|q| &Expr::from_poly(reg, q) / &den).collect())
        } else {
            None
        };
        let lhs = deltas[a].lie_bracket(&deltas[b]);
        let closes = match &coeffs {
            Some(bs) => {
                let mut rhs = VectorField::new(Chart::TQ, sys.tq_dirs(), vec![sys.zero(); 2 * sys.dim()]);
                for (c, bc) in bs.iter().enumerate() {
                    rhs = rhs.add(&deltas[c].scale(&sys.pullback(bc)?));
                }
                in_span(&lhs.sub(&rhs), gammas)
            }
            None => false,
        };
        Ok(StructureFunctions { a, b, coefficients: coeffs, closes_modulo_gamma: closes })
    }

    /// Projectability test: Z_g is the projection of a velocity-space field
    /// iff g is first-class with respect to the primaries.
    pub fn projectability_test(&self, g: &Expr, vf: &[Expr]) -> Result<Projectability> {
        let sys = self.system();
        let brackets: Vec<Expr> =
            self.primaries().iter().map(|p| self.fl_bracket(g, p)).collect::<Result<_>>()?;
        let strict = brackets.iter().all(Expr::is_zero);
        let on_vf = brackets
            .iter()
            .map(|b| weak_equality(b, vf, RANK_SEED))
            .fold(Weak::Exact, |acc, w| match (acc, w) {
                (Weak::False, _) | (_, Weak::False) => Weak::False,
                (Weak::Numerical, _) | (_, Weak::Numerical) => Weak::Numerical,
                _ => Weak::Exact,
            });
        let projector = self.delta_field(g)?;
        let leg_delta = if strict {
            let lhs = sys.push_forward(&projector);
            let rhs = sys.hamiltonian_field_along(g)?;
            Some(lhs.sub(&rhs).is_zero())
        } else {
            None
        };
        Ok(Projectability { strict, on_vf, leg_delta_prime: leg_delta, projector })
    }

    /// Hamiltonian field of a velocity-space function with respect to ω_L,
    /// `i_X ω_L = df`. Requires a regular Lagrangian.
    pub fn omega_hamiltonian_field(&self, omega_inv: &ExprMatrix, f: &Expr) -> VectorField {
        let sys = self.system();
        let grad: Vec<Expr> = sys.tq_dirs().iter().map(|&v| -&f.diff(v)).collect();
        VectorField::new(Chart::TQ, sys.tq_dirs(), omega_inv.mul_vec(&grad))
    }

    /// Inverse of the ω_L matrix, or an error for a singular Lagrangian.
    pub fn omega_inverse(&self) -> Result<ExprMatrix> {
        self.system()
            .presymplectic_matrix()
            .inverse()
            .ok_or_else(|| Error::Unsupported("ω_L is degenerate: the lagrangian is not regular".into()))
    }

    /// Classifies `G` as a Noether generator (`K·G` constant), a dynamical
    /// symmetry (`K·G` strongly equal to a constant on V_f) or neither.
    pub fn symmetry_test(&self, g: &Expr, vf: &[Expr]) -> Result<SymmetryResult> {
        let kg = self.k(g)?;
        if let Some(c) = kg.constant_value() {
            return Ok(SymmetryResult { kind: SymmetryKind::Noether, c, k_g: kg, strong: None });
        }
        let reg = self.system().registry();
        let rem = reduce(&kg, vf);
        let c = if kg.is_polynomial() {
            rem.constant_value().unwrap_or_else(|| Rational::from_integer(0.into()))
        } else {
            Rational::from_integer(0.into())
        };
        let strong = strong_equality(&kg, &Expr::constant(reg, c.clone()), vf, RANK_SEED);
        let kind = match strong {
            Strong::Strong => SymmetryKind::Dynamical,
            Strong::Inconclusive => SymmetryKind::DynamicalNumeric,
            Strong::NotStrong => SymmetryKind::None,
        };
        Ok(SymmetryResult { kind, c, k_g: kg, strong: Some(strong) })
    }
}

/// Working description of V_f on velocity space: the pulled-back
/// stabilization chains together with the χ's, each reduced by the members
/// already kept and replaced by its squarefree part.
pub fn working_vf(sys: &LagrangianSystem, chains: &[Vec<Expr>], chis: &[Expr]) -> Result<Vec<Expr>> {
    let reg = sys.registry();
    let mut cands = Vec::new();
    for chain in chains {
        for phi in chain.iter().skip(1) {
            cands.push(sys.pullback(phi)?);
        }
    }
    cands.extend(chis.iter().cloned());
    let mut kept: Vec<Expr> = Vec::new();
    for c in &cands {
        let r = reduce(c, &kept);
        if r.is_zero() {
            continue;
        }
        let s = Expr::from_poly(reg, squarefree_part(&r));
        if s.is_constant() {
            return Err(Error::Inconsistent(format!("constraint `{c}` has no zeros: V_f is empty")));
        }
        kept.push(s);
    }
    // Drop members that later ones made redundant.
    let mut i = 0;
    while i < kept.len() {
        let others: Vec<Expr> = kept.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, e)| e.clone()).collect();
        if reduce(&kept[i], &others).is_zero() {
            kept.remove(i);
        } else {
            i += 1;
        }
    }
    Ok(kept)
}

fn in_span(x: &VectorField, gammas: &[VectorField]) -> bool {
    if x.is_zero() {
        return true;
    }
    if gammas.is_empty() {
        return false;
    }
    let reg = x.components()[0].registry();
    let cols: Vec<Vec<Expr>> = gammas.iter().map(|g| g.components().to_vec()).collect();
    let a = ExprMatrix::from_columns(reg, x.dim(), &cols);
    !matches!(a.solve(x.components()), crate::symbolic::Solution::Inconsistent { .. })
}

#[derive(Clone, Debug)]
pub struct StructureFunctions {
    pub a: usize,
    pub b: usize,
    /// `B_{ba}^c` with `{φ_b, φ_a} = B_{ba}^c φ_c + O(φ²)`, when division succeeds.
    pub coefficients: Option<Vec<Expr>>,
    /// `[Δ_a, Δ_b] − FL*(B_{ba}^c) Δ_c` lies in the span of the Γ_μ.
    pub closes_modulo_gamma: bool,
}

#[derive(Clone, Debug)]
pub struct KernelBasis {
    pub gammas: Vec<VectorField>,
    pub deltas: Vec<VectorField>,
    pub structure: Vec<StructureFunctions>,
    /// `2n − rank ω_L`, computed independently of the basis.
    pub kernel_dim: usize,
}

impl KernelBasis {
    pub fn len(&self) -> usize {
        self.gammas.len() + self.deltas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn members(&self) -> impl Iterator<Item = &VectorField> {
        self.gammas.iter().chain(&self.deltas)
    }
}

#[derive(Clone, Debug)]
pub struct Projectability {
    /// `FL*{g, φ_μ} ≡ 0` for every primary.
    pub strict: bool,
    /// The same brackets are weakly zero on the working V_f.
    pub on_vf: Weak,
    /// `T(FL)∘Δ_g = Z_g∘FL`, checked when `strict`.
    pub leg_delta_prime: Option<bool>,
    pub projector: VectorField,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryKind {
    Noether,
    Dynamical,
    /// Strong equality could only be established numerically.
    DynamicalNumeric,
    None,
}

#[derive(Clone, Debug)]
pub struct SymmetryResult {
    pub kind: SymmetryKind,
    pub c: Rational,
    pub k_g: Expr,
    pub strong: Option<Strong>,
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use super::*;
    use crate::constraints::{classify_first_class, hamiltonian, primary_constraints, stabilize};

    fn conformal() -> EvolutionContext {
        let sys = Arc::new(
            LagrangianSystem::new("c", &["x", "lambda"], Some(&["p", "pi"]), "(1/2)*(dx^2 - lambda*x^2)").unwrap(),
        );
        let cs = classify_first_class(&sys, &primary_constraints(&sys).unwrap()).unwrap();
        let h = hamiltonian(&sys, None).unwrap();
        EvolutionContext::new(sys, h, &cs).unwrap()
    }

    fn field(c: &EvolutionContext, comps: &[&str]) -> VectorField {
        let s = c.system();
        VectorField::new(Chart::TQ, s.tq_dirs(), comps.iter().map(|t| s.parse(t).unwrap()).collect())
    }

    #[test]
    fn conformal_fields() {
        let c = conformal();
        let s = c.system().clone();
        let pi = s.parse("pi").unwrap();
        assert_eq!(c.y_field(&pi).unwrap(), field(&c, &["0", "1", "0", "0"]));
        assert_eq!(c.y_field(c.hamiltonian()).unwrap(), field(&c, &["dx", "0", "-lambda*x", "0"]));
        assert!(c.r_field(&pi).unwrap().is_zero());
        assert!(c.r_field(c.hamiltonian()).unwrap().is_zero());
        assert_eq!(c.x_l_primary().unwrap(), field(&c, &["dx", "dlambda", "-lambda*x", "0"]));
    }

    #[test]
    fn conformal_kernel() {
        let c = conformal();
        let k = c.kernel_omega_l().unwrap();
        assert_eq!(k.len(), 2);
        assert_eq!(k.kernel_dim, 2);
        assert_eq!(k.gammas[0], field(&c, &["0", "0", "0", "1"]));
        assert_eq!(k.deltas[0], field(&c, &["0", "1", "0", "0"]));
    }

    #[test]
    fn conformal_symmetries() {
        let c = conformal();
        let s = c.system().clone();
        let cs = classify_first_class(&s, &primary_constraints(&s).unwrap()).unwrap();
        let st = stabilize(&s, &cs, c.hamiltonian());
        let chis = c.chain_chi(&st.chains[0]).unwrap();
        let vf = working_vf(&s, &st.chains, &chis).unwrap();
        assert_eq!(vf, vec![s.parse("x").unwrap(), s.parse("dx").unwrap()]);
        let r = c.symmetry_test(c.hamiltonian(), &vf).unwrap();
        assert_eq!(r.kind, SymmetryKind::Dynamical);
        assert_eq!(r.k_g, s.parse("x^2*dlambda/2").unwrap());
        let r = c.symmetry_test(&s.parse("x^2").unwrap(), &vf).unwrap();
        assert_eq!(r.kind, SymmetryKind::Dynamical);
        let r = c.symmetry_test(&s.parse("3").unwrap(), &vf).unwrap();
        assert_eq!(r.kind, SymmetryKind::Noether);
        let r = c.symmetry_test(&s.parse("x").unwrap(), &vf).unwrap();
        assert_eq!(r.kind, SymmetryKind::None);
    }

    #[test]
    fn projectability() {
        let c = conformal();
        let s = c.system().clone();
        let pi = c.projectability_test(&s.parse("pi").unwrap(), &[]).unwrap();
        assert!(pi.strict);
        assert_eq!(pi.leg_delta_prime, Some(true));
        let h = c.projectability_test(c.hamiltonian(), &[s.parse("x").unwrap()]).unwrap();
        assert!(!h.strict);
        assert!(h.on_vf.holds());
    }
}
