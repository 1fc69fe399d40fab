//! Lagrangian side: Legendre map, fibre hessian and its kernel, energy, the
//! fields Γ_h and Υ^g, the Euler–Lagrange form and the presymplectic matrix.
//!
//! Every system owns one registry laid out as `q, dq, p, ddq` (each block of
//! length `n`), so pulling a phase-space function back by the Legendre map is
//! a substitution `p_i ↦ p̂_i` inside the same registry.

use std::collections::HashMap;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fields::{Chart, VectorField};
use crate::sampling::{rational_point, RANK_SEED};
use crate::symbolic::gcd::gcd;
use crate::symbolic::matrix::rational_rank;
use crate::symbolic::{parse, Expr, ExprMatrix, Poly, Role, VariableRegistry};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Number of random rational points used to confirm the generic rank of W.
pub const RANK_SAMPLES: usize = 20;

#[derive(Debug)]
pub struct LagrangianSystem {
    name: String,
    reg: Arc<VariableRegistry>,
    coords: Vec<String>,
    q: Vec<usize>,
    dq: Vec<usize>,
    p: Vec<usize>,
    ddq: Vec<usize>,
    lagrangian: Expr,
    momenta: Vec<Expr>,
    hessian: ExprMatrix,
    pivots: Vec<usize>,
    kernel: Vec<Vec<Expr>>,
    energy: Expr,
    fl_map: HashMap<usize, Expr>,
}

impl LagrangianSystem {
    /// Builds a system from coordinate names and the Lagrangian text.
    /// Velocities are named `d<q>`, accelerations `dd<q>`, momenta `p_<q>`
    /// unless `momenta` overrides them.
    pub fn new(
        name: &str,
        coords: &[&str],
        momenta: Option<&[&str]>,
        lagrangian: &str,
    ) -> Result<Self> {
        let reg = Self::registry_for(coords, momenta)?;
        let l = parse(lagrangian, &reg)?;
        Self::from_expr(name, coords, reg, l)
    }

    /// Registry used by [`LagrangianSystem::new`], exposed so callers can
    /// parse expressions before the system exists.
    pub fn registry_for(coords: &[&str], momenta: Option<&[&str]>) -> Result<Arc<VariableRegistry>> {
        if coords.is_empty() {
            return Err(Error::InvalidArgument("at least one coordinate is required".into()));
        }
        if let Some(m) = momenta {
            if m.len() != coords.len() {
                return Err(Error::InvalidArgument(format!(
                    "{} momentum names for {} coordinates",
                    m.len(),
                    coords.len()
                )));
            }
        }
        let mut vars: Vec<(String, Role)> = Vec::with_capacity(4 * coords.len());
        vars.extend(coords.iter().map(|c| (c.to_string(), Role::Config)));
        vars.extend(coords.iter().map(|c| (format!("d{c}"), Role::Velocity)));
        match momenta {
            Some(m) => vars.extend(m.iter().map(|c| (c.to_string(), Role::Momentum))),
            None => vars.extend(coords.iter().map(|c| (format!("p_{c}"), Role::Momentum))),
        }
        vars.extend(coords.iter().map(|c| (format!("dd{c}"), Role::Acceleration)));
        Ok(VariableRegistry::new(&vars)?)
    }

    pub fn from_expr(
        name: &str,
        coords: &[&str],
        reg: Arc<VariableRegistry>,
        lagrangian: Expr,
    ) -> Result<Self> {
        let n = coords.len();
        let q: Vec<usize> = (0..n).collect();
        let dq: Vec<usize> = (n..2 * n).collect();
        let p: Vec<usize> = (2 * n..3 * n).collect();
        let ddq: Vec<usize> = (3 * n..4 * n).collect();
        if let Some(v) = lagrangian.vars().into_iter().find(|v| *v >= 2 * n) {
            return Err(Error::Chart(format!(
                "the lagrangian may only use coordinates and velocities, found `{}`",
                reg.name(v)
            )));
        }
        let momenta: Vec<Expr> = dq.iter().map(|&v| lagrangian.diff(v)).collect();
        let hessian =
            ExprMatrix::from_fn(&reg, n, n, |i, j| momenta[i].diff(dq[j]));
        let (_, pivots) = hessian.echelon();
        let kernel: Vec<Vec<Expr>> = hessian.nullspace().into_iter().map(clear_denominators).collect();
        let fl_map = p.iter().zip(&momenta).map(|(&pi, m)| (pi, m.clone())).collect();
        let energy = dq
            .iter()
            .zip(&momenta)
            .fold(-&lagrangian, |acc, (&v, m)| &acc + &(&Expr::var(&reg, v) * m));
        let sys = LagrangianSystem {
            name: name.to_string(),
            reg,
            coords: coords.iter().map(|s| s.to_string()).collect(),
            q,
            dq,
            p,
            ddq,
            lagrangian,
            momenta,
            hessian,
            pivots,
            kernel,
            energy,
            fl_map,
        };
        sys.check_constant_rank()?;
        for (mu, g) in sys.kernel_fields().iter().enumerate() {
            let r = g.apply(&sys.energy);
            if !r.is_zero() {
                return Err(Error::Internal(format!("energy not projectable along Γ_{mu}: {r}")));
            }
        }
        Ok(sys)
    }

    fn check_constant_rank(&self) -> Result<()> {
        let generic = self.rank();
        let mut rng = ChaCha8Rng::seed_from_u64(RANK_SEED);
        let mut witnesses = Vec::new();
        for _ in 0..RANK_SAMPLES {
            let pt = rational_point(&mut rng, self.reg.len());
            let Some(vals) = self.hessian.eval_rational(&pt) else { continue };
            let r = rational_rank(vals);
            if r != generic {
                let desc: Vec<String> = self
                    .q
                    .iter()
                    .chain(&self.dq)
                    .map(|&v| format!("{}={}", self.reg.name(v), pt[v]))
                    .collect();
                witnesses.push(format!("rank {r} at ({})", desc.join(", ")));
            }
        }
        if witnesses.is_empty() {
            Ok(())
        } else {
            Err(Error::NonConstantRank { generic, witnesses })
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn registry(&self) -> &Arc<VariableRegistry> {
        &self.reg
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[String] {
        &self.coords
    }

    pub fn q(&self) -> &[usize] {
        &self.q
    }

    pub fn dq(&self) -> &[usize] {
        &self.dq
    }

    pub fn p(&self) -> &[usize] {
        &self.p
    }

    pub fn ddq(&self) -> &[usize] {
        &self.ddq
    }

    /// Registry indices of the velocity-space chart `(q, dq)`.
    pub fn tq_dirs(&self) -> Vec<usize> {
        self.q.iter().chain(&self.dq).copied().collect()
    }

    /// Registry indices of the phase-space chart `(q, p)`.
    pub fn tstar_dirs(&self) -> Vec<usize> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub fn var(&self, i: usize) -> Expr {
        Expr::var(&self.reg, i)
    }

    pub fn zero(&self) -> Expr {
        Expr::zero(&self.reg)
    }

    pub fn parse(&self, text: &str) -> Result<Expr> {
        Ok(parse(text, &self.reg)?)
    }

    pub fn lagrangian(&self) -> &Expr {
        &self.lagrangian
    }

    /// Momenta `p̂_i = ∂L/∂dq^i`.
    pub fn momenta(&self) -> &[Expr] {
        &self.momenta
    }

    /// Fibre hessian `W_ij = ∂²L/∂dq^i∂dq^j`.
    pub fn hessian(&self) -> &ExprMatrix {
        &self.hessian
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    /// Pivot columns of W under the leftmost-pivot rule.
    pub fn pivots(&self) -> &[usize] {
        &self.pivots
    }

    pub fn is_regular(&self) -> bool {
        self.kernel.is_empty()
    }

    /// Kernel basis γ_μ of W with denominators cleared.
    pub fn kernel_basis(&self) -> &[Vec<Expr>] {
        &self.kernel
    }

    pub fn energy(&self) -> &Expr {
        &self.energy
    }

    pub fn is_phase_space_fn(&self, h: &Expr) -> bool {
        h.vars().iter().all(|v| self.q.contains(v) || self.p.contains(v))
    }

    pub fn is_velocity_space_fn(&self, f: &Expr) -> bool {
        f.vars().iter().all(|v| self.q.contains(v) || self.dq.contains(v))
    }

    pub fn require_phase_space(&self, h: &Expr) -> Result<()> {
        match h.vars().into_iter().find(|v| !self.q.contains(v) && !self.p.contains(v)) {
            None => Ok(()),
            Some(v) => Err(Error::Chart(format!(
                "`{h}` is not a phase-space function (uses `{}`)",
                self.reg.name(v)
            ))),
        }
    }

    pub fn require_velocity_space(&self, f: &Expr) -> Result<()> {
        match f.vars().into_iter().find(|v| !self.q.contains(v) && !self.dq.contains(v)) {
            None => Ok(()),
            Some(v) => Err(Error::Chart(format!(
                "`{f}` is not a velocity-space function (uses `{}`)",
                self.reg.name(v)
            ))),
        }
    }

    /// Pullback `FL*h = h ∘ FL`.
    pub fn pullback(&self, h: &Expr) -> Result<Expr> {
        if !self.p.iter().any(|&v| h.contains_var(v)) {
            return Ok(h.clone());
        }
        Ok(h.substitute(&self.fl_map)?)
    }

    pub fn dh_dp(&self, h: &Expr) -> Vec<Expr> {
        self.p.iter().map(|&v| h.diff(v)).collect()
    }

    pub fn dh_dq(&self, h: &Expr) -> Vec<Expr> {
        self.q.iter().map(|&v| h.diff(v)).collect()
    }

    /// `γ_h = FL*(∂h/∂p)`, the fibre derivative of h along FL.
    pub fn gamma_vector(&self, h: &Expr) -> Result<Vec<Expr>> {
        self.dh_dp(h).iter().map(|e| self.pullback(e)).collect()
    }

    pub fn vertical_field(&self, fibre: Vec<Expr>) -> VectorField {
        let mut comps = vec![self.zero(); self.dim()];
        comps.extend(fibre);
        VectorField::new(Chart::TQ, self.tq_dirs(), comps)
    }

    /// `Γ_h = FL*(∂h/∂p_i) ∂/∂dq^i`.
    pub fn gamma_field(&self, h: &Expr) -> Result<VectorField> {
        self.require_phase_space(h)?;
        Ok(self.vertical_field(self.gamma_vector(h)?))
    }

    /// `Υ^g`, the field along FL with momentum components `∂g/∂dq^i`.
    pub fn upsilon_field(&self, g: &Expr) -> Result<VectorField> {
        self.require_velocity_space(g)?;
        let mut comps = vec![self.zero(); self.dim()];
        comps.extend(self.dq.iter().map(|&v| g.diff(v)));
        Ok(VectorField::new(Chart::AlongFL, self.tstar_dirs(), comps))
    }

    /// Γ_μ built from the kernel basis.
    pub fn kernel_fields(&self) -> Vec<VectorField> {
        self.kernel.iter().map(|g| self.vertical_field(g.clone())).collect()
    }

    /// `Γ_μ·f ≡ 0` for all μ. On failure returns the first failing index and
    /// its residual.
    pub fn is_projectable(&self, f: &Expr) -> Result<(), (usize, Expr)> {
        for (mu, g) in self.kernel_fields().iter().enumerate() {
            let r = g.apply(f);
            if !r.is_zero() {
                return Err((mu, r));
            }
        }
        Ok(())
    }

    /// Liouville field `dq ∂/∂dq`.
    pub fn liouville(&self) -> VectorField {
        self.vertical_field(self.dq.iter().map(|&v| self.var(v)).collect())
    }

    /// Vertical endomorphism: `J(X^q, X^dq) = (0, X^q)`.
    pub fn vertical_endomorphism(&self, x: &VectorField) -> VectorField {
        assert_eq!(x.chart(), Chart::TQ);
        self.vertical_field(x.base().to_vec())
    }

    /// Total time derivative `d/dt f = dq ∂f/∂q + ddq ∂f/∂dq`.
    pub fn total_time_derivative(&self, f: &Expr) -> Expr {
        let mut acc = self.zero();
        for i in 0..self.dim() {
            acc = &acc + &(&self.var(self.dq[i]) * &f.diff(self.q[i]));
            acc = &acc + &(&self.var(self.ddq[i]) * &f.diff(self.dq[i]));
        }
        acc
    }

    /// `[L]_i = ∂L/∂q^i − d/dt(∂L/∂dq^i)`.
    pub fn euler_lagrange_form(&self) -> Vec<Expr> {
        (0..self.dim())
            .map(|i| &self.lagrangian.diff(self.q[i]) - &self.total_time_derivative(&self.momenta[i]))
            .collect()
    }

    /// Coordinate matrix of `ω_L = dq^i ∧ dp̂_i` in the `(q, dq)` chart, with
    /// `ω_L = ½ Ω_ab dx^a ∧ dx^b`.
    pub fn presymplectic_matrix(&self) -> ExprMatrix {
        let n = self.dim();
        let a = |i: usize, j: usize| self.momenta[i].diff(self.q[j]);
        ExprMatrix::from_fn(&self.reg, 2 * n, 2 * n, |r, c| match (r < n, c < n) {
            (true, true) => &a(r, c) - &a(c, r),
            (true, false) => self.hessian.get(r, c - n).clone(),
            (false, true) => -self.hessian.get(c, r - n),
            (false, false) => self.zero(),
        })
    }

    /// Pushforward `T(FL)∘X` of a velocity-space field, as a field along FL.
    pub fn push_forward(&self, x: &VectorField) -> VectorField {
        assert_eq!(x.chart(), Chart::TQ);
        let mut comps = x.base().to_vec();
        comps.extend(self.momenta.iter().map(|m| x.apply(m)));
        VectorField::new(Chart::AlongFL, self.tstar_dirs(), comps)
    }

    /// Hamiltonian field `Z_h = (∂h/∂p, −∂h/∂q)` on phase space, so that
    /// `Z_h·g = {g, h}`.
    pub fn hamiltonian_vector_field(&self, h: &Expr) -> VectorField {
        let mut comps = self.dh_dp(h);
        comps.extend(self.dh_dq(h).iter().map(|e| -e));
        VectorField::new(Chart::TStarQ, self.tstar_dirs(), comps)
    }

    /// `Z_h ∘ FL`, a field along FL.
    pub fn hamiltonian_field_along(&self, h: &Expr) -> Result<VectorField> {
        let z = self.hamiltonian_vector_field(h);
        let comps = z.components().iter().map(|c| self.pullback(c)).collect::<Result<_>>()?;
        Ok(VectorField::new(Chart::AlongFL, self.tstar_dirs(), comps))
    }

    /// Poisson bracket `{f, g} = f_q g_p − f_p g_q`.
    pub fn bracket(&self, f: &Expr, g: &Expr) -> Expr {
        let mut acc = self.zero();
        for i in 0..self.dim() {
            let (qi, pi) = (self.q[i], self.p[i]);
            let a = &f.diff(qi) * &g.diff(pi);
            let b = &f.diff(pi) * &g.diff(qi);
            acc = &(&acc + &a) - &b;
        }
        acc
    }

    /// Largest total degree of L in the velocities; `None` for a Lagrangian
    /// with velocities in a denominator.
    pub fn velocity_degree(&self) -> Option<u32> {
        if self.dq.iter().any(|&v| self.lagrangian.denom().contains_var(v)) {
            return None;
        }
        Some(self.lagrangian.numer().degree_in_set(&self.dq))
    }

    /// `f` with all velocities set to zero.
    pub fn at_zero_velocity(&self, f: &Expr) -> Result<Expr> {
        let map: HashMap<usize, Expr> = self.dq.iter().map(|&v| (v, self.zero())).collect();
        Ok(f.substitute(&map)?)
    }
}

/// Scales a vector of rational functions by the lcm of its denominators.
fn clear_denominators(v: Vec<Expr>) -> Vec<Expr> {
    let Some(first) = v.first() else { return v };
    let reg = first.registry().clone();
    let n = reg.len();
    let mut l = Poly::one(n);
    for e in &v {
        let d = e.denom();
        let g = gcd(&l, d);
        l = &l * &d.div_exact(&g).expect("gcd divides");
    }
    if l.is_one() {
        return v;
    }
    let factor = Expr::from_poly(&reg, l);
    v.iter().map(|e| e * &factor).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn conformal() -> LagrangianSystem {
        LagrangianSystem::new("conformal", &["x", "lambda"], Some(&["p", "pi"]), "(1/2)*(dx^2 - lambda*x^2)")
            .unwrap()
    }

    #[test]
    fn conformal_legendre_data() {
        let s = conformal();
        assert_eq!(s.momenta()[0], s.parse("dx").unwrap());
        assert!(s.momenta()[1].is_zero());
        assert_eq!(s.rank(), 1);
        assert_eq!(s.kernel_basis().len(), 1);
        assert_eq!(s.kernel_basis()[0], vec![s.zero(), Expr::one(s.registry())]);
        assert_eq!(*s.energy(), s.parse("dx^2/2 + lambda*x^2/2").unwrap());
    }

    #[test]
    fn euler_lagrange_and_chi() {
        let s = conformal();
        let el = s.euler_lagrange_form();
        assert_eq!(el[0], s.parse("-lambda*x - ddx").unwrap());
        assert_eq!(el[1], s.parse("-x^2/2").unwrap());
    }

    #[test]
    fn presymplectic_is_dx_wedge_ddx() {
        let s = conformal();
        let om = s.presymplectic_matrix();
        assert!(om.is_antisymmetric());
        assert_eq!(*om.get(0, 2), Expr::one(s.registry()));
        assert_eq!(om.rank(), 2);
        for g in s.kernel_fields() {
            assert!(om.mul_vec(g.components()).iter().all(Expr::is_zero));
        }
    }

    #[test]
    fn difference_lagrangian_kernel() {
        let s = LagrangianSystem::new("diff", &["q1", "q2"], None, "(dq1 - dq2)^2/2").unwrap();
        let one = Expr::one(s.registry());
        assert_eq!(s.kernel_basis(), &[vec![one.clone(), one]]);
    }

    #[test]
    fn lagrangian_with_momenta_is_rejected() {
        let err = LagrangianSystem::new("bad", &["x"], None, "p_x*dx").unwrap_err();
        assert!(matches!(err, Error::Chart(_)));
    }

    #[test]
    fn linear_in_velocity_is_fully_degenerate() {
        let s = LagrangianSystem::new("lin", &["x"], None, "x*dx - x^2/2").unwrap();
        assert_eq!(s.rank(), 0);
        assert_eq!(s.kernel_basis().len(), 1);
        assert_eq!(*s.energy(), s.parse("x^2/2").unwrap());
    }
}
