//! Pipelines behind the `analyze`, `verify` and `simulate` commands, and
//! their text and JSON reports.

pub mod cli;
pub mod specfile;
mod text;

use std::sync::Arc;

use serde::Serialize;

use crate::canonical::{working_vf, KernelBasis, SymmetryKind};
use crate::constraints::{
    classify_first_class, hamiltonian, primary_constraints, stabilize, verify_constraints, ConstraintClass,
    ConstraintSet, Stabilization, Strong, Weak,
};
use crate::dynamics::{integrate_hamiltonian, integrate_lagrangian, legendre_point, relate_solutions, RelationReport, Trajectory};
use crate::error::{Error, Result};
use crate::evolution::EvolutionContext;
use crate::fields::VectorField;
use crate::legendre::LagrangianSystem;
use crate::symbolic::{Expr, VariableRegistry};
use crate::verify::{
    check_identities, identity_suite, kernel_identity, NumericOptions, SuiteInputs, VerificationReport, DEFAULT_SEED,
};

pub use specfile::SystemSpec;
pub use text::{render_analysis, render_relation, render_verification};

use specfile::{expression_list, Line};

/// Everything derived from a system file before reporting.
pub struct Analysis {
    pub spec: SystemSpec,
    pub ctx: EvolutionContext,
    pub constraints: ConstraintSet,
    pub stabilization: Stabilization,
    pub chain_chi: Vec<Vec<Expr>>,
    pub vf: Vec<Expr>,
    pub fields: Vec<Expr>,
    pub symmetries: Vec<Expr>,
}

/// Attaches the source line to expression syntax errors.
fn at<T>(line: &Line, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Expr(x) if x.is_syntax() => Error::Spec { line: line.line, message: x.to_string() },
        other => other,
    })
}

impl Analysis {
    pub fn new(spec: SystemSpec) -> Result<Self> {
        Self::build(spec, false)
    }

    #[doc(hidden)]
    pub fn with_fault(spec: SystemSpec, inject_k_fault: bool) -> Result<Self> {
        Self::build(spec, inject_k_fault)
    }

    fn build(spec: SystemSpec, inject_k_fault: bool) -> Result<Self> {
        let coords: Vec<&str> = spec.coordinates.iter().map(String::as_str).collect();
        let momenta: Option<Vec<&str>> = spec.momenta.as_ref().map(|m| m.iter().map(String::as_str).collect());
        let reg = at(&spec.lagrangian, LagrangianSystem::registry_for(&coords, momenta.as_deref()))?;
        let lagrangian = at(&spec.lagrangian, crate::symbolic::parse(&spec.lagrangian.text, &reg).map_err(Error::from))?;
        let sys = Arc::new(at(&spec.lagrangian, LagrangianSystem::from_expr(&spec.name, &coords, reg, lagrangian))?);

        let cs = if spec.constraints.is_empty() {
            primary_constraints(&sys)?
        } else {
            let cands = spec
                .constraints
                .iter()
                .map(|l| at(l, sys.parse(&l.text)))
                .collect::<Result<Vec<_>>>()?;
            for (l, c) in spec.constraints.iter().zip(&cands) {
                at(l, sys.require_phase_space(c))?;
            }
            verify_constraints(&sys, &cands)?
        };
        let cs = classify_first_class(&sys, &cs)?;
        let user_h = match &spec.hamiltonian {
            Some(l) => Some(at(l, sys.parse(&l.text))?),
            None => None,
        };
        if let (Some(l), Some(h)) = (&spec.hamiltonian, &user_h) {
            at(l, sys.require_phase_space(h))?;
        }
        let h = hamiltonian(&sys, user_h.as_ref())?;
        let ctx = EvolutionContext::with_fault(sys.clone(), h.clone(), &cs, inject_k_fault)?;
        let stabilization = stabilize(&sys, &cs, &h);
        let chain_chi: Vec<Vec<Expr>> =
            stabilization.chains.iter().map(|c| ctx.chain_chi(c)).collect::<Result<_>>()?;
        let mut chis = ctx.chi()?;
        chis.extend(chain_chi.iter().flatten().cloned());
        let vf = working_vf(&sys, &stabilization.chains, &chis)?;

        let phase = |l: &Line| -> Result<Expr> {
            if l.text == "H" && sys.registry().lookup("H").is_none() {
                return Ok(h.clone());
            }
            let e = at(l, sys.parse(&l.text))?;
            at(l, sys.require_phase_space(&e))?;
            Ok(e)
        };
        let fields = spec.fields.iter().map(&phase).collect::<Result<_>>()?;
        let symmetries = spec.symmetries.iter().map(&phase).collect::<Result<_>>()?;
        Ok(Analysis { spec, ctx, constraints: cs, stabilization, chain_chi, vf, fields, symmetries })
    }

    pub fn system(&self) -> &Arc<LagrangianSystem> {
        self.ctx.system()
    }

    /// Suite inputs: seeded functions, the user `h` list and the Noether
    /// generators among the symmetry candidates.
    pub fn suite_inputs(&self, seed: u64) -> Result<SuiteInputs> {
        let mut inputs = SuiteInputs::seeded(&self.ctx, seed, &self.fields)?;
        for g in &self.symmetries {
            if self.ctx.symmetry_test(g, &self.vf)?.kind == SymmetryKind::Noether {
                inputs.noether.push(g.clone());
            }
        }
        Ok(inputs)
    }

    /// Identity suite plus the kernel annihilation check.
    pub fn verify(&self, numeric: Option<NumericOptions>) -> Result<VerificationReport> {
        let seed = numeric.map_or(DEFAULT_SEED, |o| o.seed);
        let mut ids = identity_suite(&self.ctx, &self.suite_inputs(seed)?)?;
        let kernel = self.ctx.kernel_omega_l()?;
        ids.push(kernel_identity(self.system(), &kernel));
        check_identities(&ids, self.system().registry().len(), numeric)
    }

    pub fn report(&self) -> Result<AnalysisReport> {
        AnalysisReport::build(self)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub var: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldJson {
    pub text: String,
    /// Nonzero components only.
    pub components: Vec<Component>,
}

impl FieldJson {
    fn new(f: &VectorField, reg: &VariableRegistry) -> Self {
        let components = f
            .dirs()
            .iter()
            .zip(f.components())
            .filter(|(_, c)| !c.is_zero())
            .map(|(&d, c)| Component { var: reg.name(d).to_string(), value: c.to_string() })
            .collect();
        FieldJson { text: f.describe(reg), components }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SystemSection {
    pub name: String,
    pub coordinates: Vec<String>,
    pub velocities: Vec<String>,
    pub momenta: Vec<String>,
    pub lagrangian: String,
    pub legendre_map: Vec<String>,
    pub energy: String,
    pub hessian_rank: usize,
    pub regular: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintJson {
    pub expr: String,
    pub generation: usize,
    pub class: ConstraintClass,
}

#[derive(Clone, Debug, Serialize)]
pub struct ChainJson {
    pub constraints: Vec<String>,
    pub chi: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConstraintSection {
    pub primaries: Vec<ConstraintJson>,
    pub all: Vec<ConstraintJson>,
    pub chains: Vec<ChainJson>,
    pub stabilized: bool,
    /// Working description of the final constraint set on velocity space.
    pub final_velocity_constraints: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct EvolutionSection {
    pub v: Vec<String>,
    pub m: Vec<Vec<String>>,
    pub chi: Vec<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct Projectability {
    pub strict: bool,
    pub on_final_constraints: Weak,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pushes_to_z: Option<bool>,
}

#[derive(Clone, Debug, Serialize)]
pub struct FieldSection {
    pub h: String,
    pub y: FieldJson,
    pub r: FieldJson,
    pub delta: FieldJson,
    pub projectability: Projectability,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureJson {
    pub a: usize,
    pub b: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub coefficients: Option<Vec<String>>,
    pub closes: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct KernelSection {
    pub members: Vec<FieldJson>,
    pub primaries: usize,
    pub first_class_primaries: usize,
    /// `2n − rank ω_L`.
    pub rank_defect: usize,
    pub dimension_law: bool,
    pub structure: Vec<StructureJson>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DynamicsSection {
    pub x_l_primary: FieldJson,
    /// `T(FL)∘X^L_o − K`, a field along FL.
    pub k_defect: FieldJson,
    pub second_order: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SymmetrySection {
    pub g: String,
    pub k_g: String,
    pub kind: SymmetryKind,
    pub c: String,
    pub conserved: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub strong: Option<Strong>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AnalysisReport {
    pub system: SystemSection,
    pub constraints: ConstraintSection,
    pub hamiltonian: String,
    pub evolution: EvolutionSection,
    pub fields: Vec<FieldSection>,
    pub kernel: KernelSection,
    pub dynamics: DynamicsSection,
    pub symmetries: Vec<SymmetrySection>,
    pub identities: VerificationReport,
}

fn strings(es: &[Expr]) -> Vec<String> {
    es.iter().map(Expr::to_string).collect()
}

fn constraint_rows(cs: &ConstraintSet) -> Vec<ConstraintJson> {
    cs.items()
        .iter()
        .map(|c| ConstraintJson { expr: c.expr.to_string(), generation: c.generation, class: c.class })
        .collect()
}

impl AnalysisReport {
    fn build(a: &Analysis) -> Result<Self> {
        let ctx = &a.ctx;
        let sys = ctx.system();
        let reg = sys.registry();
        let names = |ix: &[usize]| ix.iter().map(|&k| reg.name(k).to_string()).collect::<Vec<_>>();

        let system = SystemSection {
            name: sys.name().to_string(),
            coordinates: names(sys.q()),
            velocities: names(sys.dq()),
            momenta: names(sys.p()),
            lagrangian: sys.lagrangian().to_string(),
            legendre_map: strings(sys.momenta()),
            energy: sys.energy().to_string(),
            hessian_rank: sys.rank(),
            regular: sys.is_regular(),
        };
        let constraints = ConstraintSection {
            primaries: constraint_rows(&a.constraints),
            all: constraint_rows(&a.stabilization.constraints),
            chains: a
                .stabilization
                .chains
                .iter()
                .zip(&a.chain_chi)
                .map(|(c, x)| ChainJson { constraints: strings(c), chi: strings(x) })
                .collect(),
            stabilized: a.stabilization.stabilized,
            final_velocity_constraints: strings(&a.vf),
        };
        let m = ctx.m_tensor();
        let evolution = EvolutionSection {
            v: strings(ctx.v()),
            m: (0..m.rows()).map(|i| strings(&m.row(i))).collect(),
            chi: strings(&ctx.chi()?),
        };

        let mut fields = Vec::new();
        for h in &a.fields {
            let p = ctx.projectability_test(h, &a.vf)?;
            fields.push(FieldSection {
                h: h.to_string(),
                y: FieldJson::new(&ctx.y_field(h)?, reg),
                r: FieldJson::new(&ctx.r_field(h)?, reg),
                delta: FieldJson::new(&p.projector, reg),
                projectability: Projectability {
                    strict: p.strict,
                    on_final_constraints: p.on_vf,
                    pushes_to_z: p.leg_delta_prime,
                },
            });
        }

        let kb: KernelBasis = ctx.kernel_omega_l()?;
        let kernel = KernelSection {
            members: kb.members().map(|f| FieldJson::new(f, reg)).collect(),
            primaries: ctx.primaries().len(),
            first_class_primaries: ctx.first_class_primaries().len(),
            rank_defect: kb.kernel_dim,
            dimension_law: kb.len() == kb.kernel_dim
                && kb.len() == ctx.primaries().len() + ctx.first_class_primaries().len(),
            structure: kb
                .structure
                .iter()
                .map(|s| StructureJson {
                    a: s.a,
                    b: s.b,
                    coefficients: s.coefficients.as_ref().map(|c| strings(c)),
                    closes: s.closes_modulo_gamma,
                })
                .collect(),
        };

        let xl = ctx.x_l_primary()?;
        let defect = sys.push_forward(&xl).sub(&ctx.k_along());
        let dynamics = DynamicsSection {
            x_l_primary: FieldJson::new(&xl, reg),
            k_defect: FieldJson::new(&defect, reg),
            second_order: sys.vertical_endomorphism(&xl) == sys.liouville(),
        };

        let mut symmetries = Vec::new();
        for g in &a.symmetries {
            let r = ctx.symmetry_test(g, &a.vf)?;
            let c = Expr::constant(reg, r.c.clone());
            let conserved = match r.kind {
                SymmetryKind::None => String::new(),
                _ => (g - &c).to_string(),
            };
            symmetries.push(SymmetrySection {
                g: g.to_string(),
                k_g: r.k_g.to_string(),
                kind: r.kind,
                c: c.to_string(),
                conserved,
                strong: r.strong,
            });
        }

        let identities = a.verify(None)?;
        Ok(AnalysisReport {
            system,
            constraints,
            hamiltonian: ctx.hamiltonian().to_string(),
            evolution,
            fields,
            kernel,
            dynamics,
            symmetries,
            identities,
        })
    }

    /// Consistency failures that make `analyze` exit with code 4.
    pub fn failures(&self) -> Vec<String> {
        let mut out: Vec<String> = self.identities.failing_tags().iter().map(|t| t.to_string()).collect();
        if !self.kernel.dimension_law {
            out.push("kernel dimension law".into());
        }
        if !self.dynamics.second_order {
            out.push("second-order condition".into());
        }
        out
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Settings of a simulation run; `None` falls back to the file, then to the
/// defaults `t0 = 0`, `t1 = 1`, `dt = 0.01`.
#[derive(Clone, Debug, Default)]
pub struct SimulationOptions {
    pub t0: Option<f64>,
    pub t1: Option<f64>,
    pub dt: Option<f64>,
    pub initial: Option<Vec<(String, f64)>>,
}

pub struct SimulationOutcome {
    pub xi: Trajectory,
    pub eta: Trajectory,
    pub lambda: Vec<Expr>,
    pub eps: Vec<Expr>,
    pub relation: RelationReport,
}

impl Analysis {
    /// Integrates both sides from a velocity-space initial state and its
    /// Legendre image. Missing multipliers default to zero and missing `ε`
    /// to `K·λ`.
    pub fn simulate(&self, opts: &SimulationOptions) -> Result<SimulationOutcome> {
        let ctx = &self.ctx;
        let sys = ctx.system();
        let sim = &self.spec.simulation;
        let t0 = opts.t0.or(sim.t0).unwrap_or(0.0);
        let t1 = opts.t1.or(sim.t1).unwrap_or(1.0);
        let dt = opts.dt.or(sim.dt).unwrap_or(0.01);
        let assignments = opts.initial.as_ref().unwrap_or(&sim.initial);
        let slots = sys.tq_dirs();
        let reg = sys.registry();
        let mut initial = vec![0.0; slots.len()];
        for (name, value) in assignments {
            let k = reg
                .lookup(name)
                .and_then(|i| slots.iter().position(|&s| s == i))
                .ok_or_else(|| Error::InvalidArgument(format!("`{name}` is not a position or velocity")))?;
            initial[k] = *value;
        }
        let n_prim = ctx.primaries().len();
        let list = |l: &Option<Line>, velocity: bool| -> Result<Option<Vec<Expr>>> {
            let Some(l) = l else { return Ok(None) };
            let es = expression_list(&l.text)
                .iter()
                .map(|t| {
                    let e = at(l, sys.parse(t))?;
                    at(l, if velocity { sys.require_velocity_space(&e) } else { sys.require_phase_space(&e) })?;
                    Ok(e)
                })
                .collect::<Result<Vec<_>>>()?;
            if es.len() != n_prim {
                return Err(Error::Spec {
                    line: l.line,
                    message: format!("{} expressions for {n_prim} primary constraints", es.len()),
                });
            }
            Ok(Some(es))
        };
        let lambda = list(&sim.lambda, false)?.unwrap_or_else(|| vec![sys.zero(); n_prim]);
        let eps = match list(&sim.eps, true)? {
            Some(e) => e,
            None => lambda.iter().map(|l| ctx.k(l)).collect::<Result<_>>()?,
        };
        let xi = integrate_lagrangian(ctx, &initial, &eps, (t0, t1), dt)?;
        let eta0 = legendre_point(ctx, &initial);
        let eta = integrate_hamiltonian(ctx, &eta0, &lambda, (t0, t1), dt)?;
        let relation = relate_solutions(ctx, &xi, &eta, Some(&lambda), Some(&eps))?;
        Ok(SimulationOutcome { xi, eta, lambda, eps, relation })
    }
}
