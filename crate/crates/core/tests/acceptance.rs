//! Acceptance run. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::Rng;
use singlag::dynamics::{integrate_hamiltonian, integrate_lagrangian, legendre_point, relate_solutions};
use singlag::report::{Analysis, SimulationOptions, SystemSpec};
use singlag::sampling::trial_rng;
use singlag::symbolic::Expr;
use singlag::verify::NumericOptions;
use singlag::{Chart, LagrangianSystem, VectorField};

type Outcome = Result<String, Vec<String>>;

/// Identities named by criteria 2 and 3. `(RH-vR)` is R_H + v^μ R_μ = 0.
const REQUIRED: &[&str] = &[
    "(lam)",
    "(lam-gam)",
    "(K-H')",
    "(Gamma-K)",
    "(K-EL)",
    "(Wsim)",
    "(Y-Leg)",
    "(Y-K)",
    "(Leg-Y)",
    "(J-Delta)",
    "(Delta-lam)",
    "(Delta-Leg)",
    "(Leg-Delta)",
    "(Delta-lam-previ)",
    "(prod-Gam)",
    "(prod-Ups)",
    "(prod-Y)",
    "(prod-R)",
    "(prod-Delta)",
    "(K-XL)",
    "(XL-Leg)",
    "(XL-lam)",
    "(XL-K)",
    "(RH-vR)",
    "(com-Gam-Gam)",
    "(com-Del-mu)",
    "(com-Del-Del)",
    "(com-Del-Gam)",
];

const CORPUS: &[&str] = &["conformal", "free", "difference", "gauge", "regular2", "second_class"];

fn workspace() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(format!("{name}.sys"))
}

fn analysis(name: &str) -> Analysis {
    Analysis::new(SystemSpec::from_path(&fixture(name)).unwrap()).unwrap()
}

fn verdict(failures: Vec<String>, detail: String) -> Outcome {
    if failures.is_empty() {
        Ok(detail)
    } else {
        Err(failures)
    }
}

/// `i_X ω_L` for `ω_L = dq^i ∧ dp̂_i`, computed straight from the momenta:
/// `X^{q_i} dp̂_i − X(p̂_i) dq^i`, one entry per `(q, dq)` direction.
fn contract_omega(sys: &LagrangianSystem, x: &VectorField) -> Vec<Expr> {
    sys.tq_dirs()
        .iter()
        .map(|&b| {
            let mut acc = sys.zero();
            for (i, m) in sys.momenta().iter().enumerate() {
                acc = &acc + &(&x.base()[i] * &m.diff(b));
                if b == sys.q()[i] {
                    acc = &acc - &x.apply(m);
                }
            }
            acc
        })
        .collect()
}

fn tq_field(sys: &LagrangianSystem, comps: &[&str]) -> VectorField {
    VectorField::new(Chart::TQ, sys.tq_dirs(), comps.iter().map(|t| sys.parse(t).unwrap()).collect())
}

fn golden() -> Outcome {
    let a = analysis("conformal");
    let sys = a.system().clone();
    let ctx = &a.ctx;
    let e = |t: &str| sys.parse(t).unwrap();
    let mut fails = Vec::new();
    let mut checked = 0;
    let mut same = |label: &str, ok: bool, got: String| {
        checked += 1;
        if !ok {
            fails.push(format!("{label}: got {got}"));
        }
    };

    same("phi", ctx.primaries() == [e("pi")], format!("{:?}", ctx.primaries()));
    same("H", *ctx.hamiltonian() == e("(p^2 + lambda*x^2)/2"), ctx.hamiltonian().to_string());
    let chain = &a.stabilization.chains[0];
    let want_chain = [e("pi"), e("-x^2/2"), e("-p*x"), e("lambda*x^2 - p^2")];
    same("chain", chain[..] == want_chain[..], format!("{chain:?}"));
    let chi = &a.chain_chi[0];
    let want_chi = [e("-x^2/2"), e("-dx*x"), e("lambda*x^2 - dx^2")];
    same("chi chain", chi[..] == want_chi[..], format!("{chi:?}"));
    if chain.len() == 4 && chi.len() == 3 {
        let k3 = ctx.k(&chain[3]).unwrap();
        let rhs = &(&e("-2*dlambda") * &chi[0]) - &(&e("4*lambda") * &chi[1]);
        same("K.phi3", k3 == rhs, k3.to_string());
    }
    same("v", ctx.v() == [e("dlambda")], format!("{:?}", ctx.v()));
    let gammas = ctx.kernel_fields();
    let d_dlambda = tq_field(&sys, &["0", "0", "0", "1"]);
    let d_lambda = tq_field(&sys, &["0", "1", "0", "0"]);
    same("Gamma_phi", gammas == [d_dlambda.clone()], format!("{gammas:?}"));
    let pi = e("pi");
    let h = ctx.hamiltonian().clone();
    let y_phi = ctx.y_field(&pi).unwrap();
    same("Y_phi", y_phi == d_lambda, y_phi.to_string());
    let y_h = ctx.y_field(&h).unwrap();
    same("Y_H", y_h == tq_field(&sys, &["dx", "0", "-lambda*x", "0"]), y_h.to_string());
    let (r_phi, r_h) = (ctx.r_field(&pi).unwrap(), ctx.r_field(&h).unwrap());
    same("R_phi", r_phi.is_zero(), r_phi.to_string());
    same("R_H", r_h.is_zero(), r_h.to_string());
    let kernel = ctx.kernel_omega_l().unwrap();
    let members: Vec<VectorField> = kernel.members().cloned().collect();
    let spans = members.len() == 2 && members.contains(&d_dlambda) && members.contains(&d_lambda);
    same("Ker omega_L", spans, format!("{members:?}"));
    let xl = ctx.x_l_primary().unwrap();
    same("X^L_o", xl == tq_field(&sys, &["dx", "dlambda", "-lambda*x", "0"]), xl.to_string());
    let defect = sys.push_forward(&xl).sub(&ctx.k_along());
    let chi1 = ctx.chi().unwrap()[0].clone();
    let zero = sys.zero();
    let want = VectorField::new(Chart::AlongFL, sys.tstar_dirs(), vec![zero.clone(), zero.clone(), zero, -&chi1]);
    same("T(FL)X^L_o - K", defect == want, defect.to_string());

    verdict(fails, format!("{checked} exact matches"))
}

fn suite(numeric: Option<NumericOptions>) -> Outcome {
    let t = Instant::now();
    let mut fails = Vec::new();
    let mut instances = vec![0usize; REQUIRED.len()];
    let mut rows = 0;
    let mut worst = 0.0f64;
    for name in CORPUS {
        let report = analysis(name).verify(numeric).unwrap();
        rows += report.rows.len();
        for (k, tag) in REQUIRED.iter().enumerate() {
            let Some(row) = report.row(tag) else {
                fails.push(format!("{name}: {tag} missing"));
                continue;
            };
            instances[k] += row.instances;
            if !row.exact_zero {
                fails.push(format!("{name}: {tag} residual {}", row.witness.as_deref().unwrap_or("?")));
            }
            if numeric.is_some() && row.instances > 0 {
                match &row.numeric {
                    Some(n) if n.passed() => worst = worst.max(n.max_residual),
                    Some(n) => fails.push(format!("{name}: {tag} max|r| = {:e}", n.max_residual)),
                    None => fails.push(format!("{name}: {tag} has no numeric check")),
                }
            }
        }
        for tag in report.failing_tags() {
            if !REQUIRED.contains(&tag) {
                fails.push(format!("{name}: {tag} fails"));
            }
        }
    }
    for (tag, n) in REQUIRED.iter().zip(&instances) {
        if *n == 0 {
            fails.push(format!("{tag} was never instantiated"));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if secs >= 60.0 {
        fails.push(format!("took {secs:.1} s"));
    }
    let total: usize = instances.iter().sum();
    let detail = match numeric {
        None => format!("{} systems, {} tags, {total} instances, {rows} rows exact", CORPUS.len(), REQUIRED.len()),
        Some(_) => format!("{} systems, {total} instances, worst max|r| = {worst:.2e}", CORPUS.len()),
    };
    verdict(fails, detail)
}

fn exact_suite() -> Outcome {
    suite(None)
}

fn numeric_suite() -> Outcome {
    suite(Some(NumericOptions { trials: 100, tol: 1e-9, seed: 42 }))
}

fn kernel_law() -> Outcome {
    let mut fails = Vec::new();
    let mut counts = Vec::new();
    for name in CORPUS {
        let a = analysis(name);
        let sys = a.system();
        let kernel = a.ctx.kernel_omega_l().unwrap();
        let (prim, first) = (a.ctx.primaries().len(), a.ctx.first_class_primaries().len());
        if kernel.len() != prim + first {
            fails.push(format!("{name}: {} members for {prim} primaries and {first} first-class", kernel.len()));
        }
        for (i, x) in kernel.members().enumerate() {
            if let Some(r) = contract_omega(sys, x).into_iter().find(|r| !r.is_zero()) {
                fails.push(format!("{name}: member {i} leaves {r}"));
            }
        }
        counts.push(format!("{name} {}={prim}+{first}", kernel.len()));
    }
    verdict(fails, counts.join(", "))
}

/// Random quadratic function of `(q, p)` with small integer coefficients.
fn random_h(sys: &LagrangianSystem, seed: u64, k: u64) -> Expr {
    let mut rng = trial_rng(seed, k);
    let vars: Vec<usize> = sys.q().iter().chain(sys.p()).copied().collect();
    let mut h = sys.zero();
    for _ in 0..4 {
        let c = rng.gen_range(1..=3) * if rng.gen_bool(0.5) { 1 } else { -1 };
        let mut term = Expr::int(sys.registry(), c);
        for _ in 0..rng.gen_range(0..=2) {
            term = &term * &sys.var(vars[rng.gen_range(0..vars.len())]);
        }
        h = &h + &term;
    }
    h
}

fn regular_reduction() -> Outcome {
    let mut fails = Vec::new();
    let mut done = 0;
    for name in ["free", "regular2"] {
        let a = analysis(name);
        let (ctx, sys) = (&a.ctx, a.system());
        let inv = ctx.omega_inverse().unwrap();
        let xl = ctx.x_l_primary().unwrap();
        let ham = |f: &Expr, what: &str, fails: &mut Vec<String>| {
            let x = ctx.omega_hamiltonian_field(&inv, f);
            let lhs = contract_omega(sys, &x);
            if sys.tq_dirs().iter().zip(&lhs).any(|(&b, l)| *l != f.diff(b)) {
                fails.push(format!("{name}: X_f for {what} does not solve i_X omega_L = df"));
            }
            x
        };
        for k in 0..5 {
            let h = random_h(sys, 42, k);
            let x_h = ham(&sys.pullback(&h).unwrap(), "FL*h", &mut fails);
            let x_hh = ham(&ctx.fl_bracket(&h, ctx.hamiltonian()).unwrap(), "FL*{h,H}", &mut fails);
            if ctx.delta_field(&h).unwrap() != x_h {
                fails.push(format!("{name}: Delta_h != X_FL*h for h = {h}"));
            }
            let y = ctx.y_field(&h).unwrap();
            if y != x_h.add(&sys.vertical_endomorphism(&x_hh)) {
                fails.push(format!("{name}: Y_h mismatch for h = {h}"));
            }
            let n = sys.vertical_endomorphism(&y.lie_bracket(&xl));
            if !n.is_zero() {
                fails.push(format!("{name}: J[Y_h, X^L_o] = {n} for h = {h}"));
            }
            done += 1;
        }
    }
    verdict(fails, format!("{done} functions on 2 regular systems"))
}

fn dynamics() -> Outcome {
    let mut fails = Vec::new();

    let free = analysis("free");
    let (q0, v0) = (0.3, -0.7);
    let tr = integrate_lagrangian(&free.ctx, &[q0, v0], &[], (0.0, 1.0), 1e-3).unwrap();
    let free_err = tr
        .times
        .iter()
        .zip(&tr.states)
        .map(|(t, s)| (s[0] - (q0 + v0 * t)).abs().max((s[1] - v0).abs()))
        .fold(0.0, f64::max);
    if free_err > 1e-10 || tr.len() != 1001 {
        fails.push(format!("free particle error {free_err:e} over {} points", tr.len()));
    }

    let conformal = analysis("conformal");
    let out = conformal.simulate(&SimulationOptions::default()).unwrap();
    let start = out.xi.states[0].clone();
    let moved = out.xi.states.iter().any(|s| *s != start);
    if out.xi.max_drift() != 0.0 || out.eta.max_drift() != 0.0 || moved {
        fails.push(format!("fixed point drift {} / {}, moved {moved}", out.xi.max_drift(), out.eta.max_drift()));
    }

    let ctx = &conformal.ctx;
    let sys = ctx.system();
    let lambda = [sys.parse("lambda^2").unwrap()];
    let eps = [ctx.k(&lambda[0]).unwrap()];
    let xi0 = [0.0, 0.5, 0.0, 0.25];
    let eta0 = legendre_point(ctx, &xi0);
    let mut residuals = Vec::new();
    for dt in [0.1, 0.05, 0.025, 0.0125] {
        let xi = integrate_lagrangian(ctx, &xi0, &eps, (0.0, 1.0), dt).unwrap();
        let eta = integrate_hamiltonian(ctx, &eta0, &lambda, (0.0, 1.0), dt).unwrap();
        let rel = relate_solutions(ctx, &xi, &eta, Some(&lambda), Some(&eps)).unwrap();
        residuals.push(rel.get("(arb-ham)").unwrap());
    }
    let ratios: Vec<f64> = residuals.windows(2).map(|w| w[0] / w[1]).collect();
    if ratios.iter().any(|r| !(12.0..=20.0).contains(r)) {
        fails.push(format!("convergence ratios {ratios:.2?} from residuals {residuals:?}"));
    }
    let shown: Vec<String> = ratios.iter().map(|r| format!("{r:.1}")).collect();
    verdict(
        fails,
        format!("free error {free_err:.1e}, fixed-point drift 0, convergence ratios {}", shown.join(", ")),
    )
}

fn fault_injection() -> Outcome {
    let mut fails = Vec::new();
    let spec = SystemSpec::from_path(&fixture("conformal")).unwrap();
    let report = Analysis::with_fault(spec, true).unwrap().verify(Some(NumericOptions::default())).unwrap();
    if !report.failing_tags().contains(&"(K-H')") {
        fails.push(format!("in-process fault not caught: {:?}", report.failing_tags()));
    }

    let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
    let root = workspace();
    let out = Command::new(cargo)
        .current_dir(&root)
        .env("CARGO_TARGET_DIR", root.join("target/fault"))
        .args(["run", "-q", "-p", "singlag", "--features", "fault-k-sign", "--", "verify"])
        .arg(fixture("conformal"))
        .output();
    match out {
        Err(e) => fails.push(format!("could not start cargo: {e}")),
        Ok(out) => {
            let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
            let named = text.lines().any(|l| l.starts_with("failing identities:") && l.contains("(K-H')"));
            if out.status.code() != Some(1) || !named {
                fails.push(format!("fault build: exit {:?}, (K-H') named: {named}", out.status.code()));
            }
        }
    }
    verdict(fails, "fault build exits 1 naming (K-H')".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 7] = [
        ("conformal golden fixture", golden),
        ("exact identity suite on the corpus", exact_suite),
        ("random-point identity suite (100 trials, tol 1e-9, seed 42)", numeric_suite),
        ("kernel dimension law", kernel_law),
        ("regular reduction", regular_reduction),
        ("dynamics", dynamics),
        ("fault injection", fault_injection),
    ];
    let mut failed = 0;
    for (i, (label, check)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = check();
        let secs = t.elapsed().as_secs_f64();
        let outcome = match (i, outcome) {
            (0, Ok(_)) if secs >= 5.0 => Err(vec![format!("took {secs:.2} s")]),
            (_, o) => o,
        };
        match outcome {
            Ok(detail) => println!("criterion {} PASS {label} [{secs:.2} s]: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {} FAIL {label} [{secs:.2} s]", i + 1);
                for w in why {
                    println!("    {w}");
                }
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
