use std::fmt::Write;

use crate::dynamics::RelationReport;
use crate::verify::VerificationReport;

use super::{AnalysisReport, FieldJson};

fn field(out: &mut String, label: &str, f: &FieldJson) {
    let _ = writeln!(out, "  {label} = {}", f.text);
}

pub fn render_analysis(r: &AnalysisReport) -> String {
    let mut out = String::new();
    let s = &r.system;
    let _ = writeln!(out, "system {}", s.name);
    let _ = writeln!(out, "  L = {}", s.lagrangian);
    let _ = writeln!(out, "  coordinates: {}", s.coordinates.join(", "));
    for (p, m) in s.momenta.iter().zip(&s.legendre_map) {
        let _ = writeln!(out, "  FL*{p} = {m}");
    }
    let _ = writeln!(out, "  E_L = {}", s.energy);
    let _ = writeln!(out, "  hessian rank {} of {}", s.hessian_rank, s.coordinates.len());
    if s.regular {
        let _ = writeln!(out, "  regular: no constraints");
    }

    let c = &r.constraints;
    if !c.primaries.is_empty() {
        let _ = writeln!(out, "\nconstraints");
        for k in &c.all {
            let _ = writeln!(out, "  [{}] {:?}  {}", k.generation, k.class, k.expr);
        }
        for (i, ch) in c.chains.iter().enumerate() {
            let _ = writeln!(out, "  chain {i}: {}", ch.constraints.join(" -> "));
            let _ = writeln!(out, "  chi {i}: {}", ch.chi.join(", "));
        }
        let _ = writeln!(out, "  stabilized: {}", c.stabilized);
        let _ = writeln!(out, "  final velocity constraints: {}", c.final_velocity_constraints.join(", "));
    }

    let _ = writeln!(out, "\nH = {}", r.hamiltonian);
    let e = &r.evolution;
    if !e.v.is_empty() {
        let _ = writeln!(out, "v = {}", e.v.join(", "));
        let _ = writeln!(out, "chi = {}", e.chi.join(", "));
    }
    let rows: Vec<String> = e.m.iter().map(|row| format!("[{}]", row.join(", "))).collect();
    let _ = writeln!(out, "M = [{}]", rows.join(", "));

    for f in &r.fields {
        let _ = writeln!(out, "\nfields of h = {}", f.h);
        field(&mut out, "Y", &f.y);
        field(&mut out, "R", &f.r);
        field(&mut out, "Delta", &f.delta);
        let p = &f.projectability;
        let strict = if p.strict { "projects" } else { "does not project off-shell" };
        let _ = writeln!(out, "  {strict}; brackets on final constraints: {:?}", p.on_final_constraints);
    }

    let k = &r.kernel;
    let _ = writeln!(out, "\nkernel of omega_L ({} members, rank defect {})", k.members.len(), k.rank_defect);
    for m in &k.members {
        let _ = writeln!(out, "  {}", m.text);
    }
    let _ = writeln!(
        out,
        "  {} primaries + {} first-class = {}: {}",
        k.primaries,
        k.first_class_primaries,
        k.primaries + k.first_class_primaries,
        if k.dimension_law { "ok" } else { "MISMATCH" }
    );
    for st in &k.structure {
        let coeffs = st.coefficients.as_ref().map_or("not extracted".to_string(), |c| c.join(", "));
        let _ = writeln!(out, "  B[{}][{}] = ({coeffs}), closes: {}", st.b, st.a, st.closes);
    }

    let _ = writeln!(out, "\nprimary dynamics");
    field(&mut out, "X_o", &r.dynamics.x_l_primary);
    field(&mut out, "T(FL)X_o - K", &r.dynamics.k_defect);
    let _ = writeln!(out, "  second order: {}", r.dynamics.second_order);

    if !r.symmetries.is_empty() {
        let _ = writeln!(out, "\nsymmetries");
        for s in &r.symmetries {
            let _ = write!(out, "  G = {}: K.G = {}, {:?}", s.g, s.k_g, s.kind);
            if !s.conserved.is_empty() {
                let _ = write!(out, ", c = {}, conserved {}", s.c, s.conserved);
            }
            let _ = writeln!(out);
        }
    }

    let _ = writeln!(out, "\nidentities");
    out.push_str(&render_verification(&r.identities));
    out
}

pub fn render_verification(r: &VerificationReport) -> String {
    let mut out = String::new();
    let width = r.rows.iter().map(|row| row.tag.len()).max().unwrap_or(0);
    for row in &r.rows {
        let status = if row.passed { "PASS" } else { "FAIL" };
        let exact = if row.exact_zero { "exact" } else { "NONZERO" };
        let _ = write!(out, "  {status} {:width$} n={:<3} {exact}", row.tag, row.instances);
        if let Some(n) = &row.numeric {
            let _ = write!(out, "  max|r| = {:.3e} over {} samples (seed {})", n.max_residual, n.samples, n.seed);
        }
        if let Some(w) = &row.witness {
            let _ = write!(out, "  residual {w}");
        }
        let _ = writeln!(out);
    }
    out
}

pub fn render_relation(r: &RelationReport) -> String {
    let mut out = String::new();
    for row in &r.rows {
        let _ = writeln!(out, "  {} max residual {:.3e} over {} points", row.tag, row.max_residual, row.samples);
    }
    out
}
