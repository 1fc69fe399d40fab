//! Vector fields as explicit component lists over a coordinate chart.

use std::fmt;

use serde::Serialize;

use crate::symbolic::{Expr, VariableRegistry};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Chart {
    /// Velocity space, coordinates `(q, dq)`.
    TQ,
    /// Phase space, coordinates `(q, p)`.
    TStarQ,
    /// Directions `(q, p)` of phase space, components written over `(q, dq)`.
    AlongFL,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    chart: Chart,
    /// Registry indices of the coordinate directions, one per component.
    dirs: Vec<usize>,
    comps: Vec<Expr>,
}

impl VectorField {
    pub fn new(chart: Chart, dirs: Vec<usize>, comps: Vec<Expr>) -> Self {
        assert_eq!(dirs.len(), comps.len(), "component count must match the chart");
        VectorField { chart, dirs, comps }
    }

    pub fn chart(&self) -> Chart {
        self.chart
    }

    pub fn dirs(&self) -> &[usize] {
        &self.dirs
    }

    pub fn components(&self) -> &[Expr] {
        &self.comps
    }

    pub fn component(&self, k: usize) -> &Expr {
        &self.comps[k]
    }

    pub fn dim(&self) -> usize {
        self.comps.len()
    }

    /// First half of the components (the base directions `q`).
    pub fn base(&self) -> &[Expr] {
        &self.comps[..self.comps.len() / 2]
    }

    /// Second half of the components (`dq` or `p` directions).
    pub fn fibre(&self) -> &[Expr] {
        &self.comps[self.comps.len() / 2..]
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Expr::is_zero)
    }

    pub fn is_vertical(&self) -> bool {
        self.base().iter().all(Expr::is_zero)
    }

    fn zip_with(&self, other: &VectorField, f: impl Fn(&Expr, &Expr) -> Expr) -> VectorField {
        assert!(self.chart == other.chart && self.dirs == other.dirs, "fields on different charts");
        let comps = self.comps.iter().zip(&other.comps).map(|(a, b)| f(a, b)).collect();
        VectorField { chart: self.chart, dirs: self.dirs.clone(), comps }
    }

    pub fn add(&self, other: &VectorField) -> VectorField {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &VectorField) -> VectorField {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn scale(&self, e: &Expr) -> VectorField {
        VectorField {
            chart: self.chart,
            dirs: self.dirs.clone(),
            comps: self.comps.iter().map(|c| c * e).collect(),
        }
    }

    /// Action as a derivation, `X·f = Σ X^a ∂f/∂x^a`. Not meaningful for
    /// fields along the Legendre map.
    pub fn apply(&self, f: &Expr) -> Expr {
        assert!(self.chart != Chart::AlongFL, "a field along FL is not a derivation");
        let mut acc = Expr::zero(f.registry());
        for (c, &v) in self.comps.iter().zip(&self.dirs) {
            if c.is_zero() || !f.contains_var(v) {
                continue;
            }
            acc = &acc + &(c * &f.diff(v));
        }
        acc
    }

    /// Lie bracket `[X, Y]^a = X·Y^a − Y·X^a`.
    pub fn lie_bracket(&self, other: &VectorField) -> VectorField {
        assert!(self.chart == other.chart && self.dirs == other.dirs, "fields on different charts");
        let comps = self
            .comps
            .iter()
            .zip(&other.comps)
            .map(|(x, y)| &self.apply(y) - &other.apply(x))
            .collect();
        VectorField { chart: self.chart, dirs: self.dirs.clone(), comps }
    }

    /// Pretty form `c1*∂/∂x1 + ...` using registry names.
    pub fn describe(&self, reg: &VariableRegistry) -> String {
        let terms: Vec<String> = self
            .comps
            .iter()
            .zip(&self.dirs)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, &v)| format!("({c})*d/d{}", reg.name(v)))
            .collect();
        if terms.is_empty() {
            "0".to_string()
        } else {
            terms.join(" + ")
        }
    }
}

impl fmt::Display for VectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let reg = match self.comps.first() {
            Some(c) => c.registry().clone(),
            None => return write!(f, "0"),
        };
        write!(f, "{}", self.describe(&reg))
    }
}
