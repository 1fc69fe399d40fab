use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_traits::{One, Signed, Zero};

use super::gcd::{gcd, is_unit};
use super::poly::{Poly, Rational};
use super::registry::VariableRegistry;
use super::ExprError;

/// Denominators smaller than this in magnitude are treated as poles by
/// [`Expr::eval_f64`].
pub const EVAL_POLE_TOL: f64 = 1e-12;

/// Canonical rational function `num / den` over a [`VariableRegistry`].
///
/// Invariants: `den` is nonzero and monic under the graded lexicographic
/// order, `gcd(num, den) = 1`, and zero is stored as `0 / 1`. Two `Expr`s
/// over the same registry are equal as functions iff they are structurally
/// equal.
#[derive(Clone)]
pub struct Expr {
    reg: Arc<VariableRegistry>,
    num: Poly,
    den: Poly,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.reg, &other.reg) && self.num == other.num && self.den == other.den
    }
}

impl Eq for Expr {}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Expr({self})")
    }
}

impl Expr {
    pub fn zero(reg: &Arc<VariableRegistry>) -> Self {
        Expr { reg: reg.clone(), num: Poly::zero(reg.len()), den: Poly::one(reg.len()) }
    }

    pub fn one(reg: &Arc<VariableRegistry>) -> Self {
        Self::constant(reg, Rational::one())
    }

    pub fn constant(reg: &Arc<VariableRegistry>, c: Rational) -> Self {
        Expr { reg: reg.clone(), num: Poly::constant(reg.len(), c), den: Poly::one(reg.len()) }
    }

    pub fn int(reg: &Arc<VariableRegistry>, k: i64) -> Self {
        Self::constant(reg, Rational::from_integer(k.into()))
    }

    pub fn var(reg: &Arc<VariableRegistry>, i: usize) -> Self {
        Expr { reg: reg.clone(), num: Poly::var(reg.len(), i), den: Poly::one(reg.len()) }
    }

    pub fn named(reg: &Arc<VariableRegistry>, name: &str) -> Result<Self, ExprError> {
        Ok(Self::var(reg, reg.require(name)?))
    }

    pub fn from_poly(reg: &Arc<VariableRegistry>, p: Poly) -> Self {
        Expr { reg: reg.clone(), num: p, den: Poly::one(reg.len()) }
    }

    /// Builds `num / den` and canonicalizes it.
    pub fn from_parts(reg: &Arc<VariableRegistry>, num: Poly, den: Poly) -> Result<Self, ExprError> {
        if den.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        Ok(Self::canonical(reg.clone(), num, den))
    }

    fn canonical(reg: Arc<VariableRegistry>, num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Expr { num: Poly::zero(reg.len()), den: Poly::one(reg.len()), reg };
        }
        let (num, den) = if is_unit(&den) {
            (num, den)
        } else {
            let g = gcd(&num, &den);
            if g.is_one() {
                (num, den)
            } else {
                (num.div_exact(&g).expect("gcd divides"), den.div_exact(&g).expect("gcd divides"))
            }
        };
        let (den, lc) = den.make_monic();
        let num = if lc.is_one() { num } else { num.scale(&lc.recip()) };
        Expr { reg, num, den }
    }

    /// Re-runs canonicalization. Idempotent on values built through the API.
    pub fn canonicalize(&self) -> Self {
        Self::canonical(self.reg.clone(), self.num.clone(), self.den.clone())
    }

    pub fn registry(&self) -> &Arc<VariableRegistry> {
        &self.reg
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_polynomial(&self) -> bool {
        self.den.is_one()
    }

    pub fn constant_value(&self) -> Option<Rational> {
        if self.den.is_one() {
            self.num.constant_value()
        } else {
            None
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    pub fn contains_var(&self, v: usize) -> bool {
        self.num.contains_var(v) || self.den.contains_var(v)
    }

    pub fn vars(&self) -> Vec<usize> {
        (0..self.reg.len()).filter(|&v| self.contains_var(v)).collect()
    }

    fn check_reg(&self, other: &Expr) {
        assert!(Arc::ptr_eq(&self.reg, &other.reg), "expressions over different registries");
    }

    pub fn checked_div(&self, other: &Expr) -> Result<Expr, ExprError> {
        self.check_reg(other);
        if other.is_zero() {
            return Err(ExprError::DivisionByZero);
        }
        let inv = Expr { reg: other.reg.clone(), num: other.den.clone(), den: other.num.clone() };
        let inv = Self::canonical(inv.reg.clone(), inv.num, inv.den);
        Ok(self * &inv)
    }

    pub fn scale(&self, c: &Rational) -> Expr {
        if c.is_zero() {
            return Expr::zero(&self.reg);
        }
        Expr { reg: self.reg.clone(), num: self.num.scale(c), den: self.den.clone() }
    }

    pub fn pow(&self, e: i32) -> Result<Expr, ExprError> {
        if e >= 0 {
            let e = e as u32;
            Ok(Expr { reg: self.reg.clone(), num: self.num.pow(e), den: self.den.pow(e) })
        } else {
            if self.is_zero() {
                return Err(ExprError::DivisionByZero);
            }
            let e = (-e) as u32;
            Ok(Self::canonical(self.reg.clone(), self.den.pow(e), self.num.pow(e)))
        }
    }

    /// Exact partial derivative with respect to variable index `v`.
    pub fn diff(&self, v: usize) -> Expr {
        if self.den.is_one() {
            return Expr { reg: self.reg.clone(), num: self.num.derivative(v), den: self.den.clone() };
        }
        let dn = self.num.derivative(v);
        let dd = self.den.derivative(v);
        if dd.is_zero() {
            return Self::canonical(self.reg.clone(), dn, self.den.clone());
        }
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        let den = &self.den * &self.den;
        Self::canonical(self.reg.clone(), num, den)
    }

    pub fn diff_named(&self, name: &str) -> Result<Expr, ExprError> {
        Ok(self.diff(self.reg.require(name)?))
    }

    /// Simultaneous substitution `x_i -> e_i`. Fails when the substituted
    /// denominator vanishes identically.
    pub fn substitute(&self, map: &HashMap<usize, Expr>) -> Result<Expr, ExprError> {
        if map.is_empty() {
            return Ok(self.clone());
        }
        for e in map.values() {
            self.check_reg(e);
        }
        let mut cache: HashMap<(usize, u32), Expr> = HashMap::new();
        let num = subst_poly(&self.reg, &self.num, map, &mut cache);
        let den = subst_poly(&self.reg, &self.den, map, &mut cache);
        if den.is_zero() {
            return Err(ExprError::ZeroDenominator);
        }
        num.checked_div(&den)
    }

    pub fn substitute_named(&self, map: &[(&str, Expr)]) -> Result<Expr, ExprError> {
        let mut m = HashMap::new();
        for (name, e) in map {
            m.insert(self.reg.require(name)?, e.clone());
        }
        self.substitute(&m)
    }

    /// Exact value at a rational point (indexed by registry order).
    pub fn eval_rational(&self, point: &[Rational]) -> Result<Rational, ExprError> {
        let d = self.den.eval_rational(point);
        if d.is_zero() {
            return Err(ExprError::Pole { magnitude: 0.0 });
        }
        Ok(self.num.eval_rational(point) / d)
    }

    /// Double-precision value at a point indexed by registry order.
    pub fn eval_f64(&self, point: &[f64]) -> Result<f64, ExprError> {
        let d = self.den.eval_f64(point);
        if d.abs() < EVAL_POLE_TOL {
            return Err(ExprError::Pole { magnitude: d.abs() });
        }
        Ok(self.num.eval_f64(point) / d)
    }

    /// Evaluation at a named point; every variable of the expression must be assigned.
    pub fn eval_numeric(&self, point: &HashMap<String, f64>) -> Result<f64, ExprError> {
        let mut values = vec![0.0; self.reg.len()];
        for v in self.vars() {
            let name = self.reg.name(v);
            values[v] = *point.get(name).ok_or_else(|| ExprError::Unassigned(name.to_string()))?;
        }
        self.eval_f64(&values)
    }

    pub fn is_negative_leading(&self) -> bool {
        self.num.leading().is_some_and(|(_, c)| c.is_negative())
    }
}

fn subst_poly(
    reg: &Arc<VariableRegistry>,
    p: &Poly,
    map: &HashMap<usize, Expr>,
    cache: &mut HashMap<(usize, u32), Expr>,
) -> Expr {
    let n = reg.len();
    // Polynomial fast path: every image is a polynomial.
    if map.values().all(|e| e.is_polynomial()) {
        let mut acc = Poly::zero(n);
        for (m, c) in p.terms() {
            let mut term = Poly::constant(n, c.clone());
            let mut kept = super::poly::Monomial::one(n);
            let mut kept_exps = kept.exps().to_vec();
            for (v, &e) in m.exps().iter().enumerate() {
                if e == 0 {
                    continue;
                }
                match map.get(&v) {
                    Some(img) => {
                        let pw = cache
                            .entry((v, e))
                            .or_insert_with(|| Expr::from_poly(reg, img.num.pow(e)))
                            .num
                            .clone();
                        term = &term * &pw;
                    }
                    None => kept_exps[v] = e,
                }
            }
            kept = super::poly::Monomial::from_exps(kept_exps);
            if !kept.is_one() {
                term = term.mul_monomial(&kept, &Rational::one());
            }
            acc = &acc + &term;
        }
        return Expr::from_poly(reg, acc);
    }
    let mut acc = Expr::zero(reg);
    for (m, c) in p.terms() {
        let mut term = Expr::constant(reg, c.clone());
        for (v, &e) in m.exps().iter().enumerate() {
            if e == 0 {
                continue;
            }
            let factor = match map.get(&v) {
                Some(img) => cache
                    .entry((v, e))
                    .or_insert_with(|| img.pow(e as i32).expect("nonnegative power"))
                    .clone(),
                None => Expr::var(reg, v).pow(e as i32).expect("nonnegative power"),
            };
            term = &term * &factor;
        }
        acc = &acc + &term;
    }
    acc
}

impl Add for &Expr {
    type Output = Expr;
    fn add(self, rhs: &Expr) -> Expr {
        self.check_reg(rhs);
        if rhs.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return rhs.clone();
        }
        if self.den == rhs.den {
            let num = &self.num + &rhs.num;
            if self.den.is_one() {
                return Expr { reg: self.reg.clone(), num, den: self.den.clone() };
            }
            return Expr::canonical(self.reg.clone(), num, self.den.clone());
        }
        if self.den.is_one() {
            let num = &(&self.num * &rhs.den) + &rhs.num;
            return Expr { reg: self.reg.clone(), num, den: rhs.den.clone() };
        }
        if rhs.den.is_one() {
            let num = &self.num + &(&rhs.num * &self.den);
            return Expr { reg: self.reg.clone(), num, den: self.den.clone() };
        }
        let g = gcd(&self.den, &rhs.den);
        let a = self.den.div_exact(&g).expect("gcd divides");
        let b = rhs.den.div_exact(&g).expect("gcd divides");
        let num = &(&self.num * &b) + &(&rhs.num * &a);
        let den = &self.den * &b;
        Expr::canonical(self.reg.clone(), num, den)
    }
}

impl Sub for &Expr {
    type Output = Expr;
    fn sub(self, rhs: &Expr) -> Expr {
        self + &(-rhs)
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr { reg: self.reg.clone(), num: -&self.num, den: self.den.clone() }
    }
}

impl Mul for &Expr {
    type Output = Expr;
    fn mul(self, rhs: &Expr) -> Expr {
        self.check_reg(rhs);
        if self.is_zero() || rhs.is_zero() {
            return Expr::zero(&self.reg);
        }
        if self.den.is_one() && rhs.den.is_one() {
            return Expr { reg: self.reg.clone(), num: &self.num * &rhs.num, den: self.den.clone() };
        }
        let g1 = gcd(&self.num, &rhs.den);
        let g2 = gcd(&rhs.num, &self.den);
        let n1 = self.num.div_exact(&g1).expect("gcd divides");
        let d2 = rhs.den.div_exact(&g1).expect("gcd divides");
        let n2 = rhs.num.div_exact(&g2).expect("gcd divides");
        let d1 = self.den.div_exact(&g2).expect("gcd divides");
        let num = &n1 * &n2;
        let den = &d1 * &d2;
        let (den, lc) = den.make_monic();
        let num = if lc.is_one() { num } else { num.scale(&lc.recip()) };
        Expr { reg: self.reg.clone(), num, den }
    }
}

impl Div for &Expr {
    type Output = Expr;
    /// Panics on division by the zero expression; use [`Expr::checked_div`]
    /// when the divisor is not known to be nonzero.
    fn div(self, rhs: &Expr) -> Expr {
        self.checked_div(rhs).expect("division by zero expression")
    }
}

macro_rules! forward_owned {
    ($($tr:ident $m:ident),*) => {$(
        impl $tr<Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { (&self).$m(&rhs) }
        }
        impl $tr<&Expr> for Expr {
            type Output = Expr;
            fn $m(self, rhs: &Expr) -> Expr { (&self).$m(rhs) }
        }
        impl $tr<Expr> for &Expr {
            type Output = Expr;
            fn $m(self, rhs: Expr) -> Expr { self.$m(&rhs) }
        }
    )*};
}
forward_owned!(Add add, Sub sub, Mul mul, Div div);

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(mut iter: I) -> Expr {
        let first = iter.next().expect("sum of an empty iterator has no registry");
        iter.fold(first, |acc, e| &acc + &e)
    }
}

/// Sums a list of expressions over `reg`, returning zero for an empty list.
pub fn sum_over(reg: &Arc<VariableRegistry>, items: impl IntoIterator<Item = Expr>) -> Expr {
    items.into_iter().fold(Expr::zero(reg), |acc, e| &acc + &e)
}
