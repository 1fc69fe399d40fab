//! Multivariate polynomial gcd over the rationals.
//!
//! Recursive scheme: pick a variable common to both inputs, split off the
//! contents (gcds of the coefficient polynomials in the remaining variables)
//! and run a primitive pseudo-remainder sequence on the primitive parts.
//! Results are monic under the graded lexicographic order.

use num_traits::{One, Zero};

use super::poly::{rat, Monomial, Poly, Rational};

pub fn gcd(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars();
    if a.is_zero() {
        return b.make_monic().0;
    }
    if b.is_zero() {
        return a.make_monic().0;
    }
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    if a.num_terms() == 1 || b.num_terms() == 1 {
        let m = a.monomial_content().gcd(&b.monomial_content());
        return Poly::monomial(m, Rational::one());
    }
    if a == b {
        return a.make_monic().0;
    }
    // Cheap exact-division shortcut: a | b or b | a.
    if a.total_degree() <= b.total_degree() {
        if b.div_exact(a).is_some() {
            return a.make_monic().0;
        }
    } else if a.div_exact(b).is_some() {
        return b.make_monic().0;
    }

    // Pull out the common monomial factor first; it keeps the recursion small.
    let mono = a.monomial_content().gcd(&b.monomial_content());
    let (a, b) = if mono.is_one() {
        (a.clone(), b.clone())
    } else {
        let am = a.monomial_content();
        let bm = b.monomial_content();
        (
            divide_monomial(a, &am),
            divide_monomial(b, &bm),
        )
    };
    let g = gcd_no_monomial(&a, &b);
    let g = g.mul_monomial(&mono, &Rational::one());
    g.make_monic().0
}

fn divide_monomial(p: &Poly, m: &Monomial) -> Poly {
    let mut out = Poly::zero(p.nvars());
    for (k, c) in p.terms() {
        out = &out + &Poly::monomial(m.quotient_of(k), c.clone());
    }
    out
}

fn gcd_no_monomial(a: &Poly, b: &Poly) -> Poly {
    let n = a.nvars();
    if a.is_constant() || b.is_constant() {
        return Poly::one(n);
    }
    let va = a.vars();
    let vb = b.vars();
    // A variable present in only one argument cannot appear in the gcd.
    if let Some(&v) = va.iter().find(|v| !vb.contains(v)) {
        let c = content_in(a, v);
        return gcd(&c, b);
    }
    if let Some(&v) = vb.iter().find(|v| !va.contains(v)) {
        let c = content_in(b, v);
        return gcd(a, &c);
    }
    // Recurse on the variable with the smallest maximal degree.
    let v = *va.iter().min_by_key(|&&v| a.degree_in(v).max(b.degree_in(v))).unwrap();
    let ca = content_in(a, v);
    let cb = content_in(b, v);
    let c = gcd(&ca, &cb);
    if coprime_in(a, b, v) {
        return c;
    }
    let pa = a.div_exact(&ca).expect("content divides");
    let pb = b.div_exact(&cb).expect("content divides");
    let g = primitive_prs(&pa, &pb, v);
    let g = primitive_part_in(&g, v);
    &c * &g
}

/// Gcd of the coefficients of `p` as a polynomial in `v`.
pub fn content_in(p: &Poly, v: usize) -> Poly {
    let coeffs = p.coeffs_in(v);
    let mut g = Poly::zero(p.nvars());
    for c in coeffs.iter().rev() {
        if c.is_zero() {
            continue;
        }
        g = gcd(&g, c);
        if g.is_one() {
            break;
        }
    }
    g
}

pub fn primitive_part_in(p: &Poly, v: usize) -> Poly {
    if p.is_zero() {
        return p.clone();
    }
    let c = content_in(p, v);
    p.div_exact(&c).expect("content divides")
}

/// Coefficients in `v` of `p` with every other variable set from `point`.
fn image_in(p: &Poly, v: usize, point: &[Rational]) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); p.degree_in(v) as usize + 1];
    for (m, c) in p.terms() {
        let mut t = c.clone();
        for (i, x) in point.iter().enumerate() {
            if i != v && m.exp(i) > 0 {
                t *= num_traits::pow(x.clone(), m.exp(i) as usize);
            }
        }
        out[m.exp(v) as usize] += t;
    }
    out
}

fn trim(p: &mut Vec<Rational>) {
    while p.last().is_some_and(Zero::is_zero) {
        p.pop();
    }
}

/// Degree of the gcd of two dense univariate polynomials over Q.
fn univariate_gcd_degree(mut f: Vec<Rational>, mut g: Vec<Rational>) -> usize {
    trim(&mut f);
    trim(&mut g);
    while !g.is_empty() {
        while f.len() >= g.len() {
            let shift = f.len() - g.len();
            let q = f.last().unwrap() / g.last().unwrap();
            for (i, c) in g.iter().enumerate() {
                f[i + shift] -= &q * c;
            }
            f.pop();
            trim(&mut f);
        }
        std::mem::swap(&mut f, &mut g);
    }
    f.len().saturating_sub(1)
}

/// True when the gcd of `a` and `b` has degree 0 in `v`. Specialising the
/// other variables at a point where both leading coefficients in `v` survive
/// can only raise the degree of the gcd, so a constant image settles it.
/// `false` means "unknown".
fn coprime_in(a: &Poly, b: &Poly, v: usize) -> bool {
    let n = a.nvars();
    for attempt in 0..3i64 {
        let point: Vec<Rational> = (0..n as i64).map(|i| rat(3 + 2 * i + 7 * attempt, 1 + attempt)).collect();
        let (fa, fb) = (image_in(a, v, &point), image_in(b, v, &point));
        if fa.last().is_some_and(Zero::is_zero) || fb.last().is_some_and(Zero::is_zero) {
            continue;
        }
        return univariate_gcd_degree(fa, fb) == 0;
    }
    false
}

/// Primitive pseudo-remainder sequence in `v`. Both inputs are primitive in `v`.
fn primitive_prs(a: &Poly, b: &Poly, v: usize) -> Poly {
    let (mut f, mut g) = if a.degree_in(v) >= b.degree_in(v) {
        (a.clone(), b.clone())
    } else {
        (b.clone(), a.clone())
    };
    loop {
        if g.is_zero() {
            return f;
        }
        if g.degree_in(v) == 0 {
            return Poly::one(f.nvars());
        }
        let r = pseudo_remainder(&f, &g, v);
        if r.is_zero() {
            return g;
        }
        f = g;
        g = primitive_part_in(&r, v);
    }
}

/// Sparse pseudo-remainder of `f` by `g` with respect to `v`.
pub fn pseudo_remainder(f: &Poly, g: &Poly, v: usize) -> Poly {
    let n = f.nvars();
    let dg = g.degree_in(v);
    let gc = g.coeffs_in(v);
    let lc = gc[dg as usize].clone();
    let mut r = f.clone();
    while !r.is_zero() && r.degree_in(v) >= dg {
        let dr = r.degree_in(v);
        let lr = r.coeffs_in(v)[dr as usize].clone();
        let shift = Poly::monomial(Monomial::var(n, v, dr - dg), Rational::one());
        r = &(&lc * &r) - &(&(&lr * &shift) * g);
    }
    r
}

/// Squarefree part: `p / gcd(p, ∂p/∂x_1, ..., ∂p/∂x_n)`, made monic.
pub fn squarefree_part(p: &Poly) -> Poly {
    if p.is_zero() || p.is_constant() {
        return p.make_monic().0;
    }
    let mut g = p.clone();
    for v in p.vars() {
        g = gcd(&g, &p.derivative(v));
        if g.is_one() {
            break;
        }
    }
    p.div_exact(&g).expect("gcd divides").make_monic().0
}

pub fn is_unit(p: &Poly) -> bool {
    p.constant_value().is_some_and(|c| !c.is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(n: usize, i: usize) -> Poly {
        Poly::var(n, i)
    }
    fn c(n: usize, k: i64) -> Poly {
        Poly::constant(n, rat(k, 1))
    }

    #[test]
    fn gcd_of_products() {
        let n = 3;
        let (x, y, z) = (v(n, 0), v(n, 1), v(n, 2));
        let common = &(&x * &y) + &(&z + &c(n, 1));
        let a = &common * &(&x - &z);
        let b = &common * &(&(&y * &y) + &c(n, 3));
        let g = gcd(&a, &b);
        assert_eq!(g, common.make_monic().0);
    }

    #[test]
    fn coprime_is_one() {
        let n = 2;
        let (x, y) = (v(n, 0), v(n, 1));
        let a = &(&x * &x) + &c(n, 1);
        let b = &(&x * &y) - &c(n, 2);
        assert!(gcd(&a, &b).is_one());
    }

    #[test]
    fn dense_coprime_inputs_are_fast() {
        // Quotient-rule shape: gcd(a'd - a d', d^2) with d = b^2 + 1.
        let n = 3;
        let (x, y, z) = (v(n, 0), v(n, 1), v(n, 2));
        let xyz = &(&x * &y) * &z;
        let a = &(&xyz * &xyz) - &(&c(n, 3) * &(&x * &z));
        let b = &(&(&c(n, 4) * &xyz) * &xyz) + &(&(&y * &y) - &(&c(n, 2) * &(&(&x * &y) * &(&z * &z))));
        let d = &(&b * &b) + &c(n, 1);
        let num = &(&a.derivative(0) * &d) - &(&a * &d.derivative(0));
        assert!(gcd(&num, &(&d * &d)).is_one());
        let g = gcd(&(&num * &b), &(&d * &b));
        assert_eq!(g, b.make_monic().0);
    }

    #[test]
    fn monomial_gcd() {
        let n = 2;
        let (x, y) = (v(n, 0), v(n, 1));
        let a = &(&x * &x) * &y;
        let b = &(&(&x * &y) * &y) + &(&x * &y);
        assert_eq!(gcd(&a, &b), &x * &y);
    }

    #[test]
    fn squarefree() {
        let n = 2;
        let (x, y) = (v(n, 0), v(n, 1));
        assert_eq!(squarefree_part(&(&x * &x)), x);
        let p = &(&(&x + &y) * &(&x + &y)) * &y;
        assert_eq!(squarefree_part(&p), (&(&x + &y) * &y).make_monic().0);
    }
}
