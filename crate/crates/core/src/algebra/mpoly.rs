//! Sparse multivariate polynomials over `ℚ`, Sylvester resultants by
//! fraction-free (Bareiss) elimination, and discriminants.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use num_traits::{One, Signed, Zero};

use super::poly::{rational_content, write_terms, UniPoly};
use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, Rational};

/// Terms keyed by exponent vector; the map order is lexicographic with
/// variable 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MPoly {
    nvars: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl MPoly {
    pub fn zero(nvars: usize) -> Self {
        MPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        let mut p = Self::zero(nvars);
        if !c.is_zero() {
            p.terms.insert(vec![0; nvars], c);
        }
        p
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Self::from_terms(nvars, [(e, Rational::one())])
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Vec<u32>, Rational)>) -> Self {
        let mut p = Self::zero(nvars);
        for (e, c) in terms {
            assert_eq!(e.len(), nvars, "exponent vector length");
            p.add_term(e, c);
        }
        p
    }

    fn add_term(&mut self, e: Vec<u32>, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            Entry::Vacant(slot) => {
                slot.insert(c);
            }
            Entry::Occupied(mut slot) => {
                *slot.get_mut() += c;
                if slot.get().is_zero() {
                    slot.remove();
                }
            }
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Degree in variable `v` (0 for the zero polynomial).
    pub fn degree_in(&self, v: usize) -> u32 {
        self.terms.keys().map(|e| e[v]).max().unwrap_or(0)
    }

    /// Coefficient of `x_v^d`, as a polynomial with `x_v` absent.
    pub fn coeff_in(&self, v: usize, d: u32) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] == d {
                let mut e2 = e.clone();
                e2[v] = 0;
                out.terms.insert(e2, c.clone());
            }
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> MPoly {
        if c.is_zero() {
            return MPoly::zero(self.nvars);
        }
        MPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn pow(&self, k: u32) -> MPoly {
        let mut out = MPoly::one(self.nvars);
        for _ in 0..k {
            out = &out * self;
        }
        out
    }

    /// Multiplies by `Π x_i^{e_i}`.
    pub fn shift(&self, e: &[u32]) -> MPoly {
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.iter().zip(e).map(|(a, b)| a + b).collect(), v.clone()))
                .collect(),
        }
    }

    /// Componentwise minimum exponent over all terms.
    pub fn monomial_content(&self) -> Vec<u32> {
        let mut m: Option<Vec<u32>> = None;
        for e in self.terms.keys() {
            m = Some(match m {
                None => e.clone(),
                Some(m) => m.iter().zip(e).map(|(a, b)| *a.min(b)).collect(),
            });
        }
        m.unwrap_or_else(|| vec![0; self.nvars])
    }

    /// Divides out the largest monomial factor.
    pub fn strip_monomial(&self) -> MPoly {
        let m = self.monomial_content();
        MPoly {
            nvars: self.nvars,
            terms: self
                .terms
                .iter()
                .map(|(k, v)| (k.iter().zip(&m).map(|(a, b)| a - b).collect(), v.clone()))
                .collect(),
        }
    }

    pub fn leading(&self) -> Option<(&Vec<u32>, &Rational)> {
        self.terms.iter().next_back()
    }

    /// Integer coefficients with unit gcd and positive lexicographic leading coefficient.
    pub fn primitive(&self) -> MPoly {
        if self.is_zero() {
            return self.clone();
        }
        let c = rational_content(self.terms.values());
        let sign = if self.leading().expect("nonzero").1.is_negative() {
            -Rational::one()
        } else {
            Rational::one()
        };
        self.scale(&(sign / c))
    }

    /// Exact quotient `self / d`, or `None` if `d` does not divide `self`.
    pub fn exact_div(&self, d: &MPoly) -> Option<MPoly> {
        let (de, dc) = d.leading()?;
        let (de, dc) = (de.clone(), dc.clone());
        let mut r = self.clone();
        let mut q = MPoly::zero(self.nvars);
        while let Some((re, rc)) = r.leading() {
            if re.iter().zip(&de).any(|(a, b)| a < b) {
                return None;
            }
            let e: Vec<u32> = re.iter().zip(&de).map(|(a, b)| a - b).collect();
            let c = rc / &dc;
            let t = MPoly::from_terms(self.nvars, [(e, c)]);
            r = &r - &(&t * d);
            q = &q + &t;
        }
        Some(q)
    }

    pub fn eval_c64(&self, x: &[Complex64]) -> Complex64 {
        self.terms
            .iter()
            .map(|(e, c)| {
                e.iter()
                    .zip(x)
                    .fold(Complex64::new(rational_to_f64(c), 0.0), |acc, (k, v)| acc * v.powu(*k))
            })
            .sum()
    }

    /// Reads a polynomial that involves only `x_keep` as univariate.
    pub fn to_univariate(&self, keep: usize) -> Result<UniPoly> {
        let mut coeffs = vec![Rational::zero(); self.degree_in(keep) as usize + 1];
        for (e, c) in &self.terms {
            if e.iter().enumerate().any(|(i, k)| i != keep && *k != 0) {
                return Err(Error::InvalidInput(
                    "polynomial depends on more than one variable".into(),
                ));
            }
            coeffs[e[keep] as usize] += c;
        }
        Ok(UniPoly::new(coeffs))
    }

    pub fn from_univariate(nvars: usize, v: usize, p: &UniPoly) -> MPoly {
        MPoly::from_terms(
            nvars,
            p.coeffs().iter().enumerate().map(|(d, c)| {
                let mut e = vec![0; nvars];
                e[v] = d as u32;
                (e, c.clone())
            }),
        )
    }

    pub fn derivative(&self, v: usize) -> MPoly {
        let mut out = MPoly::zero(self.nvars);
        for (e, c) in &self.terms {
            if e[v] > 0 {
                let mut e2 = e.clone();
                e2[v] -= 1;
                out.add_term(e2, c * Rational::from_integer(e[v].into()));
            }
        }
        out
    }

    pub fn display_with<'a>(&'a self, names: &'a [&'a str]) -> impl fmt::Display + 'a {
        struct D<'a>(&'a MPoly, &'a [&'a str]);
        impl fmt::Display for D<'_> {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write_terms(
                    f,
                    self.0
                        .terms
                        .iter()
                        .rev()
                        .map(|(e, c)| (c, self.1.iter().cloned().zip(e.iter().cloned()).collect())),
                )
            }
        }
        D(self, names)
    }
}

impl Add for &MPoly {
    type Output = MPoly;
    fn add(self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Sub for &MPoly {
    type Output = MPoly;
    fn sub(self, o: &MPoly) -> MPoly {
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &MPoly {
    type Output = MPoly;
    fn mul(self, o: &MPoly) -> MPoly {
        let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, v| !v.is_zero());
        MPoly {
            nvars: self.nvars,
            terms: acc,
        }
    }
}

impl Neg for &MPoly {
    type Output = MPoly;
    fn neg(self) -> MPoly {
        self.scale(&-Rational::one())
    }
}

/// Determinant by Bareiss fraction-free elimination with row pivoting.
pub fn bareiss_det(mut m: Vec<Vec<MPoly>>, nvars: usize) -> MPoly {
    let n = m.len();
    if n == 0 {
        return MPoly::one(nvars);
    }
    let mut prev = MPoly::one(nvars);
    let mut negate = false;
    for k in 0..n - 1 {
        if m[k][k].is_zero() {
            match (k + 1..n).find(|&r| !m[r][k].is_zero()) {
                Some(r) => {
                    m.swap(k, r);
                    negate = !negate;
                }
                None => return MPoly::zero(nvars),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let num = &(&m[i][j] * &m[k][k]) - &(&m[i][k] * &m[k][j]);
                m[i][j] = num
                    .exact_div(&prev)
                    .expect("Bareiss quotients are exact");
            }
            m[i][k] = MPoly::zero(nvars);
        }
        prev = m[k][k].clone();
    }
    let det = m[n - 1][n - 1].clone();
    if negate {
        -&det
    } else {
        det
    }
}

/// Sylvester resultant of `p` and `q` with respect to variable `v`.
pub fn resultant(p: &MPoly, q: &MPoly, v: usize) -> Result<MPoly> {
    if p.nvars != q.nvars {
        return Err(Error::InvalidInput("variable counts differ".into()));
    }
    if p.is_zero() || q.is_zero() {
        return Err(Error::Degenerate("resultant with the zero polynomial".into()));
    }
    let (m, n) = (p.degree_in(v) as usize, q.degree_in(v) as usize);
    if m == 0 && n == 0 {
        return Err(Error::Degenerate(
            "both polynomials are constant in the eliminated variable".into(),
        ));
    }
    let nv = p.nvars;
    let pc: Vec<MPoly> = (0..=m).rev().map(|d| p.coeff_in(v, d as u32)).collect();
    let qc: Vec<MPoly> = (0..=n).rev().map(|d| q.coeff_in(v, d as u32)).collect();
    let size = m + n;
    let mut mat = vec![vec![MPoly::zero(nv); size]; size];
    for i in 0..n {
        for (k, c) in pc.iter().enumerate() {
            mat[i][i + k] = c.clone();
        }
    }
    for i in 0..m {
        for (k, c) in qc.iter().enumerate() {
            mat[n + i][i + k] = c.clone();
        }
    }
    Ok(bareiss_det(mat, nv))
}

/// `(−1)^{n(n−1)/2} res_v(F, ∂F/∂v) / lc_v(F)`, `n = deg_v F ≥ 1`.
pub fn discriminant(f: &MPoly, v: usize) -> Result<MPoly> {
    let n = f.degree_in(v);
    if n == 0 {
        return Err(Error::InvalidInput(
            "discriminant needs positive degree in the variable".into(),
        ));
    }
    let lc = f.coeff_in(v, n);
    if lc.is_zero() {
        return Err(Error::Degenerate("zero leading coefficient".into()));
    }
    let res = resultant(f, &f.derivative(v), v)?;
    let q = res
        .exact_div(&lc)
        .ok_or_else(|| Error::Internal("leading coefficient does not divide the resultant".into()))?;
    Ok(if (n * (n - 1) / 2) % 2 == 1 { -&q } else { q })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::int;

    fn p2(terms: &[(u32, u32, i64)]) -> MPoly {
        MPoly::from_terms(2, terms.iter().map(|&(a, b, c)| (vec![a, b], int(c))))
    }

    #[test]
    fn arithmetic_and_division() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let a = &(&x + &y) * &(&x - &y);
        assert_eq!(a, p2(&[(2, 0, 1), (0, 2, -1)]));
        assert_eq!(a.exact_div(&(&x - &y)).unwrap(), &x + &y);
        assert!(a.exact_div(&(&x + &MPoly::one(2))).is_none());
        assert!((&x - &x).is_zero());
    }

    #[test]
    fn small_resultants() {
        // variables (w, a, b)
        let w = MPoly::var(3, 0);
        let a = MPoly::var(3, 1);
        let b = MPoly::var(3, 2);
        assert_eq!(resultant(&(&w - &a), &(&w - &b), 0).unwrap(), &a - &b);
        // res_w(w² − X, w − Y) = Y² − X
        let x = MPoly::var(3, 1);
        let y = MPoly::var(3, 2);
        let r = resultant(&(&w.pow(2) - &x), &(&w - &y), 0).unwrap();
        assert_eq!(r, &y.pow(2) - &x);
        assert!(matches!(
            resultant(&a, &b, 0),
            Err(Error::Degenerate(_))
        ));
    }

    #[test]
    fn small_discriminants() {
        // F(X, Y) = Y² − X → 4X
        let f = p2(&[(0, 2, 1), (1, 0, -1)]);
        assert_eq!(discriminant(&f, 1).unwrap(), p2(&[(1, 0, 4)]));
        let g = p2(&[(0, 2, 1), (0, 1, -3), (0, 0, 1)]);
        assert_eq!(discriminant(&g, 1).unwrap(), p2(&[(0, 0, 5)]));
    }

    #[test]
    fn common_factor_kills_resultant() {
        let x = MPoly::var(2, 0);
        let y = MPoly::var(2, 1);
        let common = &x - &(&y + &MPoly::one(2));
        let p = &common * &(&x + &y);
        let q = &common * &(&x.pow(2) - &MPoly::constant(2, int(3)));
        assert!(resultant(&p, &q, 0).unwrap().is_zero());
        assert!(!resultant(&(&x + &y), &(&x.pow(2) - &MPoly::constant(2, int(3))), 0)
            .unwrap()
            .is_zero());
    }
}
