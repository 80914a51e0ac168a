//! Dense univariate polynomials over `ℚ` and Sturm-sequence root isolation.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{format_rational, rational_to_f64, Rational};

/// Coefficients lowest degree first, without trailing zeros.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct UniPoly {
    coeffs: Vec<Rational>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<Rational>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        UniPoly { coeffs }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::new(c.iter().map(|&v| Rational::from_integer(v.into())).collect())
    }

    pub fn zero() -> Self {
        UniPoly { coeffs: vec![] }
    }

    pub fn constant(c: Rational) -> Self {
        Self::new(vec![c])
    }

    pub fn x() -> Self {
        Self::from_ints(&[0, 1])
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeffs(&self) -> &[Rational] {
        &self.coeffs
    }

    pub fn coeff(&self, d: usize) -> Rational {
        self.coeffs.get(d).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn lead(&self) -> Rational {
        self.coeffs.last().cloned().unwrap_or_else(Rational::zero)
    }

    pub fn eval(&self, x: &Rational) -> Rational {
        let mut acc = Rational::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        self.coeffs
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, c| acc * x + rational_to_f64(c))
    }

    pub fn derivative(&self) -> Self {
        Self::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(d, c)| c * Rational::from_integer(d.into()))
                .collect(),
        )
    }

    pub fn scale(&self, c: &Rational) -> Self {
        Self::new(self.coeffs.iter().map(|v| v * c).collect())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut out = UniPoly::constant(Rational::one());
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let dd = d.degree().expect("division by the zero polynomial");
        let lead = d.lead();
        let mut r = self.coeffs.clone();
        if r.len() <= dd {
            return (UniPoly::zero(), self.clone());
        }
        let mut q = vec![Rational::zero(); r.len() - dd];
        for k in (0..q.len()).rev() {
            let c = &r[k + dd] / &lead;
            if !c.is_zero() {
                for (i, dc) in d.coeffs.iter().enumerate() {
                    r[k + i] -= &c * dc;
                }
            }
            q[k] = c;
        }
        r.truncate(dd);
        (UniPoly::new(q), UniPoly::new(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        self.scale(&self.lead().recip())
    }

    /// Monic greatest common divisor (zero if both are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let (mut a, mut b) = (self.clone(), other.clone());
        while !b.is_zero() {
            let r = a.div_rem(&b).1;
            a = b;
            b = r.primitive();
        }
        a.monic()
    }

    /// Integer coefficients with unit gcd and positive leading coefficient.
    pub fn primitive(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let c = rational_content(self.coeffs.iter());
        let p = self.scale(&c.recip());
        if p.lead().is_negative() {
            -p
        } else {
            p
        }
    }

    /// `p / gcd(p, p')`, primitive.
    pub fn squarefree_part(&self) -> Self {
        if self.degree().unwrap_or(0) == 0 {
            return self.primitive();
        }
        let g = self.gcd(&self.derivative());
        self.div_rem(&g).0.primitive()
    }
}

/// Positive rational `c` such that all `v / c` are coprime integers.
pub(crate) fn rational_content<'a>(vals: impl Iterator<Item = &'a Rational>) -> Rational {
    let mut num_gcd = BigInt::zero();
    let mut den_lcm = BigInt::one();
    for v in vals {
        if v.is_zero() {
            continue;
        }
        num_gcd = num_gcd.gcd(v.numer());
        den_lcm = den_lcm.lcm(v.denom());
    }
    if num_gcd.is_zero() {
        return Rational::one();
    }
    Rational::new(num_gcd, den_lcm)
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.coeffs.iter().enumerate().rev().map(|(d, c)| (c, vec![("x", d as u32)])))
    }
}

/// Shared pretty-printer for `Σ c · Π var^e`.
pub(crate) fn write_terms<'a>(
    f: &mut fmt::Formatter<'_>,
    terms: impl Iterator<Item = (&'a Rational, Vec<(&'a str, u32)>)>,
) -> fmt::Result {
    let mut first = true;
    for (c, mono) in terms {
        if c.is_zero() {
            continue;
        }
        let vars: Vec<String> = mono
            .iter()
            .filter(|(_, e)| *e > 0)
            .map(|(n, e)| if *e == 1 { n.to_string() } else { format!("{n}^{e}") })
            .collect();
        let mag = c.abs();
        let sign = if c.is_negative() {
            if first { "-" } else { " - " }
        } else if first {
            ""
        } else {
            " + "
        };
        let body = if vars.is_empty() {
            format_rational(&mag)
        } else if mag.is_one() {
            vars.join("*")
        } else {
            format!("{}*{}", format_rational(&mag), vars.join("*"))
        };
        write!(f, "{sign}{body}")?;
        first = false;
    }
    if first {
        write!(f, "0")?;
    }
    Ok(())
}

impl Add for &UniPoly {
    type Output = UniPoly;
    fn add(self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        UniPoly::new((0..n).map(|d| self.coeff(d) + o.coeff(d)).collect())
    }
}

impl Sub for &UniPoly {
    type Output = UniPoly;
    fn sub(self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        UniPoly::new((0..n).map(|d| self.coeff(d) - o.coeff(d)).collect())
    }
}

impl Mul for &UniPoly {
    type Output = UniPoly;
    fn mul(self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![Rational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        UniPoly::new(out)
    }
}

impl Neg for UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.into_iter().map(|c| -c).collect())
    }
}

/// An isolating interval `[lo, hi]` holding exactly one real root.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub lo: Rational,
    pub hi: Rational,
    /// Midpoint of the refined interval.
    pub approx: f64,
}

pub const ROOT_WIDTH: f64 = 1e-12;

struct Sturm {
    seq: Vec<UniPoly>,
}

impl Sturm {
    fn new(p: &UniPoly) -> Self {
        let mut seq = vec![p.clone(), p.derivative()];
        loop {
            let n = seq.len();
            if seq[n - 1].is_zero() {
                seq.pop();
                break;
            }
            let r = seq[n - 2].div_rem(&seq[n - 1]).1;
            if r.is_zero() {
                break;
            }
            // positive rescaling keeps the sign pattern
            let c = rational_content(r.coeffs.iter());
            seq.push(-r.scale(&c.recip()));
        }
        Sturm { seq }
    }

    fn changes(&self, x: &Rational) -> usize {
        let mut count = 0;
        let mut last: Option<bool> = None;
        for p in &self.seq {
            let v = p.eval(x);
            if v.is_zero() {
                continue;
            }
            let s = v.is_positive();
            if last.is_some_and(|l| l != s) {
                count += 1;
            }
            last = Some(s);
        }
        count
    }

    /// Distinct roots in `(a, b]`.
    fn count(&self, a: &Rational, b: &Rational) -> usize {
        self.changes(a) - self.changes(b)
    }
}

/// Real roots of `p ≠ 0`, isolated by Sturm sequences on the squarefree part
/// and refined by bisection to width below [`ROOT_WIDTH`]. Sorted ascending.
pub fn real_roots(p: &UniPoly) -> Result<Vec<RealRoot>> {
    if p.is_zero() {
        return Err(Error::InvalidInput("real_roots of the zero polynomial".into()));
    }
    let q = p.squarefree_part();
    if q.degree() == Some(0) {
        return Ok(vec![]);
    }
    let lead = q.lead().abs();
    let bound = q.coeffs.iter().map(|c| c.abs() / &lead).fold(Rational::zero(), |m, v| if v > m { v } else { m })
        + Rational::one()
        + Rational::one();
    let sturm = Sturm::new(&q);
    let width = Rational::new(1.into(), BigInt::from(10u64.pow(12)));
    let mut out = Vec::new();
    let mut stack = vec![(-bound.clone(), bound)];
    while let Some((lo, hi)) = stack.pop() {
        let n = sturm.count(&lo, &hi);
        if n == 0 {
            continue;
        }
        if n > 1 {
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            stack.push((mid.clone(), hi));
            stack.push((lo, mid));
            continue;
        }
        let (mut lo, mut hi) = (lo, hi);
        while &hi - &lo >= width {
            let mid = (&lo + &hi) / Rational::from_integer(2.into());
            if q.eval(&mid).is_zero() {
                lo = mid.clone();
                hi = mid;
                break;
            }
            if sturm.count(&lo, &mid) == 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let approx = 0.5 * (rational_to_f64(&lo) + rational_to_f64(&hi));
        out.push(RealRoot { lo, hi, approx });
    }
    out.sort_by(|a, b| a.lo.cmp(&b.lo));
    Ok(out)
}

/// `N(x)/D(x)` in lowest terms with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnivariateRationalFunction {
    num: UniPoly,
    den: UniPoly,
}

impl UnivariateRationalFunction {
    pub fn new(num: UniPoly, den: UniPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::InvalidInput("zero denominator".into()));
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_zero() || g.degree() == Some(0) {
            (num, den)
        } else {
            (num.div_rem(&g).0, den.div_rem(&g).0)
        };
        let l = den.lead().recip();
        Ok(UnivariateRationalFunction {
            num: num.scale(&l),
            den: den.scale(&l),
        })
    }

    pub fn numerator(&self) -> &UniPoly {
        &self.num
    }

    pub fn denominator(&self) -> &UniPoly {
        &self.den
    }

    pub fn eval_c64(&self, x: Complex64) -> Complex64 {
        self.num.eval_c64(x) / self.den.eval_c64(x)
    }
}
