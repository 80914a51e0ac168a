//! Plane curves `F(λ, S) = 0` satisfied by Stieltjes transforms, their
//! numerical certification, and elimination for rank-one kernels.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde_json::{json, Value};

use super::mpoly::{discriminant, resultant, MPoly};
use super::poly::{real_roots, RealRoot, UniPoly, UnivariateRationalFunction};
use crate::colorsolve::{detect_rank_one, ColorSolver};
use crate::error::{Error, Result};
use crate::exact::{format_rational, rational_from_json, Rational};
use crate::kernel::Kernel;

const X: usize = 0;
const Y: usize = 1;

/// `F(X, Y) = Σ c_{ij} X^i Y^j` over `ℚ`; `X` plays `λ` and `Y` plays `S`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BivariatePolynomial(MPoly);

impl BivariatePolynomial {
    pub fn from_terms(terms: impl IntoIterator<Item = (u32, u32, Rational)>) -> Self {
        BivariatePolynomial(MPoly::from_terms(2, terms.into_iter().map(|(i, j, c)| (vec![i, j], c))))
    }

    pub fn from_ints(terms: &[(u32, u32, i64)]) -> Self {
        Self::from_terms(terms.iter().map(|&(i, j, c)| (i, j, Rational::from_integer(c.into()))))
    }

    pub fn from_mpoly(p: MPoly) -> Result<Self> {
        if p.nvars() != 2 {
            return Err(Error::InvalidInput("bivariate polynomial needs 2 variables".into()));
        }
        Ok(BivariatePolynomial(p))
    }

    pub fn as_mpoly(&self) -> &MPoly {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// `(deg_X, deg_Y, coefficient)` in lexicographic order.
    pub fn terms(&self) -> Vec<(u32, u32, Rational)> {
        self.0.terms().map(|(e, c)| (e[X], e[Y], c.clone())).collect()
    }

    pub fn degree_x(&self) -> u32 {
        self.0.degree_in(X)
    }

    pub fn degree_y(&self) -> u32 {
        self.0.degree_in(Y)
    }

    /// `F_j(X)`, the coefficient of `Y^j`.
    pub fn coeff_y(&self, j: u32) -> UniPoly {
        self.0.coeff_in(Y, j).to_univariate(X).expect("coefficient is free of Y")
    }

    pub fn eval(&self, x: Complex64, y: Complex64) -> Complex64 {
        self.0.eval_c64(&[x, y])
    }

    /// Removes monomial factors, the content in each variable (factors
    /// depending on one variable only), and the rational constant.
    pub fn normalized(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut p = self.0.strip_monomial();
        let cx = (0..=p.degree_in(Y))
            .map(|j| p.coeff_in(Y, j).to_univariate(X).expect("free of Y"))
            .fold(UniPoly::zero(), |g, c| g.gcd(&c));
        if cx.degree().unwrap_or(0) > 0 {
            p = p.exact_div(&MPoly::from_univariate(2, X, &cx)).expect("content divides");
        }
        let cy = (0..=p.degree_in(X))
            .map(|i| p.coeff_in(X, i).to_univariate(Y).expect("free of X"))
            .fold(UniPoly::zero(), |g, c| g.gcd(&c));
        if cy.degree().unwrap_or(0) > 0 {
            p = p.exact_div(&MPoly::from_univariate(2, Y, &cy)).expect("content divides");
        }
        BivariatePolynomial(p.primitive())
    }

    /// Equality up to a nonzero rational factor.
    pub fn same_up_to_constant(&self, other: &Self) -> bool {
        self.0.primitive() == other.0.primitive()
    }

    /// Discriminant in `Y`, as a polynomial in `X`.
    pub fn discriminant_y(&self) -> Result<UniPoly> {
        discriminant(&self.0, Y)?.to_univariate(X)
    }

    /// `F_n(X) · D(X)` with `n = deg_Y F`: its real roots contain every
    /// point where the real branch of the curve can start or stop.
    pub fn branch_locus(&self) -> Result<UniPoly> {
        Ok(&self.coeff_y(self.degree_y()) * &self.discriminant_y()?)
    }

    /// Real roots of [`Self::branch_locus`].
    pub fn branch_points(&self) -> Result<Vec<RealRoot>> {
        real_roots(&self.branch_locus()?)
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .terms()
            .into_iter()
            .map(|(i, j, c)| json!([i, j, format_rational(&c)]))
            .collect();
        json!({ "coeffs": coeffs })
    }

    /// Parses `{"coeffs":[[dx,dy,"p/q"],...]}`.
    pub fn from_json(doc: &Value) -> Result<Self> {
        let coeffs = doc
            .get("coeffs")
            .and_then(Value::as_array)
            .ok_or_else(|| Error::Parse("curve needs a \"coeffs\" array".into()))?;
        let mut terms = Vec::with_capacity(coeffs.len());
        for e in coeffs {
            let e = e
                .as_array()
                .filter(|e| e.len() == 3)
                .ok_or_else(|| Error::Parse(format!("curve term {e} is not [dx,dy,coefficient]")))?;
            let deg = |v: &Value| {
                v.as_u64()
                    .map(|d| d as u32)
                    .ok_or_else(|| Error::Parse(format!("bad exponent {v}")))
            };
            terms.push((deg(&e[0])?, deg(&e[1])?, rational_from_json(&e[2])?));
        }
        Ok(Self::from_terms(terms))
    }

    pub fn display_with<'a>(&'a self, names: &'a [&'a str; 2]) -> impl fmt::Display + 'a {
        self.0.display_with(names)
    }
}

impl fmt::Display for BivariatePolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.display_with(&["X", "Y"]))
    }
}

/// Max over `λ` of `|F(λ, S(λ))| / |F_n(λ)|` with `S` from the color-equation
/// solver and `F_n` the leading coefficient in `Y` (or the largest
/// coefficient where `F_n(λ)` vanishes).
pub fn verify_curve(f: &BivariatePolynomial, k: &Kernel, lambdas: &[Complex64]) -> Result<f64> {
    verify_curve_with(f, &ColorSolver::new(k), lambdas)
}

pub fn verify_curve_with(f: &BivariatePolynomial, solver: &ColorSolver, lambdas: &[Complex64]) -> Result<f64> {
    if f.is_zero() {
        return Err(Error::InvalidInput("the zero polynomial is not a curve".into()));
    }
    let n = f.degree_y();
    let coeffs: Vec<UniPoly> = (0..=n).map(|j| f.coeff_y(j)).collect();
    let mut worst: f64 = 0.0;
    for &lambda in lambdas {
        let s = solver.solve_anywhere(lambda)?.stieltjes;
        let vals: Vec<Complex64> = coeffs.iter().map(|c| c.eval_c64(lambda)).collect();
        let lead = vals[n as usize].norm();
        let scale = if lead > 0.0 {
            lead
        } else {
            vals.iter().map(|v| v.norm()).fold(0.0, f64::max)
        };
        let value = vals
            .iter()
            .rev()
            .fold(Complex64::new(0.0, 0.0), |acc, v| acc * s + v);
        worst = worst.max(value.norm() / scale);
    }
    Ok(worst)
}

/// Transform of the law of `f`, as a rational function or as a polynomial
/// relation `R(m, T) = 0` satisfied by `T = S_f(m)` (variables `X = m`, `Y = T`).
#[derive(Clone, Debug, PartialEq)]
pub enum SfInput {
    Rational(UnivariateRationalFunction),
    Relation(BivariatePolynomial),
}

impl SfInput {
    /// `R(m, T)`; a rational `N/D` becomes `D(m)·T − N(m)`.
    pub fn relation(&self) -> BivariatePolynomial {
        match self {
            SfInput::Relation(r) => r.clone(),
            SfInput::Rational(f) => {
                let mut terms = Vec::new();
                for (d, c) in f.denominator().coeffs().iter().enumerate() {
                    terms.push((d as u32, 1, c.clone()));
                }
                for (d, c) in f.numerator().coeffs().iter().enumerate() {
                    terms.push((d as u32, 0, -c.clone()));
                }
                BivariatePolynomial::from_terms(terms)
            }
        }
    }

    /// Parses `{"relation": {"coeffs": ...}}` or
    /// `{"rational": {"num": [c0, c1, ...], "den": [...]}}`.
    pub fn from_json(doc: &Value) -> Result<Self> {
        if let Some(r) = doc.get("relation") {
            return Ok(SfInput::Relation(BivariatePolynomial::from_json(r)?));
        }
        if let Some(r) = doc.get("rational") {
            let list = |key: &str| -> Result<UniPoly> {
                let arr = r
                    .get(key)
                    .and_then(Value::as_array)
                    .ok_or_else(|| Error::Parse(format!("rational S_f needs \"{key}\"")))?;
                Ok(UniPoly::new(arr.iter().map(rational_from_json).collect::<Result<_>>()?))
            };
            return Ok(SfInput::Rational(UnivariateRationalFunction::new(list("num")?, list("den")?)?));
        }
        Err(Error::Parse("expected a \"relation\" or \"rational\" field".into()))
    }

    pub fn to_json(&self) -> Value {
        match self {
            SfInput::Relation(r) => json!({ "relation": r.to_json() }),
            SfInput::Rational(f) => {
                let list = |p: &UniPoly| p.coeffs().iter().map(format_rational).collect::<Vec<_>>();
                json!({ "rational": { "num": list(f.numerator()), "den": list(f.denominator()) } })
            }
        }
    }
}

/// Candidate curve for a rank-one kernel before certification.
///
/// With `w(λ) = ∫ f/(λ − Ψ) dP` one has `λS = 1 + w²` and
/// `S_f(λ/w) = w(1 + w²)/λ`. Substituting into `R(m, T)` and clearing
/// denominators gives `G(λ, w)`; `w` is eliminated against `w² + 1 − λS`.
pub fn rank_one_candidate(sf: &SfInput) -> Result<BivariatePolynomial> {
    let rel = sf.relation();
    if rel.is_zero() {
        return Err(Error::InvalidInput("S_f relation is zero".into()));
    }
    if rel.degree_y() == 0 {
        return Err(Error::InvalidInput("S_f relation does not involve S_f".into()));
    }
    // variables (λ, S, w)
    let (a_max, b_max) = (rel.degree_x(), rel.degree_y());
    let w = MPoly::var(3, 2);
    let one_plus_w2 = &MPoly::one(3) + &w.pow(2);
    let mut g = MPoly::zero(3);
    for (a, b, c) in rel.terms() {
        let mono = one_plus_w2.pow(b).shift(&[a + b_max - b, 0, b + a_max - a]).scale(&c);
        g = &g + &mono;
    }
    let g = g.strip_monomial();
    if g.is_zero() {
        return Err(Error::EliminationCollapse("substituted relation vanishes identically".into()));
    }
    let lambda = MPoly::var(3, 0);
    let s = MPoly::var(3, 1);
    let h = &one_plus_w2 - &(&lambda * &s);
    let res = resultant(&g, &h, 2)?;
    if res.is_zero() {
        return Err(Error::EliminationCollapse(format!(
            "resultant vanishes: G = {} shares a factor with w^2 + 1 - lambda*S",
            g.display_with(&["lambda", "S", "w"])
        )));
    }
    let biv = MPoly::from_terms(2, res.terms().map(|(e, c)| (vec![e[0], e[1]], c.clone())));
    let curve = BivariatePolynomial(biv).normalized();
    if curve.degree_y() == 0 {
        return Err(Error::EliminationCollapse(format!(
            "only factors free of S survive: {}",
            BivariatePolynomial(MPoly::from_terms(2, res.terms().map(|(e, c)| (vec![e[0], e[1]], c.clone()))))
                .display_with(&["lambda", "S"])
        )));
    }
    Ok(curve)
}

/// Certified output of [`rank_one_eliminate`].
#[derive(Clone, Debug)]
pub struct CertifiedCurve {
    pub curve: BivariatePolynomial,
    pub residual: f64,
    pub sample_lambdas: Vec<Complex64>,
}

pub const CURVE_TOL: f64 = 1e-8;

/// Sample points `R e^{iπ(j+½)/n}` with `R = 2A + 1`, off the real axis.
pub fn certification_points(a_bound: f64, n: usize) -> Vec<Complex64> {
    let r = 2.0 * a_bound + 1.0;
    (0..2 * n)
        .map(|j| Complex64::from_polar(r, PI * (j as f64 + 0.5) / n as f64))
        .collect()
}

/// Eliminates `w` for the rank-one kernel `k` and certifies the result with
/// [`verify_curve`]; a curve is returned only if its residual is below [`CURVE_TOL`].
pub fn rank_one_eliminate(sf: &SfInput, k: &Kernel) -> Result<CertifiedCurve> {
    detect_rank_one(k)?;
    let curve = rank_one_candidate(sf)?;
    let solver = ColorSolver::new(k);
    let sample_lambdas = certification_points(solver.a_bound(), 8);
    let residual = verify_curve_with(&curve, &solver, &sample_lambdas)?;
    if !(residual < CURVE_TOL) {
        return Err(Error::Unverified(residual));
    }
    Ok(CertifiedCurve {
        curve,
        residual,
        sample_lambdas,
    })
}

/// `4λ²S⁴ − λ³S³ − λ²S² + λS + 1`, the curve of the compass-filter kernel.
pub fn compass_quartic() -> BivariatePolynomial {
    BivariatePolynomial::from_ints(&[(2, 4, 4), (3, 3, -1), (2, 2, -1), (1, 1, 1), (0, 0, 1)])
}

/// `S_f(m)² m(m − 2) = 1` for `f = 2cos²θ`.
pub fn compass_sf_relation() -> SfInput {
    SfInput::Relation(BivariatePolynomial::from_ints(&[(2, 2, 1), (1, 2, -2), (0, 0, -1)]))
}

impl std::ops::Mul for &BivariatePolynomial {
    type Output = BivariatePolynomial;
    fn mul(self, o: &BivariatePolynomial) -> BivariatePolynomial {
        BivariatePolynomial(&self.0 * &o.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat};

    #[test]
    fn json_round_trip() {
        let q = compass_quartic();
        let back = BivariatePolynomial::from_json(&q.to_json()).unwrap();
        assert_eq!(q, back);
        let parsed = BivariatePolynomial::from_json(&serde_json::json!({"coeffs": [[0, 2, "1/2"], [1, 0, -3]]})).unwrap();
        assert_eq!(parsed.terms(), vec![(0, 2, rat(1, 2)), (1, 0, int(-3))]);
        assert!(BivariatePolynomial::from_json(&serde_json::json!({"coeffs": [[0, 2]]})).is_err());
    }

    #[test]
    fn normalization_strips_one_variable_factors() {
        let core = BivariatePolynomial::from_ints(&[(0, 2, 1), (1, 1, -1), (0, 0, 1)]);
        let junk = BivariatePolynomial::from_ints(&[(1, 0, 2), (0, 0, -4)]); // 2X − 4
        let mono = BivariatePolynomial::from_ints(&[(3, 1, -6)]);
        let p = &(&core * &junk) * &mono;
        let n = p.normalized();
        assert!(n.same_up_to_constant(&core));
        assert_eq!((n.degree_x(), n.degree_y()), (1, 2));
    }

    #[test]
    fn compass_candidate_and_discriminant() {
        let c = rank_one_candidate(&compass_sf_relation()).unwrap();
        assert!(c.same_up_to_constant(&compass_quartic()));
        let d = compass_quartic().discriminant_y().unwrap();
        let expect = UniPoly::from_ints(&[0, 0, 0, 0, 0, 0, -1024 * -16, 0, 107 * -16, 0, 8 * -16]);
        assert_eq!(d.primitive(), expect.primitive());
    }

    #[test]
    fn atom_at_one_gives_semicircle() {
        let sf = SfInput::Rational(UnivariateRationalFunction::new(UniPoly::from_ints(&[1]), UniPoly::from_ints(&[-1, 1])).unwrap());
        let c = rank_one_candidate(&sf).unwrap();
        assert!(c.same_up_to_constant(&BivariatePolynomial::from_ints(&[(0, 2, 1), (1, 1, -1), (0, 0, 1)])));
    }

    #[test]
    fn sf_json_forms() {
        let r = compass_sf_relation();
        assert_eq!(SfInput::from_json(&r.to_json()).unwrap(), r);
        let doc = serde_json::json!({"rational": {"num": ["-1", "1"], "den": [0, -2, 1]}});
        let parsed = SfInput::from_json(&doc).unwrap();
        assert_eq!(parsed.relation().degree_y(), 1);
        assert!(SfInput::from_json(&serde_json::json!({})).is_err());
    }
}
