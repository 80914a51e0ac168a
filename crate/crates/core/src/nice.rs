//! Functions on color space that are constant in `x` on each interval of the
//! kernel's partition and trigonometric polynomials in the angle.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{Coeff, Rational};
use crate::kernel::{IntervalPartition, Kernel};

/// Default cap on the trigonometric degree of a [`NiceFunction`].
pub const DEFAULT_DEGREE_CAP: usize = 256;

/// `f(x, ξ) = Σ_{|j| ≤ d} f_j(a) ξ^j` for `x` in interval `a`.
#[derive(Clone, Debug, PartialEq)]
pub struct NiceFunction<T> {
    weights: Vec<Rational>,
    degree: usize,
    /// Row-major `(interval, j + degree)`.
    values: Vec<T>,
}

impl<T: Coeff> NiceFunction<T> {
    pub fn constant(partition: &IntervalPartition, value: T) -> Self {
        let weights = partition.lengths();
        NiceFunction {
            values: vec![value; weights.len()],
            weights,
            degree: 0,
        }
    }

    pub fn zero(partition: &IntervalPartition, degree: usize) -> Self {
        let weights = partition.lengths();
        NiceFunction {
            values: vec![T::zero(); weights.len() * (2 * degree + 1)],
            weights,
            degree,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn num_intervals(&self) -> usize {
        self.weights.len()
    }

    /// Fourier coefficient `f_j(a)`; zero outside the stored degree.
    pub fn get(&self, a: usize, j: i64) -> T {
        if j.unsigned_abs() as usize > self.degree {
            return T::zero();
        }
        self.values[a * (2 * self.degree + 1) + (j + self.degree as i64) as usize].clone()
    }

    pub fn set(&mut self, a: usize, j: i64, v: T) {
        let d = self.degree;
        assert!(j.unsigned_abs() as usize <= d, "index {j} outside degree {d}");
        self.values[a * (2 * d + 1) + (j + d as i64) as usize] = v;
    }

    pub fn add(&self, other: &Self) -> Self {
        let d = self.degree.max(other.degree);
        let mut out = Self {
            weights: self.weights.clone(),
            degree: d,
            values: vec![T::zero(); self.weights.len() * (2 * d + 1)],
        };
        for a in 0..self.num_intervals() {
            for j in -(d as i64)..=d as i64 {
                out.set(a, j, self.get(a, j) + other.get(a, j));
            }
        }
        out
    }

    /// Pointwise product: per-interval convolution of Fourier coefficients.
    pub fn mul(&self, other: &Self, cap: usize) -> Result<Self> {
        let d = self.degree + other.degree;
        if d > cap {
            return Err(Error::DegreeCap { degree: d, cap });
        }
        let mut out = Self {
            weights: self.weights.clone(),
            degree: d,
            values: vec![T::zero(); self.weights.len() * (2 * d + 1)],
        };
        let (d1, d2) = (self.degree as i64, other.degree as i64);
        for a in 0..self.num_intervals() {
            for i in -d1..=d1 {
                let x = self.get(a, i);
                if x.is_zero() {
                    continue;
                }
                for j in -d2..=d2 {
                    let y = other.get(a, j);
                    if y.is_zero() {
                        continue;
                    }
                    let cur = out.get(a, i + j);
                    out.set(a, i + j, cur + x.clone() * y);
                }
            }
        }
        Ok(out)
    }

    /// `c ↦ ∫ s(c, c') f(c') P(dc')`: coefficient `i` on interval `a` is
    /// `Σ_b |I_b| Σ_j s_ij(a,b) f_{−j}(b)`. The result has degree `K`.
    pub fn pair_with_kernel(&self, k: &Kernel) -> Self {
        let band = k.band() as i64;
        let n = self.num_intervals();
        let mut out = Self::zero_like(&self.weights, k.band());
        let w: Vec<T> = self.weights.iter().map(T::from_rational).collect();
        for a in 0..n {
            for i in -band..=band {
                let mut acc = T::zero();
                for b in 0..n {
                    let mut inner = T::zero();
                    for j in -band..=band {
                        let s = k.coeff(i, j, a, b);
                        if s.is_zero() {
                            continue;
                        }
                        let f = self.get(b, -j);
                        if f.is_zero() {
                            continue;
                        }
                        inner = inner + T::from_complex_rational(s) * f;
                    }
                    acc = acc + w[b].clone() * inner;
                }
                out.set(a, i, acc);
            }
        }
        out
    }

    fn zero_like(weights: &[Rational], degree: usize) -> Self {
        NiceFunction {
            weights: weights.to_vec(),
            degree,
            values: vec![T::zero(); weights.len() * (2 * degree + 1)],
        }
    }

    /// `⟨P, f⟩ = Σ_a |I_a| f_0(a)`.
    pub fn mean(&self) -> T {
        (0..self.num_intervals()).fold(T::zero(), |acc, a| {
            acc + T::from_rational(&self.weights[a]) * self.get(a, 0)
        })
    }

    /// Value at angle `θ` on interval `a`.
    pub fn eval(&self, a: usize, theta: f64) -> Complex64 {
        let d = self.degree as i64;
        (-d..=d)
            .map(|j| self.get(a, j).to_c64() * Complex64::from_polar(1.0, j as f64 * theta))
            .sum()
    }

    /// True when `f_{−j}(a) = conj(f_j(a))` for all `a, j`, i.e. `f` is real-valued.
    pub fn is_real(&self) -> bool {
        let d = self.degree as i64;
        (0..self.num_intervals())
            .all(|a| (0..=d).all(|j| self.get(a, -j) == self.get(a, j).conj()))
    }

    /// Min and max of the real part over a uniform grid of `points` angles per interval.
    pub fn grid_range(&self, points: usize) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for a in 0..self.num_intervals() {
            for q in 0..points {
                let v = self.eval(a, 2.0 * std::f64::consts::PI * q as f64 / points as f64).re;
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::{int, rat, ComplexRational};
    use crate::kernel::{kernel_from_filter, Filter};
    use num_complex::Complex;

    fn cr(r: Rational) -> ComplexRational {
        Complex::new(r, int(0))
    }

    #[test]
    fn product_convolves_coefficients() {
        let p = IntervalPartition::unit();
        // f = 1 + cos θ
        let mut f = NiceFunction::<ComplexRational>::zero(&p, 1);
        f.set(0, 0, cr(int(1)));
        f.set(0, 1, cr(rat(1, 2)));
        f.set(0, -1, cr(rat(1, 2)));
        let g = f.mul(&f, 8).unwrap();
        assert_eq!(g.degree(), 2);
        assert_eq!(g.get(0, 0), cr(rat(3, 2)));
        assert_eq!(g.get(0, 1), cr(int(1)));
        assert_eq!(g.get(0, 2), cr(rat(1, 4)));
        assert!(g.is_real());
        assert!(f.mul(&g, 2).is_err());
    }

    #[test]
    fn pairing_with_compass_kernel() {
        let k = kernel_from_filter(&Filter::compass()).unwrap();
        let one = NiceFunction::constant(k.partition(), cr(int(1)));
        // ∫ 4cos²θ cos²θ' dθ'/2π = 2cos²θ = 1 + cos 2θ
        let psi = one.pair_with_kernel(&k);
        assert_eq!(psi.get(0, 0), cr(int(1)));
        assert_eq!(psi.get(0, 2), cr(rat(1, 2)));
        assert_eq!(psi.get(0, -2), cr(rat(1, 2)));
        assert_eq!(psi.get(0, 1), cr(int(0)));
        assert_eq!(psi.mean(), cr(int(1)));
        let v = psi.eval(0, 0.3);
        assert!((v.re - 2.0 * 0.3f64.cos().powi(2)).abs() < 1e-14);
    }
}
