//! Moments of the limiting spectral measure from the `Φ_n, Ψ_n` recursion:
//! `Ψ_n = ∫ s(·,c') Φ_n(c') P(dc')`, `Σ Φ_n tⁿ = t (1 − t Σ Ψ_n tⁿ)⁻¹`,
//! and `m_k = ⟨P, Φ_{k+1}⟩`.

use num_complex::Complex64;
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::exact::{Coeff, ComplexRational, Rational};
use crate::kernel::Kernel;
pub use crate::nice::{NiceFunction, DEFAULT_DEGREE_CAP};

/// The sequences `Φ_1..Φ_nmax` and `Ψ_1..Ψ_nmax`.
#[derive(Clone, Debug)]
pub struct PhiPsi<T> {
    pub phi: Vec<NiceFunction<T>>,
    pub psi: Vec<NiceFunction<T>>,
}

/// Runs the recursion `Φ_1 = 1`,
/// `Φ_n = Σ_{j+m=n−1, j,m≥1} Ψ_j Φ_m` (n ≥ 2), `Ψ_n = s ⋆ Φ_n`.
pub fn phi_psi_recursion<T: Coeff>(k: &Kernel, nmax: usize, degree_cap: usize) -> Result<PhiPsi<T>> {
    if nmax == 0 {
        return Err(Error::InvalidInput("nmax must be at least 1".into()));
    }
    let part = k.partition();
    let mut phi: Vec<NiceFunction<T>> = Vec::with_capacity(nmax);
    let mut psi: Vec<NiceFunction<T>> = Vec::with_capacity(nmax);
    for n in 1..=nmax {
        let next = if n == 1 {
            NiceFunction::constant(part, T::one())
        } else {
            let mut acc = NiceFunction::zero(part, 0);
            for j in 1..n - 1 {
                let m = n - 1 - j;
                acc = acc.add(&psi[j - 1].mul(&phi[m - 1], degree_cap)?);
            }
            acc
        };
        psi.push(next.pair_with_kernel(k));
        phi.push(next);
    }
    Ok(PhiPsi { phi, psi })
}

/// `m_1..m_kmax` as floats.
pub fn theoretical_moments(k: &Kernel, kmax: usize) -> Result<Vec<f64>> {
    let pp = phi_psi_recursion::<Complex64>(k, kmax + 1, DEFAULT_DEGREE_CAP)?;
    Ok(pp.phi[1..].iter().map(|f| f.mean().re).collect())
}

/// `m_1..m_kmax` in exact rational arithmetic.
pub fn theoretical_moments_exact(k: &Kernel, kmax: usize) -> Result<Vec<Rational>> {
    let pp = phi_psi_recursion::<ComplexRational>(k, kmax + 1, DEFAULT_DEGREE_CAP)?;
    pp.phi[1..]
        .iter()
        .map(|f| {
            let m = f.mean();
            if m.im.is_zero() {
                Ok(m.re)
            } else {
                Err(Error::Internal(format!("moment has imaginary part {}", m.im)))
            }
        })
        .collect()
}

/// `(m_{i+j})_{0 ≤ i,j ≤ size−1}` with `m_0 = 1`; `moments[k−1] = m_k`.
pub fn hankel(moments: &[f64], size: usize) -> Vec<Vec<f64>> {
    let m = |k: usize| if k == 0 { 1.0 } else { moments[k - 1] };
    (0..size).map(|i| (0..size).map(|j| m(i + j)).collect()).collect()
}
