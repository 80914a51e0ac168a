//! Wigner set partitions, their trees and pairing permutations, and tree
//! integrals. Summing tree integrals over all Wigner partitions of `k` gives
//! the k-th moment by brute force; this is the oracle for the generating
//! function recursion in [`crate::moments`].

use std::collections::BTreeSet;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{rational_to_f64, Coeff, ComplexRational, Rational};
use crate::kernel::Kernel;
use crate::numeric::pairwise_sum;

/// Largest moment order accepted by [`moments_by_enumeration`].
pub const MAX_ENUMERATION_ORDER: usize = 16;

/// A Wigner set partition of `{1..k}` with its tree and canonical permutations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WignerPartition {
    k: usize,
    /// Parts as sorted 1-based index lists, ordered by smallest element.
    parts: Vec<Vec<usize>>,
    /// Part label (0-based, by order of first appearance) of each index `1..=k`.
    labels: Vec<usize>,
    /// Tree edges as pairs of part labels `(min, max)`.
    edges: Vec<(usize, usize)>,
    tau: Vec<usize>,
    sigma: Vec<usize>,
}

impl WignerPartition {
    /// Builds the partition from a restricted growth string (part label of each
    /// index, labels numbered by first appearance) and checks every invariant.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        let k = labels.len();
        if k == 0 || k % 2 == 1 {
            return Err(Error::InvalidInput(format!(
                "Wigner partitions need even positive k, got {k}"
            )));
        }
        let mut next = 0;
        for &l in &labels {
            if l > next {
                return Err(Error::InvalidInput(
                    "labels must be numbered by first appearance".into(),
                ));
            }
            if l == next {
                next += 1;
            }
        }
        let nparts = next;
        let mut parts = vec![Vec::new(); nparts];
        for (i, &l) in labels.iter().enumerate() {
            parts[l].push(i + 1);
        }
        for i in 0..k {
            if labels[i] == labels[(i + 1) % k] {
                return Err(Error::InvalidInput(format!(
                    "indices {} and {} lie in the same part",
                    i + 1,
                    (i + 1) % k + 1
                )));
            }
        }
        let edges: BTreeSet<(usize, usize)> = (0..k)
            .map(|i| {
                let (a, b) = (labels[i], labels[(i + 1) % k]);
                (a.min(b), a.max(b))
            })
            .collect();
        if nparts != k / 2 + 1 || edges.len() != k / 2 {
            return Err(Error::InvalidInput(format!(
                "graph has {nparts} vertices and {} edges; a Wigner partition of {k} needs {} and {}",
                edges.len(),
                k / 2 + 1,
                k / 2
            )));
        }
        let mut p = WignerPartition {
            k,
            parts,
            labels,
            edges: edges.into_iter().collect(),
            tau: Vec::new(),
            sigma: Vec::new(),
        };
        let (tau, sigma) = canonical_permutations(&p)?;
        p.tau = tau;
        p.sigma = sigma;
        Ok(p)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn parts(&self) -> &[Vec<usize>] {
        &self.parts
    }

    /// Part label of index `i ∈ 1..=k`, extended periodically.
    pub fn part_of(&self, i: usize) -> usize {
        self.labels[(i + self.k - 1) % self.k]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// `τ(i)` for `i ∈ 1..=k`.
    pub fn tau(&self, i: usize) -> usize {
        self.tau[i - 1]
    }

    /// `σ(i)` for `i ∈ 1..=k`.
    pub fn sigma(&self, i: usize) -> usize {
        self.sigma[i - 1]
    }

    pub fn sigma_table(&self) -> &[usize] {
        &self.sigma
    }

    pub fn tau_table(&self) -> &[usize] {
        &self.tau
    }

    /// Children lists of the tree rooted at the part containing index 1, and a
    /// post-order of the parts.
    fn rooted(&self) -> (Vec<Vec<usize>>, Vec<usize>) {
        let n = self.parts.len();
        let mut adj = vec![Vec::new(); n];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut children = vec![Vec::new(); n];
        let mut order = Vec::with_capacity(n);
        let mut stack = vec![(0usize, usize::MAX)];
        while let Some((v, parent)) = stack.pop() {
            order.push(v);
            for &u in &adj[v] {
                if u != parent {
                    children[v].push(u);
                    stack.push((u, v));
                }
            }
        }
        order.reverse();
        (children, order)
    }
}

/// All Wigner set partitions of `{1..k}` in lexicographic order of their
/// label sequences. Empty for odd `k`.
///
/// Generated from Dyck paths: an up step visits a new child, a down step
/// returns to the parent, and index `i` belongs to the vertex occupied before
/// step `i`.
pub fn enumerate_wigner_partitions(k: usize) -> Vec<WignerPartition> {
    if k == 0 || k % 2 == 1 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut path = Vec::with_capacity(k);
    dyck(k / 2, 0, 0, &mut path, &mut |steps| {
        let mut stack = vec![0usize];
        let mut fresh = 1;
        let mut labels = Vec::with_capacity(k);
        for &up in steps {
            labels.push(*stack.last().expect("walk stays on the tree"));
            if up {
                stack.push(fresh);
                fresh += 1;
            } else {
                stack.pop();
            }
        }
        out.push(WignerPartition::from_labels(labels).expect("Dyck paths give Wigner partitions"));
    });
    out.sort_by(|a, b| a.labels.cmp(&b.labels));
    out
}

fn dyck(half: usize, ups: usize, height: usize, path: &mut Vec<bool>, emit: &mut dyn FnMut(&[bool])) {
    if path.len() == 2 * half {
        emit(path);
        return;
    }
    if ups < half {
        path.push(true);
        dyck(half, ups + 1, height + 1, path, emit);
        path.pop();
    }
    if height > 0 {
        path.push(false);
        dyck(half, ups, height - 1, path, emit);
        path.pop();
    }
}

/// `τ_π` cycles each part in increasing order; `σ_π = η_k⁻¹ ∘ τ_π` with
/// `η_k = (1 2 ⋯ k)`. Fails if `σ_π` is not a fixed-point-free involution.
pub fn canonical_permutations(p: &WignerPartition) -> Result<(Vec<usize>, Vec<usize>)> {
    let k = p.k;
    let mut tau = vec![0; k];
    for part in &p.parts {
        for (r, &i) in part.iter().enumerate() {
            tau[i - 1] = part[(r + 1) % part.len()];
        }
    }
    let sigma: Vec<usize> = tau.iter().map(|&t| if t == 1 { k } else { t - 1 }).collect();
    for i in 1..=k {
        let s = sigma[i - 1];
        if s == i {
            return Err(Error::InvalidInput(format!("sigma fixes {i}")));
        }
        if sigma[s - 1] != i {
            return Err(Error::InvalidInput(format!(
                "sigma is not an involution at {i}"
            )));
        }
    }
    Ok((tau, sigma))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TreeIntegralMode {
    /// Product angular grid exact for the total trigonometric degree, with
    /// the spatial integral as a weighted sum over interval cells.
    Quadrature,
    /// Exact finite sum over Fourier labelings with per-vertex zero-sum
    /// constraints (pure-Fourier kernels only).
    FourierLattice,
}

/// Tree integral `𝔼 M_π = 𝔼 ∏_{edges} s(κ_A, κ_B)`.
pub fn tree_integral(k: &Kernel, p: &WignerPartition, mode: TreeIntegralMode) -> Result<f64> {
    match mode {
        TreeIntegralMode::Quadrature => Ok(QuadratureGrid::new(k, p.k).integrate(p)),
        TreeIntegralMode::FourierLattice => {
            let v: Complex64 = lattice_integral(k, p)?;
            Ok(v.re)
        }
    }
}

/// Exact tree integral by the Fourier lattice sum.
pub fn tree_integral_exact(k: &Kernel, p: &WignerPartition) -> Result<Rational> {
    let v: ComplexRational = lattice_integral(k, p)?;
    if !v.im.is_zero() {
        return Err(Error::Internal(format!(
            "tree integral has nonzero imaginary part {}",
            v.im
        )));
    }
    Ok(v.re)
}

/// Grid of colors `(interval a, θ_q = 2πq/M)` with the kernel tabulated on
/// all pairs of grid points.
struct QuadratureGrid {
    weights: Vec<f64>,
    table: Vec<f64>,
    size: usize,
}

impl QuadratureGrid {
    /// `M = 2K·k + 1` angular nodes per interval: the trapezoid rule is exact
    /// for every integrand a tree of `k/2` edges can produce.
    fn new(kernel: &Kernel, k: usize) -> Self {
        let m = 2 * kernel.band() * k + 1;
        let lengths = kernel.partition().lengths_f64();
        let n = lengths.len();
        let size = n * m;
        let mut weights = Vec::with_capacity(size);
        for &len in &lengths {
            weights.extend(std::iter::repeat_n(len / m as f64, m));
        }
        let angle = |q: usize| 2.0 * std::f64::consts::PI * (q % m) as f64 / m as f64;
        let mut table = vec![0.0; size * size];
        for p in 0..size {
            for q in 0..size {
                table[p * size + q] = kernel.eval_cell(p / m, q / m, angle(p), angle(q)).re;
            }
        }
        QuadratureGrid {
            weights,
            table,
            size,
        }
    }

    /// Leaf elimination: each vertex sends its parent
    /// `m(c) = ∫ s(c,c') ∏_{children} m_child(c') P(dc')`.
    fn integrate(&self, p: &WignerPartition) -> f64 {
        let (children, order) = p.rooted();
        let mut messages: Vec<Option<Vec<f64>>> = vec![None; children.len()];
        for &v in &order {
            let mut prod = vec![1.0; self.size];
            for &c in &children[v] {
                let m = messages[c].take().expect("children precede parents in post-order");
                prod.iter_mut().zip(&m).for_each(|(x, y)| *x *= y);
            }
            if v == 0 {
                let terms: Vec<f64> = prod.iter().zip(&self.weights).map(|(x, w)| x * w).collect();
                return pairwise_sum(&terms);
            }
            let weighted: Vec<f64> = prod.iter().zip(&self.weights).map(|(x, w)| x * w).collect();
            let msg = (0..self.size)
                .map(|r| {
                    let row = &self.table[r * self.size..(r + 1) * self.size];
                    row.iter().zip(&weighted).map(|(s, x)| s * x).sum()
                })
                .collect();
            messages[v] = Some(msg);
        }
        unreachable!("root is last in post-order")
    }
}

/// Laurent polynomial in one circle variable: `coeffs[e - lo]` is the
/// coefficient of `ξ^e`.
#[derive(Clone, Debug)]
struct Laurent<T> {
    lo: i64,
    coeffs: Vec<T>,
}

impl<T: Coeff> Laurent<T> {
    fn one() -> Self {
        Laurent {
            lo: 0,
            coeffs: vec![T::one()],
        }
    }

    fn get(&self, e: i64) -> T {
        let idx = e - self.lo;
        if idx < 0 || idx as usize >= self.coeffs.len() {
            T::zero()
        } else {
            self.coeffs[idx as usize].clone()
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut coeffs = vec![T::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, x) in self.coeffs.iter().enumerate() {
            if x.is_zero() {
                continue;
            }
            for (j, y) in other.coeffs.iter().enumerate() {
                coeffs[i + j] = coeffs[i + j].clone() + x.clone() * y.clone();
            }
        }
        Laurent {
            lo: self.lo + other.lo,
            coeffs,
        }
    }
}

fn lattice_integral<T: Coeff>(kernel: &Kernel, p: &WignerPartition) -> Result<T> {
    if !kernel.is_pure_fourier() {
        return Err(Error::InvalidInput(format!(
            "Fourier-lattice mode needs a single-interval kernel, got {} intervals",
            kernel.num_intervals()
        )));
    }
    let band = kernel.band() as i64;
    let coeff = |i: i64, j: i64| T::from_complex_rational(kernel.coeff(i, j, 0, 0));
    let (children, order) = p.rooted();
    let mut messages: Vec<Option<Laurent<T>>> = vec![None; children.len()];
    for &v in &order {
        let mut prod = Laurent::one();
        for &c in &children[v] {
            let m = messages[c].take().expect("children precede parents in post-order");
            prod = prod.mul(&m);
        }
        if v == 0 {
            return Ok(prod.get(0));
        }
        // edge factor s(κ_parent, κ_v) = Σ s_ij ξ_parent^i ξ_v^j; integrating
        // ξ_v keeps the terms whose total exponent in ξ_v vanishes
        let coeffs = (-band..=band)
            .map(|i| {
                (-band..=band).fold(T::zero(), |acc, j| {
                    let c = coeff(i, j);
                    if c.is_zero() {
                        acc
                    } else {
                        acc + c * prod.get(-j)
                    }
                })
            })
            .collect();
        messages[v] = Some(Laurent { lo: -band, coeffs });
    }
    unreachable!("root is last in post-order")
}

/// `m_k = Σ_{π ∈ 𝒲_k} 𝔼 M_π` for `k = 1..=kmax`.
pub fn moments_by_enumeration(
    k: &Kernel,
    kmax: usize,
    mode: TreeIntegralMode,
) -> Result<Vec<f64>> {
    guard(kmax)?;
    if mode == TreeIntegralMode::FourierLattice && !k.is_pure_fourier() {
        return Err(Error::InvalidInput(
            "Fourier-lattice mode needs a single-interval kernel".into(),
        ));
    }
    let mut out = Vec::with_capacity(kmax);
    for order in 1..=kmax {
        let parts = enumerate_wigner_partitions(order);
        if parts.is_empty() {
            out.push(0.0);
            continue;
        }
        let values: Vec<f64> = match mode {
            TreeIntegralMode::Quadrature => {
                let grid = QuadratureGrid::new(k, order);
                parts.par_iter().map(|p| grid.integrate(p)).collect()
            }
            TreeIntegralMode::FourierLattice => parts
                .par_iter()
                .map(|p| lattice_integral::<Complex64>(k, p).map(|v| v.re))
                .collect::<Result<_>>()?,
        };
        out.push(pairwise_sum(&values));
    }
    Ok(out)
}

/// Exact-rational moments by enumeration (pure-Fourier kernels).
pub fn moments_by_enumeration_exact(k: &Kernel, kmax: usize) -> Result<Vec<Rational>> {
    guard(kmax)?;
    let mut out = Vec::with_capacity(kmax);
    for order in 1..=kmax {
        let parts = enumerate_wigner_partitions(order);
        let values: Vec<Rational> = parts
            .par_iter()
            .map(|p| tree_integral_exact(k, p))
            .collect::<Result<_>>()?;
        out.push(values.into_iter().fold(Rational::zero(), |a, b| a + b));
    }
    Ok(out)
}

fn guard(kmax: usize) -> Result<()> {
    if kmax > MAX_ENUMERATION_ORDER {
        return Err(Error::SizeGuard {
            what: "kmax",
            value: kmax,
            limit: MAX_ENUMERATION_ORDER,
        });
    }
    Ok(())
}

/// Catalan number `C_n`.
pub fn catalan(n: usize) -> u64 {
    (0..n).fold(1u64, |c, i| c * 2 * (2 * i as u64 + 1) / (i as u64 + 2))
}

pub fn moments_to_f64(m: &[Rational]) -> Vec<f64> {
    m.iter().map(rational_to_f64).collect()
}
