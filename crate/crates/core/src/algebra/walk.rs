//! Signed random-walk generating functions and their recursions.
//!
//! For `z ∈ ℂ^L`, `L = 2ℓ + 1`, with `Σ|z_i| < 1`, the "transition weights"
//! `p_ij = z_{j−i+ℓ+1}` (zero when `|i − j| > ℓ`) define path sums
//!
//! * `U_ij` over paths `i → j` (`i, j ∈ 1..ℓ`) staying in `{1, 2, …}`,
//! * `V_ij` over paths staying in `{…, ℓ−1, ℓ}`,
//! * `W_ij` over all paths between states `i−ℓ−1` and `j−ℓ−1`,
//!
//! each summed over lengths `t ≥ 1`. With one-step blocks `A, B, C, D`
//! these satisfy
//!
//! ```text
//! U = (B + A(1+U)C)(1+U)
//! V = (B + C(1+V)A)(1+V)
//! W = (D + diag(C(1+V)A, 0, A(1+U)C))(1+W)
//! ```
//!
//! and row `ℓ+1` of `W` is the Fourier integral
//! `θ_j = −δ_{j,ℓ+1} + (2π)⁻¹∫ e^{−i(j−ℓ−1)x} / (1 − Σ_k z_k e^{i(k−ℓ−1)x}) dx`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};

type C = Complex64;

#[derive(Clone, Debug, PartialEq)]
struct CMat {
    n: usize,
    a: Vec<C>,
}

impl CMat {
    fn zeros(n: usize) -> Self {
        CMat {
            n,
            a: vec![C::new(0.0, 0.0); n * n],
        }
    }

    fn from_fn(n: usize, f: impl Fn(usize, usize) -> C) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.a[i * n + j] = f(i, j);
            }
        }
        m
    }

    fn at(&self, i: usize, j: usize) -> C {
        self.a[i * self.n + j]
    }

    fn plus_identity(&self) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.a[i * self.n + i] += 1.0;
        }
        m
    }

    fn add(&self, o: &Self) -> Self {
        CMat {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x + y).collect(),
        }
    }

    fn mul(&self, o: &Self) -> Self {
        CMat::from_fn(self.n, |i, j| (0..self.n).map(|k| self.at(i, k) * o.at(k, j)).sum())
    }

    fn lerp(&self, o: &Self, w: f64) -> Self {
        CMat {
            n: self.n,
            a: self.a.iter().zip(&o.a).map(|(x, y)| x * (1.0 - w) + y * w).collect(),
        }
    }

    fn max_diff(&self, o: &Self) -> f64 {
        self.a.iter().zip(&o.a).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }
}

/// Path-sum generating functions and the discrepancies between the three
/// ways of computing them.
#[derive(Clone, Debug)]
pub struct RandomWalkReport {
    pub u: Vec<Vec<C>>,
    pub v: Vec<Vec<C>>,
    pub w: Vec<Vec<C>>,
    pub theta: Vec<C>,
    /// Fixed points plugged back into the recursions.
    pub recursion_residual: f64,
    /// Fixed points versus truncated path-sum series.
    pub series_residual: f64,
    /// Quadrature `θ_j` versus `W_{ℓ+1, j}`.
    pub theta_residual: f64,
    pub max_residual: f64,
}

const FP_TOL: f64 = 1e-15;
const FP_MAX_ITER: usize = 20_000;
const THETA_NODES: usize = 512;

struct Blocks {
    a: CMat,
    b: CMat,
    c: CMat,
    d: CMat,
}

fn blocks(z: &[C], ell: usize) -> Blocks {
    let l = 2 * ell + 1;
    let zz = |m: i64| -> C {
        if m >= 1 && m <= l as i64 {
            z[m as usize - 1]
        } else {
            C::new(0.0, 0.0)
        }
    };
    let e = ell as i64;
    // 1-based (i, j) in the formulas
    let a = CMat::from_fn(ell, |i, j| zz(j as i64 + 1 + e - (i as i64 + 1) + e + 1));
    let b = CMat::from_fn(ell, |i, j| zz(j as i64 - i as i64 + e + 1));
    let c = CMat::from_fn(ell, |i, j| zz(j as i64 - i as i64 + 1));
    let d = CMat::from_fn(l, |i, j| zz(j as i64 - i as i64 + e + 1));
    Blocks { a, b, c, d }
}

fn u_map(bl: &Blocks, u: &CMat) -> CMat {
    let one_u = u.plus_identity();
    bl.b.add(&bl.a.mul(&one_u).mul(&bl.c)).mul(&one_u)
}

fn v_map(bl: &Blocks, v: &CMat) -> CMat {
    let one_v = v.plus_identity();
    bl.b.add(&bl.c.mul(&one_v).mul(&bl.a)).mul(&one_v)
}

fn boundary(bl: &Blocks, u: &CMat, v: &CMat, ell: usize) -> CMat {
    let l = 2 * ell + 1;
    let lower = bl.c.mul(&v.plus_identity()).mul(&bl.a);
    let upper = bl.a.mul(&u.plus_identity()).mul(&bl.c);
    CMat::from_fn(l, |i, j| {
        if i < ell && j < ell {
            lower.at(i, j)
        } else if i > ell && j > ell {
            upper.at(i - ell - 1, j - ell - 1)
        } else {
            C::new(0.0, 0.0)
        }
    })
}

/// Damped fixed-point iteration from zero; the step halves whenever the
/// update grows.
fn fixed_point(n: usize, map: impl Fn(&CMat) -> CMat, load: f64) -> Result<CMat> {
    let mut x = CMat::zeros(n);
    let mut omega = 1.0;
    let mut last = f64::INFINITY;
    for it in 0..FP_MAX_ITER {
        let fx = map(&x);
        let change = fx.max_diff(&x);
        if change <= FP_TOL * (1.0 + fx.a.iter().map(|v| v.norm()).fold(0.0, f64::max)) {
            return Ok(fx);
        }
        if change > last {
            omega = (omega * 0.5_f64).max(1.0 / 64.0);
        }
        last = change;
        x = x.lerp(&fx, omega);
        if !x.a.iter().all(|v| v.re.is_finite() && v.im.is_finite()) {
            return Err(Error::NonConvergence {
                re: load,
                im: 0.0,
                iterations: it,
                residual: f64::INFINITY,
            });
        }
    }
    Err(Error::NonConvergence {
        re: load,
        im: 0.0,
        iterations: FP_MAX_ITER,
        residual: last,
    })
}

/// `Σ_{t=1}^{t_max}` of path weights from `start` to each state in `[lo, hi]`,
/// paths confined to `[lo, hi]`.
fn path_sums(z: &[C], ell: usize, t_max: usize, start: i64, lo: i64, hi: i64) -> Vec<C> {
    let n = (hi - lo + 1) as usize;
    let mut cur = vec![C::new(0.0, 0.0); n];
    cur[(start - lo) as usize] = C::new(1.0, 0.0);
    let mut acc = vec![C::new(0.0, 0.0); n];
    for _ in 0..t_max {
        let mut next = vec![C::new(0.0, 0.0); n];
        for (k, zk) in z.iter().enumerate() {
            let step = k as i64 - ell as i64;
            for s in 0..n as i64 {
                let t = s + step;
                if t >= 0 && t < n as i64 {
                    next[t as usize] += zk * cur[s as usize];
                }
            }
        }
        cur = next;
        for (a, c) in acc.iter_mut().zip(&cur) {
            *a += c;
        }
    }
    acc
}

fn to_rows(m: &CMat) -> Vec<Vec<C>> {
    (0..m.n).map(|i| m.a[i * m.n..(i + 1) * m.n].to_vec()).collect()
}

/// Solves the recursions, evaluates the path sums to length `t_max`, computes
/// `θ` by trapezoid quadrature, and reports the discrepancies.
pub fn random_walk_recursion_check(z: &[C], ell: usize, t_max: usize) -> Result<RandomWalkReport> {
    if ell == 0 {
        return Err(Error::InvalidInput("ell must be positive".into()));
    }
    let l = 2 * ell + 1;
    if z.len() != l {
        return Err(Error::InvalidInput(format!(
            "z must have length 2*ell+1 = {l}, got {}",
            z.len()
        )));
    }
    let load: f64 = z.iter().map(|v| v.norm()).sum();
    if !(load < 1.0) {
        return Err(Error::InvalidInput(format!(
            "sum |z_i| = {load} must be below 1"
        )));
    }
    let bl = blocks(z, ell);
    let u = fixed_point(ell, |u| u_map(&bl, u), load)?;
    let v = fixed_point(ell, |v| v_map(&bl, v), load)?;
    let x = boundary(&bl, &u, &v, ell);
    let dx = bl.d.add(&x);
    let w = fixed_point(l, |w| dx.mul(&w.plus_identity()), load)?;

    let recursion_residual = u_map(&bl, &u)
        .max_diff(&u)
        .max(v_map(&bl, &v).max_diff(&v))
        .max(dx.mul(&w.plus_identity()).max_diff(&w));

    let e = ell as i64;
    let reach = e * (t_max as i64 + 1);
    let mut u_ser = CMat::zeros(ell);
    let mut v_ser = CMat::zeros(ell);
    let mut w_ser = CMat::zeros(l);
    for i in 0..ell {
        let s = i as i64 + 1;
        let up = path_sums(z, ell, t_max, s, 1, reach);
        let down = path_sums(z, ell, t_max, s, e - reach, e);
        for j in 0..ell {
            let t = j as i64 + 1;
            u_ser.a[i * ell + j] = up[(t - 1) as usize];
            v_ser.a[i * ell + j] = down[(t - (e - reach)) as usize];
        }
    }
    for i in 0..l {
        let s = i as i64 - e;
        let all = path_sums(z, ell, t_max, s, -reach, reach);
        for j in 0..l {
            w_ser.a[i * l + j] = all[(j as i64 - e + reach) as usize];
        }
    }
    let series_residual = u.max_diff(&u_ser).max(v.max_diff(&v_ser)).max(w.max_diff(&w_ser));

    let theta: Vec<C> = (0..l)
        .map(|j| {
            let shift = j as f64 - e as f64;
            let mut acc = C::new(0.0, 0.0);
            for q in 0..THETA_NODES {
                let xq = 2.0 * PI * q as f64 / THETA_NODES as f64;
                let den: C = C::new(1.0, 0.0)
                    - z.iter()
                        .enumerate()
                        .map(|(k, zk)| zk * C::from_polar(1.0, (k as f64 - e as f64) * xq))
                        .sum::<C>();
                acc += C::from_polar(1.0, -shift * xq) / den;
            }
            let delta = if j == ell { 1.0 } else { 0.0 };
            acc / THETA_NODES as f64 - delta
        })
        .collect();
    let theta_residual = theta
        .iter()
        .enumerate()
        .map(|(j, t)| (t - w.at(ell, j)).norm())
        .fold(0.0, f64::max);

    Ok(RandomWalkReport {
        u: to_rows(&u),
        v: to_rows(&v),
        w: to_rows(&w),
        theta,
        recursion_residual,
        series_residual,
        theta_residual,
        max_residual: recursion_residual.max(series_residual).max(theta_residual),
    })
}
