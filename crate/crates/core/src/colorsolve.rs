//! Color equations
//!
//! ```text
//! Ψ(c,λ) = ∫ s(c,c') P(dc') / (λ − Ψ(c',λ)),    S(λ) = ∫ P(dc) / (λ − Ψ(c,λ))
//! ```
//!
//! solved for `Ψ` on its exact finite Fourier representation (degree `K` in the
//! angle, constant on intervals), continued from `|λ| > 2A` toward the real
//! axis, and inverted to a spectral density.
//!
//! Sign convention: `S(λ) = ∫ μ(dx)/(λ − x)`, so `Im λ > 0 ⇒ Im S(λ) ≤ 0` and
//! the density is `−π⁻¹ Im S(x + iε)` as `ε → 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::kernel::{validate_kernel, Kernel};
use crate::nice::NiceFunction;
use crate::numeric::solve_complex;

type C = Complex64;

#[derive(Clone, Debug)]
pub struct SolverOptions {
    /// Residual target (sup over quadrature nodes).
    pub tol: f64,
    pub max_iter: usize,
    /// Picard iterations attempted before switching to Newton.
    pub picard_warmup: usize,
    pub newton: bool,
    pub min_nodes: usize,
    pub max_nodes: usize,
    /// Guard on `|λ − Ψ|` at a node.
    pub division_guard: f64,
    /// Relative size of the highest resolved Fourier coefficients of
    /// `1/(λ − Ψ)` above which the angular grid is doubled.
    pub alias_tol: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            max_iter: 100_000,
            picard_warmup: 40,
            newton: true,
            min_nodes: 64,
            max_nodes: 1 << 16,
            division_guard: 1e-14,
            alias_tol: 1e-9,
        }
    }
}

/// Solution of the color equations at one `λ`.
#[derive(Clone, Debug)]
pub struct ColorSolution {
    pub lambda: C,
    /// Fourier coefficients of `Ψ(·,λ)`, degree `K`.
    pub psi: NiceFunction<C>,
    pub stieltjes: C,
    /// Sup over quadrature nodes of `|Ψ − ∫ s/(λ − Ψ)|`.
    pub residual: f64,
    /// Angular nodes per interval used by the quadrature.
    pub nodes: usize,
    pub iterations: usize,
}

/// Sampled density from Stieltjes inversion.
#[derive(Clone, Debug)]
pub struct SpectralGrid {
    pub xs: Vec<f64>,
    /// `(ε₁, ε₂)` used for the Richardson extrapolation.
    pub epsilon: (f64, f64),
    pub density: Vec<f64>,
    /// `true` where the solver failed and `density` is NaN.
    pub failed: Vec<bool>,
    /// Smallest interval outside which the density is below [`SUPPORT_THRESHOLD`].
    pub support_estimate: Option<(f64, f64)>,
}

pub const SUPPORT_THRESHOLD: f64 = 1e-4;

/// Default `(ε₁, ε₂)` for [`density_profile`].
pub const DEFAULT_EPS: (f64, f64) = (1e-2, 5e-3);

/// Kernel tables prepared for repeated solves.
pub struct ColorSolver {
    kernel: Kernel,
    band: i64,
    n: usize,
    weights: Vec<f64>,
    a_bound: f64,
    pub options: SolverOptions,
}

/// Node-level quantities at fixed `(λ, Ψ, M)`.
struct Evaluation {
    /// `T(Ψ)` coefficients.
    image: Vec<C>,
    /// `1/(λ − Ψ)` at nodes, row-major `(interval, node)`.
    g: Vec<C>,
    stieltjes: C,
    residual: f64,
}

impl ColorSolver {
    pub fn new(kernel: &Kernel) -> Self {
        Self::with_options(kernel, SolverOptions::default())
    }

    pub fn with_options(kernel: &Kernel, options: SolverOptions) -> Self {
        let report = validate_kernel(kernel);
        ColorSolver {
            kernel: kernel.clone(),
            band: kernel.band() as i64,
            n: kernel.num_intervals(),
            weights: kernel.partition().lengths_f64(),
            a_bound: report.a_bound,
            options,
        }
    }

    /// `A = 2‖s‖_∞^{1/2}`.
    pub fn a_bound(&self) -> f64 {
        self.a_bound
    }

    pub fn kernel(&self) -> &Kernel {
        &self.kernel
    }

    fn width(&self) -> usize {
        (2 * self.band + 1) as usize
    }

    fn idx(&self, a: usize, i: i64) -> usize {
        a * self.width() + (i + self.band) as usize
    }

    fn to_nice(&self, coeffs: &[C]) -> NiceFunction<C> {
        let mut f = NiceFunction::zero(self.kernel.partition(), self.band as usize);
        for a in 0..self.n {
            for i in -self.band..=self.band {
                f.set(a, i, coeffs[self.idx(a, i)]);
            }
        }
        f
    }

    fn nodes_of(&self, f: &NiceFunction<C>) -> Vec<C> {
        let mut v = vec![C::new(0.0, 0.0); self.n * self.width()];
        for a in 0..self.n {
            for i in -self.band..=self.band {
                v[self.idx(a, i)] = f.get(a, i);
            }
        }
        v
    }

    fn check_domain(&self, lambda: C) -> Result<()> {
        if lambda.im == 0.0 && lambda.norm() <= self.a_bound {
            return Err(Error::InvalidInput(format!(
                "lambda = {lambda} is real with |lambda| <= A = {}",
                self.a_bound
            )));
        }
        if !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::InvalidInput("lambda must be finite".into()));
        }
        Ok(())
    }

    fn roots(m: usize) -> Vec<C> {
        (0..m)
            .map(|r| C::from_polar(1.0, 2.0 * PI * r as f64 / m as f64))
            .collect()
    }

    /// `ĝ_m(b) = M⁻¹ Σ_q g(b,q) e^{−imθ_q}` for `|m| ≤ reach`, row-major `(b, m + reach)`.
    fn fourier(&self, g: &[C], m: usize, roots: &[C], reach: i64) -> Vec<C> {
        let w = (2 * reach + 1) as usize;
        let mut out = vec![C::new(0.0, 0.0); self.n * w];
        let inv = 1.0 / m as f64;
        for b in 0..self.n {
            let row = &g[b * m..(b + 1) * m];
            for freq in -reach..=reach {
                let mut acc = C::new(0.0, 0.0);
                let step = (-freq).rem_euclid(m as i64) as usize;
                let mut r = 0usize;
                for &x in row {
                    acc += x * roots[r];
                    r += step;
                    if r >= m {
                        r -= m;
                    }
                }
                out[b * w + (freq + reach) as usize] = acc * inv;
            }
        }
        out
    }

    /// Values of a degree-`K` coefficient vector at the nodes.
    fn at_nodes(&self, coeffs: &[C], m: usize, roots: &[C]) -> Vec<C> {
        let mut out = vec![C::new(0.0, 0.0); self.n * m];
        for a in 0..self.n {
            for i in -self.band..=self.band {
                let c = coeffs[self.idx(a, i)];
                if c == C::new(0.0, 0.0) {
                    continue;
                }
                let step = i.rem_euclid(m as i64) as usize;
                let mut r = 0usize;
                for q in 0..m {
                    out[a * m + q] += c * roots[r];
                    r += step;
                    if r >= m {
                        r -= m;
                    }
                }
            }
        }
        out
    }

    fn evaluate(&self, lambda: C, psi: &[C], m: usize, roots: &[C]) -> Result<Evaluation> {
        let vals = self.at_nodes(psi, m, roots);
        let mut g = Vec::with_capacity(vals.len());
        for v in &vals {
            let d = lambda - v;
            if d.norm() < self.options.division_guard {
                return Err(Error::DivisionGuard(d.norm()));
            }
            g.push(d.inv());
        }
        let ghat = self.fourier(&g, m, roots, self.band);
        let w = self.width();
        let mut image = vec![C::new(0.0, 0.0); self.n * w];
        for a in 0..self.n {
            for i in -self.band..=self.band {
                let mut acc = C::new(0.0, 0.0);
                for b in 0..self.n {
                    let mut inner = C::new(0.0, 0.0);
                    for j in -self.band..=self.band {
                        let s = self.kernel.coeff_f64(i, j, a, b);
                        if s.re != 0.0 || s.im != 0.0 {
                            inner += s * ghat[b * w + (-j + self.band) as usize];
                        }
                    }
                    acc += inner * self.weights[b];
                }
                image[self.idx(a, i)] = acc;
            }
        }
        let stieltjes = (0..self.n)
            .map(|b| ghat[b * w + self.band as usize] * self.weights[b])
            .sum();
        let diff: Vec<C> = psi.iter().zip(&image).map(|(p, t)| p - t).collect();
        let residual = self
            .at_nodes(&diff, m, roots)
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max);
        Ok(Evaluation {
            image,
            g,
            stieltjes,
            residual,
        })
    }

    /// Jacobian of `T` w.r.t. the coefficients of `Ψ`:
    /// `∂T_{i,a}/∂ψ_{m,b} = |I_b| Σ_j s_ij(a,b) (g²)^_{−(m+j)}(b)`.
    fn jacobian(&self, g: &[C], m: usize, roots: &[C]) -> Vec<C> {
        let g2: Vec<C> = g.iter().map(|x| x * x).collect();
        let reach = 2 * self.band;
        let hat = self.fourier(&g2, m, roots, reach);
        let wide = (2 * reach + 1) as usize;
        let dim = self.n * self.width();
        let mut jac = vec![C::new(0.0, 0.0); dim * dim];
        for a in 0..self.n {
            for i in -self.band..=self.band {
                let row = self.idx(a, i);
                for b in 0..self.n {
                    for mm in -self.band..=self.band {
                        let mut acc = C::new(0.0, 0.0);
                        for j in -self.band..=self.band {
                            let s = self.kernel.coeff_f64(i, j, a, b);
                            if s.re != 0.0 || s.im != 0.0 {
                                acc += s * hat[b * wide + (-(mm + j) + reach) as usize];
                            }
                        }
                        jac[row * dim + self.idx(b, mm)] = acc * self.weights[b];
                    }
                }
            }
        }
        jac
    }

    /// Largest `|ĝ|` among the top frequencies the grid resolves, relative to `max |g|`.
    fn alias_level(&self, g: &[C], m: usize, roots: &[C]) -> f64 {
        let scale = g.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1e-300);
        let mut worst: f64 = 0.0;
        for b in 0..self.n {
            let row = &g[b * m..(b + 1) * m];
            for freq in [m / 2 - 1, m / 2 - 2, 3 * m / 8] {
                let step = (m - freq % m) % m;
                let mut acc = C::new(0.0, 0.0);
                let mut r = 0usize;
                for &x in row {
                    acc += x * roots[r];
                    r = (r + step) % m;
                }
                worst = worst.max(acc.norm() / m as f64 / scale);
            }
        }
        worst
    }

    /// Solves at fixed node count `m`, starting from `psi`.
    fn solve_at(&self, lambda: C, mut psi: Vec<C>, m: usize) -> Result<(Vec<C>, Evaluation, usize)> {
        let roots = Self::roots(m);
        let opts = &self.options;
        let mut eval = self.evaluate(lambda, &psi, m, &roots)?;
        let mut omega = 1.0;
        let mut iters = 0usize;
        let picard_budget = if opts.newton { opts.picard_warmup } else { opts.max_iter };
        let picard = |psi: &mut Vec<C>,
                      eval: &mut Evaluation,
                      omega: &mut f64,
                      iters: &mut usize,
                      budget: usize|
         -> Result<()> {
            let mut steps = 0;
            while eval.residual >= opts.tol && steps < budget {
                let trial: Vec<C> = psi
                    .iter()
                    .zip(&eval.image)
                    .map(|(p, t)| p * (1.0 - *omega) + t * *omega)
                    .collect();
                let next = self.evaluate(lambda, &trial, m, &roots)?;
                if next.residual > eval.residual && *omega > 1.0 / 64.0 {
                    *omega = (*omega * 0.5).max(1.0 / 64.0);
                }
                *psi = trial;
                *eval = next;
                *iters += 1;
                steps += 1;
            }
            Ok(())
        };
        picard(&mut psi, &mut eval, &mut omega, &mut iters, picard_budget)?;
        if eval.residual < opts.tol {
            return Ok((psi, eval, iters));
        }
        if opts.newton {
            let dim = psi.len();
            for _ in 0..60 {
                if eval.residual < opts.tol {
                    break;
                }
                let jac = self.jacobian(&eval.g, m, &roots);
                let mut a = vec![C::new(0.0, 0.0); dim * dim];
                for r in 0..dim {
                    for c in 0..dim {
                        a[r * dim + c] = if r == c { C::new(1.0, 0.0) } else { C::new(0.0, 0.0) } - jac[r * dim + c];
                    }
                }
                let rhs: Vec<C> = psi.iter().zip(&eval.image).map(|(p, t)| t - p).collect();
                let Some(delta) = solve_complex(a, rhs) else { break };
                let mut step = 1.0;
                let mut accepted = false;
                while step > 1e-4 {
                    let trial: Vec<C> = psi.iter().zip(&delta).map(|(p, d)| p + d * step).collect();
                    if let Ok(next) = self.evaluate(lambda, &trial, m, &roots) {
                        if next.residual < eval.residual && self.sign_ok(lambda, &trial, m, &roots) {
                            psi = trial;
                            eval = next;
                            accepted = true;
                            break;
                        }
                    }
                    step *= 0.5;
                }
                iters += 1;
                if !accepted {
                    break;
                }
            }
            if eval.residual < opts.tol {
                return Ok((psi, eval, iters));
            }
            let remaining = opts.max_iter.saturating_sub(iters);
            picard(&mut psi, &mut eval, &mut omega, &mut iters, remaining)?;
        }
        if eval.residual < opts.tol {
            Ok((psi, eval, iters))
        } else {
            Err(Error::NonConvergence {
                re: lambda.re,
                im: lambda.im,
                iterations: iters,
                residual: eval.residual,
            })
        }
    }

    /// Herglotz sign: for `Im λ > 0` the field satisfies `Im Ψ ≤ 0` at every node
    /// (and the mirrored condition below the axis).
    fn sign_ok(&self, lambda: C, psi: &[C], m: usize, roots: &[C]) -> bool {
        if lambda.im == 0.0 {
            return true;
        }
        let slack = 1e-10 * (1.0 + psi.iter().map(|z| z.norm()).fold(0.0, f64::max));
        self.at_nodes(psi, m, roots)
            .iter()
            .all(|v| v.im * lambda.im.signum() <= slack)
    }

    /// Solves the color equations at `λ`, optionally warm-started.
    pub fn solve(&self, lambda: C, warm: Option<&ColorSolution>) -> Result<ColorSolution> {
        self.check_domain(lambda)?;
        let mut psi = match warm {
            Some(w) => self.nodes_of(&w.psi),
            None => vec![C::new(0.0, 0.0); self.n * self.width()],
        };
        let floor = (4 * self.band as usize + 2).max(self.options.min_nodes).next_power_of_two();
        let mut m = warm.map_or(floor, |w| w.nodes.max(floor));
        let mut total = 0;
        loop {
            let (sol, eval, iters) = self.solve_at(lambda, psi, m)?;
            total += iters;
            let roots = Self::roots(m);
            let alias = self.alias_level(&eval.g, m, &roots);
            if alias <= self.options.alias_tol || m >= self.options.max_nodes {
                return Ok(ColorSolution {
                    lambda,
                    psi: self.to_nice(&sol),
                    stieltjes: eval.stieltjes,
                    residual: eval.residual,
                    nodes: m,
                    iterations: total,
                });
            }
            psi = sol;
            m *= 2;
        }
    }

    /// Solves directly when `|λ| > 2A`, otherwise continues from `±4A·i`
    /// on the same side of the real axis (from above for real `λ`).
    pub fn solve_anywhere(&self, lambda: C) -> Result<ColorSolution> {
        self.check_domain(lambda)?;
        if lambda.norm() > 2.0 * self.a_bound {
            return self.solve(lambda, None);
        }
        if lambda.im == 0.0 {
            if let Ok(s) = self.solve(lambda, None) {
                return Ok(s);
            }
        }
        let anchor = C::new(0.0, 4.0 * self.a_bound.max(0.25) * lambda.im.signum());
        Ok(self.path(&[lambda], anchor)?.pop().expect("one target"))
    }

    /// Path-following from `anchor` (`|anchor| > 2A`) through `targets` in order.
    /// Each segment is walked with warm starts, geometric in `Im λ` when
    /// approaching the real axis, and bisected on failure.
    pub fn path(&self, targets: &[C], anchor: C) -> Result<Vec<ColorSolution>> {
        if anchor.norm() <= 2.0 * self.a_bound {
            return Err(Error::InvalidInput(format!(
                "anchor {anchor} must satisfy |anchor| > 2A = {}",
                2.0 * self.a_bound
            )));
        }
        let mut current = self.solve(anchor, None)?;
        let mut out = Vec::with_capacity(targets.len());
        for &t in targets {
            current = self.walk(&current, t)?;
            out.push(current.clone());
        }
        Ok(out)
    }

    fn walk(&self, from: &ColorSolution, to: C) -> Result<ColorSolution> {
        let start = from.lambda;
        if start == to {
            return Ok(from.clone());
        }
        let points = segment_points(start, to);
        let mut current = from.clone();
        for p in points {
            current = self.step(&current, p, 0)?;
        }
        Ok(current)
    }

    fn step(&self, from: &ColorSolution, to: C, depth: usize) -> Result<ColorSolution> {
        let attempt = self.solve(to, Some(from)).and_then(|s| {
            if to.im != 0.0 && s.stieltjes.im * to.im.signum() > 1e-12 {
                Err(Error::NonConvergence {
                    re: to.re,
                    im: to.im,
                    iterations: s.iterations,
                    residual: f64::INFINITY,
                })
            } else {
                Ok(s)
            }
        });
        match attempt {
            Ok(s) => Ok(s),
            Err(e) if depth >= 12 => Err(e),
            Err(_) => {
                let mid = midpoint(from.lambda, to);
                let half = self.step(from, mid, depth + 1)?;
                self.step(&half, to, depth + 1)
            }
        }
    }
}

/// Intermediate points from `a` to `b`: real part linear, imaginary part
/// geometric when both ends lie strictly on the same side of the axis.
fn segment_points(a: C, b: C) -> Vec<C> {
    let same_side = a.im * b.im > 0.0;
    let ratio = if same_side { (a.im / b.im).abs() } else { 1.0 };
    let n_geo = if same_side { ratio.log2().abs().ceil() as usize } else { 0 };
    let n_lin = ((b - a).norm() / 0.5).ceil() as usize;
    let n = n_geo.max(n_lin).max(1);
    (1..=n)
        .map(|k| {
            let t = k as f64 / n as f64;
            let re = a.re + (b.re - a.re) * t;
            let im = if same_side {
                a.im * (b.im / a.im).powf(t)
            } else {
                a.im + (b.im - a.im) * t
            };
            C::new(re, im)
        })
        .collect()
}

fn midpoint(a: C, b: C) -> C {
    if a.im * b.im > 0.0 {
        C::new(0.5 * (a.re + b.re), a.im.signum() * (a.im * b.im).sqrt())
    } else {
        (a + b) * 0.5
    }
}

/// One-shot solve; see [`ColorSolver::solve`].
pub fn solve_color_fixed_point(k: &Kernel, lambda: C, warm: Option<&ColorSolution>) -> Result<ColorSolution> {
    ColorSolver::new(k).solve(lambda, warm)
}

/// One-shot continuation; see [`ColorSolver::path`].
pub fn stieltjes_path(k: &Kernel, targets: &[C], anchor: C) -> Result<Vec<ColorSolution>> {
    ColorSolver::new(k).path(targets, anchor)
}

/// Density `−π⁻¹ Im S(x + iε)` extrapolated linearly in `ε` from `(ε₁, ε₂)`.
///
/// Each grid point is continued from the anchor `4A·i` independently.
/// Points where the solver fails are flagged and carry NaN.
pub fn density_profile(k: &Kernel, xs: &[f64], eps: (f64, f64)) -> Result<SpectralGrid> {
    density_profile_with(&ColorSolver::new(k), xs, eps)
}

pub fn density_profile_with(solver: &ColorSolver, xs: &[f64], eps: (f64, f64)) -> Result<SpectralGrid> {
    let (e1, e2) = eps;
    if !(e1 > 0.0 && e2 > 0.0 && e2 < e1) {
        return Err(Error::InvalidInput(format!(
            "need 0 < eps2 < eps1, got ({e1}, {e2})"
        )));
    }
    let height = 4.0 * solver.a_bound();
    let anchor = solver.solve(C::new(0.0, height), None)?;
    let values: Vec<Option<f64>> = xs
        .par_iter()
        .map(|&x| {
            let top = solver.walk(&anchor, C::new(x, height)).ok()?;
            let s1 = solver.walk(&top, C::new(x, e1)).ok()?;
            let s2 = solver.walk(&s1, C::new(x, e2)).ok()?;
            let d1 = -s1.stieltjes.im / PI;
            let d2 = -s2.stieltjes.im / PI;
            let extrapolated = (e1 * d2 - e2 * d1) / (e1 - e2);
            // extrapolation can undershoot just outside a square-root edge
            Some(extrapolated.max(0.0))
        })
        .collect();
    let failed: Vec<bool> = values.iter().map(Option::is_none).collect();
    let density: Vec<f64> = values.iter().map(|v| v.unwrap_or(f64::NAN)).collect();
    let support_estimate = support_of(xs, &density);
    Ok(SpectralGrid {
        xs: xs.to_vec(),
        epsilon: eps,
        density,
        failed,
        support_estimate,
    })
}

fn support_of(xs: &[f64], density: &[f64]) -> Option<(f64, f64)> {
    let above: Vec<f64> = xs
        .iter()
        .zip(density)
        .filter(|(_, d)| **d >= SUPPORT_THRESHOLD)
        .map(|(x, _)| *x)
        .collect();
    let lo = above.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = above.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    (lo <= hi).then_some((lo, hi))
}

/// Trapezoid integral of `x^k · density` over the grid.
pub fn density_moment(grid: &SpectralGrid, k: u32) -> f64 {
    grid.xs
        .windows(2)
        .zip(grid.density.windows(2))
        .map(|(x, d)| 0.5 * (x[1] - x[0]) * (x[0].powi(k as i32) * d[0] + x[1].powi(k as i32) * d[1]))
        .sum()
}

/// Rank-one factorization `s(c,c') = f(c) f(c')` of a kernel.
#[derive(Clone, Debug)]
pub struct RankOne {
    pub f: NiceFunction<C>,
    pub relative_residual: f64,
}

/// Detects `s(c,c') = f(c) f(c')` from the coefficient table viewed as a
/// matrix over `(i,a) × (j,b)`, to relative tolerance `1e-10`.
pub fn detect_rank_one(k: &Kernel) -> Result<RankOne> {
    let band = k.band() as i64;
    let n = k.num_intervals();
    let w = (2 * band + 1) as usize;
    let dim = n * w;
    let idx = |a: usize, i: i64| a * w + (i + band) as usize;
    let mut mat = vec![C::new(0.0, 0.0); dim * dim];
    for a in 0..n {
        for i in -band..=band {
            for b in 0..n {
                for j in -band..=band {
                    mat[idx(a, i) * dim + idx(b, j)] = k.coeff_f64(i, j, a, b);
                }
            }
        }
    }
    let scale = mat.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return Err(Error::NotRankOne(f64::INFINITY));
    }
    let q = (0..dim)
        .max_by(|&x, &y| mat[x * dim + x].norm().total_cmp(&mat[y * dim + y].norm()))
        .expect("nonempty table");
    let pivot = mat[q * dim + q];
    if pivot.norm() <= 1e-300 {
        return Err(Error::NotRankOne(f64::INFINITY));
    }
    let root = pivot.sqrt();
    let mut fv: Vec<C> = (0..dim).map(|r| mat[r * dim + q] / root).collect();
    let mut worst: f64 = 0.0;
    for r in 0..dim {
        for c in 0..dim {
            worst = worst.max((mat[r * dim + c] - fv[r] * fv[c]).norm());
        }
    }
    let rel = worst / scale;
    if rel > 1e-10 {
        return Err(Error::NotRankOne(rel));
    }
    let lengths = k.partition().lengths_f64();
    let mean: C = (0..n).map(|a| fv[idx(a, 0)] * lengths[a]).sum();
    if mean.re < 0.0 {
        fv.iter_mut().for_each(|z| *z = -*z);
    }
    let mut f = NiceFunction::zero(k.partition(), band as usize);
    for a in 0..n {
        for i in -band..=band {
            f.set(a, i, fv[idx(a, i)]);
        }
    }
    Ok(RankOne {
        f,
        relative_residual: rel,
    })
}

/// `w(λ) = ∫ f(c) P(dc) / (λ − Ψ(c,λ))` for a rank-one kernel.
#[derive(Clone, Debug)]
pub struct RankOneW {
    pub w: C,
    pub solution: ColorSolution,
    /// `|λS − 1 − w²|`.
    pub identity_residual: f64,
}

/// Computes `w(λ)` and checks `λ S(λ) = 1 + w(λ)²`.
pub fn rank_one_w(k: &Kernel, lambda: C) -> Result<RankOneW> {
    let r1 = detect_rank_one(k)?;
    let solver = ColorSolver::new(k);
    let solution = solver.solve_anywhere(lambda)?;
    let m = solution.nodes.max(256);
    let lengths = k.partition().lengths_f64();
    let mut w = C::new(0.0, 0.0);
    for (a, &len) in lengths.iter().enumerate() {
        let mut acc = C::new(0.0, 0.0);
        for q in 0..m {
            let t = 2.0 * PI * q as f64 / m as f64;
            acc += r1.f.eval(a, t) / (lambda - solution.psi.eval(a, t));
        }
        w += acc * (len / m as f64);
    }
    let identity_residual = (lambda * solution.stieltjes - 1.0 - w * w).norm();
    let scale = 1.0 + (lambda * solution.stieltjes).norm();
    if identity_residual > 1e-9 * scale {
        return Err(Error::Internal(format!(
            "rank-one identity lambda*S = 1 + w^2 violated by {identity_residual:.3e}"
        )));
    }
    Ok(RankOneW {
        w,
        solution,
        identity_residual,
    })
}
