//! Monte Carlo: filtered Wigner matrices, the Gaussian colored model,
//! eigenvalues and empirical spectral statistics.

pub mod eigen;
pub mod rng;

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernel::{kernel_from_filter, Filter, Kernel};
use crate::numeric::{mean_stderr, pairwise_sum};

pub use eigen::{eigen_symmetric, eigenvalues_symmetric, Eigen, Matrix};

/// Largest colored-model parameter; the matrix is `N² × N²`.
pub const MAX_COLORED_N: usize = 64;
pub const MAX_ESD_MOMENT: usize = 10;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryLaw {
    #[default]
    Gaussian,
    Rademacher,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    #[serde(default)]
    pub entry_law: EntryLaw,
    pub trials: usize,
}

impl SampleConfig {
    pub fn new(n: usize, seed: u64, trials: usize) -> Self {
        SampleConfig {
            n,
            seed,
            entry_law: EntryLaw::Gaussian,
            trials,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidInput("trials must be at least 1".into()));
        }
        Ok(())
    }
}

#[inline]
fn draw(law: EntryLaw, block: [u32; 4]) -> f64 {
    match law {
        EntryLaw::Gaussian => rng::gaussian(block),
        EntryLaw::Rademacher => rng::rademacher(block),
    }
}

/// `Y_kℓ` of the i.i.d. symmetric field on `ℤ²`, with `Y_kk = 0`.
#[inline]
pub fn field_entry(seed: u64, law: EntryLaw, trial: u64, k: i64, l: i64) -> f64 {
    if k == l {
        return 0.0;
    }
    let (a, b) = if k < l { (k, l) } else { (l, k) };
    let off = |v: i64| (v as i32 as u32) ^ 0x8000_0000;
    let ctr = [off(a), off(b), trial as u32, (trial >> 32) as u32 & 0x7fff_ffff];
    draw(law, rng::philox4x32(ctr, rng::seed_key(seed)))
}

/// `X_ij = Σ_{k,ℓ} Y_kℓ h(i−k, ℓ−j)` for a single entry (1-based indices, any integers).
pub fn filtered_entry(h: &Filter, seed: u64, law: EntryLaw, trial: u64, i: i64, j: i64) -> f64 {
    h.iter()
        .map(|(&(p, q), v)| crate::exact::rational_to_f64(v) * field_entry(seed, law, trial, i - p, j + q))
        .sum()
}

/// The `N × N` window `{1..N}²` of the filtered Wigner matrix for one trial
/// (unnormalized; divide by `√N` for the spectral scaling).
pub fn sample_filtered_wigner(cfg: &SampleConfig, h: &Filter, trial: u64) -> Result<Matrix> {
    cfg.validate()?;
    let n = cfg.n;
    let r = (h.k() / 2) as i64;
    // Y on [1−r, N+r]²
    let span = n + 2 * r as usize;
    let mut y = vec![0.0; span * span];
    for a in 0..span {
        for b in a + 1..span {
            let v = field_entry(cfg.seed, cfg.entry_law, trial, a as i64 + 1 - r, b as i64 + 1 - r);
            y[a * span + b] = v;
            y[b * span + a] = v;
        }
    }
    let taps: Vec<(i64, i64, f64)> = h
        .iter()
        .map(|(&(p, q), v)| (p, q, crate::exact::rational_to_f64(v)))
        .collect();
    let mut m = Matrix::zeros(n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for &(p, q, v) in &taps {
                // Y_{i−p, j+q} with 1-based i,j
                let a = (i as i64 - p + r) as usize;
                let b = (j as i64 + q + r) as usize;
                acc += v * y[a * span + b];
            }
            m.set(i, j, acc);
            m.set(j, i, acc);
        }
    }
    Ok(m)
}

/// Monte Carlo estimate of `E X_ij X_kℓ` against the kernel coefficient `s_{i−k, ℓ−j}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CovarianceEstimate {
    pub empirical: f64,
    pub stderr: f64,
    pub theoretical: f64,
    pub z_score: f64,
}

/// Checks membership in `Q_K` (distance `> K` from both ends of `{1..N}`)
/// and separation `min(j−i, ℓ−k) > K`.
pub fn general_position(n: usize, k: usize, quad: (i64, i64, i64, i64)) -> Result<()> {
    let (i, j, kk, l) = quad;
    let kb = k as i64;
    let nb = n as i64;
    for (name, v) in [("i", i), ("j", j), ("k", kk), ("l", l)] {
        if !(v > kb && v < nb - kb) {
            return Err(Error::NotGeneralPosition(format!(
                "{name} = {v} must satisfy {kb} < {name} < {}",
                nb - kb
            )));
        }
    }
    if (j - i).min(l - kk) <= kb {
        return Err(Error::NotGeneralPosition(format!(
            "min(j-i, l-k) = {} must exceed K = {kb}",
            (j - i).min(l - kk)
        )));
    }
    Ok(())
}

pub fn covariance_check(h: &Filter, cfg: &SampleConfig, quad: (i64, i64, i64, i64)) -> Result<CovarianceEstimate> {
    cfg.validate()?;
    general_position(cfg.n, h.k(), quad)?;
    let (i, j, k, l) = quad;
    let kernel = kernel_from_filter(h)?;
    let theoretical = kernel.coeff_f64(i - k, l - j, 0, 0).re;
    let products: Vec<f64> = (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| {
            filtered_entry(h, cfg.seed, cfg.entry_law, t, i, j)
                * filtered_entry(h, cfg.seed, cfg.entry_law, t, k, l)
        })
        .collect();
    let (empirical, stderr) = mean_stderr(&products);
    let z_score = if stderr > 0.0 {
        (empirical - theoretical) / stderr
    } else if empirical == theoretical {
        0.0
    } else {
        f64::INFINITY
    };
    Ok(CovarianceEstimate {
        empirical,
        stderr,
        theoretical,
        z_score,
    })
}

/// The Gaussian colored model at parameter `N`: colors
/// `c_{pN+q} = (p/N, e^{2πiq/N})`, entries `2^{δ_ij/2} √s(c_i,c_j) g_{ij}`.
pub struct ColoredModel {
    n: usize,
    root_s: Vec<f64>,
}

impl ColoredModel {
    /// Kernel values below `1e-13·max s` are taken to be exactly zero.
    pub fn new(k: &Kernel, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("N must be at least 1".into()));
        }
        if n > MAX_COLORED_N {
            return Err(Error::SizeGuard {
                what: "colored model N",
                value: n,
                limit: MAX_COLORED_N,
            });
        }
        let dim = n * n;
        let cell: Vec<usize> = (0..n)
            .map(|p| k.partition().locate(p as f64 / n as f64))
            .collect();
        let theta = |q: usize| 2.0 * PI * q as f64 / n as f64;
        let mut s = vec![0.0; dim * dim];
        for ci in 0..dim {
            let (p, q) = (ci / n, ci % n);
            for cj in ci..dim {
                let (p2, q2) = (cj / n, cj % n);
                let v = k.eval_cell(cell[p], cell[p2], theta(q), theta(q2)).re;
                s[ci * dim + cj] = v;
                s[cj * dim + ci] = v;
            }
        }
        let max = s.iter().cloned().fold(0.0, f64::max);
        let floor = 1e-13 * max;
        let root_s = s
            .iter()
            .map(|&v| if v <= floor { 0.0 } else { v.sqrt() })
            .collect();
        Ok(ColoredModel { n, root_s })
    }

    pub fn dim(&self) -> usize {
        self.n * self.n
    }

    /// Unnormalized sample (divide by `N` for the spectral scaling).
    pub fn sample(&self, seed: u64, law: EntryLaw, trial: u64) -> Matrix {
        let dim = self.dim();
        let key = rng::seed_key(seed);
        let mut m = Matrix::zeros(dim);
        for i in 0..dim {
            for j in i..dim {
                let rs = self.root_s[i * dim + j];
                let v = if rs == 0.0 {
                    0.0
                } else {
                    let ctr = [i as u32, j as u32, trial as u32, ((trial >> 32) as u32) | 0x8000_0000];
                    let g = draw(law, rng::philox4x32(ctr, key));
                    if i == j {
                        std::f64::consts::SQRT_2 * rs * g
                    } else {
                        rs * g
                    }
                };
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }
}

/// One colored-model sample of size `N² × N²`; see [`ColoredModel`].
pub fn sample_colored_gaussian(k: &Kernel, n: usize, seed: u64, trial: u64) -> Result<Matrix> {
    Ok(ColoredModel::new(k, n)?.sample(seed, EntryLaw::Gaussian, trial))
}

/// Empirical spectral distribution of one normalized sample.
#[derive(Clone, Debug, PartialEq)]
pub struct Esd {
    /// Sorted eigenvalues of the normalized matrix.
    pub eigenvalues: Vec<f64>,
    /// `m̂_k = n⁻¹ Σ λ_i^k` for `k = 0..=kmax`.
    pub empirical_moments: Vec<f64>,
}

impl Esd {
    /// Eigenvalues of `scale · m`.
    pub fn from_matrix(m: &Matrix, scale: f64, kmax: usize) -> Result<Self> {
        let mut scaled = m.clone();
        scaled.scale(scale);
        let eigenvalues = eigenvalues_symmetric(&scaled)?;
        Ok(Esd::from_eigenvalues(eigenvalues, kmax))
    }

    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>, kmax: usize) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        let n = eigenvalues.len() as f64;
        let empirical_moments = (0..=kmax)
            .map(|k| {
                let powers: Vec<f64> = eigenvalues.iter().map(|x| x.powi(k as i32)).collect();
                pairwise_sum(&powers) / n
            })
            .collect();
        Esd {
            eigenvalues,
            empirical_moments,
        }
    }
}

/// `n⁻¹ tr((scale·m)^k)` for `k = 0..=kmax` by repeated multiplication.
pub fn trace_moments(m: &Matrix, scale: f64, kmax: usize) -> Vec<f64> {
    let n = m.n();
    let mut a = m.clone();
    a.scale(scale);
    let mut out = vec![1.0];
    let mut power = a.clone();
    for k in 1..=kmax {
        if k > 1 {
            power = power.mul(&a);
        }
        out.push(power.trace() / n as f64);
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BinRule {
    #[default]
    FreedmanDiaconis,
    Fixed(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub edges: Vec<f64>,
    /// Fraction of samples per bin; sums to one.
    pub mass: Vec<f64>,
}

const MAX_BINS: usize = 10_000;

pub fn histogram(values: &[f64], rule: BinRule) -> Histogram {
    let mut v: Vec<f64> = values.iter().cloned().filter(|x| x.is_finite()).collect();
    v.sort_by(f64::total_cmp);
    if v.is_empty() {
        return Histogram {
            edges: vec![],
            mass: vec![],
        };
    }
    let (lo, hi) = (v[0], v[v.len() - 1]);
    let bins = match rule {
        BinRule::Fixed(b) => b.max(1),
        BinRule::FreedmanDiaconis => {
            let q = |f: f64| v[((v.len() - 1) as f64 * f).round() as usize];
            let iqr = q(0.75) - q(0.25);
            let width = 2.0 * iqr / (v.len() as f64).cbrt();
            if width > 0.0 && hi > lo {
                (((hi - lo) / width).ceil() as usize).clamp(1, MAX_BINS)
            } else {
                1
            }
        }
    };
    let (lo, hi) = if hi > lo { (lo, hi) } else { (lo - 0.5, hi + 0.5) };
    let width = (hi - lo) / bins as f64;
    let edges: Vec<f64> = (0..=bins).map(|b| lo + width * b as f64).collect();
    let mut counts = vec![0usize; bins];
    for x in &v {
        let b = (((x - lo) / width) as usize).min(bins - 1);
        counts[b] += 1;
    }
    let total = v.len() as f64;
    Histogram {
        edges,
        mass: counts.iter().map(|&c| c as f64 / total).collect(),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MomentEstimate {
    pub k: usize,
    pub mean: f64,
    pub stderr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EsdStatistics {
    pub trials: usize,
    /// `k = 1..=kmax`.
    pub moments: Vec<MomentEstimate>,
    pub histogram: Histogram,
}

/// Trial-averaged moments with standard errors and a pooled histogram.
pub fn esd_statistics(samples: &[Esd], kmax: usize, rule: BinRule) -> Result<EsdStatistics> {
    if kmax > MAX_ESD_MOMENT {
        return Err(Error::InvalidInput(format!(
            "kmax = {kmax} exceeds {MAX_ESD_MOMENT}"
        )));
    }
    if samples.is_empty() {
        return Err(Error::InvalidInput("no samples".into()));
    }
    let moments = (1..=kmax)
        .map(|k| {
            let xs: Vec<f64> = samples
                .iter()
                .map(|s| {
                    s.empirical_moments.get(k).cloned().ok_or_else(|| {
                        Error::InvalidInput(format!("sample lacks moment {k}"))
                    })
                })
                .collect::<Result<_>>()?;
            let (mean, stderr) = mean_stderr(&xs);
            Ok(MomentEstimate { k, mean, stderr })
        })
        .collect::<Result<Vec<_>>>()?;
    let pooled: Vec<f64> = samples.iter().flat_map(|s| s.eigenvalues.iter().cloned()).collect();
    Ok(EsdStatistics {
        trials: samples.len(),
        moments,
        histogram: histogram(&pooled, rule),
    })
}

/// Samples `cfg.trials` filtered Wigner matrices in parallel and returns the
/// spectra of `X/√N`, in trial order.
pub fn simulate_filtered(h: &Filter, cfg: &SampleConfig, kmax: usize) -> Result<Vec<Esd>> {
    cfg.validate()?;
    let scale = 1.0 / (cfg.n as f64).sqrt();
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| Esd::from_matrix(&sample_filtered_wigner(cfg, h, t)?, scale, kmax))
        .collect()
}

/// Samples the colored model with `cfg.n` as the color-grid parameter and
/// returns spectra of `X̃/N`, in trial order.
pub fn simulate_colored(k: &Kernel, cfg: &SampleConfig, kmax: usize) -> Result<Vec<Esd>> {
    cfg.validate()?;
    let model = ColoredModel::new(k, cfg.n)?;
    let scale = 1.0 / cfg.n as f64;
    (0..cfg.trials as u64)
        .into_par_iter()
        .map(|t| Esd::from_matrix(&model.sample(cfg.seed, cfg.entry_law, t), scale, kmax))
        .collect()
}
