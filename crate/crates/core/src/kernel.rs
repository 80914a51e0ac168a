//! Color space, covariance kernels and filters.
//!
//! A color is a pair `(x, ξ)` with `x ∈ [0,1]` and `ξ = e^{iθ}` on the unit
//! circle. A kernel is stored as its finite Fourier table
//! `s(c,c') = Σ_{i,j} s_ij(x,y) ξ^i η^j`, with `s_ij` constant on each cell
//! `I_a × I_b` of an interval partition.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::{Complex, Complex64};
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::exact::{
    format_rational, int, rational_from_json, rational_to_f64, ComplexRational, Rational,
};

/// Imaginary residue tolerated when a kernel value is known to be real.
pub const REAL_TOL: f64 = 1e-12;

/// Strictly increasing rational breakpoints `0 = b_0 < b_1 < ... < b_n = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct IntervalPartition {
    breakpoints: Vec<Rational>,
}

impl IntervalPartition {
    pub fn new(breakpoints: Vec<Rational>) -> Result<Self> {
        if breakpoints.len() < 2 {
            return Err(Error::InvalidInput(
                "interval partition needs at least two breakpoints".into(),
            ));
        }
        if !breakpoints[0].is_zero() || breakpoints[breakpoints.len() - 1] != int(1) {
            return Err(Error::InvalidInput(
                "interval partition must start at 0 and end at 1".into(),
            ));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(IntervalPartition { breakpoints })
    }

    /// The trivial partition `{[0,1]}`.
    pub fn unit() -> Self {
        IntervalPartition {
            breakpoints: vec![int(0), int(1)],
        }
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    /// Number of intervals.
    pub fn len(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn lengths(&self) -> Vec<Rational> {
        self.breakpoints
            .windows(2)
            .map(|w| &w[1] - &w[0])
            .collect()
    }

    pub fn lengths_f64(&self) -> Vec<f64> {
        self.lengths().iter().map(rational_to_f64).collect()
    }

    /// Index of the interval containing `x`; intervals are half-open except the last.
    pub fn locate(&self, x: f64) -> usize {
        let n = self.len();
        for a in 1..n {
            if x < rational_to_f64(&self.breakpoints[a]) {
                return a - 1;
            }
        }
        n - 1
    }
}

/// A point of color space: spatial coordinate `x ∈ [0,1]` and angle `θ` of `ξ = e^{iθ}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ColorPoint {
    pub x: f64,
    pub theta: f64,
}

impl ColorPoint {
    pub fn new(x: f64, theta: f64) -> Self {
        ColorPoint { x, theta }
    }
}

/// Piecewise-constant-in-space, finite-Fourier-in-angle covariance kernel.
#[derive(Clone, Debug, PartialEq)]
pub struct Kernel {
    partition: IntervalPartition,
    band: usize,
    coeffs: Vec<ComplexRational>,
    coeffs_f64: Vec<Complex64>,
}

impl Kernel {
    /// Builds a kernel from a sparse list of `(i, j, a, b, value)` entries.
    /// Entries not listed are zero. No invariant other than indexing is checked
    /// here; see [`validate_kernel`].
    pub fn from_entries(
        partition: IntervalPartition,
        band: usize,
        entries: impl IntoIterator<Item = (i64, i64, usize, usize, ComplexRational)>,
    ) -> Result<Self> {
        let n = partition.len();
        let width = 2 * band + 1;
        let mut coeffs = vec![ComplexRational::zero(); width * width * n * n];
        for (i, j, a, b, v) in entries {
            if i.unsigned_abs() as usize > band || j.unsigned_abs() as usize > band {
                return Err(Error::InvalidInput(format!(
                    "Fourier index ({i},{j}) outside band {band}"
                )));
            }
            if a >= n || b >= n {
                return Err(Error::InvalidInput(format!(
                    "interval index ({a},{b}) outside partition of {n} intervals"
                )));
            }
            let idx = Self::flat(band, n, i, j, a, b);
            coeffs[idx] = coeffs[idx].clone() + v;
        }
        let coeffs_f64 = coeffs
            .iter()
            .map(|c| Complex64::new(rational_to_f64(&c.re), rational_to_f64(&c.im)))
            .collect();
        Ok(Kernel {
            partition,
            band,
            coeffs,
            coeffs_f64,
        })
    }

    /// The constant kernel `s ≡ 1` on a single interval.
    pub fn constant_one() -> Self {
        Kernel::from_entries(
            IntervalPartition::unit(),
            0,
            [(0, 0, 0, 0, Complex::new(int(1), int(0)))],
        )
        .expect("constant kernel is well formed")
    }

    /// Rank-one spatial kernel `s(c,c') = f(x) f(y)` with `f` constant on each interval.
    pub fn spatial_rank_one(partition: IntervalPartition, values: &[Rational]) -> Result<Self> {
        if values.len() != partition.len() {
            return Err(Error::InvalidInput(
                "one value per interval is required".into(),
            ));
        }
        let n = values.len();
        let mut entries = Vec::with_capacity(n * n);
        for a in 0..n {
            for b in 0..n {
                entries.push((0, 0, a, b, Complex::new(&values[a] * &values[b], int(0))));
            }
        }
        Kernel::from_entries(partition, 0, entries)
    }

    fn flat(band: usize, n: usize, i: i64, j: i64, a: usize, b: usize) -> usize {
        let width = 2 * band + 1;
        let ii = (i + band as i64) as usize;
        let jj = (j + band as i64) as usize;
        ((ii * width + jj) * n + a) * n + b
    }

    pub fn partition(&self) -> &IntervalPartition {
        &self.partition
    }

    /// Fourier support bound `K`: `s_ij = 0` unless `|i|,|j| ≤ K`.
    pub fn band(&self) -> usize {
        self.band
    }

    pub fn num_intervals(&self) -> usize {
        self.partition.len()
    }

    pub fn is_pure_fourier(&self) -> bool {
        self.partition.len() == 1
    }

    pub fn coeff(&self, i: i64, j: i64, a: usize, b: usize) -> &ComplexRational {
        &self.coeffs[Self::flat(self.band, self.num_intervals(), i, j, a, b)]
    }

    pub fn coeff_f64(&self, i: i64, j: i64, a: usize, b: usize) -> Complex64 {
        if i.unsigned_abs() as usize > self.band || j.unsigned_abs() as usize > self.band {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs_f64[Self::flat(self.band, self.num_intervals(), i, j, a, b)]
    }

    /// Nonzero entries `(i, j, a, b, value)`.
    pub fn entries(&self) -> Vec<(i64, i64, usize, usize, ComplexRational)> {
        let k = self.band as i64;
        let n = self.num_intervals();
        let mut out = Vec::new();
        for i in -k..=k {
            for j in -k..=k {
                for a in 0..n {
                    for b in 0..n {
                        let c = self.coeff(i, j, a, b);
                        if !c.is_zero() {
                            out.push((i, j, a, b, c.clone()));
                        }
                    }
                }
            }
        }
        out
    }

    /// Evaluates the cell trigonometric polynomial at angles `(θ₁, θ₂)`,
    /// returning the complex value (real for valid kernels).
    pub fn eval_cell(&self, a: usize, b: usize, t1: f64, t2: f64) -> Complex64 {
        let k = self.band as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in -k..=k {
            for j in -k..=k {
                let c = self.coeff_f64(i, j, a, b);
                if c.re != 0.0 || c.im != 0.0 {
                    acc += c * Complex64::from_polar(1.0, i as f64 * t1 + j as f64 * t2);
                }
            }
        }
        acc
    }

    /// Bound `A = 2 ‖s‖_∞^{1/2}` from the grid-refined sup norm.
    pub fn a_bound(&self) -> f64 {
        2.0 * extremes(self).max.sqrt()
    }

    /// `‖s‖_{L¹}` computed as `Σ_ab |I_a||I_b| s_00(a,b)`, exact for nonnegative kernels.
    pub fn l1_norm_exact(&self) -> Rational {
        let w = self.partition.lengths();
        let n = self.num_intervals();
        let mut acc = Rational::zero();
        for a in 0..n {
            for b in 0..n {
                acc += &w[a] * &w[b] * &self.coeff(0, 0, a, b).re;
            }
        }
        acc
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .entries()
            .into_iter()
            .map(|(i, j, a, b, v)| {
                json!([i, j, a, b, format_rational(&v.re), format_rational(&v.im)])
            })
            .collect();
        json!({
            "type": "kernel",
            "breakpoints": self.partition.breakpoints().iter().map(format_rational).collect::<Vec<_>>(),
            "coeffs": coeffs,
        })
    }
}

/// Real filter `h: ℤ² → ℝ` with finite support `max(|i|,|j|) ≤ K/2`.
#[derive(Clone, Debug, PartialEq)]
pub struct Filter {
    support: BTreeMap<(i64, i64), Rational>,
    k: usize,
}

impl Filter {
    /// Builds a filter, checking `h(−i,−j) = h(j,i)` and that `h` is not identically zero.
    pub fn new(entries: impl IntoIterator<Item = (i64, i64, Rational)>) -> Result<Self> {
        let mut support = BTreeMap::new();
        for (i, j, v) in entries {
            let slot = support.entry((i, j)).or_insert_with(Rational::zero);
            *slot += v;
        }
        support.retain(|_, v: &mut Rational| !v.is_zero());
        if support.is_empty() {
            return Err(Error::InvalidInput("filter vanishes identically".into()));
        }
        let zero = Rational::zero();
        for (&(i, j), v) in &support {
            let mirrored = support.get(&(-j, -i)).unwrap_or(&zero);
            if mirrored != v {
                return Err(Error::InvalidInput(format!(
                    "filter symmetry h(-i,-j) = h(j,i) fails at (i,j) = ({}, {})",
                    -j, -i
                )));
            }
        }
        let radius = support
            .keys()
            .map(|&(i, j)| i.unsigned_abs().max(j.unsigned_abs()))
            .max()
            .unwrap_or(0) as usize;
        Ok(Filter {
            support,
            k: 2 * radius,
        })
    }

    /// `h = (1/2)·1{(±1,±1)}`: each entry is the average of its four diagonal neighbours.
    pub fn compass() -> Self {
        let half = Rational::new(1.into(), 2.into());
        Filter::new([
            (1, -1, half.clone()),
            (1, 1, half.clone()),
            (-1, 1, half.clone()),
            (-1, -1, half),
        ])
        .expect("compass filter is symmetric")
    }

    /// `h = 1{(0,0)}`, the unfiltered Wigner matrix.
    pub fn delta() -> Self {
        Filter::new([(0, 0, int(1))]).expect("delta filter is symmetric")
    }

    /// Even support bound `K`.
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn get(&self, i: i64, j: i64) -> Rational {
        self.support.get(&(i, j)).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn get_f64(&self, i: i64, j: i64) -> f64 {
        self.support.get(&(i, j)).map(rational_to_f64).unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(i64, i64), &Rational)> {
        self.support.iter()
    }

    /// `‖h‖²_{L²(ℤ²)}`.
    pub fn l2_norm_sq(&self) -> Rational {
        self.support.values().map(|v| v * v).sum()
    }

    /// `H(ξ,η) = Σ h(i,j) ξ^i η^j` at angles `(θ₁, θ₂)`.
    pub fn transform(&self, t1: f64, t2: f64) -> Complex64 {
        self.support
            .iter()
            .map(|(&(i, j), v)| {
                Complex64::from_polar(rational_to_f64(v), i as f64 * t1 + j as f64 * t2)
            })
            .sum()
    }

    pub fn to_json(&self) -> Value {
        let entries: Vec<Value> = self
            .support
            .iter()
            .map(|(&(i, j), v)| json!([i, j, format_rational(v)]))
            .collect();
        json!({"type": "filter", "entries": entries})
    }
}

/// Pure-Fourier kernel with coefficients of `|H|²`:
/// `s_pq = Σ_{i−i'=p, j−j'=q} h(i,j) h(i',j')`.
pub fn kernel_from_filter(h: &Filter) -> Result<Kernel> {
    if h.support.is_empty() {
        return Err(Error::InvalidInput("filter vanishes identically".into()));
    }
    let mut table: BTreeMap<(i64, i64), Rational> = BTreeMap::new();
    for (&(i, j), v) in &h.support {
        for (&(i2, j2), v2) in &h.support {
            *table.entry((i - i2, j - j2)).or_insert_with(Rational::zero) += v * v2;
        }
    }
    let entries = table
        .into_iter()
        .filter(|(_, v)| !v.is_zero())
        .map(|((p, q), v)| (p, q, 0usize, 0usize, Complex::new(v, int(0))));
    Kernel::from_entries(IntervalPartition::unit(), h.k, entries)
}

/// Exact evaluation of the finite Fourier sum at the cell containing `(x, y)`.
/// The imaginary residue (below [`REAL_TOL`] for valid kernels) is discarded.
pub fn evaluate_kernel(k: &Kernel, c: ColorPoint, c2: ColorPoint) -> f64 {
    let a = k.partition.locate(c.x);
    let b = k.partition.locate(c2.x);
    let v = k.eval_cell(a, b, c.theta, c2.theta);
    debug_assert!(
        v.im.abs() <= REAL_TOL * (1.0 + v.re.abs()),
        "kernel value has imaginary part {}",
        v.im
    );
    v.re
}

/// Outcome of one invariant check.
#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: Option<String>,
}

impl Check {
    fn pass(name: &'static str) -> Self {
        Check {
            name,
            passed: true,
            detail: None,
        }
    }
    fn fail(name: &'static str, detail: String) -> Self {
        Check {
            name,
            passed: false,
            detail: Some(detail),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
    /// Grid-refined estimate of `‖s‖_∞`.
    pub sup_norm: f64,
    /// `A = 2 ‖s‖_∞^{1/2}`.
    pub a_bound: f64,
    pub l1_norm: f64,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn into_result(self) -> Result<Self> {
        if self.is_valid() {
            Ok(self)
        } else {
            let msg = self
                .failures()
                .iter()
                .map(|c| format!("{}: {}", c.name, c.detail.clone().unwrap_or_default()))
                .collect::<Vec<_>>()
                .join("; ");
            Err(Error::KernelInvalid(msg))
        }
    }
}

/// Checks conjugate and exchange symmetry, grid nonnegativity and
/// nondegeneracy, and reports `‖s‖_∞`, `A` and `‖s‖_{L¹}`.
pub fn validate_kernel(k: &Kernel) -> ValidationReport {
    let band = k.band as i64;
    let n = k.num_intervals();
    let mut checks = Vec::new();

    let mut conj_fail = None;
    let mut exch_fail = None;
    'outer: for i in -band..=band {
        for j in -band..=band {
            for a in 0..n {
                for b in 0..n {
                    let c = k.coeff(i, j, a, b);
                    let mirror = k.coeff(-i, -j, a, b);
                    if conj_fail.is_none()
                        && (mirror.re != c.re || mirror.im != -c.im.clone())
                    {
                        conj_fail = Some(format!(
                            "coeffs({},{},{a},{b}) is not the conjugate of coeffs({i},{j},{a},{b})",
                            -i, -j
                        ));
                    }
                    if exch_fail.is_none() && k.coeff(j, i, b, a) != c {
                        exch_fail = Some(format!(
                            "coeffs({j},{i},{b},{a}) differs from coeffs({i},{j},{a},{b})"
                        ));
                    }
                    if conj_fail.is_some() && exch_fail.is_some() {
                        break 'outer;
                    }
                }
            }
        }
    }
    checks.push(match conj_fail {
        None => Check::pass("conjugate_symmetry"),
        Some(d) => Check::fail("conjugate_symmetry", d),
    });
    checks.push(match exch_fail {
        None => Check::pass("exchange_symmetry"),
        Some(d) => Check::fail("exchange_symmetry", d),
    });

    let ext = extremes(k);
    checks.push(if ext.min >= -1e-12 {
        Check::pass("nonnegativity")
    } else {
        let (a, b, t1, t2) = ext.argmin;
        Check::fail(
            "nonnegativity",
            format!(
                "s = {:.6e} < 0 on cell ({a},{b}) at angles ({t1:.6}, {t2:.6})",
                ext.min
            ),
        )
    });

    let l1 = k.l1_norm_exact();
    let l1_f = rational_to_f64(&l1);
    checks.push(if l1.is_positive() {
        Check::pass("nondegeneracy")
    } else {
        Check::fail("nondegeneracy", format!("L1 norm {l1_f} is not positive"))
    });

    ValidationReport {
        checks,
        sup_norm: ext.max,
        a_bound: 2.0 * ext.max.max(0.0).sqrt(),
        l1_norm: l1_f,
    }
}

struct Extremes {
    max: f64,
    min: f64,
    argmin: (usize, usize, f64, f64),
}

/// Max and min of the real part of `s` over all cells: uniform angular grid
/// (≥ 4K+1 points per circle) refined by doubling, with Newton polishing of
/// the best grid candidates, until the max changes by less than 1e-9.
fn extremes(k: &Kernel) -> Extremes {
    let n = k.num_intervals();
    let mut grid = (4 * k.band + 1).max(8).next_power_of_two();
    let mut prev: Option<f64> = None;
    loop {
        let mut max = f64::NEG_INFINITY;
        let mut min = f64::INFINITY;
        let mut argmin = (0, 0, 0.0, 0.0);
        for a in 0..n {
            for b in 0..n {
                let cell = CellPoly::new(k, a, b);
                let (cmax, cmin, tmin) = cell.grid_extremes(grid);
                max = max.max(cmax);
                if cmin < min {
                    min = cmin;
                    argmin = (a, b, tmin.0, tmin.1);
                }
            }
        }
        let done = prev.is_some_and(|p| (p - max).abs() < 1e-9) || grid >= 2048;
        if done || k.band == 0 {
            return Extremes { max, min, argmin };
        }
        prev = Some(max);
        grid *= 2;
    }
}

/// Real trigonometric polynomial of one cell, `Σ c_ij e^{i(iθ₁+jθ₂)}`.
struct CellPoly {
    terms: Vec<(f64, f64, Complex64)>,
}

impl CellPoly {
    fn new(k: &Kernel, a: usize, b: usize) -> Self {
        let band = k.band as i64;
        let mut terms = Vec::new();
        for i in -band..=band {
            for j in -band..=band {
                let c = k.coeff_f64(i, j, a, b);
                if c.re != 0.0 || c.im != 0.0 {
                    terms.push((i as f64, j as f64, c));
                }
            }
        }
        CellPoly { terms }
    }

    /// Value, gradient and Hessian of the real part.
    fn eval(&self, t1: f64, t2: f64) -> (f64, [f64; 2], [f64; 3]) {
        let mut v = 0.0;
        let mut g = [0.0; 2];
        let mut h = [0.0; 3];
        for &(i, j, c) in &self.terms {
            let e = c * Complex64::from_polar(1.0, i * t1 + j * t2);
            // d/dθ of e^{iφ} = i·φ' e^{iφ}; real part of i·z is -Im z
            v += e.re;
            g[0] += -i * e.im;
            g[1] += -j * e.im;
            h[0] += -i * i * e.re;
            h[1] += -i * j * e.re;
            h[2] += -j * j * e.re;
        }
        (v, g, h)
    }

    fn grid_extremes(&self, grid: usize) -> (f64, f64, (f64, f64)) {
        let step = 2.0 * PI / grid as f64;
        let mut best_max = (f64::NEG_INFINITY, 0.0, 0.0);
        let mut best_min = (f64::INFINITY, 0.0, 0.0);
        let mut cands_max = Vec::new();
        let mut cands_min = Vec::new();
        for p in 0..grid {
            for q in 0..grid {
                let (t1, t2) = (p as f64 * step, q as f64 * step);
                let (v, _, _) = self.eval(t1, t2);
                cands_max.push((v, t1, t2));
                cands_min.push((v, t1, t2));
                if v > best_max.0 {
                    best_max = (v, t1, t2);
                }
                if v < best_min.0 {
                    best_min = (v, t1, t2);
                }
            }
        }
        if self.terms.is_empty() {
            return (0.0, 0.0, (0.0, 0.0));
        }
        cands_max.sort_by(|x, y| y.0.total_cmp(&x.0));
        cands_min.sort_by(|x, y| x.0.total_cmp(&y.0));
        for &(_, t1, t2) in cands_max.iter().take(8) {
            let v = self.polish(t1, t2, step);
            if v.0 > best_max.0 {
                best_max = v;
            }
        }
        for &(_, t1, t2) in cands_min.iter().take(8) {
            let v = self.polish(t1, t2, step);
            if v.0 < best_min.0 {
                best_min = v;
            }
        }
        (best_max.0, best_min.0, (best_min.1, best_min.2))
    }

    /// Newton steps on the gradient, confined to one grid cell around the start.
    fn polish(&self, t1: f64, t2: f64, step: f64) -> (f64, f64, f64) {
        let (mut x, mut y) = (t1, t2);
        for _ in 0..20 {
            let (_, g, h) = self.eval(x, y);
            let det = h[0] * h[2] - h[1] * h[1];
            if det.abs() < 1e-300 {
                break;
            }
            let dx = (h[2] * g[0] - h[1] * g[1]) / det;
            let dy = (h[0] * g[1] - h[1] * g[0]) / det;
            let (nx, ny) = (x - dx, y - dy);
            if (nx - t1).abs() > step || (ny - t2).abs() > step {
                break;
            }
            x = nx;
            y = ny;
            if dx.abs() + dy.abs() < 1e-15 {
                break;
            }
        }
        let (v, _, _) = self.eval(x, y);
        (v, x, y)
    }
}

/// Kernel or filter document, as read from JSON.
#[derive(Clone, Debug)]
pub enum KernelSource {
    Filter(Filter),
    Kernel(Kernel),
}

impl KernelSource {
    pub fn kernel(&self) -> Result<Kernel> {
        match self {
            KernelSource::Filter(h) => kernel_from_filter(h),
            KernelSource::Kernel(k) => Ok(k.clone()),
        }
    }

    pub fn filter(&self) -> Option<&Filter> {
        match self {
            KernelSource::Filter(h) => Some(h),
            KernelSource::Kernel(_) => None,
        }
    }
}

/// Parses `{"type":"filter","entries":[[i,j,value],...]}` or
/// `{"type":"kernel","breakpoints":[...],"coeffs":[[i,j,a,b,re,im],...]}`.
pub fn parse_kernel_json(doc: &Value) -> Result<KernelSource> {
    let ty = doc
        .get("type")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::Parse("missing \"type\" field".into()))?;
    match ty {
        "filter" => {
            let entries = doc
                .get("entries")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("filter needs an \"entries\" array".into()))?;
            let mut parsed = Vec::with_capacity(entries.len());
            for e in entries {
                let e = e
                    .as_array()
                    .filter(|e| e.len() == 3)
                    .ok_or_else(|| Error::Parse(format!("filter entry {e} is not [i,j,value]")))?;
                parsed.push((json_int(&e[0])?, json_int(&e[1])?, rational_from_json(&e[2])?));
            }
            Ok(KernelSource::Filter(Filter::new(parsed)?))
        }
        "kernel" => {
            let bps = doc
                .get("breakpoints")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("kernel needs a \"breakpoints\" array".into()))?;
            let bps = bps.iter().map(rational_from_json).collect::<Result<Vec<_>>>()?;
            let partition = IntervalPartition::new(bps)?;
            let coeffs = doc
                .get("coeffs")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::Parse("kernel needs a \"coeffs\" array".into()))?;
            let mut parsed = Vec::with_capacity(coeffs.len());
            let mut band = 0usize;
            for e in coeffs {
                let e = e.as_array().filter(|e| e.len() == 6).ok_or_else(|| {
                    Error::Parse(format!("kernel coefficient {e} is not [i,j,a,b,re,im]"))
                })?;
                let (i, j) = (json_int(&e[0])?, json_int(&e[1])?);
                let a = json_index(&e[2])?;
                let b = json_index(&e[3])?;
                band = band.max(i.unsigned_abs() as usize).max(j.unsigned_abs() as usize);
                let v = Complex::new(rational_from_json(&e[4])?, rational_from_json(&e[5])?);
                parsed.push((i, j, a, b, v));
            }
            Ok(KernelSource::Kernel(Kernel::from_entries(
                partition, band, parsed,
            )?))
        }
        other => Err(Error::Parse(format!("unknown document type {other:?}"))),
    }
}

pub fn parse_kernel_str(text: &str) -> Result<KernelSource> {
    parse_kernel_json(&serde_json::from_str(text)?)
}

fn json_int(v: &Value) -> Result<i64> {
    v.as_i64()
        .ok_or_else(|| Error::Parse(format!("expected an integer, got {v}")))
}

fn json_index(v: &Value) -> Result<usize> {
    v.as_u64()
        .map(|u| u as usize)
        .ok_or_else(|| Error::Parse(format!("expected a nonnegative integer, got {v}")))
}
