//! Symmetric eigensolver: Householder tridiagonalization followed by
//! implicit-shift QL (the classic `tred2`/`tql2` pair).
//!
//! The working array holds the transpose of the usual `V`, so every inner
//! loop runs along contiguous memory.

use crate::error::{Error, Result};

/// Dense row-major square matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Matrix {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidInput("matrix rows must have length n".into()));
        }
        Ok(Matrix {
            n,
            data: rows.concat(),
        })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m.data[i * n + j] = f(i, j);
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        self.data[i * self.n + j] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_symmetric(&self) -> bool {
        (0..self.n).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.data.iter().map(|x| x * x).sum()
    }

    pub fn scale(&mut self, c: f64) {
        self.data.iter_mut().for_each(|x| *x *= c);
    }

    pub fn mul(&self, other: &Matrix) -> Matrix {
        let n = self.n;
        let mut out = Matrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == 0.0 {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out.data[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| self.data[i * self.n..(i + 1) * self.n].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

/// Eigen-decomposition: ascending eigenvalues and, if requested,
/// the matching unit eigenvectors.
#[derive(Clone, Debug)]
pub struct Eigen {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
}

/// Sorted eigenvalues of a symmetric matrix.
pub fn eigenvalues_symmetric(m: &Matrix) -> Result<Vec<f64>> {
    Ok(eigen_symmetric(m, false)?.values)
}

/// Full decomposition of a symmetric matrix. Panics on non-symmetric input.
pub fn eigen_symmetric(m: &Matrix, vectors: bool) -> Result<Eigen> {
    assert!(m.is_symmetric(), "eigen_symmetric needs a symmetric matrix");
    let n = m.n;
    if n == 0 {
        return Ok(Eigen {
            values: vec![],
            vectors: vectors.then(Vec::new),
        });
    }
    let mut w = m.data.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n];
    tred2(n, &mut w, &mut d, &mut e, vectors);
    tql2(n, &mut w, &mut d, &mut e, vectors)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = vectors.then(|| order.iter().map(|&i| w[i * n..(i + 1) * n].to_vec()).collect());
    Ok(Eigen { values, vectors })
}

// `v(r, c)` of the textbook algorithm is stored at `w[c * n + r]`.
fn tred2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64], vectors: bool) {
    macro_rules! v {
        ($r:expr, $c:expr) => {
            w[($c) * n + ($r)]
        };
    }
    for j in 0..n {
        d[j] = v!(n - 1, j);
    }
    for i in (1..n).rev() {
        let mut scale = 0.0;
        let mut h = 0.0;
        for k in 0..i {
            scale += d[k].abs();
        }
        if scale == 0.0 {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
                v!(j, i) = 0.0;
            }
        } else {
            for k in 0..i {
                d[k] /= scale;
                h += d[k] * d[k];
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > 0.0 {
                g = -g;
            }
            e[i] = scale * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = 0.0;
            }
            for j in 0..i {
                f = d[j];
                v!(j, i) = f;
                g = e[j] + v!(j, j) * f;
                let col = &w[j * n..j * n + i];
                for k in j + 1..i {
                    g += col[k] * d[k];
                    e[k] += col[k] * f;
                }
                e[j] = g;
            }
            f = 0.0;
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                let col = &mut w[j * n..j * n + i];
                for k in j..i {
                    col[k] -= f * e[k] + g * d[k];
                }
                d[j] = v!(i - 1, j);
                v!(i, j) = 0.0;
            }
        }
        d[i] = h;
    }
    if vectors {
        for i in 0..n - 1 {
            v!(n - 1, i) = v!(i, i);
            v!(i, i) = 1.0;
            let h = d[i + 1];
            if h != 0.0 {
                for k in 0..=i {
                    d[k] = v!(k, i + 1) / h;
                }
                for j in 0..=i {
                    let mut g = 0.0;
                    for k in 0..=i {
                        g += v!(k, i + 1) * v!(k, j);
                    }
                    for k in 0..=i {
                        v!(k, j) -= g * d[k];
                    }
                }
            }
            for k in 0..=i {
                v!(k, i + 1) = 0.0;
            }
        }
        for j in 0..n {
            d[j] = v!(n - 1, j);
            v!(n - 1, j) = 0.0;
        }
        v!(n - 1, n - 1) = 1.0;
    } else {
        for j in 0..n {
            d[j] = v!(j, j);
        }
    }
    e[0] = 0.0;
}

fn tql2(n: usize, w: &mut [f64], d: &mut [f64], e: &mut [f64], vectors: bool) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = 0.0;
    let mut f = 0.0;
    let mut tst1: f64 = 0.0;
    let eps = f64::EPSILON;
    let mut sweeps = 0usize;
    let limit = 30 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            loop {
                sweeps += 1;
                if sweeps > limit {
                    return Err(Error::Internal(format!(
                        "QL iteration did not converge after {limit} sweeps"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (2.0 * e[l]);
                let mut r = p.hypot(1.0);
                if p < 0.0 {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = 1.0;
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = 0.0;
                let mut s2 = 0.0;
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    if vectors {
                        let (lo, hi) = w.split_at_mut((i + 1) * n);
                        let vi = &mut lo[i * n..];
                        let vi1 = &mut hi[..n];
                        for k in 0..n {
                            let h = vi1[k];
                            vi1[k] = s * vi[k] + c * h;
                            vi[k] = c * vi[k] - s * h;
                        }
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = 0.0;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random_symmetric(n: usize, seed: u64) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let b = super::super::rng::philox4x32([i as u32, j as u32, 0, 0], super::super::rng::seed_key(seed));
                let v = super::super::rng::gaussian(b);
                m.set(i, j, v);
                m.set(j, i, v);
            }
        }
        m
    }

    #[test]
    fn small_cases() {
        let d = Matrix::from_rows(&[vec![3.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 2.0]]).unwrap();
        assert_eq!(eigenvalues_symmetric(&d).unwrap(), vec![1.0, 2.0, 3.0]);
        let x = Matrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let ev = eigenvalues_symmetric(&x).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-15 && (ev[1] - 1.0).abs() < 1e-15);
        assert_eq!(eigenvalues_symmetric(&Matrix::from_rows(&[vec![5.0]]).unwrap()).unwrap(), vec![5.0]);
    }

    #[test]
    fn trace_identities_random_50() {
        let m = pseudo_random_symmetric(50, 11);
        let ev = eigenvalues_symmetric(&m).unwrap();
        let s1: f64 = ev.iter().sum();
        let s2: f64 = ev.iter().map(|x| x * x).sum();
        assert!((s1 - m.trace()).abs() < 1e-8);
        assert!((s2 - m.frobenius_sq()).abs() < 1e-8);
        assert!(ev.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn eigenpairs_reconstruct() {
        let m = pseudo_random_symmetric(60, 3);
        let eig = eigen_symmetric(&m, true).unwrap();
        let only = eigenvalues_symmetric(&m).unwrap();
        let norm = m.frobenius_sq().sqrt();
        let vecs = eig.vectors.as_ref().unwrap();
        for idx in [0, 7, 23, 41, 59] {
            let v = &vecs[idx];
            let mv = m.mul_vec(v);
            let err: f64 = mv
                .iter()
                .zip(v)
                .map(|(a, b)| (a - eig.values[idx] * b).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 1e-8 * norm, "pair {idx}: {err}");
            assert!((eig.values[idx] - only[idx]).abs() < 1e-10);
        }
    }

    #[test]
    #[should_panic]
    fn asymmetric_rejected() {
        let m = Matrix::from_rows(&[vec![0.0, 1.0], vec![2.0, 0.0]]).unwrap();
        let _ = eigenvalues_symmetric(&m);
    }
}
