//! Sparse symmetric matrices, reverse Cuthill–McKee ordering, a profile (skyline)
//! Cholesky factorization and Jacobi-preconditioned conjugate gradients.

use std::collections::VecDeque;

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },
    #[error("conjugate gradients stalled after {iterations} iterations (relative residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
}

/// Symmetric sparse matrix stored as full CSR (both triangles) on a fixed pattern.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseSymmetric<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    values: Vec<T>,
}

impl<T: Real> SparseSymmetric<T> {
    /// Zero matrix whose pattern holds the diagonal and both `(i, j)` and `(j, i)` for
    /// every listed pair.
    pub fn with_pattern(n: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut rows: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
        for (i, j) in pairs {
            if i != j {
                rows[i].push(j);
                rows[j].push(i);
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        row_ptr.push(0);
        for mut r in rows {
            r.sort_unstable();
            r.dedup();
            cols.extend(r);
            row_ptr.push(cols.len());
        }
        let nnz = cols.len();
        Self {
            n,
            row_ptr,
            cols,
            values: vec![T::zero(); nnz],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    pub fn clear(&mut self) {
        self.values.iter_mut().for_each(|v| *v = T::zero());
    }

    fn slot(&self, i: usize, j: usize) -> Option<usize> {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        self.cols[lo..hi].binary_search(&j).ok().map(|k| lo + k)
    }

    /// Adds `v` to entry `(i, j)` only; callers keep the matrix symmetric.
    ///
    /// Panics if `(i, j)` is outside the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: T) {
        let k = self.slot(i, j).expect("entry outside sparsity pattern");
        self.values[k] += v;
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.slot(i, j).map_or(T::zero(), |k| self.values[k])
    }

    /// Row `i` as `(column, value)` pairs.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[T]) -> Vec<T> {
        (0..self.n)
            .map(|i| self.row(i).fold(T::zero(), |s, (j, v)| s + v * x[j]))
            .collect()
    }

    /// Reverse Cuthill–McKee permutation: `perm[k]` is the original index placed at `k`.
    pub fn rcm_ordering(&self) -> Vec<usize> {
        let degree: Vec<usize> = (0..self.n)
            .map(|i| self.row_ptr[i + 1] - self.row_ptr[i])
            .collect();
        let mut visited = vec![false; self.n];
        let mut order = Vec::with_capacity(self.n);
        while order.len() < self.n {
            // start each component from a pseudo-peripheral node
            let seed = (0..self.n)
                .filter(|&i| !visited[i])
                .min_by_key(|&i| degree[i])
                .expect("unvisited node");
            let start = self.peripheral(seed, &degree);
            let mut queue = VecDeque::from([start]);
            visited[start] = true;
            while let Some(i) = queue.pop_front() {
                order.push(i);
                let mut nbrs: Vec<usize> = self.cols[self.row_ptr[i]..self.row_ptr[i + 1]]
                    .iter()
                    .copied()
                    .filter(|&j| !visited[j])
                    .collect();
                nbrs.sort_by_key(|&j| degree[j]);
                for j in nbrs {
                    visited[j] = true;
                    queue.push_back(j);
                }
            }
        }
        order.reverse();
        order
    }

    fn peripheral(&self, seed: usize, degree: &[usize]) -> usize {
        let mut node = seed;
        let mut ecc = 0;
        for _ in 0..8 {
            let levels = self.bfs_levels(node);
            let depth = *levels.iter().filter_map(|l| *l).collect::<Vec<_>>().iter().max().unwrap_or(&0);
            if depth <= ecc && node != seed {
                break;
            }
            ecc = depth;
            node = (0..self.n)
                .filter(|&i| levels[i] == Some(depth))
                .min_by_key(|&i| degree[i])
                .unwrap_or(node);
        }
        node
    }

    fn bfs_levels(&self, start: usize) -> Vec<Option<usize>> {
        let mut level = vec![None; self.n];
        level[start] = Some(0);
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let l = level[i].unwrap();
            for &j in &self.cols[self.row_ptr[i]..self.row_ptr[i + 1]] {
                if level[j].is_none() {
                    level[j] = Some(l + 1);
                    queue.push_back(j);
                }
            }
        }
        level
    }

    /// Number of stored entries in the lower profile under the permutation `perm`.
    pub fn profile_size(&self, perm: &[usize]) -> usize {
        let inv = inverse(perm);
        (0..self.n)
            .map(|k| {
                let i = perm[k];
                let first = self.row(i).map(|(j, _)| inv[j]).min().unwrap_or(k).min(k);
                k - first + 1
            })
            .sum()
    }
}

fn inverse(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0; perm.len()];
    for (k, &i) in perm.iter().enumerate() {
        inv[i] = k;
    }
    inv
}

/// Cholesky factor `L` stored row-wise over the envelope of the permuted matrix.
#[derive(Debug, Clone)]
pub struct SkylineCholesky<T> {
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    data: Vec<T>,
}

impl<T: Real> SkylineCholesky<T> {
    pub fn factor(a: &SparseSymmetric<T>, perm: Vec<usize>) -> Result<Self, LinalgError> {
        let n = a.dim();
        if perm.len() != n {
            return Err(LinalgError::Dimension {
                expected: n,
                got: perm.len(),
            });
        }
        let inv = inverse(&perm);
        let mut first = Vec::with_capacity(n);
        let mut start = Vec::with_capacity(n + 1);
        start.push(0);
        for k in 0..n {
            let f = a.row(perm[k]).map(|(j, _)| inv[j]).min().unwrap_or(k).min(k);
            first.push(f);
            start.push(start[k] + k - f + 1);
        }
        let mut data = vec![T::zero(); start[n]];
        for k in 0..n {
            for (j, v) in a.row(perm[k]) {
                let c = inv[j];
                if c <= k {
                    data[start[k] + c - first[k]] = v;
                }
            }
        }
        for i in 0..n {
            let (fi, si) = (first[i], start[i]);
            for j in fi..i {
                let (fj, sj) = (first[j], start[j]);
                let lo = fi.max(fj);
                let mut s = data[si + j - fi];
                let ri = &data[si + lo - fi..si + j - fi];
                let rj = &data[sj + lo - fj..sj + j - fj];
                for (x, y) in ri.iter().zip(rj) {
                    s -= *x * *y;
                }
                data[si + j - fi] = s / data[sj + j - fj];
            }
            let row = &data[si..si + i - fi];
            let d = row.iter().fold(data[si + i - fi], |acc, x| acc - *x * *x);
            if !(d > T::zero()) {
                return Err(LinalgError::NotPositiveDefinite {
                    row: perm[i],
                    pivot: d.as_f64(),
                });
            }
            data[si + i - fi] = d.sqrt();
        }
        Ok(Self {
            perm,
            first,
            start,
            data,
        })
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.perm.len();
        let mut y: Vec<T> = self.perm.iter().map(|&i| b[i]).collect();
        // L y = Pb
        for i in 0..n {
            let (fi, si) = (self.first[i], self.start[i]);
            let mut s = y[i];
            for (k, l) in self.data[si..si + i - fi].iter().enumerate() {
                s -= *l * y[fi + k];
            }
            y[i] = s / self.data[si + i - fi];
        }
        // Lᵀ x = y, column sweep
        for i in (0..n).rev() {
            let (fi, si) = (self.first[i], self.start[i]);
            y[i] /= self.data[si + i - fi];
            let yi = y[i];
            for (k, l) in self.data[si..si + i - fi].iter().enumerate() {
                y[fi + k] -= *l * yi;
            }
        }
        let mut x = vec![T::zero(); n];
        for (k, &i) in self.perm.iter().enumerate() {
            x[i] = y[k];
        }
        x
    }
}

/// Jacobi-preconditioned conjugate gradients from a zero initial guess.
///
/// Stops when `‖r‖ ≤ tol ‖b‖`. Returns the solution and the iteration count.
pub fn pcg<T: Real>(
    a: &SparseSymmetric<T>,
    b: &[T],
    tol: T,
    max_iter: usize,
) -> Result<(Vec<T>, usize), LinalgError> {
    let n = a.dim();
    if b.len() != n {
        return Err(LinalgError::Dimension {
            expected: n,
            got: b.len(),
        });
    }
    let dot = |x: &[T], y: &[T]| x.iter().zip(y).fold(T::zero(), |s, (p, q)| s + *p * *q);
    let inv_diag: Vec<T> = a
        .diagonal()
        .into_iter()
        .map(|d| if d > T::zero() { T::one() / d } else { T::one() })
        .collect();
    let bnorm = dot(b, b).sqrt();
    let mut x = vec![T::zero(); n];
    if bnorm == T::zero() {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut z: Vec<T> = r.iter().zip(&inv_diag).map(|(r, d)| *r * *d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    for it in 1..=max_iter {
        let ap = a.mul_vec(&p);
        let pap = dot(&p, &ap);
        if !(pap > T::zero()) {
            return Err(LinalgError::NotPositiveDefinite {
                row: 0,
                pivot: pap.as_f64(),
            });
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rn = dot(&r, &r).sqrt();
        if rn <= tol * bnorm {
            return Ok((x, it));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let res = dot(&r, &r).sqrt() / bnorm;
    Err(LinalgError::NoConvergence {
        iterations: max_iter,
        residual: res.as_f64(),
    })
}
