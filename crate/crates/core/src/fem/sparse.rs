use crate::error::SolverError;

/// Compressed sparse row matrix with sorted, de-duplicated columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Square matrix from `(row, col, value)` triplets; duplicates are summed
    /// in input order, so the result is deterministic.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut fill = counts.clone();
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        for &(r, c, v) in triplets {
            cols[fill[r]] = c;
            vals[fill[r]] = v;
            fill[r] += 1;
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::with_capacity(triplets.len());
        let mut values = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut order: Vec<usize> = Vec::new();
        for r in 0..n {
            order.clear();
            order.extend(counts[r]..counts[r + 1]);
            // Stable sort keeps summation order fixed for equal columns.
            order.sort_by_key(|&k| cols[k]);
            for &k in &order {
                if col_idx.len() > row_ptr[r] && *col_idx.last().unwrap() == cols[k] {
                    *values.last_mut().unwrap() += vals[k];
                } else {
                    col_idx.push(cols[k]);
                    values.push(vals[k]);
                }
            }
            row_ptr.push(col_idx.len());
        }
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[range.clone()].iter().copied().zip(self.values[range].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let range = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[range.clone()].binary_search(&c) {
            Ok(k) => self.values[range.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate() {
            let mut s = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *out = s;
        }
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.mul_vec(x, &mut y);
        y
    }

    pub fn quad_form(&self, x: &[f64]) -> f64 {
        dot(x, &self.apply(x))
    }

    /// Largest `|a_ij - a_ji|` relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst = 0.0f64;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst / scale
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CgOptions {
    /// Stop once `||b - A x|| <= tol * ||b||`.
    pub tol: f64,
    /// Iteration cap as a multiple of the system size.
    pub max_iter_factor: usize,
}

impl Default for CgOptions {
    fn default() -> Self {
        CgOptions { tol: 1e-10, max_iter_factor: 10 }
    }
}

#[derive(Debug, Clone)]
pub struct CgOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Relative residual after each iteration, starting with the initial guess.
    pub history: Vec<f64>,
}

/// Jacobi-preconditioned conjugate gradient for a symmetric positive
/// definite matrix. Rows listed in `fixed` are held at their value in `x0`
/// (row/column elimination without rebuilding the matrix).
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    x0: &[f64],
    fixed: &[bool],
    opts: &CgOptions,
) -> Result<CgOutcome, SolverError> {
    let n = a.dim();
    if b.iter().chain(x0).any(|v| !v.is_finite()) {
        return Err(SolverError::NonFinite);
    }
    let free = |i: usize| !fixed.get(i).copied().unwrap_or(false);
    let mut x = x0.to_vec();
    // Residual of the eliminated system: b - A x on free rows, zero on fixed rows.
    let mut r = a.apply(&x);
    for i in 0..n {
        r[i] = if free(i) { b[i] - r[i] } else { 0.0 };
    }
    let bnorm = {
        // Right-hand side of the eliminated system: b minus fixed-column contributions.
        let mut xf = vec![0.0; n];
        for i in 0..n {
            if !free(i) {
                xf[i] = x[i];
            }
        }
        let af = a.apply(&xf);
        (0..n).filter(|&i| free(i)).map(|i| (b[i] - af[i]).powi(2)).sum::<f64>().sqrt()
    };
    let mut history = Vec::new();
    if bnorm == 0.0 {
        // Homogeneous system: the free part of the solution is zero.
        for i in 0..n {
            if free(i) {
                x[i] = 0.0;
            }
        }
        history.push(0.0);
        return Ok(CgOutcome { x, iterations: 0, history });
    }
    let inv_diag: Vec<f64> =
        a.diagonal().iter().enumerate().map(|(i, &d)| if free(i) && d > 0.0 { 1.0 / d } else { 0.0 }).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut ap = vec![0.0; n];
    let mut rel = norm2(&r) / bnorm;
    history.push(rel);
    let max_iter = opts.max_iter_factor * n.max(1);
    let mut it = 0;
    while rel > opts.tol {
        if it >= max_iter {
            return Err(SolverError::NotConverged { iterations: it, history });
        }
        a.mul_vec(&p, &mut ap);
        for i in 0..n {
            if !free(i) {
                ap[i] = 0.0;
            }
        }
        let curvature = dot(&p, &ap);
        if !(curvature > 0.0) {
            return Err(SolverError::Breakdown { iteration: it, curvature });
        }
        let alpha = rz / curvature;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
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
        it += 1;
        rel = norm2(&r) / bnorm;
        history.push(rel);
    }
    Ok(CgOutcome { x, iterations: it, history })
}
