// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Exact sparse matrices with integer numerators over one common denominator.
//!
//! Every superoperator entry in scope is a small rational (counts over `N²`,
//! orbit sizes, or S₃ averaging weights), so identities such as `ℋ∘𝒢_T = ℋ`
//! can be checked with `==` instead of a tolerance.

use nalgebra::DMatrix;
use num_integer::Integer;

use crate::error::{Error, Result};

/// Hard limit on stored non-zeros for exact sparse matrices.
pub const MAX_NNZ: usize = 1 << 27;

/// Row-compressed matrix with entries `vals[k] / den`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalCsr {
    n_rows: usize,
    n_cols: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<i64>,
    den: i64,
}

fn check_nnz(nnz: usize) -> Result<()> {
    if nnz > MAX_NNZ {
        return Err(Error::CapExceeded {
            what: "sparse non-zeros",
            requested: nnz,
            cap: MAX_NNZ,
        });
    }
    Ok(())
}

impl RationalCsr {
    /// Builds from `(row, col, numerator)` triplets; duplicates are summed.
    pub fn from_triplets(
        n_rows: usize,
        n_cols: usize,
        mut trips: Vec<(usize, usize, i64)>,
        den: i64,
    ) -> Result<Self> {
        if den == 0 {
            return Err(Error::Precondition("zero denominator".into()));
        }
        check_nnz(trips.len())?;
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_ptr = vec![0usize; n_rows + 1];
        let mut cols = Vec::with_capacity(trips.len());
        let mut vals: Vec<i64> = Vec::with_capacity(trips.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            if r >= n_rows || c >= n_cols {
                return Err(Error::OutOfRange(format!("entry ({r},{c}) outside matrix")));
            }
            if last == Some((r, c)) {
                let slot = vals.last_mut().expect("previous entry");
                *slot = slot.checked_add(v).ok_or(Error::Overflow("triplet sum"))?;
            } else {
                cols.push(c as u32);
                vals.push(v);
                row_ptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for i in 0..n_rows {
            row_ptr[i + 1] += row_ptr[i];
        }
        let mut out = Self {
            n_rows,
            n_cols,
            row_ptr,
            cols,
            vals,
            den,
        };
        out.normalize();
        Ok(out)
    }

    /// Builds from per-row `(col, numerator)` lists that are already sorted
    /// by column and free of duplicates.
    pub(crate) fn from_sorted_rows(n_cols: usize, rows: Vec<Vec<(u32, i64)>>, den: i64) -> Result<Self> {
        let nnz: usize = rows.iter().map(|r| r.len()).sum();
        check_nnz(nnz)?;
        let mut row_ptr = Vec::with_capacity(rows.len() + 1);
        row_ptr.push(0);
        let mut cols = Vec::with_capacity(nnz);
        let mut vals = Vec::with_capacity(nnz);
        for r in &rows {
            for &(c, v) in r {
                cols.push(c);
                vals.push(v);
            }
            row_ptr.push(cols.len());
        }
        let mut out = Self {
            n_rows: rows.len(),
            n_cols,
            row_ptr,
            cols,
            vals,
            den,
        };
        out.normalize();
        Ok(out)
    }

    /// `n × n` identity.
    pub fn identity(n: usize) -> Self {
        Self {
            n_rows: n,
            n_cols: n,
            row_ptr: (0..=n).collect(),
            cols: (0..n as u32).collect(),
            vals: vec![1; n],
            den: 1,
        }
    }

    /// `n × n` zero matrix.
    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            row_ptr: vec![0; n_rows + 1],
            cols: Vec::new(),
            vals: Vec::new(),
            den: 1,
        }
    }

    /// Permutation matrix with `P e_j = e_{perm[j]}`.
    pub fn permutation(perm: &[u32]) -> Result<Self> {
        let n = perm.len();
        let trips = perm.iter().enumerate().map(|(j, &i)| (i as usize, j, 1)).collect();
        Self::from_triplets(n, n, trips, 1)
    }

    /// Removes explicit zeros, makes the denominator positive and reduces by
    /// the common gcd.
    fn normalize(&mut self) {
        if self.vals.iter().any(|&v| v == 0) {
            let mut row_ptr = vec![0usize; self.n_rows + 1];
            let mut cols = Vec::with_capacity(self.vals.len());
            let mut vals = Vec::with_capacity(self.vals.len());
            for i in 0..self.n_rows {
                for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                    if self.vals[k] != 0 {
                        cols.push(self.cols[k]);
                        vals.push(self.vals[k]);
                    }
                }
                row_ptr[i + 1] = cols.len();
            }
            self.row_ptr = row_ptr;
            self.cols = cols;
            self.vals = vals;
        }
        if self.den < 0 {
            self.den = -self.den;
            self.vals.iter_mut().for_each(|v| *v = -*v);
        }
        let g = self.vals.iter().fold(self.den, |g, &v| g.gcd(&v));
        if g > 1 {
            self.den /= g;
            self.vals.iter_mut().for_each(|v| *v /= g);
        }
        if self.vals.is_empty() {
            self.den = 1;
        }
    }

    /// Row count.
    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    /// Column count.
    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    /// Stored non-zeros.
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    /// Common denominator (positive, reduced).
    pub fn den(&self) -> i64 {
        self.den
    }

    /// `(col, numerator)` pairs of row `i`.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, i64)> + '_ {
        (self.row_ptr[i]..self.row_ptr[i + 1]).map(move |k| (self.cols[k] as usize, self.vals[k]))
    }

    /// Numerator of entry `(i, j)`.
    pub fn num_at(&self, i: usize, j: usize) -> i64 {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.cols[lo..hi].binary_search(&(j as u32)) {
            Ok(k) => self.vals[lo + k],
            Err(_) => 0,
        }
    }

    /// Entry `(i, j)` as a float.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.num_at(i, j) as f64 / self.den as f64
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let mut counts = vec![0usize; self.n_cols + 1];
        for &c in &self.cols {
            counts[c as usize + 1] += 1;
        }
        for j in 0..self.n_cols {
            counts[j + 1] += counts[j];
        }
        let mut next = counts.clone();
        let mut cols = vec![0u32; self.nnz()];
        let mut vals = vec![0i64; self.nnz()];
        for i in 0..self.n_rows {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                let c = self.cols[k] as usize;
                cols[next[c]] = i as u32;
                vals[next[c]] = self.vals[k];
                next[c] += 1;
            }
        }
        Self {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr: counts,
            cols,
            vals,
            den: self.den,
        }
    }

    /// Exact product `self · other`.
    pub fn matmul(&self, other: &RationalCsr) -> Result<Self> {
        if self.n_cols != other.n_rows {
            return Err(Error::DimensionMismatch {
                left: self.n_cols,
                right: other.n_rows,
            });
        }
        let den = self
            .den
            .checked_mul(other.den)
            .ok_or(Error::Overflow("sparse product denominator"))?;
        let mut acc = vec![0i64; other.n_cols];
        let mut seen = vec![false; other.n_cols];
        let mut touched: Vec<u32> = Vec::new();
        let mut rows = Vec::with_capacity(self.n_rows);
        let mut nnz = 0usize;
        for i in 0..self.n_rows {
            touched.clear();
            for (k, a) in self.row(i) {
                for (j, b) in other.row(k) {
                    let p = a.checked_mul(b).ok_or(Error::Overflow("sparse product"))?;
                    acc[j] = acc[j].checked_add(p).ok_or(Error::Overflow("sparse product"))?;
                    if !seen[j] {
                        seen[j] = true;
                        touched.push(j as u32);
                    }
                }
            }
            touched.sort_unstable();
            let mut row = Vec::with_capacity(touched.len());
            for &j in &touched {
                let j = j as usize;
                if acc[j] != 0 {
                    row.push((j as u32, acc[j]));
                }
                acc[j] = 0;
                seen[j] = false;
            }
            nnz += row.len();
            check_nnz(nnz)?;
            rows.push(row);
        }
        Self::from_sorted_rows(other.n_cols, rows, den)
    }

    /// Exact linear combination `α·self + β·other` with integer weights.
    pub fn lin_comb(&self, alpha: i64, other: &RationalCsr, beta: i64) -> Result<Self> {
        if self.n_rows != other.n_rows || self.n_cols != other.n_cols {
            return Err(Error::DimensionMismatch {
                left: self.n_rows,
                right: other.n_rows,
            });
        }
        let l = self.den.lcm(&other.den);
        let fa = (l / self.den).checked_mul(alpha).ok_or(Error::Overflow("linear combination"))?;
        let fb = (l / other.den).checked_mul(beta).ok_or(Error::Overflow("linear combination"))?;
        let mut rows = Vec::with_capacity(self.n_rows);
        for i in 0..self.n_rows {
            let mut row: Vec<(u32, i64)> = Vec::new();
            let mut a = self.row(i).peekable();
            let mut b = other.row(i).peekable();
            loop {
                let next = match (a.peek(), b.peek()) {
                    (None, None) => break,
                    (Some(&(ca, va)), None) => {
                        a.next();
                        (ca, va.checked_mul(fa))
                    }
                    (None, Some(&(cb, vb))) => {
                        b.next();
                        (cb, vb.checked_mul(fb))
                    }
                    (Some(&(ca, va)), Some(&(cb, vb))) => {
                        if ca < cb {
                            a.next();
                            (ca, va.checked_mul(fa))
                        } else if cb < ca {
                            b.next();
                            (cb, vb.checked_mul(fb))
                        } else {
                            a.next();
                            b.next();
                            let s = va
                                .checked_mul(fa)
                                .and_then(|x| vb.checked_mul(fb).and_then(|y| x.checked_add(y)));
                            (ca, s)
                        }
                    }
                };
                let v = next.1.ok_or(Error::Overflow("linear combination"))?;
                if v != 0 {
                    row.push((next.0 as u32, v));
                }
            }
            rows.push(row);
        }
        Self::from_sorted_rows(self.n_cols, rows, l)
    }

    /// `self + other`.
    pub fn add(&self, other: &RationalCsr) -> Result<Self> {
        self.lin_comb(1, other, 1)
    }

    /// `self − other`.
    pub fn sub(&self, other: &RationalCsr) -> Result<Self> {
        self.lin_comb(1, other, -1)
    }

    /// `(num/den) · self`.
    pub fn scale(&self, num: i64, den: i64) -> Result<Self> {
        if den == 0 {
            return Err(Error::Precondition("zero denominator".into()));
        }
        let mut out = self.clone();
        for v in out.vals.iter_mut() {
            *v = v.checked_mul(num).ok_or(Error::Overflow("scale"))?;
        }
        out.den = out.den.checked_mul(den).ok_or(Error::Overflow("scale"))?;
        out.normalize();
        Ok(out)
    }

    /// True iff all entries are zero.
    pub fn is_zero(&self) -> bool {
        self.vals.is_empty()
    }

    /// Exact symmetry test.
    pub fn is_symmetric(&self) -> bool {
        self.n_rows == self.n_cols && *self == self.transpose()
    }

    /// Largest `|a_ij − a_ji|` as a float.
    pub fn max_asymmetry(&self) -> f64 {
        match self.sub(&self.transpose()) {
            Ok(d) => d.max_abs(),
            Err(_) => f64::INFINITY,
        }
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.vals.iter().map(|v| v.unsigned_abs()).max().unwrap_or(0) as f64 / self.den as f64
    }

    /// Restriction to the given rows and columns (in the given order).
    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let mut pos = vec![u32::MAX; self.n_cols];
        for (k, &c) in cols.iter().enumerate() {
            pos[c] = k as u32;
        }
        let mut out = Vec::with_capacity(rows.len());
        for &r in rows {
            let mut row: Vec<(u32, i64)> = self
                .row(r)
                .filter(|&(c, _)| pos[c] != u32::MAX)
                .map(|(c, v)| (pos[c], v))
                .collect();
            row.sort_unstable_by_key(|&(c, _)| c);
            out.push(row);
        }
        Self::from_sorted_rows(cols.len(), out, self.den)
    }

    /// Numerators of the row sums (over the common denominator).
    pub fn row_sum_nums(&self) -> Vec<i64> {
        (0..self.n_rows).map(|i| self.row(i).map(|(_, v)| v).sum()).collect()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let d = self.den as f64;
        (0..self.n_rows)
            .map(|i| self.row(i).map(|(c, v)| v as f64 * x[c]).sum::<f64>() / d)
            .collect()
    }

    /// Dense float copy.
    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n_rows, self.n_cols);
        let d = self.den as f64;
        for i in 0..self.n_rows {
            for (c, v) in self.row(i) {
                m[(i, c)] = v as f64 / d;
            }
        }
        m
    }
}
