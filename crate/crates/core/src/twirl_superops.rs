// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Pauli, transvection and Haar twirls as exact matrices on the sum-zero
//! Pauli-product basis.
//!
//! For `t` copies the basis vector `|a₁,…,a_{t−1}⟩` stands for the canonical
//! Hermitian product with last factor `a_t = Σ a_j`. The Pauli twirl is the
//! identity on this span and annihilates its complement, so only the span is
//! materialized. Transvection Cliffords act sign-free on it, hence every
//! twirl is a real matrix with small rational entries.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_integer::Integer;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2_symplectic::{enumerate_sp, form_bits, transvect_bits, F2Vector, MAX_M};
use crate::rational::{RationalCsr, MAX_NNZ};

/// Default largest dimension that is materialized as a dense float matrix.
pub const DEFAULT_CAP: usize = 4096;

/// Orbit (sector) of a basis vector under the Clifford action, plus tags used
/// in spectrum reports.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub enum Sector {
    /// The all-zero tuple.
    Identity,
    /// `t = 3`: `|0,b,b⟩`; `t = 2`: every `|a,a⟩` with `a ≠ 0`.
    Diagonal1,
    /// `|a,0,a⟩`.
    Diagonal2,
    /// `|a,a,0⟩`.
    Diagonal3,
    /// `|a,b,a+b⟩` with `⟨a,b⟩ = 1`.
    NC,
    /// `|a,b,a+b⟩` with `⟨a,b⟩ = 0` and `a, b, a+b ≠ 0`.
    C,
    /// Eigenvalue-1 (Clifford-invariant) part of a spectrum.
    Haar,
    /// Anything else.
    Other,
}

impl Sector {
    /// The orbit sectors for `t` copies, in index order.
    pub fn orbits(t: usize) -> &'static [Sector] {
        if t == 2 {
            &[Sector::Identity, Sector::Diagonal1]
        } else {
            &[
                Sector::Identity,
                Sector::Diagonal1,
                Sector::Diagonal2,
                Sector::Diagonal3,
                Sector::NC,
                Sector::C,
            ]
        }
    }

    /// Lower-case name.
    pub fn as_str(&self) -> &'static str {
        match self {
            Sector::Identity => "identity",
            Sector::Diagonal1 => "diagonal1",
            Sector::Diagonal2 => "diagonal2",
            Sector::Diagonal3 => "diagonal3",
            Sector::NC => "nc",
            Sector::C => "c",
            Sector::Haar => "haar",
            Sector::Other => "other",
        }
    }
}

impl fmt::Display for Sector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Sector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            Sector::Identity,
            Sector::Diagonal1,
            Sector::Diagonal2,
            Sector::Diagonal3,
            Sector::NC,
            Sector::C,
            Sector::Haar,
            Sector::Other,
        ];
        all.into_iter()
            .find(|x| x.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "sector",
                name: s.to_string(),
            })
    }
}

/// The sum-zero basis for `t` copies of `m` qubits.
///
/// Linear index of `(a₁, …, a_{t−1})` is `Σ_j a_j·Q^{t−2−j}` with `Q = N²`;
/// index 0 is the identity operator.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct Basis {
    t: usize,
    m: usize,
}

/// A decoded basis label.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct BasisIndex {
    /// `(a₁, …, a_{t−1})`; the last component is implied.
    pub components: Vec<F2Vector>,
    pub linear: usize,
}

impl Basis {
    /// Validates `t ∈ {2,3}` and that indices fit in 32 bits.
    pub fn new(t: usize, m: usize) -> Result<Self> {
        if !(2..=3).contains(&t) {
            return Err(Error::InvalidCopyCount(t));
        }
        if m == 0 || m > MAX_M {
            return Err(Error::InvalidQubitCount {
                m,
                reason: "expected 1 <= m <= 32",
            });
        }
        if 2 * m * (t - 1) > 32 {
            return Err(Error::InvalidQubitCount {
                m,
                reason: "sum-zero basis dimension exceeds 2^32",
            });
        }
        Ok(Self { t, m })
    }

    /// Copy count.
    pub fn t(&self) -> usize {
        self.t
    }

    /// Qubit count.
    pub fn m(&self) -> usize {
        self.m
    }

    /// `N = 2^m`.
    pub fn n(&self) -> usize {
        1 << self.m
    }

    /// `Q = N²`, the number of Pauli labels.
    pub fn q(&self) -> usize {
        1 << (2 * self.m)
    }

    /// `Q^{t−1}`.
    pub fn dim(&self) -> usize {
        1 << (2 * self.m * (self.t - 1))
    }

    /// Dimension of the annihilated (non-sum-zero) complement, `Q^t − Q^{t−1}`.
    pub fn complement_dim(&self) -> u128 {
        (1u128 << (2 * self.m * self.t)) - self.dim() as u128
    }

    /// Linear index of `(a₁, …, a_{t−1})`.
    pub fn index(&self, components: &[F2Vector]) -> Result<usize> {
        if components.len() != self.t - 1 {
            return Err(Error::DimensionMismatch {
                left: components.len(),
                right: self.t - 1,
            });
        }
        let mut idx = 0usize;
        for a in components {
            if a.m() != self.m {
                return Err(Error::DimensionMismatch {
                    left: a.m(),
                    right: self.m,
                });
            }
            idx = (idx << (2 * self.m)) | a.bits() as usize;
        }
        Ok(idx)
    }

    /// Raw component bits `(a₁, a₂)` of an index (`a₂ = 0` for `t = 2`).
    #[inline]
    pub(crate) fn split(&self, idx: usize) -> (u64, u64) {
        if self.t == 2 {
            (idx as u64, 0)
        } else {
            ((idx >> (2 * self.m)) as u64, (idx & (self.q() - 1)) as u64)
        }
    }

    #[inline]
    pub(crate) fn join(&self, a: u64, b: u64) -> usize {
        if self.t == 2 {
            a as usize
        } else {
            ((a as usize) << (2 * self.m)) | b as usize
        }
    }

    /// Decodes an index.
    pub fn decode(&self, idx: usize) -> Result<BasisIndex> {
        if idx >= self.dim() {
            return Err(Error::OutOfRange(format!("basis index {idx} >= {}", self.dim())));
        }
        let (a, b) = self.split(idx);
        let mut components = vec![F2Vector::new(a, self.m)?];
        if self.t == 3 {
            components.push(F2Vector::new(b, self.m)?);
        }
        Ok(BasisIndex {
            components,
            linear: idx,
        })
    }

    /// All `t` tuple components, including the implied last one.
    pub fn full_tuple(&self, idx: usize) -> Result<Vec<F2Vector>> {
        let mut c = self.decode(idx)?.components;
        let last = c.iter().fold(0u64, |acc, a| acc ^ a.bits());
        c.push(F2Vector::new(last, self.m)?);
        Ok(c)
    }

    /// Orbit of a basis index.
    #[inline]
    pub fn sector(&self, idx: usize) -> Sector {
        let (a, b) = self.split(idx);
        if self.t == 2 {
            return if a == 0 { Sector::Identity } else { Sector::Diagonal1 };
        }
        match (a == 0, b == 0, a == b) {
            (true, true, _) => Sector::Identity,
            (true, false, _) => Sector::Diagonal1,
            (false, true, _) => Sector::Diagonal2,
            (false, false, true) => Sector::Diagonal3,
            _ => {
                if form_bits(a, b, self.m) == 1 {
                    Sector::NC
                } else {
                    Sector::C
                }
            }
        }
    }

    /// Indices of one sector in increasing (lexicographic) order.
    pub fn sector_indices(&self, s: Sector) -> Vec<usize> {
        (0..self.dim()).filter(|&i| self.sector(i) == s).collect()
    }

    /// Closed-form orbit sizes, in [`Sector::orbits`] order.
    pub fn orbit_sizes(&self) -> Vec<u64> {
        let q = self.q() as u64;
        if self.t == 2 {
            vec![1, q - 1]
        } else {
            vec![1, q - 1, q - 1, q - 1, q * (q - 1) / 2, (q - 1) * (q - 4) / 2]
        }
    }

    /// Index of `T_h` applied to every component.
    #[inline]
    pub fn transvect_index(&self, h: u64, idx: usize) -> usize {
        let (a, b) = self.split(idx);
        let m = self.m;
        self.join(transvect_bits(h, a, m), transvect_bits(h, b, m))
    }
}

/// Named twirl ensembles.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum EnsembleKind {
    PauliTwirl,
    TransvectionTwirl,
    Haar,
}

/// `(t, m, kind)`: what to build.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct EnsembleSpec {
    pub t: usize,
    pub m: usize,
    pub kind: EnsembleKind,
}

impl EnsembleSpec {
    /// Builds the superoperator.
    pub fn build(&self) -> Result<Superoperator> {
        match self.kind {
            EnsembleKind::PauliTwirl => build_gp(self.t, self.m),
            EnsembleKind::TransvectionTwirl => build_gt(self.t, self.m),
            EnsembleKind::Haar => build_h(self.t, self.m),
        }
    }
}

/// Matrix storage of a superoperator.
#[derive(Clone, Debug)]
pub enum Storage {
    /// The identity (Pauli twirl on its support).
    Identity,
    /// Averaging within each orbit: entry `1/|orbit|` inside an orbit block.
    OrbitAverage { sizes: Vec<u64> },
    /// Exact rational sparse matrix.
    Rational(RationalCsr),
    /// Dense floating-point matrix.
    Dense(DMatrix<f64>),
}

/// A real operator on the sum-zero basis.
#[derive(Clone, Debug)]
pub struct Superoperator {
    basis: Basis,
    storage: Storage,
}

impl Superoperator {
    /// Wraps storage for a basis.
    pub fn new(basis: Basis, storage: Storage) -> Result<Self> {
        let n = basis.dim();
        match &storage {
            Storage::Rational(r) if r.n_rows() != n || r.n_cols() != n => {
                return Err(Error::DimensionMismatch {
                    left: r.n_rows(),
                    right: n,
                })
            }
            Storage::Dense(d) if d.nrows() != n || d.ncols() != n => {
                return Err(Error::DimensionMismatch {
                    left: d.nrows(),
                    right: n,
                })
            }
            _ => {}
        }
        Ok(Self { basis, storage })
    }

    /// Exact operator.
    pub fn from_rational(basis: Basis, r: RationalCsr) -> Result<Self> {
        Self::new(basis, Storage::Rational(r))
    }

    /// Underlying basis.
    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Matrix dimension.
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Storage.
    pub fn storage(&self) -> &Storage {
        &self.storage
    }

    /// True unless stored as floats.
    pub fn is_exact(&self) -> bool {
        !matches!(self.storage, Storage::Dense(_))
    }

    /// Dimension of the annihilated complement (recorded, never built).
    pub fn annihilated_complement_dim(&self) -> u128 {
        self.basis.complement_dim()
    }

    /// Exact sparse form; fails for float storage.
    pub fn to_rational(&self) -> Result<RationalCsr> {
        match &self.storage {
            Storage::Identity => Ok(RationalCsr::identity(self.dim())),
            Storage::Rational(r) => Ok(r.clone()),
            Storage::OrbitAverage { sizes } => orbit_average_matrix(&self.basis, sizes),
            Storage::Dense(_) => Err(Error::Precondition(
                "floating-point operator has no exact form".into(),
            )),
        }
    }

    /// Dense float copy; fails above `cap`.
    pub fn to_dense(&self, cap: usize) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if n > cap {
            return Err(Error::CapExceeded {
                what: "dense dimension",
                requested: n,
                cap,
            });
        }
        match &self.storage {
            Storage::Dense(d) => Ok(d.clone()),
            Storage::Identity => Ok(DMatrix::identity(n, n)),
            Storage::Rational(r) => Ok(r.to_dense()),
            Storage::OrbitAverage { sizes } => {
                let mut d = DMatrix::zeros(n, n);
                let members = orbit_members(&self.basis);
                for (o, idx) in members.iter().enumerate() {
                    let w = 1.0 / sizes[o] as f64;
                    for &i in idx {
                        for &j in idx {
                            d[(i, j)] = w;
                        }
                    }
                }
                Ok(d)
            }
        }
    }

    /// `A v`.
    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                left: v.len(),
                right: n,
            });
        }
        Ok(match &self.storage {
            Storage::Identity => v.to_vec(),
            Storage::Rational(r) => r.matvec(v),
            Storage::Dense(d) => (d * nalgebra::DVector::from_column_slice(v)).as_slice().to_vec(),
            Storage::OrbitAverage { sizes } => {
                let orbits = Sector::orbits(self.basis.t);
                let mut sums = vec![0.0; orbits.len()];
                let ids: Vec<usize> = (0..n).map(|i| orbit_id(&self.basis, i)).collect();
                for (i, &o) in ids.iter().enumerate() {
                    sums[o] += v[i];
                }
                ids.iter()
                    .map(|&o| sums[o] / sizes[o].max(1) as f64)
                    .collect()
            }
        })
    }

    /// Checks symmetry: exact for rational storage, `1e−12` for floats.
    pub fn check_symmetric(&self) -> Result<()> {
        match &self.storage {
            Storage::Identity | Storage::OrbitAverage { .. } => Ok(()),
            Storage::Rational(r) => {
                if r.is_symmetric() {
                    Ok(())
                } else {
                    Err(Error::NonSymmetric(r.max_asymmetry()))
                }
            }
            Storage::Dense(d) => {
                let asym = (d - d.transpose()).abs().max();
                if asym <= 1e-12 {
                    Ok(())
                } else {
                    Err(Error::NonSymmetric(asym))
                }
            }
        }
    }

    /// Exact equality (both operands must be exact).
    pub fn exact_eq(&self, other: &Superoperator) -> Result<bool> {
        same_basis(self, other)?;
        Ok(self.to_rational()? == other.to_rational()?)
    }

    /// Largest absolute entry difference, computed densely below `cap`.
    pub fn max_abs_diff(&self, other: &Superoperator, cap: usize) -> Result<f64> {
        same_basis(self, other)?;
        if self.is_exact() && other.is_exact() {
            if let (Ok(a), Ok(b)) = (self.to_rational(), other.to_rational()) {
                return Ok(a.sub(&b)?.max_abs());
            }
        }
        Ok((self.to_dense(cap)? - other.to_dense(cap)?).abs().max())
    }

    /// Exact `α·self + β·other` for integer weights.
    pub fn lin_comb(&self, alpha: i64, other: &Superoperator, beta: i64) -> Result<Superoperator> {
        same_basis(self, other)?;
        let r = self.to_rational()?.lin_comb(alpha, &other.to_rational()?, beta)?;
        Superoperator::from_rational(self.basis, r)
    }
}

fn same_basis(a: &Superoperator, b: &Superoperator) -> Result<()> {
    if a.basis != b.basis {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

fn orbit_id(basis: &Basis, idx: usize) -> usize {
    let s = basis.sector(idx);
    Sector::orbits(basis.t)
        .iter()
        .position(|&o| o == s)
        .expect("orbit sector")
}

fn orbit_members(basis: &Basis) -> Vec<Vec<usize>> {
    let mut members = vec![Vec::new(); Sector::orbits(basis.t).len()];
    for i in 0..basis.dim() {
        members[orbit_id(basis, i)].push(i);
    }
    members
}

fn orbit_average_matrix(basis: &Basis, sizes: &[u64]) -> Result<RationalCsr> {
    let members = orbit_members(basis);
    let nnz: u128 = members.iter().map(|m| (m.len() as u128).pow(2)).sum();
    if nnz > MAX_NNZ as u128 {
        return Err(Error::CapExceeded {
            what: "sparse non-zeros",
            requested: nnz.min(usize::MAX as u128) as usize,
            cap: MAX_NNZ,
        });
    }
    let den = sizes
        .iter()
        .filter(|&&s| s > 0)
        .fold(1i64, |l, &s| l.lcm(&(s as i64)));
    let mut rows = vec![Vec::new(); basis.dim()];
    for (o, idx) in members.iter().enumerate() {
        if idx.is_empty() {
            continue;
        }
        let w = den / sizes[o] as i64;
        let row: Vec<(u32, i64)> = idx.iter().map(|&j| (j as u32, w)).collect();
        for &i in idx {
            rows[i] = row.clone();
        }
    }
    RationalCsr::from_sorted_rows(basis.dim(), rows, den)
}

/// Pauli twirl on its support: the identity.
pub fn build_gp(t: usize, m: usize) -> Result<Superoperator> {
    Superoperator::new(Basis::new(t, m)?, Storage::Identity)
}

/// Transvection twirl: entry `(x,y) = #{h : T_h y = x} / N²`.
pub fn build_gt(t: usize, m: usize) -> Result<Superoperator> {
    let basis = Basis::new(t, m)?;
    let n = basis.dim();
    let q = basis.q();
    let bound = n as u128 * q as u128;
    if bound > MAX_NNZ as u128 {
        return Err(Error::CapExceeded {
            what: "sparse non-zeros",
            requested: bound.min(usize::MAX as u128) as usize,
            cap: MAX_NNZ,
        });
    }
    // T_h is an involution, so row x lists T_h x over all h.
    let mut rows = Vec::with_capacity(n);
    let mut buf: Vec<u32> = Vec::with_capacity(q);
    for x in 0..n {
        buf.clear();
        buf.extend((0..q as u64).map(|h| basis.transvect_index(h, x) as u32));
        buf.sort_unstable();
        let mut row: Vec<(u32, i64)> = Vec::new();
        for &y in &buf {
            match row.last_mut() {
                Some((c, k)) if *c == y => *k += 1,
                _ => row.push((y, 1)),
            }
        }
        rows.push(row);
    }
    Superoperator::from_rational(basis, RationalCsr::from_sorted_rows(n, rows, q as i64)?)
}

/// Haar (Clifford) twirl: the projector onto the orbit-indicator vectors,
/// i.e. averaging within each orbit.
pub fn build_h(t: usize, m: usize) -> Result<Superoperator> {
    let basis = Basis::new(t, m)?;
    let sizes = basis.orbit_sizes();
    Superoperator::new(basis, Storage::OrbitAverage { sizes })
}

/// Unit vectors spanning the range of the Haar twirl, with their sectors:
/// `|0⟩`, `|w⟩` (one per diagonal orbit) and, for `t = 3`, `|NC⟩` and `|C⟩`.
pub fn haar_spanning_vectors(t: usize, m: usize) -> Result<Vec<(Sector, Vec<f64>)>> {
    let basis = Basis::new(t, m)?;
    let q = basis.q() as f64;
    let n = basis.n() as f64;
    let mut out = Vec::new();
    for &s in Sector::orbits(t) {
        let coeff = match s {
            Sector::Identity => 1.0,
            Sector::Diagonal1 | Sector::Diagonal2 | Sector::Diagonal3 => 1.0 / (q - 1.0).sqrt(),
            Sector::NC => std::f64::consts::SQRT_2 / (n * (q - 1.0).sqrt()),
            Sector::C => {
                if q <= 4.0 {
                    continue;
                }
                std::f64::consts::SQRT_2 / ((q - 1.0) * (q - 4.0)).sqrt()
            }
            _ => unreachable!(),
        };
        let v = (0..basis.dim())
            .map(|i| if basis.sector(i) == s { coeff } else { 0.0 })
            .collect();
        out.push((s, v));
    }
    Ok(out)
}

/// Permutation `idx ↦ index of T_h(idx)` on the sum-zero basis.
pub fn transvection_permutation(h: F2Vector, t: usize) -> Result<Vec<u32>> {
    let basis = Basis::new(t, h.m())?;
    Ok((0..basis.dim())
        .map(|i| basis.transvect_index(h.bits(), i) as u32)
        .collect())
}

/// Transvection twirl as the explicit average of the `N²` permutation
/// matrices; reference construction for tests.
pub fn build_gt_by_permutation_average(t: usize, m: usize) -> Result<Superoperator> {
    let basis = Basis::new(t, m)?;
    let q = basis.q();
    let mut acc = RationalCsr::zeros(basis.dim(), basis.dim());
    for h in 0..q as u64 {
        let p = RationalCsr::permutation(&transvection_permutation(F2Vector::new(h, m)?, t)?)?;
        acc = acc.add(&p)?;
    }
    Superoperator::from_rational(basis, acc.scale(1, q as i64)?)
}

/// Haar twirl as the explicit average over Sp(2m, F₂) (`m <= 2`).
pub fn haar_by_group_average(t: usize, m: usize) -> Result<Superoperator> {
    let basis = Basis::new(t, m)?;
    let group = enumerate_sp(m)?;
    let mut rows = Vec::with_capacity(basis.dim());
    let mut buf = Vec::with_capacity(group.len());
    for x in 0..basis.dim() {
        let (a, b) = basis.split(x);
        buf.clear();
        buf.extend(group.iter().map(|s| basis.join(s.apply_bits(a), s.apply_bits(b)) as u32));
        buf.sort_unstable();
        let mut row: Vec<(u32, i64)> = Vec::new();
        for &y in &buf {
            match row.last_mut() {
                Some((c, k)) if *c == y => *k += 1,
                _ => row.push((y, 1)),
            }
        }
        rows.push(row);
    }
    let r = RationalCsr::from_sorted_rows(basis.dim(), rows, group.len() as i64)?;
    Superoperator::from_rational(basis, r)
}

/// Product `A ∘ B`: exact when both are exact, dense floats otherwise
/// (limited to [`DEFAULT_CAP`]).
pub fn compose(a: &Superoperator, b: &Superoperator) -> Result<Superoperator> {
    same_basis(a, b)?;
    match (&a.storage, &b.storage) {
        (Storage::Identity, _) => return Ok(b.clone()),
        (_, Storage::Identity) => return Ok(a.clone()),
        _ => {}
    }
    if a.is_exact() && b.is_exact() {
        let r = a.to_rational()?.matmul(&b.to_rational()?)?;
        return Superoperator::from_rational(a.basis, r);
    }
    let d = a.to_dense(DEFAULT_CAP)? * b.to_dense(DEFAULT_CAP)?;
    Superoperator::new(a.basis, Storage::Dense(d))
}

/// `A^k v` by repeated application.
pub fn power_apply(a: &Superoperator, k: usize, v: &[f64]) -> Result<Vec<f64>> {
    if v.len() != a.dim() {
        return Err(Error::DimensionMismatch {
            left: v.len(),
            right: a.dim(),
        });
    }
    let mut x = v.to_vec();
    for _ in 0..k {
        x = a.apply(&x)?;
    }
    Ok(x)
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Largest `|eigenvalue|` of a symmetric implicit operator by power
/// iteration on its square.
pub fn power_norm<F>(dim: usize, apply: F, tol: f64, max_iter: usize, seed: u64) -> Result<f64>
where
    F: Fn(&[f64]) -> Result<Vec<f64>>,
{
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut v: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let nv = norm2(&v);
    v.iter_mut().for_each(|x| *x /= nv);
    let mut est = 0.0f64;
    for _ in 0..max_iter {
        let w = apply(&apply(&v)?)?;
        let nw = norm2(&w);
        if nw == 0.0 {
            return Ok(0.0);
        }
        let new = nw.sqrt();
        v = w.into_iter().map(|x| x / nw).collect();
        if (new - est).abs() <= tol * new.max(f64::MIN_POSITIVE) {
            return Ok(new);
        }
        est = new;
    }
    Ok(est)
}

/// Largest `|eigenvalue|` of `A − D` for symmetric `A` and optional `D`.
///
/// Dense symmetric eigensolver up to `cap`, power iteration above.
pub fn op_norm(a: &Superoperator, deflate: Option<&Superoperator>, cap: usize) -> Result<f64> {
    a.check_symmetric()?;
    if let Some(d) = deflate {
        same_basis(a, d)?;
        d.check_symmetric()?;
    }
    let n = a.dim();
    if n <= cap {
        let mut m = a.to_dense(cap)?;
        if let Some(d) = deflate {
            m -= d.to_dense(cap)?;
        }
        let ev = m.symmetric_eigenvalues();
        return Ok(ev.iter().fold(0.0f64, |acc, x| acc.max(x.abs())));
    }
    power_norm(
        n,
        |v| {
            let mut w = a.apply(v)?;
            if let Some(d) = deflate {
                let dv = d.apply(v)?;
                w.iter_mut().zip(dv).for_each(|(x, y)| *x -= y);
            }
            Ok(w)
        },
        1e-10,
        100_000,
        0,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(bits: u64, m: usize) -> F2Vector {
        F2Vector::new(bits, m).unwrap()
    }

    #[test]
    fn basis_roundtrip_and_sectors() {
        let b = Basis::new(3, 2).unwrap();
        assert_eq!(b.dim(), 256);
        for i in 0..b.dim() {
            let d = b.decode(i).unwrap();
            assert_eq!(b.index(&d.components).unwrap(), i);
        }
        assert_eq!(b.sector(0), Sector::Identity);
        let counts: Vec<usize> = Sector::orbits(3).iter().map(|&s| b.sector_indices(s).len()).collect();
        let want: Vec<usize> = b.orbit_sizes().iter().map(|&x| x as usize).collect();
        assert_eq!(counts, want);
        assert_eq!(counts[4], 120);
        assert_eq!(counts[5], 90);
        assert!(Basis::new(4, 2).is_err());
        assert_eq!(Basis::new(3, 2).unwrap().complement_dim(), 4096 - 256);
    }

    #[test]
    fn sector_names_roundtrip() {
        for s in [Sector::Identity, Sector::NC, Sector::C, Sector::Haar] {
            assert_eq!(s.as_str().parse::<Sector>().unwrap(), s);
        }
        assert!(matches!("x".parse::<Sector>(), Err(Error::Unknown { .. })));
    }

    #[test]
    fn gp_is_identity_projector() {
        let gp = build_gp(3, 2).unwrap();
        assert_eq!(gp.dim(), 256);
        let sq = compose(&gp, &gp).unwrap();
        assert!(sq.exact_eq(&gp).unwrap());
        let x: Vec<f64> = (0..256).map(|i| i as f64).collect();
        assert_eq!(gp.apply(&x).unwrap(), x);
    }

    #[test]
    fn gt_fixes_identity_and_t2_action() {
        for m in 1..=3 {
            let gt = build_gt(2, m).unwrap();
            let r = gt.to_rational().unwrap();
            let b = gt.basis();
            let q = b.q() as f64;
            let mut e0 = vec![0.0; b.dim()];
            e0[0] = 1.0;
            assert_eq!(gt.apply(&e0).unwrap(), e0);
            // (G_T − ½)|a,a⟩ = (1/N²) Σ_{⟨a,h⟩=1} |h,h⟩
            for a in 1..b.dim() {
                for x in 0..b.dim() {
                    let lhs = r.get(x, a) - if x == a { 0.5 } else { 0.0 };
                    let rhs = if form_bits(a as u64, x as u64, m) == 1 { 1.0 / q } else { 0.0 };
                    assert!((lhs - rhs).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn gt_is_symmetric_and_stochastic() {
        for (t, m) in [(2, 1), (2, 2), (2, 3), (3, 1), (3, 2)] {
            let gt = build_gt(t, m).unwrap();
            let r = gt.to_rational().unwrap();
            assert!(r.is_symmetric());
            assert!(r.row_sum_nums().iter().all(|&s| s == r.den()));
            assert!(r.transpose().row_sum_nums().iter().all(|&s| s == r.den()));
        }
    }

    #[test]
    fn gt_matches_permutation_average() {
        for (t, m) in [(2, 2), (3, 1), (3, 2)] {
            let fast = build_gt(t, m).unwrap();
            let slow = build_gt_by_permutation_average(t, m).unwrap();
            assert!(fast.exact_eq(&slow).unwrap());
        }
    }

    #[test]
    fn h_is_projector_with_expected_rank() {
        for (t, m, rank) in [(2, 2, 2), (3, 2, 6), (2, 3, 2)] {
            let h = build_h(t, m).unwrap();
            let r = h.to_rational().unwrap();
            assert!(r.is_symmetric());
            assert_eq!(r.matmul(&r).unwrap(), r);
            let d = h.to_dense(DEFAULT_CAP).unwrap();
            let tr: f64 = d.trace();
            assert!((tr - rank as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn h_matches_spanning_vectors() {
        for (t, m) in [(2, 2), (3, 2), (3, 3)] {
            let h = build_h(t, m).unwrap().to_dense(DEFAULT_CAP).unwrap();
            let mut acc = DMatrix::zeros(h.nrows(), h.ncols());
            for (_, v) in haar_spanning_vectors(t, m).unwrap() {
                let col = nalgebra::DVector::from_vec(v);
                assert!((col.norm() - 1.0).abs() < 1e-12);
                acc += &col * col.transpose();
            }
            assert!((acc - h).abs().max() < 1e-12);
        }
    }

    #[test]
    fn h_matches_group_average() {
        for (t, m) in [(2, 1), (2, 2), (3, 1), (3, 2)] {
            let h = build_h(t, m).unwrap();
            let avg = haar_by_group_average(t, m).unwrap();
            assert!(h.exact_eq(&avg).unwrap(), "t={t} m={m}");
        }
    }

    #[test]
    fn composition_identities() {
        for (t, m) in [(2, 2), (3, 2)] {
            let gp = build_gp(t, m).unwrap();
            let gt = build_gt(t, m).unwrap();
            let h = build_h(t, m).unwrap();
            assert!(compose(&h, &gt).unwrap().exact_eq(&h).unwrap());
            assert!(compose(&gt, &h).unwrap().exact_eq(&h).unwrap());
            assert!(compose(&gp, &h).unwrap().exact_eq(&h).unwrap());
            let a = compose(&gt, &gp).unwrap();
            let b = compose(&gp, &gt).unwrap();
            assert!(a.exact_eq(&b).unwrap());
        }
    }

    #[test]
    fn power_apply_matches_compose() {
        let gt = build_gt(3, 2).unwrap();
        let x: Vec<f64> = (0..256).map(|i| ((i * 37) % 11) as f64 - 5.0).collect();
        assert_eq!(power_apply(&gt, 0, &x).unwrap(), x);
        let two = compose(&gt, &gt).unwrap().apply(&x).unwrap();
        let it = power_apply(&gt, 2, &x).unwrap();
        assert!(two.iter().zip(&it).all(|(a, b)| (a - b).abs() < 1e-12));
        let (_, w) = haar_spanning_vectors(3, 2).unwrap().pop().unwrap();
        let y = power_apply(&gt, 5, &w).unwrap();
        assert!(y.iter().zip(&w).all(|(a, b)| (a - b).abs() < 1e-12));
    }

    #[test]
    fn op_norm_examples() {
        for m in 2..=3 {
            let h = build_h(2, m).unwrap();
            assert!((op_norm(&h, None, DEFAULT_CAP).unwrap() - 1.0).abs() < 1e-10);
            let gt = build_gt(2, m).unwrap();
            let n = (1 << m) as f64;
            let lam = op_norm(&gt, Some(&h), DEFAULT_CAP).unwrap();
            assert!((lam - 0.5 * (1.0 + 1.0 / n)).abs() < 1e-10);
            // Same value through the iterative path.
            let it = op_norm(&gt, Some(&h), 0).unwrap();
            assert!((it - lam).abs() < 1e-8);
        }
    }

    #[test]
    fn op_norm_rejects_non_symmetric() {
        let b = Basis::new(2, 1).unwrap();
        let r = RationalCsr::from_triplets(4, 4, vec![(0, 1, 1)], 1).unwrap();
        let a = Superoperator::from_rational(b, r).unwrap();
        assert!(matches!(op_norm(&a, None, 16), Err(Error::NonSymmetric(_))));
    }

    #[test]
    fn permutation_is_involution() {
        let h = v(0b0110, 2);
        let p = transvection_permutation(h, 3).unwrap();
        for (i, &j) in p.iter().enumerate() {
            assert_eq!(p[j as usize] as usize, i);
        }
    }

    #[test]
    fn cap_is_enforced() {
        let gt = build_gt(3, 2).unwrap();
        assert!(matches!(gt.to_dense(100), Err(Error::CapExceeded { .. })));
        assert!(matches!(build_gt(3, 5), Err(Error::CapExceeded { .. })));
    }
}
