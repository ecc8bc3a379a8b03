// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Exact arithmetic over F₂^{2m}: symplectic form, transvections, symplectic
//! matrices and the solution-counting oracle for systems of symplectic
//! constraints.
//!
//! Vectors are packed into one `u64`: bits `0..m` hold the X-part and bits
//! `m..2m` the Z-part. The form is `⟨a,b⟩ = a_X·b_Z + a_Z·b_X (mod 2)`, which is
//! `aᵀΩb` with `Ω = [[0, 1], [1, 0]]` in block form.

use std::collections::{HashSet, VecDeque};
use std::fmt;
use std::ops::Add;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported qubit count (a vector must fit in one `u64`).
pub const MAX_M: usize = 32;

fn check_m(m: usize) -> Result<()> {
    if m == 0 || m > MAX_M {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "expected 1 <= m <= 32",
        });
    }
    Ok(())
}

/// Mask of the low `m` bits.
#[inline]
pub(crate) fn low_mask(m: usize) -> u64 {
    if m >= 64 {
        u64::MAX
    } else {
        (1u64 << m) - 1
    }
}

/// Mask of all `2m` bits of a vector.
#[inline]
pub(crate) fn full_mask(m: usize) -> u64 {
    low_mask(2 * m)
}

/// Symplectic form on raw packed vectors.
#[inline]
pub fn form_bits(a: u64, b: u64, m: usize) -> u8 {
    let lm = low_mask(m);
    (((a & lm) & (b >> m)).count_ones() + ((a >> m) & (b & lm)).count_ones()) as u8 & 1
}

/// Transvection `T_h(a) = a + ⟨a,h⟩h` on raw packed vectors.
#[inline]
pub fn transvect_bits(h: u64, a: u64, m: usize) -> u64 {
    if form_bits(a, h, m) == 1 {
        a ^ h
    } else {
        a
    }
}

/// `Ω a`: exchanges the X- and Z-halves.
#[inline]
fn omega_bits(a: u64, m: usize) -> u64 {
    (a >> m) | ((a & low_mask(m)) << m)
}

/// A vector in F₂^{2m}, labelling a Pauli operator up to phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Serialize, Deserialize)]
pub struct F2Vector {
    bits: u64,
    m: u8,
}

impl F2Vector {
    /// Builds a vector from packed bits; fails if bits beyond `2m` are set.
    pub fn new(bits: u64, m: usize) -> Result<Self> {
        check_m(m)?;
        if bits & !full_mask(m) != 0 {
            return Err(Error::OutOfRange(format!(
                "bits {bits:#x} exceed 2m = {} positions",
                2 * m
            )));
        }
        Ok(Self { bits, m: m as u8 })
    }

    /// Unchecked constructor for internal hot loops.
    #[inline]
    pub(crate) fn from_raw(bits: u64, m: usize) -> Self {
        debug_assert!(bits & !full_mask(m) == 0);
        Self { bits, m: m as u8 }
    }

    /// The zero vector.
    pub fn zero(m: usize) -> Result<Self> {
        Self::new(0, m)
    }

    /// Builds a vector from separate X- and Z-parts (each `m` bits).
    pub fn from_xz(x: u64, z: u64, m: usize) -> Result<Self> {
        check_m(m)?;
        if x & !low_mask(m) != 0 || z & !low_mask(m) != 0 {
            return Err(Error::OutOfRange("X/Z part wider than m bits".into()));
        }
        Self::new(x | (z << m), m)
    }

    /// The standard basis vector `e_i`, `0 <= i < 2m`.
    pub fn unit(i: usize, m: usize) -> Result<Self> {
        check_m(m)?;
        if i >= 2 * m {
            return Err(Error::OutOfRange(format!("unit index {i} >= 2m")));
        }
        Self::new(1u64 << i, m)
    }

    /// Iterates over all `4^m` vectors in increasing packed order.
    pub fn all(m: usize) -> Result<impl Iterator<Item = F2Vector>> {
        check_m(m)?;
        if m > 16 {
            return Err(Error::InvalidQubitCount {
                m,
                reason: "exhaustive enumeration limited to m <= 16",
            });
        }
        Ok((0..(1u64 << (2 * m))).map(move |b| F2Vector::from_raw(b, m)))
    }

    /// Packed bits.
    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    /// Qubit count.
    #[inline]
    pub fn m(&self) -> usize {
        self.m as usize
    }

    /// Vector length `2m`.
    #[inline]
    pub fn len(&self) -> usize {
        2 * self.m as usize
    }

    /// True for the zero vector.
    #[inline]
    pub fn is_zero(&self) -> bool {
        self.bits == 0
    }

    /// X-part `a_X`.
    #[inline]
    pub fn x_part(&self) -> u64 {
        self.bits & low_mask(self.m())
    }

    /// Z-part `a_Z`.
    #[inline]
    pub fn z_part(&self) -> u64 {
        self.bits >> self.m()
    }

    /// Bit `i` (0-based).
    #[inline]
    pub fn bit(&self, i: usize) -> u8 {
        ((self.bits >> i) & 1) as u8
    }

    /// Checked addition.
    pub fn try_add(self, other: F2Vector) -> Result<F2Vector> {
        same_m(self.m(), other.m())?;
        Ok(F2Vector::from_raw(self.bits ^ other.bits, self.m()))
    }
}

impl Add for F2Vector {
    type Output = F2Vector;

    /// Bitwise XOR. Panics if the qubit counts differ.
    fn add(self, rhs: F2Vector) -> F2Vector {
        assert_eq!(self.m, rhs.m, "F2Vector addition across different m");
        F2Vector::from_raw(self.bits ^ rhs.bits, self.m())
    }
}

impl fmt::Display for F2Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.m();
        for i in 0..m {
            write!(f, "{}", (self.x_part() >> i) & 1)?;
        }
        write!(f, "|")?;
        for i in 0..m {
            write!(f, "{}", (self.z_part() >> i) & 1)?;
        }
        Ok(())
    }
}

pub(crate) fn same_m(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::DimensionMismatch { left: a, right: b });
    }
    Ok(())
}

/// Symplectic form `⟨a,b⟩ ∈ {0,1}`.
pub fn symplectic_form(a: F2Vector, b: F2Vector) -> Result<u8> {
    same_m(a.m(), b.m())?;
    Ok(form_bits(a.bits, b.bits, a.m()))
}

/// Label of the transvection `T_h`; `h = 0` is the identity.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct TransvectionLabel {
    pub h: F2Vector,
}

impl TransvectionLabel {
    /// Wraps `h`.
    pub fn new(h: F2Vector) -> Self {
        Self { h }
    }

    /// `T_h(a)`.
    pub fn apply(&self, a: F2Vector) -> Result<F2Vector> {
        transvection_apply(self, a)
    }

    /// The 2m×2m matrix `1 + h (Ωh)ᵀ`.
    pub fn matrix(&self) -> SymplecticMatrix {
        SymplecticMatrix::transvection(self.h)
    }
}

/// `T_h(a) = a + ⟨a,h⟩h`.
pub fn transvection_apply(h: &TransvectionLabel, a: F2Vector) -> Result<F2Vector> {
    same_m(h.h.m(), a.m())?;
    Ok(F2Vector::from_raw(transvect_bits(h.h.bits, a.bits, a.m()), a.m()))
}

/// A 2m×2m matrix over F₂, stored as row bitmasks (bit `j` of row `i` is
/// entry `(i, j)`).
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct SymplecticMatrix {
    m: u8,
    rows: Vec<u64>,
}

impl SymplecticMatrix {
    /// Identity matrix.
    pub fn identity(m: usize) -> Result<Self> {
        check_m(m)?;
        Ok(Self {
            m: m as u8,
            rows: (0..2 * m).map(|i| 1u64 << i).collect(),
        })
    }

    /// Builds a matrix from `2m` row vectors. Does not check the symplectic
    /// condition (see [`is_symplectic`]).
    pub fn from_rows(rows: &[F2Vector]) -> Result<Self> {
        let m = rows.first().map(|r| r.m()).ok_or_else(|| {
            Error::Precondition("matrix needs at least one row".into())
        })?;
        if rows.len() != 2 * m {
            return Err(Error::DimensionMismatch {
                left: rows.len(),
                right: 2 * m,
            });
        }
        for r in rows {
            same_m(r.m(), m)?;
        }
        Ok(Self {
            m: m as u8,
            rows: rows.iter().map(|r| r.bits).collect(),
        })
    }

    /// Builds a matrix from its `2m` column images `S e_j`.
    pub fn from_columns(cols: &[F2Vector]) -> Result<Self> {
        Self::from_rows(cols)?.transpose_checked()
    }

    fn transpose_checked(&self) -> Result<Self> {
        Ok(self.transpose())
    }

    /// Matrix of the transvection `T_h`.
    pub fn transvection(h: F2Vector) -> Self {
        let m = h.m();
        let oh = omega_bits(h.bits, m);
        let rows = (0..2 * m)
            .map(|i| {
                let mut r = 1u64 << i;
                if (h.bits >> i) & 1 == 1 {
                    r ^= oh;
                }
                r
            })
            .collect();
        Self { m: m as u8, rows }
    }

    /// Qubit count.
    pub fn m(&self) -> usize {
        self.m as usize
    }

    /// Row `i` as a vector.
    pub fn row(&self, i: usize) -> F2Vector {
        F2Vector::from_raw(self.rows[i], self.m())
    }

    /// Column `j` (`S e_j`) as packed bits.
    pub fn column_bits(&self, j: usize) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, r)| acc | (((r >> j) & 1) << i))
    }

    /// `S a` on packed bits.
    #[inline]
    pub fn apply_bits(&self, a: u64) -> u64 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u64, |acc, (i, r)| acc | (((r & a).count_ones() as u64 & 1) << i))
    }

    /// `S a`.
    pub fn apply(&self, a: F2Vector) -> Result<F2Vector> {
        same_m(self.m(), a.m())?;
        Ok(F2Vector::from_raw(self.apply_bits(a.bits), self.m()))
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let n = 2 * self.m();
        Self {
            m: self.m,
            rows: (0..n).map(|j| self.column_bits(j)).collect(),
        }
    }

    /// Product `self ∘ other`.
    pub fn compose(&self, other: &SymplecticMatrix) -> Result<Self> {
        same_m(self.m(), other.m())?;
        let cols: Vec<u64> = (0..2 * self.m())
            .map(|j| self.apply_bits(other.column_bits(j)))
            .collect();
        let n = 2 * self.m();
        let rows = (0..n)
            .map(|i| {
                cols.iter()
                    .enumerate()
                    .fold(0u64, |acc, (j, c)| acc | (((c >> i) & 1) << j))
            })
            .collect();
        Ok(Self { m: self.m, rows })
    }

    /// Inverse `Ω Sᵀ Ω` of a symplectic matrix.
    pub fn inverse(&self) -> Result<Self> {
        if !is_symplectic(self) {
            return Err(Error::NotSymplectic);
        }
        let m = self.m();
        let st = self.transpose();
        let cols: Vec<F2Vector> = (0..2 * m)
            .map(|j| {
                let v = omega_bits(st.apply_bits(omega_bits(1u64 << j, m)), m);
                F2Vector::from_raw(v, m)
            })
            .collect();
        Self::from_columns(&cols)
    }
}

/// True iff `SᵀΩS = Ω`, i.e. the columns pair under the form exactly as the
/// standard basis does.
pub fn is_symplectic(s: &SymplecticMatrix) -> bool {
    let m = s.m();
    let n = 2 * m;
    if s.rows.len() != n {
        return false;
    }
    let cols: Vec<u64> = (0..n).map(|j| s.column_bits(j)).collect();
    for i in 0..n {
        for j in (i + 1)..n {
            let want = form_bits(1u64 << i, 1u64 << j, m);
            if form_bits(cols[i], cols[j], m) != want {
                return false;
            }
        }
    }
    true
}

/// Returns the label `S h`, so that `S T_h S⁻¹ = T_{Sh}`.
pub fn conjugate_transvection(
    s: &SymplecticMatrix,
    h: &TransvectionLabel,
) -> Result<TransvectionLabel> {
    same_m(s.m(), h.h.m())?;
    if !is_symplectic(s) {
        return Err(Error::NotSymplectic);
    }
    Ok(TransvectionLabel::new(s.apply(h.h)?))
}

/// Rank over F₂ of a set of row vectors (up to 128 bits each).
pub fn rank_f2(rows: &[u128]) -> usize {
    let mut basis: Vec<u128> = Vec::new();
    for &r in rows {
        let mut v = r;
        for &b in &basis {
            let top = 127 - b.leading_zeros();
            if (v >> top) & 1 == 1 {
                v ^= b;
            }
        }
        if v != 0 {
            // Keep the basis in reduced echelon form on leading bits.
            let top = 127 - v.leading_zeros();
            for b in basis.iter_mut() {
                if (*b >> top) & 1 == 1 {
                    *b ^= v;
                }
            }
            basis.push(v);
            basis.sort_unstable_by(|x, y| y.cmp(x));
        }
    }
    basis.len()
}

/// Number of `h ∈ F₂^{2m}` with `⟨a_j, h⟩ = b_j` for every constraint.
///
/// Uses the closed form: `N²/2^d` with `d = rank span{a_j}` when the system is
/// consistent, `0` otherwise.
pub fn count_solutions(constraints: &[(F2Vector, u8)], m: usize) -> Result<u128> {
    check_m(m)?;
    let mut coeff = Vec::with_capacity(constraints.len());
    let mut aug = Vec::with_capacity(constraints.len());
    for &(a, b) in constraints {
        same_m(a.m(), m)?;
        if b > 1 {
            return Err(Error::OutOfRange(format!("constraint value {b} is not a bit")));
        }
        coeff.push(a.bits as u128);
        aug.push(a.bits as u128 | ((b as u128) << 64));
    }
    let d = rank_f2(&coeff);
    if rank_f2(&aug) != d {
        return Ok(0);
    }
    Ok(1u128 << (2 * m - d))
}

/// All elements of Sp(2m, F₂), generated by breadth-first closure over the
/// `N²−1` non-trivial transvections. Limited to `m <= 2`.
pub fn enumerate_sp(m: usize) -> Result<Vec<SymplecticMatrix>> {
    check_m(m)?;
    if m > 2 {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "symplectic group enumeration limited to m <= 2",
        });
    }
    let gens: Vec<SymplecticMatrix> = (1..(1u64 << (2 * m)))
        .map(|h| SymplecticMatrix::transvection(F2Vector::from_raw(h, m)))
        .collect();
    let id = SymplecticMatrix::identity(m)?;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(id.rows.clone());
    queue.push_back(id);
    while let Some(s) = queue.pop_front() {
        for g in &gens {
            let p = g.compose(&s)?;
            if seen.insert(p.rows.clone()) {
                queue.push_back(p);
            }
        }
        out.push(s);
    }
    Ok(out)
}
