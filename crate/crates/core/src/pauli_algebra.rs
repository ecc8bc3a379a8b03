// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Phase-exact Pauli-group arithmetic.
//!
//! A [`PauliLabel`] `(a, p)` stands for `i^p E(a)` with the Hermitian
//! representative `E(a) = i^{a_X·a_Z} X(a_X) Z(a_Z)`. All phase arithmetic is
//! integer arithmetic mod 4; nothing in this module touches floating point.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2_symplectic::{form_bits, low_mask, same_m, transvect_bits, F2Vector};

/// `i^p E(vec)`.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct PauliLabel {
    pub vec: F2Vector,
    /// Exponent of `i`, reduced mod 4.
    pub phase: u8,
}

impl PauliLabel {
    /// `i^phase E(vec)`.
    pub fn new(vec: F2Vector, phase: u8) -> Self {
        Self {
            vec,
            phase: phase & 3,
        }
    }

    /// The Hermitian representative `E(vec)`.
    pub fn hermitian(vec: F2Vector) -> Self {
        Self::new(vec, 0)
    }

    /// Multiplies by `i^k`.
    pub fn times_i_pow(self, k: u8) -> Self {
        Self::new(self.vec, self.phase.wrapping_add(k))
    }
}

/// Phase exponent `s` in `E(a)E(b) = i^s E(a+b)`:
/// `s = a_X·a_Z + b_X·b_Z + 2 a_Z·b_X − (a_X+b_X)·(a_Z+b_Z) (mod 4)`, where
/// the last dot product is taken after reducing `a+b` mod 2.
#[inline]
pub fn composition_phase(a: u64, b: u64, m: usize) -> u8 {
    let lm = low_mask(m);
    let (ax, az) = (a & lm, a >> m);
    let (bx, bz) = (b & lm, b >> m);
    let s = (ax & az).count_ones() as i64 + (bx & bz).count_ones() as i64
        + 2 * (az & bx).count_ones() as i64
        - ((ax ^ bx) & (az ^ bz)).count_ones() as i64;
    s.rem_euclid(4) as u8
}

/// Exact product `p·q`.
pub fn pauli_mul(p: PauliLabel, q: PauliLabel) -> Result<PauliLabel> {
    same_m(p.vec.m(), q.vec.m())?;
    let m = p.vec.m();
    let ph = p.phase + q.phase + composition_phase(p.vec.bits(), q.vec.bits(), m);
    Ok(PauliLabel::new(p.vec + q.vec, ph))
}

/// `0` if `p` and `q` commute, `1` if they anticommute.
pub fn commutes(p: PauliLabel, q: PauliLabel) -> Result<u8> {
    same_m(p.vec.m(), q.vec.m())?;
    Ok(form_bits(p.vec.bits(), q.vec.bits(), p.vec.m()))
}

/// Smallest `f` (in packed integer order) with `⟨h,f⟩ = 1`; `None` for `h = 0`.
pub fn find_anticommuting(h: F2Vector) -> Option<F2Vector> {
    let m = h.m();
    (0..2 * m)
        .map(|j| 1u64 << j)
        .find(|&e| form_bits(h.bits(), e, m) == 1)
        .map(|e| F2Vector::new(e, m).expect("unit vector within range"))
}

/// Gaussian integer `re + i·im`.
type Gauss = (i64, i64);

fn i_pow(p: u8) -> Gauss {
    match p & 3 {
        0 => (1, 0),
        1 => (0, 1),
        2 => (-1, 0),
        _ => (0, -1),
    }
}

fn chain(factors: &[PauliLabel]) -> Result<PauliLabel> {
    let mut acc = factors[0];
    for f in &factors[1..] {
        acc = pauli_mul(acc, *f)?;
    }
    Ok(acc)
}

/// Exact `U X U†` for the transvection Clifford `U = (F + iEF)/√2` with
/// `E = E(h)`, `F = E(f)`.
///
/// Expands `½(F + iEF) X (F − iFE)` into four Pauli products and collects
/// terms; the result is a single Pauli label with vector `x + ⟨x,h⟩h`.
pub fn transvection_adjoint(h: F2Vector, f: F2Vector, x: PauliLabel) -> Result<PauliLabel> {
    same_m(h.m(), f.m())?;
    same_m(h.m(), x.vec.m())?;
    let m = h.m();
    if form_bits(h.bits(), f.bits(), m) != 1 {
        return Err(Error::Precondition("transvection requires <h,f> = 1".into()));
    }
    let e = PauliLabel::hermitian(h);
    let fl = PauliLabel::hermitian(f);
    // (coefficient exponent, product)
    let terms = [
        (0u8, chain(&[fl, x, fl])?),
        (3u8, chain(&[fl, x, fl, e])?),
        (1u8, chain(&[e, fl, x, fl])?),
        (0u8, chain(&[e, fl, x, fl, e])?),
    ];
    let mut acc: BTreeMap<u64, Gauss> = BTreeMap::new();
    for (c, t) in terms {
        let (re, im) = i_pow(c + t.phase);
        let slot = acc.entry(t.vec.bits()).or_insert((0, 0));
        slot.0 += re;
        slot.1 += im;
    }
    acc.retain(|_, g| *g != (0, 0));
    if acc.len() != 1 {
        return Err(Error::Precondition(
            "adjoint action did not reduce to a single Pauli".into(),
        ));
    }
    let (&bits, &g) = acc.iter().next().expect("one entry");
    let phase = match g {
        (2, 0) => 0,
        (0, 2) => 1,
        (-2, 0) => 2,
        (0, -2) => 3,
        _ => {
            return Err(Error::Precondition(
                "adjoint action produced a non-unit coefficient".into(),
            ))
        }
    };
    Ok(PauliLabel::new(F2Vector::new(bits, m)?, phase))
}

/// `i^{global_phase} (factor₁ ⊗ … ⊗ factor_t)` for `t ∈ {1,2,3}`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct PauliTensor {
    pub factors: Vec<PauliLabel>,
    pub global_phase: u8,
}

impl PauliTensor {
    /// Builds a tensor, checking `1 <= t <= 3` and equal qubit counts.
    pub fn new(factors: Vec<PauliLabel>, global_phase: u8) -> Result<Self> {
        if factors.is_empty() || factors.len() > 3 {
            return Err(Error::InvalidCopyCount(factors.len()));
        }
        let m = factors[0].vec.m();
        for f in &factors {
            same_m(f.vec.m(), m)?;
        }
        Ok(Self {
            factors,
            global_phase: global_phase & 3,
        })
    }

    /// Total phase exponent: global phase plus every factor phase.
    pub fn total_phase(&self) -> u8 {
        self.factors
            .iter()
            .fold(self.global_phase, |acc, f| acc.wrapping_add(f.phase))
            & 3
    }

    /// Factor vectors.
    pub fn vectors(&self) -> Vec<F2Vector> {
        self.factors.iter().map(|f| f.vec).collect()
    }

    /// Factor-wise product.
    pub fn mul(&self, other: &PauliTensor) -> Result<PauliTensor> {
        if self.factors.len() != other.factors.len() {
            return Err(Error::DimensionMismatch {
                left: self.factors.len(),
                right: other.factors.len(),
            });
        }
        let factors = self
            .factors
            .iter()
            .zip(&other.factors)
            .map(|(a, b)| pauli_mul(*a, *b))
            .collect::<Result<Vec<_>>>()?;
        PauliTensor::new(factors, self.global_phase + other.global_phase)
    }

    /// Factor-wise adjoint action of `U_{E(h),E(f)}^{⊗t}`.
    pub fn transvection_adjoint(&self, h: F2Vector, f: F2Vector) -> Result<PauliTensor> {
        let factors = self
            .factors
            .iter()
            .map(|x| transvection_adjoint(h, f, *x))
            .collect::<Result<Vec<_>>>()?;
        PauliTensor::new(factors, self.global_phase)
    }

    /// Writes a sum-zero tensor as `i^s` times a canonical element; returns
    /// `(element, s)`.
    pub fn to_canonical(&self) -> Result<(CanonicalSumZeroElement, u8)> {
        let t = self.factors.len();
        if t < 2 {
            return Err(Error::InvalidCopyCount(t));
        }
        let m = self.factors[0].vec.m();
        let sum = self.factors.iter().fold(0u64, |acc, f| acc ^ f.vec.bits());
        if sum != 0 {
            return Err(Error::Precondition("tensor is not sum-zero".into()));
        }
        let comps: Vec<F2Vector> = self.factors[..t - 1].iter().map(|f| f.vec).collect();
        let c = canonicalize_sum_zero(&comps, m)?;
        let s = (self.total_phase() + 4 - c.to_tensor()?.total_phase()) & 3;
        Ok((c, s))
    }
}

/// Hermitian sum-zero basis element
/// `i^y (E(a₁) ⊗ … ⊗ E(a_{t−1})) ⊗ i^{−x} E(a_t)` with `a_t = Σ a_j` and
/// `E(a_t) = i^x E(a₁)⋯E(a_{t−1})`.
#[derive(Clone, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub struct CanonicalSumZeroElement {
    /// `(a₁, …, a_{t−1})`.
    pub components: Vec<F2Vector>,
    pub t: usize,
    pub x: u8,
    pub y: u8,
}

impl CanonicalSumZeroElement {
    /// The implied last component `a_t = Σ a_j`.
    pub fn last(&self) -> F2Vector {
        let m = self.components[0].m();
        let bits = self.components.iter().fold(0u64, |acc, a| acc ^ a.bits());
        F2Vector::new(bits, m).expect("sum stays in range")
    }

    /// The represented operator as a phased tensor.
    pub fn to_tensor(&self) -> Result<PauliTensor> {
        let mut factors: Vec<PauliLabel> = self
            .components
            .iter()
            .map(|a| PauliLabel::hermitian(*a))
            .collect();
        factors.push(PauliLabel::new(self.last(), (4 - self.x) & 3));
        PauliTensor::new(factors, self.y)
    }
}

/// Canonical Hermitian element for the tuple `(a₁, …, a_{t−1})`, `t ∈ {2,3}`.
pub fn canonicalize_sum_zero(components: &[F2Vector], m: usize) -> Result<CanonicalSumZeroElement> {
    let t = components.len() + 1;
    if !(2..=3).contains(&t) {
        return Err(Error::InvalidCopyCount(t));
    }
    for a in components {
        same_m(a.m(), m)?;
    }
    let labels: Vec<PauliLabel> = components.iter().map(|a| PauliLabel::hermitian(*a)).collect();
    let x = chain(&labels)?.phase;
    // Hermitian iff i^{y−x} is real.
    let y = x & 1;
    Ok(CanonicalSumZeroElement {
        components: components.to_vec(),
        t,
        x,
        y,
    })
}

/// Phase `s` with `U^{⊗t} C(a) U†^{⊗t} = i^s C(T_h a)` where `C` is the
/// canonical element and `U = U_{E(h),E(f)}`; `h = 0` is the identity.
pub fn adjoint_phase(h: F2Vector, f: F2Vector, element: &CanonicalSumZeroElement) -> Result<u8> {
    if h.is_zero() {
        return Ok(0);
    }
    let m = h.m();
    let image = element.to_tensor()?.transvection_adjoint(h, f)?;
    let mapped: Vec<F2Vector> = element
        .components
        .iter()
        .map(|a| F2Vector::new(transvect_bits(h.bits(), a.bits(), m), m))
        .collect::<Result<_>>()?;
    let target = canonicalize_sum_zero(&mapped, m)?;
    debug_assert_eq!(image.factors.last().map(|p| p.vec), Some(target.last()));
    Ok((image.total_phase() + 4 - target.to_tensor()?.total_phase()) & 3)
}

/// True iff the transvection Clifford maps the canonical element to the
/// canonical element of the transvected tuple with phase exactly `+1`.
pub fn verify_signfree(h: F2Vector, f: F2Vector, element: &CanonicalSumZeroElement) -> Result<bool> {
    Ok(adjoint_phase(h, f, element)? == 0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Complex, DMatrix};
    use proptest::prelude::*;

    type C = Complex<f64>;

    fn v(bits: u64, m: usize) -> F2Vector {
        F2Vector::new(bits, m).unwrap()
    }

    fn kron(a: &DMatrix<C>, b: &DMatrix<C>) -> DMatrix<C> {
        a.kronecker(b)
    }

    fn ipow(p: u8) -> C {
        [C::new(1., 0.), C::new(0., 1.), C::new(-1., 0.), C::new(0., -1.)][(p & 3) as usize]
    }

    /// Dense matrix of `i^p E(a)` built directly from X, Z and the phase
    /// `i^{a_X·a_Z}`, qubit 0 leftmost.
    fn label_matrix(p: PauliLabel) -> DMatrix<C> {
        let m = p.vec.m();
        let one = C::new(1., 0.);
        let zero = C::new(0., 0.);
        let x = DMatrix::from_row_slice(2, 2, &[zero, one, one, zero]);
        let z = DMatrix::from_row_slice(2, 2, &[one, zero, zero, -one]);
        let id = DMatrix::<C>::identity(2, 2);
        let mut xm = DMatrix::<C>::identity(1, 1);
        let mut zm = DMatrix::<C>::identity(1, 1);
        for j in 0..m {
            xm = kron(&xm, if (p.vec.x_part() >> j) & 1 == 1 { &x } else { &id });
            zm = kron(&zm, if (p.vec.z_part() >> j) & 1 == 1 { &z } else { &id });
        }
        let dot = (p.vec.x_part() & p.vec.z_part()).count_ones() as u8;
        (xm * zm) * ipow(dot + p.phase)
    }

    fn tensor_matrix(t: &PauliTensor) -> DMatrix<C> {
        let mut acc = DMatrix::<C>::identity(1, 1);
        for f in &t.factors {
            acc = kron(&acc, &label_matrix(*f));
        }
        acc * ipow(t.global_phase)
    }

    fn close(a: &DMatrix<C>, b: &DMatrix<C>) -> bool {
        (a - b).iter().all(|z| z.norm() < 1e-12)
    }

    fn all_labels(m: usize) -> Vec<PauliLabel> {
        F2Vector::all(m)
            .unwrap()
            .flat_map(|a| (0..4).map(move |p| PauliLabel::new(a, p)))
            .collect()
    }

    #[test]
    fn representatives_are_hermitian() {
        for m in 1..=2 {
            for a in F2Vector::all(m).unwrap() {
                let e = label_matrix(PauliLabel::hermitian(a));
                assert!(close(&e, &e.adjoint()));
            }
        }
        // E(1,1) on one qubit is Y.
        let y = label_matrix(PauliLabel::hermitian(v(0b11, 1)));
        let want = DMatrix::from_row_slice(2, 2, &[C::new(0., 0.), C::new(0., -1.), C::new(0., 1.), C::new(0., 0.)]);
        assert!(close(&y, &want));
    }

    #[test]
    fn square_is_identity() {
        for a in F2Vector::all(2).unwrap() {
            let e = PauliLabel::hermitian(a);
            let sq = pauli_mul(e, e).unwrap();
            assert!(sq.vec.is_zero());
            assert_eq!(sq.phase, 0);
        }
    }

    #[test]
    fn xz_and_zx_differ_by_sign() {
        let x = PauliLabel::hermitian(v(0b01, 1));
        let z = PauliLabel::hermitian(v(0b10, 1));
        let xz = pauli_mul(x, z).unwrap();
        let zx = pauli_mul(z, x).unwrap();
        assert_eq!(xz.vec, zx.vec);
        assert_eq!((xz.phase + 2) & 3, zx.phase);
    }

    #[test]
    fn mul_matches_matrix_oracle() {
        for m in 1..=2 {
            let labels = all_labels(m);
            for &p in &labels {
                for &q in &labels {
                    let got = label_matrix(pauli_mul(p, q).unwrap());
                    let want = label_matrix(p) * label_matrix(q);
                    assert!(close(&got, &want), "{p:?} {q:?}");
                }
            }
        }
    }

    #[test]
    fn commutes_matches_matrix_oracle() {
        let labels = all_labels(1);
        for &p in &labels {
            for &q in &labels {
                let (a, b) = (label_matrix(p), label_matrix(q));
                let comm = &a * &b - &b * &a;
                let want = if comm.iter().all(|z| z.norm() < 1e-12) { 0 } else { 1 };
                assert_eq!(commutes(p, q).unwrap(), want);
            }
        }
        let x = PauliLabel::hermitian(v(0b01, 1));
        assert_eq!(commutes(x, x).unwrap(), 0);
        assert_eq!(commutes(x, PauliLabel::hermitian(v(0b10, 1))).unwrap(), 1);
    }

    #[test]
    fn find_anticommuting_is_minimal() {
        for m in 1..=3 {
            assert!(find_anticommuting(F2Vector::zero(m).unwrap()).is_none());
            for h in F2Vector::all(m).unwrap().skip(1) {
                let f = find_anticommuting(h).unwrap();
                assert_eq!(form_bits(h.bits(), f.bits(), m), 1);
                let smaller = (1..f.bits()).any(|g| form_bits(h.bits(), g, m) == 1);
                assert!(!smaller);
            }
        }
    }

    #[test]
    fn adjoint_rejects_commuting_pair() {
        let h = v(0b01, 1);
        let err = transvection_adjoint(h, h, PauliLabel::hermitian(h)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn adjoint_matches_matrix_oracle() {
        for m in 1..=2 {
            let s = std::f64::consts::FRAC_1_SQRT_2;
            for h in F2Vector::all(m).unwrap() {
                for f in F2Vector::all(m).unwrap() {
                    if form_bits(h.bits(), f.bits(), m) != 1 {
                        continue;
                    }
                    let e = label_matrix(PauliLabel::hermitian(h));
                    let fm = label_matrix(PauliLabel::hermitian(f));
                    let u = (&fm + &e * &fm * C::new(0., 1.)) * C::new(s, 0.);
                    for x in all_labels(m) {
                        let got = transvection_adjoint(h, f, x).unwrap();
                        let want = &u * label_matrix(x) * u.adjoint();
                        assert!(close(&label_matrix(got), &want));
                        let tv = transvect_bits(h.bits(), x.vec.bits(), m);
                        assert_eq!(got.vec.bits(), tv);
                        if form_bits(x.vec.bits(), h.bits(), m) == 0 {
                            assert_eq!(got.vec, x.vec);
                        } else {
                            assert_eq!(got.vec, x.vec + h);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn canonical_zero_and_diagonal() {
        let z = F2Vector::zero(2).unwrap();
        let c = canonicalize_sum_zero(&[z, z], 2).unwrap();
        assert_eq!((c.x, c.y), (0, 0));
        for a in F2Vector::all(2).unwrap() {
            let c = canonicalize_sum_zero(&[a], 2).unwrap();
            assert_eq!((c.x, c.y), (0, 0));
            assert_eq!(c.last(), a);
        }
        assert!(matches!(canonicalize_sum_zero(&[], 2), Err(Error::InvalidCopyCount(1))));
    }

    #[test]
    fn canonical_elements_are_hermitian_m1_t3() {
        for a in F2Vector::all(1).unwrap() {
            for b in F2Vector::all(1).unwrap() {
                let c = canonicalize_sum_zero(&[a, b], 1).unwrap();
                let mat = tensor_matrix(&c.to_tensor().unwrap());
                assert_eq!(mat.nrows(), 8);
                assert!(close(&mat, &mat.adjoint()));
                assert!(c.y <= 1);
            }
        }
    }

    #[test]
    fn identity_transvection_is_signfree() {
        let z = F2Vector::zero(1).unwrap();
        let c = canonicalize_sum_zero(&[v(1, 1), v(2, 1)], 1).unwrap();
        assert!(verify_signfree(z, v(1, 1), &c).unwrap());
    }

    #[test]
    fn signfree_exhaustive_m1() {
        let m = 1;
        for h in F2Vector::all(m).unwrap() {
            for f in F2Vector::all(m).unwrap() {
                if !h.is_zero() && form_bits(h.bits(), f.bits(), m) != 1 {
                    continue;
                }
                for a in F2Vector::all(m).unwrap() {
                    assert!(verify_signfree(h, f, &canonicalize_sum_zero(&[a], m).unwrap()).unwrap());
                    for b in F2Vector::all(m).unwrap() {
                        let c = canonicalize_sum_zero(&[a, b], m).unwrap();
                        assert!(verify_signfree(h, f, &c).unwrap());
                    }
                }
            }
        }
    }

    #[test]
    fn signfree_random_m2() {
        use rand::{Rng, SeedableRng};
        let m = 2;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let mut done = 0;
        while done < 10_000 {
            let h = v(rng.random_range(1..16), m);
            let f = v(rng.random_range(0..16), m);
            if form_bits(h.bits(), f.bits(), m) != 1 {
                continue;
            }
            let a = v(rng.random_range(0..16), m);
            let b = v(rng.random_range(0..16), m);
            let c = canonicalize_sum_zero(&[a, b], m).unwrap();
            assert!(verify_signfree(h, f, &c).unwrap());
            done += 1;
        }
    }

    #[test]
    fn to_canonical_recovers_phase() {
        let a = v(0b01, 1);
        let b = v(0b10, 1);
        let c = canonicalize_sum_zero(&[a, b], 1).unwrap();
        let mut t = c.to_tensor().unwrap();
        t.global_phase = (t.global_phase + 2) & 3;
        let (back, s) = t.to_canonical().unwrap();
        assert_eq!(back, c);
        assert_eq!(s, 2);
    }

    proptest! {
        #[test]
        fn mul_is_associative(m in 1usize..=4, a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), pa in 0u8..4, pb in 0u8..4, pc in 0u8..4) {
            let mk = (1u64 << (2 * m)) - 1;
            let p = PauliLabel::new(v(a & mk, m), pa);
            let q = PauliLabel::new(v(b & mk, m), pb);
            let r = PauliLabel::new(v(c & mk, m), pc);
            let lhs = pauli_mul(pauli_mul(p, q).unwrap(), r).unwrap();
            let rhs = pauli_mul(p, pauli_mul(q, r).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
            prop_assert_eq!(lhs.vec.bits(), (a ^ b ^ c) & mk);
        }

        #[test]
        fn adjoint_preserves_commutation(m in 1usize..=4, h in any::<u64>(), x in any::<u64>(), y in any::<u64>()) {
            let mk = (1u64 << (2 * m)) - 1;
            let h = v(h & mk, m);
            prop_assume!(!h.is_zero());
            let f = find_anticommuting(h).unwrap();
            let x = PauliLabel::hermitian(v(x & mk, m));
            let y = PauliLabel::hermitian(v(y & mk, m));
            let ux = transvection_adjoint(h, f, x).unwrap();
            let uy = transvection_adjoint(h, f, y).unwrap();
            prop_assert_eq!(commutes(ux, uy).unwrap(), commutes(x, y).unwrap());
        }
    }
}
