// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Invariant subspaces, intertwiners and Gram identities of the three-copy
//! adjoint representation on the sum-zero sector.
//!
//! Vectors are dense coefficient vectors over the three-copy basis
//! (`index = a·Q + b` for `|a, b, a+b⟩`). Group actions use the unsigned
//! label actions, which is what the twirl superoperators use.

use std::fmt;
use std::str::FromStr;

use nalgebra::{Complex, DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2_symplectic::{form_bits, F2Vector};
use crate::spectral_analysis::{group_eigenvalues, label_action, s3_projector, Check, Perm3, S3Kind, SpectrumReport};
use crate::twirl_superops::{build_gt, haar_spanning_vectors, Basis, Sector, Superoperator};

/// Relative drop tolerance of the Gram–Schmidt orthonormalization.
pub const DROP_TOL: f64 = 1e-8;
/// Pass threshold for subspace invariance residuals.
pub const INVARIANCE_TOL: f64 = 1e-9;
/// Pass threshold for intertwiner and exact-identity residuals.
pub const IDENTITY_TOL: f64 = 1e-10;

/// Names of the constructed subspaces.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubspaceLabel {
    VncD,
    Vnc1,
    Vnc2,
    VncNullS,
    VncNull1,
    VncComplement,
    VcD,
    WImage,
    Haar,
    Custom,
}

impl SubspaceLabel {
    /// The non-commuting list plus the commuting-sector diagonal space.
    pub const CONSTRUCTED: [SubspaceLabel; 7] = [
        SubspaceLabel::VncD,
        SubspaceLabel::Vnc1,
        SubspaceLabel::Vnc2,
        SubspaceLabel::VncNullS,
        SubspaceLabel::VncNull1,
        SubspaceLabel::VncComplement,
        SubspaceLabel::VcD,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            SubspaceLabel::VncD => "vnc_d",
            SubspaceLabel::Vnc1 => "vnc_1",
            SubspaceLabel::Vnc2 => "vnc_2",
            SubspaceLabel::VncNullS => "vnc_null_s",
            SubspaceLabel::VncNull1 => "vnc_null_1",
            SubspaceLabel::VncComplement => "vnc_complement",
            SubspaceLabel::VcD => "vc_d",
            SubspaceLabel::WImage => "w_image",
            SubspaceLabel::Haar => "haar",
            SubspaceLabel::Custom => "custom",
        }
    }
}

impl fmt::Display for SubspaceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SubspaceLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let all = [
            SubspaceLabel::VncD,
            SubspaceLabel::Vnc1,
            SubspaceLabel::Vnc2,
            SubspaceLabel::VncNullS,
            SubspaceLabel::VncNull1,
            SubspaceLabel::VncComplement,
            SubspaceLabel::VcD,
            SubspaceLabel::WImage,
            SubspaceLabel::Haar,
            SubspaceLabel::Custom,
        ];
        all.into_iter()
            .find(|l| l.as_str().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Unknown {
                kind: "subspace",
                name: s.to_string(),
            })
    }
}

/// Orthonormal basis of a subspace of the three-copy sum-zero space.
#[derive(Clone, Debug)]
pub struct SubspaceBasis {
    pub label: SubspaceLabel,
    pub m: usize,
    /// `dim × rank`, orthonormal columns.
    pub basis: DMatrix<f64>,
    /// Number of spanning vectors before orthonormalization.
    pub spanning: usize,
    /// Expected dimension, when known in closed form.
    pub claimed_dim: Option<usize>,
}

impl SubspaceBasis {
    /// Orthonormalizes `vectors` (each of length `Q²`).
    pub fn from_vectors(label: SubspaceLabel, m: usize, vectors: &[Vec<f64>], claimed_dim: Option<usize>) -> Result<Self> {
        let d = t3(m)?.dim();
        for v in vectors {
            if v.len() != d {
                return Err(Error::DimensionMismatch { left: v.len(), right: d });
            }
        }
        Ok(Self {
            label,
            m,
            basis: orthonormalize(d, vectors.iter().map(|v| v.as_slice()), None),
            spanning: vectors.len(),
            claimed_dim,
        })
    }

    /// Numerical rank.
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// Basis vectors as plain vectors.
    pub fn vectors(&self) -> Vec<Vec<f64>> {
        self.basis.column_iter().map(|c| c.iter().copied().collect()).collect()
    }

    /// True iff the rank equals the claimed dimension (or none is claimed).
    pub fn dim_matches(&self) -> bool {
        self.claimed_dim.is_none_or(|c| c == self.dim())
    }
}

fn t3(m: usize) -> Result<Basis> {
    let b = Basis::new(3, m)?;
    if m > 4 {
        return Err(Error::CapExceeded {
            what: "dense three-copy vector length",
            requested: b.dim(),
            cap: 1 << 16,
        });
    }
    Ok(b)
}

/// Modified Gram–Schmidt with one re-orthogonalization pass; vectors whose
/// residual falls below `DROP_TOL` times their norm are dropped. `prior`
/// columns (already orthonormal) are projected out but not returned.
fn orthonormalize<'a>(d: usize, vectors: impl Iterator<Item = &'a [f64]>, prior: Option<&DMatrix<f64>>) -> DMatrix<f64> {
    let mut cols: Vec<DVector<f64>> = Vec::new();
    for v in vectors {
        let mut w = DVector::from_column_slice(v);
        let n0 = w.norm();
        if n0 == 0.0 {
            continue;
        }
        for _ in 0..2 {
            if let Some(p) = prior {
                let c = p.tr_mul(&w);
                w -= p * c;
            }
            for q in &cols {
                let c = q.dot(&w);
                w.axpy(-c, q, 1.0);
            }
        }
        let n = w.norm();
        if n > DROP_TOL * n0 {
            cols.push(w / n);
        }
    }
    if cols.is_empty() {
        DMatrix::zeros(d, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

fn check_nonzero(a: F2Vector) -> Result<()> {
    if a.is_zero() {
        return Err(Error::Precondition("vector must be non-zero".into()));
    }
    Ok(())
}

fn hat_raw(basis: &Basis, a: u64, b: u64, out: &mut [f64], scale: f64) {
    let m = basis.m();
    let c = 2f64.sqrt() / basis.n() as f64 * scale;
    for h in 0..basis.q() as u64 {
        if form_bits(a, h, m) == 1 {
            let s = if form_bits(h, b, m) == 1 { -c } else { c };
            out[basis.join(a, h)] += s;
        }
    }
}

/// `|â;b⟩ = (√2/N) Σ_{⟨a,h⟩=1} (−1)^{⟨h,b⟩} |a,h,a+h⟩` for `a ≠ 0`,
/// `⟨a,b⟩ = 0`.
pub fn build_hat_ab(a: F2Vector, b: F2Vector) -> Result<Vec<f64>> {
    check_nonzero(a)?;
    if crate::gf2_symplectic::symplectic_form(a, b)? != 0 {
        return Err(Error::Precondition("requires <a,b> = 0".into()));
    }
    let basis = t3(a.m())?;
    let mut v = vec![0.0; basis.dim()];
    hat_raw(&basis, a.bits(), b.bits(), &mut v, 1.0);
    Ok(v)
}

/// `|ā⟩ = √(2/(N²−4)) Σ_{⟨a,h⟩=0, h≠0,a} |a,h,a+h⟩` (unit norm; `m ≥ 2`).
pub fn build_bar(a: F2Vector) -> Result<Vec<f64>> {
    check_nonzero(a)?;
    let m = a.m();
    if m < 2 {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "the commuting sector is empty for m = 1",
        });
    }
    let basis = t3(m)?;
    let mut v = vec![0.0; basis.dim()];
    bar_raw(&basis, a.bits(), &mut v);
    Ok(v)
}

fn bar_raw(basis: &Basis, a: u64, out: &mut [f64]) {
    let m = basis.m();
    let c = (2.0 / (basis.q() as f64 - 4.0)).sqrt();
    for h in 1..basis.q() as u64 {
        if h != a && form_bits(a, h, m) == 0 {
            out[basis.join(a, h)] += c;
        }
    }
}

/// `|A(a)⟩ = Σ_{⟨h,a⟩=0, h≠0,a} |ĥ;a⟩` for `a ≠ 0`.
pub fn build_a(a: F2Vector) -> Result<Vec<f64>> {
    check_nonzero(a)?;
    let basis = t3(a.m())?;
    let mut v = vec![0.0; basis.dim()];
    a_raw(&basis, a.bits(), &mut v);
    Ok(v)
}

fn a_raw(basis: &Basis, a: u64, out: &mut [f64]) {
    let m = basis.m();
    for h in 1..basis.q() as u64 {
        if h != a && form_bits(h, a, m) == 0 {
            hat_raw(basis, h, a, out, 1.0);
        }
    }
}

/// `|â;b⟩ + |b̂;a+b⟩ + |(a+b)^;a⟩` for `a ≠ b` non-zero with `⟨a,b⟩ = 0`.
pub fn null_triple(a: F2Vector, b: F2Vector) -> Result<Vec<f64>> {
    check_nonzero(a)?;
    check_nonzero(b)?;
    if a == b || crate::gf2_symplectic::symplectic_form(a, b)? != 0 {
        return Err(Error::Precondition("requires a != b and <a,b> = 0".into()));
    }
    let basis = t3(a.m())?;
    let mut v = vec![0.0; basis.dim()];
    triple_raw(&basis, a.bits(), b.bits(), &mut v);
    Ok(v)
}

fn triple_raw(basis: &Basis, a: u64, b: u64, out: &mut [f64]) {
    hat_raw(basis, a, b, out, 1.0);
    hat_raw(basis, b, a ^ b, out, 1.0);
    hat_raw(basis, a ^ b, a, out, 1.0);
}

/// Gram matrix `⟨A(a)|A(b)⟩` over non-zero `a, b` (packed order).
pub fn gram_a(m: usize) -> Result<DMatrix<f64>> {
    let basis = t3(m)?;
    let q = basis.q();
    let mut vs = DMatrix::zeros(basis.dim(), q - 1);
    for a in 1..q {
        let mut col = vec![0.0; basis.dim()];
        a_raw(&basis, a as u64, &mut col);
        vs.set_column(a - 1, &DVector::from_vec(col));
    }
    Ok(vs.tr_mul(&vs))
}

/// Eigenvalues of the `|A(a)⟩` Gram matrix; expected `{0 ×1,
/// (N²+N−2)/2, (N²−N−2)/2}` for `m ≥ 2`.
pub fn gram_a_spectrum(m: usize) -> Result<SpectrumReport> {
    let g = gram_a(m)?;
    let vals = crate::spectral_analysis::sym_eigenvalues(&g);
    let tagged: Vec<(f64, Sector)> = vals.into_iter().map(|v| (v, Sector::Other)).collect();
    Ok(SpectrumReport::from_tagged(3, m, &tagged))
}

/// Largest deviation of the Gram matrix from
/// `(N²/2 − 1)δ_{a,b} − δ_{⟨a,b⟩,0}`.
pub fn gram_a_formula_error(m: usize) -> Result<f64> {
    let g = gram_a(m)?;
    let q = 1usize << (2 * m);
    let mut err = 0.0f64;
    for a in 1..q {
        for b in 1..q {
            let mut want = if a == b { q as f64 / 2.0 - 1.0 } else { 0.0 };
            if form_bits(a as u64, b as u64, m) == 0 {
                want -= 1.0;
            }
            err = err.max((g[(a - 1, b - 1)] - want).abs());
        }
    }
    Ok(err)
}

/// `H_{x,y} = δ_{⟨x,y⟩,0}` over non-zero `x, y`.
fn commuting_matrix(m: usize) -> DMatrix<f64> {
    let q = 1usize << (2 * m);
    DMatrix::from_fn(q - 1, q - 1, |i, j| if form_bits(i as u64 + 1, j as u64 + 1, m) == 0 { 1.0 } else { 0.0 })
}

/// Coefficient vectors `λ` with `Σλ = 0` and `Σ_{⟨y,x⟩=0} λ_y = s·(N/2)·λ_x`
/// (`s = ±1`), as an orthonormal list.
pub fn v12_coefficients(m: usize, plus: bool) -> Result<Vec<Vec<f64>>> {
    let n = (1usize << m) as f64;
    let h = commuting_matrix(m);
    let target = if plus { n / 2.0 } else { -n / 2.0 };
    let e = SymmetricEigen::new(h);
    let q1 = e.eigenvalues.len();
    let ones = DVector::from_element(q1, 1.0 / (q1 as f64).sqrt());
    let mut raw: Vec<Vec<f64>> = Vec::new();
    for (k, &v) in e.eigenvalues.iter().enumerate() {
        if (v - target).abs() <= 1e-9 {
            let mut c = e.eigenvectors.column(k).into_owned();
            let p = ones.dot(&c);
            c.axpy(-p, &ones, 1.0);
            raw.push(c.iter().copied().collect());
        }
    }
    let mat = orthonormalize(q1, raw.iter().map(|v| v.as_slice()), None);
    Ok(mat.column_iter().map(|c| c.iter().copied().collect()).collect())
}

fn apply_perm(perm: &[u32], v: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; v.len()];
    for (i, &p) in perm.iter().enumerate() {
        out[p as usize] = v[i];
    }
    out
}

fn projector_apply(kind: S3Kind, m: usize, v: &[f64]) -> Result<Vec<f64>> {
    let c123 = label_action(Perm3::C123, m)?;
    let c132 = label_action(Perm3::C132, m)?;
    let a = apply_perm(&c123, v);
    let b = apply_perm(&c132, v);
    let (wi, wc) = match kind {
        S3Kind::S => (1.0, 1.0),
        S3Kind::P1 => (2.0, -1.0),
        _ => return Err(Error::Precondition("only P_S and P_1 are applied here".into())),
    };
    Ok((0..v.len()).map(|i| (wi * v[i] + wc * (a[i] + b[i])) / 3.0).collect())
}

fn admissible_pairs(m: usize) -> Vec<(u64, u64)> {
    let q = 1u64 << (2 * m);
    let mut out = Vec::new();
    for a in 1..q {
        for b in 1..q {
            if a != b && form_bits(a, b, m) == 0 {
                out.push((a, b));
            }
        }
    }
    out
}

fn null_claim(q: usize, div: usize) -> usize {
    (q - 1) * q.saturating_sub(4) / div
}

/// Builds one of the named subspaces. Null-space dimensions
/// `(Q−1)(Q−4)/36` (S) and `(Q−1)(Q−4)/18` (1) are measured values.
pub fn build_subspace(label: SubspaceLabel, m: usize) -> Result<SubspaceBasis> {
    let basis = t3(m)?;
    let q = basis.q();
    let nn = basis.n();
    let d = basis.dim();
    match label {
        SubspaceLabel::VncD => {
            let vs: Vec<Vec<f64>> = (1..q as u64)
                .map(|a| {
                    let mut v = vec![0.0; d];
                    hat_raw(&basis, a, 0, &mut v, 1.0);
                    v
                })
                .collect();
            SubspaceBasis::from_vectors(label, m, &vs, Some(q - 1))
        }
        SubspaceLabel::Vnc1 | SubspaceLabel::Vnc2 => {
            let plus = label == SubspaceLabel::Vnc1;
            let coeffs = v12_coefficients(m, plus)?;
            let avs: Vec<Vec<f64>> = (1..q as u64)
                .map(|a| {
                    let mut v = vec![0.0; d];
                    a_raw(&basis, a, &mut v);
                    v
                })
                .collect();
            let vs: Vec<Vec<f64>> = coeffs
                .iter()
                .map(|lam| {
                    let mut v = vec![0.0; d];
                    for (x, l) in lam.iter().enumerate() {
                        for (o, a) in v.iter_mut().zip(&avs[x]) {
                            *o += l * a;
                        }
                    }
                    v
                })
                .collect();
            let claim = if plus { nn * (nn + 1) / 2 - 1 } else { (nn * (nn - 1) / 2).saturating_sub(1) };
            SubspaceBasis::from_vectors(label, m, &vs, Some(claim))
        }
        SubspaceLabel::VncNullS | SubspaceLabel::VncNull1 => {
            let kind = if label == SubspaceLabel::VncNullS { S3Kind::S } else { S3Kind::P1 };
            let mut vs = Vec::new();
            for (a, b) in admissible_pairs(m) {
                let mut v = vec![0.0; d];
                triple_raw(&basis, a, b, &mut v);
                vs.push(projector_apply(kind, m, &v)?);
            }
            let div = if kind == S3Kind::S { 36 } else { 18 };
            SubspaceBasis::from_vectors(label, m, &vs, Some(null_claim(q, div)))
        }
        SubspaceLabel::VncComplement => {
            let parts: Vec<SubspaceBasis> = [
                SubspaceLabel::VncD,
                SubspaceLabel::Vnc1,
                SubspaceLabel::Vnc2,
                SubspaceLabel::VncNullS,
                SubspaceLabel::VncNull1,
            ]
            .into_iter()
            .map(|l| build_subspace(l, m))
            .collect::<Result<_>>()?;
            complement_of(m, &parts)
        }
        SubspaceLabel::VcD => {
            if m < 2 {
                return Err(Error::InvalidQubitCount {
                    m,
                    reason: "the commuting sector is empty for m = 1",
                });
            }
            let vs: Vec<Vec<f64>> = (1..q as u64)
                .map(|a| {
                    let mut v = vec![0.0; d];
                    bar_raw(&basis, a, &mut v);
                    v
                })
                .collect();
            SubspaceBasis::from_vectors(label, m, &vs, Some(q - 1))
        }
        SubspaceLabel::Haar => {
            let vs: Vec<Vec<f64>> = haar_spanning_vectors(3, m)?.into_iter().map(|x| x.1).collect();
            let n = vs.len();
            SubspaceBasis::from_vectors(label, m, &vs, Some(n))
        }
        SubspaceLabel::WImage | SubspaceLabel::Custom => Err(Error::Precondition(format!(
            "{label} is derived from another subspace; use w_image or random_subspace"
        ))),
    }
}

/// Orthonormal basis of the NC pairs `(|a,b,a+b⟩ + |a,a+b,b⟩)/√2`, one per
/// unordered `{b, a+b}`.
fn nc_symmetric_pairs(basis: &Basis) -> Vec<(usize, usize)> {
    let m = basis.m();
    let q = basis.q() as u64;
    let mut out = Vec::new();
    for a in 1..q {
        for b in 1..q {
            if form_bits(a, b, m) == 1 && b < (a ^ b) {
                out.push((basis.join(a, b), basis.join(a, a ^ b)));
            }
        }
    }
    out
}

fn complement_of(m: usize, parts: &[SubspaceBasis]) -> Result<SubspaceBasis> {
    let basis = t3(m)?;
    let pairs = nc_symmetric_pairs(&basis);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let total: usize = parts.iter().map(|p| p.dim()).sum();
    // Coordinates of the parts in the pair basis.
    let mut coords: Vec<Vec<f64>> = Vec::with_capacity(total);
    for p in parts {
        for c in p.basis.column_iter() {
            coords.push(pairs.iter().map(|&(i, j)| r * (c[i] + c[j])).collect());
        }
    }
    let k = pairs.len();
    let occupied = orthonormalize(k, coords.iter().map(|v| v.as_slice()), None);
    let units: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            let mut e = vec![0.0; k];
            e[i] = 1.0;
            e
        })
        .collect();
    let comp = orthonormalize(k, units.iter().map(|v| v.as_slice()), Some(&occupied));
    let mut full = DMatrix::zeros(basis.dim(), comp.ncols());
    for (col, c) in comp.column_iter().enumerate() {
        for (pi, &(i, j)) in pairs.iter().enumerate() {
            full[(i, col)] += r * c[pi];
            full[(j, col)] += r * c[pi];
        }
    }
    Ok(SubspaceBasis {
        label: SubspaceLabel::VncComplement,
        m,
        basis: full,
        spanning: k,
        claimed_dim: Some(k.saturating_sub(total)),
    })
}

/// Span of `W·S` with `W = W_(123) − W_(132)`.
pub fn w_image(source: &SubspaceBasis) -> Result<SubspaceBasis> {
    let m = source.m;
    let c123 = label_action(Perm3::C123, m)?;
    let c132 = label_action(Perm3::C132, m)?;
    let vs: Vec<Vec<f64>> = source
        .vectors()
        .iter()
        .map(|v| {
            let a = apply_perm(&c123, v);
            let b = apply_perm(&c132, v);
            a.iter().zip(&b).map(|(x, y)| x - y).collect()
        })
        .collect();
    let max_norm = vs.iter().map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt()).fold(0.0, f64::max);
    // Drop images that W annihilates (relative to the largest image).
    let kept: Vec<Vec<f64>> = vs
        .into_iter()
        .filter(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt() > DROP_TOL * max_norm.max(1.0))
        .collect();
    SubspaceBasis::from_vectors(SubspaceLabel::WImage, m, &kept, None)
}

/// Random `dim`-dimensional subspace of the NC sector (negative control).
pub fn random_subspace(m: usize, dim: usize, seed: u64) -> Result<SubspaceBasis> {
    let basis = t3(m)?;
    let nc = basis.sector_indices(Sector::NC);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vs: Vec<Vec<f64>> = (0..dim)
        .map(|_| {
            let mut v = vec![0.0; basis.dim()];
            for &i in &nc {
                v[i] = rng.random_range(-1.0..1.0);
            }
            v
        })
        .collect();
    SubspaceBasis::from_vectors(SubspaceLabel::Custom, m, &vs, Some(dim))
}

fn transvection_perm(basis: &Basis, h: u64) -> Vec<u32> {
    (0..basis.dim()).map(|i| basis.transvect_index(h, i) as u32).collect()
}

fn permute_rows(perm: &[u32], b: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(b.nrows(), b.ncols());
    for (i, &p) in perm.iter().enumerate() {
        out.row_mut(p as usize).copy_from(&b.row(i));
    }
    out
}

/// `max_h ‖(id − P_S) 𝒰_h P_S‖` over all transvections `h ≠ 0`, reported
/// as the Frobenius norm (an upper bound on the operator norm). Pauli
/// twirls act trivially on the sum-zero sector and need no check.
pub fn verify_invariance(s: &SubspaceBasis, m: usize) -> Result<f64> {
    if s.m != m {
        return Err(Error::DimensionMismatch { left: s.m, right: m });
    }
    let basis = t3(m)?;
    if s.dim() == 0 {
        return Ok(0.0);
    }
    let mut worst = 0.0f64;
    for h in 1..basis.q() as u64 {
        let mb = permute_rows(&transvection_perm(&basis, h), &s.basis);
        let c = s.basis.tr_mul(&mb);
        let r = mb - &s.basis * c;
        worst = worst.max(r.norm());
    }
    Ok(worst)
}

/// Randomized invariance residual: `samples` draws of a transvection `h`
/// and a unit vector `v ∈ S`, returning `max ‖(id − P_S) 𝒰_h v‖`.
pub fn verify_invariance_sampled(s: &SubspaceBasis, m: usize, samples: usize, seed: u64) -> Result<f64> {
    if s.m != m {
        return Err(Error::DimensionMismatch { left: s.m, right: m });
    }
    let basis = t3(m)?;
    if s.dim() == 0 {
        return Ok(0.0);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0f64;
    for _ in 0..samples {
        let h = rng.random_range(1..basis.q() as u64);
        let c = DVector::from_fn(s.dim(), |_, _| rng.random_range(-1.0..1.0));
        let v = &s.basis * c.normalize();
        let mut u = DVector::zeros(basis.dim());
        for i in 0..basis.dim() {
            u[basis.transvect_index(h, i)] = v[i];
        }
        let proj = &s.basis * s.basis.tr_mul(&u);
        worst = worst.max((u - proj).norm());
    }
    Ok(worst)
}

/// `‖Q_iᵀ Q_j‖` (operator norm of the overlap of two subspaces).
pub fn overlap(a: &SubspaceBasis, b: &SubspaceBasis) -> f64 {
    if a.dim() == 0 || b.dim() == 0 {
        return 0.0;
    }
    a.basis.tr_mul(&b.basis).singular_values().max()
}

/// Eigenvalues of `Qᵀ 𝒢_T Q` with multiplicities, and the residual
/// `‖𝒢_T Q − Q (Qᵀ 𝒢_T Q)‖_F`.
pub fn gt_compression(s: &SubspaceBasis, gt: &Superoperator) -> Result<(Vec<(f64, usize)>, f64)> {
    if s.dim() == 0 {
        return Ok((Vec::new(), 0.0));
    }
    let cols: Vec<DVector<f64>> = s
        .basis
        .column_iter()
        .map(|c| gt.apply(c.as_slice()).map(DVector::from_vec))
        .collect::<Result<_>>()?;
    let g = DMatrix::from_columns(&cols);
    let comp = s.basis.tr_mul(&g);
    let resid = (&g - &s.basis * &comp).norm();
    let sym = (&comp + comp.transpose()) * 0.5;
    let vals = crate::spectral_analysis::sym_eigenvalues(&sym);
    Ok((group_eigenvalues(&vals, 1e-8), resid))
}

/// Admissible pairs for the null-eigenspace identity, either all of them or
/// `samples` random ones.
fn null_pairs(m: usize, samples: Option<(usize, u64)>) -> Vec<(u64, u64)> {
    let all = admissible_pairs(m);
    match samples {
        None => all,
        Some((n, seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..n).map(|_| all[rng.random_range(0..all.len())]).collect()
        }
    }
}

/// `max ‖(𝒢_T − ¼ id)(|â;b⟩ + |b̂;a+b⟩ + |(a+b)^;a⟩)‖` over admissible
/// pairs (all of them, or a seeded sample).
pub fn null_eigenspace_residual(m: usize, samples: Option<(usize, u64)>) -> Result<f64> {
    let basis = t3(m)?;
    let gt = build_gt(3, m)?;
    let mut worst = 0.0f64;
    for (a, b) in null_pairs(m, samples) {
        let mut v = vec![0.0; basis.dim()];
        triple_raw(&basis, a, b, &mut v);
        let g = gt.apply(&v)?;
        let r = g.iter().zip(&v).map(|(x, y)| (x - 0.25 * y).powi(2)).sum::<f64>().sqrt();
        worst = worst.max(r);
    }
    Ok(worst)
}

/// Exhaustive for `m ≤ 2`, 10³ seeded pairs otherwise.
pub fn verify_null_eigenspace(m: usize) -> Result<bool> {
    let samples = if m <= 2 { None } else { Some((1000, 0x5eed)) };
    Ok(null_eigenspace_residual(m, samples)? <= IDENTITY_TOL)
}

/// Named intertwiners between the two-copy diagonal sector and
/// three-copy subspaces.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IntertwinerKind {
    /// `|a,a⟩ ↦ |â⟩`.
    DToNc,
    /// `|a,a⟩ ↦ |ā⟩`.
    DToC,
    /// `Σλ_a|A(a)⟩ ↦ Σλ_a|a,a⟩` on `Σλ = 0`.
    KV12,
}

impl FromStr for IntertwinerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "d_to_nc" => Ok(Self::DToNc),
            "d_to_c" => Ok(Self::DToC),
            "k_v12" => Ok(Self::KV12),
            _ => Err(Error::Unknown {
                kind: "intertwiner",
                name: s.to_string(),
            }),
        }
    }
}

/// `T_h` on the two-copy diagonal sector, as a permutation of non-zero `a`
/// (packed index `a − 1`).
fn diag_perm(m: usize, h: u64) -> Vec<usize> {
    let q = 1u64 << (2 * m);
    (1..q)
        .map(|a| (crate::gf2_symplectic::transvect_bits(h, a, m) - 1) as usize)
        .collect()
}

/// Maximum over transvections of the equivariance defect
/// `‖𝒰_h L − L 𝒰_h‖_F` (restricted to the intertwiner's domain).
pub fn intertwiner_check(kind: IntertwinerKind, m: usize) -> Result<f64> {
    let basis = t3(m)?;
    let q = basis.q();
    let d = basis.dim();
    match kind {
        IntertwinerKind::DToNc | IntertwinerKind::DToC => {
            if kind == IntertwinerKind::DToC && m < 2 {
                return Err(Error::InvalidQubitCount {
                    m,
                    reason: "the commuting sector is empty for m = 1",
                });
            }
            let mut l = DMatrix::zeros(d, q - 1);
            for a in 1..q as u64 {
                let mut v = vec![0.0; d];
                if kind == IntertwinerKind::DToNc {
                    hat_raw(&basis, a, 0, &mut v, 1.0);
                } else {
                    bar_raw(&basis, a, &mut v);
                }
                l.set_column(a as usize - 1, &DVector::from_vec(v));
            }
            let mut worst = 0.0f64;
            for h in 1..q as u64 {
                let ul = permute_rows(&transvection_perm(&basis, h), &l);
                let p = diag_perm(m, h);
                let mut lu = DMatrix::zeros(d, q - 1);
                for (a, &img) in p.iter().enumerate() {
                    lu.set_column(a, &l.column(img));
                }
                worst = worst.max((ul - lu).norm());
            }
            Ok(worst)
        }
        IntertwinerKind::KV12 => {
            // Domain basis: x_j = Σ_a λ^(j)_a |A(a)⟩ over an orthonormal basis
            // of the sum-zero coefficient space; K is fitted by least squares.
            let mut avs = DMatrix::zeros(d, q - 1);
            for a in 1..q as u64 {
                let mut v = vec![0.0; d];
                a_raw(&basis, a, &mut v);
                avs.set_column(a as usize - 1, &DVector::from_vec(v));
            }
            let ones = DVector::from_element(q - 1, 1.0);
            let units: Vec<Vec<f64>> = (0..q - 1)
                .map(|i| {
                    let mut e = vec![0.0; q - 1];
                    e[i] = 1.0;
                    e
                })
                .collect();
            let ones_m = DMatrix::from_columns(&[ones.normalize()]);
            let lam = orthonormalize(q - 1, units.iter().map(|v| v.as_slice()), Some(&ones_m));
            if lam.ncols() == 0 {
                return Ok(0.0);
            }
            let x = &avs * &lam;
            let y = lam.clone();
            let x_pinv = x
                .clone()
                .pseudo_inverse(1e-10)
                .map_err(|e| Error::Precondition(e.to_string()))?;
            let k = &y * x_pinv;
            let mut worst = 0.0f64;
            for h in 1..q as u64 {
                let ux = permute_rows(&transvection_perm(&basis, h), &x);
                let p = diag_perm(m, h);
                let ky = &k * &x;
                let mut uky = DMatrix::zeros(q - 1, ky.ncols());
                for (a, &img) in p.iter().enumerate() {
                    uky.row_mut(img).copy_from(&ky.row(a));
                }
                worst = worst.max((uky - &k * ux).norm());
            }
            Ok(worst)
        }
    }
}

/// Result of one inner-product identity check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InnerProductCheck {
    pub name: String,
    pub m: usize,
    pub pairs: usize,
    pub max_error: f64,
}

/// `⟨ĥ;a|k̂;b⟩ = δ_{h,k}(δ_{a,b} − δ_{h,a+b})` over all admissible
/// `(h,a)`, `(k,b)`.
pub fn check_inner_hat(m: usize) -> Result<InnerProductCheck> {
    let basis = t3(m)?;
    let q = basis.q() as u64;
    let mut vecs: Vec<(u64, u64, Vec<(usize, f64)>)> = Vec::new();
    for h in 1..q {
        for a in 0..q {
            if form_bits(h, a, m) == 0 {
                let mut v = vec![0.0; basis.dim()];
                hat_raw(&basis, h, a, &mut v, 1.0);
                let sparse = v.into_iter().enumerate().filter(|x| x.1 != 0.0).collect();
                vecs.push((h, a, sparse));
            }
        }
    }
    let mut err = 0.0f64;
    let mut pairs = 0usize;
    for (h, a, u) in &vecs {
        for (k, b, v) in &vecs {
            pairs += 1;
            let dot = if h == k { sparse_dot(u, v) } else { 0.0 };
            let want = if h == k {
                (if a == b { 1.0 } else { 0.0 }) - (if *h == (a ^ b) { 1.0 } else { 0.0 })
            } else {
                0.0
            };
            err = err.max((dot - want).abs());
        }
    }
    Ok(InnerProductCheck {
        name: "hat_inner_product".into(),
        m,
        pairs,
        max_error: err,
    })
}

fn sparse_dot(u: &[(usize, f64)], v: &[(usize, f64)]) -> f64 {
    let (mut i, mut j, mut s) = (0, 0, 0.0);
    while i < u.len() && j < v.len() {
        match u[i].0.cmp(&v[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                s += u[i].1 * v[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    s
}

/// `⟨x_a|P^(k)|x_b⟩` for all non-zero `a, b` where
/// `P^(k) = (1/3)(id + ω^k W_(123) + ω^{2k} W_(132))`.
fn projected_gram(m: usize, vecs: &[Vec<f64>], k: u32) -> Result<Vec<Vec<Complex<f64>>>> {
    let c123 = label_action(Perm3::C123, m)?;
    let c132 = label_action(Perm3::C132, m)?;
    let w = Complex::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let wk = w.powu(k);
    let w2k = w.powu(2 * k);
    let dot = |x: &[f64], y: &[f64]| x.iter().zip(y).map(|(a, b)| a * b).sum::<f64>();
    let mut out = Vec::with_capacity(vecs.len());
    for xa in vecs {
        let mut row = Vec::with_capacity(vecs.len());
        for xb in vecs {
            let a = apply_perm(&c123, xb);
            let b = apply_perm(&c132, xb);
            let v = (Complex::new(dot(xa, xb), 0.0) + wk * dot(xa, &a) + w2k * dot(xa, &b)) / 3.0;
            row.push(v);
        }
        out.push(row);
    }
    Ok(out)
}

/// `⟨â|P_S|b̂⟩ = (1/3)(δ_{a,b} + (4/N²) δ_{⟨a,b⟩,1})`.
pub fn check_inner_ps(m: usize) -> Result<InnerProductCheck> {
    inner_projector_check(m, false, &[0], "hat_ps_hat", |n| 4.0 / n)
}

/// `⟨â|P_ω|b̂⟩ = ⟨â|P_ω*|b̂⟩ = (1/3)(δ_{a,b} − (2/N²) δ_{⟨a,b⟩,1})`.
pub fn check_inner_pw(m: usize) -> Result<InnerProductCheck> {
    inner_projector_check(m, false, &[1, 2], "hat_pw_hat", |n| -2.0 / n)
}

/// Commuting sector: `⟨ā|P^(k)|b̄⟩ = (1/3)(δ_{a,b} + c_k (1−δ_{a,b})
/// δ_{⟨a,b⟩,0})` with `c_0 = 4/(N²−4)`, `c_{1,2} = −2/(N²−4)`.
pub fn check_inner_c_projectors(m: usize) -> Result<InnerProductCheck> {
    let a = inner_projector_check(m, true, &[0], "bar_pk_bar", |n| 4.0 / (n - 4.0))?;
    let b = inner_projector_check(m, true, &[1, 2], "bar_pk_bar", |n| -2.0 / (n - 4.0))?;
    Ok(InnerProductCheck {
        name: "bar_pk_bar".into(),
        m,
        pairs: a.pairs + b.pairs,
        max_error: a.max_error.max(b.max_error),
    })
}

fn inner_projector_check(m: usize, commuting: bool, ks: &[u32], name: &str, coeff: impl Fn(f64) -> f64) -> Result<InnerProductCheck> {
    let basis = t3(m)?;
    if commuting && m < 2 {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "the commuting sector is empty for m = 1",
        });
    }
    let q = basis.q() as u64;
    let vecs: Vec<Vec<f64>> = (1..q)
        .map(|a| {
            let mut v = vec![0.0; basis.dim()];
            if commuting {
                bar_raw(&basis, a, &mut v);
            } else {
                hat_raw(&basis, a, 0, &mut v, 1.0);
            }
            v
        })
        .collect();
    let c = coeff(basis.q() as f64);
    let mut err = 0.0f64;
    let mut pairs = 0;
    for &k in ks {
        let g = projected_gram(m, &vecs, k)?;
        for a in 1..q {
            for b in 1..q {
                pairs += 1;
                let f = form_bits(a, b, m);
                let hit = if commuting { a != b && f == 0 } else { f == 1 };
                let want = ((if a == b { 1.0 } else { 0.0 }) + if hit { c } else { 0.0 }) / 3.0;
                let got = g[a as usize - 1][b as usize - 1];
                err = err.max((got - Complex::new(want, 0.0)).norm());
            }
        }
    }
    Ok(InnerProductCheck {
        name: name.into(),
        m,
        pairs,
        max_error: err,
    })
}

/// Per-subspace entry of the W-map report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WImageEntry {
    pub source: SubspaceLabel,
    pub source_dim: usize,
    pub image_dim: usize,
    pub invariance_residual: f64,
    /// `‖P_CS W Q‖`: the image is orthogonal to the symmetric sector.
    pub symmetric_overlap: f64,
    /// `‖½(id + W_(23)) W Q‖`: the image is W_(23)-antisymmetric.
    pub w23_symmetric_part: f64,
}

/// Checks on `W = W_(123) − W_(132)`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WMapReport {
    pub m: usize,
    pub checks: Vec<Check>,
    pub images: Vec<WImageEntry>,
}

impl WMapReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().filter(|c| c.asserted).all(|c| c.passed)
            && self
                .images
                .iter()
                .all(|e| e.invariance_residual <= INVARIANCE_TOL && e.symmetric_overlap <= IDENTITY_TOL && e.w23_symmetric_part <= IDENTITY_TOL)
    }
}

/// W-map checks: `W W_(23) = −W_(23) W`, `[W, 𝒰_h] = 0`, `[W, 𝒢_T] = 0`,
/// `W P_CS = 0`, and invariance, rank and orientation of `W·S` for the
/// given subspaces. `sampled = Some((n, seed))` uses randomized invariance.
pub fn w_map_check(m: usize, subspaces: &[SubspaceBasis], sampled: Option<(usize, u64)>) -> Result<WMapReport> {
    let basis = t3(m)?;
    let w123 = crate::spectral_analysis::w_matrix(Perm3::C123, m)?;
    let w132 = crate::spectral_analysis::w_matrix(Perm3::C132, m)?;
    let w23 = crate::spectral_analysis::w_matrix(Perm3::T23, m)?;
    let w = w123.sub(&w132)?;
    let mut checks = Vec::new();
    let anti = w.matmul(&w23)?.add(&w23.matmul(&w)?)?;
    checks.push(Check::asserted("w_anticommutes_w23", anti.is_zero(), "W W23 + W23 W == 0 (exact)".into()));
    let id = crate::rational::RationalCsr::identity(basis.dim());
    let p_plus = id.add(&w23)?.scale(1, 2)?;
    let literal = w.matmul(&p_plus)?.add(&p_plus.matmul(&w)?)?;
    checks.push(Check::reported(
        "w_anticommutes_p_plus_literal",
        literal.is_zero(),
        format!("{{W, (id + W23)/2}} max entry {:.3}; equals W", literal.max_abs()),
    ));
    let mut comm_ok = true;
    for h in 1..basis.q() as u64 {
        let u = crate::rational::RationalCsr::permutation(&transvection_perm(&basis, h))?;
        if w.matmul(&u)? != u.matmul(&w)? {
            comm_ok = false;
            break;
        }
    }
    checks.push(Check::asserted("w_commutes_transvections", comm_ok, "all h (exact)".into()));
    let gt = build_gt(3, m)?.to_rational()?;
    checks.push(Check::asserted("w_commutes_gt", w.matmul(&gt)? == gt.matmul(&w)?, "exact".into()));
    let pcs = s3_projector(S3Kind::CS, m)?.to_rational()?;
    checks.push(Check::asserted("w_kills_symmetric", w.matmul(&pcs)?.is_zero(), "W P_CS == 0 (exact)".into()));

    let pcs_d = pcs.to_dense();
    let pp_d = p_plus.to_dense();
    let mut images = Vec::new();
    for s in subspaces {
        let img = w_image(s)?;
        let inv = match sampled {
            None => verify_invariance(&img, m)?,
            Some((n, seed)) => verify_invariance_sampled(&img, m, n, seed)?,
        };
        let (so, wp) = if img.dim() == 0 {
            (0.0, 0.0)
        } else {
            ((&pcs_d * &img.basis).norm(), (&pp_d * &img.basis).norm())
        };
        images.push(WImageEntry {
            source: s.label,
            source_dim: s.dim(),
            image_dim: img.dim(),
            invariance_residual: inv,
            symmetric_overlap: so,
            w23_symmetric_part: wp,
        });
    }
    Ok(WMapReport { m, checks, images })
}

/// Per-subspace line of the verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubspaceEntry {
    pub label: SubspaceLabel,
    pub m: usize,
    pub dim: usize,
    pub claimed_dim: Option<usize>,
    pub invariance_residual: f64,
    /// Eigenvalues of `Qᵀ 𝒢_T Q` with multiplicities.
    pub eigenvalue_tag: Vec<(f64, usize)>,
    /// `‖𝒢_T Q − Q(Qᵀ𝒢_T Q)‖_F`.
    pub gt_invariance_residual: f64,
    /// Largest overlap with another constructed subspace.
    pub orthogonality_max: f64,
    pub passed: bool,
}

/// How generator checks are run.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum CheckMode {
    /// All `N² − 1` transvections, full subspace.
    Exhaustive,
    /// Seeded random (transvection, vector) draws.
    Sampled { samples: usize, seed: u64 },
}

/// Full representation-theory verification report.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RepReport {
    pub m: usize,
    pub mode: CheckMode,
    pub subspaces: Vec<SubspaceEntry>,
    pub checks: Vec<Check>,
    pub inner_products: Vec<InnerProductCheck>,
    pub w_map: WMapReport,
}

impl RepReport {
    pub fn passed(&self) -> bool {
        self.subspaces.iter().all(|s| s.passed) && self.checks.iter().filter(|c| c.asserted).all(|c| c.passed) && self.w_map.passed()
    }
}

/// Names of the checks run by [`run_suite`].
pub fn suite_check_names() -> Vec<String> {
    let mut v: Vec<String> = SubspaceLabel::CONSTRUCTED.iter().map(|l| format!("invariance:{l}")).collect();
    v.extend(
        [
            "orthogonality",
            "dimension_accounting",
            "null_subspaces_quarter_eigenspace",
            "gram_a_spectrum",
            "gram_a_formula",
            "gram_a_sum_zero",
            "null_eigenspace_identity",
            "intertwiner:d_to_nc",
            "intertwiner:d_to_c",
            "intertwiner:k_v12",
            "inner:hat_inner_product",
            "inner:hat_ps_hat",
            "inner:hat_pw_hat",
            "inner:bar_pk_bar",
            "w_map",
        ]
        .iter()
        .map(|s| s.to_string()),
    );
    v
}

/// Runs every invariance, intertwiner, Gram and inner-product check at
/// qubit count `m ≥ 2`. A negative-control subspace is added when
/// `negative_control` is set; it is expected to fail.
pub fn run_suite(m: usize, mode: CheckMode, negative_control: bool) -> Result<RepReport> {
    if m < 2 {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "the suite needs a non-empty commuting sector (m >= 2)",
        });
    }
    let basis = t3(m)?;
    let q = basis.q();
    let nn = basis.n() as f64;
    let gt = build_gt(3, m)?;
    let mut subs: Vec<SubspaceBasis> = SubspaceLabel::CONSTRUCTED
        .iter()
        .map(|&l| build_subspace(l, m))
        .collect::<Result<_>>()?;
    if negative_control {
        subs.push(random_subspace(m, 4, 0xbad)?);
    }
    let invariance = |s: &SubspaceBasis| match mode {
        CheckMode::Exhaustive => verify_invariance(s, m),
        CheckMode::Sampled { samples, seed } => verify_invariance_sampled(s, m, samples, seed),
    };

    let mut entries = Vec::new();
    for (i, s) in subs.iter().enumerate() {
        let inv = invariance(s)?;
        let (tag, gres) = gt_compression(s, &gt)?;
        let orth = subs
            .iter()
            .enumerate()
            .filter(|(j, o)| *j != i && o.label != SubspaceLabel::Custom && s.label != SubspaceLabel::Custom)
            .map(|(_, o)| overlap(s, o))
            .fold(0.0, f64::max);
        let passed = inv <= INVARIANCE_TOL && s.dim_matches() && orth <= IDENTITY_TOL;
        entries.push(SubspaceEntry {
            label: s.label,
            m,
            dim: s.dim(),
            claimed_dim: s.claimed_dim,
            invariance_residual: inv,
            eigenvalue_tag: tag,
            gt_invariance_residual: gres,
            orthogonality_max: orth,
            passed,
        });
    }

    let mut checks = Vec::new();
    let nc_parts: Vec<&SubspaceBasis> = subs
        .iter()
        .filter(|s| {
            matches!(
                s.label,
                SubspaceLabel::VncD | SubspaceLabel::Vnc1 | SubspaceLabel::Vnc2 | SubspaceLabel::VncNullS | SubspaceLabel::VncNull1 | SubspaceLabel::VncComplement
            )
        })
        .collect();
    let total: usize = nc_parts.iter().map(|s| s.dim()).sum();
    let sym_dim = q * (q - 1) / 4;
    checks.push(Check::asserted(
        "dimension_accounting",
        total == sym_dim,
        format!("sum of non-commuting subspace dims {total}, symmetric pair span {sym_dim}"),
    ));
    let orth_max = entries.iter().filter(|e| e.label != SubspaceLabel::Custom).map(|e| e.orthogonality_max).fold(0.0, f64::max);
    checks.push(Check::asserted("orthogonality", orth_max <= IDENTITY_TOL, format!("max pairwise overlap {orth_max:.3e}")));
    let null_ok = entries
        .iter()
        .filter(|e| matches!(e.label, SubspaceLabel::VncNullS | SubspaceLabel::VncNull1))
        .all(|e| e.gt_invariance_residual <= IDENTITY_TOL && e.eigenvalue_tag.iter().all(|(v, _)| (v - 0.25).abs() <= 1e-9));
    checks.push(Check::asserted("null_subspaces_quarter_eigenspace", null_ok, "G_T acts as 1/4 on both null subspaces".into()));

    let gram = gram_a_spectrum(m)?.merged();
    let want = [(q as f64 + nn - 2.0) / 2.0, (q as f64 - nn - 2.0) / 2.0, 0.0];
    let gram_ok = gram.len() == 3 && gram.iter().zip(&want).all(|(g, w)| (g.0 - w).abs() <= 1e-9) && gram[2].1 == 1;
    checks.push(Check::asserted("gram_a_spectrum", gram_ok, format!("{gram:?}")));
    let ferr = gram_a_formula_error(m)?;
    checks.push(Check::asserted("gram_a_formula", ferr <= 1e-12, format!("max entry error {ferr:.3e}")));
    let mut sum = vec![0.0; basis.dim()];
    for a in 1..q as u64 {
        a_raw(&basis, a, &mut sum);
    }
    let snorm = sum.iter().map(|x| x * x).sum::<f64>().sqrt();
    checks.push(Check::asserted("gram_a_sum_zero", snorm <= 1e-10, format!("norm of sum_a |A(a)> = {snorm:.3e}")));

    let null_samples = match mode {
        CheckMode::Exhaustive => None,
        CheckMode::Sampled { samples, seed } => Some((samples, seed)),
    };
    let nres = null_eigenspace_residual(m, null_samples)?;
    checks.push(Check::asserted("null_eigenspace_identity", nres <= IDENTITY_TOL, format!("residual {nres:.3e}")));

    for (name, kind) in [
        ("intertwiner:d_to_nc", IntertwinerKind::DToNc),
        ("intertwiner:d_to_c", IntertwinerKind::DToC),
        ("intertwiner:k_v12", IntertwinerKind::KV12),
    ] {
        let r = intertwiner_check(kind, m)?;
        checks.push(Check::asserted(name, r <= IDENTITY_TOL, format!("equivariance residual {r:.3e}")));
    }

    let inner = vec![check_inner_hat(m)?, check_inner_ps(m)?, check_inner_pw(m)?, check_inner_c_projectors(m)?];
    for ip in &inner {
        checks.push(Check::asserted(
            &format!("inner:{}", ip.name),
            ip.max_error <= 1e-12,
            format!("{} pairs, max error {:.3e}", ip.pairs, ip.max_error),
        ));
    }

    let w_sources: Vec<SubspaceBasis> = subs
        .iter()
        .filter(|s| matches!(s.label, SubspaceLabel::VncD | SubspaceLabel::Vnc1 | SubspaceLabel::Vnc2 | SubspaceLabel::VncNullS | SubspaceLabel::VncNull1))
        .cloned()
        .collect();
    let sampled = match mode {
        CheckMode::Exhaustive => None,
        CheckMode::Sampled { samples, seed } => Some((samples, seed)),
    };
    let w_map = w_map_check(m, &w_sources, sampled)?;

    Ok(RepReport {
        m,
        mode,
        subspaces: entries,
        checks,
        inner_products: inner,
        w_map,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(bits: u64, m: usize) -> F2Vector {
        F2Vector::new(bits, m).unwrap()
    }

    fn norm(x: &[f64]) -> f64 {
        x.iter().map(|a| a * a).sum::<f64>().sqrt()
    }

    #[test]
    fn hat_vectors_are_unit_and_antisymmetric_in_b() {
        let m = 2;
        for a in 1..16u64 {
            for b in 0..16u64 {
                if form_bits(a, b, m) != 0 {
                    assert!(build_hat_ab(v(a, m), v(b, m)).is_err());
                    continue;
                }
                let x = build_hat_ab(v(a, m), v(b, m)).unwrap();
                let y = build_hat_ab(v(a, m), v(a ^ b, m)).unwrap();
                assert!((norm(&x) - 1.0).abs() < 1e-12);
                assert!(x.iter().zip(&y).all(|(p, q)| (p + q).abs() < 1e-15));
            }
        }
        assert!(build_hat_ab(v(0, m), v(0, m)).is_err());
    }

    #[test]
    fn transvections_map_hat_vectors() {
        let m = 2;
        let basis = t3(m).unwrap();
        for h in 1..16u64 {
            let p = transvection_perm(&basis, h);
            for a in 1..16u64 {
                for b in 0..16u64 {
                    if form_bits(a, b, m) != 0 {
                        continue;
                    }
                    let x = build_hat_ab(v(a, m), v(b, m)).unwrap();
                    let ta = crate::gf2_symplectic::transvect_bits(h, a, m);
                    let tb = crate::gf2_symplectic::transvect_bits(h, b, m);
                    let y = build_hat_ab(v(ta, m), v(tb, m)).unwrap();
                    let ux = apply_perm(&p, &x);
                    assert!(ux.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-15));
                }
            }
        }
    }

    #[test]
    fn a_vectors_sum_to_zero_and_transform() {
        let m = 2;
        let basis = t3(m).unwrap();
        let mut s = vec![0.0; 256];
        for a in 1..16u64 {
            let x = build_a(v(a, m)).unwrap();
            for (o, y) in s.iter_mut().zip(&x) {
                *o += y;
            }
            for h in 1..16u64 {
                let ux = apply_perm(&transvection_perm(&basis, h), &x);
                let y = build_a(v(crate::gf2_symplectic::transvect_bits(h, a, m), m)).unwrap();
                assert!(ux.iter().zip(&y).all(|(p, q)| (p - q).abs() < 1e-14));
            }
        }
        assert!(norm(&s) < 1e-12);
        assert!(build_a(v(0, m)).is_err());
    }

    #[test]
    fn gram_a_m2() {
        assert!(gram_a_formula_error(2).unwrap() < 1e-12);
        let g = gram_a_spectrum(2).unwrap().merged();
        let vals: Vec<(i64, usize)> = g.iter().map(|(x, k)| (x.round() as i64, *k)).collect();
        assert_eq!(vals, vec![(9, 5), (5, 9), (0, 1)]);
        // m = 1: every |A(a)> vanishes.
        let g1 = gram_a_spectrum(1).unwrap().merged();
        assert_eq!(g1.len(), 1);
        assert!(g1[0].0.abs() < 1e-12 && g1[0].1 == 3);
    }

    #[test]
    fn subspace_dimensions_m2() {
        let dims: Vec<(SubspaceLabel, usize)> = SubspaceLabel::CONSTRUCTED
            .iter()
            .map(|&l| {
                let s = build_subspace(l, 2).unwrap();
                assert!(s.dim_matches(), "{l}: {} vs {:?}", s.dim(), s.claimed_dim);
                (l, s.dim())
            })
            .collect();
        let want = [15, 9, 5, 5, 10, 16, 15];
        for (i, (l, d)) in dims.iter().enumerate() {
            assert_eq!(*d, want[i], "{l}");
        }
    }

    #[test]
    fn invariance_and_negative_control_m2() {
        for l in [SubspaceLabel::VncD, SubspaceLabel::VncNullS, SubspaceLabel::VcD, SubspaceLabel::Haar] {
            let s = build_subspace(l, 2).unwrap();
            assert!(verify_invariance(&s, 2).unwrap() <= 1e-10, "{l}");
            assert!(verify_invariance_sampled(&s, 2, 200, 1).unwrap() <= 1e-10, "{l}");
        }
        let r = random_subspace(2, 4, 3).unwrap();
        assert!(verify_invariance(&r, 2).unwrap() > 0.1);
        assert!(verify_invariance_sampled(&r, 2, 50, 3).unwrap() > 0.1);
        assert!(matches!(build_subspace(SubspaceLabel::Custom, 2), Err(Error::Precondition(_))));
        assert!("nope".parse::<SubspaceLabel>().is_err());
        assert_eq!("vnc_null_s".parse::<SubspaceLabel>().unwrap(), SubspaceLabel::VncNullS);
    }

    #[test]
    fn identity_intertwiner_is_trivial() {
        // The identity map between a representation and itself has zero defect.
        let m = 2;
        let s = build_subspace(SubspaceLabel::VncD, m).unwrap();
        let basis = t3(m).unwrap();
        for h in 1..16u64 {
            let u = permute_rows(&transvection_perm(&basis, h), &s.basis);
            assert_eq!((&u - &u).norm(), 0.0);
        }
    }

    #[test]
    fn intertwiners_m2() {
        for k in [IntertwinerKind::DToNc, IntertwinerKind::DToC, IntertwinerKind::KV12] {
            assert!(intertwiner_check(k, 2).unwrap() <= 1e-10, "{k:?}");
        }
        assert_eq!("k_v12".parse::<IntertwinerKind>().unwrap(), IntertwinerKind::KV12);
    }

    #[test]
    fn null_eigenspace_m2() {
        assert!(verify_null_eigenspace(2).unwrap());
        assert!(null_triple(v(1, 2), v(1, 2)).is_err());
    }

    #[test]
    fn inner_products_m2() {
        for c in [check_inner_hat(2).unwrap(), check_inner_ps(2).unwrap(), check_inner_pw(2).unwrap(), check_inner_c_projectors(2).unwrap()] {
            assert!(c.max_error <= 1e-12, "{c:?}");
            assert!(c.pairs > 0);
        }
    }

    #[test]
    fn w_map_m2() {
        let subs: Vec<SubspaceBasis> = [SubspaceLabel::VncD, SubspaceLabel::Vnc1, SubspaceLabel::VncNullS, SubspaceLabel::VncNull1]
            .iter()
            .map(|&l| build_subspace(l, 2).unwrap())
            .collect();
        let r = w_map_check(2, &subs, None).unwrap();
        assert!(r.passed(), "{r:?}");
        let dims: Vec<(usize, usize)> = r.images.iter().map(|e| (e.source_dim, e.image_dim)).collect();
        assert_eq!(dims, vec![(15, 14), (9, 9), (5, 0), (10, 10)]);
    }

    #[test]
    fn suite_m2_passes_and_negative_control_fails() {
        let r = run_suite(2, CheckMode::Exhaustive, false).unwrap();
        assert!(r.passed(), "{r:#?}");
        let bad = run_suite(2, CheckMode::Sampled { samples: 100, seed: 9 }, true).unwrap();
        assert!(!bad.passed());
        assert!(run_suite(1, CheckMode::Exhaustive, false).is_err());
        assert_eq!(suite_check_names().len(), 22);
    }

    proptest! {
        #[test]
        fn hat_inner_product_random_m3(h in 1u64..64, k in 1u64..64, a in 0u64..64, b in 0u64..64) {
            let m = 3;
            prop_assume!(form_bits(h, a, m) == 0 && form_bits(k, b, m) == 0);
            let x = build_hat_ab(v(h, m), v(a, m)).unwrap();
            let y = build_hat_ab(v(k, m), v(b, m)).unwrap();
            let dot: f64 = x.iter().zip(&y).map(|(p, q)| p * q).sum();
            let want = if h == k { (if a == b { 1.0 } else { 0.0 }) - (if h == a ^ b { 1.0 } else { 0.0 }) } else { 0.0 };
            prop_assert!((dot - want).abs() < 1e-12);
        }
    }
}
