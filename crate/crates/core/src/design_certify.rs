// Copyright (c) The transvec authors.
// Licensed under the MIT License.

//! Iteration-count certificates for approximate 2- and 3-designs, spectral
//! distances, and sampling of the Pauli-then-transvections scheme.

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gf2_symplectic::{transvect_bits, F2Vector};
use crate::pauli_algebra::find_anticommuting;
use crate::rational::RationalCsr;
use crate::spectral_analysis::{second_eigenvalue_blocks, t3_bound_main};
use crate::twirl_superops::{build_gp, build_gt, build_h, compose, Basis, Superoperator};

/// Largest dimension for which [`empirical_distance_direct`] forms dense
/// matrix powers.
pub const DIRECT_LIMIT: usize = 512;

fn check_epsilon(epsilon: f64) -> Result<()> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::OutOfRange(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    Ok(())
}

fn n_of(m: usize) -> Result<f64> {
    if m == 0 || m > 32 {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "m must lie in 1..=32",
        });
    }
    Ok((1u64 << m) as f64)
}

/// `⌈6 + (5/4) log₂(1/ε)⌉`, the closed-form two-copy iteration count.
pub fn k_for_2design(epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    Ok((6.0 + 1.25 * (1.0 / epsilon).log2() - 1e-12).ceil() as usize)
}

/// `(5k + 1) λ^k` with `λ = (1 + 1/N)/2` unless supplied.
pub fn two_copy_bound(m: usize, k: usize, lambda: Option<f64>) -> Result<f64> {
    let n = n_of(m)?;
    let l = lambda.unwrap_or(0.5 * (1.0 + 1.0 / n));
    Ok((5.0 * k as f64 + 1.0) * l.powi(k as i32))
}

/// Smallest `k` with `(5k + 1)((1 + 1/N)/2)^k ≤ ε`.
pub fn min_k_for_2design_bound(m: usize, epsilon: f64) -> Result<usize> {
    check_epsilon(epsilon)?;
    for k in 0..1_000_000 {
        if two_copy_bound(m, k, None)? <= epsilon {
            return Ok(k);
        }
    }
    Err(Error::OutOfRange("no k below 10^6 satisfies the bound".into()))
}

/// Smallest integer `k` strictly greater than
/// `(3m + log₂(1/ε)) / (1 − log₂(1 + 4/N + 1/(2N(N−2))))`.
pub fn k_for_3design(m: usize, epsilon: f64) -> Result<usize> {
    if m < 3 {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "the three-copy certificate requires m >= 3",
        });
    }
    check_epsilon(epsilon)?;
    let q = k_for_3design_quotient(m, epsilon)?;
    Ok(q.floor() as usize + 1)
}

/// The real quotient bounded by [`k_for_3design`].
pub fn k_for_3design_quotient(m: usize, epsilon: f64) -> Result<f64> {
    let n = n_of(m)?;
    let denom = 1.0 - (2.0 * t3_bound_main(n)).log2();
    Ok((3.0 * m as f64 + (1.0 / epsilon).log2()) / denom)
}

/// Closed-form upper bound on `‖𝒢_T^k∘𝒢_P − ℋ‖_◇`: `N³λ^k` for `t = 3`
/// (default `λ` the full-space three-copy constant) and `(5k+1)λ^k` for
/// `t = 2` (default `λ = (1+1/N)/2`).
pub fn diamond_upper_bound(t: usize, m: usize, k: usize, lambda: Option<f64>) -> Result<f64> {
    let n = n_of(m)?;
    match t {
        2 => two_copy_bound(m, k, lambda),
        3 => {
            let l = lambda.unwrap_or_else(|| t3_bound_main(n));
            Ok(n.powi(3) * l.powi(k as i32))
        }
        _ => Err(Error::InvalidCopyCount(t)),
    }
}

/// Measured spectral distance after `k` iterations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDistance {
    pub t: usize,
    pub m: usize,
    pub k: usize,
    /// `‖𝒢_T∘𝒢_P − ℋ‖`.
    pub lambda: f64,
    /// `‖(𝒢_T∘𝒢_P)^k − ℋ‖`.
    pub op_norm: f64,
    /// `N^t` times `op_norm`.
    pub diamond_bound: f64,
}

/// `‖(𝒢_T∘𝒢_P)^k − ℋ‖` by spectral calculus on the orbit blocks: `ℋ`
/// projects each orbit onto its indicator, which `𝒢_T` fixes, so the norm
/// is `λ^k` with `λ` the largest remaining `|eigenvalue|` (1 for `k = 0`).
pub fn empirical_distance(t: usize, m: usize, k: usize, cap: usize) -> Result<EmpiricalDistance> {
    let n = n_of(m)?;
    let lambda = second_eigenvalue_blocks(t, m, cap)?;
    let op_norm = if k == 0 { 1.0 } else { lambda.powi(k as i32) };
    Ok(EmpiricalDistance {
        t,
        m,
        k,
        lambda,
        op_norm,
        diamond_bound: n.powi(t as i32) * op_norm,
    })
}

/// `‖(𝒢_T∘𝒢_P)^k − ℋ‖` from an explicit dense matrix power (dimension at
/// most [`DIRECT_LIMIT`]).
pub fn empirical_distance_direct(t: usize, m: usize, k: usize) -> Result<f64> {
    let g = compose(&build_gt(t, m)?, &build_gp(t, m)?)?;
    let d = g.dim();
    if d > DIRECT_LIMIT {
        return Err(Error::CapExceeded {
            what: "direct matrix power dimension",
            requested: d,
            cap: DIRECT_LIMIT,
        });
    }
    let gd = g.to_dense(d)?;
    let mut p = nalgebra::DMatrix::<f64>::identity(d, d);
    for _ in 0..k {
        p = &gd * p;
    }
    let diff = p - build_h(t, m)?.to_dense(d)?;
    let sym = (&diff + diff.transpose()) * 0.5;
    Ok(crate::spectral_analysis::sym_eigenvalues(&sym)
        .into_iter()
        .fold(0.0f64, |a, v| a.max(v.abs())))
}

/// Checks that placing `𝒢_P` before, after, or between the `k` transvection
/// twirls gives the same exact matrix.
pub fn order_independence(t: usize, m: usize, k: usize) -> Result<bool> {
    let gt = build_gt(t, m)?;
    let gp = build_gp(t, m)?;
    let pow = |j: usize| -> Result<Superoperator> {
        let mut acc = Superoperator::from_rational(gt.basis(), RationalCsr::identity(gt.dim()))?;
        for _ in 0..j {
            acc = compose(&gt, &acc)?;
        }
        Ok(acc)
    };
    let reference = compose(&pow(k)?, &gp)?;
    for j in 0..=k {
        let v = compose(&pow(j)?, &compose(&gp, &pow(k - j)?)?)?;
        if !v.exact_eq(&reference)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// How a certificate's numbers were obtained.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CertMethod {
    ClosedForm,
    Spectral,
    MonteCarlo,
}

impl fmt::Display for CertMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CertMethod::ClosedForm => "closed_form",
            CertMethod::Spectral => "spectral",
            CertMethod::MonteCarlo => "monte_carlo",
        })
    }
}

impl FromStr for CertMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "closed_form" => Ok(CertMethod::ClosedForm),
            "spectral" => Ok(CertMethod::Spectral),
            "monte_carlo" => Ok(CertMethod::MonteCarlo),
            _ => Err(Error::Unknown {
                kind: "certificate method",
                name: s.to_string(),
            }),
        }
    }
}

/// Iteration-count certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCertificate {
    pub t: usize,
    pub m: usize,
    pub epsilon: f64,
    pub k: usize,
    /// Measured second eigenvalue when available, else the closed-form one.
    pub lambda: f64,
    /// Closed-form ◇-norm bound at `k`.
    pub closed_form_bound: f64,
    /// `closed_form_bound ≤ ε`.
    pub closed_form_holds: bool,
    /// Same bound with the measured `λ`.
    pub empirical_bound: Option<f64>,
    /// Measured `‖(𝒢_T∘𝒢_P)^k − ℋ‖`.
    pub empirical_op_norm: Option<f64>,
    pub method: CertMethod,
    pub seed: Option<u64>,
    /// The closed-form count is only claimed for `m ≥ 3`.
    pub report_only: bool,
}

/// Builds a certificate at the closed-form `k` (or at `k_override`);
/// `empirical` adds spectral measurements (dense orbit blocks up to `cap`).
pub fn certify(t: usize, m: usize, epsilon: f64, k_override: Option<usize>, empirical: bool, cap: usize) -> Result<ConvergenceCertificate> {
    let n = n_of(m)?;
    let (k, closed_lambda) = match t {
        2 => (k_for_2design(epsilon)?, 0.5 * (1.0 + 1.0 / n)),
        3 => (k_for_3design(m, epsilon)?, t3_bound_main(n)),
        _ => return Err(Error::InvalidCopyCount(t)),
    };
    let k = k_override.unwrap_or(k);
    let closed_form_bound = diamond_upper_bound(t, m, k, None)?;
    let (lambda, empirical_bound, empirical_op_norm, method) = if empirical {
        let e = empirical_distance(t, m, k, cap)?;
        let b = diamond_upper_bound(t, m, k, Some(e.lambda))?;
        (e.lambda, Some(b), Some(e.op_norm), CertMethod::Spectral)
    } else {
        (closed_lambda, None, None, CertMethod::ClosedForm)
    };
    Ok(ConvergenceCertificate {
        t,
        m,
        epsilon,
        k,
        lambda,
        closed_form_bound,
        closed_form_holds: closed_form_bound <= epsilon,
        empirical_bound,
        empirical_op_norm,
        method,
        seed: None,
        report_only: m < 3,
    })
}

/// One draw of the scheme: a Pauli label followed by `k` transvection
/// labels `(h, f)` with `⟨h,f⟩ = 1`, or `h = f = 0` for the identity.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SchemeSample {
    pub m: usize,
    pub pauli: F2Vector,
    pub transvections: Vec<(F2Vector, F2Vector)>,
}

impl SchemeSample {
    /// Every pair satisfies `⟨h,f⟩ = 1` or `h = 0`.
    pub fn is_valid(&self) -> bool {
        self.transvections.iter().all(|(h, f)| {
            if h.is_zero() {
                f.is_zero()
            } else {
                crate::gf2_symplectic::symplectic_form(*h, *f) == Ok(1)
            }
        })
    }

    /// Image of `a` under the sampled symplectic product (Paulis act
    /// trivially on labels).
    pub fn apply_bits(&self, a: u64) -> u64 {
        self.transvections
            .iter()
            .fold(a, |x, (h, _)| transvect_bits(h.bits(), x, self.m))
    }
}

/// Seeded stream of scheme samples.
pub struct SchemeSampler {
    m: usize,
    k: usize,
    rng: ChaCha8Rng,
}

impl SchemeSampler {
    pub fn new(m: usize, k: usize, seed: u64) -> Result<Self> {
        n_of(m)?;
        Ok(Self {
            m,
            k,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    fn label(&mut self) -> F2Vector {
        let bits = if self.m == 32 {
            self.rng.random::<u64>()
        } else {
            self.rng.random_range(0..1u64 << (2 * self.m))
        };
        F2Vector::new(bits, self.m).expect("sampled within range")
    }

    /// Next sample.
    pub fn sample(&mut self) -> SchemeSample {
        let pauli = self.label();
        let transvections = (0..self.k)
            .map(|_| {
                let h = self.label();
                let f = find_anticommuting(h).unwrap_or(h);
                (h, f)
            })
            .collect();
        SchemeSample {
            m: self.m,
            pauli,
            transvections,
        }
    }
}

impl Iterator for SchemeSampler {
    type Item = SchemeSample;

    fn next(&mut self) -> Option<SchemeSample> {
        Some(self.sample())
    }
}

/// First sample of the seeded stream.
pub fn sample_scheme(m: usize, k: usize, seed: u64) -> Result<SchemeSample> {
    Ok(SchemeSampler::new(m, k, seed)?.sample())
}

/// Monte Carlo estimate of the two-copy second-moment operator.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MonteCarloReport {
    pub m: usize,
    pub k: usize,
    pub samples: usize,
    pub seed: u64,
    /// Largest `|p̂ − p| / √(p(1−p)/n)` over entries with `0 < p < 1`.
    pub max_z: f64,
    /// Entries with `|z| > 3`.
    pub exceed_3sigma: usize,
    pub entries: usize,
    /// Entries with `p ∈ {0, 1}` whose estimate differs from `p`.
    pub degenerate_mismatches: usize,
    pub max_abs_error: f64,
}

impl MonteCarloReport {
    pub fn within_3_sigma(&self) -> bool {
        self.exceed_3sigma == 0 && self.degenerate_mismatches == 0
    }
}

/// Compares the empirical two-copy operator `(1/n) Σ_s 𝒰_s` over `n` scheme
/// samples with the exact `𝒢_T^k∘𝒢_P`, entrywise.
pub fn monte_carlo_second_moment(m: usize, k: usize, samples: usize, seed: u64) -> Result<MonteCarloReport> {
    let basis = Basis::new(2, m)?;
    let d = basis.dim();
    if d > DIRECT_LIMIT {
        return Err(Error::CapExceeded {
            what: "Monte Carlo operator dimension",
            requested: d,
            cap: DIRECT_LIMIT,
        });
    }
    if samples == 0 {
        return Err(Error::OutOfRange("samples must be positive".into()));
    }
    let mut counts = vec![0u64; d * d];
    let mut sampler = SchemeSampler::new(m, k, seed)?;
    for _ in 0..samples {
        let s = sampler.sample();
        for j in 0..d {
            let i = s.apply_bits(j as u64) as usize;
            counts[i * d + j] += 1;
        }
    }
    let gt = build_gt(2, m)?;
    let mut exact = Superoperator::from_rational(basis, RationalCsr::identity(d))?;
    for _ in 0..k {
        exact = compose(&gt, &exact)?;
    }
    let exact = compose(&exact, &build_gp(2, m)?)?.to_dense(d)?;
    let nf = samples as f64;
    let (mut max_z, mut exceed, mut degen, mut max_err) = (0.0f64, 0usize, 0usize, 0.0f64);
    for i in 0..d {
        for j in 0..d {
            let p = exact[(i, j)];
            let phat = counts[i * d + j] as f64 / nf;
            max_err = max_err.max((phat - p).abs());
            if p <= 1e-15 || p >= 1.0 - 1e-15 {
                if (phat - p).abs() > 1e-15 {
                    degen += 1;
                }
                continue;
            }
            let z = (phat - p).abs() / (p * (1.0 - p) / nf).sqrt();
            max_z = max_z.max(z);
            if z > 3.0 {
                exceed += 1;
            }
        }
    }
    Ok(MonteCarloReport {
        m,
        k,
        samples,
        seed,
        max_z,
        exceed_3sigma: exceed,
        entries: d * d,
        degenerate_mismatches: degen,
        max_abs_error: max_err,
    })
}

/// `|Sp(2m, F₂)| = 2^{m²} Π_{i=1}^m (4^i − 1)`.
pub fn sp_order(m: usize) -> Result<u128> {
    if m == 0 || m > 7 {
        return Err(Error::Overflow("symplectic group order"));
    }
    let mut o: u128 = 1 << (m * m);
    for i in 1..=m {
        o = o.checked_mul((1u128 << (2 * i)) - 1).ok_or(Error::Overflow("symplectic group order"))?;
    }
    Ok(o)
}

/// Support of the `k`-fold product distribution of transvections.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupportGrowth {
    pub m: usize,
    pub k: usize,
    /// True when all `N^{2k}` label tuples were enumerated.
    pub exhaustive: bool,
    pub draws: usize,
    /// Distinct symplectic products observed.
    pub distinct: usize,
    /// Collision-based estimate `n(n−1) / (2·collisions)` (`None` without
    /// collisions, or when enumeration is exhaustive).
    pub collision_estimate: Option<f64>,
    /// `N^{2k}` (saturating).
    pub label_tuples: u128,
    pub group_order: u128,
}

/// Product of transvections as a column list `S e_j`.
fn product_key(hs: &[u64], m: usize) -> Vec<u64> {
    (0..2 * m)
        .map(|j| hs.iter().fold(1u64 << j, |x, &h| transvect_bits(h, x, m)))
        .collect()
}

/// Distinct products of `k` uniform transvections: exhaustive when
/// `N^{2k} ≤ num_samples`, otherwise `num_samples` seeded draws with a
/// birthday-style collision estimate. Requires `m ≤ 3`.
pub fn support_growth(m: usize, k: usize, num_samples: usize, seed: u64) -> Result<SupportGrowth> {
    if m == 0 || m > 3 {
        return Err(Error::InvalidQubitCount {
            m,
            reason: "support growth is limited to m <= 3",
        });
    }
    let q = 1u64 << (2 * m);
    let tuples = (q as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    let group_order = sp_order(m)?;
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    if tuples <= num_samples as u128 {
        let mut hs = vec![0u64; k];
        loop {
            seen.insert(product_key(&hs, m));
            let mut i = 0;
            while i < k {
                hs[i] += 1;
                if hs[i] < q {
                    break;
                }
                hs[i] = 0;
                i += 1;
            }
            if i == k {
                break;
            }
        }
        return Ok(SupportGrowth {
            m,
            k,
            exhaustive: true,
            draws: tuples as usize,
            distinct: seen.len(),
            collision_estimate: None,
            label_tuples: tuples,
            group_order,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut multiplicity: std::collections::HashMap<Vec<u64>, u64> = std::collections::HashMap::new();
    for _ in 0..num_samples {
        let hs: Vec<u64> = (0..k).map(|_| rng.random_range(0..q)).collect();
        *multiplicity.entry(product_key(&hs, m)).or_insert(0) += 1;
    }
    let collisions: u64 = multiplicity.values().map(|&c| c * (c - 1) / 2).sum();
    let n = num_samples as f64;
    let est = if collisions > 0 { Some(n * (n - 1.0) / (2.0 * collisions as f64)) } else { None };
    Ok(SupportGrowth {
        m,
        k,
        exhaustive: false,
        draws: num_samples,
        distinct: multiplicity.len(),
        collision_estimate: est,
        label_tuples: tuples,
        group_order,
    })
}
