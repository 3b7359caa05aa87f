use num_bigint::BigInt;
use num_traits::{One, Pow, Zero};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::exact::{binomial, operator_norm, Rational, RationalMatrix};
use crate::error::{invalid, Error, Result};
use crate::seeding::{chunks, stream_rng};

/// The irreducible representation of `sl(2)` of dimension `m + 1` in the
/// weight basis `v_0, …, v_m`. Columns hold images of basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct IrrepAction {
    pub m: usize,
    /// `m ∈ {2r - 1, 2r}`.
    pub r: usize,
    pub h: RationalMatrix,
    pub e: RationalMatrix,
}

/// Index sets of positive, zero and negative weights `m - 2k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WeightSplit {
    pub plus_idx: Vec<usize>,
    pub zero_idx: Vec<usize>,
    pub minus_idx: Vec<usize>,
}

impl WeightSplit {
    pub fn new(m: usize) -> Self {
        let weight = |k: usize| m as i64 - 2 * k as i64;
        WeightSplit {
            plus_idx: (0..=m).filter(|&k| weight(k) > 0).collect(),
            zero_idx: (0..=m).filter(|&k| weight(k) == 0).collect(),
            minus_idx: (0..=m).filter(|&k| weight(k) < 0).collect(),
        }
    }

    /// Indices of `V⁺ ⊕ V⁰`.
    pub fn plus_zero(&self) -> Vec<usize> {
        let mut v = self.plus_idx.clone();
        v.extend(&self.zero_idx);
        v
    }

    /// Indices of `V⁰ ⊕ V⁻`.
    pub fn zero_minus(&self) -> Vec<usize> {
        let mut v = self.zero_idx.clone();
        v.extend(&self.minus_idx);
        v
    }
}

pub fn r_of(m: usize) -> usize {
    m.div_ceil(2)
}

pub fn build_irrep(m: usize) -> Result<IrrepAction> {
    if m < 1 {
        return Err(invalid("irrep index m must be at least 1"));
    }
    let h = RationalMatrix::from_fn(m + 1, m + 1, |i, j| {
        if i == j {
            Rational::from_integer(BigInt::from(m as i64 - 2 * j as i64))
        } else {
            Rational::zero()
        }
    });
    let e = RationalMatrix::from_fn(m + 1, m + 1, |i, j| {
        if j >= 1 && i == j - 1 {
            Rational::from_integer(BigInt::from(j))
        } else {
            Rational::zero()
        }
    });
    Ok(IrrepAction { m, r: r_of(m), h, e })
}

/// `exp(t·e)`: the image of `v_k` is `Σ_{l ≤ k} C(k, l) t^{k-l} v_l`, stored
/// in column `k`.
pub fn unipotent_matrix(m: usize, t: &Rational) -> RationalMatrix {
    RationalMatrix::from_fn(m + 1, m + 1, |l, k| {
        if l <= k {
            Rational::from_integer(binomial(k, l)) * Pow::pow(t, (k - l) as u32)
        } else {
            Rational::zero()
        }
    })
}

/// `a v_k = α^{m-2k} v_k`.
pub fn diagonal_matrix(m: usize, alpha: f64) -> Vec<f64> {
    (0..=m).map(|k| alpha.powi(m as i32 - 2 * k as i32)).collect()
}

/// The block of `u(t)` from `V^{0-}` to `V^{+0}`, indexed `[k - r][l]` with
/// `r ≤ k ≤ m`, `0 ≤ l ≤ m - r`: entries `t^{k-l} C(k, l)`.
pub fn b_matrix(m: usize, t: &Rational) -> Result<RationalMatrix> {
    if m < 1 {
        return Err(invalid("irrep index m must be at least 1"));
    }
    if t.is_zero() {
        return Err(Error::SingularParameter);
    }
    let r = r_of(m);
    let size = m - r + 1;
    Ok(RationalMatrix::from_fn(size, size, |i, l| {
        let k = i + r;
        Rational::from_integer(binomial(k, l)) * Pow::pow(t, (k - l) as u32)
    }))
}

/// The exponent `r(m - r + 1)` of the determinant of `B`.
pub fn b_det_exponent(m: usize) -> u32 {
    let r = r_of(m);
    (r * (m - r + 1)) as u32
}

/// `det B == t^{r(m-r+1)}` in exact arithmetic.
pub fn b_det_check(m: usize, t: &Rational) -> Result<bool> {
    let b = b_matrix(m, t)?;
    Ok(b.determinant() == Pow::pow(t, b_det_exponent(m)))
}

/// Restriction of `u(t)` to `V⁺` in the basis `v_0, …, v_{r-1}`.
pub fn a_matrix(m: usize, t: &Rational) -> RationalMatrix {
    let idx: Vec<usize> = (0..r_of(m)).collect();
    unipotent_matrix(m, t).select(&idx, &idx)
}

fn to_rational(t: f64) -> Result<Rational> {
    if t == 0.0 {
        return Err(Error::SingularParameter);
    }
    Rational::from_float(t).ok_or_else(|| invalid(format!("parameter {t} is not finite")))
}

/// `κ = (1/3) min{1, ‖B⁻¹‖⁻¹ ‖A‖⁻¹}` with operator norms.
pub fn kappa(m: usize, t: f64) -> Result<f64> {
    let tq = to_rational(t)?;
    kappa_exact(m, &tq)
}

pub fn kappa_exact(m: usize, t: &Rational) -> Result<f64> {
    let b = b_matrix(m, t)?;
    let b_inv = b.inverse().ok_or(Error::SingularParameter)?;
    let a_norm = operator_norm(&a_matrix(m, t).to_f64());
    let b_inv_norm = operator_norm(&b_inv.to_f64());
    Ok((1.0 / (b_inv_norm * a_norm)).min(1.0) / 3.0)
}

/// JSON record `{m, t, trials, violations, kappa, det_check}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub m: usize,
    pub t: f64,
    pub trials: usize,
    pub violations: usize,
    pub kappa: f64,
    pub det_check: String,
}

const SLACK: f64 = 1e-12;

fn unit_vectors(dim: usize, trials: usize, seed: u64) -> Vec<Vec<f64>> {
    chunks(trials)
        .into_par_iter()
        .flat_map_iter(|(stream, _, len)| {
            let mut rng = stream_rng(seed, stream);
            (0..len)
                .map(|_| {
                    let mut v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(&mut rng)).collect();
                    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
                    v.iter_mut().for_each(|x| *x /= n);
                    v
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

fn apply(u: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
    u.iter().map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum()).collect()
}

fn norm_on(v: &[f64], idx: &[usize]) -> f64 {
    idx.iter().map(|&i| v[i] * v[i]).sum::<f64>().sqrt()
}

/// Whether `max(‖v⁺‖, ‖(uv)^{+0}‖) ≥ κ‖v‖` holds, up to rounding slack.
pub fn lemma_holds(u: &[Vec<f64>], split: &WeightSplit, kappa: f64, v: &[f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    let plus = norm_on(v, &split.plus_idx);
    let uv = apply(u, v);
    let plus_zero = norm_on(&uv, &split.plus_zero());
    plus.max(plus_zero) >= kappa * norm - SLACK * norm
}

fn det_label(ok: bool) -> String {
    if ok { "pass" } else { "fail" }.to_string()
}

/// Counts unit vectors violating `max(‖v⁺‖, ‖(uv)^{+0}‖) ≥ κ‖v‖`.
pub fn verify_lemma_sl2(m: usize, t: f64, trials: usize, seed: u64) -> Result<VerifyReport> {
    let tq = to_rational(t)?;
    build_irrep(m)?;
    let k = kappa_exact(m, &tq)?;
    let u = unipotent_matrix(m, &tq).to_f64();
    let split = WeightSplit::new(m);
    let violations = unit_vectors(m + 1, trials, seed)
        .par_iter()
        .filter(|v| !lemma_holds(&u, &split, k, v))
        .count();
    Ok(VerifyReport {
        m,
        t,
        trials,
        violations,
        kappa: k,
        det_check: det_label(b_det_check(m, &tq)?),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorollaryReport {
    pub m: usize,
    pub alphas: Vec<f64>,
    pub ts: Vec<f64>,
    pub trials: usize,
    pub violations: usize,
    pub min_kappa: f64,
}

/// Counts triples `(a, u, v)` violating `max(‖av‖, ‖auv‖) ≥ κ‖v‖`, where `a`
/// scales `v_k` by `α^{m-2k}` and `κ = κ(m, t)`.
pub fn verify_corollary(
    m: usize,
    alphas: &[f64],
    ts: &[f64],
    trials: usize,
    seed: u64,
) -> Result<CorollaryReport> {
    build_irrep(m)?;
    if let Some(a) = alphas.iter().find(|a| !(**a > 1.0) || !a.is_finite()) {
        return Err(invalid(format!("alpha must exceed 1, got {a}")));
    }
    let vectors = unit_vectors(m + 1, trials, seed);
    let mut violations = 0;
    let mut min_kappa = f64::INFINITY;
    for &t in ts {
        let tq = to_rational(t)?;
        let k = kappa_exact(m, &tq)?;
        min_kappa = min_kappa.min(k);
        let u = unipotent_matrix(m, &tq).to_f64();
        for &alpha in alphas {
            let a = diagonal_matrix(m, alpha);
            violations += vectors
                .par_iter()
                .filter(|v| {
                    let av: f64 = v.iter().zip(&a).map(|(x, s)| (x * s).powi(2)).sum::<f64>().sqrt();
                    let uv = apply(&u, v);
                    let auv: f64 = uv.iter().zip(&a).map(|(x, s)| (x * s).powi(2)).sum::<f64>().sqrt();
                    av.max(auv) < k - SLACK
                })
                .count();
        }
    }
    Ok(CorollaryReport {
        m,
        alphas: alphas.to_vec(),
        ts: ts.to_vec(),
        trials,
        violations,
        min_kappa,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DirectSumReport {
    pub summands: Vec<usize>,
    pub t: f64,
    pub trials: usize,
    pub violations: usize,
    pub kappa_min: f64,
}

/// The norm inequality on `⊕ V_{m_i}` with the smallest per-summand `κ`.
pub fn verify_direct_sum(summands: &[usize], t: f64, trials: usize, seed: u64) -> Result<DirectSumReport> {
    if summands.is_empty() {
        return Err(invalid("direct sum needs at least one summand"));
    }
    let tq = to_rational(t)?;
    let dim: usize = summands.iter().map(|m| m + 1).sum();
    let mut u = vec![vec![0.0; dim]; dim];
    let mut split = WeightSplit {
        plus_idx: vec![],
        zero_idx: vec![],
        minus_idx: vec![],
    };
    let mut kappa_min = f64::INFINITY;
    let mut offset = 0;
    for &m in summands {
        build_irrep(m)?;
        kappa_min = kappa_min.min(kappa_exact(m, &tq)?);
        let block = unipotent_matrix(m, &tq).to_f64();
        for (i, row) in block.iter().enumerate() {
            u[offset + i][offset..offset + m + 1].copy_from_slice(row);
        }
        let s = WeightSplit::new(m);
        split.plus_idx.extend(s.plus_idx.iter().map(|i| i + offset));
        split.zero_idx.extend(s.zero_idx.iter().map(|i| i + offset));
        split.minus_idx.extend(s.minus_idx.iter().map(|i| i + offset));
        offset += m + 1;
    }
    let violations = unit_vectors(dim, trials, seed)
        .par_iter()
        .filter(|v| !lemma_holds(&u, &split, kappa_min, v))
        .count();
    Ok(DirectSumReport {
        summands: summands.to_vec(),
        t,
        trials,
        violations,
        kappa_min,
    })
}

/// `true` when `[h, e] = 2e` holds exactly.
pub fn commutator_check(irrep: &IrrepAction) -> bool {
    let he = &irrep.h * &irrep.e;
    let eh = &irrep.e * &irrep.h;
    he.sub(&eh) == irrep.e.scale(&Rational::from_integer(BigInt::from(2)))
}

/// `exp(t·e)` summed as a finite power series (the matrix is nilpotent).
pub fn exp_series(e: &RationalMatrix, t: &Rational) -> RationalMatrix {
    let n = e.rows();
    let te = e.scale(t);
    let mut term = RationalMatrix::identity(n);
    let mut sum = term.clone();
    let mut j = 1i64;
    loop {
        term = (&term * &te).scale(&Rational::new(BigInt::one(), BigInt::from(j)));
        if term.is_zero() {
            return sum;
        }
        sum = RationalMatrix::from_fn(n, n, |a, b| &sum[(a, b)] + &term[(a, b)]);
        j += 1;
    }
}
