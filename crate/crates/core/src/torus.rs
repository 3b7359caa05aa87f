//! Dilated curves on the flat torus `T^n = R^n / Z^n` and their Fourier
//! coefficients.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

pub const MAX_DIMENSION: usize = 4;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TorusCurve {
    /// `coeffs[i]` are ascending-power coefficients of coordinate `i`.
    Polynomial { coeffs: Vec<Vec<f64>> },
    /// `ψ(s) = (cos 2πs, sin 2πs)`.
    Circle,
}

impl TorusCurve {
    pub fn polynomial(coeffs: Vec<Vec<f64>>) -> Result<Self> {
        if coeffs.is_empty() || coeffs.len() > MAX_DIMENSION {
            return Err(invalid(format!(
                "torus dimension must be in 1..={MAX_DIMENSION}, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite())) {
            return Err(invalid("coefficients must be finite and nonempty"));
        }
        Ok(TorusCurve::Polynomial { coeffs })
    }

    pub fn dimension(&self) -> usize {
        match self {
            TorusCurve::Polynomial { coeffs } => coeffs.len(),
            TorusCurve::Circle => 2,
        }
    }

    pub fn eval(&self, s: f64) -> Vec<f64> {
        match self {
            TorusCurve::Polynomial { coeffs } => coeffs
                .iter()
                .map(|c| c.iter().rev().fold(0.0, |acc, a| acc * s + a))
                .collect(),
            TorusCurve::Circle => {
                let (sin, cos) = (2.0 * PI * s).sin_cos();
                vec![cos, sin]
            }
        }
    }
}

/// An integer frequency vector.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FourierIndex(pub Vec<i64>);

impl FourierIndex {
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&m| m == 0)
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|m| m.abs()).max().unwrap_or(0)
    }

    /// All nonzero indices with `|m|_∞ ≤ max`, in lexicographic order.
    pub fn nonzero_up_to(dimension: usize, max: i64) -> Vec<FourierIndex> {
        let mut out = vec![Vec::new()];
        for _ in 0..dimension {
            out = out
                .into_iter()
                .flat_map(|prefix: Vec<i64>| {
                    (-max..=max).map(move |m| {
                        let mut v = prefix.clone();
                        v.push(m);
                        v
                    })
                })
                .collect();
        }
        out.into_iter()
            .map(FourierIndex)
            .filter(|m| !m.is_zero())
            .collect()
    }
}

/// Midpoint-grid samples of `α ψ(s)` reduced mod 1 into `[0, 1)^n`.
pub fn torus_translate(c: &TorusCurve, alpha: f64, count: usize) -> Result<Vec<Vec<f64>>> {
    if !(alpha >= 0.0) || !alpha.is_finite() {
        return Err(invalid(format!("alpha must be finite and nonnegative, got {alpha}")));
    }
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    Ok((0..count)
        .into_par_iter()
        .map(|j| {
            let s = (j as f64 + 0.5) / count as f64;
            c.eval(s)
                .into_iter()
                .map(|x| {
                    let r = (alpha * x).rem_euclid(1.0);
                    if r >= 1.0 {
                        0.0
                    } else {
                        r
                    }
                })
                .collect()
        })
        .collect())
}

/// `(1/count) Σ_j exp(2πi m·x_j)`.
pub fn fourier_coefficient(samples: &[Vec<f64>], m: &FourierIndex) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(invalid("no samples"));
    }
    if samples.iter().any(|x| x.len() != m.0.len()) {
        return Err(invalid("frequency and sample dimensions differ"));
    }
    if m.is_zero() {
        return Ok(Complex64::new(1.0, 0.0));
    }
    let sum = samples
        .par_iter()
        .map(|x| {
            let phase: f64 = x.iter().zip(&m.0).map(|(x, &k)| x * k as f64).sum();
            Complex64::from_polar(1.0, 2.0 * PI * phase)
        })
        .collect::<Vec<_>>()
        .iter()
        .sum::<Complex64>();
    Ok(sum / samples.len() as f64)
}

/// Grid size `max(10⁴, 100·α·m_max)`.
pub fn default_count(alpha: f64, m_max: i64) -> usize {
    (100.0 * alpha * m_max as f64).ceil().max(1e4) as usize
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepEntry {
    pub alpha: f64,
    pub m: FourierIndex,
    pub abs_coeff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub alpha: f64,
    pub count: usize,
    pub max_abs: f64,
    pub entries: Vec<SweepEntry>,
}

/// For every `α`, all `|c_m(α)|` with `0 < |m|_∞ ≤ m_max` and their maximum.
pub fn equidistribution_sweep(c: &TorusCurve, alphas: &[f64], m_max: i64) -> Result<Vec<SweepRow>> {
    if m_max < 1 {
        return Err(invalid("m_max must be at least 1"));
    }
    if alphas.windows(2).any(|w| !(w[0] < w[1])) {
        return Err(invalid("alphas must be strictly increasing"));
    }
    let indices = FourierIndex::nonzero_up_to(c.dimension(), m_max);
    alphas
        .iter()
        .map(|&alpha| {
            let count = default_count(alpha, m_max);
            let samples = torus_translate(c, alpha, count)?;
            let entries = indices
                .iter()
                .map(|m| {
                    Ok(SweepEntry {
                        alpha,
                        m: m.clone(),
                        abs_coeff: fourier_coefficient(&samples, m)?.norm(),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            let max_abs = entries.iter().map(|e| e.abs_coeff).fold(0.0, f64::max);
            Ok(SweepRow {
                alpha,
                count,
                max_abs,
                entries,
            })
        })
        .collect()
}

/// CSV with columns `alpha, m1, …, mn, abs_coeff`.
pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let n = rows
        .first()
        .and_then(|r| r.entries.first())
        .map(|e| e.m.0.len())
        .unwrap_or(0);
    let mut header = vec!["alpha".to_string()];
    header.extend((1..=n).map(|i| format!("m{i}")));
    header.push("abs_coeff".into());
    w.write_record(&header)?;
    for row in rows {
        for e in &row.entries {
            let mut rec = vec![e.alpha.to_string()];
            rec.extend(e.m.0.iter().map(|m| m.to_string()));
            rec.push(e.abs_coeff.to_string());
            w.write_record(&rec)?;
        }
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::integrate;

    /// `|∫₀¹ exp(2πi α (m·ψ(s))) ds|` by composite Gauss–Legendre.
    fn quadrature(c: &TorusCurve, alpha: f64, m: &[i64]) -> f64 {
        let panels = 200 + (40.0 * alpha) as usize;
        let phase = |s: f64| {
            let x = c.eval(s);
            2.0 * PI * alpha * x.iter().zip(m).map(|(x, &k)| x * k as f64).sum::<f64>()
        };
        let re = integrate(|s| phase(s).cos(), 0.0, 1.0, panels);
        let im = integrate(|s| phase(s).sin(), 0.0, 1.0, panels);
        re.hypot(im)
    }

    #[test]
    fn alpha_zero_collapses_to_origin() {
        let samples = torus_translate(&TorusCurve::Circle, 0.0, 10).unwrap();
        assert!(samples.iter().all(|x| x.iter().all(|&v| v == 0.0)));
        let rows = equidistribution_sweep(&TorusCurve::Circle, &[0.0], 2).unwrap();
        assert!((rows[0].max_abs - 1.0).abs() < 1e-15);
    }

    #[test]
    fn circle_samples_at_unit_dilation() {
        let samples = torus_translate(&TorusCurve::Circle, 1.0, 4).unwrap();
        for (j, x) in samples.iter().enumerate() {
            let s = (j as f64 + 0.5) / 4.0;
            let (sin, cos) = (2.0 * PI * s).sin_cos();
            assert!((x[0] - cos.rem_euclid(1.0)).abs() < 1e-15);
            assert!((x[1] - sin.rem_euclid(1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn samples_lie_in_unit_cube() {
        let c = TorusCurve::polynomial(vec![vec![0.1, -3.0, 2.0], vec![0.0, 7.0], vec![-1.0, 0.0, 0.0, 5.0]]).unwrap();
        for alpha in [0.5, 3.0, 77.7] {
            for x in torus_translate(&c, alpha, 1000).unwrap() {
                assert!(x.iter().all(|v| (0.0..1.0).contains(v)));
            }
        }
    }

    #[test]
    fn zero_frequency_is_one() {
        let samples = torus_translate(&TorusCurve::Circle, 3.3, 100).unwrap();
        assert_eq!(fourier_coefficient(&samples, &FourierIndex(vec![0, 0])).unwrap(), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn line_matches_sinc() {
        let c = TorusCurve::polynomial(vec![vec![0.0, 1.0], vec![0.0, 1.0]]).unwrap();
        for alpha in [0.3, 1.5, 7.25, 40.5] {
            let samples = torus_translate(&c, alpha, 10_000).unwrap();
            let got = fourier_coefficient(&samples, &FourierIndex(vec![1, 0])).unwrap().norm();
            let exact = ((PI * alpha).sin() / (PI * alpha)).abs();
            assert!((got - exact).abs() < 1e-6, "alpha {alpha}: {got} vs {exact}");
        }
    }

    #[test]
    fn circle_matches_quadrature() {
        for alpha in [1.0, 10.0, 37.0, 80.0] {
            let count = default_count(alpha, 3);
            let samples = torus_translate(&TorusCurve::Circle, alpha, count).unwrap();
            for m in [[1, 0], [0, 1], [2, -3], [3, 3]] {
                let got = fourier_coefficient(&samples, &FourierIndex(m.to_vec())).unwrap().norm();
                let oracle = quadrature(&TorusCurve::Circle, alpha, &m);
                assert!((got - oracle).abs() < 1e-6, "alpha {alpha} m {m:?}: {got} vs {oracle}");
            }
        }
    }

    #[test]
    fn circle_sweep_decays() {
        let rows = equidistribution_sweep(&TorusCurve::Circle, &[10.0, 20.0, 40.0, 80.0], 3).unwrap();
        assert_eq!(rows[0].entries.len(), 48);
        for w in rows.windows(2) {
            assert!(w[1].max_abs < w[0].max_abs);
        }
        assert!(rows[3].max_abs < 0.05);
    }

    #[test]
    fn hyperplane_witness_keeps_unit_modulus() {
        let c = TorusCurve::polynomial(vec![vec![0.0], vec![0.0, 1.0]]).unwrap();
        for alpha in [1.0, 13.7, 100.0] {
            let samples = torus_translate(&c, alpha, 5000).unwrap();
            let v = fourier_coefficient(&samples, &FourierIndex(vec![1, 0])).unwrap();
            assert!((v.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn grid_doubling_is_stable() {
        for alpha in [5.0, 50.0, 100.0] {
            let n = default_count(alpha, 3);
            let a = torus_translate(&TorusCurve::Circle, alpha, n).unwrap();
            let b = torus_translate(&TorusCurve::Circle, alpha, 2 * n).unwrap();
            let m = FourierIndex(vec![2, 1]);
            let d = fourier_coefficient(&a, &m).unwrap().norm() - fourier_coefficient(&b, &m).unwrap().norm();
            assert!(d.abs() < 1e-6);
        }
    }

    #[test]
    fn sweep_validation_and_csv() {
        assert!(equidistribution_sweep(&TorusCurve::Circle, &[2.0, 1.0], 1).is_err());
        assert!(equidistribution_sweep(&TorusCurve::Circle, &[1.0], 0).is_err());
        assert!(torus_translate(&TorusCurve::Circle, -1.0, 10).is_err());
        let rows = equidistribution_sweep(&TorusCurve::Circle, &[1.0, 2.0], 1).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("alpha,m1,m2,abs_coeff\n"));
        assert_eq!(text.lines().count(), 1 + 2 * 8);
    }

    #[test]
    fn modulus_is_one_iff_samples_coincide() {
        let same = vec![vec![0.25, 0.5]; 10];
        let m = FourierIndex(vec![3, -1]);
        assert!((fourier_coefficient(&same, &m).unwrap().norm() - 1.0).abs() < 1e-15);
        let spread: Vec<Vec<f64>> = (0..10).map(|j| vec![j as f64 / 10.0, 0.0]).collect();
        assert!(fourier_coefficient(&spread, &FourierIndex(vec![1, 0])).unwrap().norm() < 1e-12);
    }
}
