use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Grid points per tested subinterval.
pub const GRID_POINTS: usize = 1 << 14;

/// One measured sublevel set: `|{t ∈ J : |ξ(t)| < ρ·sup_J |ξ|}| / |J|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SublevelCheck {
    pub family_index: usize,
    pub interval: (f64, f64),
    pub rho: f64,
    pub relative_measure: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GoodFamilyReport {
    pub fitted_c: f64,
    pub fitted_alpha: f64,
    /// The subinterval whose fitted exponent is smallest.
    pub worst_interval: (f64, f64),
    /// Largest polynomial degree in the family.
    pub degree: usize,
    pub checks: Vec<SublevelCheck>,
}

impl GoodFamilyReport {
    /// `relative_measure ≤ C ρ^α` on every recorded check.
    pub fn consistent(&self) -> bool {
        self.checks
            .iter()
            .all(|c| c.relative_measure <= self.fitted_c * c.rho.powf(self.fitted_alpha) * (1.0 + 1e-12))
    }
}

fn degree(p: &[f64]) -> usize {
    p.iter().rposition(|c| *c != 0.0).unwrap_or(0)
}

fn eval(p: &[f64], t: f64) -> f64 {
    p.iter().rev().fold(0.0, |acc, c| acc * t + c)
}

/// The subintervals `[a + i(b-a)/k, a + (i+1)(b-a)/k]` for `k = 1..=subintervals`.
pub fn test_intervals(interval: (f64, f64), subintervals: usize) -> Vec<(f64, f64)> {
    let (a, b) = interval;
    (1..=subintervals)
        .flat_map(|k| {
            (0..k).map(move |i| {
                (
                    a + (b - a) * i as f64 / k as f64,
                    a + (b - a) * (i + 1) as f64 / k as f64,
                )
            })
        })
        .collect()
}

/// The default threshold grid `ρ = 2^{-1}, …, 2^{-10}`.
pub fn default_rho_grid() -> Vec<f64> {
    (1..=10).map(|k| 0.5f64.powi(k)).collect()
}

fn least_squares_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 2 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Estimates `(C, α)` with `|{t ∈ J : |ξ(t)| < r}| ≤ C (r / sup_J |ξ|)^α |J|`
/// for every polynomial `ξ` of the family (ascending coefficients) and every
/// tested subinterval `J` of `interval`. Sublevel sets are measured on a
/// midpoint grid; `α` is the smallest log-log slope, and `C` the smallest
/// constant making every measured triple satisfy the bound with that `α`.
pub fn good_function_fit(
    families: &[Vec<f64>],
    interval: (f64, f64),
    subintervals: usize,
    rho_grid: &[f64],
) -> Result<GoodFamilyReport> {
    let (a, b) = interval;
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(invalid("interval must satisfy a < b"));
    }
    if subintervals < 4 {
        return Err(invalid("at least 4 subintervals are required"));
    }
    if rho_grid.len() < 2 || rho_grid.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
        return Err(invalid("rho grid needs at least two values in (0, 1)"));
    }
    if families.iter().any(|p| p.iter().any(|c| !c.is_finite())) {
        return Err(invalid("coefficients must be finite"));
    }
    if families.iter().all(|p| degree(p) == 0) {
        return Err(invalid("family has no nonconstant polynomial"));
    }
    let intervals = test_intervals(interval, subintervals);
    let tasks: Vec<(usize, (f64, f64))> = families
        .iter()
        .enumerate()
        .filter(|(_, p)| degree(p) > 0)
        .flat_map(|(i, _)| intervals.iter().map(move |j| (i, *j)))
        .collect();
    let results: Vec<(Vec<SublevelCheck>, Option<f64>)> = tasks
        .par_iter()
        .map(|&(fi, (ja, jb))| {
            let p = &families[fi];
            let h = (jb - ja) / GRID_POINTS as f64;
            let mut values: Vec<f64> = (0..GRID_POINTS)
                .map(|i| eval(p, ja + (i as f64 + 0.5) * h).abs())
                .collect();
            let sup = values
                .iter()
                .copied()
                .chain([eval(p, ja).abs(), eval(p, jb).abs()])
                .fold(0.0, f64::max);
            values.sort_by(f64::total_cmp);
            let checks: Vec<SublevelCheck> = rho_grid
                .iter()
                .map(|&rho| {
                    let below = values.partition_point(|v| *v < rho * sup);
                    SublevelCheck {
                        family_index: fi,
                        interval: (ja, jb),
                        rho,
                        relative_measure: below as f64 / GRID_POINTS as f64,
                    }
                })
                .collect();
            let points: Vec<(f64, f64)> = checks
                .iter()
                .filter(|c| c.relative_measure > 0.0)
                .map(|c| (c.rho.ln(), c.relative_measure.ln()))
                .collect();
            (checks, least_squares_slope(&points))
        })
        .collect();
    let mut fitted_alpha = f64::INFINITY;
    let mut worst_interval = interval;
    for ((_, j), (_, slope)) in tasks.iter().zip(&results) {
        if let Some(s) = slope {
            if *s < fitted_alpha {
                fitted_alpha = *s;
                worst_interval = *j;
            }
        }
    }
    if !fitted_alpha.is_finite() {
        return Err(invalid("no subinterval produced a usable sublevel profile"));
    }
    let fitted_alpha = fitted_alpha.max(f64::MIN_POSITIVE);
    let checks: Vec<SublevelCheck> = results.into_iter().flat_map(|(c, _)| c).collect();
    let fitted_c = checks
        .iter()
        .map(|c| c.relative_measure / c.rho.powf(fitted_alpha))
        .fold(f64::MIN_POSITIVE, f64::max);
    Ok(GoodFamilyReport {
        fitted_c,
        fitted_alpha,
        worst_interval,
        degree: families.iter().map(|p| degree(p)).max().unwrap_or(0),
        checks,
    })
}

/// Coordinates of `u(t)·v_m` in the weight basis of the `m = 2` irrep:
/// `t², 2t, 1`, plus two mixed combinations.
pub fn adjoint_family() -> Vec<Vec<f64>> {
    vec![
        vec![0.0, 0.0, 1.0],
        vec![0.0, 2.0, 0.0],
        vec![1.0],
        vec![0.0, 1.0, 1.0],
        vec![1.0, 2.0, 1.0],
    ]
}
