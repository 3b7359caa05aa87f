use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::curve::{default_w0, normalizer_z, AnalyticCurve, DERIVATIVE_EPS};
use super::observable::Observable;
use crate::error::{invalid, Error, Result};
use crate::group::{
    make_flow, unipotent, Direction, FrameCoordinate, GroupElement, UpperSpacePoint,
};
use crate::lattice::{
    frame_fields, frame_header, reduce_element, HaarSampleSet, LatticeTag, QuotientPoint,
};
use crate::seeding::{chunks, stream_rng};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplingRule {
    /// `s_j = a + (j + 1/2)(b - a)/count`.
    #[default]
    Midpoint,
    /// Independent uniform draws from the seed.
    Random,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TranslateOptions {
    pub rule: SamplingRule,
    pub with_normalizer: bool,
    pub w0: Complex64,
}

impl Default for TranslateOptions {
    fn default() -> Self {
        TranslateOptions {
            rule: SamplingRule::Midpoint,
            with_normalizer: false,
            w0: default_w0(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Sample {
    pub point: QuotientPoint,
    pub weight: f64,
    /// Curve parameter; `None` for samples that do not come from a curve.
    pub s: Option<f64>,
    /// Deterministic mass, such as the truncated-cusp atom, excluded from
    /// the Monte Carlo error.
    pub exact: bool,
}

/// A weighted sample list standing for a translated curve measure.
#[derive(Clone, Debug, PartialEq)]
pub struct EmpiricalMeasure {
    pub samples: Vec<Sample>,
    pub flow_time: f64,
    pub curve_id: String,
    pub base: GroupElement,
    pub lattice: LatticeTag,
    pub rule: SamplingRule,
    /// Fraction of parameter samples discarded because `φ'` vanished there.
    pub dropped_fraction: f64,
}

/// Weighted mean and variance of an observable, with the standard error of
/// the mean for independent samples.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub std_error: f64,
}

impl EmpiricalMeasure {
    /// Points of a Haar sample, plus one atom high in the cusp carrying the
    /// truncated tail mass.
    pub fn from_haar(haar: &HaarSampleSet) -> Result<Self> {
        if haar.points.is_empty() {
            return Err(invalid("empty Haar sample"));
        }
        let w = (1.0 - haar.tail_mass) / haar.points.len() as f64;
        let mut samples: Vec<Sample> = haar
            .points
            .iter()
            .map(|p| Sample {
                point: p.clone(),
                weight: w,
                s: None,
                exact: false,
            })
            .collect();
        let cusp = FrameCoordinate {
            base: UpperSpacePoint {
                horizontal: Complex64::new(0.0, 0.0),
                height: 2.0 * haar.height_cap,
            },
            direction: match haar.lattice.model() {
                crate::group::Model::Real => Direction::Angle(Direction::REFERENCE_ANGLE),
                crate::group::Model::Complex => Direction::Vector([0.0, 0.0, 1.0]),
            },
        };
        samples.push(Sample {
            point: QuotientPoint::reduced(haar.lattice, cusp),
            weight: haar.tail_mass,
            s: None,
            exact: true,
        });
        Ok(EmpiricalMeasure {
            samples,
            flow_time: 0.0,
            curve_id: format!("haar-{}-seed{}", haar.lattice, haar.seed),
            base: GroupElement::identity(haar.lattice.model()),
            lattice: haar.lattice,
            rule: SamplingRule::Random,
            dropped_fraction: 0.0,
        })
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.samples.iter().map(|s| s.weight).sum()
    }

    pub fn moments(&self, f: impl Fn(&QuotientPoint) -> f64) -> Moments {
        let values: Vec<f64> = self.samples.iter().map(|s| f(&s.point)).collect();
        let mut mean = 0.0;
        let mut second = 0.0;
        let (mut wr, mut wr_mean, mut w2) = (0.0, 0.0, 0.0);
        for (s, &v) in self.samples.iter().zip(&values) {
            mean += s.weight * v;
            second += s.weight * v * v;
            if !s.exact {
                wr += s.weight;
                wr_mean += s.weight * v;
                w2 += s.weight * s.weight;
            }
        }
        let variance = (second - mean * mean).max(0.0);
        let random_variance = if wr > 0.0 {
            let m = wr_mean / wr;
            self.samples
                .iter()
                .zip(&values)
                .filter(|(s, _)| !s.exact)
                .map(|(s, v)| s.weight * (v - m).powi(2))
                .sum::<f64>()
                / wr
        } else {
            0.0
        };
        Moments {
            mean,
            variance,
            std_error: (random_variance * w2).sqrt(),
        }
    }

    /// CSV with the frame columns, the weight, and `s, t, curve_id`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = frame_header(self.lattice);
        header.extend(["weight", "s", "t", "curve_id"]);
        w.write_record(&header)?;
        for sample in &self.samples {
            let mut row = frame_fields(sample.point.frame());
            row.push(sample.weight.to_string());
            row.push(sample.s.map(|s| s.to_string()).unwrap_or_default());
            row.push(self.flow_time.to_string());
            row.push(self.curve_id.clone());
            w.write_record(&row)?;
        }
        w.flush()
    }
}

fn parameters(c: &AnalyticCurve, count: usize, seed: u64, rule: SamplingRule) -> Vec<f64> {
    let (a, b) = c.interval();
    match rule {
        SamplingRule::Midpoint => (0..count)
            .map(|j| a + (j as f64 + 0.5) * (b - a) / count as f64)
            .collect(),
        SamplingRule::Random => chunks(count)
            .into_par_iter()
            .flat_map_iter(|(stream, _, len)| {
                let mut rng = stream_rng(seed, stream);
                (0..len).map(move |_| rng.random_range(a..b)).collect::<Vec<_>>()
            })
            .collect(),
    }
}

/// The group element `[z(s)]·a_t·[ζ(s)]·u(φ(s))·base` of the translated curve,
/// written for `G/Γ`.
fn curve_element(
    c: &AnalyticCurve,
    flow: &GroupElement,
    base: &GroupElement,
    s: f64,
    normalizer: Option<Complex64>,
) -> Result<GroupElement> {
    let model = base.model();
    let mut g = unipotent(model, c.point(s)?) * *base;
    if let Some(zeta) = c.zeta_element(model, s) {
        g = zeta * g;
    }
    g = *flow * g;
    if let Some(w0) = normalizer {
        let mut z = normalizer_z(c, s, w0)?;
        if model != z.model() {
            z = z.to_complex();
        }
        g = z * g;
    }
    Ok(g)
}

fn check_inputs(c: &AnalyticCurve, base: &GroupElement, lattice: LatticeTag) -> Result<()> {
    if base.model() != lattice.model() {
        return Err(invalid(format!(
            "base element model {:?} does not match the {lattice} lattice",
            base.model()
        )));
    }
    if c.model() == crate::group::Model::Complex && lattice == LatticeTag::Modular {
        return Err(invalid("a curve in R² needs the Picard lattice"));
    }
    Ok(())
}

/// Samples the translated curve measure: each parameter `s` gives the point
/// `[z(s)] a_t [ζ(s)] u(φ(s)) base` of `G/Γ`, stored through its inverse in
/// `Γ\G` and reduced to the fundamental domain. Weights are equal.
#[allow(clippy::too_many_arguments)]
pub fn translate_curve(
    c: &AnalyticCurve,
    base: &GroupElement,
    lattice: LatticeTag,
    t: f64,
    count: usize,
    seed: u64,
    options: &TranslateOptions,
) -> Result<EmpiricalMeasure> {
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    check_inputs(c, base, lattice)?;
    let mut params = parameters(c, count, seed, options.rule);
    let mut dropped_fraction = 0.0;
    if options.with_normalizer {
        let before = params.len();
        params.retain(|&s| c.tangent(s).map(|v| v.norm() >= DERIVATIVE_EPS).unwrap_or(false));
        if params.is_empty() {
            let (a, _) = c.interval();
            return Err(Error::DerivativeVanishes { s: a });
        }
        dropped_fraction = (before - params.len()) as f64 / before as f64;
    }
    let flow = make_flow(lattice.model(), t);
    let normalizer = options.with_normalizer.then_some(options.w0);
    let weight = 1.0 / params.len() as f64;
    let samples = params
        .par_iter()
        .map(|&s| {
            let g = curve_element(c, &flow, base, s, normalizer)?;
            Ok(Sample {
                point: reduce_element(lattice, &g.inverse())?,
                weight,
                s: Some(s),
                exact: false,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EmpiricalMeasure {
        samples,
        flow_time: t,
        curve_id: c.id().to_string(),
        base: *base,
        lattice,
        rule: options.rule,
        dropped_fraction,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableDiscrepancy {
    pub name: String,
    pub empirical: f64,
    pub reference: f64,
    pub difference: f64,
    pub error_bar: f64,
}

/// Serialized as `{experiment, t, per_observable, max_defect, error_bar}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DiscrepancyReport {
    pub experiment: String,
    pub t: f64,
    pub per_observable: Vec<ObservableDiscrepancy>,
    pub max_defect: f64,
    /// Largest combined (empirical and reference) standard error.
    pub error_bar: f64,
}

/// Largest deviation of empirical means from the Haar references.
pub fn discrepancy(m: &EmpiricalMeasure, battery: &[Observable]) -> Result<DiscrepancyReport> {
    if battery.is_empty() {
        return Err(invalid("observable battery is empty"));
    }
    if m.is_empty() {
        return Err(invalid("empirical measure is empty"));
    }
    let per_observable = battery
        .iter()
        .map(|obs| {
            let reference = obs
                .reference
                .ok_or_else(|| invalid(format!("observable {} has no reference value", obs.name)))?;
            let moments = m.moments(|q| obs.eval(q));
            let difference = (moments.mean - reference.value).abs();
            Ok(ObservableDiscrepancy {
                name: obs.name.clone(),
                empirical: moments.mean,
                reference: reference.value,
                difference,
                error_bar: moments.std_error.hypot(reference.std_error),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let max_defect = per_observable.iter().map(|o| o.difference).fold(0.0, f64::max);
    let error_bar = per_observable.iter().map(|o| o.error_bar).fold(0.0, f64::max);
    Ok(DiscrepancyReport {
        experiment: m.curve_id.clone(),
        t: m.flow_time,
        per_observable,
        max_defect,
        error_bar,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DefectReport {
    pub t: f64,
    pub t0: f64,
    /// `(name, mean difference)` per observable.
    pub per_observable: Vec<(String, f64)>,
    pub defect: f64,
    /// Largest standard error of the paired differences.
    pub error_bar: f64,
    pub dropped_fraction: f64,
}

/// How far the normalized translated measure is from being invariant under
/// `u(t0·w0)`: the largest change of an observable's mean when every sample
/// is moved by that unipotent element (on the left in `G/Γ`).
#[allow(clippy::too_many_arguments)]
pub fn w_invariance_defect(
    c: &AnalyticCurve,
    base: &GroupElement,
    lattice: LatticeTag,
    t: f64,
    t0: f64,
    battery: &[Observable],
    count: usize,
    seed: u64,
    rule: SamplingRule,
) -> Result<DefectReport> {
    if battery.is_empty() {
        return Err(invalid("observable battery is empty"));
    }
    if count == 0 {
        return Err(invalid("count must be at least 1"));
    }
    check_inputs(c, base, lattice)?;
    let w0 = default_w0();
    let model = lattice.model();
    let mut params = parameters(c, count, seed, rule);
    let before = params.len();
    params.retain(|&s| c.tangent(s).map(|v| v.norm() >= DERIVATIVE_EPS).unwrap_or(false));
    if params.is_empty() {
        return Err(Error::DerivativeVanishes { s: c.interval().0 });
    }
    let dropped_fraction = (before - params.len()) as f64 / before as f64;
    let flow = make_flow(model, t);
    // left translation by u(t0 w0) on G/Γ is right translation by u(-t0 w0) on Γ\G
    let shift = unipotent(model, -w0 * t0);
    let diffs: Vec<Vec<f64>> = params
        .par_iter()
        .map(|&s| {
            let y = curve_element(c, &flow, base, s, Some(w0))?.inverse();
            let p = reduce_element(lattice, &y)?;
            let moved = if t0 == 0.0 {
                p.clone()
            } else {
                reduce_element(lattice, &(y * shift))?
            };
            Ok(battery.iter().map(|o| o.eval(&moved) - o.eval(&p)).collect())
        })
        .collect::<Result<_>>()?;
    let n = diffs.len() as f64;
    let mut per_observable = Vec::with_capacity(battery.len());
    let mut defect: f64 = 0.0;
    let mut error_bar: f64 = 0.0;
    for (k, obs) in battery.iter().enumerate() {
        let mean = diffs.iter().map(|d| d[k]).sum::<f64>() / n;
        let var = diffs.iter().map(|d| (d[k] - mean).powi(2)).sum::<f64>() / n;
        defect = defect.max(mean.abs());
        error_bar = error_bar.max((var / n).sqrt());
        per_observable.push((obs.name.clone(), mean));
    }
    Ok(DefectReport {
        t,
        t0,
        per_observable,
        defect,
        error_bar,
        dropped_fraction,
    })
}

/// Weighted fraction of samples whose height is at most `y`.
pub fn nondivergence_fraction(m: &EmpiricalMeasure, y: f64) -> Result<f64> {
    if m.is_empty() {
        return Err(invalid("empirical measure is empty"));
    }
    let below = compensated_sum(
        m.samples
            .iter()
            .filter(|s| s.point.base().height <= y)
            .map(|s| s.weight),
    );
    Ok(below.min(1.0))
}

/// Neumaier summation; keeps counts of equal weights exact.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut c) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        c += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + c
}
