//! TOML experiment configuration.
//!
//! Every file names its experiment at top level; the remaining keys are
//! specific to that experiment and unknown keys are rejected:
//!
//! ```toml
//! experiment = "core_equidistribution_n2"
//! seed = 1
//! lattice = "modular"
//! t = [2.0, 4.0, 6.0, 8.0, 10.0, 12.0]
//! count = 100000
//!
//! [curve]
//! interval = [0.0, 1.0]
//! coeffs = [[0.0, 1.0]]
//!
//! [haar]
//! count = 1000000
//! height_cap = 50.0
//!
//! [tolerances]
//! discrepancy = 0.05
//! error_bar = 0.02
//! monotone_bars = 2.0
//!
//! [nondivergence]
//! level = 10.0
//! min_fraction = 0.9
//! ```

use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use super::registry::ExperimentKind;
use crate::curve_engine::{AnalyticCurve, SamplingRule};
use crate::error::{invalid, Error, Result};
use crate::lattice::LatticeTag;
use crate::torus::TorusCurve;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveSection {
    pub interval: [f64; 2],
    /// Ascending-power coefficients, one list per coordinate.
    pub coeffs: Vec<Vec<f64>>,
    /// Optional declared degree, checked against the coefficients.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

impl CurveSection {
    pub fn new(interval: [f64; 2], coeffs: Vec<Vec<f64>>) -> Self {
        CurveSection {
            interval,
            coeffs,
            degree: None,
        }
    }

    pub fn build(&self) -> Result<AnalyticCurve> {
        let curve = AnalyticCurve::new((self.interval[0], self.interval[1]), self.coeffs.clone())?;
        if let Some(d) = self.degree {
            let actual = self
                .coeffs
                .iter()
                .map(|c| c.iter().rposition(|v| *v != 0.0).unwrap_or(0))
                .max()
                .unwrap_or(0);
            if d != actual {
                return Err(invalid(format!("declared degree {d} but coefficients have degree {actual}")));
            }
        }
        Ok(curve)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarSection {
    pub count: usize,
    pub height_cap: f64,
}

impl Default for HaarSection {
    fn default() -> Self {
        HaarSection {
            count: 1_000_000,
            height_cap: 50.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquidistributionTolerances {
    /// Bound on the discrepancy at the last time of the sweep.
    pub discrepancy: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error_bar: Option<f64>,
    /// Allowed increase between consecutive times, in combined error bars.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub monotone_bars: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquidistributionConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub lattice: LatticeTag,
    pub t: Vec<f64>,
    pub count: usize,
    #[serde(default)]
    pub rule: SamplingRule,
    pub curve: CurveSection,
    #[serde(default)]
    pub haar: HaarSection,
    pub tolerances: EquidistributionTolerances,
    /// Also record the mass below a cusp height for every translate.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nondivergence: Option<NondivergenceTolerances>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NondivergenceTolerances {
    /// Height level `Y`.
    pub level: f64,
    pub min_fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NondivergenceConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub lattice: LatticeTag,
    pub t: Vec<f64>,
    pub count: usize,
    #[serde(default)]
    pub rule: SamplingRule,
    pub curve: CurveSection,
    pub tolerances: NondivergenceTolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WInvarianceTolerances {
    /// Bound on the defect at the last time of the sweep.
    pub defect: f64,
    /// The last defect must sit this many combined error bars below the first.
    pub trend_bars: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WInvarianceConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub lattice: LatticeTag,
    pub t: Vec<f64>,
    pub t0: f64,
    pub count: usize,
    #[serde(default)]
    pub rule: SamplingRule,
    pub curve: CurveSection,
    pub tolerances: WInvarianceTolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusTolerances {
    /// Bound on the largest nonzero coefficient for `α ≥ from_alpha`.
    pub max_coeff: f64,
    pub from_alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorusConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub alpha: Vec<f64>,
    pub m_max: i64,
    pub curve: TorusCurve,
    pub tolerances: TorusTolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    /// Determinant identity for `m = 1..=det_m_max`.
    pub det_m_max: usize,
    /// Rational parameters `[p, q]` for the determinant identity.
    pub det_t: Vec<[i64; 2]>,
    /// Norm inequalities for `m = 1..=lemma_m_max`.
    pub lemma_m_max: usize,
    pub t: Vec<f64>,
    pub trials: usize,
    pub alphas: Vec<f64>,
    #[serde(default)]
    pub direct_sums: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FamilySection {
    pub name: String,
    /// Polynomials, ascending coefficients.
    pub polys: Vec<Vec<f64>>,
    pub min_alpha: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GoodFunctionConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub interval: [f64; 2],
    pub subintervals: usize,
    pub rho: Vec<f64>,
    pub families: Vec<FamilySection>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerateTolerances {
    pub plane_distance: f64,
    pub modular_discrepancy: f64,
    pub separation_sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DegenerateConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub t: Vec<f64>,
    pub count: usize,
    pub curve: CurveSection,
    #[serde(default)]
    pub haar: HaarSection,
    pub tolerances: DegenerateTolerances,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarCalibrationTolerances {
    /// Allowed discrepancy in combined standard errors.
    pub sigma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HaarCalibrationConfig {
    pub experiment: ExperimentKind,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    pub lattices: Vec<LatticeTag>,
    /// Size of the sample compared against the reference.
    pub count: usize,
    pub reference: HaarSection,
    pub tolerances: HaarCalibrationTolerances,
}

fn default_seed() -> u64 {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ExperimentConfig {
    Equidistribution(EquidistributionConfig),
    Nondivergence(NondivergenceConfig),
    WInvariance(WInvarianceConfig),
    Torus(TorusConfig),
    Rep(RepConfig),
    GoodFunction(GoodFunctionConfig),
    Degenerate(DegenerateConfig),
    HaarCalibration(HaarCalibrationConfig),
}

macro_rules! common {
    ($self:ident, $c:ident => $e:expr) => {
        match $self {
            ExperimentConfig::Equidistribution($c) => $e,
            ExperimentConfig::Nondivergence($c) => $e,
            ExperimentConfig::WInvariance($c) => $e,
            ExperimentConfig::Torus($c) => $e,
            ExperimentConfig::Rep($c) => $e,
            ExperimentConfig::GoodFunction($c) => $e,
            ExperimentConfig::Degenerate($c) => $e,
            ExperimentConfig::HaarCalibration($c) => $e,
        }
    };
}

/// A validation failure tied to a (dotted) field path.
struct FieldError {
    field: String,
    message: String,
}

fn field(field: &str, message: impl Into<String>) -> FieldError {
    FieldError {
        field: field.to_string(),
        message: message.into(),
    }
}

fn positive_count(name: &str, v: usize) -> std::result::Result<(), FieldError> {
    if v == 0 {
        return Err(field(name, "must be at least 1"));
    }
    Ok(())
}

fn finite_list(name: &str, v: &[f64], allow_negative: bool) -> std::result::Result<(), FieldError> {
    if v.is_empty() {
        return Err(field(name, "must not be empty"));
    }
    if v.iter().any(|x| !x.is_finite() || (!allow_negative && *x < 0.0)) {
        return Err(field(
            name,
            if allow_negative { "entries must be finite" } else { "entries must be finite and nonnegative" },
        ));
    }
    Ok(())
}

fn positive(name: &str, v: f64) -> std::result::Result<(), FieldError> {
    if !(v > 0.0) || !v.is_finite() {
        return Err(field(name, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

fn curve_ok(c: &CurveSection) -> std::result::Result<(), FieldError> {
    c.build().map(|_| ()).map_err(|e| field("curve.coeffs", e.to_string()))
}

fn nondivergence_ok(prefix: &str, n: &NondivergenceTolerances) -> std::result::Result<(), FieldError> {
    if !(n.level >= 1.0) || !n.level.is_finite() {
        return Err(field(&format!("{prefix}.level"), "must be finite and at least 1"));
    }
    if !(0.0..=1.0).contains(&n.min_fraction) {
        return Err(field(&format!("{prefix}.min_fraction"), "must lie in [0, 1]"));
    }
    Ok(())
}

fn haar_ok(prefix: &str, h: &HaarSection) -> std::result::Result<(), FieldError> {
    if h.count < 2 {
        return Err(field(&format!("{prefix}.count"), "must be at least 2"));
    }
    if !(h.height_cap >= 2.0) || !h.height_cap.is_finite() {
        return Err(field(&format!("{prefix}.height_cap"), "must be finite and at least 2"));
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn kind(&self) -> ExperimentKind {
        common!(self, c => c.experiment)
    }

    pub fn seed(&self) -> u64 {
        common!(self, c => c.seed)
    }

    pub fn set_seed(&mut self, seed: u64) {
        common!(self, c => c.seed = seed)
    }

    pub fn output_dir(&self) -> Option<&PathBuf> {
        common!(self, c => c.output_dir.as_ref())
    }

    pub fn to_toml(&self) -> String {
        common!(self, c => toml::to_string(c).expect("configuration serializes"))
    }

    fn check(&self) -> std::result::Result<(), FieldError> {
        match self {
            ExperimentConfig::Equidistribution(c) => {
                positive_count("count", c.count)?;
                finite_list("t", &c.t, false)?;
                curve_ok(&c.curve)?;
                haar_ok("haar", &c.haar)?;
                if c.curve.coeffs.len() != c.lattice.model().boundary_dimension() {
                    return Err(field("curve.coeffs", format!("the {} lattice needs {} coordinate(s)", c.lattice, c.lattice.model().boundary_dimension())));
                }
                positive("tolerances.discrepancy", c.tolerances.discrepancy)?;
                if let Some(e) = c.tolerances.error_bar {
                    positive("tolerances.error_bar", e)?;
                }
                if let Some(b) = c.tolerances.monotone_bars {
                    positive("tolerances.monotone_bars", b)?;
                }
                if let Some(n) = &c.nondivergence {
                    nondivergence_ok("nondivergence", n)?;
                }
            }
            ExperimentConfig::Nondivergence(c) => {
                positive_count("count", c.count)?;
                finite_list("t", &c.t, false)?;
                curve_ok(&c.curve)?;
                nondivergence_ok("tolerances", &c.tolerances)?;
            }
            ExperimentConfig::WInvariance(c) => {
                positive_count("count", c.count)?;
                finite_list("t", &c.t, false)?;
                if c.t.len() < 2 {
                    return Err(field("t", "needs at least two times for the trend check"));
                }
                curve_ok(&c.curve)?;
                if !c.t0.is_finite() {
                    return Err(field("t0", "must be finite"));
                }
                positive("tolerances.defect", c.tolerances.defect)?;
                if !(c.tolerances.trend_bars >= 0.0) {
                    return Err(field("tolerances.trend_bars", "must be nonnegative"));
                }
            }
            ExperimentConfig::Torus(c) => {
                finite_list("alpha", &c.alpha, false)?;
                if c.alpha.windows(2).any(|w| !(w[0] < w[1])) {
                    return Err(field("alpha", "must be strictly increasing"));
                }
                if !(1..=8).contains(&c.m_max) {
                    return Err(field("m_max", "must lie in 1..=8"));
                }
                if let TorusCurve::Polynomial { coeffs } = &c.curve {
                    TorusCurve::polynomial(coeffs.clone()).map_err(|e| field("curve.coeffs", e.to_string()))?;
                }
                positive("tolerances.max_coeff", c.tolerances.max_coeff)?;
            }
            ExperimentConfig::Rep(c) => {
                positive_count("det_m_max", c.det_m_max)?;
                positive_count("lemma_m_max", c.lemma_m_max)?;
                positive_count("trials", c.trials)?;
                if c.det_t.iter().any(|[p, q]| *p == 0 || *q == 0) {
                    return Err(field("det_t", "entries [p, q] need p != 0 and q != 0"));
                }
                finite_list("t", &c.t, true)?;
                if c.t.contains(&0.0) {
                    return Err(field("t", "t = 0 makes B singular"));
                }
                finite_list("alphas", &c.alphas, false)?;
                if c.alphas.iter().any(|a| *a <= 1.0) {
                    return Err(field("alphas", "entries must exceed 1"));
                }
                if c.direct_sums.iter().any(|s| s.is_empty() || s.contains(&0)) {
                    return Err(field("direct_sums", "summands must be nonempty lists of m >= 1"));
                }
            }
            ExperimentConfig::GoodFunction(c) => {
                if !(c.interval[0] < c.interval[1]) {
                    return Err(field("interval", "must satisfy a < b"));
                }
                if c.subintervals < 4 {
                    return Err(field("subintervals", "must be at least 4"));
                }
                if c.rho.len() < 2 || c.rho.iter().any(|r| !(*r > 0.0 && *r < 1.0)) {
                    return Err(field("rho", "needs at least two values in (0, 1)"));
                }
                if c.families.is_empty() {
                    return Err(field("families", "must not be empty"));
                }
                for f in &c.families {
                    if f.polys.is_empty() {
                        return Err(field("families.polys", format!("family `{}` is empty", f.name)));
                    }
                    positive("families.min_alpha", f.min_alpha)?;
                }
            }
            ExperimentConfig::Degenerate(c) => {
                positive_count("count", c.count)?;
                finite_list("t", &c.t, false)?;
                curve_ok(&c.curve)?;
                haar_ok("haar", &c.haar)?;
                if c.curve.coeffs.len() != 1 {
                    return Err(field("curve.coeffs", "the curve must be real-valued (one coordinate)"));
                }
                positive("tolerances.plane_distance", c.tolerances.plane_distance)?;
                positive("tolerances.modular_discrepancy", c.tolerances.modular_discrepancy)?;
                positive("tolerances.separation_sigma", c.tolerances.separation_sigma)?;
            }
            ExperimentConfig::HaarCalibration(c) => {
                if c.lattices.is_empty() {
                    return Err(field("lattices", "must not be empty"));
                }
                if c.count < 2 {
                    return Err(field("count", "must be at least 2"));
                }
                haar_ok("reference", &c.reference)?;
                positive("tolerances.sigma", c.tolerances.sigma)?;
            }
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.check()
            .map_err(|e| invalid(format!("field `{}` {}", e.field, e.message)))
    }

    /// The built-in configuration of an experiment.
    pub fn default_for(kind: ExperimentKind) -> Self {
        let line = || CurveSection::new([0.0, 1.0], vec![vec![0.0, 1.0]]);
        match kind {
            ExperimentKind::CoreEquidistributionN2 => ExperimentConfig::Equidistribution(EquidistributionConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                lattice: LatticeTag::Modular,
                t: vec![2.0, 4.0, 6.0, 8.0, 10.0, 12.0],
                count: 100_000,
                rule: SamplingRule::Midpoint,
                curve: line(),
                haar: HaarSection::default(),
                tolerances: EquidistributionTolerances {
                    discrepancy: 0.05,
                    error_bar: Some(0.02),
                    monotone_bars: Some(2.0),
                },
                nondivergence: Some(NondivergenceTolerances {
                    level: 10.0,
                    min_fraction: 0.9,
                }),
            }),
            ExperimentKind::CoreEquidistributionN3 => ExperimentConfig::Equidistribution(EquidistributionConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                lattice: LatticeTag::Picard,
                t: vec![2.0, 4.0, 6.0, 8.0, 10.0],
                count: 200_000,
                rule: SamplingRule::Midpoint,
                curve: CurveSection::new([0.0, 1.0], vec![vec![0.0, 1.0], vec![0.0, 0.0, 1.0]]),
                haar: HaarSection::default(),
                tolerances: EquidistributionTolerances {
                    discrepancy: 0.08,
                    error_bar: None,
                    monotone_bars: None,
                },
                nondivergence: None,
            }),
            ExperimentKind::TorusSweep => ExperimentConfig::Torus(TorusConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                alpha: vec![10.0, 20.0, 40.0, 80.0, 100.0],
                m_max: 3,
                curve: TorusCurve::Circle,
                tolerances: TorusTolerances {
                    max_coeff: 0.05,
                    from_alpha: 80.0,
                },
            }),
            ExperimentKind::WInvariance => ExperimentConfig::WInvariance(WInvarianceConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                lattice: LatticeTag::Modular,
                t: vec![4.0, 6.0, 8.0, 10.0, 12.0],
                t0: 1.0,
                count: 100_000,
                rule: SamplingRule::Midpoint,
                curve: CurveSection::new([0.1, 0.9], vec![vec![0.0, 1.0, 0.5]]),
                tolerances: WInvarianceTolerances {
                    defect: 0.05,
                    trend_bars: 2.0,
                },
            }),
            ExperimentKind::NondivergenceSweep => ExperimentConfig::Nondivergence(NondivergenceConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                lattice: LatticeTag::Modular,
                t: (0..=14).map(f64::from).collect(),
                count: 100_000,
                rule: SamplingRule::Midpoint,
                curve: line(),
                tolerances: NondivergenceTolerances {
                    level: 10.0,
                    min_fraction: 0.9,
                },
            }),
            ExperimentKind::RepVerification => ExperimentConfig::Rep(RepConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                det_m_max: 12,
                det_t: vec![[1, 2], [-1, 2], [1, 1], [-1, 1], [2, 1], [-2, 1], [3, 1], [-3, 1]],
                lemma_m_max: 8,
                t: vec![0.5, -0.5, 1.0, -1.0, 2.0, -2.0],
                trials: 10_000,
                alphas: vec![2.0, 10.0, 100.0],
                direct_sums: vec![vec![1, 2], vec![2, 3, 5], vec![1, 1, 4]],
            }),
            ExperimentKind::GoodFunction => {
                let mut families: Vec<FamilySection> = (1..=4)
                    .map(|d| {
                        let mut p = vec![0.0; d + 1];
                        p[d] = 1.0;
                        FamilySection {
                            name: format!("monomial_{d}"),
                            polys: vec![p],
                            min_alpha: 0.9 / d as f64,
                        }
                    })
                    .collect();
                families.push(FamilySection {
                    name: "adjoint_orbit".into(),
                    polys: crate::rep_theory::adjoint_family(),
                    min_alpha: 0.45,
                });
                ExperimentConfig::GoodFunction(GoodFunctionConfig {
                    experiment: kind,
                    seed: 1,
                    output_dir: None,
                    interval: [-1.0, 1.0],
                    subintervals: 8,
                    rho: crate::rep_theory::default_rho_grid(),
                    families,
                })
            }
            ExperimentKind::DegeneratePicard => ExperimentConfig::Degenerate(DegenerateConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                t: vec![4.0, 10.0],
                count: 100_000,
                curve: line(),
                haar: HaarSection::default(),
                tolerances: DegenerateTolerances {
                    plane_distance: 1e-6,
                    modular_discrepancy: 0.05,
                    separation_sigma: 5.0,
                },
            }),
            ExperimentKind::HaarCalibration => ExperimentConfig::HaarCalibration(HaarCalibrationConfig {
                experiment: kind,
                seed: 1,
                output_dir: None,
                lattices: vec![LatticeTag::Modular, LatticeTag::Picard],
                count: 400_000,
                reference: HaarSection::default(),
                tolerances: HaarCalibrationTolerances { sigma: 4.0 },
            }),
        }
    }
}

/// 1-based line of `key` inside the `[section]` table (top level when empty).
fn locate(text: &str, path: &str) -> Option<usize> {
    let (section, key) = match path.rsplit_once('.') {
        Some((s, k)) => (s, k),
        None => ("", path),
    };
    let mut current = String::new();
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if trimmed.starts_with('[') {
            current = trimmed
                .trim_start_matches('[')
                .trim_end_matches(']')
                .trim()
                .to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = trimmed.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn parse_error(e: toml::de::Error) -> Error {
    invalid(e.to_string().trim_end().to_string())
}

/// Parses and validates a configuration. Errors carry line numbers.
pub fn parse_config(text: &str) -> Result<ExperimentConfig> {
    #[derive(Deserialize)]
    struct Header {
        experiment: String,
    }
    let header: Header = toml::from_str(text).map_err(parse_error)?;
    let kind: ExperimentKind = header.experiment.parse().map_err(|e: Error| {
        let line = locate(text, "experiment").unwrap_or(1);
        invalid(format!("line {line}: {}", strip(&e)))
    })?;
    let config = match kind {
        ExperimentKind::CoreEquidistributionN2 | ExperimentKind::CoreEquidistributionN3 => {
            ExperimentConfig::Equidistribution(toml::from_str(text).map_err(parse_error)?)
        }
        ExperimentKind::NondivergenceSweep => ExperimentConfig::Nondivergence(toml::from_str(text).map_err(parse_error)?),
        ExperimentKind::WInvariance => ExperimentConfig::WInvariance(toml::from_str(text).map_err(parse_error)?),
        ExperimentKind::TorusSweep => ExperimentConfig::Torus(toml::from_str(text).map_err(parse_error)?),
        ExperimentKind::RepVerification => ExperimentConfig::Rep(toml::from_str(text).map_err(parse_error)?),
        ExperimentKind::GoodFunction => ExperimentConfig::GoodFunction(toml::from_str(text).map_err(parse_error)?),
        ExperimentKind::DegeneratePicard => ExperimentConfig::Degenerate(toml::from_str(text).map_err(parse_error)?),
        ExperimentKind::HaarCalibration => ExperimentConfig::HaarCalibration(toml::from_str(text).map_err(parse_error)?),
    };
    config.check().map_err(|e| {
        let location = locate(text, &e.field)
            .or_else(|| e.field.split_once('.').and_then(|(s, _)| locate_section(text, s)))
            .map(|l| format!("line {l}: "))
            .unwrap_or_default();
        invalid(format!("{location}field `{}` {}", e.field, e.message))
    })?;
    Ok(config)
}

fn locate_section(text: &str, section: &str) -> Option<usize> {
    text.lines()
        .position(|l| l.trim() == format!("[{section}]"))
        .map(|i| i + 1)
}

fn strip(e: &Error) -> String {
    match e {
        Error::InvalidInput(m) => m.clone(),
        other => other.to_string(),
    }
}

pub fn load_config(path: &std::path::Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text).map_err(|e| invalid(format!("{}: {}", path.display(), strip(&e))))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_roundtrip_through_toml() {
        for kind in ExperimentKind::ALL {
            let config = ExperimentConfig::default_for(kind);
            config.validate().unwrap();
            let text = config.to_toml();
            let back = parse_config(&text).unwrap_or_else(|e| panic!("{kind}: {e}\n{text}"));
            assert_eq!(back, config);
        }
    }

    #[test]
    fn zero_count_names_the_field() {
        let text = ExperimentConfig::default_for(ExperimentKind::CoreEquidistributionN2)
            .to_toml()
            .replace("\ncount = 100000\n", "\ncount = 0\n");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("`count`"), "{err}");
        assert!(err.contains("line "), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected_with_a_line() {
        let text = "experiment = \"torus_sweep\"\nalpha = [1.0]\nm_max = 2\nbogus = 3\n[curve]\nkind = \"circle\"\n[tolerances]\nmax_coeff = 0.1\nfrom_alpha = 1.0\n";
        let err = parse_config(text).unwrap_err().to_string();
        assert!(err.contains("bogus") && err.contains("line 4"), "{err}");
    }

    #[test]
    fn unknown_experiment_is_rejected() {
        let err = parse_config("\n\nexperiment = \"warp_drive\"\n").unwrap_err().to_string();
        assert!(err.contains("line 3") && err.contains("warp_drive"), "{err}");
        assert!(parse_config("seed = 3\n").is_err());
    }

    #[test]
    fn nested_field_errors_point_at_the_section() {
        let text = ExperimentConfig::default_for(ExperimentKind::DegeneratePicard)
            .to_toml()
            .replace("height_cap = 50.0", "height_cap = 1.0");
        let err = parse_config(&text).unwrap_err().to_string();
        assert!(err.contains("haar.height_cap"), "{err}");
        let line = text.lines().position(|l| l.starts_with("height_cap")).unwrap() + 1;
        assert!(err.contains(&format!("line {line}:")), "{err}");
    }

    #[test]
    fn degree_declaration_is_checked() {
        let mut section = CurveSection::new([0.0, 1.0], vec![vec![0.0, 1.0, 2.0]]);
        section.degree = Some(2);
        assert!(section.build().is_ok());
        section.degree = Some(3);
        assert!(section.build().is_err());
    }
}
