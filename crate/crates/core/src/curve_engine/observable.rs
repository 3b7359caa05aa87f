use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::group::{hyperbolic_distance, UpperSpacePoint};
use crate::lattice::{HaarSampleSet, LatticeTag, QuotientPoint};

/// Haar mean of an observable with its Monte Carlo standard error.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ObservableKind {
    /// `(1 - (ln(h/center)/log_width)²)²` on its support.
    HeightBump { center: f64, log_width: f64 },
    /// Indicator of a coordinate box; `x2` bounds the imaginary part of the
    /// horizontal coordinate (Picard only).
    BoxIndicator {
        x: (f64, f64),
        x2: Option<(f64, f64)>,
        height: (f64, f64),
    },
    /// Distance bump around a base point, weighted by `(1 + ⟨dir, reference⟩)/2`.
    SmoothBump {
        center: UpperSpacePoint,
        radius: f64,
        reference: [f64; 3],
    },
    Constant { value: f64 },
}

/// A bounded test function on the unit tangent bundle of the quotient.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Observable {
    pub name: String,
    pub kind: ObservableKind,
    pub reference: Option<Reference>,
}

fn bump(x: f64) -> f64 {
    if x.abs() >= 1.0 {
        0.0
    } else {
        let b = 1.0 - x * x;
        b * b
    }
}

// max |d/dx (1-x²)²| on [-1, 1], attained at x = 1/√3
const BUMP_SLOPE: f64 = 1.539_600_717_839_002;

impl Observable {
    pub fn new(name: impl Into<String>, kind: ObservableKind) -> Self {
        Observable {
            name: name.into(),
            kind,
            reference: None,
        }
    }

    pub fn eval(&self, q: &QuotientPoint) -> f64 {
        let base = q.base();
        match &self.kind {
            ObservableKind::HeightBump { center, log_width } => {
                bump((base.height / center).ln() / log_width)
            }
            ObservableKind::BoxIndicator { x, x2, height } => {
                let z = base.horizontal;
                let inside = (x.0..x.1).contains(&z.re)
                    && (height.0..height.1).contains(&base.height)
                    && x2.is_none_or(|r| (r.0..r.1).contains(&z.im));
                if inside {
                    1.0
                } else {
                    0.0
                }
            }
            ObservableKind::SmoothBump {
                center,
                radius,
                reference,
            } => {
                let d = hyperbolic_distance(base, center);
                let v = q.frame().direction.as_vector();
                let dot: f64 = v.iter().zip(reference).map(|(a, b)| a * b).sum();
                bump(d / radius) * (1.0 + dot) / 2.0
            }
            ObservableKind::Constant { value } => *value,
        }
    }

    /// Lipschitz constant in the natural coordinate (log-height for height
    /// bumps, hyperbolic distance for smooth bumps); `None` for indicators.
    pub fn lipschitz(&self) -> Option<f64> {
        match &self.kind {
            ObservableKind::HeightBump { log_width, .. } => Some(BUMP_SLOPE / log_width),
            ObservableKind::SmoothBump { radius, .. } => Some(BUMP_SLOPE / radius + 0.5),
            ObservableKind::BoxIndicator { .. } => None,
            ObservableKind::Constant { .. } => Some(0.0),
        }
    }

    /// The constant value taken above `height`, when there is one.
    pub fn cusp_value(&self, height: f64) -> Option<f64> {
        match &self.kind {
            ObservableKind::HeightBump { center, log_width } => {
                (center * log_width.exp() <= height).then_some(0.0)
            }
            ObservableKind::BoxIndicator { height: h, .. } => (h.1 <= height).then_some(0.0),
            ObservableKind::SmoothBump { center, radius, .. } => {
                (center.height * radius.exp() <= height).then_some(0.0)
            }
            ObservableKind::Constant { value } => Some(*value),
        }
    }
}

/// Fills reference values from a Haar sample. The truncated cusp contributes
/// `tail_mass` times the observable's constant value above the cap.
pub fn calibrate(battery: &mut [Observable], haar: &HaarSampleSet) -> Result<()> {
    let n = haar.points.len();
    if n < 2 {
        return Err(invalid("Haar sample needs at least two points"));
    }
    for obs in battery.iter_mut() {
        let cusp = obs.cusp_value(haar.height_cap).ok_or_else(|| {
            invalid(format!(
                "observable {} is not constant above the height cap {}",
                obs.name, haar.height_cap
            ))
        })?;
        let (mut sum, mut sum2) = (0.0, 0.0);
        for p in &haar.points {
            let v = obs.eval(p);
            sum += v;
            sum2 += v * v;
        }
        let mean = sum / n as f64;
        let var = (sum2 / n as f64 - mean * mean).max(0.0) * n as f64 / (n - 1) as f64;
        let keep = 1.0 - haar.tail_mass;
        obs.reference = Some(Reference {
            value: keep * mean + haar.tail_mass * cusp,
            std_error: keep * (var / n as f64).sqrt(),
        });
    }
    Ok(())
}

fn upper(x: f64, y: f64, h: f64) -> UpperSpacePoint {
    UpperSpacePoint {
        horizontal: Complex64::new(x, y),
        height: h,
    }
}

/// The ten-observable battery: four height bumps, four coordinate boxes and
/// two direction-weighted bumps.
pub fn default_battery(lattice: LatticeTag) -> Vec<Observable> {
    let mut battery: Vec<Observable> = [1.2, 1.7, 2.5, 4.0]
        .iter()
        .map(|&c| {
            Observable::new(
                format!("height_bump_{c}"),
                ObservableKind::HeightBump {
                    center: c,
                    log_width: 0.3,
                },
            )
        })
        .collect();
    match lattice {
        LatticeTag::Modular => {
            for (i, (x, h)) in [
                ((-0.5, 0.0), (0.8, 1.25)),
                ((0.0, 0.5), (0.8, 1.25)),
                ((-0.5, 0.0), (1.25, 2.5)),
                ((0.0, 0.5), (1.25, 2.5)),
            ]
            .into_iter()
            .enumerate()
            {
                battery.push(Observable::new(
                    format!("box_{i}"),
                    ObservableKind::BoxIndicator {
                        x,
                        x2: None,
                        height: h,
                    },
                ));
            }
            battery.push(Observable::new(
                "direction_bump_horizontal",
                ObservableKind::SmoothBump {
                    center: upper(0.0, 0.0, 1.3),
                    radius: 0.8,
                    reference: [1.0, 0.0, 0.0],
                },
            ));
            battery.push(Observable::new(
                "direction_bump_vertical",
                ObservableKind::SmoothBump {
                    center: upper(-0.25, 0.0, 1.6),
                    radius: 0.8,
                    reference: [0.0, 0.0, 1.0],
                },
            ));
        }
        LatticeTag::Picard => {
            for (i, (x, x2, h)) in [
                ((-0.5, 0.0), (0.0, 0.5), (0.7, 1.0)),
                ((0.0, 0.5), (0.0, 0.5), (0.7, 1.0)),
                ((-0.5, 0.5), (0.0, 0.25), (1.0, 2.0)),
                ((-0.5, 0.5), (0.25, 0.5 + 1e-12), (1.0, 2.0)),
            ]
            .into_iter()
            .enumerate()
            {
                battery.push(Observable::new(
                    format!("box_{i}"),
                    ObservableKind::BoxIndicator {
                        x,
                        x2: Some(x2),
                        height: h,
                    },
                ));
            }
            battery.push(Observable::new(
                "direction_bump_horizontal",
                ObservableKind::SmoothBump {
                    center: upper(0.0, 0.25, 1.1),
                    radius: 0.8,
                    reference: [1.0, 0.0, 0.0],
                },
            ));
            battery.push(Observable::new(
                "direction_bump_vertical",
                ObservableKind::SmoothBump {
                    center: upper(-0.2, 0.2, 1.5),
                    radius: 0.8,
                    reference: [0.0, 0.0, 1.0],
                },
            ));
        }
    }
    battery
}
