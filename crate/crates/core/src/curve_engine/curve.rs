use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{diagonal, GroupElement, Model};

/// Threshold below which `|φ'(s)|` counts as zero.
pub const DERIVATIVE_EPS: f64 = 1e-12;

fn horner(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * s + c)
}

fn formal_derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(k, c)| k as f64 * c)
        .collect()
}

fn degree(coeffs: &[f64]) -> usize {
    coeffs.iter().rposition(|c| *c != 0.0).unwrap_or(0)
}

/// Lower-triangular factor `ζ(s) = [[λ(s), 0], [μ(s), 1/λ(s)]]` with
/// polynomial `λ` and `μ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZetaPart {
    pub diagonal: Vec<f64>,
    pub lower: Vec<f64>,
}

/// A polynomial curve `φ: [a, b] → R^{n-1}`, optionally carrying a lower
/// triangular factor so that the full curve is `θ(s) = ζ(s)·u(φ(s))`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticCurve {
    id: String,
    interval: (f64, f64),
    coeffs: Vec<Vec<f64>>,
    derivative: Vec<Vec<f64>>,
    zeta: Option<ZetaPart>,
    constant: bool,
}

impl AnalyticCurve {
    /// `coeffs[i]` holds the ascending-power coefficients of coordinate `i`;
    /// one coordinate for the real model, two for the complex one.
    pub fn new(interval: (f64, f64), coeffs: Vec<Vec<f64>>) -> Result<Self> {
        let curve = Self::build(interval, coeffs, false)?;
        if curve.coeffs.iter().all(|c| degree(c) == 0) {
            return Err(invalid(
                "constant curve; use AnalyticCurve::constant to flag it explicitly",
            ));
        }
        Ok(curve)
    }

    /// A curve allowed to be constant (degree 0 in every coordinate).
    pub fn constant(interval: (f64, f64), value: &[f64]) -> Result<Self> {
        Self::build(interval, value.iter().map(|v| vec![*v]).collect(), true)
    }

    fn build(interval: (f64, f64), coeffs: Vec<Vec<f64>>, constant: bool) -> Result<Self> {
        let (a, b) = interval;
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(invalid(format!("interval [{a}, {b}] must satisfy a < b")));
        }
        if !(1..=2).contains(&coeffs.len()) {
            return Err(invalid(format!(
                "curve must have 1 or 2 coordinates, got {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| c.is_empty() || c.iter().any(|v| !v.is_finite())) {
            return Err(invalid("coefficients must be finite and nonempty"));
        }
        let derivative = coeffs.iter().map(|c| formal_derivative(c)).collect();
        let id = coeffs
            .iter()
            .map(|c| {
                c.iter()
                    .map(|v| v.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            })
            .collect::<Vec<_>>()
            .join(";");
        Ok(AnalyticCurve {
            id: format!("poly[{id}]@[{a},{b}]"),
            interval,
            coeffs,
            derivative,
            zeta: None,
            constant,
        })
    }

    pub fn with_zeta(mut self, zeta: ZetaPart) -> Result<Self> {
        if zeta.diagonal.is_empty() || zeta.lower.is_empty() {
            return Err(invalid("zeta polynomials must be nonempty"));
        }
        let (a, b) = self.interval;
        let n = 64;
        for k in 0..=n {
            let s = a + (b - a) * k as f64 / n as f64;
            if horner(&zeta.diagonal, s).abs() < 1e-9 {
                return Err(invalid("zeta diagonal polynomial vanishes on the interval"));
            }
        }
        self.id = format!("{}*zeta", self.id);
        self.zeta = Some(zeta);
        Ok(self)
    }

    pub fn with_id(mut self, id: impl Into<String>) -> Self {
        self.id = id.into();
        self
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn coeffs(&self) -> &[Vec<f64>] {
        &self.coeffs
    }

    pub fn derivative_coeffs(&self) -> &[Vec<f64>] {
        &self.derivative
    }

    pub fn is_constant(&self) -> bool {
        self.constant
    }

    pub fn zeta(&self) -> Option<&ZetaPart> {
        self.zeta.as_ref()
    }

    pub fn model(&self) -> Model {
        if self.coeffs.len() == 1 {
            Model::Real
        } else {
            Model::Complex
        }
    }

    fn check(&self, s: f64) -> Result<()> {
        let (a, b) = self.interval;
        if !(a..=b).contains(&s) {
            return Err(invalid(format!("s = {s} outside [{a}, {b}]")));
        }
        Ok(())
    }

    fn as_point(v: &[f64]) -> Complex64 {
        Complex64::new(v[0], v.get(1).copied().unwrap_or(0.0))
    }

    /// `φ(s)` by Horner evaluation.
    pub fn eval(&self, s: f64) -> Result<Vec<f64>> {
        self.check(s)?;
        Ok(self.coeffs.iter().map(|c| horner(c, s)).collect())
    }

    /// `φ'(s)` from the formal derivative.
    pub fn eval_derivative(&self, s: f64) -> Result<Vec<f64>> {
        self.check(s)?;
        Ok(self
            .derivative
            .iter()
            .map(|c| if c.is_empty() { 0.0 } else { horner(c, s) })
            .collect())
    }

    pub(crate) fn point(&self, s: f64) -> Result<Complex64> {
        self.eval(s).map(|v| Self::as_point(&v))
    }

    pub(crate) fn tangent(&self, s: f64) -> Result<Complex64> {
        self.eval_derivative(s).map(|v| Self::as_point(&v))
    }

    pub(crate) fn zeta_element(&self, model: Model, s: f64) -> Option<GroupElement> {
        self.zeta.as_ref().map(|z| {
            let l = Complex64::new(horner(&z.diagonal, s), 0.0);
            let m = Complex64::new(horner(&z.lower, s), 0.0);
            let zero = Complex64::new(0.0, 0.0);
            GroupElement::raw(model, [[l, zero], [m, l.inv()]])
        })
    }
}

/// The default nonzero direction `w0`: `1` resp. `(1, 0)`.
pub fn default_w0() -> Complex64 {
    Complex64::new(1.0, 0.0)
}

/// An element `z ∈ MA` with `z·φ'(s) = w0` for the action `u(z·v) = z u(v) z⁻¹`.
///
/// In `PSL(2,R)` the group `M` is trivial and `A` only rescales, so for
/// `φ'(s) < 0` the result maps `φ'(s)` to `-w0`; both lie on the same
/// one-parameter subgroup `W`.
pub fn normalizer_z(c: &AnalyticCurve, s: f64, w0: Complex64) -> Result<GroupElement> {
    let tangent = c.tangent(s)?;
    if tangent.norm() < DERIVATIVE_EPS {
        return Err(Error::DerivativeVanishes { s });
    }
    if w0.norm() == 0.0 || !w0.re.is_finite() || !w0.im.is_finite() {
        return Err(invalid("w0 must be nonzero and finite"));
    }
    let ratio = w0 / tangent;
    let model = c.model();
    let lambda = match model {
        Model::Real => Complex64::new(ratio.norm().sqrt(), 0.0),
        Model::Complex => ratio.sqrt(),
    };
    Ok(diagonal(model, lambda))
}
