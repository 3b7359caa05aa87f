//! Fundamental-domain reduction and Haar-measure sampling for the modular
//! group `PSL(2,Z)` acting on `H²` and the Picard group `PSL(2,Z[i])` acting on
//! `H³`.

use std::f64::consts::PI;
use std::fmt;
use std::io::Write;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::group::{
    frame_coordinates, frame_element, Direction, FrameCoordinate, GroupElement, Model,
    UpperSpacePoint,
};
use crate::seeding::{chunks, stream_rng};

/// Maximum number of generator applications before giving up.
pub const MAX_REDUCTION_STEPS: usize = 10_000;

/// Slack for the `|z|² + h² = 1` boundary face.
const SPHERE_EPS: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LatticeTag {
    Modular,
    Picard,
}

impl LatticeTag {
    pub fn model(self) -> Model {
        match self {
            LatticeTag::Modular => Model::Real,
            LatticeTag::Picard => Model::Complex,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LatticeTag::Modular => "modular",
            LatticeTag::Picard => "picard",
        }
    }
}

impl fmt::Display for LatticeTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Generators used by the reduction algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Generator {
    /// `z ↦ z + a + b·i`; `T^a` in the modular group.
    Shift(i32, i32),
    /// `S: z ↦ -1/z`, i.e. `(z, h) ↦ (-z̄, h) / (|z|² + h²)`.
    Invert,
    /// `diag(i, -i): z ↦ -z`, the order-two unit of `Z[i]`.
    Flip,
}

impl Generator {
    pub fn element(self, model: Model) -> GroupElement {
        let c = Complex64::new;
        let entries = match self {
            Generator::Shift(a, b) => [[c(1.0, 0.0), c(a as f64, b as f64)], [c(0.0, 0.0), c(1.0, 0.0)]],
            Generator::Invert => [[c(0.0, 0.0), c(-1.0, 0.0)], [c(1.0, 0.0), c(0.0, 0.0)]],
            Generator::Flip => [[c(0.0, 1.0), c(0.0, 0.0)], [c(0.0, 0.0), c(0.0, -1.0)]],
        };
        if model == Model::Real {
            assert!(
                matches!(self, Generator::Invert | Generator::Shift(_, 0)),
                "generator {self} is not in the real model"
            );
        }
        GroupElement::raw(model, entries).renormalized()
    }
}

impl fmt::Display for Generator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Generator::Shift(a, 0) => write!(f, "T^{a}"),
            Generator::Shift(a, b) => write!(f, "T^({a}{b:+}i)"),
            Generator::Invert => f.write_str("S"),
            Generator::Flip => f.write_str("R"),
        }
    }
}

/// A sequence of generators; the first entry is applied first.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Word(Vec<Generator>);

impl Word {
    pub fn new(generators: Vec<Generator>) -> Self {
        Word(generators)
    }

    pub fn generators(&self) -> &[Generator] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The lattice element `γ = g_k ⋯ g_1`.
    pub fn element(&self, model: Model) -> GroupElement {
        self.0
            .iter()
            .fold(GroupElement::identity(model), |acc, g| g.element(model) * acc)
    }

    /// Replays the word generator by generator on a frame.
    pub fn apply(&self, frame: &FrameCoordinate) -> FrameCoordinate {
        let model = frame.model();
        let g = self
            .0
            .iter()
            .fold(frame_element(frame), |acc, gen| gen.element(model) * acc);
        frame_coordinates(&g)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, g) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{g}")?;
        }
        f.write_str("]")
    }
}

/// A point of the unit tangent bundle of `Γ\H^n` in fundamental-domain
/// coordinates, together with the word that reduced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuotientPoint {
    lattice: LatticeTag,
    frame: FrameCoordinate,
    word: Word,
}

impl QuotientPoint {
    pub fn lattice(&self) -> LatticeTag {
        self.lattice
    }

    pub fn frame(&self) -> &FrameCoordinate {
        &self.frame
    }

    pub fn base(&self) -> &UpperSpacePoint {
        &self.frame.base
    }

    pub fn word(&self) -> &Word {
        &self.word
    }

    /// Drops the reducing word, keeping only the reduced frame.
    pub fn without_word(self) -> Self {
        QuotientPoint {
            word: Word::default(),
            ..self
        }
    }

    /// A point known to be reduced already (used for sampled points).
    pub(crate) fn reduced(lattice: LatticeTag, frame: FrameCoordinate) -> Self {
        QuotientPoint {
            lattice,
            frame,
            word: Word::default(),
        }
    }
}

/// Whether a base point satisfies the fundamental-domain inequalities,
/// including the tie-break conventions.
pub fn in_fundamental_domain(lattice: LatticeTag, base: &UpperSpacePoint) -> bool {
    let z = base.horizontal;
    let r2 = z.norm_sqr() + base.height * base.height;
    let half_open = (-0.5..0.5).contains(&z.re);
    let outside = r2 >= 1.0 - SPHERE_EPS && (r2 >= 1.0 + SPHERE_EPS || z.re <= 0.0);
    match lattice {
        LatticeTag::Modular => half_open && z.im == 0.0 && outside,
        LatticeTag::Picard => half_open && (0.0..=0.5).contains(&z.im) && outside,
    }
}

fn next_generator(lattice: LatticeTag, base: &UpperSpacePoint) -> Option<Generator> {
    let z = base.horizontal;
    let shift_re = (z.re + 0.5).floor();
    let shift_im = match lattice {
        LatticeTag::Modular => 0.0,
        LatticeTag::Picard => (z.im + 0.5).floor(),
    };
    if shift_re != 0.0 || shift_im != 0.0 {
        return Some(Generator::Shift(-shift_re as i32, -shift_im as i32));
    }
    if lattice == LatticeTag::Picard && z.im < 0.0 {
        return Some(Generator::Flip);
    }
    let r2 = z.norm_sqr() + base.height * base.height;
    if r2 < 1.0 - SPHERE_EPS || (r2 < 1.0 + SPHERE_EPS && z.re > 0.0) {
        return Some(Generator::Invert);
    }
    None
}

/// Reduces the coset `Γg` to the fundamental domain, acting on the element
/// so that the direction is carried along with the base point.
pub fn reduce_element(lattice: LatticeTag, g: &GroupElement) -> Result<QuotientPoint> {
    let model = lattice.model();
    if g.model() != model {
        return Err(invalid(format!(
            "{lattice} lattice needs the {model:?} model, got {:?}",
            g.model()
        )));
    }
    let mut current = *g;
    let mut word = Vec::new();
    for _ in 0..MAX_REDUCTION_STEPS {
        let base = current.act(&UpperSpacePoint::origin());
        if !base.height.is_finite() || !(base.height > 0.0) {
            return Err(Error::ReductionDiverged { steps: word.len() });
        }
        match next_generator(lattice, &base) {
            Some(gen) => {
                current = gen.element(model) * current;
                word.push(gen);
            }
            None => {
                return Ok(QuotientPoint {
                    lattice,
                    frame: frame_coordinates(&current),
                    word: Word(word),
                })
            }
        }
    }
    Err(Error::ReductionDiverged {
        steps: MAX_REDUCTION_STEPS,
    })
}

/// Reduces a frame to the fundamental domain of `lattice`.
pub fn reduce(lattice: LatticeTag, frame: &FrameCoordinate) -> Result<QuotientPoint> {
    if frame.model() != lattice.model() {
        return Err(invalid("frame model does not match the lattice"));
    }
    reduce_element(lattice, &frame_element(frame))
}

/// Height of the reduced base point; sublevel sets are compact.
pub fn height(q: &QuotientPoint) -> f64 {
    q.frame.base.height
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub(crate) fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * p - pm) / (x * x - 1.0);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// Composite Gauss–Legendre rule on `[a, b]`.
pub(crate) fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let (x, w) = gauss_legendre(10);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|p| {
            let mid = a + (p as f64 + 0.5) * h;
            x.iter()
                .zip(&w)
                .map(|(xi, wi)| wi * f(mid + xi * h / 2.0))
                .sum::<f64>()
                * h
                / 2.0
        })
        .sum()
}

/// Hyperbolic volume of the fundamental domain of the base manifold.
pub fn covolume(lattice: LatticeTag) -> f64 {
    match lattice {
        // ∬ dx dy / y² over |x| ≤ 1/2, y ≥ √(1-x²)
        LatticeTag::Modular => integrate(|x| 1.0 / (1.0 - x * x).sqrt(), -0.5, 0.5, 16),
        // ∭ dx dy dt / t³ over the Picard domain; the t-integral is 1/(2(1-|z|²))
        LatticeTag::Picard => integrate(
            |x| integrate(|y| 0.5 / (1.0 - x * x - y * y), 0.0, 0.5, 8),
            -0.5,
            0.5,
            16,
        ),
    }
}

/// Haar mass of the cusp region above `height_cap`.
pub fn tail_mass(lattice: LatticeTag, height_cap: f64) -> f64 {
    match lattice {
        LatticeTag::Modular => 1.0 / (height_cap * covolume(lattice)),
        // cusp cross-section has area 1/2
        LatticeTag::Picard => 0.5 / (2.0 * height_cap * height_cap * covolume(lattice)),
    }
}

/// Haar-distributed points below a height cap, plus the analytic mass of the
/// truncated cusp.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarSampleSet {
    pub lattice: LatticeTag,
    pub points: Vec<QuotientPoint>,
    pub seed: u64,
    pub height_cap: f64,
    pub tail_mass: f64,
}

fn sample_one<R: Rng>(lattice: LatticeTag, cap: f64, rng: &mut R) -> FrameCoordinate {
    loop {
        match lattice {
            LatticeTag::Modular => {
                // 1/y is uniform for the density dy/y²
                let lo = 1.0 / cap;
                let hi = 2.0 / 3f64.sqrt();
                let y = 1.0 / rng.random_range(lo..hi);
                let x = rng.random_range(-0.5..0.5);
                if x * x + y * y < 1.0 {
                    continue;
                }
                let theta = rng.random_range(0.0..2.0 * PI);
                return FrameCoordinate {
                    base: UpperSpacePoint {
                        horizontal: Complex64::new(x, 0.0),
                        height: y,
                    },
                    direction: Direction::Angle(theta),
                };
            }
            LatticeTag::Picard => {
                // 1/t² is uniform for the density dt/t³
                let lo = 1.0 / (cap * cap);
                let t = 1.0 / rng.random_range(lo..2.0).sqrt();
                let x = rng.random_range(-0.5..0.5);
                let y = rng.random_range(0.0..=0.5);
                if x * x + y * y + t * t < 1.0 {
                    continue;
                }
                let v: [f64; 3] = [
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                    StandardNormal.sample(rng),
                ];
                let n = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
                return FrameCoordinate {
                    base: UpperSpacePoint {
                        horizontal: Complex64::new(x, y),
                        height: t,
                    },
                    direction: Direction::Vector([v[0] / n, v[1] / n, v[2] / n]),
                };
            }
        }
    }
}

/// Rejection sampler for the normalized Haar measure restricted to heights
/// below `height_cap`, with uniform independent directions.
pub fn haar_sample(
    lattice: LatticeTag,
    count: usize,
    seed: u64,
    height_cap: f64,
) -> Result<HaarSampleSet> {
    if !(height_cap >= 2.0) || !height_cap.is_finite() {
        return Err(invalid(format!("height_cap must be at least 2, got {height_cap}")));
    }
    let points = chunks(count)
        .into_par_iter()
        .map(|(stream, _, len)| {
            let mut rng = stream_rng(seed, stream);
            (0..len)
                .map(|_| QuotientPoint::reduced(lattice, sample_one(lattice, height_cap, &mut rng)))
                .collect::<Vec<_>>()
        })
        .flatten()
        .collect();
    Ok(HaarSampleSet {
        lattice,
        points,
        seed,
        height_cap,
        tail_mass: tail_mass(lattice, height_cap),
    })
}

/// CSV columns for frames of the given lattice.
pub(crate) fn frame_header(lattice: LatticeTag) -> Vec<&'static str> {
    match lattice {
        LatticeTag::Modular => vec!["x", "y", "height", "theta"],
        LatticeTag::Picard => vec!["x", "x2", "height", "dir_x", "dir_y", "dir_z"],
    }
}

pub(crate) fn frame_fields(frame: &FrameCoordinate) -> Vec<String> {
    let b = frame.base;
    match frame.direction {
        Direction::Angle(theta) => vec![
            b.horizontal.re.to_string(),
            b.height.to_string(),
            b.height.to_string(),
            theta.to_string(),
        ],
        Direction::Vector(v) => vec![
            b.horizontal.re.to_string(),
            b.horizontal.im.to_string(),
            b.height.to_string(),
            v[0].to_string(),
            v[1].to_string(),
            v[2].to_string(),
        ],
    }
}

impl HaarSampleSet {
    /// Writes one row per point with weight `(1 - tail_mass) / count`.
    pub fn write_csv<W: Write>(&self, out: W) -> std::io::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = frame_header(self.lattice);
        header.push("weight");
        w.write_record(&header)?;
        let weight = if self.points.is_empty() {
            0.0
        } else {
            (1.0 - self.tail_mass) / self.points.len() as f64
        };
        for p in &self.points {
            let mut row = frame_fields(&p.frame);
            row.push(weight.to_string());
            w.write_record(&row)?;
        }
        w.flush()
    }
}
