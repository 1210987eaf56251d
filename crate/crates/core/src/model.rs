//! Core domain types: configurations of three unit masses in the plane,
//! the boundary families used by the free-boundary minimization, phase
//! states and discretized paths.

use crate::error::{Error, Result};
use nalgebra::Vector2;

pub type Vec2 = Vector2<f64>;

/// Positions of the three bodies with the center of mass at the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Configuration {
    q: [Vec2; 3],
}

impl Configuration {
    /// Builds a configuration from raw positions, recentring them so that
    /// the center of mass is the origin.
    pub fn new(q: [Vec2; 3]) -> Self {
        let com = (q[0] + q[1] + q[2]) / 3.0;
        Self {
            q: [q[0] - com, q[1] - com, q[2] - com],
        }
    }

    /// Wraps positions that are known to sum to zero (parameterized
    /// constructors are exact by formula).
    pub(crate) fn from_centered(q: [Vec2; 3]) -> Self {
        Self { q }
    }

    pub fn from_xy(xy: [[f64; 2]; 3]) -> Self {
        Self::new(xy.map(|p| Vec2::new(p[0], p[1])))
    }

    pub fn collision() -> Self {
        Self {
            q: [Vec2::zeros(); 3],
        }
    }

    pub fn positions(&self) -> &[Vec2; 3] {
        &self.q
    }

    pub fn position(&self, i: usize) -> Vec2 {
        self.q[i]
    }

    pub fn center_of_mass(&self) -> Vec2 {
        self.q[0] + self.q[1] + self.q[2]
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        (self.q[i] - self.q[j]).norm()
    }

    /// Smallest pairwise distance and the pair realizing it.
    pub fn min_distance(&self) -> (f64, usize, usize) {
        PAIRS
            .iter()
            .map(|&(i, j)| (self.distance(i, j), i, j))
            .fold((f64::INFINITY, 0, 1), |best, cur| {
                if cur.0 < best.0 {
                    cur
                } else {
                    best
                }
            })
    }

    /// Largest |y| coordinate over the three bodies.
    pub fn max_abs_y(&self) -> f64 {
        self.q.iter().map(|p| p.y.abs()).fold(0.0, f64::max)
    }

    /// Applies `f` to every body position. The result is recentred.
    pub fn map(&self, f: impl Fn(Vec2) -> Vec2) -> Self {
        Self::new(self.q.map(f))
    }

    /// Linear interpolation `(1 - s) self + s other`.
    pub fn lerp(&self, other: &Self, s: f64) -> Self {
        let mut q = [Vec2::zeros(); 3];
        for i in 0..3 {
            q[i] = self.q[i] * (1.0 - s) + other.q[i] * s;
        }
        Self { q }
    }
}

/// Unordered body pairs (i < j).
pub const PAIRS: [(usize, usize); 3] = [(0, 1), (0, 2), (1, 2)];

/// Boundary parameters `(a1, a2, b1, b2)` for the start family `Q_s1`
/// and the end family `Q_e1`. The admissible set requires `a1, a2 >= 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryParams {
    pub a1: f64,
    pub a2: f64,
    pub b1: f64,
    pub b2: f64,
}

impl BoundaryParams {
    pub fn new(a1: f64, a2: f64, b1: f64, b2: f64) -> Result<Self> {
        let p = Self { a1, a2, b1, b2 };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<()> {
        if !(self.a1 >= 0.0) || !(self.a2 >= 0.0) {
            return Err(Error::Constraint(format!(
                "a1 = {}, a2 = {} must both be nonnegative",
                self.a1, self.a2
            )));
        }
        Ok(())
    }
}

/// Collinear start configuration `((-2a1-a2, 0), (a1-a2, 0), (a1+2a2, 0))`.
///
/// `a1 = 0` is a binary collision of bodies 1 and 2, `a2 = 0` of bodies 2
/// and 3.
pub fn build_qs1(p: &BoundaryParams) -> Result<Configuration> {
    p.check()?;
    Ok(qs1_unchecked(p.a1, p.a2))
}

pub(crate) fn qs1_unchecked(a1: f64, a2: f64) -> Configuration {
    Configuration::from_centered([
        Vec2::new(-2.0 * a1 - a2, 0.0),
        Vec2::new(a1 - a2, 0.0),
        Vec2::new(a1 + 2.0 * a2, 0.0),
    ])
}

/// Isosceles end configuration `((0, -2b1), (-b2, b1), (b2, b1))`, symmetric
/// about the y-axis.
pub fn build_qe1(p: &BoundaryParams) -> Configuration {
    qe1(p.b1, p.b2)
}

pub(crate) fn qe1(b1: f64, b2: f64) -> Configuration {
    Configuration::from_centered([
        Vec2::new(0.0, -2.0 * b1),
        Vec2::new(-b2, b1),
        Vec2::new(b2, b1),
    ])
}

/// Start configuration `((-2a1, 0), (a1, c1), (a1, -c1))` of the auxiliary
/// family, symmetric about the x-axis.
pub fn build_qs3(a1: f64, c1: f64) -> Configuration {
    Configuration::from_centered([
        Vec2::new(-2.0 * a1, 0.0),
        Vec2::new(a1, c1),
        Vec2::new(a1, -c1),
    ])
}

/// Recovers `(a1, a2)` from a collinear configuration in `Q_s1`.
pub fn invert_qs1(c: &Configuration) -> (f64, f64) {
    let q = c.positions();
    ((q[1].x - q[0].x) / 3.0, (q[2].x - q[1].x) / 3.0)
}

/// Least-squares `(b1, b2)` for a configuration near `Q_e1`.
pub fn fit_qe1(c: &Configuration) -> (f64, f64) {
    let q = c.positions();
    let b1 = (-2.0 * q[0].y + q[1].y + q[2].y) / 6.0;
    let b2 = (q[2].x - q[1].x) / 2.0;
    (b1, b2)
}

/// Least-squares `(a1, c1)` for a configuration near `Q_s3`.
pub fn fit_qs3(c: &Configuration) -> (f64, f64) {
    let q = c.positions();
    let a1 = (-2.0 * q[0].x + q[1].x + q[2].x) / 6.0;
    let c1 = (q[1].y - q[2].y) / 2.0;
    (a1, c1)
}

/// Positions, velocities and time of the three bodies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseState {
    pub q: [Vec2; 3],
    pub v: [Vec2; 3],
    pub time: f64,
}

impl PhaseState {
    /// Builds a state with zero center of mass and zero total momentum by
    /// subtracting the means.
    pub fn new(q: [Vec2; 3], v: [Vec2; 3], time: f64) -> Self {
        let qc = (q[0] + q[1] + q[2]) / 3.0;
        let vc = (v[0] + v[1] + v[2]) / 3.0;
        Self {
            q: q.map(|p| p - qc),
            v: v.map(|p| p - vc),
            time,
        }
    }

    /// Wraps raw data without recentring (for diagnostics).
    pub fn raw(q: [Vec2; 3], v: [Vec2; 3], time: f64) -> Self {
        Self { q, v, time }
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::from_centered(self.q)
    }

    pub fn translated(&self, shift: Vec2) -> Self {
        Self::raw(self.q.map(|p| p + shift), self.v, self.time)
    }

    /// The state with all velocities reversed (time-reversal image).
    pub fn time_reversed(&self) -> Self {
        Self::raw(self.q, self.v.map(|v| -v), self.time)
    }

    pub fn at_time(&self, time: f64) -> Self {
        Self { time, ..*self }
    }

    pub fn to_array(&self) -> [f64; 12] {
        let mut y = [0.0; 12];
        for i in 0..3 {
            y[2 * i] = self.q[i].x;
            y[2 * i + 1] = self.q[i].y;
            y[6 + 2 * i] = self.v[i].x;
            y[6 + 2 * i + 1] = self.v[i].y;
        }
        y
    }

    pub fn from_array(y: &[f64; 12], time: f64) -> Self {
        let mut q = [Vec2::zeros(); 3];
        let mut v = [Vec2::zeros(); 3];
        for i in 0..3 {
            q[i] = Vec2::new(y[2 * i], y[2 * i + 1]);
            v[i] = Vec2::new(y[6 + 2 * i], y[6 + 2 * i + 1]);
        }
        Self { q, v, time }
    }

    /// Max-norm distance between the position/velocity data of two states.
    pub fn max_deviation(&self, other: &Self) -> f64 {
        let a = self.to_array();
        let b = other.to_array();
        a.iter()
            .zip(b.iter())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    }
}

/// `(Σ q_i, Σ v_i)` for a phase state.
pub fn com_and_momentum(s: &PhaseState) -> (Vec2, Vec2) {
    (s.q[0] + s.q[1] + s.q[2], s.v[0] + s.v[1] + s.v[2])
}

/// Nodes of a piecewise-linear path on a strictly increasing grid from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscretePath {
    times: Vec<f64>,
    nodes: Vec<Configuration>,
}

impl DiscretePath {
    pub fn new(times: Vec<f64>, nodes: Vec<Configuration>) -> Result<Self> {
        if times.len() != nodes.len() {
            return Err(Error::InvalidPath(format!(
                "{} times but {} nodes",
                times.len(),
                nodes.len()
            )));
        }
        if times.len() < 3 {
            return Err(Error::InvalidPath(
                "at least two segments are required".into(),
            ));
        }
        if times[0] != 0.0 || *times.last().unwrap() != 1.0 {
            return Err(Error::InvalidPath("grid must start at 0 and end at 1".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidPath("grid must be strictly increasing".into()));
        }
        Ok(Self { times, nodes })
    }

    /// Samples `f` on the given grid.
    pub fn from_fn(times: Vec<f64>, f: impl Fn(f64) -> Configuration) -> Result<Self> {
        let nodes = times.iter().map(|&t| f(t)).collect();
        Self::new(times, nodes)
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn nodes(&self) -> &[Configuration] {
        &self.nodes
    }

    /// Number of segments.
    pub fn segments(&self) -> usize {
        self.times.len() - 1
    }

    pub fn start(&self) -> &Configuration {
        &self.nodes[0]
    }

    pub fn end(&self) -> &Configuration {
        self.nodes.last().unwrap()
    }

    /// Evaluates the piecewise-linear interpolant at `t` in [0, 1].
    pub fn eval(&self, t: f64) -> Configuration {
        let t = t.clamp(0.0, 1.0);
        let k = match self
            .times
            .binary_search_by(|x| x.partial_cmp(&t).unwrap())
        {
            Ok(k) => return self.nodes[k],
            Err(k) => k.clamp(1, self.times.len() - 1) - 1,
        };
        let s = (t - self.times[k]) / (self.times[k + 1] - self.times[k]);
        self.nodes[k].lerp(&self.nodes[k + 1], s)
    }

    /// Resamples the interpolant onto another grid.
    pub fn resample(&self, times: Vec<f64>) -> Result<Self> {
        Self::from_fn(times, |t| self.eval(t))
    }

    pub fn map_nodes(&self, f: impl Fn(&Configuration) -> Configuration) -> Self {
        Self {
            times: self.times.clone(),
            nodes: self.nodes.iter().map(f).collect(),
        }
    }

    /// Reverses time: node k moves to node N - k on the reflected grid.
    pub fn reversed(&self) -> Self {
        let times = self.times.iter().rev().map(|t| 1.0 - t).collect::<Vec<_>>();
        let mut times = times;
        times[0] = 0.0;
        *times.last_mut().unwrap() = 1.0;
        Self {
            times,
            nodes: self.nodes.iter().rev().copied().collect(),
        }
    }
}

/// Uniform grid with `n` segments.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    graded_grid(n, 1.0)
}

/// Grid `t_k = (k / n)^exponent`, concentrating nodes near t = 0 when
/// `exponent > 1`.
pub fn graded_grid(n: usize, exponent: f64) -> Vec<f64> {
    let mut t: Vec<f64> = (0..=n)
        .map(|k| (k as f64 / n as f64).powf(exponent))
        .collect();
    t[0] = 0.0;
    t[n] = 1.0;
    t
}
