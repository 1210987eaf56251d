//! Discretized Lagrangian action of a piecewise-linear path and its exact
//! gradient with respect to the free degrees of freedom.
//!
//! The kinetic term is integrated exactly along each linear segment. The
//! potential term uses the two-point Gauss-Legendre rule per segment, so it
//! never touches the nodes themselves and a collision at t = 0 or t = 1
//! still gives a finite action.

use crate::error::{Error, Result};
use crate::model::{Configuration, DiscretePath, Vec2, PAIRS};
use crate::quad::GAUSS2;

/// Gauss-point distances below this raise a collision error.
pub const R_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ActionBreakdown {
    pub kinetic: f64,
    pub potential: f64,
    pub total: f64,
}

impl ActionBreakdown {
    pub fn new(kinetic: f64, potential: f64) -> Self {
        Self {
            kinetic,
            potential,
            total: kinetic + potential,
        }
    }
}

/// Newtonian potential `Σ_{i<j} 1 / r_ij` (positive convention).
pub fn potential(c: &Configuration) -> Result<f64> {
    potential_with_floor(c, 0.0)
}

pub(crate) fn potential_with_floor(c: &Configuration, floor: f64) -> Result<f64> {
    let mut u = 0.0;
    for (i, j) in PAIRS {
        let r = c.distance(i, j);
        if !(r > floor) {
            return Err(Error::Collision { i, j, distance: r });
        }
        u += 1.0 / r;
    }
    Ok(u)
}

/// `∂U/∂q_i = Σ_{j≠i} (q_j - q_i) / r_ij³`, which is also the Newtonian
/// acceleration of body i. Callers check for collisions.
pub(crate) fn potential_gradient(c: &Configuration) -> [Vec2; 3] {
    let q = c.positions();
    let mut g = [Vec2::zeros(); 3];
    for (i, j) in PAIRS {
        let d = q[j] - q[i];
        let r2 = d.norm_squared();
        let f = d / (r2 * r2.sqrt());
        g[i] += f;
        g[j] -= f;
    }
    g
}

/// Kinetic energy `½ Σ |v_i|²` for unit masses.
pub fn kinetic(v: &[Vec2; 3]) -> f64 {
    0.5 * v.iter().map(|v| v.norm_squared()).sum::<f64>()
}

fn segment_kinetic(a: &Configuration, b: &Configuration, dt: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..3 {
        s += (b.position(i) - a.position(i)).norm_squared();
    }
    0.5 * s / dt
}

/// Per-segment kinetic and potential contributions.
pub fn segment_breakdown(p: &DiscretePath) -> Result<Vec<ActionBreakdown>> {
    let t = p.times();
    let n = p.nodes();
    let (xs, ws) = GAUSS2;
    (0..p.segments())
        .map(|k| {
            let dt = t[k + 1] - t[k];
            let kin = segment_kinetic(&n[k], &n[k + 1], dt);
            let mut pot = 0.0;
            for (x, w) in xs.iter().zip(ws.iter()) {
                pot += w * potential_with_floor(&n[k].lerp(&n[k + 1], *x), R_FLOOR)?;
            }
            Ok(ActionBreakdown::new(kin, pot * dt))
        })
        .collect()
}

/// Discrete action of the piecewise-linear path.
pub fn discrete_action(p: &DiscretePath) -> Result<ActionBreakdown> {
    let (k, u) = segment_breakdown(p)?
        .iter()
        .fold((0.0, 0.0), |(k, u), s| (k + s.kinetic, u + s.potential));
    Ok(ActionBreakdown::new(k, u))
}

/// Configurations at the two Gauss points of every segment, in order.
pub fn gauss_points(p: &DiscretePath) -> Vec<Configuration> {
    let n = p.nodes();
    (0..p.segments())
        .flat_map(|k| GAUSS2.0.map(|x| n[k].lerp(&n[k + 1], x)))
        .collect()
}

/// Smallest pairwise distance over all Gauss points.
pub fn min_gauss_distance(p: &DiscretePath) -> f64 {
    gauss_points(p)
        .iter()
        .map(|c| c.min_distance().0)
        .fold(f64::INFINITY, f64::min)
}

/// Which boundary degrees of freedom are free.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryMode {
    /// Both end configurations held fixed.
    Fixed,
    /// Start in `Q_s1(a1, a2)`, end in `Q_e1(b1, b2)`.
    Qs1Qe1,
    /// Start in `Q_s3(a1, c1)`, end in `Q_e3(b1, b2)` (same matrix as `Q_e1`).
    Qs3Qe3,
}

type Basis = Vec<[Vec2; 3]>;

impl BoundaryMode {
    /// Derivatives of the start configuration with respect to each start
    /// parameter.
    pub fn start_basis(&self) -> Basis {
        let v = |x: f64, y: f64| Vec2::new(x, y);
        match self {
            BoundaryMode::Fixed => vec![],
            BoundaryMode::Qs1Qe1 => vec![
                [v(-2.0, 0.0), v(1.0, 0.0), v(1.0, 0.0)],
                [v(-1.0, 0.0), v(-1.0, 0.0), v(2.0, 0.0)],
            ],
            BoundaryMode::Qs3Qe3 => vec![
                [v(-2.0, 0.0), v(1.0, 0.0), v(1.0, 0.0)],
                [v(0.0, 0.0), v(0.0, 1.0), v(0.0, -1.0)],
            ],
        }
    }

    /// Derivatives of the end configuration with respect to `(b1, b2)`.
    pub fn end_basis(&self) -> Basis {
        let v = |x: f64, y: f64| Vec2::new(x, y);
        match self {
            BoundaryMode::Fixed => vec![],
            _ => vec![
                [v(0.0, -2.0), v(0.0, 1.0), v(0.0, 1.0)],
                [v(0.0, 0.0), v(-1.0, 0.0), v(1.0, 0.0)],
            ],
        }
    }

    /// Start configuration from its parameters.
    pub fn start_config(&self, params: &[f64]) -> Configuration {
        combine(&self.start_basis(), params)
    }

    pub fn end_config(&self, params: &[f64]) -> Configuration {
        combine(&self.end_basis(), params)
    }
}

fn combine(basis: &Basis, params: &[f64]) -> Configuration {
    let mut q = [Vec2::zeros(); 3];
    for (b, p) in basis.iter().zip(params) {
        for i in 0..3 {
            q[i] += b[i] * *p;
        }
    }
    Configuration::from_centered(q)
}

/// Gradient of the discrete action with respect to the free degrees of
/// freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionGradient {
    /// Interior nodes 1..N-1, projected onto the zero-mean subspace.
    pub nodes: Vec<[Vec2; 3]>,
    /// `∂A/∂(a1, a2)` for `Q_s1` or `∂A/∂(a1, c1)` for `Q_s3`; empty when fixed.
    pub start: Vec<f64>,
    /// `∂A/∂(b1, b2)`; empty when fixed.
    pub end: Vec<f64>,
}

impl ActionGradient {
    /// Flat layout: interior nodes (body-major, x then y), then start and end
    /// parameters.
    pub fn to_flat(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nodes.len() * 6 + 4);
        for node in &self.nodes {
            for v in node {
                out.push(v.x);
                out.push(v.y);
            }
        }
        out.extend_from_slice(&self.start);
        out.extend_from_slice(&self.end);
        out
    }

    pub fn inf_norm(&self) -> f64 {
        self.to_flat().iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Unprojected `∂A/∂q_i(t_k)` for every node including the boundary ones.
pub fn node_gradient(p: &DiscretePath) -> Result<Vec<[Vec2; 3]>> {
    let t = p.times();
    let n = p.nodes();
    let (xs, ws) = GAUSS2;
    let mut g = vec![[Vec2::zeros(); 3]; n.len()];
    for k in 0..p.segments() {
        let dt = t[k + 1] - t[k];
        for i in 0..3 {
            let d = (n[k + 1].position(i) - n[k].position(i)) / dt;
            g[k + 1][i] += d;
            g[k][i] -= d;
        }
        for (x, w) in xs.iter().zip(ws.iter()) {
            let c = n[k].lerp(&n[k + 1], *x);
            let (r, i, j) = c.min_distance();
            if !(r > R_FLOOR) {
                return Err(Error::Collision { i, j, distance: r });
            }
            let du = potential_gradient(&c);
            for b in 0..3 {
                g[k][b] += du[b] * (w * dt * (1.0 - x));
                g[k + 1][b] += du[b] * (w * dt * x);
            }
        }
    }
    Ok(g)
}

fn project_zero_mean(v: [Vec2; 3]) -> [Vec2; 3] {
    let m = (v[0] + v[1] + v[2]) / 3.0;
    v.map(|x| x - m)
}

fn dot_basis(g: &[Vec2; 3], basis: &Basis) -> Vec<f64> {
    basis
        .iter()
        .map(|b| (0..3).map(|i| g[i].dot(&b[i])).sum())
        .collect()
}

/// Gradient of [`discrete_action`] with respect to the free degrees of
/// freedom of `mode`.
pub fn action_gradient(p: &DiscretePath, mode: BoundaryMode) -> Result<ActionGradient> {
    let g = node_gradient(p)?;
    let last = g.len() - 1;
    Ok(ActionGradient {
        nodes: g[1..last].iter().map(|v| project_zero_mean(*v)).collect(),
        start: dot_basis(&g[0], &mode.start_basis()),
        end: dot_basis(&g[last], &mode.end_basis()),
    })
}
