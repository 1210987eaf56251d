//! Closed-form action values: the Kepler minimum action, the total-collision
//! lower bounds, the Lagrange circular orbit and the explicit collinear test
//! path with its action.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::model::{Configuration, DiscretePath, PhaseState, Vec2};
use crate::quad::adaptive;

/// Minimum action `(3/2) π^{2/3} λ^{2/3}` of a collision-ejection Kepler
/// path with coupling constant `λ` over unit time.
pub fn kepler_min_action(lambda: f64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Kepler coupling must be nonnegative, got {lambda}"
        )));
    }
    Ok(1.5 * PI.powf(2.0 / 3.0) * lambda.powf(2.0 / 3.0))
}

/// Lower bound for a total collision approached along a collinear path.
pub fn collinear_collision_bound() -> f64 {
    2.0 * kepler_min_action(1.25).unwrap()
}

/// Lower bound for a total collision approached along an equilateral path.
pub fn triangle_collision_bound() -> f64 {
    3.0 * kepler_min_action(1.0 / 3f64.sqrt()).unwrap()
}

/// Smaller of the two total-collision bounds.
pub fn total_collision_bound() -> f64 {
    collinear_collision_bound().min(triangle_collision_bound())
}

fn lagrange_scale() -> f64 {
    3.0 * 1.5 * (2.0 * PI).powf(2.0 / 3.0) * (3f64.sqrt() / 3.0).powf(2.0 / 3.0)
}

/// Action of the Lagrange circular orbit of period 4 over one quarter.
pub fn lagrange_quarter_action() -> f64 {
    lagrange_scale() * 4f64.powf(-2.0 / 3.0)
}

/// Action of the Lagrange circular orbit over its full period 4.
pub fn lagrange_full_action() -> f64 {
    lagrange_scale() * 4f64.powf(1.0 / 3.0)
}

/// Equilateral relative equilibrium of period 4 rotating counterclockwise.
///
/// At t = 0 body 1 sits at `(-R, 0)` and bodies 2, 3 are mirror images in
/// the x-axis, so the start lies in the `Q_s3` family and the state at t = 1
/// lies in `Q_e3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LagrangeCircle {
    pub radius: f64,
    pub omega: f64,
}

impl Default for LagrangeCircle {
    fn default() -> Self {
        Self::with_period(4.0)
    }
}

impl LagrangeCircle {
    pub fn with_period(period: f64) -> Self {
        let omega = 2.0 * PI / period;
        let radius = (1.0 / (3f64.sqrt() * omega * omega)).cbrt();
        Self { radius, omega }
    }

    const PHASES: [f64; 3] = [PI, PI / 3.0, -PI / 3.0];

    pub fn state_at(&self, t: f64) -> PhaseState {
        let mut q = [Vec2::zeros(); 3];
        let mut v = [Vec2::zeros(); 3];
        for (i, phase) in Self::PHASES.iter().enumerate() {
            let (s, c) = (phase + self.omega * t).sin_cos();
            q[i] = Vec2::new(c, s) * self.radius;
            v[i] = Vec2::new(-s, c) * (self.radius * self.omega);
        }
        PhaseState::raw(q, v, t)
    }

    pub fn configuration_at(&self, t: f64) -> Configuration {
        self.state_at(t).configuration()
    }

    /// Constant value of `K + U` along the orbit.
    pub fn lagrangian(&self) -> f64 {
        let kinetic = 1.5 * (self.radius * self.omega).powi(2);
        let potential = 3.0 / (self.radius * 3f64.sqrt());
        kinetic + potential
    }

    /// The quarter arc on `[0, 1]` sampled on `times`.
    pub fn quarter_path(&self, times: Vec<f64>) -> Result<DiscretePath> {
        DiscretePath::from_fn(times, |t| self.configuration_at(t))
    }
}

const T_BREAK: f64 = 0.125;
const SLOPE: f64 = 26.0 / 35.0;

fn check_unit_time(t: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!(
            "test path is defined on [0, 1], got t = {t}"
        )));
    }
    Ok(())
}

/// x-coordinates of the collinear test path. Bodies start in a 1-2 binary
/// collision and end in the Euler configuration with body 1 at the origin.
fn test_path_x(t: f64) -> [f64; 3] {
    if t <= T_BREAK {
        let s = t.powf(2.0 / 3.0);
        [-0.9 + s, -0.9 - s, 1.8]
    } else {
        [SLOPE * t - SLOPE, -SLOPE * t - 37.0 / 35.0, 1.8]
    }
}

pub fn test_path_eval(t: f64) -> Result<Configuration> {
    check_unit_time(t)?;
    let x = test_path_x(t);
    Ok(Configuration::from_centered(x.map(|x| Vec2::new(x, 0.0))))
}

/// Velocities of the test path; infinite at t = 0.
pub fn test_path_velocity(t: f64) -> Result<[Vec2; 3]> {
    check_unit_time(t)?;
    let u = if t <= T_BREAK {
        (2.0 / 3.0) * t.powf(-1.0 / 3.0)
    } else {
        SLOPE
    };
    Ok([Vec2::new(u, 0.0), Vec2::new(-u, 0.0), Vec2::zeros()])
}

/// The test path sampled on `times`.
pub fn test_path_discrete(times: Vec<f64>) -> Result<DiscretePath> {
    DiscretePath::from_fn(times, |t| test_path_eval(t).unwrap())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TestPathAction {
    /// Action over `[0, 1/8]`.
    pub a1: f64,
    /// Action over `[1/8, 1]`.
    pub a2: f64,
    pub total: f64,
}

/// Action of the test path split at t = 1/8.
///
/// On `[0, 1/8]` the kinetic term and the 1-2 interaction together equal
/// `(17/18) t^{-2/3}`, which is integrated in closed form; the bounded
/// remainder goes to adaptive quadrature.
pub fn test_path_action() -> TestPathAction {
    const TOL: f64 = 1e-13;
    let singular = 17.0 / 6.0 * T_BREAK.cbrt();
    let regular = adaptive(
        |t| {
            let s = t.powf(2.0 / 3.0);
            1.0 / (2.7 - s) + 1.0 / (2.7 + s)
        },
        0.0,
        T_BREAK,
        TOL,
    );
    let a1 = singular + regular;

    let kinetic = (1.0 - T_BREAK) * SLOPE * SLOPE;
    let potential = adaptive(
        |t| 35.0 / (52.0 * t + 11.0) + 35.0 / (26.0 * t + 100.0) + 35.0 / (89.0 - 26.0 * t),
        T_BREAK,
        1.0,
        TOL,
    );
    let a2 = kinetic + potential;
    TestPathAction {
        a1,
        a2,
        total: a1 + a2,
    }
}
