//! Newtonian flow of the three-body problem: a Dormand-Prince 5(4)
//! integrator with dense output and collision events, the action along
//! trajectories, and a shooting refiner for the collinear-start,
//! isosceles-end boundary value problem.

use nalgebra::{Matrix4, Vector4};

use crate::action::{kinetic, potential_gradient, potential_with_floor};
use crate::error::{Error, Result};
use crate::model::{Configuration, PhaseState, Vec2};
use crate::quad::GAUSS5;

/// `a_i = Σ_{j≠i} (q_j - q_i) / |q_j - q_i|³`.
pub fn accelerations(c: &Configuration) -> Result<[Vec2; 3]> {
    let (r, i, j) = c.min_distance();
    if !(r > 0.0) {
        return Err(Error::Collision { i, j, distance: r });
    }
    Ok(potential_gradient(c))
}

/// Total energy `K - U`.
pub fn energy(s: &PhaseState) -> f64 {
    kinetic(&s.v) - crate::action::potential(&s.configuration()).unwrap_or(f64::INFINITY)
}

pub fn angular_momentum(s: &PhaseState) -> f64 {
    (0..3).map(|i| s.q[i].perp(&s.v[i])).sum()
}

pub fn linear_momentum(s: &PhaseState) -> Vec2 {
    s.v[0] + s.v[1] + s.v[2]
}

type State = [f64; 12];

fn rhs(y: &State) -> State {
    let s = PhaseState::from_array(y, 0.0);
    let a = potential_gradient(&s.configuration());
    let mut f = [0.0; 12];
    f[..6].copy_from_slice(&y[6..]);
    for i in 0..3 {
        f[6 + 2 * i] = a[i].x;
        f[6 + 2 * i + 1] = a[i].y;
    }
    f
}

fn min_distance(y: &State) -> (f64, usize, usize) {
    PhaseState::from_array(y, 0.0).configuration().min_distance()
}

const A2: [f64; 1] = [1.0 / 5.0];
const A3: [f64; 2] = [3.0 / 40.0, 9.0 / 40.0];
const A4: [f64; 3] = [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0];
const A5: [f64; 4] = [
    19372.0 / 6561.0,
    -25360.0 / 2187.0,
    64448.0 / 6561.0,
    -212.0 / 729.0,
];
const A6: [f64; 5] = [
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
];
const A7: [f64; 6] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn combine(y: &State, h: f64, ks: &[State], coeffs: &[f64]) -> State {
    let mut out = *y;
    for (k, c) in ks.iter().zip(coeffs) {
        if *c != 0.0 {
            for n in 0..12 {
                out[n] += h * c * k[n];
            }
        }
    }
    out
}

/// One accepted step with its continuous extension of order 4.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseStep {
    pub t0: f64,
    /// Signed step; negative for backward integration.
    pub h: f64,
    rcont: [State; 5],
}

impl DenseStep {
    pub fn lo(&self) -> f64 {
        self.t0.min(self.t0 + self.h)
    }

    pub fn hi(&self) -> f64 {
        self.t0.max(self.t0 + self.h)
    }

    pub fn eval(&self, t: f64) -> State {
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let r = &self.rcont;
        let mut y = [0.0; 12];
        for n in 0..12 {
            y[n] = r[0][n] + th * (r[1][n] + th1 * (r[2][n] + th * (r[3][n] + th1 * r[4][n])));
        }
        y
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    Completed,
    /// Stopped where the distance of the pair dropped to the event radius.
    Collision { i: usize, j: usize, distance: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrateOptions {
    /// Relative and absolute tolerance of the error control.
    pub tol: f64,
    /// Pairwise distance that stops the integration.
    pub r_event: f64,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            r_event: 1e-6,
            max_steps: 2_000_000,
        }
    }
}

impl IntegrateOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

/// Relative drift of the first integrals with respect to the initial state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conservation {
    pub energy: f64,
    pub momentum: f64,
    pub angular_momentum: f64,
}

/// Solution of the equations of motion with a dense interpolant. States and
/// steps are stored in increasing time order whichever direction was
/// integrated.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    states: Vec<PhaseState>,
    steps: Vec<DenseStep>,
    pub energy: Vec<f64>,
    pub momentum: Vec<Vec2>,
    pub angular_momentum: Vec<f64>,
    pub termination: Termination,
    pub backward: bool,
}

impl Trajectory {
    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn steps(&self) -> &[DenseStep] {
        &self.steps
    }

    pub fn t_min(&self) -> f64 {
        self.states[0].time
    }

    pub fn t_max(&self) -> f64 {
        self.states.last().unwrap().time
    }

    /// State at which the integration started.
    pub fn initial(&self) -> &PhaseState {
        if self.backward {
            self.states.last().unwrap()
        } else {
            &self.states[0]
        }
    }

    /// State at which the integration stopped (the event state after a
    /// collision).
    pub fn terminal(&self) -> &PhaseState {
        if self.backward {
            &self.states[0]
        } else {
            self.states.last().unwrap()
        }
    }

    fn step_index(&self, t: f64) -> usize {
        let k = self.steps.partition_point(|s| s.hi() < t);
        k.min(self.steps.len() - 1)
    }

    pub fn state_at(&self, t: f64) -> Result<PhaseState> {
        let span = self.t_max() - self.t_min();
        let slack = 1e-12 * span.max(1.0);
        if !(t >= self.t_min() - slack && t <= self.t_max() + slack) {
            return Err(Error::InvalidArgument(format!(
                "t = {t} outside [{}, {}]",
                self.t_min(),
                self.t_max()
            )));
        }
        if self.steps.is_empty() {
            return Ok(self.states[0].at_time(t));
        }
        let step = &self.steps[self.step_index(t)];
        Ok(PhaseState::from_array(&step.eval(t), t))
    }

    pub fn sample(&self, times: &[f64]) -> Result<Vec<PhaseState>> {
        times.iter().map(|&t| self.state_at(t)).collect()
    }

    pub fn conservation(&self) -> Conservation {
        let k0 = if self.backward { self.states.len() - 1 } else { 0 };
        let (e0, p0, l0) = (self.energy[k0], self.momentum[k0], self.angular_momentum[k0]);
        let mut c = Conservation {
            energy: 0.0,
            momentum: 0.0,
            angular_momentum: 0.0,
        };
        for k in 0..self.states.len() {
            c.energy = c.energy.max((self.energy[k] - e0).abs() / e0.abs().max(1.0));
            c.momentum = c.momentum.max((self.momentum[k] - p0).norm());
            c.angular_momentum = c
                .angular_momentum
                .max((self.angular_momentum[k] - l0).abs() / l0.abs().max(1.0));
        }
        c
    }
}

fn error_norm(y0: &State, y1: &State, err: &State, tol: f64) -> f64 {
    let mut s = 0.0;
    for n in 0..12 {
        let sc = tol + tol * y0[n].abs().max(y1[n].abs());
        s += (err[n] / sc).powi(2);
    }
    (s / 12.0).sqrt()
}

fn initial_step(y: &State, f0: &State, tol: f64, dir: f64) -> f64 {
    let norm = |v: &State| {
        let mut s = 0.0;
        for n in 0..12 {
            let sc = tol + tol * y[n].abs();
            s += (v[n] / sc).powi(2);
        }
        (s / 12.0).sqrt()
    };
    let d0 = norm(y);
    let d1 = norm(f0);
    let h0 = if d0 < 1e-10 || d1 < 1e-10 { 1e-6 } else { 0.01 * d0 / d1 };
    let y1 = combine(y, dir * h0, &[*f0], &[1.0]);
    let f1 = rhs(&y1);
    let mut diff = [0.0; 12];
    for n in 0..12 {
        diff[n] = f1[n] - f0[n];
    }
    let d2 = norm(&diff) / h0;
    let h1 = if d1.max(d2) <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1)
}

/// Integrates from `s0` to `t_end` (backward when `t_end < s0.time`).
pub fn integrate(s0: &PhaseState, t_end: f64, opts: &IntegrateOptions) -> Result<Trajectory> {
    const SAFE: f64 = 0.9;
    const BETA: f64 = 0.04;
    const FAC_MIN: f64 = 0.2;
    const FAC_MAX: f64 = 10.0;
    let expo = 0.2 - BETA * 0.75;

    let (r0, i0, j0) = s0.configuration().min_distance();
    if !(r0 > 0.0) {
        return Err(Error::Collision {
            i: i0,
            j: j0,
            distance: r0,
        });
    }
    let dir = if t_end < s0.time { -1.0 } else { 1.0 };
    let span = (t_end - s0.time).abs();

    let mut t = s0.time;
    let mut y = s0.to_array();
    let mut k1 = rhs(&y);
    let mut h = dir * initial_step(&y, &k1, opts.tol, dir).min(span.max(f64::MIN_POSITIVE));
    let mut facold: f64 = 1e-4;
    let mut reject = false;

    let mut states = vec![*s0];
    let mut steps = Vec::new();
    let mut termination = Termination::Completed;

    let mut done = span == 0.0;
    while !done {
        if steps.len() >= opts.max_steps {
            return Err(Error::TooManySteps(opts.max_steps));
        }
        if h.abs() <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepSizeUnderflow { t });
        }
        let last = (t + h - t_end) * dir >= 0.0;
        if last {
            h = t_end - t;
        }

        let mut ks = [[0.0; 12]; 7];
        ks[0] = k1;
        ks[1] = rhs(&combine(&y, h, &ks[..1], &A2));
        ks[2] = rhs(&combine(&y, h, &ks[..2], &A3));
        ks[3] = rhs(&combine(&y, h, &ks[..3], &A4));
        ks[4] = rhs(&combine(&y, h, &ks[..4], &A5));
        ks[5] = rhs(&combine(&y, h, &ks[..5], &A6));
        let y1 = combine(&y, h, &ks[..6], &A7);
        ks[6] = rhs(&y1);
        let mut errv = [0.0; 12];
        for n in 0..12 {
            errv[n] = h * (0..7).map(|s| E[s] * ks[s][n]).sum::<f64>();
        }
        let err = error_norm(&y, &y1, &errv, opts.tol);

        let fac11 = err.powf(expo);
        if !(err <= 1.0) {
            let shrink = if err.is_finite() {
                (fac11 / SAFE).min(1.0 / FAC_MIN)
            } else {
                1.0 / FAC_MIN
            };
            h /= shrink;
            reject = true;
            continue;
        }

        let mut ydiff = [0.0; 12];
        let mut bspl = [0.0; 12];
        let mut r4 = [0.0; 12];
        let mut r5 = [0.0; 12];
        for n in 0..12 {
            ydiff[n] = y1[n] - y[n];
            bspl[n] = h * ks[0][n] - ydiff[n];
            r4[n] = ydiff[n] - h * ks[6][n] - bspl[n];
            r5[n] = h * (0..7).map(|s| D[s] * ks[s][n]).sum::<f64>();
        }
        let step = DenseStep {
            t0: t,
            h,
            rcont: [y, ydiff, bspl, r4, r5],
        };

        if min_distance(&y1).0 < opts.r_event {
            // Bisect on the interpolant for the crossing of r_event.
            let (mut lo, mut hi) = (0.0, 1.0);
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                let ym = step.eval(t + mid * h);
                if min_distance(&ym).0 < opts.r_event {
                    hi = mid;
                } else {
                    lo = mid;
                }
                if hi - lo < 1e-15 {
                    break;
                }
            }
            let te = t + hi * h;
            let ye = step.eval(te);
            let (distance, i, j) = min_distance(&ye);
            steps.push(step);
            states.push(PhaseState::from_array(&ye, te));
            termination = Termination::Collision { i, j, distance };
            break;
        }

        steps.push(step);
        t = if last { t_end } else { t + h };
        y = y1;
        k1 = ks[6];
        states.push(PhaseState::from_array(&y, t));
        done = last;

        let mut fac = fac11 / facold.powf(BETA);
        fac = (1.0 / FAC_MAX).max((1.0 / FAC_MIN).min(fac / SAFE));
        let mut hnew = h / fac;
        facold = err.max(1e-4);
        if reject {
            hnew = if dir > 0.0 { hnew.min(h) } else { hnew.max(h) };
            reject = false;
        }
        h = hnew;
    }

    if dir < 0.0 {
        states.reverse();
        steps.reverse();
    }
    let energy = states.iter().map(energy).collect();
    let momentum = states.iter().map(linear_momentum).collect();
    let angular_momentum = states.iter().map(angular_momentum).collect();
    Ok(Trajectory {
        states,
        steps,
        energy,
        momentum,
        angular_momentum,
        termination,
        backward: dir < 0.0,
    })
}

/// `∫ (K + U) dt` over `[t0, t1]` along the dense output, five Gauss points
/// per step.
pub fn trajectory_action(tr: &Trajectory, t0: f64, t1: f64) -> Result<f64> {
    let (a, b) = (t0.min(t1), t0.max(t1));
    let slack = 1e-12 * (tr.t_max() - tr.t_min()).max(1.0);
    if a < tr.t_min() - slack || b > tr.t_max() + slack {
        return Err(Error::InvalidArgument(format!(
            "[{t0}, {t1}] not covered by [{}, {}]",
            tr.t_min(),
            tr.t_max()
        )));
    }
    let (xs, ws) = GAUSS5;
    let mut total = 0.0;
    for step in tr.steps() {
        let lo = step.lo().max(a);
        let hi = step.hi().min(b);
        if hi <= lo {
            continue;
        }
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(ws.iter()) {
            let st = PhaseState::from_array(&step.eval(lo + x * (hi - lo)), 0.0);
            s += w * (kinetic(&st.v) + potential_with_floor(&st.configuration(), 0.0)?);
        }
        total += s * (hi - lo);
    }
    Ok(total)
}

/// Unit vector `(q1 - q2) / |q1 - q2|` at the event state of a trajectory
/// stopped by a 1-2 collision.
pub fn collision_direction(tr: &Trajectory) -> Result<Vec2> {
    match tr.termination {
        Termination::Collision { i: 0, j: 1, .. } => {
            let s = tr.terminal();
            Ok((s.q[0] - s.q[1]).normalize())
        }
        _ => Err(Error::NotAtCollision),
    }
}

/// `(v1 - v2)·ŷ` at the event state.
pub fn relative_y_velocity(tr: &Trajectory) -> Result<f64> {
    collision_direction(tr)?;
    let s = tr.terminal();
    Ok(s.v[0].y - s.v[1].y)
}

/// Action of the interval between a 1-2 collision and the event state,
/// modelled as a parabolic Kepler ejection of the pair plus the frozen
/// remainder of the Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeplerTail {
    /// Time from the collision to the event state.
    pub tau: f64,
    pub pair: f64,
    pub rest: f64,
}

impl KeplerTail {
    pub fn total(&self) -> f64 {
        self.pair + self.rest
    }
}

pub fn kepler_tail(event: &PhaseState) -> KeplerTail {
    // Relative motion of a unit-mass pair: reduced mass ½, coupling 1, so
    // r(τ) = γ τ^{2/3} with γ³ = 9.
    let gamma = 9f64.cbrt();
    let q = &event.q;
    let v = &event.v;
    let r = (q[0] - q[1]).norm();
    let tau = (r / gamma).powf(1.5);
    let pair = 6.0 * tau.cbrt() / gamma;
    let vcm = (v[0] + v[1]) / 2.0;
    let k_rest = vcm.norm_squared() + 0.5 * v[2].norm_squared();
    let u_rest = 1.0 / (q[0] - q[2]).norm() + 1.0 / (q[1] - q[2]).norm();
    KeplerTail {
        tau,
        pair,
        rest: tau * (k_rest + u_rest),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuarterAction {
    /// Action along the integrated span.
    pub integrated: f64,
    pub tail: KeplerTail,
    pub total: f64,
    /// Length of the quarter: integrated span plus `tail.tau`.
    pub duration: f64,
}

/// Action of a quarter that ends (in integration direction) in a 1-2
/// collision, including the analytic tail below the event radius.
pub fn collision_quarter_action(tr: &Trajectory) -> Result<QuarterAction> {
    collision_direction(tr)?;
    let integrated = trajectory_action(tr, tr.t_min(), tr.t_max())?;
    let tail = kepler_tail(tr.terminal());
    Ok(QuarterAction {
        integrated,
        tail,
        total: integrated + tail.total(),
        duration: tr.t_max() - tr.t_min() + tail.tau,
    })
}

/// Unknowns of the shooting problem: bodies on the x-axis at t = 0 with
/// purely vertical velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingProblem {
    pub x1: f64,
    pub x2: f64,
    pub v1y: f64,
    pub v2y: f64,
}

impl ShootingProblem {
    pub fn from_state(s: &PhaseState) -> Self {
        Self {
            x1: s.q[0].x,
            x2: s.q[1].x,
            v1y: s.v[0].y,
            v2y: s.v[1].y,
        }
    }

    fn to_vector(self) -> Vector4<f64> {
        Vector4::new(self.x1, self.x2, self.v1y, self.v2y)
    }

    fn from_vector(u: &Vector4<f64>) -> Self {
        Self {
            x1: u[0],
            x2: u[1],
            v1y: u[2],
            v2y: u[3],
        }
    }

    pub fn initial_state(&self) -> PhaseState {
        PhaseState::raw(
            [
                Vec2::new(self.x1, 0.0),
                Vec2::new(self.x2, 0.0),
                Vec2::new(-self.x1 - self.x2, 0.0),
            ],
            [
                Vec2::new(0.0, self.v1y),
                Vec2::new(0.0, self.v2y),
                Vec2::new(0.0, -self.v1y - self.v2y),
            ],
            0.0,
        )
    }

    /// `(q1x, q2y - q3y, v1y, v2x - v3x)` at t = 1.
    pub fn residuals(&self, opts: &IntegrateOptions) -> Result<Vector4<f64>> {
        let tr = integrate(&self.initial_state(), 1.0, opts)?;
        if let Termination::Collision { i, j, distance } = tr.termination {
            return Err(Error::Collision { i, j, distance });
        }
        let s = tr.terminal();
        Ok(Vector4::new(
            s.q[0].x,
            s.q[1].y - s.q[2].y,
            s.v[0].y,
            s.v[1].x - s.v[2].x,
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingOptions {
    pub integrator: IntegrateOptions,
    /// Relative finite-difference step of the Jacobian.
    pub fd_step: f64,
    pub max_iterations: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            integrator: IntegrateOptions::default(),
            fd_step: 1e-7,
            max_iterations: 30,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingSolution {
    pub problem: ShootingProblem,
    pub state: PhaseState,
    /// ∞-norm of the residuals at the solution.
    pub residual: f64,
    pub iterations: usize,
}

/// Damped Newton iteration on the four t = 1 residuals.
pub fn shoot_henon(guess: &ShootingProblem, tol: f64, opts: &ShootingOptions) -> Result<ShootingSolution> {
    let eval = |u: &Vector4<f64>| ShootingProblem::from_vector(u).residuals(&opts.integrator);
    let diverged = |e: Error| Error::Divergence(format!("integration failed: {e}"));

    let mut u = guess.to_vector();
    let mut r = eval(&u).map_err(diverged)?;
    let mut norm = r.amax();
    for it in 0..=opts.max_iterations {
        if norm < tol {
            let problem = ShootingProblem::from_vector(&u);
            return Ok(ShootingSolution {
                problem,
                state: problem.initial_state(),
                residual: norm,
                iterations: it,
            });
        }
        if it == opts.max_iterations {
            break;
        }
        let mut jac = Matrix4::zeros();
        for c in 0..4 {
            let d = opts.fd_step * u[c].abs().max(1.0);
            let (mut up, mut dn) = (u, u);
            up[c] += d;
            dn[c] -= d;
            let col = (eval(&up).map_err(diverged)? - eval(&dn).map_err(diverged)?) / (2.0 * d);
            jac.set_column(c, &col);
        }
        let delta = jac.lu().solve(&(-r)).ok_or(Error::SingularJacobian)?;
        if !delta.iter().all(|x| x.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        let mut lambda = 1.0;
        loop {
            let trial = u + delta * lambda;
            match eval(&trial) {
                Ok(rt) if rt.amax() < norm => {
                    u = trial;
                    r = rt;
                    norm = r.amax();
                    break;
                }
                _ if lambda > 1.0 / 1024.0 => lambda /= 2.0,
                _ => {
                    return Err(Error::Divergence(format!(
                        "no decrease along the Newton direction at iteration {it} (residual {norm:e})"
                    )))
                }
            }
        }
    }
    Err(Error::Divergence(format!(
        "residual {norm:e} after {} iterations",
        opts.max_iterations
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bounds::{lagrange_quarter_action, LagrangeCircle};
    use crate::states::{broucke_henon_t0, broucke_henon_rounded, schubart_t1};
    use proptest::prelude::*;

    #[test]
    fn acceleration_examples() {
        let s = 1.0;
        let h = s * 3f64.sqrt() / 2.0;
        let c = Configuration::from_xy([[0.0, 0.0], [s, 0.0], [s / 2.0, h]]);
        let a = accelerations(&c).unwrap();
        for i in 0..3 {
            assert!((a[i].norm() - 3f64.sqrt()).abs() < 1e-14);
            let to_center = -c.position(i).normalize();
            assert!((a[i].normalize() - to_center).norm() < 1e-14);
        }
        let c = Configuration::from_xy([[-1.0, 0.0], [0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(accelerations(&c).unwrap()[1], Vec2::zeros());
        assert!(accelerations(&Configuration::collision()).is_err());
    }

    proptest! {
        #[test]
        fn accelerations_sum_to_zero(xy in prop::array::uniform6(-2.0..2.0f64)) {
            let c = Configuration::from_xy([[xy[0], xy[1]], [xy[2], xy[3]], [xy[4], xy[5]]]);
            prop_assume!(c.min_distance().0 > 1e-2);
            let a = accelerations(&c).unwrap();
            let scale = a.iter().map(|v| v.norm()).fold(1.0, f64::max);
            prop_assert!((a[0] + a[1] + a[2]).norm() < 1e-13 * scale);
        }
    }

    #[test]
    fn tableau_is_consistent() {
        const C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
        let rows: [&[f64]; 6] = [&A2, &A3, &A4, &A5, &A6, &A7];
        for (row, c) in rows.iter().zip(C.iter()) {
            assert!((row.iter().sum::<f64>() - c).abs() < 1e-14);
        }
        assert!(E.iter().sum::<f64>().abs() < 1e-15);
    }

    #[test]
    fn lagrange_circle_stays_on_the_circle() {
        let c = LagrangeCircle::default();
        let tr = integrate(&c.state_at(0.0), 4.0, &IntegrateOptions::default()).unwrap();
        assert_eq!(tr.termination, Termination::Completed);
        for k in 0..=64 {
            let t = 4.0 * k as f64 / 64.0;
            let dev = tr.state_at(t).unwrap().max_deviation(&c.state_at(t));
            assert!(dev < 1e-8, "t = {t}: {dev}");
        }
        let a = trajectory_action(&tr, 0.0, 1.0).unwrap();
        assert!((a - lagrange_quarter_action()).abs() < 1e-9);
    }

    #[test]
    fn conservation_on_broucke_henon() {
        let tr = integrate(&broucke_henon_t0(), 4.0, &IntegrateOptions::default()).unwrap();
        let c = tr.conservation();
        assert!(c.energy < 1e-9, "{c:?}");
        assert!(c.momentum < 1e-9, "{c:?}");
        assert!(c.angular_momentum < 1e-9, "{c:?}");
    }

    #[test]
    fn forward_then_backward_returns() {
        let opts = IntegrateOptions::with_tol(1e-12);
        let s0 = broucke_henon_t0();
        let fwd = integrate(&s0, 1.0, &opts).unwrap();
        let back = integrate(fwd.terminal(), 0.0, &opts).unwrap();
        assert!(back.backward);
        assert_eq!(back.terminal().time, 0.0);
        assert!(back.terminal().max_deviation(&s0) < 10.0 * 1e-12 * 1e3);
        let times: Vec<f64> = back.states().iter().map(|s| s.time).collect();
        assert!(times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn dense_output_matches_step_ends() {
        let tr = integrate(&broucke_henon_t0(), 1.0, &IntegrateOptions::default()).unwrap();
        for (k, step) in tr.steps().iter().enumerate() {
            let end = step.eval(step.t0 + step.h);
            let s = PhaseState::from_array(&end, 0.0);
            assert!(s.max_deviation(&tr.states()[k + 1].at_time(0.0)) < 1e-13);
        }
    }

    #[test]
    fn collinear_states_stay_collinear() {
        let tr = integrate(&schubart_t1(), 2.0, &IntegrateOptions::default()).unwrap();
        assert!(matches!(tr.termination, Termination::Collision { i: 0, j: 1, .. }));
        for s in tr.states() {
            for i in 0..3 {
                assert!(s.q[i].y.abs() < 1e-12 && s.v[i].y.abs() < 1e-12);
            }
        }
    }

    #[test]
    fn schubart_collision_direction() {
        let opts = IntegrateOptions::default();
        let s = schubart_t1().time_reversed();
        let tr = integrate(&s, -1.0, &opts).unwrap();
        let d = collision_direction(&tr).unwrap();
        assert!((d.x.abs() - 1.0).abs() < 1e-3 && d.y.abs() < 1e-3);
        let mut last = f64::INFINITY;
        for r_event in [1e-4, 1e-5, 1e-6] {
            let tr = integrate(&s, -1.0, &IntegrateOptions { r_event, ..opts }).unwrap();
            let vy = relative_y_velocity(&tr).unwrap().abs();
            assert!(vy <= last);
            last = vy;
        }
        let done = integrate(&broucke_henon_t0(), 1.0, &opts).unwrap();
        assert_eq!(collision_direction(&done), Err(Error::NotAtCollision));
    }

    #[test]
    fn collision_quarter_matches_virial_identity() {
        // A collision-ejection orbit of period 4 with a quarter of unit
        // length has ∫(K + U) = -3E over the quarter.
        let s = schubart_t1().time_reversed();
        let tr = integrate(&s, -1.0, &IntegrateOptions::default()).unwrap();
        let q = collision_quarter_action(&tr).unwrap();
        let e = energy(&s);
        assert!((q.duration - 1.0).abs() < 2e-3, "{}", q.duration);
        assert!((q.total - (-3.0 * e)).abs() < 5e-3, "{} vs {}", q.total, -3.0 * e);
        assert!(q.tail.total() < 1e-2);
    }

    #[test]
    fn kepler_tail_of_pure_ejection() {
        // Parabolic ejection r = 9^{1/3} τ^{2/3} has ∫(½·½ṙ² + 1/r) = 6τ^{1/3}/9^{1/3}.
        let gamma = 9f64.cbrt();
        let tau: f64 = 1e-6;
        let r = gamma * tau.powf(2.0 / 3.0);
        let rdot = 2.0 / 3.0 * gamma * tau.powf(-1.0 / 3.0);
        // ∫₀^τ c t^{-2/3} dt = 3 c τ^{1/3}.
        let c = 0.25 * (2.0 / 3.0 * gamma).powi(2) + 1.0 / gamma;
        let oracle = 3.0 * c * tau.cbrt();
        let s = PhaseState::raw(
            [Vec2::new(r / 2.0, 0.0), Vec2::new(-r / 2.0, 0.0), Vec2::new(1e9, 0.0)],
            [Vec2::new(rdot / 2.0, 0.0), Vec2::new(-rdot / 2.0, 0.0), Vec2::zeros()],
            0.0,
        );
        let tail = kepler_tail(&s);
        assert!((tail.tau - tau).abs() < 1e-18);
        assert!((tail.pair - oracle).abs() < 1e-9 * oracle);
    }

    #[test]
    fn shooting_from_rounded_seed() {
        let seed = ShootingProblem::from_state(&broucke_henon_rounded());
        let sol = shoot_henon(&seed, 1e-8, &ShootingOptions::default()).unwrap();
        assert!(sol.residual < 1e-8);
        let published = broucke_henon_t0();
        assert!(sol.state.max_deviation(&published) < 5e-4);
        let (com, mom) = crate::model::com_and_momentum(&sol.state);
        assert!(com.norm() < 1e-15 && mom.norm() < 1e-15);
    }

    #[test]
    fn shooting_polishes_the_published_data() {
        let seed = ShootingProblem::from_state(&broucke_henon_t0());
        let r0 = seed.residuals(&IntegrateOptions::default()).unwrap().amax();
        assert!(r0 < 1e-3);
        let sol = shoot_henon(&seed, 1e-10, &ShootingOptions::default()).unwrap();
        assert!(sol.residual < 1e-10);
    }

    #[test]
    fn shooting_from_rest_is_reported_as_divergence() {
        let mut seed = ShootingProblem::from_state(&broucke_henon_rounded());
        seed.v1y = 0.0;
        seed.v2y = 0.0;
        let err = shoot_henon(&seed, 1e-8, &ShootingOptions::default()).unwrap_err();
        assert!(matches!(err, Error::Divergence(_) | Error::SingularJacobian), "{err}");
    }
}
