//! Extension of a quarter solution on `[0, 1]` to a period-4 orbit and
//! checks of the resulting D₂ symmetry.

use crate::dynamics::{accelerations, energy, Trajectory};
use crate::error::{Error, Result};
use crate::minimize::one_sided;
use crate::model::{DiscretePath, PhaseState, Vec2};

const PERIOD: f64 = 4.0;

/// Sampled states on `[t0, 1]` with `0 ≤ t0`, times strictly increasing.
#[derive(Debug, Clone, PartialEq)]
pub struct Quarter {
    states: Vec<PhaseState>,
}

impl Quarter {
    pub fn new(states: Vec<PhaseState>) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidPath("a quarter needs at least two samples".into()));
        }
        if states.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InvalidPath("sample times must increase".into()));
        }
        let (t0, t1) = (states[0].time, states.last().unwrap().time);
        if !(t0 >= 0.0) || (t1 - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidPath(format!(
                "quarter must span [t0, 1] with t0 ≥ 0, got [{t0}, {t1}]"
            )));
        }
        if states.iter().any(|s| !s.to_array().iter().all(|x| x.is_finite())) {
            return Err(Error::InvalidPath("non-finite sample".into()));
        }
        Ok(Self { states })
    }

    /// Every accepted step of an integration over `[0, 1]` (or ending at
    /// t = 1 after a collision event).
    pub fn from_trajectory(tr: &Trajectory) -> Result<Self> {
        Self::new(tr.states().to_vec())
    }

    /// Nodes of a discrete path with velocities from three-point
    /// differences.
    pub fn from_path(p: &DiscretePath) -> Result<Self> {
        let t = p.times();
        let n = p.nodes();
        let l = t.len() - 1;
        if l < 2 {
            return Err(Error::InvalidPath("need at least two segments".into()));
        }
        let mut out = Vec::with_capacity(l + 1);
        for k in 0..=l {
            let mut v = [Vec2::zeros(); 3];
            for (i, vi) in v.iter_mut().enumerate() {
                let q = |j: usize| n[j].position(i);
                *vi = if k == 0 {
                    one_sided([t[0], t[1], t[2]], [q(0), q(1), q(2)])
                } else if k == l {
                    -one_sided([-t[l], -t[l - 1], -t[l - 2]], [q(l), q(l - 1), q(l - 2)])
                } else {
                    let (h1, h2) = (t[k] - t[k - 1], t[k + 1] - t[k]);
                    q(k - 1) * (-h2 / (h1 * (h1 + h2)))
                        + q(k) * ((h2 - h1) / (h1 * h2))
                        + q(k + 1) * (h1 / (h2 * (h1 + h2)))
                };
            }
            out.push(PhaseState::raw(*n[k].positions(), v, t[k]));
        }
        Self::new(out)
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn first(&self) -> &PhaseState {
        &self.states[0]
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().unwrap()
    }

    /// Whether the first sample is (close to) a binary collision, in which
    /// case its velocities carry no boundary information.
    pub fn starts_at_collision(&self, r_collision: f64) -> bool {
        self.first().configuration().min_distance().0 < r_collision
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    /// Reflection in time about t = 1 with bodies 2, 3 swapped, then about
    /// t = 2 with `y ↦ -y`.
    Henon,
    /// Reflection about t = 1 with bodies 2, 3 swapped, then
    /// `q(t) = -q(t - 2)`.
    Antisymmetric,
    /// Sampled from a direct integration.
    Integrated,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtendOptions {
    /// Largest accepted boundary residual of the quarter.
    pub tol: f64,
    /// Separation below which the first sample counts as a collision.
    pub r_collision: f64,
}

impl Default for ExtendOptions {
    fn default() -> Self {
        Self {
            tol: 1e-6,
            r_collision: 1e-4,
        }
    }
}

/// Discontinuity of the extension at an interior junction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Junction {
    pub time: f64,
    pub jump: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    states: Vec<PhaseState>,
    pub provenance: Provenance,
    pub junctions: Vec<Junction>,
}

impl PeriodicOrbit {
    /// Wraps samples of a full period `[0, 4]` from an integration.
    pub fn from_trajectory(tr: &Trajectory) -> Result<Self> {
        Self::from_samples(tr.states().to_vec(), Provenance::Integrated)
    }

    /// Wraps samples covering `[0, 4]` with increasing times.
    pub fn from_samples(states: Vec<PhaseState>, provenance: Provenance) -> Result<Self> {
        if states.len() < 2 {
            return Err(Error::InvalidPath("an orbit needs at least two samples".into()));
        }
        if states.windows(2).any(|w| !(w[1].time > w[0].time)) {
            return Err(Error::InvalidPath("sample times must increase".into()));
        }
        let (t0, t1) = (states[0].time, states.last().unwrap().time);
        if t0.abs() > 1e-12 || (t1 - PERIOD).abs() > 1e-12 {
            return Err(Error::InvalidPath(format!("samples must span [0, 4], got [{t0}, {t1}]")));
        }
        Ok(Self {
            states,
            provenance,
            junctions: vec![],
        })
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.time).collect()
    }

    /// Cubic Hermite interpolation in position (with velocity slopes) and
    /// in velocity (with acceleration slopes), periodic in t.
    pub fn state_at(&self, t: f64) -> PhaseState {
        let t = t.rem_euclid(PERIOD);
        let s = &self.states;
        let k = s.partition_point(|x| x.time <= t);
        if k == 0 {
            return s[0].at_time(t);
        }
        if k == s.len() {
            return s[k - 1].at_time(t);
        }
        let (a, b) = (&s[k - 1], &s[k]);
        if t == a.time {
            return *a;
        }
        let h = b.time - a.time;
        let u = (t - a.time) / h;
        let h00 = (1.0 + 2.0 * u) * (1.0 - u) * (1.0 - u);
        let h10 = u * (1.0 - u) * (1.0 - u);
        let h01 = u * u * (3.0 - 2.0 * u);
        let h11 = u * u * (u - 1.0);
        let d00 = 6.0 * u * (u - 1.0) / h;
        let d10 = (1.0 - u) * (1.0 - 3.0 * u);
        let d01 = -d00;
        let d11 = u * (3.0 * u - 2.0);
        let acc = accelerations(&a.configuration()).ok().zip(accelerations(&b.configuration()).ok());
        let mut q = [Vec2::zeros(); 3];
        let mut v = [Vec2::zeros(); 3];
        for i in 0..3 {
            q[i] = a.q[i] * h00 + a.v[i] * (h * h10) + b.q[i] * h01 + b.v[i] * (h * h11);
            v[i] = match acc {
                Some((aa, ab)) => a.v[i] * h00 + aa[i] * (h * h10) + b.v[i] * h01 + ab[i] * (h * h11),
                None => a.q[i] * d00 + a.v[i] * d10 + b.q[i] * d01 + b.v[i] * d11,
            };
        }
        PhaseState::raw(q, v, t)
    }

    /// Deviation between the samples at t = 0 and t = 4.
    pub fn periodicity_error(&self) -> f64 {
        let last = self.states.last().unwrap();
        self.states[0].max_deviation(last)
    }

    /// Spread of the energy over all samples.
    pub fn energy_spread(&self) -> f64 {
        let e: Vec<f64> = self.states.iter().map(energy).collect();
        let lo = e.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = e.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        hi - lo
    }
}

fn swap23<T: Copy>(a: [T; 3]) -> [T; 3] {
    [a[0], a[2], a[1]]
}

/// Image under the reflection about t = 1: time `2 - t`, x negated, bodies
/// 2 and 3 swapped.
fn mirror_about_one(s: &PhaseState) -> PhaseState {
    PhaseState::raw(
        swap23(s.q).map(|p| Vec2::new(-p.x, p.y)),
        swap23(s.v).map(|p| Vec2::new(p.x, -p.y)),
        2.0 - s.time,
    )
}

/// Image under the reflection about t = 2: time `4 - t`, y negated.
fn mirror_about_two(s: &PhaseState) -> PhaseState {
    PhaseState::raw(
        s.q.map(|p| Vec2::new(p.x, -p.y)),
        s.v.map(|p| Vec2::new(-p.x, p.y)),
        4.0 - s.time,
    )
}

fn negate_shift(s: &PhaseState) -> PhaseState {
    PhaseState::raw(s.q.map(|p| -p), s.v.map(|p| -p), s.time + 2.0)
}

fn residuals_t1(s: &PhaseState) -> Vec<(String, f64)> {
    vec![
        ("q1x(1)".into(), s.q[0].x),
        ("q2x(1)+q3x(1)".into(), s.q[1].x + s.q[2].x),
        ("q2y(1)-q3y(1)".into(), s.q[1].y - s.q[2].y),
        ("v1y(1)".into(), s.v[0].y),
        ("v2y(1)+v3y(1)".into(), s.v[1].y + s.v[2].y),
        ("v2x(1)-v3x(1)".into(), s.v[1].x - s.v[2].x),
    ]
}

fn check(res: Vec<(String, f64)>, tol: f64) -> Result<()> {
    let failing: Vec<_> = res.into_iter().filter(|(_, r)| !(r.abs() <= tol)).collect();
    if failing.is_empty() {
        Ok(())
    } else {
        Err(Error::Precondition(failing))
    }
}

fn require_origin(q: &Quarter) -> Result<()> {
    if q.first().time != 0.0 {
        return Err(Error::InvalidPath(format!(
            "quarter must start at t = 0, got {}",
            q.first().time
        )));
    }
    Ok(())
}

/// Reflects the quarter about t = 1, giving samples on `[t0, 2 - t0]`. The
/// samples on `[t0, 1]` are the input.
pub fn mirror_half(q: &Quarter, opts: &ExtendOptions) -> Result<Vec<PhaseState>> {
    check(residuals_t1(q.last()), opts.tol)?;
    let mut out = q.states.clone();
    let n = out.len();
    for k in (0..n - 1).rev() {
        out.push(mirror_about_one(&q.states[k]));
    }
    Ok(out)
}

fn junction(time: f64, left: &PhaseState, right: &PhaseState) -> Junction {
    Junction {
        time,
        jump: left.max_deviation(right),
    }
}

/// Extension by the two time reflections of a quarter that starts
/// collinear on the x-axis with vertical velocities and ends isosceles.
pub fn extend_henon(q: &Quarter, opts: &ExtendOptions) -> Result<PeriodicOrbit> {
    require_origin(q)?;
    let s0 = q.first();
    let mut res = vec![
        ("q1y(0)".to_string(), s0.q[0].y),
        ("q2y(0)".to_string(), s0.q[1].y),
        ("q3y(0)".to_string(), s0.q[2].y),
    ];
    if !q.starts_at_collision(opts.r_collision) {
        res.push(("v1x(0)".into(), s0.v[0].x));
        res.push(("v2x(0)".into(), s0.v[1].x));
        res.push(("v3x(0)".into(), s0.v[2].x));
    }
    res.extend(residuals_t1(q.last()));
    check(res, opts.tol)?;

    let half = mirror_half(q, opts)?;
    let n = half.len();
    let mut states = half.clone();
    for k in (0..n - 1).rev() {
        states.push(mirror_about_two(&half[k]));
    }
    let last = q.last();
    let junctions = vec![
        junction(1.0, last, &mirror_about_one(last)),
        junction(2.0, &mirror_about_one(s0), &mirror_about_two(&mirror_about_one(s0))),
        junction(4.0, &s0.at_time(4.0), &mirror_about_two(&mirror_about_one(&mirror_about_one(s0)))),
    ];
    Ok(PeriodicOrbit {
        states,
        provenance: Provenance::Henon,
        junctions,
    })
}

/// Extension of a quarter with an isosceles start (body 1 on the x-axis,
/// bodies 2, 3 mirror images) into the class `q(t + 2) = -q(t)`.
pub fn extend_antisymmetric(q: &Quarter, opts: &ExtendOptions) -> Result<PeriodicOrbit> {
    require_origin(q)?;
    let s0 = q.first();
    let mut res = vec![
        ("q1y(0)".to_string(), s0.q[0].y),
        ("q2x(0)-q3x(0)".to_string(), s0.q[1].x - s0.q[2].x),
        ("q2y(0)+q3y(0)".to_string(), s0.q[1].y + s0.q[2].y),
    ];
    if q.starts_at_collision(opts.r_collision) {
        let (_, i, j) = s0.configuration().min_distance();
        res.push((format!("collision of bodies {} and {} at t = 0", i + 1, j + 1), f64::INFINITY));
    } else {
        res.push(("v1x(0)".into(), s0.v[0].x));
        res.push(("v2x(0)+v3x(0)".into(), s0.v[1].x + s0.v[2].x));
        res.push(("v2y(0)-v3y(0)".into(), s0.v[1].y - s0.v[2].y));
    }
    res.extend(residuals_t1(q.last()));
    check(res, opts.tol)?;

    let half = mirror_half(q, opts)?;
    let mut states = half.clone();
    for s in &half[1..] {
        states.push(negate_shift(s));
    }
    let last = q.last();
    let at_two = mirror_about_one(s0);
    let junctions = vec![
        junction(1.0, last, &mirror_about_one(last)),
        junction(2.0, &at_two, &negate_shift(s0)),
        junction(4.0, &s0.at_time(4.0), &negate_shift(&at_two)),
    ];
    Ok(PeriodicOrbit {
        states,
        provenance: Provenance::Antisymmetric,
        junctions,
    })
}

/// Worst violation of one symmetry relation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelationCheck {
    pub max_deviation: f64,
    pub at_time: f64,
    pub body: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct D2Report {
    /// `q_i(t) = R_x q_σ(i)(-t)`.
    pub time_reflection: RelationCheck,
    /// `q_i(t + 2) = -q_σ(i)(t)`.
    pub half_period: RelationCheck,
    pub tol: f64,
    pub passed: bool,
}

/// Checks both D₂ relations on the sample times of `o`. The body
/// permutation attached to each relation follows the provenance: the
/// reflection orbits of Henon type swap bodies 2, 3 over a half period,
/// antisymmetric orbits swap them under time reflection. Integrated orbits
/// are checked with the Henon pattern.
pub fn verify_d2(o: &PeriodicOrbit, tol: f64) -> D2Report {
    let (refl_perm, half_perm): ([usize; 3], [usize; 3]) = match o.provenance {
        Provenance::Henon | Provenance::Integrated => ([0, 1, 2], [0, 2, 1]),
        Provenance::Antisymmetric => ([0, 2, 1], [0, 1, 2]),
    };
    let empty = RelationCheck {
        max_deviation: 0.0,
        at_time: 0.0,
        body: 0,
    };
    let mut refl = empty;
    let mut half = empty;
    for s in o.states() {
        let t = s.time;
        let r = o.state_at(-t);
        let h = o.state_at(t + 2.0);
        for i in 0..3 {
            let p = r.q[refl_perm[i]];
            let d = (s.q[i] - Vec2::new(p.x, -p.y)).amax();
            if d > refl.max_deviation {
                refl = RelationCheck {
                    max_deviation: d,
                    at_time: t,
                    body: i,
                };
            }
            let d = (h.q[i] + s.q[half_perm[i]]).amax();
            if d > half.max_deviation {
                half = RelationCheck {
                    max_deviation: d,
                    at_time: t,
                    body: i,
                };
            }
        }
    }
    D2Report {
        time_reflection: refl,
        half_period: half,
        tol,
        passed: refl.max_deviation <= tol && half.max_deviation <= tol,
    }
}
