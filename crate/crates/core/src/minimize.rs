//! Minimization of the discrete action over paths whose end configurations
//! are fixed or move in one of the boundary families.
//!
//! The optimizer is a limited-memory BFGS iteration preconditioned by the
//! kinetic Hessian, with the nonnegativity of `(a1, a2)` enforced by
//! projection and an Armijo backtracking line search that rejects any trial
//! point with a Gauss-point collision.

use std::collections::VecDeque;

use nalgebra::{DMatrix, DVector};

use crate::action::{action_gradient, discrete_action, min_gauss_distance, ActionBreakdown, BoundaryMode};
use crate::bounds::{test_path_discrete, LagrangeCircle};
use crate::error::{Error, Result};
use crate::model::{fit_qe1, fit_qs3, graded_grid, invert_qs1, BoundaryParams, Configuration, DiscretePath, Vec2};

/// Starting path of a minimization.
#[derive(Debug, Clone, PartialEq)]
pub enum Seed {
    /// The explicit collinear test path.
    CollinearTestPath,
    /// The quarter arc of the period-4 Lagrange circle.
    LagrangeQuarter,
    Path(DiscretePath),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub max_iterations: usize,
    /// Stop when the projected gradient ∞-norm falls below this.
    pub gradient_tol: f64,
    /// Stop when the action changes by less than `stall_tol` (relative) over
    /// `stall_window` iterations.
    pub stall_tol: f64,
    pub stall_window: usize,
    /// Number of stored curvature pairs.
    pub memory: usize,
    /// Weight of the lumped mass term in the preconditioner.
    pub mass_shift: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            max_iterations: 50_000,
            gradient_tol: 1e-7,
            stall_tol: 1e-13,
            stall_window: 10,
            memory: 12,
            mass_shift: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeConfig {
    /// Number of segments N.
    pub grid_size: usize,
    /// Grid `t_k = (k/N)^grading`.
    pub grading: f64,
    pub family: BoundaryMode,
    pub seed: Seed,
    pub solver: SolverOptions,
    /// Solve on successively doubled grids starting near `N / 2^levels`.
    pub continuation_levels: usize,
}

impl MinimizeConfig {
    pub fn new(family: BoundaryMode, seed: Seed, grid_size: usize) -> Self {
        Self {
            grid_size,
            grading: 1.0,
            family,
            seed,
            solver: SolverOptions::default(),
            continuation_levels: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let s = &self.solver;
        if self.grid_size < 16 {
            return Err(Error::InvalidArgument(format!(
                "grid size must be at least 16, got {}",
                self.grid_size
            )));
        }
        if !(self.grading >= 1.0 && self.grading.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grading exponent must be finite and at least 1, got {}",
                self.grading
            )));
        }
        if !(s.gradient_tol > 0.0) || !(s.stall_tol > 0.0) || !(s.mass_shift > 0.0) {
            return Err(Error::InvalidArgument("tolerances must be positive".into()));
        }
        if s.memory == 0 || s.stall_window == 0 {
            return Err(Error::InvalidArgument(
                "memory and stall window must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    GradientTolerance,
    Stalled,
    IterationCap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinimizeResult {
    pub path: DiscretePath,
    pub family: BoundaryMode,
    /// `(a1, a2)` for `Q_s1`, `(a1, c1)` for `Q_s3`; empty when fixed.
    pub start_params: Vec<f64>,
    /// `(b1, b2)`; empty when fixed.
    pub end_params: Vec<f64>,
    pub action: ActionBreakdown,
    /// Projected-gradient ∞-norm at the returned path.
    pub gradient_norm: f64,
    /// Iterations on the finest grid.
    pub iterations: usize,
    pub termination: Termination,
    pub min_gauss_distance: f64,
    /// Action of every accepted iterate on the finest grid, starting with the
    /// seed.
    pub history: Vec<f64>,
}

impl MinimizeResult {
    /// `(a1, a2, b1, b2)` for the `Q_s1`/`Q_e1` family.
    pub fn boundary_params(&self) -> Option<BoundaryParams> {
        match self.family {
            BoundaryMode::Qs1Qe1 => Some(BoundaryParams {
                a1: self.start_params[0],
                a2: self.start_params[1],
                b1: self.end_params[0],
                b2: self.end_params[1],
            }),
            _ => None,
        }
    }

    /// Largest `|q_iy|` over all nodes.
    pub fn max_abs_y(&self) -> f64 {
        self.path.nodes().iter().map(|c| c.max_abs_y()).fold(0.0, f64::max)
    }
}

/// Flat optimization variables: interior nodes (6 per node), then start and
/// end parameters.
struct Problem {
    times: Vec<f64>,
    mode: BoundaryMode,
    fixed_start: Configuration,
    fixed_end: Configuration,
    n_start: usize,
    n_end: usize,
    bounded: Vec<usize>,
}

impl Problem {
    fn interior(&self) -> usize {
        self.times.len() - 2
    }

    fn len(&self) -> usize {
        6 * self.interior() + self.n_start + self.n_end
    }

    fn path(&self, x: &[f64]) -> DiscretePath {
        let m = self.interior();
        let off = 6 * m;
        let start = match self.mode {
            BoundaryMode::Fixed => self.fixed_start,
            _ => self.mode.start_config(&x[off..off + self.n_start]),
        };
        let end = match self.mode {
            BoundaryMode::Fixed => self.fixed_end,
            _ => self.mode.end_config(&x[off + self.n_start..]),
        };
        let mut nodes = Vec::with_capacity(m + 2);
        nodes.push(start);
        for k in 0..m {
            let v = &x[6 * k..6 * k + 6];
            nodes.push(Configuration::new([
                Vec2::new(v[0], v[1]),
                Vec2::new(v[2], v[3]),
                Vec2::new(v[4], v[5]),
            ]));
        }
        nodes.push(end);
        DiscretePath::new(self.times.clone(), nodes).expect("grid validated")
    }

    fn flatten(&self, p: &DiscretePath, start: &[f64], end: &[f64]) -> Vec<f64> {
        let mut x = Vec::with_capacity(self.len());
        for c in &p.nodes()[1..p.nodes().len() - 1] {
            for q in c.positions() {
                x.push(q.x);
                x.push(q.y);
            }
        }
        x.extend_from_slice(start);
        x.extend_from_slice(end);
        x
    }

    fn eval(&self, x: &[f64]) -> Result<(f64, Vec<f64>)> {
        let p = self.path(x);
        let a = discrete_action(&p)?;
        let g = action_gradient(&p, self.mode)?;
        Ok((a.total, g.to_flat()))
    }

    fn project(&self, x: &mut [f64]) {
        for &i in &self.bounded {
            x[i] = x[i].max(0.0);
        }
    }

    /// Recentres every interior node.
    fn recentre(&self, x: &mut [f64]) {
        for k in 0..self.interior() {
            let v = &mut x[6 * k..6 * k + 6];
            let mx = (v[0] + v[2] + v[4]) / 3.0;
            let my = (v[1] + v[3] + v[5]) / 3.0;
            for b in 0..3 {
                v[2 * b] -= mx;
                v[2 * b + 1] -= my;
            }
        }
    }

    /// Indices of bounded variables at 0 whose gradient pushes outward.
    fn active(&self, x: &[f64], g: &[f64]) -> Vec<bool> {
        let mut act = vec![false; x.len()];
        for &i in &self.bounded {
            if x[i] <= 0.0 && g[i] > 0.0 {
                act[i] = true;
            }
        }
        act
    }
}

fn masked(v: &[f64], act: &[bool]) -> Vec<f64> {
    v.iter()
        .zip(act)
        .map(|(x, a)| if *a { 0.0 } else { *x })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Kinetic Hessian plus a lumped mass shift, eliminated through the
/// boundary parameters by a Schur complement.
struct Preconditioner {
    m: usize,
    // Thomas factorization of the tridiagonal interior block.
    diag: Vec<f64>,
    upper: Vec<f64>,
    first: Vec<f64>,
    last: Vec<f64>,
    dt0: f64,
    dtn: f64,
    start_basis: Vec<[Vec2; 3]>,
    end_basis: Vec<[Vec2; 3]>,
    d_start: f64,
    d_end: f64,
}

impl Preconditioner {
    fn new(times: &[f64], mode: BoundaryMode, sigma: f64) -> Self {
        let n = times.len() - 1;
        let m = n - 1;
        let dt: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
        let mut a = vec![0.0; m];
        let mut c = vec![0.0; m];
        for i in 0..m {
            a[i] = 1.0 / dt[i] + 1.0 / dt[i + 1] + sigma * 0.5 * (dt[i] + dt[i + 1]);
            if i + 1 < m {
                c[i] = -1.0 / dt[i + 1];
            }
        }
        let mut pre = Self {
            m,
            diag: a,
            upper: c,
            first: vec![],
            last: vec![],
            dt0: dt[0],
            dtn: dt[n - 1],
            start_basis: mode.start_basis(),
            end_basis: mode.end_basis(),
            d_start: 1.0 / dt[0] + sigma * 0.5 * dt[0],
            d_end: 1.0 / dt[n - 1] + sigma * 0.5 * dt[n - 1],
        };
        let mut e = vec![0.0; m];
        e[0] = 1.0;
        pre.first = pre.solve_tridiagonal(&e);
        e[0] = 0.0;
        e[m - 1] = 1.0;
        pre.last = pre.solve_tridiagonal(&e);
        pre
    }

    fn solve_tridiagonal(&self, rhs: &[f64]) -> Vec<f64> {
        let m = self.m;
        let mut cp = vec![0.0; m];
        let mut dp = vec![0.0; m];
        let (a, c) = (&self.diag, &self.upper);
        // Symmetric: the sub-diagonal equals the super-diagonal.
        cp[0] = c[0] / a[0];
        dp[0] = rhs[0] / a[0];
        for i in 1..m {
            let den = a[i] - c[i - 1] * cp[i - 1];
            cp[i] = c[i] / den;
            dp[i] = (rhs[i] - c[i - 1] * dp[i - 1]) / den;
        }
        let mut x = vec![0.0; m];
        x[m - 1] = dp[m - 1];
        for i in (0..m - 1).rev() {
            x[i] = dp[i] - cp[i] * x[i + 1];
        }
        x
    }

    fn apply(&self, g: &[f64], act: &[bool]) -> Vec<f64> {
        let m = self.m;
        let ns = self.start_basis.len();
        let ne = self.end_basis.len();
        let mut z = vec![0.0; g.len()];
        let mut col = vec![0.0; m];
        for comp in 0..6 {
            for k in 0..m {
                col[k] = g[6 * k + comp];
            }
            let w = self.solve_tridiagonal(&col);
            for k in 0..m {
                z[6 * k + comp] = w[k];
            }
        }
        let np = ns + ne;
        if np == 0 {
            return z;
        }
        let basis = |p: usize| -> (&[Vec2; 3], f64, usize) {
            if p < ns {
                (&self.start_basis[p], self.dt0, 0)
            } else {
                (&self.end_basis[p - ns], self.dtn, m - 1)
            }
        };
        let comp_of = |b: &[Vec2; 3], c: usize| b[c / 2][c % 2];
        let free: Vec<usize> = (0..np).filter(|&p| !act[6 * m + p]).collect();
        if free.is_empty() {
            return z;
        }
        let nf = free.len();
        let mut s = DMatrix::zeros(nf, nf);
        let mut rhs = DVector::zeros(nf);
        for (r, &p) in free.iter().enumerate() {
            let (bp, dp, kp) = basis(p);
            let d = if p < ns { self.d_start } else { self.d_end };
            let mut cw = 0.0;
            for c in 0..6 {
                cw -= comp_of(bp, c) * z[6 * kp + c] / dp;
            }
            rhs[r] = g[6 * m + p] - cw;
            for (cc, &q) in free.iter().enumerate() {
                let (bq, dq, kq) = basis(q);
                let mut bb = 0.0;
                for c in 0..6 {
                    bb += comp_of(bp, c) * comp_of(bq, c);
                }
                let tinv = match (kp == 0, kq == 0) {
                    (true, true) => self.first[0],
                    (true, false) => self.first[m - 1],
                    (false, true) => self.last[0],
                    (false, false) => self.last[m - 1],
                };
                let same = (p < ns) == (q < ns);
                s[(r, cc)] = if same { d * bb } else { 0.0 } - bb * tinv / (dp * dq);
            }
        }
        let zp = match s.lu().solve(&rhs) {
            Some(v) => v,
            None => return z,
        };
        for (r, &p) in free.iter().enumerate() {
            z[6 * m + p] = zp[r];
            let (bp, dp, kp) = basis(p);
            let prof = if kp == 0 { &self.first } else { &self.last };
            for c in 0..6 {
                let scale = comp_of(bp, c) * zp[r] / dp;
                if scale != 0.0 {
                    for k in 0..m {
                        z[6 * k + c] += prof[k] * scale;
                    }
                }
            }
        }
        z
    }
}

struct Outcome {
    x: Vec<f64>,
    f: f64,
    pg_norm: f64,
    iterations: usize,
    termination: Termination,
    history: Vec<f64>,
}

fn lbfgs(prob: &Problem, mut x: Vec<f64>, opts: &SolverOptions) -> Result<Outcome> {
    let pre = Preconditioner::new(&prob.times, prob.mode, opts.mass_shift);
    prob.project(&mut x);
    let (mut f, mut g) = prob.eval(&x)?;
    let mut history = vec![f];
    let mut mem: VecDeque<(Vec<f64>, Vec<f64>, f64)> = VecDeque::new();
    let mut last_active: Vec<bool> = prob.active(&x, &g);
    let mut iterations = 0;
    let mut termination = Termination::IterationCap;

    while iterations < opts.max_iterations {
        let act = prob.active(&x, &g);
        let pg = masked(&g, &act);
        if inf_norm(&pg) < opts.gradient_tol {
            termination = Termination::GradientTolerance;
            break;
        }
        let h = history.len();
        if h > opts.stall_window {
            let old = history[h - 1 - opts.stall_window];
            if (old - f).abs() <= opts.stall_tol * f.abs() {
                termination = Termination::Stalled;
                break;
            }
        }
        if act != last_active {
            mem.clear();
            last_active = act.clone();
        }

        let mut accepted = None;
        for attempt in 0..2 {
            if attempt == 1 {
                mem.clear();
            }
            let d = direction(&pg, &mem, &pre, &act);
            let slope = dot(&pg, &d);
            if !(slope < 0.0) {
                mem.clear();
                continue;
            }
            if let Some(step) = line_search(prob, &x, f, &g, &d)? {
                accepted = Some(step);
                break;
            }
            if -slope <= 1e-12 * f.abs() {
                break;
            }
        }
        let Some((xn, fn_, gn)) = accepted else {
            let d = pre.apply(&pg, &act);
            if -dot(&pg, &d) <= 1e-12 * f.abs() || inf_norm(&pg) < 1e3 * opts.gradient_tol {
                termination = Termination::Stalled;
                break;
            }
            return Err(Error::LineSearch {
                iterations,
                best_action: f,
            });
        };

        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let actn = prob.active(&xn, &gn);
        let y: Vec<f64> = masked(&gn, &actn)
            .iter()
            .zip(&pg)
            .map(|(a, b)| a - b)
            .collect();
        let sy = dot(&s, &y);
        if sy > 1e-12 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            mem.push_back((s, y, 1.0 / sy));
            if mem.len() > opts.memory {
                mem.pop_front();
            }
        }
        x = xn;
        f = fn_;
        g = gn;
        history.push(f);
        iterations += 1;
    }
    let act = prob.active(&x, &g);
    Ok(Outcome {
        pg_norm: inf_norm(&masked(&g, &act)),
        x,
        f,
        iterations,
        termination,
        history,
    })
}

fn direction(
    pg: &[f64],
    mem: &VecDeque<(Vec<f64>, Vec<f64>, f64)>,
    pre: &Preconditioner,
    act: &[bool],
) -> Vec<f64> {
    let mut q = pg.to_vec();
    let mut alphas = Vec::with_capacity(mem.len());
    for (s, y, rho) in mem.iter().rev() {
        let a = rho * dot(s, &q);
        for (qi, yi) in q.iter_mut().zip(y) {
            *qi -= a * yi;
        }
        alphas.push(a);
    }
    let mut r = pre.apply(&q, act);
    if let Some((s, y, _)) = mem.back() {
        let hy = pre.apply(y, act);
        let gamma = dot(s, y) / dot(y, &hy);
        if gamma.is_finite() && gamma > 0.0 {
            r.iter_mut().for_each(|v| *v *= gamma);
        }
    }
    for ((s, y, rho), a) in mem.iter().zip(alphas.iter().rev()) {
        let b = rho * dot(y, &r);
        for (ri, si) in r.iter_mut().zip(s) {
            *ri += (a - b) * si;
        }
    }
    let mut d = masked(&r, act);
    d.iter_mut().for_each(|v| *v = -*v);
    d
}

type Step = (Vec<f64>, f64, Vec<f64>);

fn line_search(prob: &Problem, x: &[f64], f: f64, g: &[f64], d: &[f64]) -> Result<Option<Step>> {
    const C1: f64 = 1e-4;
    let mut alpha = 1.0;
    for _ in 0..60 {
        let mut xt: Vec<f64> = x.iter().zip(d).map(|(a, b)| a + alpha * b).collect();
        prob.project(&mut xt);
        prob.recentre(&mut xt);
        let decrease: f64 = g.iter().zip(xt.iter().zip(x)).map(|(gi, (a, b))| gi * (a - b)).sum();
        match prob.eval(&xt) {
            Ok((ft, gt)) if ft.is_finite() && ft <= f + C1 * decrease && ft <= f => {
                return Ok(Some((xt, ft, gt)));
            }
            Ok(_) | Err(Error::Collision { .. }) => alpha *= 0.5,
            Err(e) => return Err(e),
        }
    }
    Ok(None)
}

fn seed_params(mode: BoundaryMode, p: &DiscretePath) -> (Vec<f64>, Vec<f64>) {
    match mode {
        BoundaryMode::Fixed => (vec![], vec![]),
        BoundaryMode::Qs1Qe1 => {
            let (a1, a2) = invert_qs1(p.start());
            let (b1, b2) = fit_qe1(p.end());
            (vec![a1.max(0.0), a2.max(0.0)], vec![b1, b2])
        }
        BoundaryMode::Qs3Qe3 => {
            let (a1, c1) = fit_qs3(p.start());
            let (b1, b2) = fit_qe1(p.end());
            (vec![a1, c1], vec![b1, b2])
        }
    }
}

fn seed_path(seed: &Seed, times: Vec<f64>) -> Result<DiscretePath> {
    match seed {
        Seed::CollinearTestPath => test_path_discrete(times),
        Seed::LagrangeQuarter => LagrangeCircle::default().quarter_path(times),
        Seed::Path(p) => p.resample(times),
    }
}

fn run(prob: &Problem, seed: &DiscretePath, start: Vec<f64>, end: Vec<f64>, opts: &SolverOptions) -> Result<MinimizeResult> {
    let x0 = prob.flatten(seed, &start, &end);
    let out = lbfgs(prob, x0, opts)?;
    let path = prob.path(&out.x);
    let m = 6 * prob.interior();
    let action = discrete_action(&path)?;
    debug_assert!((action.total - out.f).abs() <= 1e-12 * out.f.abs());
    Ok(MinimizeResult {
        min_gauss_distance: min_gauss_distance(&path),
        path,
        family: prob.mode,
        start_params: out.x[m..m + prob.n_start].to_vec(),
        end_params: out.x[m + prob.n_start..].to_vec(),
        action,
        gradient_norm: out.pg_norm,
        iterations: out.iterations,
        termination: out.termination,
        history: out.history,
    })
}

fn problem(times: Vec<f64>, mode: BoundaryMode, start: Configuration, end: Configuration) -> Problem {
    let n_start = mode.start_basis().len();
    let n_end = mode.end_basis().len();
    let m = 6 * (times.len() - 2);
    let bounded = match mode {
        BoundaryMode::Qs1Qe1 => vec![m, m + 1],
        _ => vec![],
    };
    Problem {
        times,
        mode,
        fixed_start: start,
        fixed_end: end,
        n_start,
        n_end,
        bounded,
    }
}

/// Minimizes over interior nodes with both end configurations of `p` fixed.
pub fn minimize_inner(p: &DiscretePath, opts: &SolverOptions) -> Result<MinimizeResult> {
    if p.segments() < 2 {
        return Err(Error::InvalidPath("no interior nodes".into()));
    }
    let prob = problem(p.times().to_vec(), BoundaryMode::Fixed, *p.start(), *p.end());
    run(&prob, p, vec![], vec![], opts)
}

/// Jointly minimizes over interior nodes and the boundary parameters of
/// `cfg.family`.
pub fn minimize_free(cfg: &MinimizeConfig) -> Result<MinimizeResult> {
    cfg.validate()?;
    let mut sizes = vec![cfg.grid_size];
    for _ in 0..cfg.continuation_levels {
        let n = sizes.last().unwrap() / 2;
        if n < 16 {
            break;
        }
        sizes.push(n);
    }
    sizes.reverse();

    let mut current = seed_path(&cfg.seed, graded_grid(sizes[0], cfg.grading))?;
    let (mut start, mut end) = seed_params(cfg.family, &current);
    let mut result = None;
    for (level, &n) in sizes.iter().enumerate() {
        let times = graded_grid(n, cfg.grading);
        if level > 0 {
            current = current.resample(times.clone())?;
        }
        let prob = problem(times, cfg.family, *current.start(), *current.end());
        let r = run(&prob, &current, start.clone(), end.clone(), &cfg.solver)?;
        current = r.path.clone();
        start = r.start_params.clone();
        end = r.end_params.clone();
        result = Some(r);
    }
    Ok(result.unwrap())
}

/// One named first-variation condition and its residual.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub name: String,
    pub at: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FirstVariationReport {
    pub residuals: Vec<Residual>,
}

impl FirstVariationReport {
    pub fn max_at(&self, t: f64) -> f64 {
        self.residuals
            .iter()
            .filter(|r| r.at == t)
            .map(|r| r.value.abs())
            .fold(0.0, f64::max)
    }

    pub fn max(&self) -> f64 {
        self.residuals.iter().map(|r| r.value.abs()).fold(0.0, f64::max)
    }
}

/// Second-order one-sided derivative at the first node of three.
pub(crate) fn one_sided(t: [f64; 3], f: [Vec2; 3]) -> Vec2 {
    let h1 = t[1] - t[0];
    let h2 = t[2] - t[1];
    f[0] * (-(2.0 * h1 + h2) / (h1 * (h1 + h2))) + f[1] * ((h1 + h2) / (h1 * h2))
        - f[2] * (h1 / (h2 * (h1 + h2)))
}

/// Boundary velocities of `p` estimated by one-sided three-point
/// differences.
pub fn boundary_velocities(p: &DiscretePath) -> ([Vec2; 3], [Vec2; 3]) {
    let t = p.times();
    let n = p.nodes();
    let l = t.len() - 1;
    let mut v0 = [Vec2::zeros(); 3];
    let mut v1 = [Vec2::zeros(); 3];
    for i in 0..3 {
        v0[i] = one_sided([t[0], t[1], t[2]], [n[0].position(i), n[1].position(i), n[2].position(i)]);
        // Mirror time so the stencil again runs away from the boundary.
        v1[i] = -one_sided(
            [-t[l], -t[l - 1], -t[l - 2]],
            [n[l].position(i), n[l - 1].position(i), n[l - 2].position(i)],
        );
    }
    (v0, v1)
}

/// Residuals of the natural boundary conditions of `family` on `p`.
pub fn first_variation_residuals(p: &DiscretePath, family: BoundaryMode) -> FirstVariationReport {
    let (v0, v1) = boundary_velocities(p);
    let r = |name: &str, at: f64, value: f64| Residual {
        name: name.to_string(),
        at,
        value,
    };
    let mut out = match family {
        BoundaryMode::Qs1Qe1 => vec![
            r("v1x(0)", 0.0, v0[0].x),
            r("v2x(0)", 0.0, v0[1].x),
            r("v3x(0)", 0.0, v0[2].x),
        ],
        BoundaryMode::Qs3Qe3 => vec![
            r("v1x(0)", 0.0, v0[0].x),
            r("v2x(0)+v3x(0)", 0.0, v0[1].x + v0[2].x),
            r("v2y(0)-v3y(0)", 0.0, v0[1].y - v0[2].y),
        ],
        BoundaryMode::Fixed => vec![],
    };
    if family != BoundaryMode::Fixed {
        out.push(r("v1y(1)", 1.0, v1[0].y));
        out.push(r("v2y(1)+v3y(1)", 1.0, v1[1].y + v1[2].y));
        out.push(r("v2x(1)-v3x(1)", 1.0, v1[1].x - v1[2].x));
    }
    FirstVariationReport { residuals: out }
}

pub fn first_variation_report(r: &MinimizeResult) -> FirstVariationReport {
    first_variation_residuals(&r.path, r.family)
}
