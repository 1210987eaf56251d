//! Jacobi coordinates `Z1 = q1 - q2`, `Z2 = q3 - (q1 + q2)/2`, the acute
//! angle Δθ between them, the potential written in `(|Z1|, |Z2|, Δθ)` and
//! the quadrant-folding map that never increases the action.


use crate::action::potential;
use crate::error::{Error, Result};
use crate::model::{Configuration, DiscretePath, Vec2};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiPair {
    pub z1: Vec2,
    pub z2: Vec2,
}

impl JacobiPair {
    pub fn new(z1: Vec2, z2: Vec2) -> Self {
        Self { z1, z2 }
    }
}

pub fn to_jacobi(c: &Configuration) -> JacobiPair {
    let q = c.positions();
    JacobiPair {
        z1: q[0] - q[1],
        z2: q[2] - (q[0] + q[1]) / 2.0,
    }
}

pub fn from_jacobi(j: &JacobiPair) -> Configuration {
    let base = -j.z2 / 3.0;
    Configuration::from_centered([base + j.z1 / 2.0, base - j.z1 / 2.0, j.z2 * (2.0 / 3.0)])
}

/// Acute angle in `[0, π/2]` between the lines spanned by `Z1` and `Z2`.
///
/// Evaluated as `atan2(|Z1 × Z2|, |Z1 · Z2|)`, which equals the folded
/// `arccos` of the normalized dot product and stays accurate for nearly
/// parallel vectors.
pub fn delta_theta(j: &JacobiPair) -> Result<f64> {
    if j.z1.norm() == 0.0 || j.z2.norm() == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    Ok(j.z1.perp(&j.z2).abs().atan2(j.z1.dot(&j.z2).abs()))
}

/// `1/r1 + 1/√(r1²/4 + r2² + r1 r2 cos Δθ) + 1/√(r1²/4 + r2² − r1 r2 cos Δθ)`.
///
/// The radicands are summed as `(r1/2 ± r2 cos Δθ)² + (r2 sin Δθ)²` to avoid
/// cancellation near a collision with body 3.
pub fn potential_jacobi(r1: f64, r2: f64, dtheta: f64) -> Result<f64> {
    let (s, c) = dtheta.sin_cos();
    let h = r2 * s;
    let d13 = (r1 / 2.0 + r2 * c).hypot(h);
    let d23 = (r1 / 2.0 - r2 * c).hypot(h);
    if !(r1 > 0.0) {
        return Err(Error::Collision {
            i: 0,
            j: 1,
            distance: r1,
        });
    }
    if !(d13 > 0.0) || !(d23 > 0.0) {
        let (i, j, distance) = if d13 <= d23 { (0, 2, d13) } else { (1, 2, d23) };
        return Err(Error::Collision { i, j, distance });
    }
    Ok(1.0 / r1 + 1.0 / d13 + 1.0 / d23)
}

/// Potential of a Jacobi pair through the `(|Z1|, |Z2|, Δθ)` form; the
/// `Z2 = 0` case is `5 / |Z1|`.
pub fn potential_of_pair(j: &JacobiPair) -> Result<f64> {
    let r1 = j.z1.norm();
    let r2 = j.z2.norm();
    if r2 == 0.0 {
        return potential_jacobi(r1, 0.0, 0.0);
    }
    let dtheta = delta_theta(j).map_err(|_| Error::Collision {
        i: 0,
        j: 1,
        distance: r1,
    })?;
    potential_jacobi(r1, r2, dtheta)
}

/// `Z̃1 = (|Z1x|, |Z1y|)`, `Z̃2 = (|Z2x|, -|Z2y|)`.
pub fn fold(j: &JacobiPair) -> JacobiPair {
    JacobiPair {
        z1: j.z1.abs(),
        z2: Vec2::new(j.z2.x.abs(), -j.z2.y.abs()),
    }
}

/// Closed quadrants (0-based, counterclockwise from the first) containing
/// `v`, treating components within `band · |v|` of zero as on the axis.
fn quadrants(v: Vec2, band: f64) -> [bool; 4] {
    let eps = band * v.norm();
    let (px, nx) = (v.x >= -eps, v.x <= eps);
    let (py, ny) = (v.y >= -eps, v.y <= eps);
    [px && py, nx && py, nx && ny, px && ny]
}

fn adjacent_with_band(j: &JacobiPair, band: f64) -> bool {
    let a = quadrants(j.z1, band);
    let b = quadrants(j.z2, band);
    (0..4).any(|i| a[i] && (b[(i + 1) % 4] || b[(i + 3) % 4]))
}

/// Axis band used for closed-quadrant membership.
pub const ADJACENCY_BAND: f64 = 1e-12;
/// Wider band; membership that changes between the two bands is reported as
/// indeterminate.
pub const ADJACENCY_OUTER_BAND: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Adjacency {
    Adjacent,
    NotAdjacent,
    Indeterminate,
}

pub fn adjacency(j: &JacobiPair) -> Adjacency {
    match (
        adjacent_with_band(j, ADJACENCY_BAND),
        adjacent_with_band(j, ADJACENCY_OUTER_BAND),
    ) {
        (true, true) => Adjacency::Adjacent,
        (false, false) => Adjacency::NotAdjacent,
        _ => Adjacency::Indeterminate,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoldingCheck {
    /// `U(Z1, Z2)`.
    pub lhs: f64,
    /// `U(Z̃1, Z̃2)`.
    pub rhs: f64,
    pub adjacency: Adjacency,
}

pub fn folding_inequality_check(j: &JacobiPair) -> Result<FoldingCheck> {
    if j.z1.norm() == 0.0 {
        return Err(Error::UndefinedAngle);
    }
    if j.z2.norm() == 0.0 {
        let u = potential_jacobi(j.z1.norm(), 0.0, 0.0)?;
        return Ok(FoldingCheck {
            lhs: u,
            rhs: u,
            adjacency: Adjacency::Adjacent,
        });
    }
    Ok(FoldingCheck {
        lhs: potential_of_pair(j)?,
        rhs: potential_of_pair(&fold(j))?,
        adjacency: adjacency(j),
    })
}

/// Inserts nodes wherever a Jacobi component of the linear interpolant
/// changes sign inside a segment. The interpolant is unchanged; on each new
/// segment every component keeps one sign, so folding commutes with
/// interpolation.
pub fn split_at_axis_crossings(p: &DiscretePath) -> Result<DiscretePath> {
    let t = p.times();
    let n = p.nodes();
    let mut times = vec![t[0]];
    let mut nodes = vec![n[0]];
    for k in 0..p.segments() {
        let a = to_jacobi(&n[k]);
        let b = to_jacobi(&n[k + 1]);
        let ca = [a.z1.x, a.z1.y, a.z2.x, a.z2.y];
        let cb = [b.z1.x, b.z1.y, b.z2.x, b.z2.y];
        let mut cuts: Vec<f64> = ca
            .iter()
            .zip(cb.iter())
            .filter(|(x, y)| **x * **y < 0.0)
            .map(|(x, y)| x / (x - y))
            .collect();
        cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
        let dt = t[k + 1] - t[k];
        for s in cuts {
            let ts = t[k] + s * dt;
            if ts > *times.last().unwrap() && ts < t[k + 1] {
                times.push(ts);
                nodes.push(n[k].lerp(&n[k + 1], s));
            }
        }
        times.push(t[k + 1]);
        nodes.push(n[k + 1]);
    }
    DiscretePath::new(times, nodes)
}

/// Folds every node of `p` in Jacobi coordinates.
pub fn fold_nodes(p: &DiscretePath) -> DiscretePath {
    p.map_nodes(|c| from_jacobi(&fold(&to_jacobi(c))))
}

/// Splits `p` at axis crossings and folds the result. Returns the refined
/// original together with its folded image on the same grid.
pub fn fold_path(p: &DiscretePath) -> Result<(DiscretePath, DiscretePath)> {
    let refined = split_at_axis_crossings(p)?;
    let folded = fold_nodes(&refined);
    Ok((refined, folded))
}

/// Cartesian potential of the configuration rebuilt from `j`.
pub fn cartesian_potential(j: &JacobiPair) -> Result<f64> {
    potential(&from_jacobi(j))
}

/// Kinetic energy in Jacobi form, `¼|Ż1|² + ⅓|Ż2|²`.
pub fn kinetic_jacobi(z1_dot: Vec2, z2_dot: Vec2) -> f64 {
    0.25 * z1_dot.norm_squared() + z2_dot.norm_squared() / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::action::{kinetic, segment_breakdown};
    use crate::model::{graded_grid, uniform_grid};
    use crate::states::broucke_henon_t0;
    use proptest::prelude::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn v(x: f64, y: f64) -> Vec2 {
        Vec2::new(x, y)
    }

    fn pair(a: (f64, f64), b: (f64, f64)) -> JacobiPair {
        JacobiPair::new(v(a.0, a.1), v(b.0, b.1))
    }

    #[test]
    fn to_jacobi_examples() {
        let j = to_jacobi(&Configuration::from_xy([[-0.5, 0.0], [0.5, 0.0], [0.0, 0.0]]));
        assert_eq!(j.z1, v(-1.0, 0.0));
        assert_eq!(j.z2, v(0.0, 0.0));

        let j = to_jacobi(&broucke_henon_t0().configuration());
        assert!((j.z1 - v(-0.1710, 0.0)).norm() < 1e-12);
        assert!((j.z2 - v(2.4528, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn qs1_in_jacobi_coordinates() {
        // Z1 = (-3 a1, 0), Z2 = (3/2 a1 + 3 a2, 0).
        let (a1, a2) = (1.0, 1.0);
        let c = crate::model::qs1_unchecked(a1, a2);
        let j = to_jacobi(&c);
        assert!((j.z1 - v(-3.0 * a1, 0.0)).norm() < 1e-15);
        assert!((j.z2 - v(1.5 * a1 + 3.0 * a2, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn from_jacobi_examples() {
        let c = from_jacobi(&pair((0.0, 0.0), (0.0, 0.0)));
        assert_eq!(c, Configuration::collision());
        let c = from_jacobi(&pair((1.0, 0.0), (0.0, 1.0)));
        let expect = [[0.5, -1.0 / 3.0], [-0.5, -1.0 / 3.0], [0.0, 2.0 / 3.0]];
        for (i, e) in expect.iter().enumerate() {
            assert!((c.position(i) - v(e[0], e[1])).norm() < 1e-15);
        }
    }

    #[test]
    fn delta_theta_examples() {
        assert_eq!(delta_theta(&pair((1.0, 0.0), (2.0, 0.0))).unwrap(), 0.0);
        assert_eq!(delta_theta(&pair((1.0, 0.0), (-3.0, 0.0))).unwrap(), 0.0);
        assert!((delta_theta(&pair((1.0, 0.0), (0.0, 5.0))).unwrap() - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(
            delta_theta(&pair((0.0, 0.0), (1.0, 0.0))),
            Err(Error::UndefinedAngle)
        );
        let t = delta_theta(&pair((1e-3, 1e-3), (3e5, 3e5))).unwrap();
        assert!(t.is_finite() && t < 1e-15);
        let d = 1e-9;
        let t = delta_theta(&pair((1.0, 0.0), (1.0, d))).unwrap();
        assert!((t - d).abs() < 1e-22);
    }

    #[test]
    fn potential_jacobi_examples() {
        let u = potential_jacobi(2.0, 1.0, FRAC_PI_2).unwrap();
        let oracle = potential(&from_jacobi(&pair((2.0, 0.0), (0.0, 1.0)))).unwrap();
        assert!((u - oracle).abs() < 1e-14);
        assert!((u - (0.5 + 2.0 / 2f64.sqrt())).abs() < 1e-14);
        assert!((potential_jacobi(0.7, 0.0, 0.3).unwrap() - 5.0 / 0.7).abs() < 1e-12);
        assert!(potential_jacobi(0.0, 1.0, 0.0).is_err());
        // Z2 = Z1/2: bodies 1 and 3 coincide.
        assert!(potential_jacobi(2.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn fold_examples() {
        let f = fold(&pair((-1.0, 2.0), (-3.0, 4.0)));
        assert_eq!(f, pair((1.0, 2.0), (3.0, -4.0)));
        assert_eq!(fold(&f), f);
    }

    #[test]
    fn folding_examples() {
        let c = folding_inequality_check(&pair((1.0, 1.0), (1.0, -1.0))).unwrap();
        assert_eq!(c.adjacency, Adjacency::Adjacent);
        assert!((c.lhs - c.rhs).abs() < 1e-12);

        let c = folding_inequality_check(&pair((1.0, 1.0), (-1.0, 1.0))).unwrap();
        assert_eq!(c.adjacency, Adjacency::Adjacent);
        assert!((c.lhs - c.rhs).abs() < 1e-12);

        let c = folding_inequality_check(&pair((1.0, 1.0), (-1.0, -1.0))).unwrap();
        assert_eq!(c.adjacency, Adjacency::NotAdjacent);
        assert!(c.lhs > c.rhs + 1e-3);

        let c = folding_inequality_check(&pair((2.0, 0.0), (0.0, 0.0))).unwrap();
        assert_eq!(c.lhs, 2.5);
        assert_eq!(c.rhs, 2.5);
    }

    #[test]
    fn adjacency_near_an_axis_is_indeterminate() {
        let j = pair((1.0, 1.0), (-1.0, -1e-10));
        assert_eq!(adjacency(&j), Adjacency::Indeterminate);
        let j = pair((1.0, 1.0), (-1.0, -1e-13));
        assert_eq!(adjacency(&j), Adjacency::Adjacent);
    }

    #[test]
    fn potential_decreases_in_delta_theta() {
        for (r1, r2) in [(1.0, 1.0), (0.3, 2.0), (2.0, 0.4), (1.0, 0.49)] {
            let u: Vec<f64> = (0..100)
                .map(|k| potential_jacobi(r1, r2, FRAC_PI_2 * k as f64 / 99.0).unwrap())
                .collect();
            for w in u.windows(2) {
                assert!(w[1] - w[0] <= 1e-12);
            }
            for w in u[1..99].windows(2) {
                assert!(w[1] < w[0]);
            }
        }
    }

    #[test]
    fn jacobi_kinetic_matches_cartesian() {
        let dq = Configuration::from_xy([[0.3, -1.2], [0.7, 0.1], [-2.0, 0.4]]);
        let j = to_jacobi(&dq);
        let k = kinetic(dq.positions());
        assert!((kinetic_jacobi(j.z1, j.z2) - k).abs() < 1e-14);
    }

    #[test]
    fn split_path_keeps_the_interpolant() {
        let p = DiscretePath::from_fn(uniform_grid(7), |t| {
            let a = 2.0 * PI * t;
            Configuration::from_xy([[a.cos(), a.sin()], [-a.sin(), 0.5 * a.cos()], [0.3, -0.2]])
        })
        .unwrap();
        let s = split_at_axis_crossings(&p).unwrap();
        assert!(s.segments() > p.segments());
        for k in 0..=50 {
            let t = k as f64 / 50.0;
            let (a, b) = (p.eval(t), s.eval(t));
            for i in 0..3 {
                assert!((a.position(i) - b.position(i)).norm() < 1e-12);
            }
        }
    }

    fn vec2() -> impl Strategy<Value = Vec2> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(x, y)| Vec2::new(x, y))
    }

    fn non_degenerate(j: &JacobiPair) -> bool {
        let c = from_jacobi(j);
        c.min_distance().0 > 1e-3 && j.z2.norm() > 1e-6
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip(z1 in vec2(), z2 in vec2()) {
            let j = JacobiPair::new(z1, z2);
            let c = from_jacobi(&j);
            prop_assert!(c.center_of_mass().norm() < 1e-12);
            let back = to_jacobi(&c);
            prop_assert!((back.z1 - z1).norm() < 1e-12);
            prop_assert!((back.z2 - z2).norm() < 1e-12);
        }

        #[test]
        fn jacobi_potential_matches_cartesian(z1 in vec2(), z2 in vec2()) {
            let j = JacobiPair::new(z1, z2);
            prop_assume!(non_degenerate(&j));
            let a = potential_of_pair(&j).unwrap();
            let b = cartesian_potential(&j).unwrap();
            prop_assert!((a - b).abs() <= 1e-12 * a.max(1.0), "{} vs {}", a, b);
        }

        #[test]
        fn folding_never_increases_the_potential(z1 in vec2(), z2 in vec2()) {
            let j = JacobiPair::new(z1, z2);
            prop_assume!(non_degenerate(&j));
            let c = folding_inequality_check(&j).unwrap();
            let scale = c.lhs.max(1.0);
            prop_assert!(c.lhs >= c.rhs - 1e-12 * scale);
            match c.adjacency {
                Adjacency::Adjacent => prop_assert!((c.lhs - c.rhs).abs() <= 1e-10 * scale),
                Adjacency::NotAdjacent => prop_assert!(c.lhs > c.rhs),
                Adjacency::Indeterminate => {}
            }
        }

        #[test]
        fn fold_preserves_norms(z1 in vec2(), z2 in vec2()) {
            let f = fold(&JacobiPair::new(z1, z2));
            prop_assert_eq!(f.z1.norm(), z1.norm());
            prop_assert_eq!(f.z2.norm(), z2.norm());
            prop_assert!(f.z1.x >= 0.0 && f.z1.y >= 0.0);
            prop_assert!(f.z2.x >= 0.0 && f.z2.y <= 0.0);
        }

        #[test]
        fn delta_theta_invariances(z1 in vec2(), z2 in vec2(), s in 0.1..10.0f64) {
            let j = JacobiPair::new(z1, z2);
            prop_assume!(z1.norm() > 1e-6 && z2.norm() > 1e-6);
            let d = delta_theta(&j).unwrap();
            prop_assert!((0.0..=FRAC_PI_2).contains(&d));
            let rx = |v: Vec2| Vec2::new(v.x, -v.y);
            let ry = |v: Vec2| Vec2::new(-v.x, v.y);
            let variants = [
                JacobiPair::new(z1 * s, z2),
                JacobiPair::new(z1, z2 * s),
                JacobiPair::new(-z1, z2),
                JacobiPair::new(z1, -z2),
                JacobiPair::new(rx(z1), rx(z2)),
                JacobiPair::new(ry(z1), ry(z2)),
            ];
            for (k, w) in variants.iter().enumerate() {
                let e = delta_theta(w).unwrap();
                prop_assert!((e - d).abs() < 1e-7, "variant {}: {} vs {}", k, e, d);
            }
        }

        #[test]
        fn reflecting_one_vector_maps_into_the_codomain(z1 in vec2(), z2 in vec2()) {
            prop_assume!(z1.norm() > 1e-6 && z2.norm() > 1e-6);
            let e = delta_theta(&JacobiPair::new(Vec2::new(z1.x, -z1.y), z2)).unwrap();
            prop_assert!((0.0..=FRAC_PI_2).contains(&e));
        }

        #[test]
        fn folded_discrete_path_has_smaller_action(
            nodes in prop::collection::vec((vec2(), vec2()), 9),
            grading in 1.0..2.0f64,
        ) {
            let times = graded_grid(8, grading);
            let configs: Vec<Configuration> = nodes
                .iter()
                .map(|(a, b)| from_jacobi(&JacobiPair::new(*a, *b)))
                .collect();
            let p = DiscretePath::new(times, configs).unwrap();
            let (refined, folded) = fold_path(&p).unwrap();
            let (orig, new) = match (segment_breakdown(&refined), segment_breakdown(&folded)) {
                (Ok(a), Ok(b)) => (a, b),
                _ => return Err(TestCaseError::reject("collision at a Gauss point")),
            };
            let g0 = crate::action::gauss_points(&refined);
            let g1 = crate::action::gauss_points(&folded);
            for (a, b) in g0.iter().zip(g1.iter()) {
                let (ua, ub) = (potential(a).unwrap(), potential(b).unwrap());
                prop_assert!(ub <= ua * (1.0 + 1e-12));
            }
            let mut total = (0.0, 0.0);
            for (a, b) in orig.iter().zip(new.iter()) {
                // Segments inside one quadrant give equality up to the
                // rounding of short Cartesian differences.
                prop_assert!(b.kinetic <= a.kinetic * (1.0 + 1e-9));
                total.0 += a.total;
                total.1 += b.total;
            }
            prop_assert!(total.1 <= total.0 * (1.0 + 1e-12));
        }
    }
}
