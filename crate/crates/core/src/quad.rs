//! Gauss-Legendre rules on [0, 1] and an adaptive integrator built on them.

/// Two-point rule on [0, 1]: `(nodes, weights)`.
pub const GAUSS2: ([f64; 2], [f64; 2]) = {
    const D: f64 = 0.288_675_134_594_812_9; // 1 / (2 sqrt 3)
    ([0.5 - D, 0.5 + D], [0.5, 0.5])
};

/// Five-point rule on [0, 1].
pub const GAUSS5: ([f64; 5], [f64; 5]) = {
    const X1: f64 = 0.538_469_310_105_683_1;
    const X2: f64 = 0.906_179_845_938_664;
    const W0: f64 = 0.568_888_888_888_888_9;
    const W1: f64 = 0.478_628_670_499_366_5;
    const W2: f64 = 0.236_926_885_056_189_1;
    (
        [
            0.5 * (1.0 - X2),
            0.5 * (1.0 - X1),
            0.5,
            0.5 * (1.0 + X1),
            0.5 * (1.0 + X2),
        ],
        [0.5 * W2, 0.5 * W1, 0.5 * W0, 0.5 * W1, 0.5 * W2],
    )
};

/// Five-point Gauss-Legendre approximation of `∫_a^b f`.
pub fn gauss5(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let h = b - a;
    GAUSS5
        .0
        .iter()
        .zip(GAUSS5.1.iter())
        .map(|(x, w)| w * f(a + h * x))
        .sum::<f64>()
        * h
}

/// Adaptive bisection on the five-point rule until the two-half estimate
/// agrees with the whole-interval estimate to `tol` (absolute, distributed
/// over subintervals).
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn recurse(f: &impl Fn(f64) -> f64, a: f64, b: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let left = gauss5(f, a, m);
        let right = gauss5(f, m, b);
        let split = left + right;
        if depth == 0 || (split - whole).abs() <= tol {
            return split;
        }
        recurse(f, a, m, left, 0.5 * tol, depth - 1) + recurse(f, m, b, right, 0.5 * tol, depth - 1)
    }
    let whole = gauss5(&f, a, b);
    recurse(&f, a, b, whole, tol, 50)
}
