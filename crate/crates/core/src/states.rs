//! Published phase-space data for the two period-4 orbits, reproduced
//! verbatim at four decimals.

use crate::model::{PhaseState, Vec2};

/// Broucke-Hénon orbit at t = 0: collinear on the x-axis with purely
/// vertical velocities.
pub fn broucke_henon_t0() -> PhaseState {
    PhaseState::raw(
        [
            Vec2::new(-0.9031, 0.0),
            Vec2::new(-0.7321, 0.0),
            Vec2::new(1.6352, 0.0),
        ],
        [
            Vec2::new(0.0, -2.4504),
            Vec2::new(0.0, 2.2283),
            Vec2::new(0.0, 0.2221),
        ],
        0.0,
    )
}

/// Schubart orbit at t = 1: Euler configuration with body 1 at the origin
/// and purely horizontal velocities.
///
/// The published velocity signs describe the time-reversed quarter: body 1
/// heads toward body 2. Use [`PhaseState::time_reversed`] to get the state
/// on the quarter that starts with the 1-2 collision at t = 0.
pub fn schubart_t1() -> PhaseState {
    PhaseState::raw(
        [
            Vec2::new(0.0, 0.0),
            Vec2::new(-1.7141, 0.0),
            Vec2::new(1.7141, 0.0),
        ],
        [
            Vec2::new(-0.6328, 0.0),
            Vec2::new(0.3164, 0.0),
            Vec2::new(0.3164, 0.0),
        ],
        1.0,
    )
}

/// Broucke-Hénon t = 0 data rounded to two decimals, a shooting seed.
pub fn broucke_henon_rounded() -> PhaseState {
    PhaseState::new(
        [
            Vec2::new(-0.90, 0.0),
            Vec2::new(-0.73, 0.0),
            Vec2::new(1.63, 0.0),
        ],
        [
            Vec2::new(0.0, -2.45),
            Vec2::new(0.0, 2.23),
            Vec2::new(0.0, 0.22),
        ],
        0.0,
    )
}
