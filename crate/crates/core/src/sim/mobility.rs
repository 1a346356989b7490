//! Random waypoint mobility with zero pause time.

use rand::Rng;

use crate::geometry::Point;
use crate::num::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobilityState<T> {
    pub waypoint: Point<T>,
    /// meters per second
    pub speed: T,
    pub paused_until: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RandomWaypoint<T> {
    pub arena: T,
    pub speed_min: T,
    pub speed_max: T,
}

impl<T: Scalar + rand::distributions::uniform::SampleUniform> RandomWaypoint<T> {
    pub fn draw_waypoint<R: Rng + ?Sized>(&self, rng: &mut R) -> Point<T> {
        Point::new(
            rng.gen_range(T::zero()..=self.arena),
            rng.gen_range(T::zero()..=self.arena),
        )
    }

    pub fn draw_speed<R: Rng + ?Sized>(&self, rng: &mut R) -> T {
        if self.speed_max > self.speed_min {
            rng.gen_range(self.speed_min..=self.speed_max)
        } else {
            self.speed_min
        }
    }

    pub fn initial_state<R: Rng + ?Sized>(&self, rng: &mut R) -> MobilityState<T> {
        MobilityState { waypoint: self.draw_waypoint(rng), speed: self.draw_speed(rng), paused_until: 0.0 }
    }

    /// Advances `pos` by `speed * dt` toward the waypoint. On arrival a new
    /// waypoint and speed are drawn; leftover travel time is discarded.
    pub fn step<R: Rng + ?Sized>(
        &self,
        pos: Point<T>,
        state: &mut MobilityState<T>,
        dt: T,
        rng: &mut R,
    ) -> Point<T> {
        let (next, arrived) = pos.step_toward(&state.waypoint, state.speed * dt);
        if arrived {
            state.waypoint = self.draw_waypoint(rng);
            state.speed = self.draw_speed(rng);
        }
        next.clamp_to(self.arena)
    }
}
