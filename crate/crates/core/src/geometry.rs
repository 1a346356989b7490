//! Planar geometry for node placement and movement.

use crate::num::Scalar;

/// A point in the square arena, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Self) -> T {
        (self.x - other.x).hypot(self.y - other.y)
    }

    /// Moves at most `step` meters from `self` toward `target`. Returns the
    /// new point and whether the target was reached.
    pub fn step_toward(&self, target: &Self, step: T) -> (Self, bool) {
        let d = self.distance(target);
        if d <= step {
            return (*target, true);
        }
        let f = step / d;
        let p = Point::new(self.x + (target.x - self.x) * f, self.y + (target.y - self.y) * f);
        (p, false)
    }

    pub fn clamp_to(&self, side: T) -> Self {
        let z = T::zero();
        Point::new(self.x.max(z).min(side), self.y.max(z).min(side))
    }

    pub fn inside(&self, side: T) -> bool {
        let z = T::zero();
        self.x >= z && self.y >= z && self.x <= side && self.y <= side
    }
}
