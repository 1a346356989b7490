//! Trickle timer driving DIO emission.

use rand::Rng;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrickleParams {
    /// Seconds.
    pub i_min: f64,
    pub doublings: u32,
    pub k: u32,
}

impl Default for TrickleParams {
    fn default() -> Self {
        Self { i_min: 4.096, doublings: 8, k: 10 }
    }
}

impl TrickleParams {
    pub fn i_max(&self) -> f64 {
        self.i_min * f64::from(1u32 << self.doublings)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trickle {
    pub params: TrickleParams,
    pub interval: f64,
    pub interval_start: f64,
    pub counter: u32,
    pub running: bool,
}

impl Trickle {
    pub fn new(params: TrickleParams) -> Self {
        Self { params, interval: params.i_min, interval_start: 0.0, counter: 0, running: false }
    }

    fn begin<R: Rng + ?Sized>(&mut self, start: f64, now: f64, rng: &mut R) -> f64 {
        self.interval_start = start;
        self.counter = 0;
        let t = rng.gen_range(self.interval / 2.0..self.interval);
        start + t - now
    }

    /// Starts at `i_min`. Returns the delay until the next fire.
    pub fn start<R: Rng + ?Sized>(&mut self, now: f64, rng: &mut R) -> f64 {
        self.running = true;
        self.interval = self.params.i_min;
        self.begin(now, now, rng)
    }

    /// Inconsistency. Returns a new delay if the timer restarted; a timer
    /// already at `i_min` is left alone.
    pub fn reset<R: Rng + ?Sized>(&mut self, now: f64, rng: &mut R) -> Option<f64> {
        if self.running && self.interval <= self.params.i_min {
            return None;
        }
        Some(self.start(now, rng))
    }

    pub fn stop(&mut self) {
        self.running = false;
    }

    /// Consistent transmission heard. Ignored between a fire and the start
    /// of the following interval.
    pub fn hear_consistent(&mut self, now: f64) {
        if self.running && now >= self.interval_start {
            self.counter += 1;
        }
    }

    /// Fires at the chosen point of the current interval. Returns whether to
    /// transmit and the delay until the next fire, which lies in the second
    /// half of the doubled interval.
    pub fn fire<R: Rng + ?Sized>(&mut self, now: f64, rng: &mut R) -> (bool, f64) {
        let transmit = self.counter < self.params.k;
        let next_start = self.interval_start + self.interval;
        self.interval = (self.interval * 2.0).min(self.params.i_max());
        (transmit, self.begin(next_start, now, rng))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::rng::{stream, Stream};

    #[test]
    fn intervals_double_up_to_max() {
        let mut rng = stream(1, Stream::Jitter);
        let mut t = Trickle::new(TrickleParams::default());
        let mut now = 0.0;
        now += t.start(now, &mut rng);
        let mut seen = vec![t.interval];
        for _ in 0..12 {
            let (tx, d) = t.fire(now, &mut rng);
            assert!(tx);
            assert!(d > 0.0);
            now += d;
            // fire lands in the second half of its interval
            assert!(now >= t.interval_start + t.interval / 2.0 - 1e-9);
            assert!(now < t.interval_start + t.interval);
            seen.push(t.interval);
        }
        let expect: Vec<f64> = (0..13).map(|i| 4.096 * f64::from(1u32 << i.min(8))).collect();
        for (a, b) in seen.iter().zip(&expect) {
            assert!((a - b).abs() < 1e-9, "{seen:?}");
        }
    }

    #[test]
    fn reset_returns_to_i_min() {
        let mut rng = stream(2, Stream::Jitter);
        let mut t = Trickle::new(TrickleParams::default());
        let mut now = t.start(0.0, &mut rng);
        for _ in 0..3 {
            now += t.fire(now, &mut rng).1;
        }
        assert!(t.interval > 4.096);
        let d = t.reset(now, &mut rng).unwrap();
        assert_eq!(t.interval, 4.096);
        assert!((2.048..4.096).contains(&d));
        assert!(t.reset(now, &mut rng).is_none(), "already at i_min");
    }

    #[test]
    fn redundancy_suppresses() {
        let mut rng = stream(3, Stream::Jitter);
        let mut t = Trickle::new(TrickleParams::default());
        let d = t.start(0.0, &mut rng);
        for _ in 0..10 {
            t.hear_consistent(0.5);
        }
        let (tx, _) = t.fire(d, &mut rng);
        assert!(!tx);
        // counter cleared for the new interval
        assert_eq!(t.counter, 0);
    }
}
