use crate::error::{Error, Result};

/// Strictly increasing, non-negative sample times starting at 0.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    times: Vec<f64>,
    step: Option<f64>,
}

impl TimeGrid {
    /// `steps + 1` equally spaced points on `[0, horizon]`.
    pub fn uniform(horizon: f64, steps: usize) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::InvalidGrid(format!("horizon must be positive, got {horizon}")));
        }
        if steps == 0 {
            return Err(Error::InvalidGrid("a uniform grid needs at least one step".into()));
        }
        let dt = horizon / steps as f64;
        let times = (0..=steps).map(|i| i as f64 * dt).collect();
        Ok(Self { times, step: Some(dt) })
    }

    /// Uniform grid with a given step, covering at least `[0, horizon]`.
    pub fn with_step(horizon: f64, step: f64) -> Result<Self> {
        if !(step > 0.0) || !(step < horizon) {
            return Err(Error::InvalidGrid(format!("need 0 < step < horizon, got step {step}, horizon {horizon}")));
        }
        let steps = (horizon / step - 1e-9).ceil() as usize;
        let times = (0..=steps).map(|i| i as f64 * step).collect();
        Ok(Self { times, step: Some(step) })
    }

    /// 0 followed by `t_min, t_min * ratio, ...` up to and including the first
    /// point at or beyond `t_max`.
    pub fn geometric(t_min: f64, t_max: f64, ratio: f64) -> Result<Self> {
        if !(t_min > 0.0) || !(t_max > t_min) || !(ratio > 1.0) {
            return Err(Error::InvalidGrid(format!(
                "need 0 < t_min < t_max and ratio > 1, got {t_min}, {t_max}, {ratio}"
            )));
        }
        let mut times = vec![0.0, t_min];
        let mut t = t_min;
        while t < t_max * (1.0 - 1e-12) {
            t = (t * ratio).min(t_max);
            times.push(t);
        }
        Ok(Self { times, step: None })
    }

    /// Arbitrary times; must start at 0 and increase strictly.
    pub fn from_times(times: Vec<f64>) -> Result<Self> {
        if times.first() != Some(&0.0) {
            return Err(Error::InvalidGrid("grid must start at t = 0".into()));
        }
        if let Some(w) = times.windows(2).find(|w| !(w[1] > w[0]) || !w[1].is_finite()) {
            return Err(Error::InvalidGrid(format!("times not strictly increasing at {} -> {}", w[0], w[1])));
        }
        let step = if times.len() >= 2 {
            let dt = times[1];
            let uniform = times
                .iter()
                .enumerate()
                .all(|(i, &t)| (t - i as f64 * dt).abs() <= 1e-12 * t.max(1.0));
            uniform.then_some(dt)
        } else {
            None
        };
        Ok(Self { times, step })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of intervals.
    pub fn steps(&self) -> usize {
        self.times.len().saturating_sub(1)
    }

    /// The constant step for uniform grids.
    pub fn uniform_step(&self) -> Option<f64> {
        self.step
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("grid is non-empty")
    }

    /// Index `i` of the interval `[t_i, t_{i+1}]` containing `t`, clamped to
    /// the valid range.
    pub fn interval_of(&self, t: f64) -> usize {
        let last = self.steps().saturating_sub(1);
        if let Some(dt) = self.step {
            return ((t / dt).floor().max(0.0) as usize).min(last);
        }
        match self.times.binary_search_by(|x| x.total_cmp(&t)) {
            Ok(i) => i.min(last),
            Err(i) => i.saturating_sub(1).min(last),
        }
    }

    /// Width of the grid interval containing `t`.
    pub fn resolution_at(&self, t: f64) -> f64 {
        let i = self.interval_of(t);
        self.times[i + 1] - self.times[i]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_grid() {
        let g = TimeGrid::uniform(2.0, 4).unwrap();
        assert_eq!(g.times(), &[0.0, 0.5, 1.0, 1.5, 2.0]);
        assert_eq!(g.uniform_step(), Some(0.5));
        assert_eq!(g.interval_of(1.2), 2);
        assert_eq!(g.interval_of(2.0), 3);
    }

    #[test]
    fn geometric_grid() {
        let g = TimeGrid::geometric(0.01, 1.0, 10.0).unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.uniform_step(), None);
        assert!((g.horizon() - 1.0).abs() < 1e-15);
        assert_eq!(g.interval_of(0.05), 1);
        assert!((g.resolution_at(0.05) - 0.09).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_times() {
        assert!(TimeGrid::from_times(vec![0.1, 0.2]).is_err());
        assert!(TimeGrid::from_times(vec![0.0, 0.2, 0.2]).is_err());
        assert!(TimeGrid::uniform(0.0, 4).is_err());
        assert!(TimeGrid::with_step(1.0, 2.0).is_err());
    }

    #[test]
    fn from_times_detects_uniform() {
        let g = TimeGrid::from_times(vec![0.0, 0.25, 0.5, 0.75]).unwrap();
        assert_eq!(g.uniform_step(), Some(0.25));
    }
}
