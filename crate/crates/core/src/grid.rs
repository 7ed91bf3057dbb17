use crate::error::{Error, Result};

/// Upper bound on points per axis.
pub const MAX_GRID_POINTS: f64 = 1e6;

/// Evenly spaced axis `min, min + step, …, max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid {
    pub axis: String,
    pub min: f64,
    pub max: f64,
    pub step: f64,
}

impl SweepGrid {
    pub fn new(axis: impl Into<String>, min: f64, max: f64, step: f64) -> Result<Self> {
        let axis = axis.into();
        if !(min.is_finite() && max.is_finite() && step.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid `{axis}` has non-finite bounds")));
        }
        if !(min < max) {
            return Err(Error::InvalidParameter(format!(
                "grid `{axis}` is empty: min {min} must be below max {max}"
            )));
        }
        if !(step > 0.0) {
            return Err(Error::InvalidParameter(format!("grid `{axis}` step must be positive")));
        }
        if (max - min) / step > MAX_GRID_POINTS {
            return Err(Error::InvalidParameter(format!(
                "grid `{axis}` would have more than {MAX_GRID_POINTS} points"
            )));
        }
        Ok(SweepGrid { axis, min, max, step })
    }

    /// Grid points in ascending order, generated by index to avoid drift.
    pub fn values(&self) -> Vec<f64> {
        let span = (self.max - self.min) / self.step;
        let n = (span + 1e-9 * span.max(1.0)).floor() as usize;
        (0..=n)
            .map(|i| {
                let v = self.min + i as f64 * self.step;
                if i == n && (v - self.max).abs() <= 1e-9 * self.step {
                    self.max
                } else {
                    v
                }
            })
            .collect()
    }
}

/// Either an evenly spaced range or an explicit ascending list.
#[derive(Debug, Clone, PartialEq)]
pub enum Axis {
    Range(SweepGrid),
    List { axis: String, values: Vec<f64> },
}

impl Axis {
    pub fn list(axis: impl Into<String>, mut values: Vec<f64>) -> Result<Self> {
        let axis = axis.into();
        if values.is_empty() {
            return Err(Error::InvalidParameter(format!("grid `{axis}` is empty")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid `{axis}` has non-finite values")));
        }
        values.sort_by(f64::total_cmp);
        values.dedup();
        Ok(Axis::List { axis, values })
    }

    pub fn name(&self) -> &str {
        match self {
            Axis::Range(g) => &g.axis,
            Axis::List { axis, .. } => axis,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        match self {
            Axis::Range(g) => g.values(),
            Axis::List { values, .. } => values.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inclusive_endpoints() {
        let g = SweepGrid::new("B", 0.0, 6.0, 0.01).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 601);
        assert_eq!(v[0], 0.0);
        assert_eq!(*v.last().unwrap(), 6.0);
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        let g = SweepGrid::new("x", -5.0, 5.0, 0.3).unwrap();
        assert_eq!(g.values().len(), 34);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(SweepGrid::new("B", 1.0, 1.0, 0.1).is_err());
        assert!(SweepGrid::new("B", 0.0, 1.0, 0.0).is_err());
        assert!(SweepGrid::new("B", 0.0, 1.0, 1e-7).is_err());
        assert!(Axis::list("kT", vec![]).is_err());
    }

    #[test]
    fn lists_are_sorted() {
        let a = Axis::list("kT", vec![2.0, 0.05, 0.5]).unwrap();
        assert_eq!(a.values(), vec![0.05, 0.5, 2.0]);
    }
}
