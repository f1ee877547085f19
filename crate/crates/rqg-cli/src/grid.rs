//! `min:max:points` grid arguments.

use std::str::FromStr;

/// An inclusive linearly spaced grid. Keeps the original spec text so output
/// headers can echo the argument verbatim.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    text: String,
}

impl GridSpec {
    /// The grid values: `points` evenly spaced samples from min to max, both
    /// endpoints exact.
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.min];
        }
        let step = (self.max - self.min) / (self.points - 1) as f64;
        (0..self.points)
            .map(|j| {
                if j + 1 == self.points {
                    self.max
                } else {
                    self.min + j as f64 * step
                }
            })
            .collect()
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let [min, max, points] = parts.as_slice() else {
            return Err(format!("expected min:max:points, got `{s}`"));
        };
        let min: f64 = min.parse().map_err(|_| format!("bad grid minimum `{min}`"))?;
        let max: f64 = max.parse().map_err(|_| format!("bad grid maximum `{max}`"))?;
        let points: usize = points
            .parse()
            .map_err(|_| format!("bad grid point count `{points}`"))?;
        if !min.is_finite() || !max.is_finite() {
            return Err("grid endpoints must be finite".to_string());
        }
        if points == 0 {
            return Err("grids need at least one point".to_string());
        }
        if points == 1 && min > max {
            return Err(format!("grid minimum {min} exceeds maximum {max}"));
        }
        if points > 1 && !(min < max) {
            return Err(format!(
                "a {points}-point grid needs minimum < maximum, got {min} and {max}"
            ));
        }
        Ok(GridSpec {
            min,
            max,
            points,
            text: s.to_string(),
        })
    }
}
