//! Spatial initial profiles.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Profile {
    Constant {
        value: f64,
    },
    /// `amplitude * exp(-(x - center)^2 / (2 width^2))`
    Gaussian {
        amplitude: f64,
        #[serde(default)]
        center: f64,
        width: f64,
    },
    /// Piecewise-linear through `(xs[i], values[i])`, constant beyond the
    /// end points.
    Sampled {
        xs: Vec<f64>,
        values: Vec<f64>,
    },
}

impl Default for Profile {
    fn default() -> Self {
        Profile::Constant { value: 0.0 }
    }
}

impl Profile {
    pub fn zero() -> Self {
        Profile::default()
    }

    pub fn validate(&self) -> Result<(), String> {
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            Profile::Constant { value } if !value.is_finite() => Err("non-finite constant".into()),
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                if !finite(&[*amplitude, *center, *width]) || !(*width > 0.0) {
                    Err("gaussian needs finite amplitude/center and width > 0".into())
                } else {
                    Ok(())
                }
            }
            Profile::Sampled { xs, values } => {
                if xs.is_empty() || xs.len() != values.len() {
                    return Err("sampled profile needs matching, non-empty xs and values".into());
                }
                if !finite(xs) || !finite(values) {
                    return Err("sampled profile has non-finite entries".into());
                }
                if xs.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err("sampled profile xs must be strictly increasing".into());
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Gaussian {
                amplitude,
                center,
                width,
            } => {
                let z = (x - center) / width;
                amplitude * (-0.5 * z * z).exp()
            }
            Profile::Sampled { xs, values } => {
                let n = xs.len();
                if x <= xs[0] {
                    return values[0];
                }
                if x >= xs[n - 1] {
                    return values[n - 1];
                }
                let i = xs.partition_point(|&v| v <= x) - 1;
                let s = (x - xs[i]) / (xs[i + 1] - xs[i]);
                values[i] + s * (values[i + 1] - values[i])
            }
        }
    }

    pub fn sample(&self, xs: &[f64]) -> Vec<f64> {
        xs.iter().map(|&x| self.eval(x)).collect()
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Profile::Constant { value } => *value == 0.0,
            Profile::Gaussian { amplitude, .. } => *amplitude == 0.0,
            Profile::Sampled { values, .. } => values.iter().all(|v| *v == 0.0),
        }
    }
}
