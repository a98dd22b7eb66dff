//! Potentials `W(x) + V1(x) V2(h x)` with `W = -Z/|x|`, `V1 = g/|x|` and a
//! unit-periodic `V2` given by finite Fourier data.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `V2(y) = mean + sum_k cos[k-1] cos(2 pi k y) + sin[k-1] sin(2 pi k y)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FourierProfile {
    pub mean: f64,
    #[serde(default)]
    pub cos: Vec<f64>,
    #[serde(default)]
    pub sin: Vec<f64>,
}

impl FourierProfile {
    pub fn constant(value: f64) -> Self {
        FourierProfile {
            mean: value,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn new(mean: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        FourierProfile { mean, cos, sin }
    }

    /// Torus average, the zeroth Fourier coefficient.
    pub fn mean_value(&self) -> f64 {
        self.mean
    }

    pub fn is_constant(&self) -> bool {
        self.cos.iter().chain(&self.sin).all(|c| *c == 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.mean.is_finite() && self.cos.iter().chain(&self.sin).all(|c| c.is_finite())
    }

    /// Evaluates at `y`, reduced to `[0, 1)` first so that periodicity does not
    /// depend on the accuracy of `cos` at large arguments.
    pub fn eval(&self, y: f64) -> f64 {
        let t = 2.0 * PI * y.rem_euclid(1.0);
        let mut v = self.mean;
        for (k, a) in self.cos.iter().enumerate() {
            if *a != 0.0 {
                v += a * ((k + 1) as f64 * t).cos();
            }
        }
        for (k, b) in self.sin.iter().enumerate() {
            if *b != 0.0 {
                v += b * ((k + 1) as f64 * t).sin();
            }
        }
        v
    }

    /// Same profile translated, `y -> V2(y + s)`.
    pub fn translated(&self, s: f64) -> Self {
        let mut cos = vec![0.0; self.cos.len().max(self.sin.len())];
        let mut sin = cos.clone();
        for k in 0..cos.len() {
            let a = self.cos.get(k).copied().unwrap_or(0.0);
            let b = self.sin.get(k).copied().unwrap_or(0.0);
            let (sn, cs) = (2.0 * PI * (k + 1) as f64 * s).sin_cos();
            cos[k] = a * cs + b * sn;
            sin[k] = b * cs - a * sn;
        }
        FourierProfile {
            mean: self.mean,
            cos,
            sin,
        }
    }

    /// Sum of absolute derivative amplitudes, a Lipschitz constant of `V2`.
    fn lipschitz(&self) -> f64 {
        self.cos
            .iter()
            .chain(&self.sin)
            .enumerate()
            .map(|(i, a)| {
                let k = if i < self.cos.len() {
                    i + 1
                } else {
                    i - self.cos.len() + 1
                };
                2.0 * PI * k as f64 * a.abs()
            })
            .sum()
    }

    /// Rigorous upper bound of `sup_y |offset + scale * V2(y)|`: the maximum
    /// over a uniform sample of the torus plus the Lipschitz slack.
    pub fn sup_abs_affine(&self, offset: f64, scale: f64) -> f64 {
        const SAMPLES: usize = 4096;
        let sampled = (0..SAMPLES)
            .map(|i| (offset + scale * self.eval(i as f64 / SAMPLES as f64)).abs())
            .fold(0.0, f64::max);
        sampled + scale.abs() * self.lipschitz() / (2.0 * SAMPLES as f64)
    }

    /// Triangle bound `|mean| + sum |coefficients|` of `sup |V2|`.
    pub fn sup_abs_bound(&self) -> f64 {
        self.mean.abs() + self.cos.iter().chain(&self.sin).map(|c| c.abs()).sum::<f64>()
    }
}

/// Which spinor components the oscillating potential multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// Multiple of the identity.
    #[default]
    Scalar,
    /// Multiple of the mass matrix (`+` on the upper, `-` on the lower component).
    Beta,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PotentialSpec {
    /// Charge number of `W(x) = -Z/|x|`.
    #[serde(rename = "Z")]
    pub z: f64,
    /// Strength of `V1(x) = g/|x|`.
    pub g: f64,
    pub v2: FourierProfile,
    /// Oscillation index.
    #[serde(default = "default_h")]
    pub h: u32,
    /// Core radius of the `1/|x|` singularity; `None` means twice the grid spacing.
    #[serde(default)]
    pub epsilon_reg: Option<f64>,
    #[serde(default)]
    pub coupling: Coupling,
}

fn default_h() -> u32 {
    1
}

impl PotentialSpec {
    pub fn free() -> Self {
        PotentialSpec {
            z: 0.0,
            g: 0.0,
            v2: FourierProfile::constant(1.0),
            h: 1,
            epsilon_reg: None,
            coupling: Coupling::Scalar,
        }
    }

    pub fn coulomb(z: f64) -> Self {
        PotentialSpec { z, ..Self::free() }
    }

    pub fn with_h(&self, h: u32) -> Self {
        PotentialSpec { h, ..self.clone() }
    }

    pub fn with_epsilon(&self, eps: f64) -> Self {
        PotentialSpec {
            epsilon_reg: Some(eps),
            ..self.clone()
        }
    }

    /// The limit spec: `V2` replaced by its mean.
    pub fn homogenized(&self) -> Self {
        PotentialSpec {
            v2: FourierProfile::constant(self.v2.mean_value()),
            h: 1,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.z.is_finite() && self.z >= 0.0) {
            return Err(Error::config(
                "potential.Z",
                format!("must be finite and nonnegative, got {}", self.z),
            ));
        }
        if !self.g.is_finite() {
            return Err(Error::config("potential.g", "must be finite"));
        }
        if !self.v2.is_finite() {
            return Err(Error::config("potential.v2", "coefficients must be finite"));
        }
        if self.h == 0 {
            return Err(Error::config("potential.h", "must be at least 1"));
        }
        if let Some(eps) = self.epsilon_reg {
            if !(eps.is_finite() && eps > 0.0) {
                return Err(Error::config("potential.epsilon_reg", "must be positive"));
            }
        }
        Ok(())
    }

    /// Core radius used on a grid of spacing `dx`.
    pub fn resolved_epsilon(&self, dx: f64) -> f64 {
        self.epsilon_reg.unwrap_or(2.0 * dx)
    }

    /// `1 / max(|x|, eps)`.
    fn inverse_distance(x: f64, eps: f64) -> f64 {
        1.0 / x.abs().max(eps)
    }

    /// Coulomb part `W(x)`.
    pub fn coulomb_part(&self, x: f64, eps: f64) -> f64 {
        if self.z == 0.0 {
            0.0
        } else {
            -self.z * Self::inverse_distance(x, eps)
        }
    }

    /// Oscillating part `V1(x) V2(h x)`.
    pub fn oscillating_part(&self, x: f64, eps: f64) -> f64 {
        if self.g == 0.0 {
            0.0
        } else {
            self.g * Self::inverse_distance(x, eps) * self.v2.eval(self.h as f64 * x)
        }
    }

    pub fn v1(&self, x: f64, eps: f64) -> f64 {
        self.g * Self::inverse_distance(x, eps)
    }
}

/// `W(x) + V1(x) V2(h x)` with the potential's own core radius (none if unset).
pub fn eval_potential(spec: &PotentialSpec, x: f64) -> f64 {
    let eps = spec.epsilon_reg.unwrap_or(0.0);
    spec.coulomb_part(x, eps) + spec.oscillating_part(x, eps)
}

/// Result of the Coulomb-bound admissibility test `|W(x)| <= a/(2|x|) + b`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub a: f64,
    pub b: f64,
    /// `Z <= a/2`.
    pub coulomb_admissible: bool,
    /// Rigorous bound of `sup_y |-Z + g V2(y)|`, the coefficient of `1/|x|` in the full potential.
    pub combined_coefficient: f64,
    /// `combined_coefficient <= a/2`.
    pub combined_admissible: bool,
    /// Cruder triangle bound `Z + |g| sup |V2|`.
    pub triangle_coefficient: f64,
    pub triangle_admissible: bool,
}

/// The Coulomb part passes iff `Z <= a/2` (with `c = 1` the `b` term cannot
/// compensate near the origin). For the perturbed operator the coefficient of
/// `1/|x|` is `-Z + g V2(h x)`, bounded uniformly in `h` by its sup over the torus.
pub fn check_admissible(spec: &PotentialSpec, a: f64, b: f64) -> AdmissibilityReport {
    let half = a / 2.0;
    let combined = spec.v2.sup_abs_affine(-spec.z, spec.g);
    let triangle = spec.z + spec.g.abs() * spec.v2.sup_abs_bound();
    let in_range = a > 0.0 && a < 1.0 && b >= 0.0;
    AdmissibilityReport {
        a,
        b,
        coulomb_admissible: in_range && spec.z <= half,
        combined_coefficient: combined,
        combined_admissible: in_range && combined <= half,
        triangle_coefficient: triangle,
        triangle_admissible: in_range && triangle <= half,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub checked: usize,
    /// Pairs skipped because `|x|` or `|a x|` fell inside the core.
    pub skipped: usize,
    pub max_relative_error: f64,
    pub passes: bool,
}

/// Checks `V1(a x) = V1(x) / a` on `(x, a)` sample pairs to `1e-12` relative.
pub fn homogeneity_check(spec: &PotentialSpec, samples: &[(f64, f64)]) -> HomogeneityReport {
    let eps = spec.epsilon_reg.unwrap_or(0.0);
    let mut checked = 0;
    let mut skipped = 0;
    let mut worst: f64 = 0.0;
    for &(x, a) in samples {
        if x.abs() <= eps || (a * x).abs() <= eps || a == 0.0 {
            skipped += 1;
            continue;
        }
        checked += 1;
        let lhs = spec.v1(a * x, eps);
        let rhs = spec.v1(x, eps) / a.abs();
        let scale = lhs.abs().max(rhs.abs());
        if scale > 0.0 {
            worst = worst.max((lhs - rhs).abs() / scale);
        }
    }
    HomogeneityReport {
        checked,
        skipped,
        max_relative_error: worst,
        passes: worst <= 1e-12,
    }
}
