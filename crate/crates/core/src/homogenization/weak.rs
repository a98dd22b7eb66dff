//! Mean values, weak* probes and period averaging.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::dirac::FourierProfile;
use crate::error::{Error, Result};
use crate::grid::{Grid1D, SpinorField};

/// Torus mean of a periodic profile (its zeroth Fourier coefficient).
pub fn mean_value(v2: &FourierProfile) -> f64 {
    v2.mean_value()
}

/// Compactly supported test functions for weak* probes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TestFunction {
    /// `exp(-(x - center)^2 / (2 sigma^2))` cut off at `|x - center| > radius`.
    TruncatedGaussian {
        center: f64,
        sigma: f64,
        radius: f64,
    },
    /// `exp(-1 / (1 - t^2))` with `t = (x - center) / radius`, smooth to all orders.
    Bump {
        center: f64,
        radius: f64,
    },
    Zero,
}

impl TestFunction {
    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            TestFunction::TruncatedGaussian { center, sigma, radius } => {
                let t = x - center;
                if t.abs() > radius {
                    0.0
                } else {
                    (-t * t / (2.0 * sigma * sigma)).exp()
                }
            }
            TestFunction::Bump { center, radius } => {
                let t = (x - center) / radius;
                if t.abs() >= 1.0 {
                    0.0
                } else {
                    (-1.0 / (1.0 - t * t)).exp()
                }
            }
            TestFunction::Zero => 0.0,
        }
    }

    /// Closed support interval, `None` for the zero function.
    pub fn support(&self) -> Option<(f64, f64)> {
        match *self {
            TestFunction::TruncatedGaussian { center, radius, .. } | TestFunction::Bump { center, radius } => {
                Some((center - radius, center + radius))
            }
            TestFunction::Zero => None,
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub(crate) fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let step = p1 / dp;
            x -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `|∫ V2(h x) phi(x) dx - M(V2) ∫ phi(x) dx|` by Gauss–Legendre quadrature on
/// the grid cells clipped to the support of `phi`; cells are subdivided so that
/// every panel spans at most a quarter period of `V2(h x)`.
pub fn weak_star_probe(v2: &FourierProfile, h: u32, phi: &TestFunction, grid: &Grid1D) -> Result<f64> {
    if h == 0 {
        return Err(Error::config("h", "must be at least 1"));
    }
    let Some((a, b)) = phi.support() else {
        return Ok(0.0);
    };
    let l = grid.half_width();
    if a < -l || b > l {
        return Err(Error::config(
            "phi",
            format!("support [{a}, {b}] is not inside the grid domain [-{l}, {l}]"),
        ));
    }
    let rule = gauss_legendre(8);
    let dx = grid.dx();
    let hf = h as f64;
    let panels_per_cell = (4.0 * hf * dx).ceil().max(1.0) as usize;
    let mean = mean_value(v2);
    // Cell boundaries: -L + j dx for j = 0..=n+1.
    let first = ((a + l) / dx).floor() as usize;
    let last = (((b + l) / dx).ceil() as usize).min(grid.len() + 1);
    let mut integral = 0.0;
    for j in first..last {
        let lo = (-l + j as f64 * dx).max(a);
        let hi = (-l + (j + 1) as f64 * dx).min(b);
        if hi <= lo {
            continue;
        }
        let w = (hi - lo) / panels_per_cell as f64;
        for p in 0..panels_per_cell {
            let c = lo + (p as f64 + 0.5) * w;
            for &(t, wt) in &rule {
                let x = c + 0.5 * w * t;
                integral += 0.5 * w * wt * (v2.eval(hf * x) - mean) * phi.eval(x);
            }
        }
    }
    Ok(integral.abs())
}

/// Average of the piecewise-linear interpolant of each component over the
/// window `[x - width/2, x + width/2]` (zero outside the domain). Averaging
/// over one period of `V2(h x)` removes the leading oscillation of a field.
pub fn period_average(u: &SpinorField, dx: f64, width: f64) -> SpinorField {
    let comps = u.components();
    let n = u.len() / comps;
    let pad = (width / dx).ceil() as usize + 2;
    let m = n + 2 * pad;
    let half = 0.5 * width / dx;
    let mut out = u.clone();
    let mut f = vec![Complex64::new(0.0, 0.0); m];
    let mut prefix = vec![Complex64::new(0.0, 0.0); m];
    for c in 0..comps {
        f.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        for j in 0..n {
            f[j + pad] = u.values()[j * comps + c];
        }
        for j in 1..m {
            prefix[j] = prefix[j - 1] + (f[j - 1] + f[j]) * (0.5 * dx);
        }
        // Primitive of the interpolant at fractional index t.
        let primitive = |t: f64| {
            let j = (t.floor() as usize).min(m - 2);
            let tau = t - j as f64;
            prefix[j] + f[j] * (tau * dx) + (f[j + 1] - f[j]) * (0.5 * tau * tau * dx)
        };
        for j in 0..n {
            let t = (j + pad) as f64;
            out.values_mut()[j * comps + c] = (primitive(t + half) - primitive(t - half)) / width;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simpson_oracle(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
        let h = (b - a) / panels as f64;
        let mut s = f(a) + f(b);
        for i in 1..panels {
            let x = a + i as f64 * h;
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(x);
        }
        s * h / 3.0
    }

    #[test]
    fn mean_values() {
        assert_eq!(mean_value(&FourierProfile::constant(1.0)), 1.0);
        assert_eq!(mean_value(&FourierProfile::new(2.0, vec![1.0], vec![])), 2.0);
        assert_eq!(mean_value(&FourierProfile::new(-0.7, vec![0.3, 2.0], vec![1.0])), -0.7);
    }

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let rule = gauss_legendre(8);
        let sum: f64 = rule.iter().map(|(_, w)| w).sum();
        assert!((sum - 2.0).abs() < 1e-14);
        let x14: f64 = rule.iter().map(|(x, w)| w * x.powi(14)).sum();
        assert!((x14 - 2.0 / 15.0).abs() < 1e-14);
    }

    #[test]
    fn constant_profile_and_zero_function_give_zero() {
        let grid = Grid1D::new(3.0, 600).unwrap();
        let phi = TestFunction::TruncatedGaussian {
            center: 0.2,
            sigma: 0.5,
            radius: 0.9,
        };
        for h in [1, 7, 64] {
            let d = weak_star_probe(&FourierProfile::constant(1.0), h, &phi, &grid).unwrap();
            assert!(d < 1e-15);
        }
        let v2 = FourierProfile::new(1.0, vec![1.0], vec![]);
        assert_eq!(weak_star_probe(&v2, 5, &TestFunction::Zero, &grid).unwrap(), 0.0);
    }

    #[test]
    fn probe_matches_high_resolution_oracle() {
        let grid = Grid1D::new(2.0, 400).unwrap();
        let v2 = FourierProfile::new(1.0, vec![1.0], vec![]);
        let phi = TestFunction::TruncatedGaussian {
            center: 0.0,
            sigma: 0.5,
            radius: 7.0 / 24.0,
        };
        for h in [4u32, 32, 128] {
            let d = weak_star_probe(&v2, h, &phi, &grid).unwrap();
            let r = 7.0 / 24.0;
            let hf = h as f64;
            let oracle = simpson_oracle(
                |x| (2.0 * std::f64::consts::PI * hf * x).cos() * (-x * x / 0.5).exp(),
                -r,
                r,
                200_000,
            )
            .abs();
            assert!((d - oracle).abs() < 1e-12, "h {h}: {d} vs {oracle}");
        }
    }

    #[test]
    fn support_outside_domain_is_rejected() {
        let grid = Grid1D::new(1.0, 100).unwrap();
        let phi = TestFunction::Bump {
            center: 0.5,
            radius: 0.8,
        };
        assert!(weak_star_probe(&FourierProfile::constant(1.0), 2, &phi, &grid).is_err());
    }

    #[test]
    fn period_average_removes_a_full_period_and_keeps_constants() {
        let n = 400;
        let dx = 0.01;
        let h = 8.0;
        let vals = (0..n)
            .map(|j| {
                let x = j as f64 * dx;
                Complex64::new(1.0 + (2.0 * std::f64::consts::PI * h * x).cos(), 0.0)
            })
            .collect();
        let u = SpinorField::new(vals, 1, dx);
        let avg = period_average(&u, dx, 1.0 / h);
        // Away from the ends the oscillation is gone up to interpolation error.
        for j in 50..350 {
            assert!((avg.values()[j].re - 1.0).abs() < 5e-3, "{}", avg.values()[j].re);
        }
    }
}
