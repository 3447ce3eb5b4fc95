//! Clausen's integral and the imaginary part of the dilogarithm.
//!
//! `Cl(x) = Im Li2(e^{ix}) = sum sin(kx)/k^2 = -int_0^x log|2 sin(t/2)| dt`.
//! On `[0, pi]` it is evaluated from the expansion
//! `Cl(t) = t - t log t + sum_k 2 zeta(2k) / (2k (2k+1)) (t / 2pi)^{2k} t`,
//! which converges geometrically (ratio at most 1/4) and handles the
//! logarithmic endpoint in closed form.

use std::f64::consts::PI;
use std::sync::OnceLock;

use thiserror::Error;

const TWO_PI: f64 = 2.0 * PI;

#[derive(Debug, Error, Clone, Copy, PartialEq)]
pub enum SpecfunError {
    #[error("argument is not a finite number: {0}")]
    NotFinite(f64),
    #[error("angle {0} outside the open interval ({1}, {2})")]
    Domain(f64, f64, f64),
}

/// A finite angle in radians.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Angle(f64);

impl Angle {
    pub fn new(value: f64) -> Result<Self, SpecfunError> {
        if value.is_finite() {
            Ok(Angle(value))
        } else {
            Err(SpecfunError::NotFinite(value))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Representative in `[0, 2pi)`.
    pub fn reduced(self) -> f64 {
        let r = self.0.rem_euclid(TWO_PI);
        if r >= TWO_PI {
            0.0
        } else {
            r
        }
    }

    /// Representative in `(-pi, pi]`.
    pub fn reduced_symmetric(self) -> f64 {
        let r = self.reduced();
        if r > PI {
            r - TWO_PI
        } else {
            r
        }
    }
}

const SERIES_TERMS: usize = 30;

/// `2 zeta(2k) / (2k (2k+1))` for `k = 1..=SERIES_TERMS`.
fn series_coefficients() -> &'static [f64; SERIES_TERMS] {
    static COEF: OnceLock<[f64; SERIES_TERMS]> = OnceLock::new();
    COEF.get_or_init(|| {
        let mut c = [0.0; SERIES_TERMS];
        for (i, slot) in c.iter_mut().enumerate() {
            let k = i + 1;
            let s = 2 * k;
            let zeta = match k {
                1 => PI * PI / 6.0,
                2 => PI.powi(4) / 90.0,
                3 => PI.powi(6) / 945.0,
                4 => PI.powi(8) / 9450.0,
                _ => {
                    // Direct sum; the tail beyond n = 60 is below 1e-30.
                    let mut z = 0.0;
                    for n in (1..=60).rev() {
                        z += (n as f64).powi(-(s as i32));
                    }
                    z
                }
            };
            *slot = 2.0 * zeta / (s as f64 * (s + 1) as f64);
        }
        c
    })
}

fn clausen_0_pi(t: f64) -> f64 {
    if t == 0.0 {
        return 0.0;
    }
    let c = series_coefficients();
    let u = (t / TWO_PI) * (t / TWO_PI);
    let mut sum = 0.0;
    for k in (0..SERIES_TERMS).rev() {
        sum = sum * u + c[k];
    }
    t - t * t.ln() + sum * u * t
}

/// Clausen's integral without the finiteness check (NaN propagates).
pub fn cl(x: f64) -> f64 {
    let r = x.rem_euclid(TWO_PI);
    if r > PI {
        -clausen_0_pi(TWO_PI - r)
    } else {
        clausen_0_pi(r)
    }
}

/// Clausen's integral `Cl(x)`.
pub fn clausen(x: f64) -> Result<f64, SpecfunError> {
    if !x.is_finite() {
        return Err(SpecfunError::NotFinite(x));
    }
    Ok(cl(x))
}

/// Milnor's Lobachevsky function, `Cl(2x) / 2`.
pub fn lobachevsky(x: f64) -> f64 {
    0.5 * cl(2.0 * x)
}

/// `d/dx Im Li2(e^{x + i theta}) = arg of 1/(1 - e^{x+i theta})`, computed by
/// atan2 with values in `(0, pi - theta)` for `theta` in `(0, pi)`. For
/// `x > 0` the exponential is factored out so large `x` cannot overflow.
#[inline]
pub fn im_li2_slope(x: f64, theta: f64) -> f64 {
    let (s, c) = theta.sin_cos();
    if x <= 0.0 {
        let ex = x.exp();
        (ex * s).atan2(1.0 - ex * c)
    } else {
        s.atan2((-x).exp() - c)
    }
}

fn im_li2_series(x: f64, theta: f64) -> f64 {
    let q = x.exp();
    let mut qn = q;
    let mut sum = 0.0;
    let mut n = 1.0f64;
    while qn > 1e-18 * n * n {
        sum += qn * (n * theta).sin() / (n * n);
        qn *= q;
        n += 1.0;
    }
    sum
}

fn check_theta(theta: f64, hi: f64) -> Result<(), SpecfunError> {
    if !theta.is_finite() {
        return Err(SpecfunError::NotFinite(theta));
    }
    if !(theta > 0.0 && theta < hi) {
        return Err(SpecfunError::Domain(theta, 0.0, hi));
    }
    Ok(())
}

/// `Im Li2(e^{x + i theta})` without argument checks.
pub fn im_li2_unchecked(x: f64, theta: f64) -> f64 {
    if x < -2.0 {
        im_li2_series(x, theta)
    } else if x > 2.0 {
        im_li2_series(-x, theta) + x * (PI - theta)
    } else {
        let y = im_li2_slope(x, theta);
        y * x + 0.5 * cl(2.0 * y) - 0.5 * cl(2.0 * y + 2.0 * theta) + 0.5 * cl(2.0 * theta)
    }
}

/// `Im Li2(e^{x + i theta})` for `theta` in `(0, 2pi)`.
pub fn im_li2(x: f64, theta: f64) -> Result<f64, SpecfunError> {
    if !x.is_finite() {
        return Err(SpecfunError::NotFinite(x));
    }
    check_theta(theta, TWO_PI)?;
    Ok(im_li2_unchecked(x, theta))
}

/// The auxiliary angle `p` with `tan(p/2) = tanh(x/2) tan(theta_star/2)`.
#[inline]
pub fn half_tangent_angle(x: f64, theta_star: f64) -> f64 {
    2.0 * ((0.5 * theta_star).tan() * (0.5 * x).tanh()).atan()
}

/// `Im Li2(e^{x + i theta}) + Im Li2(e^{-x + i theta})` in closed form, for
/// `theta` in `(0, pi)`.
pub fn im_li2_symmetric(x: f64, theta: f64) -> Result<f64, SpecfunError> {
    if !x.is_finite() {
        return Err(SpecfunError::NotFinite(x));
    }
    check_theta(theta, PI)?;
    let ts = PI - theta;
    let p = half_tangent_angle(x, ts);
    Ok(p * x + cl(p + ts) + cl(ts - p) - cl(2.0 * ts))
}
