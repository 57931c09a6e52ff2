//! Spherical measure on `S^{d-1}` and the construction-parameter choices.
//!
//! Measures are normalized so the whole sphere has measure 1. A cap of
//! angular radius `phi` has measure `∫₀^phi sin^{d-2} t dt / ∫₀^π sin^{d-2} t dt`.

use std::f64::consts::{FRAC_PI_2, PI};

use crate::error::{input, Error, Result};

/// Inputs to [`angle`] must be unit vectors to within this tolerance.
pub const UNIT_TOLERANCE: f64 = 1e-9;
/// Largest dimension [`choose_dimension`] scans before giving up.
pub const MAX_DIMENSION: usize = 200_000;
/// Ratio of the geometric grid searched by [`choose_gamma`].
pub const GAMMA_GRID_RATIO: f64 = 0.9;
const GAMMA_GRID_STEPS: usize = 600;

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Angular distance `arccos(x·y)` with the inner product clamped to `[-1, 1]`.
pub fn angle(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return input(format!("dimension mismatch: {} vs {}", x.len(), y.len()));
    }
    for v in [x, y] {
        let nv = norm(v);
        if (nv - 1.0).abs() > UNIT_TOLERANCE {
            return input(format!("vector is not unit norm (|x| = {nv})"));
        }
    }
    Ok(clamped_acos(dot(x, y)))
}

pub fn clamped_acos(c: f64) -> f64 {
    c.clamp(-1.0, 1.0).acos()
}

/// Adaptive Simpson quadrature with absolute tolerance `tol`.
///
/// `noise` is the relative error of one evaluation of `f`; subintervals whose
/// error estimate is below that level are accepted.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64, noise: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        noise: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        let floor = noise * (left + right).abs();
        if depth == 0 || delta.abs() <= 15.0 * tol.max(floor) {
            return left + right + delta / 15.0;
        }
        recurse(f, a, m, fa, flm, fm, left, 0.5 * tol, noise, depth - 1)
            + recurse(f, m, b, fm, frm, fb, right, 0.5 * tol, noise, depth - 1)
    }
    if b <= a {
        return 0.0;
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    recurse(f, a, b, fa, fm, fb, whole, tol, noise, 40)
}

/// `∫₀^π sin^k t dt` by the Wallis recurrence.
pub fn sine_power_total(k: usize) -> f64 {
    let (mut w, start) = if k.is_multiple_of(2) { (PI, 0) } else { (2.0, 1) };
    let mut j = start + 2;
    while j <= k {
        w *= (j - 1) as f64 / j as f64;
        j += 2;
    }
    w
}

/// `∫₀^phi (sin t / s)^k dt`, with `s` a scale that keeps the integrand from
/// underflowing. Accurate to about 1e-13 relative.
fn scaled_sine_integral(k: usize, phi: f64, scale: f64) -> f64 {
    if k == 0 {
        return phi;
    }
    let exp = k as i32;
    let f = move |t: f64| (t.sin() / scale).powi(exp);
    // coarse pass sets a relative tolerance
    let coarse = {
        let steps = 64;
        let h = phi / steps as f64;
        let mut s = f(0.0) + f(phi);
        for i in 1..steps {
            s += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
        }
        s * h / 3.0
    };
    if coarse <= 0.0 {
        return 0.0;
    }
    // powi amplifies the relative error of sin by roughly k
    let noise = 8.0 * (k + 1) as f64 * f64::EPSILON;
    adaptive_simpson(&f, 0.0, phi, 1e-14 * coarse, noise)
}

fn check_cap_args(d: usize, phi: f64) -> Result<()> {
    if d < 2 {
        return input(format!("dimension d = {d} must be at least 2"));
    }
    if !(0.0..=PI).contains(&phi) {
        return input(format!("cap radius {phi} outside [0, π]"));
    }
    Ok(())
}

/// Normalized measure of a cap of angular radius `phi` on `S^{d-1}`.
pub fn cap_measure(d: usize, phi: f64) -> Result<f64> {
    check_cap_args(d, phi)?;
    Ok(cap_measure_unchecked(d, phi))
}

pub(crate) fn cap_measure_unchecked(d: usize, phi: f64) -> f64 {
    let k = d - 2;
    if k == 0 {
        return phi / PI;
    }
    let total = sine_power_total(k);
    if phi <= FRAC_PI_2 {
        scaled_sine_integral(k, phi, 1.0) / total
    } else {
        1.0 - scaled_sine_integral(k, PI - phi, 1.0) / total
    }
}

/// `cap_measure(d, a) / cap_measure(d, b)` evaluated without underflow for
/// large `d`. Requires `0 <= a`, `0 < b <= π`.
pub fn cap_ratio(d: usize, a: f64, b: f64) -> Result<f64> {
    check_cap_args(d, a)?;
    check_cap_args(d, b)?;
    if b <= 0.0 {
        return input("denominator cap radius must be positive");
    }
    let k = d - 2;
    if k == 0 {
        return Ok(a / b);
    }
    if b > FRAC_PI_2 || a > FRAC_PI_2 {
        // both measures are comfortably away from underflow once a radius
        // reaches the hemisphere
        return Ok(cap_measure_unchecked(d, a) / cap_measure_unchecked(d, b));
    }
    let scale = b.sin();
    Ok(scaled_sine_integral(k, a, scale) / scaled_sine_integral(k, b, scale))
}

/// Radius `phi` with `cap_measure(d, phi) = target`, by safeguarded Newton.
pub fn cap_radius_for_measure(d: usize, target: f64) -> Result<f64> {
    if d < 2 {
        return input(format!("dimension d = {d} must be at least 2"));
    }
    if !(0.0..=1.0).contains(&target) {
        return input(format!("cap measure {target} outside [0, 1]"));
    }
    Ok(cap_radius_unchecked(d, target))
}

pub(crate) fn cap_radius_unchecked(d: usize, target: f64) -> f64 {
    if target <= 0.0 {
        return 0.0;
    }
    if target >= 1.0 {
        return PI;
    }
    let k = d - 2;
    if k == 0 {
        return target * PI;
    }
    let total = sine_power_total(k);
    let (mut lo, mut hi) = (0.0, PI);
    let mut x = FRAC_PI_2;
    for _ in 0..200 {
        let value = cap_measure_unchecked(d, x) - target;
        if value == 0.0 {
            return x;
        }
        if value < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        let density = x.sin().powi(k as i32) / total;
        let newton = x - value / density;
        let next = if density > 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
        if (next - x).abs() <= 1e-16 * (1.0 + x) || hi - lo <= 1e-16 {
            return next;
        }
        x = next;
    }
    x
}

fn check_theta_epsilon(theta: f64, epsilon: f64) -> Result<()> {
    if !(theta > FRAC_PI_2 && theta < PI) {
        return input(format!("theta = {theta} must lie strictly between π/2 and π"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return input(format!("epsilon = {epsilon} must lie strictly between 0 and 1"));
    }
    Ok(())
}

/// Whether dimension `d` makes the cap of radius `π - θ - ε` at most an
/// `ε`-fraction of the cap of radius `π - θ`.
pub fn dimension_condition(d: usize, theta: f64, epsilon: f64) -> Result<bool> {
    check_theta_epsilon(theta, epsilon)?;
    let inner = PI - theta - epsilon;
    if inner <= 0.0 {
        return Ok(true);
    }
    Ok(cap_ratio(d, inner, PI - theta)? <= epsilon)
}

/// Smallest `d >= 2` satisfying [`dimension_condition`].
pub fn choose_dimension(theta: f64, epsilon: f64) -> Result<usize> {
    check_theta_epsilon(theta, epsilon)?;
    if PI - theta - epsilon <= 0.0 {
        return input(format!(
            "epsilon = {epsilon} too large for theta = {theta}: π - θ - ε must be positive"
        ));
    }
    for d in 2..=MAX_DIMENSION {
        if dimension_condition(d, theta, epsilon)? {
            return Ok(d);
        }
    }
    Err(Error::Infeasible(format!(
        "no dimension up to {MAX_DIMENSION} satisfies the cap ratio for θ = {theta}, ε = {epsilon}"
    )))
}

/// The heuristic dimension `log(1/ε) / (ε (θ - π/2))`.
pub fn dimension_estimate(theta: f64, epsilon: f64) -> f64 {
    (1.0 / epsilon).ln() / (epsilon * (theta - FRAC_PI_2))
}

/// Upper end `ε / (d |cot θ|)` of the cell-diameter search.
pub fn gamma_cap(theta: f64, epsilon: f64, d: usize) -> f64 {
    epsilon / (d as f64 * (theta.cos() / theta.sin()).abs())
}

/// Whether cells of diameter `gamma` keep the cap of radius `π - θ - γ` at
/// least a `(1 - ε)`-fraction of the cap of radius `π - θ + γ`.
pub fn gamma_condition(theta: f64, epsilon: f64, d: usize, gamma: f64) -> Result<bool> {
    check_theta_epsilon(theta, epsilon)?;
    if d < 2 {
        return input(format!("dimension d = {d} must be at least 2"));
    }
    let inner = PI - theta - gamma;
    let outer = (PI - theta + gamma).min(PI);
    if gamma <= 0.0 || inner <= 0.0 {
        return Ok(false);
    }
    Ok(cap_ratio(d, inner, outer)? >= 1.0 - epsilon)
}

/// Largest `gamma` on the grid `gamma_cap · 0.9^k` satisfying [`gamma_condition`].
pub fn choose_gamma(theta: f64, epsilon: f64, d: usize) -> Result<f64> {
    check_theta_epsilon(theta, epsilon)?;
    let start = gamma_cap(theta, epsilon, d);
    let mut gamma = start;
    for _ in 0..GAMMA_GRID_STEPS {
        if gamma_condition(theta, epsilon, d, gamma)? {
            return Ok(gamma);
        }
        gamma *= GAMMA_GRID_RATIO;
    }
    Err(Error::Infeasible(format!(
        "no gamma on the grid below {start} satisfies the cap ratio for θ = {theta}, ε = {epsilon}, d = {d}"
    )))
}
