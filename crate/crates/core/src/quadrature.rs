//! Uniform-grid quadrature: composite and cumulative Simpson rules plus a
//! Filon-Simpson rule for cosine/sine transforms of smooth samples.

/// Definite integral of uniformly spaced samples over the whole array.
///
/// Composite Simpson on an even number of intervals; an odd interval count
/// closes with the 3/8 rule on the last three intervals.
pub fn simpson(f: &[f64], h: f64) -> f64 {
    let n = f.len().saturating_sub(1);
    match n {
        0 => 0.0,
        1 => 0.5 * h * (f[0] + f[1]),
        3 => 3.0 * h / 8.0 * (f[0] + 3.0 * f[1] + 3.0 * f[2] + f[3]),
        _ if n.is_multiple_of(2) => simpson_even(f, h),
        _ => {
            let head = simpson_even(&f[..n - 2], h);
            let t = &f[n - 3..];
            head + 3.0 * h / 8.0 * (t[0] + 3.0 * t[1] + 3.0 * t[2] + t[3])
        }
    }
}

fn simpson_even(f: &[f64], h: f64) -> f64 {
    let n = f.len() - 1;
    debug_assert!(n.is_multiple_of(2));
    let mut odd = 0.0;
    let mut even = 0.0;
    for (i, &v) in f.iter().enumerate().take(n).skip(1) {
        if i % 2 == 1 {
            odd += v;
        } else {
            even += v;
        }
    }
    h / 3.0 * (f[0] + f[n] + 4.0 * odd + 2.0 * even)
}

/// Running integral `out[i] = ∫_0^{t_i} f` of uniformly spaced samples.
///
/// Even indices carry the exact composite Simpson sum; an odd running
/// endpoint adds one interval integrated against the cubic through the four
/// nearest samples, so every entry is fourth-order accurate.
pub fn cumulative_simpson(f: &[f64], h: f64) -> Vec<f64> {
    let len = f.len();
    let mut out = vec![0.0; len];
    match len {
        0 | 1 => return out,
        2 => {
            out[1] = 0.5 * h * (f[0] + f[1]);
            return out;
        }
        3 => {
            out[1] = h / 12.0 * (5.0 * f[0] + 8.0 * f[1] - f[2]);
            out[2] = h / 3.0 * (f[0] + 4.0 * f[1] + f[2]);
            return out;
        }
        _ => {}
    }
    let n = len - 1;
    for i in (2..=n).step_by(2) {
        out[i] = out[i - 2] + h / 3.0 * (f[i - 2] + 4.0 * f[i - 1] + f[i]);
    }
    for i in (1..=n).step_by(2) {
        out[i] = if i == 1 {
            h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3])
        } else if i < n {
            out[i - 1] + h / 24.0 * (-f[i - 2] + 13.0 * f[i - 1] + 13.0 * f[i] - f[i + 1])
        } else {
            out[i - 1] + h / 24.0 * (f[i - 3] - 5.0 * f[i - 2] + 19.0 * f[i - 1] + 9.0 * f[i])
        };
    }
    out
}

/// Filon weights (alpha, beta, gamma) for the product `t * h`.
fn filon_weights(theta: f64) -> (f64, f64, f64) {
    if theta.abs() < 1.0 / 6.0 {
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = t3
            * (2.0 / 45.0 - t2 * (2.0 / 315.0 - t2 * (2.0 / 4725.0 - t2 * (8.0 / 467775.0 - t2 * 4.0 / 8513505.0))));
        let beta = 2.0 / 3.0
            + t2 * (2.0 / 15.0 - t2 * (4.0 / 105.0 - t2 * (2.0 / 567.0 - t2 * (4.0 / 22275.0 - t2 * 4.0 / 675675.0))));
        let gamma = 4.0 / 3.0
            - t2 * (2.0 / 15.0 - t2 * (1.0 / 210.0 - t2 * (1.0 / 11340.0 - t2 * (1.0 / 997920.0 - t2 / 129729600.0))));
        (alpha, beta, gamma)
    } else {
        let (s, c) = theta.sin_cos();
        let t2 = theta * theta;
        let t3 = t2 * theta;
        let alpha = 1.0 / theta + s * c / t2 - 2.0 * s * s / t3;
        let beta = 2.0 * ((1.0 + c * c) / t2 - 2.0 * s * c / t3);
        let gamma = 4.0 * (s / t3 - c / t2);
        (alpha, beta, gamma)
    }
}

/// Filon-Simpson cosine and sine transforms of samples `f` on the grid
/// `x_j = x0 + j h`, returning `(∫ f cos(t x) dx, ∫ f sin(t x) dx)`.
///
/// The sample count must be odd. The rule interpolates `f` by piecewise
/// quadratics and integrates the oscillating weight exactly, so its accuracy
/// does not degrade as `t h` grows.
pub fn filon(f: &[f64], x0: f64, h: f64, t: f64) -> (f64, f64) {
    let len = f.len();
    assert!(len >= 3 && len % 2 == 1, "filon needs an odd number (>= 3) of samples");
    let n2 = len - 1;
    let (alpha, beta, gamma) = filon_weights(t * h);
    let mut c_even = 0.0;
    let mut s_even = 0.0;
    let mut c_odd = 0.0;
    let mut s_odd = 0.0;
    // e^{i t x_j} by rotation, re-seeded exactly every RESEED samples so the
    // rounding drift stays near machine precision
    const RESEED: usize = 32;
    let (ws, wc) = (t * h).sin_cos();
    let (mut s, mut c) = (0.0, 1.0);
    for (j, &fj) in f.iter().enumerate() {
        if j % RESEED == 0 {
            (s, c) = (t * (x0 + j as f64 * h)).sin_cos();
        } else {
            (s, c) = (s * wc + c * ws, c * wc - s * ws);
        }
        if j % 2 == 0 {
            c_even += fj * c;
            s_even += fj * s;
        } else {
            c_odd += fj * c;
            s_odd += fj * s;
        }
    }
    let (s0, c0) = (t * x0).sin_cos();
    let xn = x0 + n2 as f64 * h;
    let (sn, cn) = (t * xn).sin_cos();
    let (f0, fnn) = (f[0], f[n2]);
    c_even -= 0.5 * (f0 * c0 + fnn * cn);
    s_even -= 0.5 * (f0 * s0 + fnn * sn);
    let cos_int = h * (alpha * (fnn * sn - f0 * s0) + beta * c_even + gamma * c_odd);
    let sin_int = h * (alpha * (f0 * c0 - fnn * cn) + beta * s_even + gamma * s_odd);
    (cos_int, sin_int)
}

/// Filon transforms with a Richardson error estimate from the half-resolution
/// rule on every other sample. Requires `(len - 1) % 4 == 0`.
///
/// Returns `((cos, sin), estimate)`.
pub fn filon_with_estimate(f: &[f64], x0: f64, h: f64, t: f64) -> ((f64, f64), f64) {
    assert!((f.len() - 1).is_multiple_of(4), "filon estimate needs (len - 1) divisible by 4");
    let fine = filon(f, x0, h, t);
    let coarse_samples: Vec<f64> = f.iter().step_by(2).copied().collect();
    let coarse = filon(&coarse_samples, x0, 2.0 * h, t);
    let est = ((fine.0 - coarse.0).powi(2) + (fine.1 - coarse.1).powi(2)).sqrt() / 15.0;
    (fine, est)
}
