//! Real (tesseral) spherical harmonics without the Condon-Shortley phase,
//! normalized so that `Y_00 = 1/sqrt(4 pi)` and the basis is orthonormal on
//! the unit sphere.
//!
//! Coefficients are stored flat with `index(l, m) = l^2 + l + m` for
//! `m in [-l, l]`.
//!
//! Besides the values, the evaluator returns the theta-derivative and the
//! phi-derivative divided by `sin(theta)`; the latter stays finite at the
//! poles because every `m != 0` Legendre term carries a factor
//! `sin(theta)^|m|`.

use smallvec::SmallVec;

type Table = SmallVec<[f64; 64]>;

/// Flat index of the `(l, m)` coefficient.
pub fn coeff_index(l: usize, m: i64) -> usize {
    l * l + (l as i64 + m) as usize
}

/// Number of coefficients up to and including degree `l_max`.
pub fn coeff_count(l_max: usize) -> usize {
    (l_max + 1) * (l_max + 1)
}

/// Sum `u = sum c_lm Y_lm` together with `du/dtheta` and
/// `(du/dphi)/sin(theta)`.
pub fn eval_sum_with_derivs(coeffs: &[f64], l_max: usize, theta: f64, phi: f64) -> (f64, f64, f64) {
    let (p, q, r) = legendre_tables(l_max, theta);
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;

    let mut value = 0.0;
    let mut d_theta = 0.0;
    let mut d_phi_over_sin = 0.0;

    for l in 0..=l_max {
        // m = 0
        let k = norm_factor(l, 0);
        let c = coeffs[coeff_index(l, 0)];
        value += c * k * p[idx(l, 0)];
        d_theta += c * k * q[idx(l, 0)];
        for m in 1..=l {
            let k = std::f64::consts::SQRT_2 * norm_factor(l, m);
            let (sin_m, cos_m) = (m as f64 * phi).sin_cos();
            let c_pos = coeffs[coeff_index(l, m as i64)];
            let c_neg = coeffs[coeff_index(l, -(m as i64))];
            let angular = c_pos * cos_m + c_neg * sin_m;
            let angular_dphi = m as f64 * (-c_pos * sin_m + c_neg * cos_m);
            value += k * angular * p[idx(l, m)];
            d_theta += k * angular * q[idx(l, m)];
            d_phi_over_sin += k * angular_dphi * r[idx(l, m)];
        }
    }
    (value, d_theta, d_phi_over_sin)
}

/// Sum `u = sum c_lm Y_lm` (values only).
pub fn eval_sum(coeffs: &[f64], l_max: usize, theta: f64, phi: f64) -> f64 {
    eval_sum_with_derivs(coeffs, l_max, theta, phi).0
}

/// All basis values `Y_lm(theta, phi)` in coefficient order.
pub fn eval_basis(l_max: usize, theta: f64, phi: f64) -> Vec<f64> {
    let (p, _, _) = legendre_tables(l_max, theta);
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let mut out = vec![0.0; coeff_count(l_max)];
    for l in 0..=l_max {
        out[coeff_index(l, 0)] = norm_factor(l, 0) * p[idx(l, 0)];
        for m in 1..=l {
            let k = std::f64::consts::SQRT_2 * norm_factor(l, m);
            let (sin_m, cos_m) = (m as f64 * phi).sin_cos();
            out[coeff_index(l, m as i64)] = k * cos_m * p[idx(l, m)];
            out[coeff_index(l, -(m as i64))] = k * sin_m * p[idx(l, m)];
        }
    }
    out
}

/// `sqrt((2l+1)/(4 pi) * (l-m)!/(l+m)!)`.
fn norm_factor(l: usize, m: usize) -> f64 {
    let mut ratio = 1.0;
    for k in (l - m + 1)..=(l + m) {
        ratio /= k as f64;
    }
    ((2 * l + 1) as f64 / (4.0 * std::f64::consts::PI) * ratio).sqrt()
}

/// Associated Legendre values `P_l^m(cos theta)` (Condon-Shortley-free),
/// their theta-derivatives, and `P_l^m / sin(theta)` for `m >= 1`. All three
/// tables follow the same three-term recurrence, which keeps the evaluation
/// regular at the poles.
fn legendre_tables(l_max: usize, theta: f64) -> (Table, Table, Table) {
    let size = (l_max + 1) * (l_max + 2) / 2;
    let idx = |l: usize, m: usize| l * (l + 1) / 2 + m;
    let (st, ct) = theta.sin_cos();

    let mut p: Table = SmallVec::from_elem(0.0, size);
    let mut q: Table = SmallVec::from_elem(0.0, size);
    let mut r: Table = SmallVec::from_elem(0.0, size);

    p[idx(0, 0)] = 1.0;
    for m in 1..=l_max {
        let f = (2 * m - 1) as f64;
        p[idx(m, m)] = f * st * p[idx(m - 1, m - 1)];
        q[idx(m, m)] = f * (ct * p[idx(m - 1, m - 1)] + st * q[idx(m - 1, m - 1)]);
        r[idx(m, m)] = if m == 1 {
            1.0
        } else {
            f * st * r[idx(m - 1, m - 1)]
        };
    }
    for m in 0..l_max {
        let f = (2 * m + 1) as f64;
        p[idx(m + 1, m)] = f * ct * p[idx(m, m)];
        q[idx(m + 1, m)] = f * (-st * p[idx(m, m)] + ct * q[idx(m, m)]);
        if m >= 1 {
            r[idx(m + 1, m)] = f * ct * r[idx(m, m)];
        }
    }
    for m in 0..=l_max {
        for l in (m + 2)..=l_max {
            let a = (2 * l - 1) as f64;
            let b = (l - 1 + m) as f64;
            let inv = 1.0 / (l - m) as f64;
            p[idx(l, m)] = (a * ct * p[idx(l - 1, m)] - b * p[idx(l - 2, m)]) * inv;
            q[idx(l, m)] =
                (a * (-st * p[idx(l - 1, m)] + ct * q[idx(l - 1, m)]) - b * q[idx(l - 2, m)]) * inv;
            if m >= 1 {
                r[idx(l, m)] = (a * ct * r[idx(l - 1, m)] - b * r[idx(l - 2, m)]) * inv;
            }
        }
    }
    (p, q, r)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn low_order_closed_forms() {
        let inv_sqrt_4pi = 1.0 / (4.0 * std::f64::consts::PI).sqrt();
        for &(theta, phi) in &[(0.3, 1.2), (1.6, 4.0), (2.9, 0.1), (0.0, 0.0)] {
            let y = eval_basis(2, theta, phi);
            assert!((y[coeff_index(0, 0)] - inv_sqrt_4pi).abs() < 1e-14);
            // Y_10 = sqrt(3/(4pi)) cos(theta)
            let y10 = (3.0 / (4.0 * std::f64::consts::PI)).sqrt() * theta.cos();
            assert!((y[coeff_index(1, 0)] - y10).abs() < 1e-14);
            // Y_11 = sqrt(3/(4pi)) sin(theta) cos(phi)
            let y11 = (3.0 / (4.0 * std::f64::consts::PI)).sqrt() * theta.sin() * phi.cos();
            assert!((y[coeff_index(1, 1)] - y11).abs() < 1e-14);
        }
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let l_max = 6;
        let mut coeffs = vec![0.0; coeff_count(l_max)];
        let mut rng = crate::rng::SplitMix64::new(7);
        for c in coeffs.iter_mut() {
            *c = rng.range(-1.0, 1.0);
        }
        let h = 1e-6;
        for &(theta, phi) in &[(0.4, 0.9), (1.2, 5.1), (2.2, 3.0)] {
            let (_, dt, dp_over_sin) = eval_sum_with_derivs(&coeffs, l_max, theta, phi);
            let fd_t = (eval_sum(&coeffs, l_max, theta + h, phi)
                - eval_sum(&coeffs, l_max, theta - h, phi))
                / (2.0 * h);
            let fd_p = (eval_sum(&coeffs, l_max, theta, phi + h)
                - eval_sum(&coeffs, l_max, theta, phi - h))
                / (2.0 * h);
            assert!((dt - fd_t).abs() < 1e-8, "{dt} vs {fd_t}");
            assert!((dp_over_sin * theta.sin() - fd_p).abs() < 1e-8);
        }
    }
}
