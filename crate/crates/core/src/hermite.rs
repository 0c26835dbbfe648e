//! Hermite polynomials orthonormal for the weight `e^{-y²/4}`.
//!
//! `h_m` satisfies `h_m'' − (y/2) h_m' = −(m/2) h_m`, `h_m' = √(m/2) h_{m−1}`
//! and the recurrence `h_{m+1} = y h_m / √(2(m+1)) − √(m/(m+1)) h_{m−1}`.

use std::f64::consts::PI;

/// Values of `h_0..h_{len-1}` at `y`.
pub fn values(y: f64, len: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(len);
    if len == 0 {
        return h;
    }
    h.push(PI.powf(-0.25) / 2f64.sqrt());
    if len > 1 {
        h.push(y / 2f64.sqrt() * h[0]);
    }
    for m in 1..len.saturating_sub(1) {
        let mf = m as f64;
        let next = y / (2.0 * (mf + 1.0)).sqrt() * h[m] - (mf / (mf + 1.0)).sqrt() * h[m - 1];
        h.push(next);
    }
    h
}

/// Values, first and second derivatives of `h_0..h_{len-1}` at `y`.
pub fn jet(y: f64, len: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let h = values(y, len);
    let mut d1 = vec![0.0; len];
    let mut d2 = vec![0.0; len];
    for m in 1..len {
        d1[m] = (m as f64 / 2.0).sqrt() * h[m - 1];
    }
    for m in 2..len {
        d2[m] = ((m as f64) * (m as f64 - 1.0)).sqrt() / 2.0 * h[m - 2];
    }
    (h, d1, d2)
}

/// Monic rescaled Hermite polynomial `q_m(y) = 2^{m/2} He_m(y/√2)`:
/// `1, y, y²−2, y³−6y, y⁴−12y²+12, …`. These are the eigenfunctions of the
/// axis drift Laplacian with leading coefficient one.
pub fn monic(m: usize, y: f64) -> f64 {
    let mut prev = 1.0;
    if m == 0 {
        return prev;
    }
    let mut cur = y;
    for j in 1..m {
        let next = y * cur - 2.0 * j as f64 * prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// `q_m = monic_scale(m) · h_m`.
pub fn monic_scale(m: usize) -> f64 {
    // ‖q_m‖² = 2^m · m! · 2√π
    let mut fact = 1.0;
    for j in 1..=m {
        fact *= j as f64;
    }
    (2f64.powi(m as i32) * fact * 2.0 * PI.sqrt()).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::GaussHermite;
    use approx::assert_relative_eq;

    #[test]
    fn orthonormal_under_gaussian_weight() {
        let rule = GaussHermite::new(40);
        for a in 0..12 {
            for b in 0..12 {
                let ip = rule.integrate(|y| {
                    let h = values(y, 12);
                    h[a] * h[b]
                });
                let expect = if a == b { 1.0 } else { 0.0 };
                assert!((ip - expect).abs() < 1e-12, "<h_{a}, h_{b}> = {ip}");
            }
        }
    }

    #[test]
    fn eigenfunctions_of_axis_drift_laplacian() {
        for &y in &[-3.1, -0.4, 0.0, 1.7, 5.2] {
            let (h, d1, d2) = jet(y, 10);
            for m in 0..10 {
                let lhs = d2[m] - 0.5 * y * d1[m];
                assert!((lhs + 0.5 * m as f64 * h[m]).abs() < 1e-10 * (1.0 + h[m].abs()));
            }
        }
    }

    #[test]
    fn monic_matches_normalized() {
        for m in 0..8 {
            for &y in &[-2.0, 0.3, 1.1, 4.0] {
                let h = values(y, m + 1)[m];
                assert_relative_eq!(monic(m, y), monic_scale(m) * h, max_relative = 1e-12, epsilon = 1e-12);
            }
        }
        assert_relative_eq!(monic(2, 3.0), 7.0);
        assert_relative_eq!(monic(4, 1.0), 1.0 - 12.0 + 12.0);
    }
}
