//! Cumulative quadrature on uniform grids.

/// `out[k] = ∫_{t_k}^{T} f` for samples `f` on a uniform grid with step `dt`.
///
/// Nodes an even number of steps from `T` use composite Simpson; the others
/// add one interval integrated by a four-point rule that is exact for cubics,
/// so every entry carries a fourth-order error. Requires at least three nodes.
pub fn cumulative_to_end(f: &[f64], dt: f64) -> Vec<f64> {
    let n = f.len() - 1;
    assert!(n >= 2, "cumulative quadrature needs at least two intervals");
    let mut out = vec![0.0; n + 1];
    let third = dt / 3.0;
    let twelfth = dt / 12.0;
    let w = dt / 24.0;
    // Even distance from the end: Simpson pairs.
    let mut k = n;
    while k >= 2 {
        out[k - 2] = out[k] + third * (f[k - 2] + 4.0 * f[k - 1] + f[k]);
        k -= 2;
    }
    // Odd distance: one interval on top of the even neighbour to the right.
    let mut k = n - 1;
    loop {
        let single = if k + 3 <= n {
            w * (9.0 * f[k] + 19.0 * f[k + 1] - 5.0 * f[k + 2] + f[k + 3])
        } else if k >= 2 {
            w * (f[k - 2] - 5.0 * f[k - 1] + 19.0 * f[k] + 9.0 * f[k + 1])
        } else {
            twelfth * (-f[k - 1] + 8.0 * f[k] + 5.0 * f[k + 1])
        };
        out[k] = out[k + 1] + single;
        if k < 2 {
            break;
        }
        k -= 2;
    }
    out
}

/// `∫_0^T f`.
pub fn integral(f: &[f64], dt: f64) -> f64 {
    cumulative_to_end(f, dt)[0]
}

/// Composite trapezoid rule.
pub fn trapezoid(f: &[f64], dt: f64) -> f64 {
    let n = f.len();
    if n < 2 {
        return 0.0;
    }
    let inner: f64 = f[1..n - 1].iter().sum();
    dt * (0.5 * (f[0] + f[n - 1]) + inner)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn cubics_are_exact() {
        for n in [3usize, 4, 7, 10] {
            let dt = 1.5 / n as f64;
            let f: Vec<f64> = (0..=n)
                .map(|k| {
                    let t = k as f64 * dt;
                    1.0 - 2.0 * t + 0.5 * t * t + 0.3 * t * t * t
                })
                .collect();
            let anti = |t: f64| t - t * t + t.powi(3) / 6.0 + 0.075 * t.powi(4);
            let out = cumulative_to_end(&f, dt);
            for (k, v) in out.iter().enumerate() {
                let exact = anti(1.5) - anti(k as f64 * dt);
                assert!((v - exact).abs() < 1e-13, "n={n} k={k}: {v} vs {exact}");
            }
            assert_eq!(out[n], 0.0);
        }
    }

    #[test]
    fn fourth_order_convergence() {
        let err = |n: usize| {
            let dt = 2.0 / n as f64;
            let f: Vec<f64> = (0..=n).map(|k| (k as f64 * dt).exp()).collect();
            let out = cumulative_to_end(&f, dt);
            (0..=n).map(|k| (out[k] - (2f64.exp() - (k as f64 * dt).exp())).abs()).fold(0.0, f64::max)
        };
        let ratio = err(41) / err(82);
        assert!(ratio > 12.0, "ratio {ratio}");
        // Two intervals: Simpson at 0, a quadratic rule on the last interval.
        let out = cumulative_to_end(&[1.0, 1.0, 1.0], 0.5);
        assert_eq!(out, vec![1.0, 0.5, 0.0]);
    }

    #[test]
    fn trapezoid_is_exact_on_lines() {
        let f = [1.0, 2.0, 3.0, 4.0];
        assert_eq!(trapezoid(&f, 0.5), 0.5 * 7.5);
    }

    proptest! {
        #[test]
        fn linear_in_integrand(a in -3.0f64..3.0, n in 2usize..40) {
            let dt = 1.0 / n as f64;
            let f: Vec<f64> = (0..=n).map(|k| (k as f64 * dt).sin()).collect();
            let g: Vec<f64> = f.iter().map(|v| a * v).collect();
            let (cf, cg) = (cumulative_to_end(&f, dt), cumulative_to_end(&g, dt));
            for k in 0..=n {
                prop_assert!((a * cf[k] - cg[k]).abs() < 1e-14);
            }
        }
    }
}
