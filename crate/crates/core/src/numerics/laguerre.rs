/// Generalized Laguerre polynomial `L_p^alpha(x)` by the three-term recurrence
/// `(k+1) L_{k+1} = (2k+1+alpha-x) L_k - (k+alpha) L_{k-1}`.
pub fn laguerre(p: u32, alpha: u32, x: f64) -> f64 {
    let a = alpha as f64;
    let mut prev = 1.0;
    if p == 0 {
        return prev;
    }
    let mut cur = 1.0 + a - x;
    for k in 1..p {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0 + a - x) * cur - (kf + a) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    cur
}

/// `d/dx L_p^alpha(x) = -L_{p-1}^{alpha+1}(x)`.
pub fn laguerre_derivative(p: u32, alpha: u32, x: f64) -> f64 {
    if p == 0 {
        0.0
    } else {
        -laguerre(p - 1, alpha + 1, x)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    // explicit series: sum_i (-1)^i C(p+alpha, p-i) x^i / i!
    fn series(p: u32, alpha: u32, x: f64) -> f64 {
        let binom = |n: u32, k: u32| -> f64 {
            (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
        };
        let mut sum = 0.0;
        let mut xi_over_fact = 1.0;
        for i in 0..=p {
            if i > 0 {
                xi_over_fact *= x / i as f64;
            }
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            sum += sign * binom(p + alpha, p - i) * xi_over_fact;
        }
        sum
    }

    #[test]
    fn zero_index_is_one() {
        assert_eq!(laguerre(0, 3, 7.5), 1.0);
    }

    #[test]
    fn first_order() {
        assert!((laguerre(1, 2, 1.0) - 2.0).abs() < 1e-15);
        assert!((laguerre(1, 2, 1.0) - series(1, 2, 1.0)).abs() < 1e-15);
    }

    #[test]
    fn value_at_origin_is_binomial() {
        assert_eq!(laguerre(2, 0, 0.0), 1.0);
        assert!((laguerre(4, 3, 0.0) - 35.0).abs() < 1e-12);
    }

    #[test]
    fn matches_series() {
        for p in 0..=8 {
            for alpha in [0, 1, 5, 17, 40] {
                for x in [0.0, 0.3, 2.0, 9.5, 30.0] {
                    let a = laguerre(p, alpha, x);
                    let b = series(p, alpha, x);
                    assert!((a - b).abs() <= 1e-10 * b.abs().max(1.0), "p={p} a={alpha} x={x}");
                }
            }
        }
    }

    proptest! {
        #[test]
        fn recurrence_residual(p in 1u32..8, alpha in 0u32..40, x in 0.0f64..20.0) {
            let (lm, l0, lp) = (laguerre(p - 1, alpha, x), laguerre(p, alpha, x), laguerre(p + 1, alpha, x));
            let pf = p as f64;
            let a = alpha as f64;
            let residual = (pf + 1.0) * lp - (2.0 * pf + 1.0 + a - x) * l0 + (pf + a) * lm;
            let scale = lp.abs().max(l0.abs()).max(lm.abs()).max(1.0) * (pf + a + x + 1.0);
            prop_assert!(residual.abs() < 1e-12 * scale);
        }

        #[test]
        fn derivative_matches_difference(p in 0u32..8, alpha in 0u32..10, x in 0.5f64..10.0) {
            let h = 1e-5;
            let fd = (laguerre(p, alpha, x + h) - laguerre(p, alpha, x - h)) / (2.0 * h);
            let d = laguerre_derivative(p, alpha, x);
            prop_assert!((fd - d).abs() < 1e-5 * d.abs().max(1.0));
        }
    }
}
