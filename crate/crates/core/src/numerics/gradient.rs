use num_complex::Complex64;

/// Second-order central-difference gradient of a complex scalar field.
pub fn central_difference_gradient<F>(f: F, point: [f64; 3], h: f64) -> [Complex64; 3]
where
    F: Fn([f64; 3]) -> Complex64,
{
    let mut out = [Complex64::new(0.0, 0.0); 3];
    for (axis, slot) in out.iter_mut().enumerate() {
        let mut plus = point;
        let mut minus = point;
        plus[axis] += h;
        minus[axis] -= h;
        *slot = (f(plus) - f(minus)) / (2.0 * h);
    }
    out
}
