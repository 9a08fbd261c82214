/// Seven significant digits, fixed notation where it stays readable.
pub fn sig7(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "nan".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let mag = x.abs().log10().floor() as i32;
    if !(-5..=15).contains(&mag) {
        return format!("{x:.6e}");
    }
    let decimals = (6 - mag).max(0) as usize;
    format!("{x:.decimals$}")
}

/// Weekly rate expressed as an annual rate, `e^{(365/7)w} − 1`.
pub fn annualize(weekly: f64) -> f64 {
    (365.0 / 7.0 * weekly).exp_m1()
}
