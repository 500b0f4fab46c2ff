//! Deterministic float formatting for tabular output.

/// Shortest representation that round-trips to the same `f64` (at most 17
/// significant digits). Magnitudes outside `[1e-5, 1e16)` use exponent form.
pub fn fmt_shortest(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "nan".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let a = x.abs();
    if a == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

/// `x` rounded to `digits` significant digits, then printed in shortest form.
pub fn fmt_significant(x: f64, digits: usize) -> String {
    if !x.is_finite() || x == 0.0 || digits == 0 {
        return fmt_shortest(x);
    }
    let rounded: f64 = format!("{:.*e}", digits - 1, x).parse().expect("formatted float parses");
    fmt_shortest(rounded)
}
