/// Shortest decimal representation that round-trips through `parse_real`.
///
/// Magnitudes in `[1e-5, 1e16)` use positional notation, everything else
/// scientific (`1e-300`), so very small or very large values stay short.
pub fn format_real(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Parses a finite real; `None` for malformed or non-finite tokens.
pub fn parse_real(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|v| v.is_finite())
}
