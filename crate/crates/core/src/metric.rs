use std::f64::consts::FRAC_PI_2;

/// Angle in radians between two lines with slopes `g` and `g_star`.
///
/// Returns a value in `[0, π/2]`. Perpendicular slopes (`1 + g·g* == 0`)
/// map to `π/2`.
pub fn angular_deviation(g: f64, g_star: f64) -> f64 {
    let denom = 1.0 + g_star * g;
    if denom == 0.0 {
        return FRAC_PI_2;
    }
    ((g_star - g) / denom).abs().atan()
}

pub fn degrees_to_radians(deg: f64) -> f64 {
    deg.to_radians()
}
