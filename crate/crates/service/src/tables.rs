//! Published expected utilities per scenario, used as regression references.

/// Phase I only study, scenarios 1 to 4 (two decimals).
pub const SIM1_UTILITIES: [[f64; 5]; 4] = [
    [0.41, 0.39, 0.38, 0.38, 0.38],
    [0.43, 0.43, 0.44, 0.44, 0.44],
    [0.46, 0.47, 0.48, 0.48, 0.47],
    [0.43, 0.45, 0.48, 0.5, 0.52],
];

/// Seamless study, scenarios 1 to 12.
pub const SIM2_UTILITIES: [[f64; 5]; 12] = [
    [0.508, 0.496, 0.452, 0.4, 0.32],
    [0.508, 0.556, 0.632, 0.7, 0.68],
    [0.868, 0.796, 0.632, 0.46, 0.32],
    [0.508, 0.616, 0.812, 0.52, 0.32],
    [0.868, 0.616, 0.452, 0.52, 0.68],
    [0.508, 0.616, 0.632, 0.58, 0.5],
    [0.508, 0.496, 0.484, 0.472, 0.46],
    [0.508, 0.556, 0.664, 0.772, 0.82],
    [0.868, 0.796, 0.664, 0.532, 0.46],
    [0.508, 0.616, 0.844, 0.592, 0.46],
    [0.868, 0.616, 0.484, 0.592, 0.82],
    [0.508, 0.616, 0.664, 0.652, 0.64],
];

pub const SIM2_CONTROL_UTILITY: f64 = 0.452;

pub const SIM1_TOLERANCE: f64 = 0.01;
pub const SIM2_TOLERANCE: f64 = 0.005;
