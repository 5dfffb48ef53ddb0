/// Drift (`c`) and kick (`d`) weights of a four-stage composition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymplecticCoefficients {
    pub c: [f64; 4],
    pub d: [f64; 4],
    /// `2^(1/3)`.
    pub beta: f64,
}

/// Forest–Ruth fourth-order weights.
pub fn fr_coefficients() -> SymplecticCoefficients {
    let beta = 2f64.powf(1.0 / 3.0);
    let c1 = 1.0 / (2.0 * (2.0 - beta));
    let c2 = (1.0 - beta) / (2.0 * (2.0 - beta));
    let d1 = 1.0 / (2.0 - beta);
    let d2 = -beta / (2.0 - beta);
    SymplecticCoefficients {
        c: [c1, c2, c2, c1],
        d: [d1, d2, d1, 0.0],
        beta,
    }
}
