use serde::{Deserialize, Serialize};

/// Every threshold used by the detectors, in one auditable table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// |g(v,v)| below this (relative to |v|²) counts as isotropic.
    pub isotropy: f64,
    /// |det g| at or below this is a degenerate metric.
    pub degenerate_det: f64,
    /// |det h| at or below this is a degenerate (lightlike) submanifold.
    pub degenerate_induced: f64,
    /// Geodesy and umbilicity residuals below this are certificates.
    pub certificate: f64,
    /// Residuals above this reject.
    pub rejection: f64,
    /// Killing residual accepted for basis fields.
    pub killing: f64,
    /// Lightlike search objective accepted.
    pub lightlike: f64,
    /// Homothety and conformality certificates.
    pub homothety: f64,
    /// Off-block metric entries below this count as zero.
    pub block: f64,
    /// Sectional-curvature spread certifying constant curvature.
    pub curvature_spread: f64,
    /// Singular values above this count toward a rank.
    pub rank: f64,
    /// Scan acceptance fraction above which C_x is a cone.
    pub cone_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            isotropy: 1e-9,
            degenerate_det: 1e-12,
            degenerate_induced: 1e-10,
            certificate: 1e-7,
            rejection: 1e-4,
            killing: 1e-8,
            lightlike: 1e-6,
            homothety: 1e-8,
            block: 1e-8,
            curvature_spread: 1e-6,
            rank: 1e-8,
            cone_fraction: 0.95,
        }
    }
}
