//! Numerical tolerances shared by the solvers. Every value can be overridden
//! from a run configuration (`tol.<key> = value`) or on the command line.

/// Tolerance set. `Default` holds the library defaults.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Roots closer than `cluster·(1+|λ|)` are tagged as one multiple root.
    pub cluster: f64,
    /// Bound on `|p(λ)| / (max|aₖ|·(1+|λ|)^deg)` for an accepted root.
    pub root_residual: f64,
    /// Bound on `‖L(λ)u‖ / ((1+|λ|²)·max(‖S‖, 1))` for an accepted eigenvector.
    pub eigvec_residual: f64,
    /// Relative band around zero in which `max Re λ` counts as marginal.
    pub marginal: f64,
    /// Target `|max Re λ|` for refined boundary vertices.
    pub boundary: f64,
    /// Relative singular-value threshold used for numerical rank.
    pub rank: f64,
    /// Relative discriminant threshold for certifying a double root.
    pub discriminant: f64,
    /// Relative step-halving disagreement allowed in the monodromy integration.
    pub halving: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            cluster: 1e-6,
            root_residual: 1e-12,
            eigvec_residual: 1e-8,
            marginal: 1e-8,
            boundary: 1e-9,
            rank: 1e-7,
            discriminant: 1e-10,
            halving: 1e-4,
        }
    }
}

impl Tolerances {
    pub const KEYS: [&'static str; 8] = [
        "cluster",
        "root_residual",
        "eigvec_residual",
        "marginal",
        "boundary",
        "rank",
        "discriminant",
        "halving",
    ];

    pub fn get(&self, key: &str) -> Option<f64> {
        Some(match key {
            "cluster" => self.cluster,
            "root_residual" => self.root_residual,
            "eigvec_residual" => self.eigvec_residual,
            "marginal" => self.marginal,
            "boundary" => self.boundary,
            "rank" => self.rank,
            "discriminant" => self.discriminant,
            "halving" => self.halving,
            _ => return None,
        })
    }

    /// Sets one tolerance by name. Returns `false` for an unknown key.
    pub fn set(&mut self, key: &str, value: f64) -> bool {
        let slot = match key {
            "cluster" => &mut self.cluster,
            "root_residual" => &mut self.root_residual,
            "eigvec_residual" => &mut self.eigvec_residual,
            "marginal" => &mut self.marginal,
            "boundary" => &mut self.boundary,
            "rank" => &mut self.rank,
            "discriminant" => &mut self.discriminant,
            "halving" => &mut self.halving,
            _ => return false,
        };
        *slot = value;
        true
    }
}
