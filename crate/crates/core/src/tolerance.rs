use serde::{Deserialize, Serialize};

/// Every numerical threshold used by the analysis stack.
///
/// One profile is threaded through all operations so a single override
/// changes the whole pipeline consistently.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ToleranceProfile {
    /// Maximum admissible `‖Mv − λv‖₂ / ‖M‖_F` for a reported eigenpair.
    pub residual_tol: f64,
    /// `|Im λ| ≤ snap_real_tol·(1 + |λ|)` makes an eigenvalue real.
    pub snap_real_tol: f64,
    /// Eigenvalues closer than `cluster_tol·(1 + |λ|)` share a cluster.
    pub cluster_tol: f64,
    /// Gram eigenvalues below `neutral_tol` times the energy scale are neutral.
    pub neutral_tol: f64,
    /// Admissible relative indefinite-product coupling between split subspaces.
    pub orth_tol: f64,
    /// Relative threshold for numerical rank decisions.
    pub rank_tol: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            residual_tol: 1e-9,
            snap_real_tol: 1e-9,
            cluster_tol: 1e-7,
            neutral_tol: 1e-8,
            orth_tol: 1e-8,
            rank_tol: 1e-6,
        }
    }
}

impl ToleranceProfile {
    /// Returns the name of the first field that is not a positive finite number.
    pub fn first_invalid(&self) -> Option<&'static str> {
        let fields = [
            ("residual_tol", self.residual_tol),
            ("snap_real_tol", self.snap_real_tol),
            ("cluster_tol", self.cluster_tol),
            ("neutral_tol", self.neutral_tol),
            ("orth_tol", self.orth_tol),
            ("rank_tol", self.rank_tol),
        ];
        fields
            .into_iter()
            .find(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, _)| name)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        assert_eq!(ToleranceProfile::default().first_invalid(), None);
    }

    #[test]
    fn rejects_nonpositive() {
        let tol = ToleranceProfile {
            cluster_tol: 0.0,
            ..Default::default()
        };
        assert_eq!(tol.first_invalid(), Some("cluster_tol"));
    }
}
