use serde::{Deserialize, Serialize};

use crate::besov::holder_norm_vec;
use crate::functionals::q_renorm;
use crate::spectral::PhaseState;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KRadiusCheck {
    pub r: f64,
    pub alpha: f64,
    /// `(M, ‖Π_{≤M}x‖_{𝒞^α} + ‖Q_{s,M}(u)‖_{H^{α−s}})` for each grid cutoff.
    pub values: Vec<(usize, f64)>,
    /// Maximum over the grid; a lower bound for the sup over all `M`.
    pub value: f64,
    pub member: bool,
}

/// Evaluate the defining quantity of `K_R` over the cutoffs in `m_grid`.
pub fn kr_membership(x0: &PhaseState, s: f64, alpha: f64, r: f64, m_grid: &[usize]) -> Result<KRadiusCheck> {
    if alpha >= s {
        return Err(Error::InvalidParameter(format!("need α < s, got α = {alpha}, s = {s}")));
    }
    let values: Vec<(usize, f64)> = m_grid
        .iter()
        .map(|&m| {
            let lo = x0.resized(m);
            let q = q_renorm(&x0.u, s, m);
            (m, holder_norm_vec(&lo, alpha) + q.sobolev_norm(alpha - s))
        })
        .collect();
    let value = values.iter().map(|v| v.1).fold(0.0, f64::max);
    Ok(KRadiusCheck {
        r,
        alpha,
        values,
        value,
        member: value <= r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functionals::sigma;
    use crate::gaussian::{sample_mu, MeasureSpec};
    use crate::rng::RngStream;

    #[test]
    fn zero_state_sees_only_sigma() {
        let c = kr_membership(&PhaseState::zeros(8), 1.0, 0.5, 10.0, &[1, 2, 4, 8]).unwrap();
        assert!((c.value - sigma(8)).abs() < 1e-12);
        assert_eq!(c.member, sigma(8) <= 10.0);
        let c = kr_membership(&PhaseState::zeros(8), 1.0, 0.5, 5.0, &[1, 2, 4, 8]).unwrap();
        assert!(!c.member);
    }

    #[test]
    fn doubling_at_least_doubles_linear_part() {
        let x = sample_mu(&MeasureSpec::new(1.0, 8), &RngStream::new(1, 1));
        let a = holder_norm_vec(&x, 0.5);
        let b = holder_norm_vec(&x.scaled(2.0), 0.5);
        assert!(b >= 2.0 * a * (1.0 - 1e-12));
    }

    #[test]
    fn rejects_alpha_at_least_s() {
        assert!(kr_membership(&PhaseState::zeros(2), 1.0, 1.0, 1.0, &[1]).is_err());
    }
}
