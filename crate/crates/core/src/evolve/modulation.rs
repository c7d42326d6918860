use crate::diagnostics::momentum;
use crate::error::{Error, Result};
use crate::field::{grad_sq_norm, inner_product, mass, ComplexField};
use crate::ground_state::GroundState;
use crate::symmetry::{apply_group_unchecked, GroupElement};

/// Mean frequency `P(f) / M(f)`.
pub fn mean_frequency(f: &ComplexField) -> Result<Vec<f64>> {
    let m = mass(f);
    if m == 0.0 {
        return Err(Error::Argument("mean frequency of the zero field".into()));
    }
    Ok(momentum(f).into_iter().map(|p| p / m).collect())
}

/// Moment-based group element `g` with `g f ≈ Q`.
///
/// Mean frequency, centroid and the de-boosted gradient norm fix the boost,
/// translation and scale; the phase aligns the candidate with `Q`.
pub fn track_modulation(f: &ComplexField, q: &GroundState) -> Result<GroupElement> {
    f.grid().check_same(q.grid())?;
    let ratio = (mass(f) / q.mass).sqrt();
    if !(0.9..=1.1).contains(&ratio) {
        return Err(Error::Precondition(format!(
            "||f||_2 / ||Q||_2 = {ratio:.4} is outside [0.9, 1.1]"
        )));
    }
    moment_estimate(f, q)
}

/// The moment-based estimate behind [`track_modulation`] without the mass gate.
pub(crate) fn moment_estimate(f: &ComplexField, q: &GroundState) -> Result<GroupElement> {
    f.grid().check_same(q.grid())?;
    let m = mass(f);
    if m == 0.0 {
        return Err(Error::Argument("modulation of the zero field".into()));
    }
    let d = f.grid().dim();
    let p = momentum(f);
    let xi_bar: Vec<f64> = p.iter().map(|v| v / m).collect();
    let p2: f64 = p.iter().map(|v| v * v).sum();
    let grad_deboosted = (grad_sq_norm(f) - p2 / m).max(0.0).sqrt();
    if grad_deboosted == 0.0 {
        return Err(Error::Precondition("field has no gradient after removing its mean frequency".into()));
    }
    let lambda = q.grad_sq.sqrt() / grad_deboosted;
    let center = f.centroid();
    let xi: Vec<f64> = xi_bar.iter().map(|v| -lambda * v).collect();
    let mut g = GroupElement::new(lambda, &center, &xi, 0.0)?;
    let aligned = apply_group_unchecked(&g, f)?;
    let overlap = inner_product(&aligned, &q.field)?;
    g.gamma = -overlap.arg();
    debug_assert_eq!(g.dim, d);
    Ok(g)
}
