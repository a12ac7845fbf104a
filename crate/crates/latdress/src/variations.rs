//! Responses of the dressing and the dressed fields to deformations of the
//! gauge-fixing map, and the equivalent routes to the dressed-field
//! variation.
//!
//! Tangents here are realized by finite differences of the exact lattice
//! composers rather than hand-coded derivative formulas, so this module
//! doubles as an independent oracle for the dense-operator builders.
//!
//! Naming: `xi_param` (the gauge-fixing family parameter) never appears
//! here; `xi` always means a tangent along the dressing.

use crate::action::{action_eval, action_gradient, ActionParams};
use crate::error::Result;
use crate::fields::{dc, FieldBundle, GroupField};
use crate::fpjac::{fp_operator, solve_dressing_direction};
use crate::gaugefix::{gfm_solve, gfm_solve_deformed, GaugeFixSpec};
use crate::tangent::{
    bundle_chart_diff, bundle_move, group_field_chart_diff, AlgebraField, BundleTangent,
};

/// A one-parameter family `GF_eps = GF + eps * direction` of gauge-fixing
/// maps (the constant-offset family).
#[derive(Debug, Clone)]
pub struct GfDeformation {
    pub base: GaugeFixSpec,
    pub direction: AlgebraField,
}

impl GfDeformation {
    pub fn new(base: GaugeFixSpec, direction: AlgebraField) -> Result<Self> {
        if direction.kind() != base.kind() {
            return Err(crate::error::FieldError::Kind(
                "deformation direction kind does not match the spec".into(),
            ));
        }
        Ok(Self { base, direction })
    }
}

/// Response for an arbitrary deformation family given through its evaluation
/// at the dressed configuration: `v_at(psi)` plays the role of the family
/// derivative at `GF(psi)`. The constant family is the special case of a
/// callback ignoring its argument; only the constant family supports the
/// finite-difference cross-check of [`dressing_response_check`], since a
/// state-dependent offset turns the deformed condition nonlinear.
pub fn dressing_response_with<F>(
    spec: &GaugeFixSpec,
    b: &FieldBundle,
    v_at: F,
    tol: f64,
    max_iter: usize,
) -> Result<AlgebraField>
where
    F: Fn(&FieldBundle) -> Result<AlgebraField>,
{
    let (u, rep) = gfm_solve(spec, b, tol, max_iter)?;
    if !rep.converged {
        return Err(crate::error::FieldError::Degenerate(
            "base solve did not converge; response undefined".into(),
        ));
    }
    let psi = dc(b, &u)?;
    let direction = v_at(&psi)?;
    if direction.kind() != spec.kind() {
        return Err(crate::error::FieldError::Kind(
            "deformation direction kind does not match the spec".into(),
        ));
    }
    let op = fp_operator(spec, b, &u)?;
    solve_dressing_direction(&op, &direction)
}

/// First-order response of the dressing to the deformation:
/// the linear solve `-(d_dress GF o DC)^-1 (direction)` in body-frame
/// coordinates at `u = GFM(b)`.
pub fn dressing_response(
    def: &GfDeformation,
    b: &FieldBundle,
    tol: f64,
    max_iter: usize,
) -> Result<AlgebraField> {
    let (u, rep) = gfm_solve(&def.base, b, tol, max_iter)?;
    if !rep.converged {
        return Err(crate::error::FieldError::Degenerate(
            "base solve did not converge; response undefined".into(),
        ));
    }
    let op = fp_operator(&def.base, b, &u)?;
    solve_dressing_direction(&op, &def.direction)
}

/// Outcome of checking the response formula against two deformed solves.
#[derive(Debug, Clone)]
pub struct ResponseReport {
    pub response: AlgebraField,
    /// Sup gap to the central finite difference of the deformed solves.
    pub fd_gap: f64,
    pub conclusive: bool,
}

pub fn dressing_response_check(
    def: &GfDeformation,
    b: &FieldBundle,
    tol: f64,
    max_iter: usize,
) -> Result<ResponseReport> {
    let eps = 1e-5;
    let response = dressing_response(def, b, tol, max_iter)?;
    let (u0, rep0) = gfm_solve(&def.base, b, tol, max_iter)?;
    let (u_plus, rp) =
        gfm_solve_deformed(&def.base, b, tol, max_iter, Some((&def.direction, eps)))?;
    let (u_minus, rm) =
        gfm_solve_deformed(&def.base, b, tol, max_iter, Some((&def.direction, -eps)))?;
    let conclusive = rep0.converged && rp.converged && rm.converged;
    let fwd = group_field_chart_diff(&u0, &u_plus, eps)?;
    let bwd = group_field_chart_diff(&u0, &u_minus, -eps)?;
    let central = fwd.add(&bwd)?.scaled(0.5);
    let fd_gap = central.sub(&response)?.sup_norm();
    Ok(ResponseReport {
        response,
        fd_gap,
        conclusive,
    })
}

/// The dressed-field variation along a dressing tangent, with its two
/// equivalent computations compared.
#[derive(Debug, Clone)]
pub struct DeltaPsi {
    /// The common value (the direct route).
    pub tangent: BundleTangent,
    /// Sup difference between the direct route and the route through an
    /// infinitesimal gauge transformation.
    pub route_gap: f64,
}

/// Variation of `psi = DC(b, u)` along the body-frame tangent `xi`:
///
/// * route 1 evaluates `d/dt GA(psi, exp(t xi))` directly;
/// * route 2 pushes the infinitesimal gauge transformation along
///   `Ad_u xi` through the bundle slot of the dressing composer.
///
/// Both are central differences of exact composers; their agreement is the
/// cross-check.
pub fn delta_psi(b: &FieldBundle, u: &GroupField, xi: &AlgebraField) -> Result<DeltaPsi> {
    let eps = 1e-5;
    let psi = dc(b, u)?;

    // route 1: functional gauge action at the dressed configuration
    let route1 = {
        let plus = psi.ga_apply(&xi.scaled(eps).exp(crate::fields::ActionTag::Adjoint)?)?;
        let minus = psi.ga_apply(&xi.scaled(-eps).exp(crate::fields::ActionTag::Adjoint)?)?;
        let fwd = bundle_chart_diff(&psi, &plus, eps)?;
        let bwd = bundle_chart_diff(&psi, &minus, -eps)?;
        fwd.scaled(0.5).sub(&bwd.scaled(-0.5))
    };

    // route 2: xi_tilde = Ad_u xi, then the chain through DC's bundle slot
    let route2 = {
        let mut xi_tilde = AlgebraField::zeros(b.lattice(), b.kind());
        for s in 0..b.lattice().num_sites() {
            let ad = u.get(s).adjoint_action(&xi.element(s));
            xi_tilde.site_mut(s).copy_from_slice(ad.coeffs());
        }
        // infinitesimal gauge transformation of the base bundle
        let x = {
            let plus = b.ga_apply(
                &xi_tilde
                    .scaled(eps)
                    .exp(crate::fields::ActionTag::Adjoint)?,
            )?;
            let minus = b.ga_apply(
                &xi_tilde
                    .scaled(-eps)
                    .exp(crate::fields::ActionTag::Adjoint)?,
            )?;
            let fwd = bundle_chart_diff(b, &plus, eps)?;
            let bwd = bundle_chart_diff(b, &minus, -eps)?;
            fwd.scaled(0.5).sub(&bwd.scaled(-0.5))
        };
        // bundle-slot derivative of DC at (b, u) along x
        let plus = dc(&bundle_move(b, &x, eps)?, u)?;
        let minus = dc(&bundle_move(b, &x, -eps)?, u)?;
        let fwd = bundle_chart_diff(&psi, &plus, eps)?;
        let bwd = bundle_chart_diff(&psi, &minus, -eps)?;
        fwd.scaled(0.5).sub(&bwd.scaled(-0.5))
    };

    let route_gap = route1.sub(&route2).sup_norm();
    Ok(DeltaPsi {
        tangent: route1,
        route_gap,
    })
}

/// The dressing tangent produced by a deformation, computed from the dressed
/// configuration alone: `xi = -(d GF o GA [psi, e])^-1 (direction)`.
pub fn xi_from_v(
    spec: &GaugeFixSpec,
    psi: &FieldBundle,
    direction: &AlgebraField,
) -> Result<AlgebraField> {
    let e = GroupField::identity(
        psi.lattice(),
        psi.kind(),
        crate::fields::ActionTag::Dressing,
    )?;
    let op = fp_operator(spec, psi, &e)?;
    solve_dressing_direction(&op, direction)
}

/// Outcome of the first-order invariance contraction.
#[derive(Debug, Clone)]
pub struct InvarianceReport {
    /// `|<grad S(psi), delta_xi psi>|`.
    pub contraction: f64,
    pub bound: f64,
    pub passed: bool,
    pub action: f64,
}

/// The variation `delta_xi psi` never moves the action to first order.
pub fn first_order_action_invariance(
    b: &FieldBundle,
    u: &GroupField,
    xi: &AlgebraField,
    p: &ActionParams,
) -> Result<InvarianceReport> {
    let psi = dc(b, u)?;
    let action = action_eval(&psi, p)?;
    let grad = action_gradient(&psi, p)?;
    let dp = delta_psi(b, u, xi)?;
    let contraction = grad.dot(&dp.tangent).abs();
    let bound = 1e-8 * (1.0 + action.abs());
    Ok(InvarianceReport {
        contraction,
        bound,
        passed: contraction <= bound,
        action,
    })
}
