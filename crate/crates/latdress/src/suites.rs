//! Batch drivers for the composer and action identity suites.
//!
//! These run the exact identities over many seeded random configurations and
//! report the worst deviation per identity, so the command-line surface and
//! the acceptance tests share one implementation.

use crate::action::{action_directional_fd, action_eval, action_gradient, ActionParams};
use crate::error::Result;
use crate::exec;
use crate::fields::{dc, gt, iota, mu, udc, ActionTag};
use crate::group::GroupKind;
use crate::lattice::Lattice;
use crate::random::{random_bundle, random_group_field, random_unit_tangent};

/// One identity's outcome over a batch of configurations.
#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub max_deviation: f64,
    pub tol: f64,
    pub passed: bool,
}

impl CheckLine {
    fn new(name: &str, max_deviation: f64, tol: f64) -> Self {
        Self {
            name: name.to_string(),
            max_deviation,
            tol,
            passed: max_deviation <= tol,
        }
    }
}

/// Worst deviations of the composer identities over `n_configs` random
/// configurations.
pub fn composer_suite(
    kind: GroupKind,
    lat: &Lattice,
    n_configs: usize,
    seed: u64,
    tol: f64,
) -> Result<Vec<CheckLine>> {
    const IDS: usize = 8;
    let per_config = exec::map_indexed(n_configs, |k| -> Result<[f64; IDS]> {
        let s = seed.wrapping_add(k as u64 * 1009);
        let spread = 0.6;
        let b = random_bundle(lat, kind, s, spread);
        let gamma = random_group_field(lat, kind, s + 1, spread, ActionTag::Adjoint);
        let gamma2 = random_group_field(lat, kind, s + 2, spread, ActionTag::Adjoint);
        let u = random_group_field(lat, kind, s + 3, spread, ActionTag::Dressing);
        let u2 = random_group_field(lat, kind, s + 4, spread, ActionTag::Dressing);
        let v = iota(&random_group_field(
            lat,
            kind,
            s + 5,
            spread,
            ActionTag::Dressing,
        ))?;

        let mut d = [0.0f64; IDS];

        // GT(phi^g', gamma^g') = GT(phi, gamma)^g'
        let lhs = gt(&gt(&b, &gamma2)?, &gamma.gauge_transform(&gamma2)?)?;
        let rhs = gt(&gt(&b, &gamma)?, &gamma2)?;
        d[0] = lhs.sup_distance(&rhs);

        // GT group law
        let lhs = gt(&gt(&b, &gamma)?, &gamma2)?;
        let rhs = gt(&b, &mu(&gamma, &gamma2)?)?;
        d[1] = lhs.sup_distance(&rhs);

        // DC invariance: DC(phi^g, u^g) = DC(phi, u)
        let lhs = dc(&gt(&b, &gamma)?, &u.gauge_transform(&gamma)?)?;
        let rhs = dc(&b, &u)?;
        d[2] = lhs.sup_distance(&rhs);

        // DC rebase: DC_u(phi^g) = DC_{g u}(phi)
        let lhs = dc(&gt(&b, &gamma)?, &u)?;
        let rhs = dc(&b, &mu(&gamma, &u)?)?;
        d[3] = lhs.sup_distance(&rhs);

        // UDC o DC roundtrip
        let back = udc(&dc(&b, &u)?, &iota(&u)?)?;
        d[4] = back.sup_distance(&b);

        // UDC equivariance: UDC_v(psi)^g = UDC_{v g}(psi)
        let psi = dc(&b, &u)?;
        let lhs = gt(&udc(&psi, &v)?, &gamma)?;
        let rhs = udc(&psi, &mu(&v, &gamma)?)?;
        d[5] = lhs.sup_distance(&rhs);

        // GA right-action law
        let lhs = b.ga_apply(&gamma)?.ga_apply(&gamma2)?;
        let rhs = b.ga_apply(&mu(&gamma, &gamma2)?)?;
        d[6] = lhs.sup_distance(&rhs);

        // unique orbit: gamma := u1 u2^-1 recovers u2 from u1
        let g12 = mu(&u, &iota(&u2)?)?;
        let rebuilt = mu(&iota(&g12)?, &u)?;
        d[7] = rebuilt.sup_distance(&u2);

        Ok(d)
    });

    let mut worst = [0.0f64; IDS];
    for row in per_config {
        let row = row?;
        for (w, r) in worst.iter_mut().zip(row) {
            *w = w.max(r);
        }
    }

    let names = [
        "gt-equivariance",
        "gt-group-law",
        "dc-invariance",
        "dc-rebase",
        "udc-roundtrip",
        "udc-equivariance",
        "ga-group-law",
        "mu-unique-orbit",
    ];
    let mut lines: Vec<CheckLine> = names
        .iter()
        .zip(worst)
        .map(|(n, w)| CheckLine::new(n, w, tol))
        .collect();

    // tag-table rejections, checked once
    let b = random_bundle(lat, kind, seed, 0.5);
    let u = random_group_field(lat, kind, seed + 6, 0.5, ActionTag::Dressing);
    let u2 = random_group_field(lat, kind, seed + 7, 0.5, ActionTag::Dressing);
    let trivial = dc(&b, &u)?;
    let rejections_hold = mu(&u, &u2).is_err()
        && iota(&u.retagged(ActionTag::Trivial)?).is_err()
        && dc(&trivial, &u).is_err()
        && udc(&b, &iota(&u)?).is_err()
        && gt(&b, &u).is_err();
    lines.push(CheckLine::new(
        "tag-admissibility",
        if rejections_hold { 0.0 } else { 1.0 },
        0.5,
    ));
    Ok(lines)
}

/// Worst deviations of the action invariances and the gradient/FD agreement.
pub fn action_suite(
    kind: GroupKind,
    lat: &Lattice,
    n_configs: usize,
    seed: u64,
    params: &ActionParams,
    tol_invariance: f64,
    tol_gradient: f64,
) -> Result<Vec<CheckLine>> {
    let per_config = exec::map_indexed(n_configs, |k| -> Result<[f64; 3]> {
        let s = seed.wrapping_add(k as u64 * 2003);
        let b = random_bundle(lat, kind, s, 0.5);
        let gamma = random_group_field(lat, kind, s + 1, 0.5, ActionTag::Adjoint);
        let u = random_group_field(lat, kind, s + 2, 0.5, ActionTag::Dressing);
        let s0 = action_eval(&b, params)?;
        let scale = 1.0 + s0.abs();
        let d_gt = (action_eval(&gt(&b, &gamma)?, params)? - s0).abs() / scale;
        let d_dc = (action_eval(&dc(&b, &u)?, params)? - s0).abs() / scale;
        // gradient vs central differences on one unit direction per config
        let grad = action_gradient(&b, params)?;
        let dir = random_unit_tangent(&b, s + 3);
        let fd = action_directional_fd(&b, params, &dir, 1e-4)?;
        let d_fd = (grad.dot(&dir) - fd).abs();
        Ok([d_gt, d_dc, d_fd])
    });

    let mut worst = [0.0f64; 3];
    for row in per_config {
        let row = row?;
        for (w, r) in worst.iter_mut().zip(row) {
            *w = w.max(r);
        }
    }
    Ok(vec![
        CheckLine::new("action-gt-invariance", worst[0], tol_invariance),
        CheckLine::new("action-dc-invariance", worst[1], tol_invariance),
        CheckLine::new("action-gradient-fd", worst[2], tol_gradient),
    ])
}
