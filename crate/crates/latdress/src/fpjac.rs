//! Dense functional-derivative operators, log-determinants, and the
//! change-of-variables Jacobians of the polar field decompositions.
//!
//! Everything here is desk-scale by design: operators are stored densely,
//! determinants go through LU with partial pivoting, and a size cap keeps
//! the builders honest. Functional determinants are taken on the finite
//! lattice, where the formal continuum products become finite products over
//! sites.
//!
//! Coordinates. Derivatives along a dressing are taken in left-translation
//! (body-frame) algebra coordinates, i.e. the map
//! `x -> d/dt GF(GA(b, w exp(t x)))|_0`. In these coordinates the tangent of
//! left translation has determinant exactly 1, which is what makes the
//! determinant shift check an identity.

use nalgebra::{DMatrix, DVector, Matrix4};

use crate::error::{FieldError, Result};
use crate::exec;
use crate::fields::{dc, mu, ActionTag, FieldBundle, GroupField};
use crate::gaugefix::{gf_eval, gfm_solve, GaugeFixSpec};
use crate::group::{exp_map, real4_generator, AlgebraElement, GroupKind};
use crate::tangent::{bundle_move, group_field_chart_diff, AlgebraField, BundleTangent};

/// Largest total algebra dimension a dense operator may have.
pub const DENSE_CAP: usize = 2000;

/// Finite-difference stencils used by the dressing-derivative builders.
#[derive(Debug, Clone, Copy)]
pub enum Stencil {
    /// 3-point central difference (cheap; Newton iterations).
    Central { h: f64 },
    /// 5-point central difference (high-accuracy operator builds).
    FivePoint { h: f64 },
}

/// A dense linear operator on per-site algebra coordinates.
///
/// Row and column index `site * algebra_dim + component`.
#[derive(Debug, Clone)]
pub struct DenseOperator {
    pub matrix: DMatrix<f64>,
    kind: GroupKind,
    sites: usize,
}

impl DenseOperator {
    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn index_of(&self, site: usize, component: usize) -> usize {
        site * self.kind.algebra_dim() + component
    }

    pub fn site_component(&self, index: usize) -> (usize, usize) {
        (
            index / self.kind.algebra_dim(),
            index % self.kind.algebra_dim(),
        )
    }

    pub fn sites(&self) -> usize {
        self.sites
    }

    /// Apply to a flat coordinate vector.
    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.matrix * x
    }

    /// Solve `M y = x`; LU first, SVD as fallback for the singular cases.
    pub fn solve(&self, x: &DVector<f64>) -> Result<DVector<f64>> {
        if let Some(y) = self.matrix.clone().lu().solve(x) {
            return Ok(y);
        }
        self.matrix
            .clone()
            .svd(true, true)
            .solve(x, 1e-12)
            .map_err(|e| FieldError::Singular(e.to_string()))
    }
}

/// Flattened `gf_eval` after dressing the base by `w exp(t x)`, as needed by
/// the column builders.
fn residual_at(
    spec: &GaugeFixSpec,
    base: &FieldBundle,
    w: &GroupField,
    site: usize,
    component: usize,
    t: f64,
) -> Result<DVector<f64>> {
    let kind = base.kind();
    let dim = kind.algebra_dim();
    let mut coeffs = vec![0.0; dim];
    coeffs[component] = t;
    let mut moved = w.clone();
    let bumped = w
        .get(site)
        .mul(&exp_map(&AlgebraElement::from_coeffs(kind, &coeffs)))?;
    moved.set(site, bumped);
    let dressed = base.ga_apply(&moved)?;
    let r = gf_eval(spec, &dressed)?;
    Ok(DVector::from_row_slice(r.data()))
}

/// FD Jacobian of the dressing slot of `GF o GA` at `(base, w)` in
/// body-frame coordinates.
pub(crate) fn fd_dressing_jacobian(
    spec: &GaugeFixSpec,
    base: &FieldBundle,
    w: &GroupField,
    stencil: Stencil,
) -> Result<DMatrix<f64>> {
    let lat = base.lattice().clone();
    let kind = base.kind();
    let dim = kind.algebra_dim();
    let n = lat.num_sites() * dim;
    if n > DENSE_CAP {
        return Err(FieldError::Capacity(format!(
            "dense operator of dimension {n} exceeds the cap {DENSE_CAP}"
        )));
    }
    let columns = exec::map_indexed(n, |j| -> Result<DVector<f64>> {
        let (site, comp) = (j / dim, j % dim);
        match stencil {
            Stencil::Central { h } => {
                let plus = residual_at(spec, base, w, site, comp, h)?;
                let minus = residual_at(spec, base, w, site, comp, -h)?;
                Ok((plus - minus) / (2.0 * h))
            }
            Stencil::FivePoint { h } => {
                let p2 = residual_at(spec, base, w, site, comp, 2.0 * h)?;
                let p1 = residual_at(spec, base, w, site, comp, h)?;
                let m1 = residual_at(spec, base, w, site, comp, -h)?;
                let m2 = residual_at(spec, base, w, site, comp, -2.0 * h)?;
                Ok((-p2 + p1 * 8.0 - m1 * 8.0 + m2) / (12.0 * h))
            }
        }
    });
    let columns = columns.into_iter().collect::<Result<Vec<_>>>()?;
    let mut m = DMatrix::zeros(n, n);
    for (j, col) in columns.iter().enumerate() {
        m.set_column(j, col);
    }
    Ok(m)
}

/// The derivative of the gauge-fixing map along the dressing at `(base, w)`,
/// built with the high-accuracy stencil. For the abelian R_xi map this is
/// the screened lattice Laplacian `(e v xi) Id - Lap` independently of the
/// configuration.
pub fn fp_operator(
    spec: &GaugeFixSpec,
    base: &FieldBundle,
    w: &GroupField,
) -> Result<DenseOperator> {
    let matrix = fd_dressing_jacobian(spec, base, w, Stencil::FivePoint { h: 1e-3 })?;
    Ok(DenseOperator {
        matrix,
        kind: base.kind(),
        sites: base.lattice().num_sites(),
    })
}

/// Log-determinant with sign.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogDet {
    /// `ln |det|`; `-inf` when exactly singular.
    pub log_abs: f64,
    /// `+1` or `-1`; `0` flags an exactly singular matrix.
    pub sign: i8,
}

impl LogDet {
    pub fn is_singular(&self) -> bool {
        self.sign == 0
    }
}

/// LU with partial pivoting on a copy; `exp(log_abs) * sign` is the
/// determinant.
pub fn lu_logdet(a: &DMatrix<f64>) -> LogDet {
    assert_eq!(a.nrows(), a.ncols(), "logdet needs a square matrix");
    let n = a.nrows();
    let mut m = a.clone();
    let mut sign = 1i8;
    let mut log_abs = 0.0f64;
    for k in 0..n {
        let mut piv = k;
        let mut best = m[(k, k)].abs();
        for i in (k + 1)..n {
            let v = m[(i, k)].abs();
            if v > best {
                best = v;
                piv = i;
            }
        }
        if best == 0.0 {
            return LogDet {
                log_abs: f64::NEG_INFINITY,
                sign: 0,
            };
        }
        if piv != k {
            m.swap_rows(piv, k);
            sign = -sign;
        }
        let d = m[(k, k)];
        if d < 0.0 {
            sign = -sign;
        }
        log_abs += d.abs().ln();
        for i in (k + 1)..n {
            let f = m[(i, k)] / d;
            for j in (k + 1)..n {
                m[(i, j)] -= f * m[(k, j)];
            }
        }
    }
    LogDet { log_abs, sign }
}

pub fn fp_logdet(op: &DenseOperator) -> LogDet {
    lu_logdet(&op.matrix)
}

/// Outcome of the determinant shift check.
#[derive(Debug, Clone)]
pub struct DeltaShiftReport {
    /// Log-determinant of the dressing derivative at `(b, gamma u)`.
    pub logdet_direct: f64,
    /// Log-determinant at the dressed base with the identity dressing.
    pub logdet_rebased: f64,
    pub gap: f64,
    pub signs_match: bool,
    pub conclusive: bool,
}

/// Verifies that re-basing the dressing derivative at the dressed
/// configuration leaves the determinant unchanged: in body-frame
/// coordinates the left-translation factor is exactly 1, so
/// `logdet at (b, gamma u)` must equal `logdet at (DC(b, gamma u), e)`.
pub fn check_delta_shift(
    spec: &GaugeFixSpec,
    b: &FieldBundle,
    gamma: &GroupField,
    u: &GroupField,
) -> Result<DeltaShiftReport> {
    let w = mu(gamma, u)?;
    let direct = fp_operator(spec, b, &w)?;
    let psi = dc(b, &w)?;
    let e = GroupField::identity(b.lattice(), b.kind(), ActionTag::Dressing)?;
    let rebased = fp_operator(spec, &psi, &e)?;
    let ld_direct = fp_logdet(&direct);
    let ld_rebased = fp_logdet(&rebased);
    let conclusive = !ld_direct.is_singular() && !ld_rebased.is_singular();
    Ok(DeltaShiftReport {
        logdet_direct: ld_direct.log_abs,
        logdet_rebased: ld_rebased.log_abs,
        gap: (ld_direct.log_abs - ld_rebased.log_abs).abs(),
        signs_match: ld_direct.sign == ld_rebased.sign,
        conclusive,
    })
}

// ---------------------------------------------------------------------------
// Polar change-of-variables Jacobians
// ---------------------------------------------------------------------------

/// Radial coordinate chart of the polar decomposition.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RadialChart {
    /// The norm itself (`rho`, `eta`).
    Radial,
    /// Its logarithm; the two charts' determinants differ by the product of
    /// inverse norms.
    LogRadial,
}

/// Report of one Jacobian verification.
#[derive(Debug, Clone)]
pub struct JacobianReport {
    pub logdet_numeric: f64,
    pub logdet_predicted: f64,
    /// `|exp(logdet_numeric - logdet_predicted) - 1|`.
    pub relative_error: f64,
    pub per_site_factors: Vec<f64>,
}

impl JacobianReport {
    fn new(logdet_numeric: f64, logdet_predicted: f64, per_site_factors: Vec<f64>) -> Self {
        let relative_error = ((logdet_numeric - logdet_predicted).exp() - 1.0).abs();
        Self {
            logdet_numeric,
            logdet_predicted,
            relative_error,
            per_site_factors,
        }
    }
}

const POLAR_FD_STEP: f64 = 1e-5;

/// FD Jacobian of the abelian change of variables
/// `(dressed links, radial, dressing) -> (links, scalar)`.
///
/// The prediction is the product of the per-site radial norms (squared for
/// the log chart); the link block is an exact angle addition and contributes
/// 1.
pub fn polar_jacobian_u1(b: &FieldBundle, chart: RadialChart) -> Result<JacobianReport> {
    if b.kind() != GroupKind::U1 {
        return Err(FieldError::Kind(
            "polar_jacobian_u1 needs a U(1) bundle".into(),
        ));
    }
    crate::tangent::require_nonvanishing(&b.scalar, "abelian polar Jacobian")?;
    let lat = b.lattice().clone();
    let m = lat.num_dims();
    let v = lat.num_sites();
    let links = lat.num_links();
    let n = links + 2 * v;
    if n > DENSE_CAP {
        return Err(FieldError::Capacity(format!(
            "Jacobian dimension {n} exceeds {DENSE_CAP}"
        )));
    }

    // dressed-side base point
    let rho: Vec<f64> = (0..v).map(|s| b.scalar.complex_at(s).norm()).collect();
    let alpha: Vec<f64> = (0..v).map(|s| b.scalar.complex_at(s).arg()).collect();
    let a_links: Vec<f64> = (0..links)
        .map(|idx| {
            let (site, dir) = (idx / m, idx % m);
            let fwd = lat.neighbor(site, dir, 1).expect("in range");
            // dressing by u = e^{i alpha}: theta + alpha(x+mu) - alpha(x)
            crate::group::principal_angle(b.links.get(site, dir).angle() + alpha[fwd] - alpha[site])
        })
        .collect();

    // forward map C: inputs (a, radial, u-angle) -> outputs (A, phi)
    let eval = |inp: &[f64]| -> Vec<f64> {
        let (ia, rest) = inp.split_at(links);
        let (ir, iu) = rest.split_at(v);
        let mut out = vec![0.0; n];
        for idx in 0..links {
            let (site, dir) = (idx / m, idx % m);
            let fwd = lat.neighbor(site, dir, 1).expect("in range");
            // undressing: A = a - (u(x+mu) - u(x)) in angles
            out[idx] = ia[idx] - iu[fwd] + iu[site];
        }
        for (s, &radial) in ir.iter().enumerate() {
            let r = match chart {
                RadialChart::Radial => radial,
                RadialChart::LogRadial => radial.exp(),
            };
            let z = num_complex::Complex64::from_polar(r, iu[s]);
            out[links + 2 * s] = z.re;
            out[links + 2 * s + 1] = z.im;
        }
        out
    };

    let mut base_in = Vec::with_capacity(n);
    base_in.extend_from_slice(&a_links);
    match chart {
        RadialChart::Radial => base_in.extend(rho.iter().copied()),
        RadialChart::LogRadial => base_in.extend(rho.iter().map(|r| r.ln())),
    }
    base_in.extend(alpha.iter().copied());

    let matrix = fd_square_jacobian(
        &base_in,
        eval,
        POLAR_FD_STEP,
        |col_out_plus, col_out_minus, h| {
            // link outputs are angles: difference through the principal branch
            let mut col = vec![0.0; n];
            for (i, c) in col.iter_mut().enumerate() {
                let diff = if i < links {
                    crate::group::principal_angle(col_out_plus[i] - col_out_minus[i])
                } else {
                    col_out_plus[i] - col_out_minus[i]
                };
                *c = diff / (2.0 * h);
            }
            col
        },
    );

    let ld = lu_logdet(&matrix);
    let factor = match chart {
        RadialChart::Radial => 1.0,
        RadialChart::LogRadial => 2.0,
    };
    let predicted: f64 = rho.iter().map(|r| factor * r.ln()).sum();
    Ok(JacobianReport::new(ld.log_abs, predicted, rho))
}

/// FD Jacobian of the SU(2) change of variables
/// `(dressed links, radial, dressing) -> (links, scalar)` against the
/// prediction `prod_x eta(x)^3` (radial chart; `eta^4` for the log chart).
///
/// Link inputs and outputs use matched right-translation charts, in which
/// the link block is the adjoint action with `|det| = 1` per link.
pub fn polar_jacobian_su2(b: &FieldBundle, chart: RadialChart) -> Result<JacobianReport> {
    if b.kind() != GroupKind::Su2 {
        return Err(FieldError::Kind(
            "polar_jacobian_su2 needs an SU(2) bundle".into(),
        ));
    }
    crate::tangent::require_nonvanishing(&b.scalar, "SU(2) polar Jacobian")?;
    let lat = b.lattice().clone();
    let m = lat.num_dims();
    let v = lat.num_sites();
    let links = lat.num_links();
    let n = 3 * links + 4 * v;
    if n > DENSE_CAP {
        return Err(FieldError::Capacity(format!(
            "Jacobian dimension {n} exceeds {DENSE_CAP}"
        )));
    }

    let spec = GaugeFixSpec::unitary_su2(nalgebra::Vector4::new(0.0, 0.0, 1.0, 0.0))?;
    let (u0, rep) = gfm_solve(&spec, b, 1e-10, 10)?;
    if !rep.converged {
        return Err(FieldError::Degenerate(
            "unitary dressing did not converge".into(),
        ));
    }
    let eta: Vec<f64> = (0..v).map(|s| b.scalar.norm_at(s)).collect();
    let dressed = dc(b, &u0)?;
    let a_base = dressed.links.clone();
    let base_out_links = b.links.clone();

    // input coordinate layout: 3 per link, then radial per site, then 3 per
    // site for the dressing
    let nin = 3 * links + v + 3 * v;
    debug_assert_eq!(nin, n);

    let eval = |inp: &[f64]| -> Result<Vec<f64>> {
        let (il, rest) = inp.split_at(3 * links);
        let (ir, iu) = rest.split_at(v);
        // dressing u = exp(z) u0 (left chart at the base point)
        let mut u = u0.clone();
        for s in 0..v {
            let z = AlgebraElement::from_coeffs(GroupKind::Su2, &iu[3 * s..3 * s + 3]);
            u.set(s, exp_map(&z).mul(u0.get(s))?);
        }
        let mut out = vec![0.0; n];
        for idx in 0..links {
            let (site, dir) = (idx / m, idx % m);
            let fwd = lat.neighbor(site, dir, 1)?;
            let z = AlgebraElement::from_coeffs(GroupKind::Su2, &il[3 * idx..3 * idx + 3]);
            let a = a_base.get(site, dir).mul(&exp_map(&z))?;
            // undressing: A = u(x) a u(x+mu)^-1
            let big_a = u.get(site).mul(&a)?.mul(&u.get(fwd).inverse())?;
            // output chart: log relative to the base link
            let rel = base_out_links.get(site, dir).inverse().mul(&big_a)?;
            let x = crate::group::log_map(&rel)?;
            out[3 * idx..3 * idx + 3].copy_from_slice(x.coeffs());
        }
        for (s, &radial) in ir.iter().enumerate() {
            let r = match chart {
                RadialChart::Radial => radial,
                RadialChart::LogRadial => radial.exp(),
            };
            let base = nalgebra::Vector2::new(
                num_complex::Complex64::new(0.0, 0.0),
                num_complex::Complex64::new(r, 0.0),
            );
            let phi = u.get(s).matrix() * base;
            let o = 3 * links + 4 * s;
            out[o] = phi[0].re;
            out[o + 1] = phi[0].im;
            out[o + 2] = phi[1].re;
            out[o + 3] = phi[1].im;
        }
        Ok(out)
    };

    let mut base_in = vec![0.0; n];
    match chart {
        RadialChart::Radial => {
            for s in 0..v {
                base_in[3 * links + s] = eta[s];
            }
        }
        RadialChart::LogRadial => {
            for s in 0..v {
                base_in[3 * links + s] = eta[s].ln();
            }
        }
    }

    let h = POLAR_FD_STEP;
    let cols = exec::map_indexed(n, |j| -> Result<Vec<f64>> {
        let mut plus_in = base_in.clone();
        plus_in[j] += h;
        let mut minus_in = base_in.clone();
        minus_in[j] -= h;
        let plus = eval(&plus_in)?;
        let minus = eval(&minus_in)?;
        Ok(plus
            .iter()
            .zip(&minus)
            .map(|(p, q)| (p - q) / (2.0 * h))
            .collect())
    });
    let cols = cols.into_iter().collect::<Result<Vec<_>>>()?;
    let mut matrix = DMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        matrix.set_column(j, &DVector::from_row_slice(col));
    }

    let ld = lu_logdet(&matrix);
    let factor = match chart {
        RadialChart::Radial => 3.0,
        RadialChart::LogRadial => 4.0,
    };
    let predicted: f64 = eta.iter().map(|r| factor * r.ln()).sum();
    Ok(JacobianReport::new(ld.log_abs, predicted, eta))
}

/// The per-site 2x2 scalar block `[d phi / d radial | d phi / d angle]` of
/// the abelian change of variables; its determinant is `rho` in the radial
/// chart (`rho^2` for the log chart).
pub fn unitary_block_u1(phi: num_complex::Complex64, chart: RadialChart) -> nalgebra::Matrix2<f64> {
    let rho = phi.norm();
    let radial = match chart {
        RadialChart::Radial => [phi.re / rho, phi.im / rho],
        RadialChart::LogRadial => [phi.re, phi.im],
    };
    nalgebra::Matrix2::new(radial[0], -phi.im, radial[1], phi.re)
}

/// The per-site 4x4 scalar block `[d phi / d radial | T_1 phi | T_2 phi | T_3 phi]`
/// of the SU(2) change of variables; its determinant is `eta^3` in the
/// radial chart.
pub fn unitary_block_su2(phi: &nalgebra::Vector4<f64>, chart: RadialChart) -> Matrix4<f64> {
    let eta = phi.norm();
    let radial = match chart {
        RadialChart::Radial => phi / eta,
        RadialChart::LogRadial => *phi,
    };
    let t1 = real4_generator(0) * phi;
    let t2 = real4_generator(1) * phi;
    let t3 = real4_generator(2) * phi;
    Matrix4::from_columns(&[radial, t1, t2, t3])
}

fn fd_square_jacobian(
    base_in: &[f64],
    eval: impl Fn(&[f64]) -> Vec<f64> + Sync,
    h: f64,
    combine: impl Fn(&[f64], &[f64], f64) -> Vec<f64> + Sync,
) -> DMatrix<f64> {
    let n = base_in.len();
    let cols = exec::map_indexed(n, |j| {
        let mut plus = base_in.to_vec();
        plus[j] += h;
        let mut minus = base_in.to_vec();
        minus[j] -= h;
        combine(&eval(&plus), &eval(&minus), h)
    });
    let mut m = DMatrix::zeros(n, n);
    for (j, col) in cols.iter().enumerate() {
        m.set_column(j, &DVector::from_row_slice(col));
    }
    m
}

// ---------------------------------------------------------------------------
// Differential of the solution map
// ---------------------------------------------------------------------------

/// Outcome of the chain-rule check on the solution map's differential.
#[derive(Debug, Clone)]
pub struct DifferentialReport {
    /// Sup difference between the linear-solve formula and the
    /// finite-difference of two solves.
    pub sup_difference: f64,
    pub bound: f64,
    pub passed: bool,
    pub conclusive: bool,
}

/// Compares `-(d_dress GF o DC)^-1 (d_bundle GF o DC)(X)` against the
/// forward difference of two dressing solves along `X` (step 1e-5).
pub fn gfm_differential_check(
    spec: &GaugeFixSpec,
    b: &FieldBundle,
    direction: &BundleTangent,
    solve_tol: f64,
    max_iter: usize,
) -> Result<DifferentialReport> {
    let eps = 1e-5;
    let (u, rep) = gfm_solve(spec, b, solve_tol, max_iter)?;
    if !rep.converged {
        return Ok(DifferentialReport {
            sup_difference: f64::NAN,
            bound: f64::NAN,
            passed: false,
            conclusive: false,
        });
    }
    let op = fp_operator(spec, b, &u)?;

    // bundle-slot derivative at fixed dressing
    let r_plus = gf_eval(spec, &bundle_move(b, direction, eps)?.ga_apply(&u)?)?;
    let r_minus = gf_eval(spec, &bundle_move(b, direction, -eps)?.ga_apply(&u)?)?;
    let dv = DVector::from_row_slice(
        &r_plus
            .data()
            .iter()
            .zip(r_minus.data())
            .map(|(p, q)| (p - q) / (2.0 * eps))
            .collect::<Vec<_>>(),
    );
    let formula = match op.solve(&dv) {
        Ok(y) => -y,
        Err(_) => {
            return Ok(DifferentialReport {
                sup_difference: f64::NAN,
                bound: f64::NAN,
                passed: false,
                conclusive: false,
            })
        }
    };

    // forward difference of two solves
    let moved = bundle_move(b, direction, eps)?;
    let (u2, rep2) = gfm_solve(spec, &moved, solve_tol, max_iter)?;
    if !rep2.converged {
        return Ok(DifferentialReport {
            sup_difference: f64::NAN,
            bound: f64::NAN,
            passed: false,
            conclusive: false,
        });
    }
    let fd = group_field_chart_diff(&u, &u2, eps)?;
    let fd_vec = DVector::from_row_slice(fd.data());
    let diff = &formula - &fd_vec;
    let sup_difference = diff.amax();
    let scale = formula.amax();
    let bound = 1e-4 * (1.0 + scale);
    Ok(DifferentialReport {
        sup_difference,
        bound,
        passed: sup_difference <= bound,
        conclusive: true,
    })
}

/// The formula side alone, as an algebra field (used by the response
/// machinery).
pub fn solve_dressing_direction(op: &DenseOperator, rhs: &AlgebraField) -> Result<AlgebraField> {
    let y = op.solve(&DVector::from_row_slice(rhs.data()))?;
    AlgebraField::from_data(rhs.lattice(), rhs.kind(), (-y).iter().copied().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::Lattice;
    use crate::random::{random_bundle, random_group_field, random_unit_tangent};
    use nalgebra::Vector4;

    /// Cofactor-expansion determinant, the independent oracle for lu_logdet.
    fn cofactor_det(a: &DMatrix<f64>) -> f64 {
        let n = a.nrows();
        if n == 1 {
            return a[(0, 0)];
        }
        let mut det = 0.0;
        for j in 0..n {
            let minor = a.clone().remove_row(0).remove_column(j);
            let s = if j % 2 == 0 { 1.0 } else { -1.0 };
            det += s * a[(0, j)] * cofactor_det(&minor);
        }
        det
    }

    #[test]
    fn logdet_identity_and_diagonal() {
        let id = DMatrix::<f64>::identity(4, 4);
        let ld = lu_logdet(&id);
        assert_eq!(ld.log_abs, 0.0);
        assert_eq!(ld.sign, 1);
        let d = DMatrix::from_diagonal(&DVector::from_row_slice(&[-1.0, -5.0]));
        let ld = lu_logdet(&d);
        assert!((ld.log_abs - 5.0f64.ln()).abs() < 1e-15);
        assert_eq!(ld.sign, 1);
    }

    #[test]
    fn logdet_against_cofactor_oracle() {
        let mut state = 0x2545F4914F6CDD1Du64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        for n in 2..=6 {
            let a = DMatrix::from_fn(n, n, |_, _| next());
            let ld = lu_logdet(&a);
            let oracle = cofactor_det(&a);
            let got = (ld.log_abs).exp() * ld.sign as f64;
            assert!(
                (got - oracle).abs() <= 1e-8 * (1.0 + oracle.abs()),
                "n = {n}: {got} vs {oracle}"
            );
        }
    }

    #[test]
    fn logdet_detects_exact_singularity() {
        let mut a = DMatrix::<f64>::identity(3, 3);
        a.set_row(2, &nalgebra::RowDVector::zeros(3));
        let ld = lu_logdet(&a);
        assert!(ld.is_singular());
        assert_eq!(ld.log_abs, f64::NEG_INFINITY);
    }

    #[test]
    fn abelian_fp_operator_is_screened_laplacian() {
        // dims [2], e v xi = 1: eigenvalues of the stencil are
        // {khat^2 + 1} = {1, 5}, so |det| = 5
        let lat = Lattice::new(&[2]).unwrap();
        let b = random_bundle(&lat, GroupKind::U1, 3, 0.3);
        let spec = GaugeFixSpec::rxi_abelian(1.0, 1.0, 1.0).unwrap();
        let u = random_group_field(&lat, GroupKind::U1, 4, 0.3, ActionTag::Dressing);
        let op = fp_operator(&spec, &b, &u).unwrap();
        // (e v xi) Id - Lap on two sites: [[1+2, -2], [-2, 1+2]]
        let expected = DMatrix::from_row_slice(2, 2, &[3.0, -2.0, -2.0, 3.0]);
        assert!(
            (op.matrix.clone() - expected).norm() < 1e-8,
            "{}",
            op.matrix
        );
        let ld = fp_logdet(&op);
        assert!((ld.log_abs - 5.0f64.ln()).abs() < 1e-8);
    }

    #[test]
    fn lorenz_operator_spectrum_on_four_sites() {
        let lat = Lattice::new(&[4]).unwrap();
        let b = random_bundle(&lat, GroupKind::U1, 5, 0.3);
        let spec = GaugeFixSpec::lorenz(GroupKind::U1);
        let u = GroupField::identity(&lat, GroupKind::U1, ActionTag::Dressing).unwrap();
        let op = fp_operator(&spec, &b, &u).unwrap();
        let eigs = op.matrix.clone().symmetric_eigen().eigenvalues;
        let mut mags: Vec<f64> = eigs.iter().map(|e| e.abs()).collect();
        mags.sort_by(f64::total_cmp);
        assert!(mags[0] < 1e-8, "zero mode expected, got {mags:?}");
        assert!(
            (mags[1] - 2.0).abs() < 1e-7,
            "smallest nonzero should be 2, got {mags:?}"
        );
    }

    #[test]
    fn fp_operator_columns_match_central_differences() {
        let lat = Lattice::new(&[2, 2]).unwrap();
        let b = random_bundle(&lat, GroupKind::Su2, 6, 0.4);
        let spec =
            GaugeFixSpec::rxi_nonabelian(2.0, 1.0, Vector4::new(0.0, 0.0, 1.0, 0.0)).unwrap();
        let u = random_group_field(&lat, GroupKind::Su2, 7, 0.4, ActionTag::Dressing);
        let op = fp_operator(&spec, &b, &u).unwrap();
        let three = fd_dressing_jacobian(&spec, &b, &u, Stencil::Central { h: 1e-5 }).unwrap();
        let gap = (op.matrix.clone() - &three).amax();
        assert!(gap <= 1e-6, "columnwise gap {gap}");
        // the operator action agrees with the directional finite difference
        let n = op.dim();
        let dir = DVector::from_fn(n, |i, _| 0.3 - 0.07 * i as f64);
        let applied = op.apply(&dir);
        let fd_applied = three * &dir;
        assert!((applied - fd_applied).amax() <= 1e-6);
    }

    #[test]
    fn delta_shift_identity_gamma() {
        let lat = Lattice::new(&[2, 2]).unwrap();
        let b = random_bundle(&lat, GroupKind::Su2, 8, 0.4);
        let spec =
            GaugeFixSpec::rxi_nonabelian(2.0, 1.0, Vector4::new(0.0, 0.0, 1.0, 0.0)).unwrap();
        let gamma = GroupField::identity(&lat, GroupKind::Su2, ActionTag::Adjoint).unwrap();
        let u = random_group_field(&lat, GroupKind::Su2, 9, 0.4, ActionTag::Dressing);
        let rep = check_delta_shift(&spec, &b, &gamma, &u).unwrap();
        assert!(rep.conclusive);
        assert!(rep.gap <= 1e-10, "gap {}", rep.gap);
        assert!(rep.signs_match);
    }

    #[test]
    fn delta_shift_abelian_is_configuration_independent() {
        let lat = Lattice::new(&[2, 2]).unwrap();
        let b = random_bundle(&lat, GroupKind::U1, 10, 0.4);
        let spec = GaugeFixSpec::rxi_abelian(2.0, 1.0, 1.0).unwrap();
        let gamma = random_group_field(&lat, GroupKind::U1, 11, 0.5, ActionTag::Adjoint);
        let u = random_group_field(&lat, GroupKind::U1, 12, 0.5, ActionTag::Dressing);
        let rep = check_delta_shift(&spec, &b, &gamma, &u).unwrap();
        assert!(rep.conclusive);
        assert!(rep.gap <= 1e-10, "gap {}", rep.gap);
    }

    #[test]
    fn polar_jacobian_u1_products() {
        // 2 sites, rho = (2, 3): |det| = 6
        let lat = Lattice::new(&[2]).unwrap();
        let links = crate::fields::LinkField::from_fn(
            &lat,
            GroupKind::U1,
            ActionTag::Connection,
            1.0,
            |s, _| crate::group::GroupElement::from_angle(0.1 + 0.2 * s as f64),
        )
        .unwrap();
        let scalar = crate::fields::ScalarField::from_fn(
            &lat,
            crate::fields::Representation::U1Complex,
            ActionTag::Representation,
            |s| {
                let z = num_complex::Complex64::from_polar(2.0 + s as f64, 0.3 - 0.4 * s as f64);
                vec![z.re, z.im]
            },
        )
        .unwrap();
        let b = FieldBundle::new(links, scalar).unwrap();
        let rep = polar_jacobian_u1(&b, RadialChart::Radial).unwrap();
        assert!((rep.logdet_numeric - 6.0f64.ln()).abs() < 1e-6, "{rep:?}");
        assert!(rep.relative_error <= 1e-6, "{rep:?}");
        // log chart differs by the product of the radii
        let rep_log = polar_jacobian_u1(&b, RadialChart::LogRadial).unwrap();
        let expected_gap: f64 = rep.per_site_factors.iter().map(|r| r.ln()).sum();
        assert!(
            ((rep_log.logdet_numeric - rep.logdet_numeric) - expected_gap).abs() < 1e-6,
            "chart gap"
        );
        assert!(rep_log.relative_error <= 1e-6);
    }

    #[test]
    fn polar_jacobian_u1_unit_radii() {
        let lat = Lattice::new(&[2]).unwrap();
        let links = crate::fields::LinkField::identity(&lat, GroupKind::U1, 1.0).unwrap();
        let scalar = crate::fields::ScalarField::from_fn(
            &lat,
            crate::fields::Representation::U1Complex,
            ActionTag::Representation,
            |s| {
                let z = num_complex::Complex64::from_polar(1.0, 0.2 * (s as f64 + 1.0));
                vec![z.re, z.im]
            },
        )
        .unwrap();
        let b = FieldBundle::new(links, scalar).unwrap();
        let rep = polar_jacobian_u1(&b, RadialChart::Radial).unwrap();
        assert!(rep.logdet_numeric.abs() < 1e-7);
        assert!(rep.relative_error <= 1e-6);
    }

    #[test]
    fn unitary_block_u1_det_is_rho() {
        for phi in [
            num_complex::Complex64::from_polar(2.0, 0.7),
            num_complex::Complex64::from_polar(0.5, -2.9),
            num_complex::Complex64::new(1.0, 0.0),
        ] {
            let rho = phi.norm();
            let b = unitary_block_u1(phi, RadialChart::Radial);
            assert!((b.determinant() - rho).abs() < 1e-14, "{phi}");
            let b = unitary_block_u1(phi, RadialChart::LogRadial);
            assert!((b.determinant() - rho * rho).abs() < 1e-14, "{phi}");
        }
    }

    #[test]
    fn unitary_block_su2_det_is_eta_cubed() {
        for phi in [
            Vector4::new(0.0, 0.0, 1.0, 0.0),
            Vector4::new(0.3, -0.4, 1.2, 0.7),
            Vector4::new(2.0, 0.0, 0.0, 0.0),
        ] {
            let eta = phi.norm();
            let block = unitary_block_su2(&phi, RadialChart::Radial);
            assert!(
                (block.determinant() - eta.powi(3)).abs() < 1e-12 * eta.powi(3).max(1.0),
                "{phi:?}"
            );
        }
    }

    #[test]
    fn polar_jacobian_su2_ratios() {
        let lat = Lattice::new(&[2]).unwrap();
        let mk = |etas: [f64; 2], seed: u64| {
            let links = crate::random::random_link_field(&lat, GroupKind::Su2, seed, 0.3, 1.0);
            let scalar = crate::fields::ScalarField::from_fn(
                &lat,
                crate::fields::Representation::Su2Doublet,
                ActionTag::Representation,
                |s| vec![0.0, 0.0, etas[s], 0.0],
            )
            .unwrap();
            FieldBundle::new(links, scalar).unwrap()
        };
        // eta = (1, 1) baseline vs eta = (2, 1): |det| ratio = 8
        let base = polar_jacobian_su2(&mk([1.0, 1.0], 21), RadialChart::Radial).unwrap();
        let double = polar_jacobian_su2(&mk([2.0, 1.0], 21), RadialChart::Radial).unwrap();
        let ratio = (double.logdet_numeric - base.logdet_numeric).exp();
        assert!((ratio - 8.0).abs() <= 8.0 * 1e-5, "ratio {ratio}");
        // product symmetry: (1, 2) and (2, 1) give equal |det|
        let swapped = polar_jacobian_su2(&mk([1.0, 2.0], 21), RadialChart::Radial).unwrap();
        assert!(
            (swapped.logdet_numeric - double.logdet_numeric).abs() <= 1e-5,
            "{} vs {}",
            swapped.logdet_numeric,
            double.logdet_numeric
        );
        assert!(base.relative_error.is_finite());
    }

    #[test]
    fn differential_check_abelian_single_mode() {
        // scalar-only direction: the response follows the Fourier factor
        let lat = Lattice::new(&[4]).unwrap();
        let b = random_bundle(&lat, GroupKind::U1, 30, 0.3);
        let spec = GaugeFixSpec::rxi_abelian(2.0, 1.0, 1.0).unwrap();
        let dir = random_unit_tangent(&b, 31);
        let rep = gfm_differential_check(&spec, &b, &dir, 1e-10, 20).unwrap();
        assert!(rep.conclusive);
        assert!(
            rep.passed,
            "sup diff {} vs bound {}",
            rep.sup_difference, rep.bound
        );
    }

    #[test]
    fn differential_single_mode_scalar_direction() {
        // theta = 0, phi = 1: a scalar direction d phi = i phi dchi with
        // dchi = cos(2 pi x / 4) responds with amplitude evxi/(khat^2+evxi),
        // here 2/(2+2) = 1/2 on the khat^2 = 2 mode
        let lat = Lattice::new(&[4]).unwrap();
        let links = crate::fields::LinkField::identity(&lat, GroupKind::U1, 1.0).unwrap();
        let scalar = crate::fields::ScalarField::from_fn(
            &lat,
            crate::fields::Representation::U1Complex,
            ActionTag::Representation,
            |_| vec![1.0, 0.0],
        )
        .unwrap();
        let b = FieldBundle::new(links, scalar).unwrap();
        let spec = GaugeFixSpec::rxi_abelian(2.0, 1.0, 1.0).unwrap();
        let (u, _) = gfm_solve(&spec, &b, 1e-10, 10).unwrap();
        let op = fp_operator(&spec, &b, &u).unwrap();

        let dchi = |s: usize| (2.0 * std::f64::consts::PI * s as f64 / 4.0).cos();
        let mut dir = BundleTangent::zeros(&b);
        for s in 0..4 {
            // d/dt of phi e^{i t dchi} at phi = 1: (0, dchi)
            dir.scalar[2 * s + 1] = dchi(s);
        }
        let eps = 1e-6;
        let r_plus = gf_eval(
            &spec,
            &bundle_move(&b, &dir, eps).unwrap().ga_apply(&u).unwrap(),
        )
        .unwrap();
        let r_minus = gf_eval(
            &spec,
            &bundle_move(&b, &dir, -eps).unwrap().ga_apply(&u).unwrap(),
        )
        .unwrap();
        let dv = DVector::from_row_slice(
            &r_plus
                .data()
                .iter()
                .zip(r_minus.data())
                .map(|(p, q)| (p - q) / (2.0 * eps))
                .collect::<Vec<_>>(),
        );
        let response = -op.solve(&dv).unwrap();
        for s in 0..4 {
            let expected = 0.5 * dchi(s);
            assert!(
                (response[s] - expected).abs() < 1e-8,
                "site {s}: {} vs {}",
                response[s],
                expected
            );
        }
    }

    #[test]
    fn differential_check_zero_direction() {
        let lat = Lattice::new(&[4]).unwrap();
        let b = random_bundle(&lat, GroupKind::U1, 32, 0.3);
        let spec = GaugeFixSpec::rxi_abelian(2.0, 1.0, 1.0).unwrap();
        let zero = BundleTangent::zeros(&b);
        let rep = gfm_differential_check(&spec, &b, &zero, 1e-10, 20).unwrap();
        assert!(rep.conclusive);
        assert!(rep.sup_difference < 1e-10);
    }

    #[test]
    fn capacity_cap_is_enforced() {
        let lat = Lattice::new(&[32, 32]).unwrap(); // 1024 sites * 3 > 2000
        let b = random_bundle(&lat, GroupKind::Su2, 40, 0.2);
        let spec =
            GaugeFixSpec::rxi_nonabelian(1.0, 1.0, Vector4::new(0.0, 0.0, 1.0, 0.0)).unwrap();
        let u = GroupField::identity(&lat, GroupKind::Su2, ActionTag::Dressing).unwrap();
        assert!(matches!(
            fp_operator(&spec, &b, &u),
            Err(FieldError::Capacity(_))
        ));
    }
}
