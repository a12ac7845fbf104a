//! Group and Lie-algebra numerics for U(1) and SU(2).
//!
//! U(1) elements are stored as angles in the principal interval `(-pi, pi]`,
//! which makes left translation an addition and its tangent determinant
//! exactly 1. SU(2) elements are dense 2x2 complex matrices, re-projected
//! onto the group by the quaternion polar projection whenever the unitarity
//! defect of a product exceeds 1e-12.
//!
//! Algebra elements are coefficients on the Hermitean basis: the single
//! generator 1 for u(1), the Pauli matrices `tau_a` for su(2), so that
//! `exp_map(x) = exp(i x)` for U(1) and `exp_map(x) = exp(i x.tau)` for SU(2).

use nalgebra::{Matrix2, Matrix4, Vector2};
use num_complex::Complex64;
use std::f64::consts::PI;

use crate::error::{FieldError, Result};

/// Structure group of the model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    U1,
    Su2,
}

impl GroupKind {
    /// Dimension of the Lie algebra (= algebra components per site).
    pub fn algebra_dim(self) -> usize {
        match self {
            GroupKind::U1 => 1,
            GroupKind::Su2 => 3,
        }
    }

    /// Matrix dimension of the defining representation.
    pub fn matrix_dim(self) -> usize {
        match self {
            GroupKind::U1 => 1,
            GroupKind::Su2 => 2,
        }
    }
}

type C = Complex64;
type M2 = Matrix2<Complex64>;

fn c(re: f64, im: f64) -> C {
    C::new(re, im)
}

/// Pauli matrix `tau_a`, `a` in 0..3.
pub fn pauli(a: usize) -> M2 {
    match a {
        0 => M2::new(c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)),
        1 => M2::new(c(0.0, 0.0), c(0.0, -1.0), c(0.0, 1.0), c(0.0, 0.0)),
        2 => M2::new(c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)),
        _ => unreachable!("pauli index out of range"),
    }
}

/// Real antisymmetric 4x4 generators of the SU(2) action on the real form
/// `(phi1, phi2, phi3, phi4)` of a doublet `(phi1 + i phi2, phi3 + i phi4)`:
/// `T_a` is the real form of multiplication by `i tau_a`.
pub fn real4_generator(a: usize) -> Matrix4<f64> {
    #[rustfmt::skip]
    let m = match a {
        0 => Matrix4::new(
            0.0, 0.0, 0.0, -1.0,
            0.0, 0.0, 1.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
        ),
        1 => Matrix4::new(
            0.0, 0.0, 1.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            -1.0, 0.0, 0.0, 0.0,
            0.0, -1.0, 0.0, 0.0,
        ),
        2 => Matrix4::new(
            0.0, -1.0, 0.0, 0.0,
            1.0, 0.0, 0.0, 0.0,
            0.0, 0.0, 0.0, 1.0,
            0.0, 0.0, -1.0, 0.0,
        ),
        _ => unreachable!("generator index out of range"),
    };
    m
}

/// Reduce an angle to the principal interval `(-pi, pi]`.
///
/// Angles already in the interval pass through unchanged, so sums that never
/// cross the cut stay exact.
pub fn principal_angle(theta: f64) -> f64 {
    if theta > -PI && theta <= PI {
        return theta;
    }
    let r = theta.rem_euclid(2.0 * PI);
    if r > PI {
        r - 2.0 * PI
    } else {
        r
    }
}

/// A group element of U(1) or SU(2).
#[derive(Debug, Clone, PartialEq)]
pub enum GroupElement {
    U1 { theta: f64 },
    Su2 { m: M2 },
}

impl GroupElement {
    pub fn identity(kind: GroupKind) -> Self {
        match kind {
            GroupKind::U1 => GroupElement::U1 { theta: 0.0 },
            GroupKind::Su2 => GroupElement::Su2 { m: M2::identity() },
        }
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            GroupElement::U1 { .. } => GroupKind::U1,
            GroupElement::Su2 { .. } => GroupKind::Su2,
        }
    }

    pub fn from_angle(theta: f64) -> Self {
        GroupElement::U1 {
            theta: principal_angle(theta),
        }
    }

    pub fn from_su2_matrix(m: M2) -> Self {
        GroupElement::Su2 { m }
    }

    pub fn angle(&self) -> f64 {
        match self {
            GroupElement::U1 { theta } => *theta,
            GroupElement::Su2 { .. } => unreachable!("angle() on an SU(2) element"),
        }
    }

    pub fn matrix(&self) -> M2 {
        match self {
            GroupElement::U1 { theta } => M2::from_diagonal_element(C::from_polar(1.0, *theta)),
            GroupElement::Su2 { m } => *m,
        }
    }

    /// The unit complex number for U(1) elements.
    pub fn phase(&self) -> C {
        match self {
            GroupElement::U1 { theta } => C::from_polar(1.0, *theta),
            GroupElement::Su2 { .. } => unreachable!("phase() on an SU(2) element"),
        }
    }

    /// Group product. SU(2) products re-project onto the group when the
    /// unitarity defect drifts past 1e-12.
    pub fn mul(&self, other: &GroupElement) -> Result<GroupElement> {
        match (self, other) {
            (GroupElement::U1 { theta: a }, GroupElement::U1 { theta: b }) => {
                Ok(GroupElement::U1 {
                    theta: principal_angle(a + b),
                })
            }
            (GroupElement::Su2 { m: a }, GroupElement::Su2 { m: b }) => {
                let p = a * b;
                let g = GroupElement::Su2 { m: p };
                if g.unitarity_defect() > 1e-12 {
                    Ok(g.renormalized())
                } else {
                    Ok(g)
                }
            }
            _ => Err(FieldError::Kind("cannot multiply U(1) by SU(2)".into())),
        }
    }

    pub fn inverse(&self) -> GroupElement {
        match self {
            GroupElement::U1 { theta } => GroupElement::U1 {
                theta: principal_angle(-theta),
            },
            GroupElement::Su2 { m } => GroupElement::Su2 { m: m.adjoint() },
        }
    }

    /// `|| g^dagger g - 1 ||_F`, plus the determinant defect for SU(2).
    pub fn unitarity_defect(&self) -> f64 {
        match self {
            GroupElement::U1 { .. } => 0.0,
            GroupElement::Su2 { m } => {
                let u = (m.adjoint() * m - M2::identity()).norm();
                let d = (m.determinant() - c(1.0, 0.0)).norm();
                u.max(d)
            }
        }
    }

    /// Polar re-projection onto the group: decompose on `{1, i tau_a}`,
    /// keep the real parts, normalize the quaternion.
    pub fn renormalized(&self) -> GroupElement {
        match self {
            GroupElement::U1 { theta } => GroupElement::U1 {
                theta: principal_angle(*theta),
            },
            GroupElement::Su2 { m } => {
                let q0 = 0.5 * (m[(0, 0)] + m[(1, 1)]).re;
                let mut q = [0.0f64; 3];
                for (a, qa) in q.iter_mut().enumerate() {
                    *qa = 0.5 * (pauli(a) * m).trace().im;
                }
                let norm = (q0 * q0 + q.iter().map(|x| x * x).sum::<f64>()).sqrt();
                let q0 = q0 / norm;
                let mut out = M2::identity() * c(q0, 0.0);
                for (a, qa) in q.iter().enumerate() {
                    out += pauli(a) * c(0.0, qa / norm);
                }
                GroupElement::Su2 { m: out }
            }
        }
    }

    /// Frobenius distance `|| g - h ||` between the matrix realizations.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        match (self, other) {
            (GroupElement::U1 { theta: a }, GroupElement::U1 { theta: b }) => {
                (C::from_polar(1.0, *a) - C::from_polar(1.0, *b)).norm()
            }
            (GroupElement::Su2 { m: a }, GroupElement::Su2 { m: b }) => (a - b).norm(),
            _ => f64::NAN,
        }
    }

    /// Real 4x4 matrix of the SU(2) action on the real form of a doublet.
    pub fn real4_matrix(&self) -> Matrix4<f64> {
        match self {
            GroupElement::Su2 { m } => {
                let block = |z: C| [[z.re, -z.im], [z.im, z.re]];
                let b00 = block(m[(0, 0)]);
                let b01 = block(m[(0, 1)]);
                let b10 = block(m[(1, 0)]);
                let b11 = block(m[(1, 1)]);
                #[rustfmt::skip]
                let out = Matrix4::new(
                    b00[0][0], b00[0][1], b01[0][0], b01[0][1],
                    b00[1][0], b00[1][1], b01[1][0], b01[1][1],
                    b10[0][0], b10[0][1], b11[0][0], b11[0][1],
                    b10[1][0], b10[1][1], b11[1][0], b11[1][1],
                );
                out
            }
            GroupElement::U1 { .. } => unreachable!("real4_matrix() on a U(1) element"),
        }
    }

    /// Adjoint action on algebra coefficients: `Ad_g x` with
    /// `(Ad_g x).tau = g (x.tau) g^-1`. Identity for U(1).
    pub fn adjoint_action(&self, x: &AlgebraElement) -> AlgebraElement {
        match (self, x) {
            (GroupElement::U1 { .. }, AlgebraElement::U1 { .. }) => x.clone(),
            (GroupElement::Su2 { m }, AlgebraElement::Su2 { coeffs }) => {
                let mut h = M2::zeros();
                for (a, &xa) in coeffs.iter().enumerate() {
                    h += pauli(a) * c(xa, 0.0);
                }
                let conj = m * h * m.adjoint();
                let mut out = [0.0f64; 3];
                for (a, oa) in out.iter_mut().enumerate() {
                    *oa = 0.5 * (pauli(a) * conj).trace().re;
                }
                AlgebraElement::Su2 { coeffs: out }
            }
            _ => unreachable!("kind mismatch in adjoint_action"),
        }
    }
}

/// A Lie-algebra element: coefficients on the Hermitean basis.
#[derive(Debug, Clone, PartialEq)]
pub enum AlgebraElement {
    U1 { coeff: f64 },
    Su2 { coeffs: [f64; 3] },
}

impl AlgebraElement {
    pub fn zero(kind: GroupKind) -> Self {
        match kind {
            GroupKind::U1 => AlgebraElement::U1 { coeff: 0.0 },
            GroupKind::Su2 => AlgebraElement::Su2 { coeffs: [0.0; 3] },
        }
    }

    pub fn kind(&self) -> GroupKind {
        match self {
            AlgebraElement::U1 { .. } => GroupKind::U1,
            AlgebraElement::Su2 { .. } => GroupKind::Su2,
        }
    }

    pub fn from_coeffs(kind: GroupKind, v: &[f64]) -> Self {
        match kind {
            GroupKind::U1 => AlgebraElement::U1 { coeff: v[0] },
            GroupKind::Su2 => AlgebraElement::Su2 {
                coeffs: [v[0], v[1], v[2]],
            },
        }
    }

    pub fn coeffs(&self) -> &[f64] {
        match self {
            AlgebraElement::U1 { coeff } => std::slice::from_ref(coeff),
            AlgebraElement::Su2 { coeffs } => coeffs,
        }
    }

    pub fn norm(&self) -> f64 {
        self.coeffs().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// The realized matrix `x.tau` (traceless Hermitean) for SU(2).
    pub fn su2_matrix(&self) -> M2 {
        match self {
            AlgebraElement::Su2 { coeffs } => {
                let mut h = M2::zeros();
                for (a, &xa) in coeffs.iter().enumerate() {
                    h += pauli(a) * c(xa, 0.0);
                }
                h
            }
            AlgebraElement::U1 { .. } => unreachable!("su2_matrix() on a u(1) element"),
        }
    }
}

/// Exponential map: `exp(i x)` for U(1), `exp(i x.tau)` for SU(2) via the
/// closed form `cos(b) + i sin(b) n.tau` with `b = ||x||`.
pub fn exp_map(x: &AlgebraElement) -> GroupElement {
    match x {
        AlgebraElement::U1 { coeff } => GroupElement::U1 {
            theta: principal_angle(*coeff),
        },
        AlgebraElement::Su2 { coeffs } => {
            let beta = x.norm();
            let (cb, s) = if beta < 1e-8 {
                // sin(b)/b to second order keeps the roundtrip tight near 0
                (1.0 - beta * beta / 2.0, 1.0 - beta * beta / 6.0)
            } else {
                (beta.cos(), beta.sin() / beta)
            };
            let mut m = M2::identity() * c(cb, 0.0);
            for (a, &xa) in coeffs.iter().enumerate() {
                m += pauli(a) * c(0.0, s * xa);
            }
            GroupElement::Su2 { m }
        }
    }
}

/// Principal-branch logarithm, inverse of [`exp_map`] for `||x|| <= pi`.
///
/// SU(2) elements antipodal to the identity (`tr g / 2 = -1`) sit on the
/// branch cut and are rejected.
pub fn log_map(g: &GroupElement) -> Result<AlgebraElement> {
    match g {
        GroupElement::U1 { theta } => Ok(AlgebraElement::U1 { coeff: *theta }),
        GroupElement::Su2 { m } => {
            let q0 = 0.5 * (m[(0, 0)] + m[(1, 1)]).re;
            let mut q = [0.0f64; 3];
            for (a, qa) in q.iter_mut().enumerate() {
                *qa = 0.5 * (pauli(a) * m).trace().im;
            }
            let qn = q.iter().map(|x| x * x).sum::<f64>().sqrt();
            if 1.0 + q0 <= 1e-12 && qn <= 1e-6 {
                return Err(FieldError::Branch(
                    "SU(2) element antipodal to the identity has no principal logarithm".into(),
                ));
            }
            let beta = qn.atan2(q0);
            let scale = if qn < 1e-12 { 1.0 } else { beta / qn };
            Ok(AlgebraElement::Su2 {
                coeffs: [q[0] * scale, q[1] * scale, q[2] * scale],
            })
        }
    }
}

/// The unique SU(2) element taking the doublet `(0, 1)` to `psi / ||psi||`.
///
/// Used by the polar decompositions `phi = eta u (0,1)^T`. Errors when
/// `||psi||` vanishes.
pub fn su2_pointing(psi: &Vector2<Complex64>) -> Result<GroupElement> {
    let n = psi.norm();
    if n < 1e-12 {
        return Err(FieldError::Degenerate(
            "polar decomposition of a vanishing doublet".into(),
        ));
    }
    let a = psi[1].conj() / n;
    let b = -psi[0].conj() / n;
    let m = M2::new(a, -b.conj(), b, a.conj());
    Ok(GroupElement::Su2 { m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn exp_of_zero_is_identity() {
        let g = exp_map(&AlgebraElement::zero(GroupKind::U1));
        assert_eq!(g.angle(), 0.0);
        let g = exp_map(&AlgebraElement::zero(GroupKind::Su2));
        assert!(g.distance(&GroupElement::identity(GroupKind::Su2)) < 1e-15);
    }

    #[test]
    fn su2_exp_closed_form_quarter_turn() {
        // exp(i (pi/2) tau_1) = i tau_1
        let g = exp_map(&AlgebraElement::Su2 {
            coeffs: [PI / 2.0, 0.0, 0.0],
        });
        let expected = GroupElement::Su2 {
            m: pauli(0) * c(0.0, 1.0),
        };
        assert!(g.distance(&expected) < 1e-14);
    }

    #[test]
    fn u1_principal_value_reduction() {
        let g = exp_map(&AlgebraElement::U1 {
            coeff: 3.0 * PI / 2.0,
        });
        assert_abs_diff_eq!(g.angle(), -PI / 2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(principal_angle(PI), PI, epsilon = 0.0);
        assert_abs_diff_eq!(principal_angle(-PI), PI, epsilon = 0.0);
    }

    #[test]
    fn log_roundtrip_su2() {
        let x = AlgebraElement::Su2 {
            coeffs: [0.1, 0.2, -0.05],
        };
        let back = log_map(&exp_map(&x)).unwrap();
        for (a, b) in x.coeffs().iter().zip(back.coeffs()) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn log_of_identity_is_zero() {
        for kind in [GroupKind::U1, GroupKind::Su2] {
            let z = log_map(&GroupElement::identity(kind)).unwrap();
            assert_eq!(z.norm(), 0.0);
        }
    }

    #[test]
    fn log_u1_is_the_angle() {
        let g = GroupElement::from_angle(0.3);
        assert_eq!(log_map(&g).unwrap().coeffs()[0], 0.3);
    }

    #[test]
    fn antipodal_log_is_branch_error() {
        let g = GroupElement::Su2 { m: -M2::identity() };
        assert!(matches!(log_map(&g), Err(FieldError::Branch(_))));
    }

    #[test]
    fn products_keep_group_invariants() {
        let mut g = GroupElement::identity(GroupKind::Su2);
        let h = exp_map(&AlgebraElement::Su2 {
            coeffs: [0.4, -0.3, 0.7],
        });
        for _ in 0..500 {
            g = g.mul(&h).unwrap();
        }
        assert!(g.unitarity_defect() <= 1e-12);
    }

    #[test]
    fn adjoint_action_preserves_norm() {
        let g = exp_map(&AlgebraElement::Su2 {
            coeffs: [0.3, 0.1, -0.2],
        });
        let x = AlgebraElement::Su2 {
            coeffs: [0.5, -0.4, 0.25],
        };
        let y = g.adjoint_action(&x);
        assert_abs_diff_eq!(x.norm(), y.norm(), epsilon = 1e-13);
    }

    #[test]
    fn adjoint_matrix_has_unit_determinant() {
        let g = exp_map(&AlgebraElement::Su2 {
            coeffs: [0.8, -0.6, 1.1],
        });
        let mut ad = nalgebra::Matrix3::<f64>::zeros();
        for a in 0..3 {
            let mut basis = [0.0; 3];
            basis[a] = 1.0;
            let col = g.adjoint_action(&AlgebraElement::Su2 { coeffs: basis });
            for (r, c) in col.coeffs().iter().enumerate() {
                ad[(r, a)] = *c;
            }
        }
        assert_abs_diff_eq!(ad.determinant(), 1.0, epsilon = 1e-13);
    }

    #[test]
    fn pointing_examples() {
        // (0, 1) -> identity
        let u = su2_pointing(&Vector2::new(c(0.0, 0.0), c(1.0, 0.0))).unwrap();
        assert!(u.distance(&GroupElement::identity(GroupKind::Su2)) < 1e-15);
        // (1, 0) -> [[0, 1], [-1, 0]]
        let u = su2_pointing(&Vector2::new(c(1.0, 0.0), c(0.0, 0.0))).unwrap();
        let expected = GroupElement::Su2 {
            m: M2::new(c(0.0, 0.0), c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)),
        };
        assert!(u.distance(&expected) < 1e-15);
    }

    #[test]
    fn real4_generators_are_antisymmetric_and_consistent() {
        for a in 0..3 {
            let t = real4_generator(a);
            assert!((t + t.transpose()).norm() == 0.0);
        }
        // real form of a group element matches exp of the generators
        let x = [0.3, -0.2, 0.5];
        let g = exp_map(&AlgebraElement::Su2 { coeffs: x });
        let mut gen = Matrix4::<f64>::zeros();
        for (a, &xa) in x.iter().enumerate() {
            gen += real4_generator(a) * xa;
        }
        let direct = g.real4_matrix();
        let series = gen.exp();
        assert!((direct - series).norm() < 1e-10);
    }
}
