//! Deterministic, seed-parameterized random field configurations.
//!
//! All generators draw from ChaCha8 keyed by the caller's 64-bit seed and map
//! raw bits to doubles directly, so identical arguments give bit-identical
//! fields on every platform and under every feature set.

use nalgebra::Vector2;
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::fields::{ActionTag, FieldBundle, GroupField, LinkField, Representation, ScalarField};
use crate::group::{exp_map, AlgebraElement, GroupKind};
use crate::lattice::Lattice;
use crate::tangent::{AlgebraField, BundleTangent};

/// Uniform in `[0, 1)` from the top 53 bits of the stream.
fn unit(rng: &mut ChaCha8Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform in `[-spread, spread]`.
fn symmetric(rng: &mut ChaCha8Rng, spread: f64) -> f64 {
    spread * (2.0 * unit(rng) - 1.0)
}

fn draw_algebra(rng: &mut ChaCha8Rng, kind: GroupKind, spread: f64) -> AlgebraElement {
    match kind {
        GroupKind::U1 => AlgebraElement::U1 {
            coeff: symmetric(rng, spread),
        },
        GroupKind::Su2 => AlgebraElement::Su2 {
            coeffs: [
                symmetric(rng, spread),
                symmetric(rng, spread),
                symmetric(rng, spread),
            ],
        },
    }
}

/// Per-site `exp_map` of algebra coefficients drawn uniformly from
/// `[-spread, spread]`. `spread = 0` gives the identity field.
pub fn random_group_field(
    lat: &Lattice,
    kind: GroupKind,
    seed: u64,
    spread: f64,
    tag: ActionTag,
) -> GroupField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let elems = (0..lat.num_sites())
        .map(|_| exp_map(&draw_algebra(&mut rng, kind, spread)))
        .collect();
    GroupField::new(lat.clone(), kind, elems, tag).expect("sized by construction")
}

/// Random link configuration with the same drawing rule, one element per
/// (site, direction).
pub fn random_link_field(
    lat: &Lattice,
    kind: GroupKind,
    seed: u64,
    spread: f64,
    coupling: f64,
) -> LinkField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let links: Vec<_> = (0..lat.num_links())
        .map(|_| exp_map(&draw_algebra(&mut rng, kind, spread)))
        .collect();
    LinkField::new(lat.clone(), kind, links, ActionTag::Connection, coupling)
        .expect("sized by construction")
}

/// Random scalar with per-site polar data: norms uniform in
/// `[norm_lo, norm_hi]`, directions within `angle_spread` of the reference
/// direction (`1` for U(1), the doublet `(0,1)` for SU(2)). Guarantees a
/// nonvanishing field whenever `norm_lo > 0`.
pub fn random_scalar_polar(
    lat: &Lattice,
    rep: Representation,
    seed: u64,
    norm_lo: f64,
    norm_hi: f64,
    angle_spread: f64,
) -> ScalarField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(lat.num_sites());
    for _ in 0..lat.num_sites() {
        let norm = norm_lo + (norm_hi - norm_lo) * unit(&mut rng);
        match rep {
            Representation::U1Complex => {
                let chi = symmetric(&mut rng, angle_spread);
                let z = Complex64::from_polar(norm, chi);
                rows.push(vec![z.re, z.im]);
            }
            Representation::Su2Doublet | Representation::Su2Real4 => {
                let rot = exp_map(&draw_algebra(&mut rng, GroupKind::Su2, angle_spread));
                let base = Vector2::new(Complex64::new(0.0, 0.0), Complex64::new(norm, 0.0));
                let phi = rot.matrix() * base;
                rows.push(vec![phi[0].re, phi[0].im, phi[1].re, phi[1].im]);
            }
        }
    }
    ScalarField::from_fn(lat, rep, ActionTag::Representation, |s| rows[s].clone())
        .expect("finite by construction")
}

/// Default representation for a group kind (doublet for SU(2)).
pub fn default_rep(kind: GroupKind) -> Representation {
    match kind {
        GroupKind::U1 => Representation::U1Complex,
        GroupKind::Su2 => Representation::Su2Doublet,
    }
}

/// A gauge-acted bundle with random links (spread as given) and a random
/// polar scalar with norms in `[0.5, 2.0]`. Coupling 1.
pub fn random_bundle(lat: &Lattice, kind: GroupKind, seed: u64, spread: f64) -> FieldBundle {
    let links = random_link_field(lat, kind, seed, spread, 1.0);
    let scalar = random_scalar_polar(
        lat,
        default_rep(kind),
        seed ^ 0x9e37_79b9_7f4a_7c15,
        0.5,
        2.0,
        spread,
    );
    FieldBundle::new(links, scalar).expect("consistent by construction")
}

/// Same as [`random_bundle`] but with the SU(2) scalar stored in the real
/// 4-vector representation.
pub fn random_bundle_real4(lat: &Lattice, seed: u64, spread: f64) -> FieldBundle {
    let links = random_link_field(lat, GroupKind::Su2, seed, spread, 1.0);
    let scalar = random_scalar_polar(
        lat,
        Representation::Su2Real4,
        seed ^ 0x9e37_79b9_7f4a_7c15,
        0.5,
        2.0,
        spread,
    );
    FieldBundle::new(links, scalar).expect("consistent by construction")
}

/// Random algebra field with coefficients uniform in `[-spread, spread]`.
pub fn random_algebra_field(
    lat: &Lattice,
    kind: GroupKind,
    seed: u64,
    spread: f64,
) -> AlgebraField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = lat.num_sites() * kind.algebra_dim();
    let data: Vec<f64> = (0..n).map(|_| symmetric(&mut rng, spread)).collect();
    AlgebraField::from_data(lat, kind, data).expect("finite by construction")
}

/// Random unit tangent to a bundle (for finite-difference oracles).
pub fn random_unit_tangent(b: &FieldBundle, seed: u64) -> BundleTangent {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = BundleTangent::zeros(b);
    for v in t.link.iter_mut() {
        *v = symmetric(&mut rng, 1.0);
    }
    for v in t.scalar.iter_mut() {
        *v = symmetric(&mut rng, 1.0);
    }
    t.normalized()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_spread_gives_identity() {
        let lat = Lattice::new(&[4]).unwrap();
        let f = random_group_field(&lat, GroupKind::Su2, 9, 0.0, ActionTag::Adjoint);
        let id = GroupField::identity(&lat, GroupKind::Su2, ActionTag::Adjoint).unwrap();
        assert_eq!(f.sup_distance(&id), 0.0);
    }

    #[test]
    fn same_seed_bit_identical() {
        let lat = Lattice::new(&[2, 2]).unwrap();
        let a = random_bundle(&lat, GroupKind::Su2, 1234, 0.5);
        let b = random_bundle(&lat, GroupKind::Su2, 1234, 0.5);
        assert_eq!(a, b);
    }

    #[test]
    fn different_seeds_differ() {
        let lat = Lattice::new(&[4]).unwrap();
        let a = random_group_field(&lat, GroupKind::U1, 1, 0.5, ActionTag::Adjoint);
        let b = random_group_field(&lat, GroupKind::U1, 2, 0.5, ActionTag::Adjoint);
        assert!(a.sup_distance(&b) > 0.0);
    }

    #[test]
    fn polar_scalar_never_vanishes() {
        let lat = Lattice::new(&[4, 4]).unwrap();
        let phi = random_scalar_polar(&lat, Representation::Su2Doublet, 77, 0.5, 2.0, 0.8);
        for s in 0..lat.num_sites() {
            assert!(phi.norm_at(s) >= 0.5 - 1e-12);
            assert!(phi.norm_at(s) <= 2.0 + 1e-12);
        }
    }
}
