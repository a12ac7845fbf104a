//! Algebra-valued fields and tangent charts.
//!
//! One chart convention is used everywhere finite differences appear:
//!
//! * link directions perturb a link as `U -> U exp_map(t x)` and are read
//!   back through `log(U_base^-1 U)`;
//! * scalar directions add to the real components;
//! * group-field directions (dressings) perturb as `u -> u exp_map(t x)`.
//!
//! Operators built in these coordinates are what the determinant and
//! response modules call "left-translation algebra coordinates".

use crate::error::{FieldError, Result};
use crate::exec;
use crate::fields::{FieldBundle, GroupField, ScalarField};
use crate::group::{exp_map, log_map, AlgebraElement, GroupKind};
use crate::lattice::Lattice;

/// A Lie-algebra element per site, stored as flat coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraField {
    lat: Lattice,
    kind: GroupKind,
    data: Vec<f64>,
}

impl AlgebraField {
    pub fn zeros(lat: &Lattice, kind: GroupKind) -> Self {
        Self {
            lat: lat.clone(),
            kind,
            data: vec![0.0; lat.num_sites() * kind.algebra_dim()],
        }
    }

    pub fn from_data(lat: &Lattice, kind: GroupKind, data: Vec<f64>) -> Result<Self> {
        if data.len() != lat.num_sites() * kind.algebra_dim() {
            return Err(FieldError::Lattice(format!(
                "{} components for {} sites x {}",
                data.len(),
                lat.num_sites(),
                kind.algebra_dim()
            )));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(FieldError::Invalid(
                "algebra field has non-finite entries".into(),
            ));
        }
        Ok(Self {
            lat: lat.clone(),
            kind,
            data,
        })
    }

    pub fn from_fn(lat: &Lattice, kind: GroupKind, f: impl Fn(usize) -> Vec<f64>) -> Result<Self> {
        let mut data = Vec::with_capacity(lat.num_sites() * kind.algebra_dim());
        for s in 0..lat.num_sites() {
            let v = f(s);
            if v.len() != kind.algebra_dim() {
                return Err(FieldError::Invalid(
                    "wrong component count from generator".into(),
                ));
            }
            data.extend_from_slice(&v);
        }
        Self::from_data(lat, kind, data)
    }

    pub fn constant(lat: &Lattice, kind: GroupKind, coeffs: &[f64]) -> Result<Self> {
        Self::from_fn(lat, kind, |_| coeffs.to_vec())
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn site(&self, s: usize) -> &[f64] {
        let d = self.kind.algebra_dim();
        &self.data[s * d..(s + 1) * d]
    }

    pub fn site_mut(&mut self, s: usize) -> &mut [f64] {
        let d = self.kind.algebra_dim();
        &mut self.data[s * d..(s + 1) * d]
    }

    pub fn element(&self, s: usize) -> AlgebraElement {
        AlgebraElement::from_coeffs(self.kind, self.site(s))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Sup over sites of the per-site coefficient norm.
    pub fn sup_norm(&self) -> f64 {
        let norms: Vec<f64> = (0..self.lat.num_sites())
            .map(|s| self.element(s).norm())
            .collect();
        exec::sup(&norms)
    }

    pub fn scaled(&self, c: f64) -> Self {
        let data = self.data.iter().map(|x| c * x).collect();
        Self {
            lat: self.lat.clone(),
            kind: self.kind,
            data,
        }
    }

    pub fn add(&self, other: &AlgebraField) -> Result<Self> {
        if self.lat != other.lat || self.kind != other.kind {
            return Err(FieldError::Lattice("algebra fields do not match".into()));
        }
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self {
            lat: self.lat.clone(),
            kind: self.kind,
            data,
        })
    }

    pub fn sub(&self, other: &AlgebraField) -> Result<Self> {
        self.add(&other.scaled(-1.0))
    }

    /// Per-component lattice averages.
    pub fn mean(&self) -> Vec<f64> {
        let d = self.kind.algebra_dim();
        let v = self.lat.num_sites() as f64;
        (0..d)
            .map(|a| {
                let comp: Vec<f64> = (0..self.lat.num_sites()).map(|s| self.site(s)[a]).collect();
                exec::tree_sum(&comp) / v
            })
            .collect()
    }

    /// Subtract the lattice average from every site, per component.
    pub fn demeaned(&self) -> Self {
        let m = self.mean();
        let d = self.kind.algebra_dim();
        let mut out = self.clone();
        for s in 0..self.lat.num_sites() {
            for (a, ma) in m.iter().enumerate().take(d) {
                out.site_mut(s)[a] -= ma;
            }
        }
        out
    }

    /// Exponentiate site-wise into a group field with the given tag.
    pub fn exp(&self, tag: crate::fields::ActionTag) -> Result<GroupField> {
        GroupField::from_fn(&self.lat, self.kind, tag, |s| exp_map(&self.element(s)))
    }
}

/// Body-frame difference `log(base^-1 moved) / t` between two group fields.
pub fn group_field_chart_diff(
    base: &GroupField,
    moved: &GroupField,
    t: f64,
) -> Result<AlgebraField> {
    let mut out = AlgebraField::zeros(base.lattice(), base.kind());
    let d = base.kind().algebra_dim();
    for s in 0..base.lattice().num_sites() {
        let rel = base.get(s).inverse().mul(moved.get(s))?;
        let x = log_map(&rel)?;
        for a in 0..d {
            out.site_mut(s)[a] = x.coeffs()[a] / t;
        }
    }
    Ok(out)
}

/// Left-translate a group field along an algebra field: `u -> u exp(t x)`.
pub fn group_field_move(base: &GroupField, x: &AlgebraField, t: f64) -> Result<GroupField> {
    if base.lattice() != x.lattice() || base.kind() != x.kind() {
        return Err(FieldError::Lattice("field and tangent do not match".into()));
    }
    let elems: Result<Vec<_>> = (0..base.lattice().num_sites())
        .map(|s| base.get(s).mul(&exp_map(&x.element(s).scaled_elem(t))))
        .collect();
    GroupField::new(base.lattice().clone(), base.kind(), elems?, base.tag())
}

impl AlgebraElement {
    fn scaled_elem(&self, t: f64) -> AlgebraElement {
        let coeffs: Vec<f64> = self.coeffs().iter().map(|c| c * t).collect();
        AlgebraElement::from_coeffs(self.kind(), &coeffs)
    }
}

/// A tangent to a field bundle: per-link algebra coefficients plus per-site
/// scalar components, in the chart described at module level.
#[derive(Debug, Clone, PartialEq)]
pub struct BundleTangent {
    /// `(site, dir, component)` flat, component fastest.
    pub link: Vec<f64>,
    /// `(site, component)` flat.
    pub scalar: Vec<f64>,
}

impl BundleTangent {
    pub fn zeros(b: &FieldBundle) -> Self {
        let dim = b.kind().algebra_dim();
        Self {
            link: vec![0.0; b.lattice().num_links() * dim],
            scalar: vec![0.0; b.lattice().num_sites() * b.scalar.rep().real_dim()],
        }
    }

    pub fn dot(&self, other: &BundleTangent) -> f64 {
        let l: Vec<f64> = self
            .link
            .iter()
            .zip(&other.link)
            .map(|(a, b)| a * b)
            .collect();
        let s: Vec<f64> = self
            .scalar
            .iter()
            .zip(&other.scalar)
            .map(|(a, b)| a * b)
            .collect();
        exec::tree_sum(&l) + exec::tree_sum(&s)
    }

    pub fn sup_norm(&self) -> f64 {
        let l = exec::sup(&self.link.iter().map(|x| x.abs()).collect::<Vec<_>>());
        let s = exec::sup(&self.scalar.iter().map(|x| x.abs()).collect::<Vec<_>>());
        l.max(s)
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            link: self.link.iter().map(|x| c * x).collect(),
            scalar: self.scalar.iter().map(|x| c * x).collect(),
        }
    }

    pub fn sub(&self, other: &BundleTangent) -> Self {
        Self {
            link: self
                .link
                .iter()
                .zip(&other.link)
                .map(|(a, b)| a - b)
                .collect(),
            scalar: self
                .scalar
                .iter()
                .zip(&other.scalar)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn normalized(&self) -> Self {
        let n = self.norm();
        if n == 0.0 {
            self.clone()
        } else {
            self.scaled(1.0 / n)
        }
    }
}

/// Move a bundle along a tangent: links `U -> U exp(t x)`, scalar `+ t d`.
pub fn bundle_move(b: &FieldBundle, t: &BundleTangent, eps: f64) -> Result<FieldBundle> {
    let lat = b.lattice().clone();
    let m = lat.num_dims();
    let dim = b.kind().algebra_dim();
    let mut links = b.links.clone();
    for site in 0..lat.num_sites() {
        for dir in 0..m {
            let o = (site * m + dir) * dim;
            let x = AlgebraElement::from_coeffs(
                b.kind(),
                &t.link[o..o + dim]
                    .iter()
                    .map(|c| c * eps)
                    .collect::<Vec<_>>(),
            );
            let moved = links.get(site, dir).mul(&exp_map(&x))?;
            links.set(site, dir, moved);
        }
    }
    let rd = b.scalar.rep().real_dim();
    let mut scalar = b.scalar.clone();
    for site in 0..lat.num_sites() {
        let row = scalar.site_mut(site);
        for (k, rk) in row.iter_mut().enumerate().take(rd) {
            *rk += eps * t.scalar[site * rd + k];
        }
    }
    FieldBundle::new(links, scalar)
}

/// Chart difference `(moved - base) / t` of two bundles: links through
/// `log(U_base^-1 U_moved)`, scalars through plain component differences.
pub fn bundle_chart_diff(base: &FieldBundle, moved: &FieldBundle, t: f64) -> Result<BundleTangent> {
    let lat = base.lattice();
    let m = lat.num_dims();
    let dim = base.kind().algebra_dim();
    let mut out = BundleTangent::zeros(base);
    for site in 0..lat.num_sites() {
        for dir in 0..m {
            let rel = base
                .links
                .get(site, dir)
                .inverse()
                .mul(moved.links.get(site, dir))?;
            let x = log_map(&rel)?;
            let o = (site * m + dir) * dim;
            for a in 0..dim {
                out.link[o + a] = x.coeffs()[a] / t;
            }
        }
    }
    let rd = base.scalar.rep().real_dim();
    for site in 0..lat.num_sites() {
        let bs = base.scalar.site(site);
        let ms = moved.scalar.site(site);
        for k in 0..rd {
            out.scalar[site * rd + k] = (ms[k] - bs[k]) / t;
        }
    }
    Ok(out)
}

/// Scalar-field check: all sites strictly away from zero.
pub fn require_nonvanishing(phi: &ScalarField, what: &str) -> Result<()> {
    for s in 0..phi.lattice().num_sites() {
        if phi.norm_at(s) < 1e-12 {
            return Err(FieldError::Degenerate(format!(
                "{what}: scalar vanishes at site {s}"
            )));
        }
    }
    Ok(())
}
