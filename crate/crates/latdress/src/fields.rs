//! Field spaces: containers with a declared gauge-group action.
//!
//! One functional container can underlie several field spaces; what
//! distinguishes them is the declared action of the gauge group, recorded
//! here as an [`ActionTag`]. The composers `gt`, `dc`, `udc`, `mu`, `iota`
//! check tags before touching any numerics, and every composer identity is
//! exact in the link formulation (tolerances in the tests cover roundoff
//! only).

use nalgebra::{Matrix2, Vector2, Vector4};
use num_complex::Complex64;

use crate::error::{FieldError, Result};
use crate::exec;
use crate::group::{log_map, GroupElement, GroupKind};
use crate::lattice::Lattice;

/// Declared action of the gauge group on a container.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ActionTag {
    /// `x^g = g^-1 x g` (the gauge group on itself).
    Adjoint,
    /// Link law `U_mu(x) -> g(x)^-1 U_mu(x) g(x + mu)`.
    Connection,
    /// `phi^g = l(g)^-1 phi`.
    Representation,
    /// Invariant spaces: the action does nothing.
    Trivial,
    /// `u^g = g^-1 u`.
    Dressing,
    /// `v^g = v g`.
    Undressing,
}

impl std::fmt::Display for ActionTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ActionTag::Adjoint => "Adjoint",
            ActionTag::Connection => "Connection",
            ActionTag::Representation => "Representation",
            ActionTag::Trivial => "Trivial",
            ActionTag::Dressing => "Dressing",
            ActionTag::Undressing => "Undressing",
        };
        f.write_str(s)
    }
}

/// Representation space of the scalar field.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    /// Complex scalar acted on by a U(1) phase.
    U1Complex,
    /// Complex doublet acted on by the SU(2) matrix.
    Su2Doublet,
    /// Real 4-vector `(phi1, phi2, phi3, phi4)` acted on by the real form of
    /// the doublet representation.
    Su2Real4,
}

impl Representation {
    pub fn kind(self) -> GroupKind {
        match self {
            Representation::U1Complex => GroupKind::U1,
            Representation::Su2Doublet | Representation::Su2Real4 => GroupKind::Su2,
        }
    }

    /// Real components per site.
    pub fn real_dim(self) -> usize {
        match self {
            Representation::U1Complex => 2,
            Representation::Su2Doublet | Representation::Su2Real4 => 4,
        }
    }
}

fn check_same_lattice(a: &Lattice, b: &Lattice) -> Result<()> {
    if a != b {
        return Err(FieldError::Lattice(
            "fields live on different lattices".into(),
        ));
    }
    Ok(())
}

fn check_same_kind(a: GroupKind, b: GroupKind) -> Result<()> {
    if a != b {
        return Err(FieldError::Kind(format!("{a:?} combined with {b:?}")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// GroupField
// ---------------------------------------------------------------------------

/// A group element per site: gauge transformations, dressings, undressings.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupField {
    lat: Lattice,
    kind: GroupKind,
    elems: Vec<GroupElement>,
    tag: ActionTag,
}

impl GroupField {
    pub fn new(
        lat: Lattice,
        kind: GroupKind,
        elems: Vec<GroupElement>,
        tag: ActionTag,
    ) -> Result<Self> {
        if elems.len() != lat.num_sites() {
            return Err(FieldError::Lattice(format!(
                "{} elements for {} sites",
                elems.len(),
                lat.num_sites()
            )));
        }
        match tag {
            ActionTag::Adjoint
            | ActionTag::Dressing
            | ActionTag::Undressing
            | ActionTag::Trivial => {}
            _ => {
                return Err(FieldError::Tag(format!(
                    "a group field cannot carry the {tag} action"
                )))
            }
        }
        if elems.iter().any(|e| e.kind() != kind) {
            return Err(FieldError::Kind(
                "mixed element kinds in a group field".into(),
            ));
        }
        Ok(Self {
            lat,
            kind,
            elems,
            tag,
        })
    }

    pub fn identity(lat: &Lattice, kind: GroupKind, tag: ActionTag) -> Result<Self> {
        let elems = vec![GroupElement::identity(kind); lat.num_sites()];
        Self::new(lat.clone(), kind, elems, tag)
    }

    pub fn from_fn(
        lat: &Lattice,
        kind: GroupKind,
        tag: ActionTag,
        f: impl Fn(usize) -> GroupElement,
    ) -> Result<Self> {
        let elems: Vec<_> = (0..lat.num_sites()).map(f).collect();
        Self::new(lat.clone(), kind, elems, tag)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn tag(&self) -> ActionTag {
        self.tag
    }

    pub fn get(&self, site: usize) -> &GroupElement {
        &self.elems[site]
    }

    pub fn set(&mut self, site: usize, g: GroupElement) {
        self.elems[site] = g;
    }

    /// Same data under another admissible tag.
    pub fn retagged(&self, tag: ActionTag) -> Result<Self> {
        Self::new(self.lat.clone(), self.kind, self.elems.clone(), tag)
    }

    /// Pointwise inverse, ignoring tags (functional-space operation).
    pub fn inverse_raw(&self) -> Self {
        let elems = self.elems.iter().map(|e| e.inverse()).collect();
        Self {
            lat: self.lat.clone(),
            kind: self.kind,
            elems,
            tag: self.tag,
        }
    }

    /// The functional gauge-action transformation on group-valued functions:
    /// pointwise conjugation `x(s) -> g(s)^-1 x(s) g(s)`. The output carries
    /// the input's tag unchanged.
    pub fn ga_apply(&self, g: &GroupField) -> Result<Self> {
        check_same_lattice(&self.lat, &g.lat)?;
        check_same_kind(self.kind, g.kind)?;
        let elems = exec::map_indexed(self.elems.len(), |s| {
            let gi = g.elems[s].inverse();
            gi.mul(&self.elems[s]).and_then(|p| p.mul(&g.elems[s]))
        });
        let elems = elems.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lat: self.lat.clone(),
            kind: self.kind,
            elems,
            tag: self.tag,
        })
    }

    /// The action declared by this field's tag, applied for `gamma`.
    pub fn gauge_transform(&self, gamma: &GroupField) -> Result<Self> {
        check_same_lattice(&self.lat, &gamma.lat)?;
        check_same_kind(self.kind, gamma.kind)?;
        if gamma.tag != ActionTag::Adjoint {
            return Err(FieldError::Tag(format!(
                "gauge transformations must carry the Adjoint tag, got {}",
                gamma.tag
            )));
        }
        let elems: Vec<GroupElement> = match self.tag {
            ActionTag::Adjoint => {
                return self.ga_apply(gamma);
            }
            ActionTag::Dressing => exec::map_indexed(self.elems.len(), |s| {
                gamma.elems[s].inverse().mul(&self.elems[s])
            })
            .into_iter()
            .collect::<Result<_>>()?,
            ActionTag::Undressing => {
                exec::map_indexed(self.elems.len(), |s| self.elems[s].mul(&gamma.elems[s]))
                    .into_iter()
                    .collect::<Result<_>>()?
            }
            ActionTag::Trivial => self.elems.clone(),
            _ => unreachable!("group fields never carry link/scalar tags"),
        };
        Ok(Self {
            lat: self.lat.clone(),
            kind: self.kind,
            elems,
            tag: self.tag,
        })
    }

    /// Sup over sites of the Frobenius distance between matrix realizations.
    pub fn sup_distance(&self, other: &GroupField) -> f64 {
        let d: Vec<f64> = self
            .elems
            .iter()
            .zip(&other.elems)
            .map(|(a, b)| a.distance(b))
            .collect();
        exec::sup(&d)
    }

    /// Sup over sites of `|| log(a^-1 b) ||` (algebra distance).
    pub fn sup_log_distance(&self, other: &GroupField) -> Result<f64> {
        let mut worst = 0.0f64;
        for (a, b) in self.elems.iter().zip(&other.elems) {
            let rel = a.inverse().mul(b)?;
            let n = log_map(&rel)?.norm();
            worst = worst.max(n);
        }
        Ok(worst)
    }
}

// ---------------------------------------------------------------------------
// LinkField
// ---------------------------------------------------------------------------

/// A group element per (site, direction): the lattice connection.
///
/// `coupling` is the interaction constant (`e` or `g`) entering the continuum
/// dictionary `U_mu(x) = exp(-i a g A_mu(x))`; the in-crate identities never
/// depend on it.
#[derive(Debug, Clone, PartialEq)]
pub struct LinkField {
    lat: Lattice,
    kind: GroupKind,
    links: Vec<GroupElement>,
    tag: ActionTag,
    coupling: f64,
}

impl LinkField {
    pub fn new(
        lat: Lattice,
        kind: GroupKind,
        links: Vec<GroupElement>,
        tag: ActionTag,
        coupling: f64,
    ) -> Result<Self> {
        if links.len() != lat.num_links() {
            return Err(FieldError::Lattice(format!(
                "{} links for {} slots",
                links.len(),
                lat.num_links()
            )));
        }
        match tag {
            ActionTag::Connection | ActionTag::Trivial => {}
            _ => {
                return Err(FieldError::Tag(format!(
                    "a link field cannot carry the {tag} action"
                )))
            }
        }
        if coupling == 0.0 || !coupling.is_finite() {
            return Err(FieldError::Invalid(
                "coupling must be finite and nonzero".into(),
            ));
        }
        if links.iter().any(|e| e.kind() != kind) {
            return Err(FieldError::Kind(
                "mixed element kinds in a link field".into(),
            ));
        }
        Ok(Self {
            lat,
            kind,
            links,
            tag,
            coupling,
        })
    }

    pub fn identity(lat: &Lattice, kind: GroupKind, coupling: f64) -> Result<Self> {
        let links = vec![GroupElement::identity(kind); lat.num_links()];
        Self::new(lat.clone(), kind, links, ActionTag::Connection, coupling)
    }

    pub fn from_fn(
        lat: &Lattice,
        kind: GroupKind,
        tag: ActionTag,
        coupling: f64,
        f: impl Fn(usize, usize) -> GroupElement,
    ) -> Result<Self> {
        let m = lat.num_dims();
        let links: Vec<_> = (0..lat.num_links())
            .map(|idx| f(idx / m, idx % m))
            .collect();
        Self::new(lat.clone(), kind, links, tag, coupling)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn kind(&self) -> GroupKind {
        self.kind
    }

    pub fn tag(&self) -> ActionTag {
        self.tag
    }

    pub fn coupling(&self) -> f64 {
        self.coupling
    }

    fn slot(&self, site: usize, dir: usize) -> usize {
        site * self.lat.num_dims() + dir
    }

    pub fn get(&self, site: usize, dir: usize) -> &GroupElement {
        &self.links[self.slot(site, dir)]
    }

    pub fn set(&mut self, site: usize, dir: usize, g: GroupElement) {
        let s = self.slot(site, dir);
        self.links[s] = g;
    }

    pub fn retagged(&self, tag: ActionTag) -> Result<Self> {
        Self::new(
            self.lat.clone(),
            self.kind,
            self.links.clone(),
            tag,
            self.coupling,
        )
    }

    /// Link law of the functional gauge action:
    /// `U_mu(x) -> g(x)^-1 U_mu(x) g(x + mu)`. Tag passes through unchanged.
    pub fn ga_apply(&self, g: &GroupField) -> Result<Self> {
        check_same_lattice(&self.lat, g.lattice())?;
        check_same_kind(self.kind, g.kind())?;
        let m = self.lat.num_dims();
        let links = exec::map_indexed(self.links.len(), |idx| {
            let (site, dir) = (idx / m, idx % m);
            let fwd = self.lat.neighbor(site, dir, 1)?;
            let gi = g.get(site).inverse();
            gi.mul(&self.links[idx]).and_then(|p| p.mul(g.get(fwd)))
        });
        let links = links.into_iter().collect::<Result<Vec<_>>>()?;
        Ok(Self {
            lat: self.lat.clone(),
            kind: self.kind,
            links,
            tag: self.tag,
            coupling: self.coupling,
        })
    }

    /// The action declared by the tag: the link law for `Connection`,
    /// nothing for `Trivial`.
    pub fn gauge_transform(&self, gamma: &GroupField) -> Result<Self> {
        if gamma.tag() != ActionTag::Adjoint {
            return Err(FieldError::Tag(format!(
                "gauge transformations must carry the Adjoint tag, got {}",
                gamma.tag()
            )));
        }
        match self.tag {
            ActionTag::Connection => self.ga_apply(gamma),
            ActionTag::Trivial => Ok(self.clone()),
            _ => unreachable!("link fields only carry Connection or Trivial"),
        }
    }

    pub fn sup_distance(&self, other: &LinkField) -> f64 {
        let d: Vec<f64> = self
            .links
            .iter()
            .zip(&other.links)
            .map(|(a, b)| a.distance(b))
            .collect();
        exec::sup(&d)
    }

    /// Per-link principal logarithms, flattened `(site, dir, component)`.
    pub fn log_coords(&self) -> Result<Vec<f64>> {
        let dim = self.kind.algebra_dim();
        let mut out = vec![0.0; self.links.len() * dim];
        for (idx, link) in self.links.iter().enumerate() {
            let x = log_map(link)?;
            out[idx * dim..(idx + 1) * dim].copy_from_slice(x.coeffs());
        }
        Ok(out)
    }
}

// ---------------------------------------------------------------------------
// ScalarField
// ---------------------------------------------------------------------------

/// Per-site values in the representation space `E`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    lat: Lattice,
    rep: Representation,
    /// Real components, `rep.real_dim()` per site, site-major.
    data: Vec<f64>,
    tag: ActionTag,
}

impl ScalarField {
    pub fn new(lat: Lattice, rep: Representation, data: Vec<f64>, tag: ActionTag) -> Result<Self> {
        if data.len() != lat.num_sites() * rep.real_dim() {
            return Err(FieldError::Lattice(format!(
                "{} components for {} sites x {}",
                data.len(),
                lat.num_sites(),
                rep.real_dim()
            )));
        }
        match tag {
            ActionTag::Representation | ActionTag::Trivial => {}
            _ => {
                return Err(FieldError::Tag(format!(
                    "a scalar field cannot carry the {tag} action"
                )))
            }
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(FieldError::Invalid(
                "scalar field has non-finite entries".into(),
            ));
        }
        Ok(Self {
            lat,
            rep,
            data,
            tag,
        })
    }

    pub fn zeros(lat: &Lattice, rep: Representation, tag: ActionTag) -> Result<Self> {
        Self::new(
            lat.clone(),
            rep,
            vec![0.0; lat.num_sites() * rep.real_dim()],
            tag,
        )
    }

    pub fn from_fn(
        lat: &Lattice,
        rep: Representation,
        tag: ActionTag,
        f: impl Fn(usize) -> Vec<f64>,
    ) -> Result<Self> {
        let mut data = Vec::with_capacity(lat.num_sites() * rep.real_dim());
        for s in 0..lat.num_sites() {
            let v = f(s);
            if v.len() != rep.real_dim() {
                return Err(FieldError::Invalid(
                    "wrong component count from generator".into(),
                ));
            }
            data.extend_from_slice(&v);
        }
        Self::new(lat.clone(), rep, data, tag)
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lat
    }

    pub fn rep(&self) -> Representation {
        self.rep
    }

    pub fn kind(&self) -> GroupKind {
        self.rep.kind()
    }

    pub fn tag(&self) -> ActionTag {
        self.tag
    }

    pub fn site(&self, s: usize) -> &[f64] {
        let d = self.rep.real_dim();
        &self.data[s * d..(s + 1) * d]
    }

    pub fn site_mut(&mut self, s: usize) -> &mut [f64] {
        let d = self.rep.real_dim();
        &mut self.data[s * d..(s + 1) * d]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn retagged(&self, tag: ActionTag) -> Result<Self> {
        Self::new(self.lat.clone(), self.rep, self.data.clone(), tag)
    }

    /// U(1) value as a complex number.
    pub fn complex_at(&self, s: usize) -> Complex64 {
        let v = self.site(s);
        Complex64::new(v[0], v[1])
    }

    /// SU(2) value as a doublet `(phi1 + i phi2, phi3 + i phi4)` regardless
    /// of the stored real form (the adapter is the identity on components).
    pub fn doublet_at(&self, s: usize) -> Vector2<Complex64> {
        let v = self.site(s);
        Vector2::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]))
    }

    pub fn real4_at(&self, s: usize) -> Vector4<f64> {
        let v = self.site(s);
        Vector4::new(v[0], v[1], v[2], v[3])
    }

    pub fn set_complex(&mut self, s: usize, z: Complex64) {
        let v = self.site_mut(s);
        v[0] = z.re;
        v[1] = z.im;
    }

    pub fn set_doublet(&mut self, s: usize, d: Vector2<Complex64>) {
        let v = self.site_mut(s);
        v[0] = d[0].re;
        v[1] = d[0].im;
        v[2] = d[1].re;
        v[3] = d[1].im;
    }

    /// Norm of the representation vector at a site.
    pub fn norm_at(&self, s: usize) -> f64 {
        self.site(s).iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// `phi(x) -> l(g(x))^-1 phi(x)`. Tag passes through unchanged.
    pub fn ga_apply(&self, g: &GroupField) -> Result<Self> {
        check_same_lattice(&self.lat, g.lattice())?;
        check_same_kind(self.kind(), g.kind())?;
        let d = self.rep.real_dim();
        let rows = exec::map_indexed(self.lat.num_sites(), |s| {
            apply_rep_inverse(self.rep, g.get(s), self.site(s))
        });
        let mut data = vec![0.0; self.data.len()];
        for (s, row) in rows.into_iter().enumerate() {
            data[s * d..(s + 1) * d].copy_from_slice(&row);
        }
        Ok(Self {
            lat: self.lat.clone(),
            rep: self.rep,
            data,
            tag: self.tag,
        })
    }

    pub fn gauge_transform(&self, gamma: &GroupField) -> Result<Self> {
        if gamma.tag() != ActionTag::Adjoint {
            return Err(FieldError::Tag(format!(
                "gauge transformations must carry the Adjoint tag, got {}",
                gamma.tag()
            )));
        }
        match self.tag {
            ActionTag::Representation => self.ga_apply(gamma),
            ActionTag::Trivial => Ok(self.clone()),
            _ => unreachable!("scalar fields only carry Representation or Trivial"),
        }
    }

    pub fn sup_distance(&self, other: &ScalarField) -> f64 {
        let d: Vec<f64> = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .collect();
        exec::sup(&d)
    }
}

/// `l(g)` applied to the real components of one site value.
pub fn rep_apply(rep: Representation, g: &GroupElement, v: &[f64]) -> Vec<f64> {
    match rep {
        Representation::U1Complex => {
            let z = Complex64::new(v[0], v[1]) * g.phase();
            vec![z.re, z.im]
        }
        Representation::Su2Doublet => {
            let m: Matrix2<Complex64> = g.matrix();
            let phi = Vector2::new(Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3]));
            let out = m * phi;
            vec![out[0].re, out[0].im, out[1].re, out[1].im]
        }
        Representation::Su2Real4 => {
            let r = g.real4_matrix();
            let phi = Vector4::new(v[0], v[1], v[2], v[3]);
            let out = r * phi;
            vec![out[0], out[1], out[2], out[3]]
        }
    }
}

/// The real matrix of `l(g)` on the real components: 2x2 rotation for U(1),
/// the real form of the doublet action for SU(2).
pub fn rep_real_matrix(rep: Representation, g: &GroupElement) -> nalgebra::DMatrix<f64> {
    match rep {
        Representation::U1Complex => {
            let (s, c) = g.angle().sin_cos();
            nalgebra::DMatrix::from_row_slice(2, 2, &[c, -s, s, c])
        }
        Representation::Su2Doublet | Representation::Su2Real4 => {
            let r = g.real4_matrix();
            nalgebra::DMatrix::from_fn(4, 4, |i, j| r[(i, j)])
        }
    }
}

fn apply_rep_inverse(rep: Representation, g: &GroupElement, v: &[f64]) -> Vec<f64> {
    rep_apply(rep, &g.inverse(), v)
}

// ---------------------------------------------------------------------------
// FieldBundle and the field-composers
// ---------------------------------------------------------------------------

/// The model's field content: a connection plus a scalar on the same lattice.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldBundle {
    pub links: LinkField,
    pub scalar: ScalarField,
}

impl FieldBundle {
    pub fn new(links: LinkField, scalar: ScalarField) -> Result<Self> {
        check_same_lattice(links.lattice(), scalar.lattice())?;
        check_same_kind(links.kind(), scalar.kind())?;
        let family_ok = matches!(
            (links.tag(), scalar.tag()),
            (ActionTag::Connection, ActionTag::Representation)
                | (ActionTag::Trivial, ActionTag::Trivial)
        );
        if !family_ok {
            return Err(FieldError::Tag(format!(
                "bundle parts must share an action family, got links:{} scalar:{}",
                links.tag(),
                scalar.tag()
            )));
        }
        Ok(Self { links, scalar })
    }

    pub fn lattice(&self) -> &Lattice {
        self.links.lattice()
    }

    pub fn kind(&self) -> GroupKind {
        self.links.kind()
    }

    /// True when both parts carry the nontrivial gauge action.
    pub fn is_gauge_acted(&self) -> bool {
        self.links.tag() == ActionTag::Connection
    }

    /// The functional gauge action on both parts; tags pass through.
    pub fn ga_apply(&self, g: &GroupField) -> Result<Self> {
        Ok(Self {
            links: self.links.ga_apply(g)?,
            scalar: self.scalar.ga_apply(g)?,
        })
    }

    fn retagged(&self, gauge_acted: bool) -> Result<Self> {
        let (lt, st) = if gauge_acted {
            (ActionTag::Connection, ActionTag::Representation)
        } else {
            (ActionTag::Trivial, ActionTag::Trivial)
        };
        Ok(Self {
            links: self.links.retagged(lt)?,
            scalar: self.scalar.retagged(st)?,
        })
    }

    pub fn sup_distance(&self, other: &FieldBundle) -> f64 {
        self.links
            .sup_distance(&other.links)
            .max(self.scalar.sup_distance(&other.scalar))
    }
}

/// Gauge transformation: gauge-acted bundle x Adjoint -> gauge-acted bundle.
pub fn gt(b: &FieldBundle, gamma: &GroupField) -> Result<FieldBundle> {
    if !b.is_gauge_acted() {
        return Err(FieldError::Tag("gt needs a gauge-acted bundle".into()));
    }
    if gamma.tag() != ActionTag::Adjoint {
        return Err(FieldError::Tag(format!(
            "gt needs an Adjoint field, got {}",
            gamma.tag()
        )));
    }
    b.ga_apply(gamma)
}

/// Dressing composer: gauge-acted bundle x Dressing -> invariant bundle.
pub fn dc(b: &FieldBundle, u: &GroupField) -> Result<FieldBundle> {
    if !b.is_gauge_acted() {
        return Err(FieldError::Tag("dc needs a gauge-acted bundle".into()));
    }
    if u.tag() != ActionTag::Dressing {
        return Err(FieldError::Tag(format!(
            "dc needs a Dressing field, got {}",
            u.tag()
        )));
    }
    b.ga_apply(u)?.retagged(false)
}

/// Un-dressing composer: invariant bundle x Undressing -> gauge-acted bundle.
pub fn udc(b: &FieldBundle, v: &GroupField) -> Result<FieldBundle> {
    if b.is_gauge_acted() {
        return Err(FieldError::Tag("udc needs an invariant bundle".into()));
    }
    if v.tag() != ActionTag::Undressing {
        return Err(FieldError::Tag(format!(
            "udc needs an Undressing field, got {}",
            v.tag()
        )));
    }
    b.ga_apply(v)?.retagged(true)
}

/// Pointwise product with the admissible-tag table of the group composers.
///
/// Exactly five pairs are admitted; anything else is a tag violation before
/// any numerics run.
pub fn mu(g1: &GroupField, g2: &GroupField) -> Result<GroupField> {
    use ActionTag::*;
    let out_tag = match (g1.tag(), g2.tag()) {
        (Adjoint, Adjoint) => Adjoint,
        (Adjoint, Dressing) => Dressing,
        (Undressing, Adjoint) => Undressing,
        (Dressing, Undressing) => Adjoint,
        (Undressing, Dressing) => Trivial,
        (a, b) => {
            return Err(FieldError::Tag(format!("mu is not defined on ({a}, {b})")));
        }
    };
    check_same_lattice(g1.lattice(), g2.lattice())?;
    check_same_kind(g1.kind(), g2.kind())?;
    let elems = exec::map_indexed(g1.lattice().num_sites(), |s| g1.get(s).mul(g2.get(s)))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    GroupField::new(g1.lattice().clone(), g1.kind(), elems, out_tag)
}

/// Pointwise inverse with the admissible-tag table:
/// Adjoint -> Adjoint, Dressing -> Undressing, Undressing -> Dressing.
pub fn iota(g: &GroupField) -> Result<GroupField> {
    use ActionTag::*;
    let out_tag = match g.tag() {
        Adjoint => Adjoint,
        Dressing => Undressing,
        Undressing => Dressing,
        t => return Err(FieldError::Tag(format!("iota is not defined on {t}"))),
    };
    let elems = (0..g.lattice().num_sites())
        .map(|s| g.get(s).inverse())
        .collect();
    GroupField::new(g.lattice().clone(), g.kind(), elems, out_tag)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::{exp_map, AlgebraElement};
    use crate::random::{random_bundle, random_group_field};

    fn lat2() -> Lattice {
        Lattice::new(&[2, 2]).unwrap()
    }

    #[test]
    fn ga_apply_u1_link_law_example() {
        // 1D two-site lattice, links at 0.3, gauge angles (0, 0.1)
        let lat = Lattice::new(&[2]).unwrap();
        let links = LinkField::from_fn(&lat, GroupKind::U1, ActionTag::Connection, 1.0, |_, _| {
            GroupElement::from_angle(0.3)
        })
        .unwrap();
        let g = GroupField::from_fn(&lat, GroupKind::U1, ActionTag::Adjoint, |s| {
            GroupElement::from_angle(if s == 0 { 0.0 } else { 0.1 })
        })
        .unwrap();
        let dressed = links.ga_apply(&g).unwrap();
        assert!((dressed.get(0, 0).angle() - 0.4).abs() < 1e-15);
        assert!((dressed.get(1, 0).angle() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn ga_identity_returns_input() {
        let b = random_bundle(&lat2(), GroupKind::Su2, 5, 0.6);
        let e = GroupField::identity(&lat2(), GroupKind::Su2, ActionTag::Adjoint).unwrap();
        let out = b.ga_apply(&e).unwrap();
        assert!(b.sup_distance(&out) < 1e-15);
    }

    #[test]
    fn ga_right_action_group_law() {
        for kind in [GroupKind::U1, GroupKind::Su2] {
            let b = random_bundle(&lat2(), kind, 11, 0.7);
            let g1 = random_group_field(&lat2(), kind, 12, 0.7, ActionTag::Adjoint);
            let g2 = random_group_field(&lat2(), kind, 13, 0.7, ActionTag::Adjoint);
            let lhs = b.ga_apply(&g1).unwrap().ga_apply(&g2).unwrap();
            let rhs = b.ga_apply(&mu(&g1, &g2).unwrap()).unwrap();
            assert!(lhs.sup_distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn dc_invariance_identity() {
        for kind in [GroupKind::U1, GroupKind::Su2] {
            let b = random_bundle(&lat2(), kind, 21, 0.6);
            let gamma = random_group_field(&lat2(), kind, 22, 0.6, ActionTag::Adjoint);
            let u = random_group_field(&lat2(), kind, 23, 0.6, ActionTag::Dressing);
            let lhs = dc(
                &gt(&b, &gamma).unwrap(),
                &u.gauge_transform(&gamma).unwrap(),
            )
            .unwrap();
            let rhs = dc(&b, &u).unwrap();
            assert!(lhs.sup_distance(&rhs) < 1e-12);
        }
    }

    #[test]
    fn identity_dressing_only_retags() {
        let b = random_bundle(&lat2(), GroupKind::U1, 25, 0.6);
        let e = GroupField::identity(&lat2(), GroupKind::U1, ActionTag::Dressing).unwrap();
        let dressed = dc(&b, &e).unwrap();
        assert!(!dressed.is_gauge_acted());
        assert!(b.sup_distance(&dressed) < 1e-15);
        let back = udc(&dressed, &iota(&e).unwrap()).unwrap();
        assert!(back.is_gauge_acted());
        assert!(b.sup_distance(&back) < 1e-15);
    }

    #[test]
    fn udc_inverts_dc() {
        let b = random_bundle(&lat2(), GroupKind::Su2, 31, 0.6);
        let u = random_group_field(&lat2(), GroupKind::Su2, 32, 0.6, ActionTag::Dressing);
        let back = udc(&dc(&b, &u).unwrap(), &iota(&u).unwrap()).unwrap();
        assert!(b.sup_distance(&back) < 1e-12);
        assert!(back.is_gauge_acted());
    }

    #[test]
    fn inadmissible_mu_pairs_are_rejected() {
        let lat = lat2();
        let u1 = random_group_field(&lat, GroupKind::U1, 41, 0.5, ActionTag::Dressing);
        let u2 = random_group_field(&lat, GroupKind::U1, 42, 0.5, ActionTag::Dressing);
        assert!(matches!(mu(&u1, &u2), Err(FieldError::Tag(_))));
        let t = u1.retagged(ActionTag::Trivial).unwrap();
        assert!(matches!(iota(&t), Err(FieldError::Tag(_))));
    }

    #[test]
    fn mu_unique_orbit() {
        let lat = lat2();
        let u1 = random_group_field(&lat, GroupKind::Su2, 51, 0.5, ActionTag::Dressing);
        let u2 = random_group_field(&lat, GroupKind::Su2, 52, 0.5, ActionTag::Dressing);
        let gamma = mu(&u1, &iota(&u2).unwrap()).unwrap();
        assert_eq!(gamma.tag(), ActionTag::Adjoint);
        let rebuilt = mu(&iota(&gamma).unwrap(), &u1).unwrap();
        assert_eq!(rebuilt.tag(), ActionTag::Dressing);
        assert!(rebuilt.sup_distance(&u2) < 1e-12);
        // mu(u, iota(u)) is the identity, tagged Adjoint
        let e = mu(&u1, &iota(&u1).unwrap()).unwrap();
        let id = GroupField::identity(&lat, GroupKind::Su2, ActionTag::Adjoint).unwrap();
        assert!(e.sup_distance(&id) < 1e-13);
    }

    #[test]
    fn wrong_tags_fail_before_numerics() {
        let b = random_bundle(&lat2(), GroupKind::U1, 61, 0.5);
        let not_adjoint = random_group_field(&lat2(), GroupKind::U1, 62, 0.5, ActionTag::Dressing);
        assert!(matches!(gt(&b, &not_adjoint), Err(FieldError::Tag(_))));
        let not_dressing = not_adjoint.retagged(ActionTag::Adjoint).unwrap();
        assert!(matches!(dc(&b, &not_dressing), Err(FieldError::Tag(_))));
        let trivial = dc(&b, &not_adjoint).unwrap();
        assert!(matches!(
            dc(&trivial, &not_adjoint),
            Err(FieldError::Tag(_))
        ));
    }

    #[test]
    fn lattice_mismatch_is_an_input_error() {
        let a = random_group_field(&lat2(), GroupKind::U1, 71, 0.5, ActionTag::Adjoint);
        let lat3 = Lattice::new(&[4]).unwrap();
        let b = random_group_field(&lat3, GroupKind::U1, 72, 0.5, ActionTag::Adjoint);
        assert!(matches!(mu(&a, &b), Err(FieldError::Lattice(_))));
    }

    #[test]
    fn doublet_and_real4_adapters_agree() {
        let lat = lat2();
        let g = random_group_field(&lat, GroupKind::Su2, 81, 0.8, ActionTag::Adjoint);
        let mk = |rep| {
            ScalarField::from_fn(&lat, rep, ActionTag::Representation, |s| {
                vec![0.1 * s as f64, 0.2, -0.3, 0.7 + 0.05 * s as f64]
            })
            .unwrap()
        };
        let d = mk(Representation::Su2Doublet).ga_apply(&g).unwrap();
        let r = mk(Representation::Su2Real4).ga_apply(&g).unwrap();
        for s in 0..lat.num_sites() {
            for k in 0..4 {
                assert!((d.site(s)[k] - r.site(s)[k]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn su2_exp_map_field_helper() {
        let lat = lat2();
        let f = GroupField::from_fn(&lat, GroupKind::Su2, ActionTag::Dressing, |s| {
            exp_map(&AlgebraElement::Su2 {
                coeffs: [0.1 * s as f64, 0.0, 0.2],
            })
        })
        .unwrap();
        assert_eq!(f.tag(), ActionTag::Dressing);
    }
}
