//! Binary field archives: bit-exact serialization of field bundles.
//!
//! Layout (all integers little-endian, all floats IEEE-754 binary64):
//!
//! ```text
//! magic    4 bytes   "DFM1"
//! version  u16       currently 1
//! kind     u8        0 = U(1), 1 = SU(2)
//! m        u8        number of lattice dimensions
//! dims     m x u32   sites per dimension
//! rep      u8        0 = u1-complex, 1 = su2-doublet, 2 = su2-real4
//! family   u8        0 = gauge-acted, 1 = trivial
//! coupling f64
//! links    per site (flat order), per direction:
//!            U(1): angle as 1 f64; SU(2): 8 f64 row-major, re/im pairs
//! scalar   per site: U(1): 2 f64 (re, im); SU(2): 4 f64 components
//! ```
//!
//! Reads check the magic, the version, and the exact payload length; a
//! version mismatch is an explicit error, never a silent reinterpretation.

use std::path::Path;

use latdress::fields::{ActionTag, FieldBundle, LinkField, ScalarField};
use latdress::{GroupElement, GroupKind, Lattice, Representation};
use nalgebra::Matrix2;
use num_complex::Complex64;

use crate::CliError;

pub const MAGIC: &[u8; 4] = b"DFM1";
pub const VERSION: u16 = 1;

fn err(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8], CliError> {
        if self.pos + n > self.buf.len() {
            return Err(err(format!(
                "truncated archive: wanted {} bytes at offset {}, have {}",
                n,
                self.pos,
                self.buf.len()
            )));
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8, CliError> {
        Ok(self.take(1)?[0])
    }

    fn u16(&mut self) -> Result<u16, CliError> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32, CliError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn f64(&mut self) -> Result<f64, CliError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

fn push_element(out: &mut Vec<u8>, g: &GroupElement) {
    match g {
        GroupElement::U1 { theta } => out.extend_from_slice(&theta.to_le_bytes()),
        GroupElement::Su2 { m } => {
            for i in 0..2 {
                for j in 0..2 {
                    out.extend_from_slice(&m[(i, j)].re.to_le_bytes());
                    out.extend_from_slice(&m[(i, j)].im.to_le_bytes());
                }
            }
        }
    }
}

fn read_element(r: &mut Reader, kind: GroupKind) -> Result<GroupElement, CliError> {
    match kind {
        GroupKind::U1 => Ok(GroupElement::U1 { theta: r.f64()? }),
        GroupKind::Su2 => {
            let mut vals = [Complex64::new(0.0, 0.0); 4];
            for v in vals.iter_mut() {
                let re = r.f64()?;
                let im = r.f64()?;
                *v = Complex64::new(re, im);
            }
            Ok(GroupElement::Su2 {
                m: Matrix2::new(vals[0], vals[1], vals[2], vals[3]),
            })
        }
    }
}

/// Serialize a bundle to bytes.
pub fn encode(bundle: &FieldBundle) -> Vec<u8> {
    let lat = bundle.lattice();
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.push(match bundle.kind() {
        GroupKind::U1 => 0,
        GroupKind::Su2 => 1,
    });
    out.push(lat.num_dims() as u8);
    for &d in lat.dims() {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    out.push(match bundle.scalar.rep() {
        Representation::U1Complex => 0,
        Representation::Su2Doublet => 1,
        Representation::Su2Real4 => 2,
    });
    out.push(if bundle.is_gauge_acted() { 0 } else { 1 });
    out.extend_from_slice(&bundle.links.coupling().to_le_bytes());
    for site in 0..lat.num_sites() {
        for dir in 0..lat.num_dims() {
            push_element(&mut out, bundle.links.get(site, dir));
        }
    }
    for x in bundle.scalar.data() {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

/// Deserialize a bundle, validating the header and the exact length.
pub fn decode(bytes: &[u8]) -> Result<FieldBundle, CliError> {
    let mut r = Reader { buf: bytes, pos: 0 };
    let magic = r.take(4)?;
    if magic != MAGIC {
        return Err(err("bad magic: not a field archive"));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(err(format!(
            "unsupported archive version {version}, expected {VERSION}"
        )));
    }
    let kind = match r.u8()? {
        0 => GroupKind::U1,
        1 => GroupKind::Su2,
        k => return Err(err(format!("unknown group kind byte {k}"))),
    };
    let m = r.u8()? as usize;
    let mut dims = Vec::with_capacity(m);
    for _ in 0..m {
        dims.push(r.u32()? as usize);
    }
    let rep = match r.u8()? {
        0 => Representation::U1Complex,
        1 => Representation::Su2Doublet,
        2 => Representation::Su2Real4,
        k => return Err(err(format!("unknown representation byte {k}"))),
    };
    if rep.kind() != kind {
        return Err(err("representation does not match group kind"));
    }
    let gauge_acted = match r.u8()? {
        0 => true,
        1 => false,
        k => return Err(err(format!("unknown action-family byte {k}"))),
    };
    let coupling = r.f64()?;
    let lat = Lattice::new(&dims).map_err(|e| err(format!("bad lattice header: {e}")))?;

    let mut links = Vec::with_capacity(lat.num_links());
    for _ in 0..lat.num_links() {
        links.push(read_element(&mut r, kind)?);
    }
    let mut data = Vec::with_capacity(lat.num_sites() * rep.real_dim());
    for _ in 0..lat.num_sites() * rep.real_dim() {
        data.push(r.f64()?);
    }
    if r.pos != bytes.len() {
        return Err(err(format!(
            "{} trailing bytes after payload",
            bytes.len() - r.pos
        )));
    }

    let (lt, st) = if gauge_acted {
        (ActionTag::Connection, ActionTag::Representation)
    } else {
        (ActionTag::Trivial, ActionTag::Trivial)
    };
    let links = LinkField::new(lat.clone(), kind, links, lt, coupling)
        .map_err(|e| err(format!("bad link payload: {e}")))?;
    let scalar = ScalarField::new(lat, rep, data, st)
        .map_err(|e| err(format!("bad scalar payload: {e}")))?;
    FieldBundle::new(links, scalar).map_err(|e| err(format!("inconsistent bundle: {e}")))
}

pub fn write_archive(path: &Path, bundle: &FieldBundle) -> Result<(), CliError> {
    std::fs::write(path, encode(bundle))
        .map_err(|e| err(format!("cannot write {}: {e}", path.display())))
}

pub fn read_archive(path: &Path) -> Result<FieldBundle, CliError> {
    let bytes =
        std::fs::read(path).map_err(|e| err(format!("cannot read {}: {e}", path.display())))?;
    decode(&bytes)
}
