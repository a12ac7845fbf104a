//! Periodic lattice geometry and flat site indexing.
//!
//! Sites are stored in row-major flat order (last coordinate fastest); every
//! per-site and per-link container in this crate shares that indexing, which
//! keeps finite-difference Jacobian layouts canonical.

use crate::error::{FieldError, Result};

/// A periodic hypercubic lattice: `dims[d]` sites along direction `d`.
#[derive(Debug, Clone, PartialEq)]
pub struct Lattice {
    dims: Vec<usize>,
    spacing: f64,
    strides: Vec<usize>,
    sites: usize,
}

impl Lattice {
    /// Unit-spacing lattice. Every dimension must have at least 2 sites.
    pub fn new(dims: &[usize]) -> Result<Self> {
        Self::with_spacing(dims, 1.0)
    }

    pub fn with_spacing(dims: &[usize], spacing: f64) -> Result<Self> {
        if dims.is_empty() {
            return Err(FieldError::Invalid(
                "lattice needs at least one dimension".into(),
            ));
        }
        if dims.iter().any(|&n| n < 2) {
            return Err(FieldError::Invalid(format!(
                "every dimension must have >= 2 sites, got {dims:?}"
            )));
        }
        if !spacing.is_finite() || spacing <= 0.0 {
            return Err(FieldError::Invalid(format!(
                "spacing must be positive, got {spacing}"
            )));
        }
        let mut strides = vec![1usize; dims.len()];
        for d in (0..dims.len().saturating_sub(1)).rev() {
            strides[d] = strides[d + 1] * dims[d + 1];
        }
        let sites = dims.iter().product();
        Ok(Self {
            dims: dims.to_vec(),
            spacing,
            strides,
            sites,
        })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    /// Lattice unit `a`. It appears only in continuum dictionaries; all
    /// in-crate identities are exact in lattice units.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn num_dims(&self) -> usize {
        self.dims.len()
    }

    pub fn num_sites(&self) -> usize {
        self.sites
    }

    /// Links per lattice: one per site per direction.
    pub fn num_links(&self) -> usize {
        self.sites * self.dims.len()
    }

    pub fn site_index(&self, coords: &[usize]) -> Result<usize> {
        if coords.len() != self.dims.len() {
            return Err(FieldError::Lattice(format!(
                "coordinate rank {} != lattice rank {}",
                coords.len(),
                self.dims.len()
            )));
        }
        let mut idx = 0;
        for (d, (&c, &n)) in coords.iter().zip(&self.dims).enumerate() {
            if c >= n {
                return Err(FieldError::Lattice(format!(
                    "coordinate {c} out of range in dim {d}"
                )));
            }
            idx += c * self.strides[d];
        }
        Ok(idx)
    }

    pub fn site_coords(&self, site: usize) -> Vec<usize> {
        let mut c = vec![0usize; self.dims.len()];
        let mut rest = site;
        for (cd, &stride) in c.iter_mut().zip(&self.strides) {
            *cd = rest / stride;
            rest %= stride;
        }
        c
    }

    /// Periodic neighbor of `site` along `dir`; `sign` must be `+1` or `-1`.
    pub fn neighbor(&self, site: usize, dir: usize, sign: i32) -> Result<usize> {
        if site >= self.sites {
            return Err(FieldError::Lattice(format!("site {site} out of range")));
        }
        if dir >= self.dims.len() {
            return Err(FieldError::Lattice(format!("direction {dir} out of range")));
        }
        if sign != 1 && sign != -1 {
            return Err(FieldError::Invalid(format!(
                "sign must be +1 or -1, got {sign}"
            )));
        }
        let n = self.dims[dir];
        let stride = self.strides[dir];
        let c = (site / stride) % n;
        let shifted = if sign == 1 {
            (c + 1) % n
        } else {
            (c + n - 1) % n
        };
        Ok(site - c * stride + shifted * stride)
    }

    /// Graph distance between two sites: periodic Manhattan metric.
    pub fn graph_distance(&self, a: usize, b: usize) -> usize {
        let ca = self.site_coords(a);
        let cb = self.site_coords(b);
        ca.iter()
            .zip(&cb)
            .zip(&self.dims)
            .map(|((&x, &y), &n)| {
                let d = x.abs_diff(y);
                d.min(n - d)
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_wrap_1d() {
        let lat = Lattice::new(&[4]).unwrap();
        assert_eq!(lat.neighbor(3, 0, 1).unwrap(), 0);
        assert_eq!(lat.neighbor(0, 0, -1).unwrap(), 3);
    }

    #[test]
    fn unit_step_2d() {
        let lat = Lattice::new(&[2, 2]).unwrap();
        let s = lat.site_index(&[1, 0]).unwrap();
        let n = lat.neighbor(s, 1, 1).unwrap();
        assert_eq!(lat.site_coords(n), vec![1, 1]);
    }

    #[test]
    fn neighbor_round_trip_and_bijection() {
        let lat = Lattice::new(&[3, 4, 2]).unwrap();
        for dir in 0..3 {
            let mut seen = vec![false; lat.num_sites()];
            for s in 0..lat.num_sites() {
                let f = lat.neighbor(s, dir, 1).unwrap();
                assert_eq!(lat.neighbor(f, dir, -1).unwrap(), s);
                assert!(!seen[f]);
                seen[f] = true;
            }
        }
    }

    #[test]
    fn rejects_degenerate_dims() {
        assert!(Lattice::new(&[1, 4]).is_err());
        assert!(Lattice::new(&[]).is_err());
    }

    #[test]
    fn out_of_range_inputs_error() {
        let lat = Lattice::new(&[4]).unwrap();
        assert!(lat.neighbor(4, 0, 1).is_err());
        assert!(lat.neighbor(0, 1, 1).is_err());
        assert!(lat.neighbor(0, 0, 2).is_err());
    }

    #[test]
    fn graph_distance_is_periodic() {
        let lat = Lattice::new(&[8]).unwrap();
        assert_eq!(lat.graph_distance(0, 7), 1);
        assert_eq!(lat.graph_distance(0, 4), 4);
        let lat2 = Lattice::new(&[4, 4]).unwrap();
        let a = lat2.site_index(&[0, 0]).unwrap();
        let b = lat2.site_index(&[3, 3]).unwrap();
        assert_eq!(lat2.graph_distance(a, b), 2);
    }
}
