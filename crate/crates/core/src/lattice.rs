//! Boxes, neighbourhoods and boundaries of Z^d.

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::field::{check_dim, Site};

/// Iterator over the 2d nearest neighbours of a site, axis by axis, `-1`
/// before `+1`.
#[derive(Clone, Debug)]
pub struct Neighbors {
    site: Site,
    next: usize,
}

impl Iterator for Neighbors {
    type Item = Site;

    #[inline]
    fn next(&mut self) -> Option<Site> {
        if self.next >= 2 * self.site.dim() {
            return None;
        }
        let axis = self.next / 2;
        let delta = if self.next.is_multiple_of(2) { -1 } else { 1 };
        self.next += 1;
        Some(self.site.shifted(axis, delta))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = 2 * self.site.dim() - self.next;
        (left, Some(left))
    }
}

impl ExactSizeIterator for Neighbors {}

#[inline]
pub fn neighbors(site: &Site) -> Neighbors {
    Neighbors { site: *site, next: 0 }
}

/// `Λ_n(center) = { j : ||j - center||_max <= n }`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoxRegion {
    pub center: Site,
    pub radius: u32,
}

impl BoxRegion {
    pub fn new(center: Site, radius: u32) -> BoxRegion {
        BoxRegion { center, radius }
    }

    /// `Λ_n` centred at the origin.
    pub fn centered(dim: usize, radius: u32) -> Result<BoxRegion> {
        Ok(BoxRegion::new(Site::origin(dim)?, radius))
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn side(&self) -> u64 {
        2 * self.radius as u64 + 1
    }

    /// `(2n+1)^d`.
    pub fn len(&self) -> u64 {
        self.side().pow(self.dim() as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// `(2n+1)^d - (2n-1)^d`, or 1 when n = 0.
    pub fn boundary_len(&self) -> u64 {
        if self.radius == 0 {
            1
        } else {
            self.len() - (self.side() - 2).pow(self.dim() as u32)
        }
    }

    #[inline]
    pub fn contains(&self, site: &Site) -> bool {
        site.dim() == self.dim() && site.max_distance(&self.center) <= self.radius
    }

    /// Row-major enumeration: the first coordinate varies slowest.
    pub fn sites(&self) -> BoxSites {
        let d = self.dim();
        let r = self.radius as i32;
        let lo: Vec<i32> = self.center.coords().iter().map(|c| c - r).collect();
        BoxSites {
            lo: Site::new(&lo).expect("dimension already validated"),
            side: 2 * r + 1,
            cursor: Some(vec![0; d]),
        }
    }

    pub fn boundary(&self) -> impl Iterator<Item = Site> + '_ {
        self.sites().filter(move |s| self.on_boundary(s))
    }

    /// Has a nearest neighbour outside the box. Assumes `site` is inside.
    pub fn on_boundary(&self, site: &Site) -> bool {
        site.max_distance(&self.center) == self.radius
    }
}

pub struct BoxSites {
    lo: Site,
    side: i32,
    cursor: Option<Vec<i32>>,
}

impl Iterator for BoxSites {
    type Item = Site;

    fn next(&mut self) -> Option<Site> {
        let cur = self.cursor.as_mut()?;
        let mut site = self.lo;
        for (axis, &off) in cur.iter().enumerate() {
            site = site.shifted(axis, off);
        }
        // Odometer step, last axis fastest.
        let mut axis = cur.len();
        loop {
            if axis == 0 {
                self.cursor = None;
                break;
            }
            axis -= 1;
            cur[axis] += 1;
            if cur[axis] < self.side {
                break;
            }
            cur[axis] = 0;
        }
        Some(site)
    }
}

pub fn box_sites(b: &BoxRegion) -> BoxSites {
    b.sites()
}

pub fn boundary_sites(b: &BoxRegion) -> impl Iterator<Item = Site> + '_ {
    b.boundary()
}

/// All sites with `||i||_max <= n` in dimension `dim`, as displacements.
pub fn displacements(dim: usize, n: u32) -> Result<Vec<Site>> {
    check_dim(dim)?;
    Ok(BoxRegion::centered(dim, n)?.sites().collect())
}
