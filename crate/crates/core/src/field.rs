//! Deterministic i.i.d. uniform marks on Z^d.
//!
//! The field is counter-based: the mark of a site is a pure function of the
//! seed and the site's coordinates, so any process that reads the same field
//! sees the same marks. This is what couples the finite-box jams, the armour
//! sampler and the estimators to each other.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

const GOLDEN: u64 = 0x9e37_79b9_7f4a_7c15;
const DIM_SALT: u64 = 0xd1b5_4a32_d192_ed03;

#[inline(always)]
fn mix64(z: u64) -> u64 {
    let mut z = z.wrapping_add(GOLDEN);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Seed(pub u64);

impl Seed {
    /// Seed of the `index`-th replicate of a run started at `self`.
    pub fn replicate(self, index: u64) -> Seed {
        Seed(self.0.wrapping_add(index))
    }
}

impl FromStr for Seed {
    type Err = Error;

    fn from_str(s: &str) -> Result<Seed> {
        let s = s.trim();
        let parsed = match s.strip_prefix("0x").or_else(|| s.strip_prefix("0X")) {
            Some(hex) => u64::from_str_radix(&hex.replace('_', ""), 16),
            None => s.replace('_', "").parse::<u64>(),
        };
        parsed
            .map(Seed)
            .map_err(|e| Error::invalid("seed", format!("{s:?}: {e}")))
    }
}

impl fmt::Display for Seed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl Serialize for Seed {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_u64(self.0)
    }
}

impl<'de> Deserialize<'de> for Seed {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Seed, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(u64),
            Text(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(v) => Ok(Seed(v)),
            Raw::Text(t) => t.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// A site of Z^d, `1 <= d <= MAX_DIM`.
///
/// The derived ordering is lexicographic in the coordinates (for sites of
/// equal dimension), which is the tie-break used by [`UniformField::rank_less`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Site {
    dim: u8,
    coords: [i32; MAX_DIM],
}

impl Site {
    pub fn new(coords: &[i32]) -> Result<Site> {
        let d = coords.len();
        if d == 0 || d > MAX_DIM {
            return Err(Error::UnsupportedDimension(d));
        }
        let mut c = [0; MAX_DIM];
        c[..d].copy_from_slice(coords);
        Ok(Site {
            dim: d as u8,
            coords: c,
        })
    }

    /// One-dimensional site.
    pub fn at(x: i32) -> Site {
        let mut c = [0; MAX_DIM];
        c[0] = x;
        Site { dim: 1, coords: c }
    }

    pub fn origin(dim: usize) -> Result<Site> {
        check_dim(dim)?;
        Ok(Site {
            dim: dim as u8,
            coords: [0; MAX_DIM],
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim as usize
    }

    #[inline]
    pub fn coords(&self) -> &[i32] {
        &self.coords[..self.dim as usize]
    }

    #[inline]
    pub fn coord(&self, axis: usize) -> i32 {
        self.coords()[axis]
    }

    /// The site moved by `delta` along `axis`.
    #[inline]
    pub fn shifted(&self, axis: usize, delta: i32) -> Site {
        debug_assert!(axis < self.dim());
        let mut s = *self;
        s.coords[axis] += delta;
        s
    }

    pub fn translated(&self, by: &Site) -> Site {
        debug_assert_eq!(self.dim, by.dim);
        let mut s = *self;
        for k in 0..self.dim() {
            s.coords[k] += by.coords[k];
        }
        s
    }

    pub fn difference(&self, other: &Site) -> Site {
        debug_assert_eq!(self.dim, other.dim);
        let mut s = *self;
        for k in 0..self.dim() {
            s.coords[k] -= other.coords[k];
        }
        s
    }

    /// `||self - other||_max`.
    pub fn max_distance(&self, other: &Site) -> u32 {
        self.coords()
            .iter()
            .zip(other.coords())
            .map(|(a, b)| a.abs_diff(*b))
            .max()
            .unwrap_or(0)
    }

    pub fn max_norm(&self) -> u32 {
        self.coords().iter().map(|c| c.unsigned_abs()).max().unwrap_or(0)
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.coords().iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Serialize for Site {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.coords().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Site {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Site, D::Error> {
        let v = Vec::<i32>::deserialize(d)?;
        Site::new(&v).map_err(serde::de::Error::custom)
    }
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 || dim > MAX_DIM {
        Err(Error::UnsupportedDimension(dim))
    } else {
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Mixer {
    Standard,
    /// Marks depend only on coordinate parity. Only reachable through
    /// [`UniformField::corrupted`]; used as a negative control.
    Parity,
}

/// The random field `U = {U(i)}` of i.i.d. uniforms on (0,1).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformField {
    seed: Seed,
    dim: usize,
    base: u64,
    mixer: Mixer,
}

impl UniformField {
    pub fn new(seed: Seed, dim: usize) -> Result<UniformField> {
        check_dim(dim)?;
        Ok(UniformField {
            seed,
            dim,
            base: mix64(seed.0 ^ (dim as u64).wrapping_mul(DIM_SALT)),
            mixer: Mixer::Standard,
        })
    }

    /// A deliberately broken field whose marks only see coordinate parity.
    #[doc(hidden)]
    pub fn corrupted(seed: Seed, dim: usize) -> Result<UniformField> {
        let mut f = UniformField::new(seed, dim)?;
        f.mixer = Mixer::Parity;
        Ok(f)
    }

    pub fn seed(&self) -> Seed {
        self.seed
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Same construction, another seed.
    pub fn reseeded(&self, seed: Seed) -> UniformField {
        let mut f = UniformField::new(seed, self.dim).expect("dimension already validated");
        f.mixer = self.mixer;
        f
    }

    /// Raw 64-bit mark of `site`. Larger word means larger uniform.
    ///
    /// For a fixed seed the map from one coordinate to the word is a
    /// bijection, so in d = 1 distinct sites never tie.
    #[inline]
    pub fn word_at(&self, site: &Site) -> u64 {
        debug_assert_eq!(site.dim(), self.dim);
        match self.mixer {
            Mixer::Standard => {
                let mut h = self.base;
                for &c in site.coords() {
                    h = mix64(h ^ (c as u32 as u64));
                }
                h
            }
            Mixer::Parity => {
                let parity = site.coords().iter().fold(0i32, |a, c| a ^ (c & 1));
                mix64(self.base ^ parity as u64)
            }
        }
    }

    fn check(&self, site: &Site) -> Result<()> {
        if site.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: site.dim(),
            });
        }
        Ok(())
    }

    /// `U(site)`, strictly inside (0,1).
    pub fn uniform_at(&self, site: &Site) -> Result<f64> {
        self.check(site)?;
        Ok(word_to_unit(self.word_at(site)))
    }

    /// Strict total order on sites: by mark, ties by lexicographic coordinates.
    pub fn rank_less(&self, a: &Site, b: &Site) -> Result<bool> {
        self.check(a)?;
        self.check(b)?;
        if a == b {
            return Err(Error::SameSite(*a));
        }
        Ok(self.rank_cmp(a, b) == Ordering::Less)
    }

    #[inline]
    pub(crate) fn rank_cmp(&self, a: &Site, b: &Site) -> Ordering {
        self.word_at(a).cmp(&self.word_at(b)).then_with(|| a.cmp(b))
    }

    #[inline]
    pub(crate) fn rank_key(&self, site: &Site) -> (u64, Site) {
        (self.word_at(site), *site)
    }
}

/// Maps a 64-bit word onto the 2^52 midpoints `(k + 1/2) 2^-52`, which are
/// exactly representable and never 0 or 1.
#[inline]
pub fn word_to_unit(w: u64) -> f64 {
    ((w >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}
