//! Finite-volume parking process with a frozen boundary condition.
//!
//! Sites of the region are visited in increasing order of their marks; a
//! visited site is occupied iff none of its nearest neighbours is occupied at
//! that moment. Neighbours outside the region read the boundary condition,
//! which defaults to 0.

use std::collections::BTreeMap;

use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{Seed, Site, UniformField};
use crate::lattice::{neighbors, BoxRegion};

/// Frozen values outside the jammed region. Unlisted sites read 0.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoundaryCondition {
    assignment: BTreeMap<Site, u8>,
}

impl BoundaryCondition {
    /// The all-zero (free) boundary.
    pub fn zero() -> BoundaryCondition {
        BoundaryCondition::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (Site, u8)>) -> Result<BoundaryCondition> {
        let mut b = BoundaryCondition::zero();
        for (s, v) in pairs {
            b.set(s, v)?;
        }
        Ok(b)
    }

    pub fn set(&mut self, site: Site, value: u8) -> Result<()> {
        match value {
            0 => {
                self.assignment.remove(&site);
            }
            1 => {
                self.assignment.insert(site, 1);
            }
            v => return Err(Error::invalid("boundary", format!("value {v} is not 0 or 1"))),
        }
        Ok(())
    }

    #[inline]
    pub fn get(&self, site: &Site) -> u8 {
        if self.assignment.is_empty() {
            return 0;
        }
        self.assignment.get(site).copied().unwrap_or(0)
    }

    /// Sites frozen at 1.
    pub fn occupied(&self) -> impl Iterator<Item = &Site> + '_ {
        self.assignment.keys()
    }

    pub fn is_zero(&self) -> bool {
        self.assignment.is_empty()
    }
}

/// A jammed (or partially specified) configuration on a finite region.
#[derive(Clone, Debug)]
pub struct Configuration {
    sites: Vec<Site>,
    occupancy: Vec<u8>,
    index: FxHashMap<Site, usize>,
    boundary: BoundaryCondition,
    seed: Option<Seed>,
}

/// Serialized form `{dimension, sites, occupancy, seed}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConfigurationDoc {
    pub dimension: usize,
    pub sites: Vec<Site>,
    pub occupancy: Vec<u8>,
    pub seed: Option<Seed>,
}

impl Configuration {
    /// Builds a configuration from explicit values. Duplicate sites keep their
    /// first value.
    pub fn from_parts(sites: &[Site], occupancy: &[u8], boundary: BoundaryCondition) -> Result<Configuration> {
        if sites.len() != occupancy.len() {
            return Err(Error::invalid(
                "occupancy",
                format!("{} values for {} sites", occupancy.len(), sites.len()),
            ));
        }
        let (dedup, index) = index_region(sites)?;
        let mut values = vec![None; dedup.len()];
        for (s, &v) in sites.iter().zip(occupancy) {
            if v > 1 {
                return Err(Error::invalid("occupancy", format!("value {v} is not 0 or 1")));
            }
            values[index[s]].get_or_insert(v);
        }
        let occupancy_dedup = values.into_iter().map(|v| v.unwrap_or(0)).collect();
        Ok(Configuration {
            sites: dedup,
            occupancy: occupancy_dedup,
            index,
            boundary,
            seed: None,
        })
    }

    pub fn dim(&self) -> usize {
        self.sites[0].dim()
    }

    pub fn sites(&self) -> &[Site] {
        &self.sites
    }

    pub fn occupancy(&self) -> &[u8] {
        &self.occupancy
    }

    pub fn boundary(&self) -> &BoundaryCondition {
        &self.boundary
    }

    pub fn seed(&self) -> Option<Seed> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.index.contains_key(site)
    }

    /// Occupancy of a region site, `None` outside the region.
    pub fn get(&self, site: &Site) -> Option<u8> {
        self.index.get(site).map(|&k| self.occupancy[k])
    }

    /// Value seen from inside: region occupancy, else the boundary.
    #[inline]
    pub fn value(&self, site: &Site) -> u8 {
        match self.index.get(site) {
            Some(&k) => self.occupancy[k],
            None => self.boundary.get(site),
        }
    }

    pub fn count_occupied(&self) -> u64 {
        self.occupancy.iter().map(|&v| v as u64).sum()
    }

    /// No two occupied sites are adjacent, inside the region or across the
    /// boundary.
    pub fn is_independent(&self) -> bool {
        self.sites
            .iter()
            .zip(&self.occupancy)
            .all(|(s, &v)| v == 0 || neighbors(s).all(|k| self.value(&k) == 0))
    }

    /// Every empty region site has an occupied neighbour.
    pub fn is_maximal(&self) -> bool {
        self.sites
            .iter()
            .zip(&self.occupancy)
            .all(|(s, &v)| v == 1 || neighbors(s).any(|k| self.value(&k) == 1))
    }

    /// Restriction to `subset` (which must lie in the region). Occupied
    /// region sites just outside the subset become its boundary.
    pub fn restrict(&self, subset: &[Site]) -> Result<Configuration> {
        let (sites, index) = index_region(subset)?;
        let mut occupancy = Vec::with_capacity(sites.len());
        let mut boundary = BoundaryCondition::zero();
        for s in &sites {
            let v = self
                .get(s)
                .ok_or_else(|| Error::invalid("subset", format!("site {s} is outside the region")))?;
            occupancy.push(v);
            for k in neighbors(s) {
                if !index.contains_key(&k) && self.value(&k) == 1 {
                    boundary.set(k, 1)?;
                }
            }
        }
        Ok(Configuration {
            sites,
            occupancy,
            index,
            boundary,
            seed: self.seed,
        })
    }

    pub fn to_doc(&self) -> ConfigurationDoc {
        ConfigurationDoc {
            dimension: self.dim(),
            sites: self.sites.clone(),
            occupancy: self.occupancy.clone(),
            seed: self.seed,
        }
    }

    /// Dense 0/1 text for a box: one line per run of the last axis, and a
    /// blank line between consecutive 2-d slices when d >= 3.
    pub fn to_grid(&self, b: &BoxRegion) -> Result<String> {
        let side = b.side() as usize;
        let mut out = String::with_capacity(b.len() as usize * 2);
        for (k, s) in b.sites().enumerate() {
            let v = self
                .get(&s)
                .ok_or_else(|| Error::invalid("grid", format!("site {s} is outside the region")))?;
            out.push(if v == 1 { '1' } else { '0' });
            let k = k + 1;
            if k % side == 0 {
                out.push('\n');
                if b.dim() >= 3 && k % (side * side) == 0 && k < b.len() as usize {
                    out.push('\n');
                }
            }
        }
        Ok(out)
    }
}

pub(crate) fn index_region(region: &[Site]) -> Result<(Vec<Site>, FxHashMap<Site, usize>)> {
    let first = region.first().ok_or(Error::EmptyRegion)?;
    let dim = first.dim();
    let mut sites = Vec::with_capacity(region.len());
    let mut index = FxHashMap::default();
    index.reserve(region.len());
    for s in region {
        if s.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: s.dim(),
            });
        }
        if !index.contains_key(s) {
            index.insert(*s, sites.len());
            sites.push(*s);
        }
    }
    Ok((sites, index))
}

/// Jams `region` visiting sites in increasing `key` order (ties by site).
///
/// The outcome depends on the keys only through their relative order.
pub fn jam_by_key<K, F>(region: &[Site], boundary: &BoundaryCondition, key: F) -> Result<Configuration>
where
    K: Ord,
    F: Fn(&Site) -> K,
{
    let (sites, index) = index_region(region)?;
    if let Some(s) = boundary.occupied().find(|s| index.contains_key(*s)) {
        return Err(Error::BoundaryInsideRegion(*s));
    }
    let mut order: Vec<(K, Site, usize)> = sites.iter().enumerate().map(|(k, s)| (key(s), *s, k)).collect();
    order.sort_unstable_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));

    let mut occupancy = vec![0u8; sites.len()];
    for (_, s, k) in &order {
        let free = neighbors(s).all(|j| match index.get(&j) {
            Some(&m) => occupancy[m] == 0,
            None => boundary.get(&j) == 0,
        });
        if free {
            occupancy[*k] = 1;
        }
    }
    Ok(Configuration {
        sites,
        occupancy,
        index,
        boundary: boundary.clone(),
        seed: None,
    })
}

fn check_region_dim(field: &UniformField, region: &[Site]) -> Result<()> {
    match region.iter().find(|s| s.dim() != field.dim()) {
        Some(s) => Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: s.dim(),
        }),
        None => Ok(()),
    }
}

/// Jamming limit `X^{(x)}_Λ` of `region` under `boundary`, driven by `field`.
pub fn jam(field: &UniformField, region: &[Site], boundary: &BoundaryCondition) -> Result<Configuration> {
    check_region_dim(field, region)?;
    let mut c = jam_by_key(region, boundary, |s| field.rank_key(s))?;
    c.seed = Some(field.seed());
    Ok(c)
}

/// Free-boundary jam of a box, `X^{(0)}_{Λ_n(i)}`.
pub fn jam_box(field: &UniformField, b: &BoxRegion) -> Result<Configuration> {
    let sites: Vec<Site> = b.sites().collect();
    jam(field, &sites, &BoundaryCondition::zero())
}

pub fn count_occupied(c: &Configuration) -> u64 {
    c.count_occupied()
}

/// Order in which `jam` visits the region (debugging aid).
pub fn visit_order(field: &UniformField, region: &[Site]) -> Result<Vec<Site>> {
    check_region_dim(field, region)?;
    let (mut sites, _) = index_region(region)?;
    sites.sort_by_cached_key(|s| field.rank_key(s));
    Ok(sites)
}

impl Configuration {
    pub(crate) fn with_seed(mut self, seed: Option<Seed>) -> Configuration {
        self.seed = seed;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(lo: i32, hi: i32) -> Vec<Site> {
        (lo..=hi).map(Site::at).collect()
    }

    #[test]
    fn singleton_with_free_boundary_is_occupied() {
        let f = UniformField::new(Seed(1), 1).unwrap();
        let c = jam(&f, &[Site::at(0)], &BoundaryCondition::zero()).unwrap();
        assert_eq!(c.get(&Site::at(0)), Some(1));
        assert_eq!(c.count_occupied(), 1);
    }

    #[test]
    fn frozen_neighbour_blocks() {
        let f = UniformField::new(Seed(1), 1).unwrap();
        let b = BoundaryCondition::from_pairs([(Site::at(-1), 1)]).unwrap();
        let c = jam(&f, &[Site::at(0)], &b).unwrap();
        assert_eq!(c.get(&Site::at(0)), Some(0));
        assert_eq!(c.count_occupied(), 0);
        assert!(c.is_independent() && c.is_maximal());
    }

    #[test]
    fn boundary_inside_region_is_rejected() {
        let f = UniformField::new(Seed(1), 1).unwrap();
        let b = BoundaryCondition::from_pairs([(Site::at(1), 1)]).unwrap();
        assert!(matches!(jam(&f, &path(0, 2), &b), Err(Error::BoundaryInsideRegion(_))));
        assert!(matches!(
            jam(&f, &[], &BoundaryCondition::zero()),
            Err(Error::EmptyRegion)
        ));
    }

    #[test]
    fn three_site_path_all_orders() {
        // Every visiting order of {-1,0,1}: middle first leaves one particle.
        let region = path(-1, 1);
        let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
        let mut total = 0;
        for p in perms {
            let c = jam_by_key(&region, &BoundaryCondition::zero(), |s| p[(s.coord(0) + 1) as usize]).unwrap();
            let n = c.count_occupied();
            let middle_first = p[1] == 0;
            assert_eq!(n, if middle_first { 1 } else { 2 });
            total += n;
        }
        assert_eq!(total, 10); // mean 10/6 = 5/3
    }

    #[test]
    fn hand_simulation_of_three_sites() {
        for seed in 0..50 {
            let f = UniformField::new(Seed(seed), 1).unwrap();
            let c = jam(&f, &path(-1, 1), &BoundaryCondition::zero()).unwrap();
            let u: Vec<f64> = (-1..=1).map(|x| f.uniform_at(&Site::at(x)).unwrap()).collect();
            let middle_first = u[1] < u[0] && u[1] < u[2];
            let want = if middle_first { [0, 1, 0] } else { [1, 0, 1] };
            assert_eq!(c.occupancy(), &want);
        }
    }

    #[test]
    fn count_examples() {
        let c = Configuration::from_parts(&path(0, 3), &[0, 0, 0, 0], BoundaryCondition::zero()).unwrap();
        assert_eq!(count_occupied(&c), 0);
        let c = Configuration::from_parts(&path(0, 3), &[0, 1, 0, 0], BoundaryCondition::zero()).unwrap();
        assert_eq!(count_occupied(&c), 1);
    }

    #[test]
    fn visit_order_is_increasing_in_marks() {
        let f = UniformField::new(Seed(4), 2).unwrap();
        let b = BoxRegion::centered(2, 3).unwrap();
        let sites: Vec<Site> = b.sites().collect();
        let order = visit_order(&f, &sites).unwrap();
        assert_eq!(order.len(), sites.len());
        for w in order.windows(2) {
            assert!(f.rank_less(&w[0], &w[1]).unwrap());
        }
    }

    #[test]
    fn grid_rendering() {
        let f = UniformField::new(Seed(2), 2).unwrap();
        let b = BoxRegion::centered(2, 1).unwrap();
        let c = jam_box(&f, &b).unwrap();
        let g = c.to_grid(&b).unwrap();
        assert_eq!(g.lines().count(), 3);
        assert!(g.lines().all(|l| l.len() == 3));
        let ones = g.chars().filter(|&ch| ch == '1').count() as u64;
        assert_eq!(ones, c.count_occupied());

        let b3 = BoxRegion::centered(3, 1).unwrap();
        let c3 = jam_box(&UniformField::new(Seed(2), 3).unwrap(), &b3).unwrap();
        let g3 = c3.to_grid(&b3).unwrap();
        assert_eq!(g3.split("\n\n").count(), 3);
    }

    #[test]
    fn doc_roundtrip() {
        let f = UniformField::new(Seed(8), 1).unwrap();
        let c = jam(&f, &path(0, 4), &BoundaryCondition::zero()).unwrap();
        let doc = c.to_doc();
        let text = serde_json::to_string(&doc).unwrap();
        assert!(text.starts_with("{\"dimension\":1,\"sites\":[[0],[1]"));
        let back: ConfigurationDoc = serde_json::from_str(&text).unwrap();
        assert_eq!(back, doc);
    }
}
