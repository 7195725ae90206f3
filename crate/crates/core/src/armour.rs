//! Armours and the exact sampler of the thermodynamic jamming limit.
//!
//! The armour `A(Λ)` is `Λ` together with every site reachable from `Λ` by a
//! nearest-neighbour path along strictly decreasing marks. It is closed under
//! descent: any neighbour with a smaller mark than a member is itself a
//! member. Because the parking sweep at a site only looks at neighbours
//! visited earlier (smaller marks), jamming `A(Λ)` with any exterior
//! condition fixes the value of every member, and for `Λ = {i}` that value
//! at `i` is `X(i)`.

use rustc_hash::FxHashSet;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::{word_to_unit, Site, UniformField};
use crate::lattice::{neighbors, BoxRegion};
use crate::parking::{jam, BoundaryCondition, Configuration};

/// Default search radius around the seed set.
pub const DEFAULT_CAP: u32 = 64;

/// Sets this small are scanned linearly.
const LINEAR_LIMIT: usize = 24;

#[derive(Clone, Debug)]
pub struct Armour {
    seedset: Vec<Site>,
    members: Vec<Site>,
}

/// Debug dump `{seedset, members, marks}`; marks are aligned with members.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArmourDoc {
    pub seedset: Vec<Site>,
    pub members: Vec<Site>,
    pub marks: Vec<f64>,
}

impl Armour {
    pub fn seedset(&self) -> &[Site] {
        &self.seedset
    }

    /// Members, seed set first, then in discovery order.
    pub fn members(&self) -> &[Site] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, site: &Site) -> bool {
        self.members.contains(site)
    }

    /// Largest `||j - i||_max` over members `j`.
    pub fn radius_around(&self, i: &Site) -> u32 {
        self.members.iter().map(|j| j.max_distance(i)).max().unwrap_or(0)
    }

    /// Whether every member lies in `b`.
    pub fn within(&self, b: &BoxRegion) -> bool {
        self.members.iter().all(|s| b.contains(s))
    }

    /// Post-hoc check of descent closure and seed containment.
    pub fn is_descent_closed(&self, field: &UniformField) -> bool {
        let set: FxHashSet<Site> = self.members.iter().copied().collect();
        self.seedset.iter().all(|s| set.contains(s))
            && self
                .members
                .iter()
                .all(|j| neighbors(j).all(|k| field.rank_cmp(&k, j).is_gt() || set.contains(&k)))
    }

    pub fn to_doc(&self, field: &UniformField) -> ArmourDoc {
        ArmourDoc {
            seedset: self.seedset.clone(),
            members: self.members.clone(),
            marks: self.members.iter().map(|s| word_to_unit(field.word_at(s))).collect(),
        }
    }
}

/// Membership set that stays a flat vector while small.
enum Visited {
    Small(Vec<Site>),
    Large(FxHashSet<Site>),
}

impl Visited {
    fn with(seeds: &[Site]) -> Visited {
        if seeds.len() <= LINEAR_LIMIT {
            Visited::Small(seeds.to_vec())
        } else {
            Visited::Large(seeds.iter().copied().collect())
        }
    }

    #[inline]
    fn contains(&self, s: &Site) -> bool {
        match self {
            Visited::Small(v) => v.contains(s),
            Visited::Large(h) => h.contains(s),
        }
    }

    #[inline]
    fn insert(&mut self, s: Site) {
        match self {
            Visited::Small(v) => {
                v.push(s);
                if v.len() > LINEAR_LIMIT {
                    *self = Visited::Large(v.drain(..).collect());
                }
            }
            Visited::Large(h) => {
                h.insert(s);
            }
        }
    }
}

/// Exact armour of `seedset` by depth-first descent. Fails with
/// [`Error::ArmourOverflow`] if a member would leave the bounding box of
/// the seed set enlarged by `cap` in every direction.
pub fn compute_armour(field: &UniformField, seedset: &[Site], cap: u32) -> Result<Armour> {
    if seedset.is_empty() {
        return Err(Error::EmptyRegion);
    }
    if cap == 0 {
        return Err(Error::invalid("cap", "must be positive"));
    }
    let d = field.dim();
    let mut lo = [i64::MAX; crate::field::MAX_DIM];
    let mut hi = [i64::MIN; crate::field::MAX_DIM];
    for s in seedset {
        if s.dim() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: s.dim(),
            });
        }
        for (k, &c) in s.coords().iter().enumerate() {
            lo[k] = lo[k].min(c as i64 - cap as i64);
            hi[k] = hi[k].max(c as i64 + cap as i64);
        }
    }

    let mut seeds: Vec<Site> = Vec::with_capacity(seedset.len());
    {
        let mut seen = Visited::with(&[]);
        for s in seedset {
            if !seen.contains(s) {
                seen.insert(*s);
                seeds.push(*s);
            }
        }
    }
    let mut visited = Visited::with(&seeds);
    let mut members = seeds.clone();
    let mut stack = seeds.clone();
    while let Some(j) = stack.pop() {
        let wj = field.word_at(&j);
        for k in neighbors(&j) {
            let wk = field.word_at(&k);
            if (wk, k) >= (wj, j) || visited.contains(&k) {
                continue;
            }
            let inside = k
                .coords()
                .iter()
                .enumerate()
                .all(|(a, &c)| (c as i64) >= lo[a] && (c as i64) <= hi[a]);
            if !inside {
                return Err(Error::ArmourOverflow { cap, partial: members });
            }
            visited.insert(k);
            members.push(k);
            stack.push(k);
        }
    }
    Ok(Armour {
        seedset: seeds,
        members,
    })
}

/// Exact sample of the thermodynamic jamming limit `X(i)`.
pub fn sample_x(field: &UniformField, i: &Site, cap: u32) -> Result<u8> {
    if i.dim() != field.dim() {
        return Err(Error::DimensionMismatch {
            expected: field.dim(),
            got: i.dim(),
        });
    }
    // A local minimum is its own armour and always parks.
    let wi = field.rank_key(i);
    if neighbors(i).all(|k| field.rank_key(&k) > wi) {
        return Ok(1);
    }
    let armour = compute_armour(field, std::slice::from_ref(i), cap)?;
    let c = jam(field, armour.members(), &BoundaryCondition::zero())?;
    Ok(c.get(i).expect("seed is a member"))
}

/// Jams the whole armour of a site set once. Every member's value equals
/// the thermodynamic limit there.
pub fn jam_armour(field: &UniformField, seedset: &[Site], cap: u32) -> Result<(Armour, Configuration)> {
    let armour = compute_armour(field, seedset, cap)?;
    let c = jam(field, armour.members(), &BoundaryCondition::zero())?;
    Ok((armour, c))
}

/// Exact sample of `X` on a box window. The returned configuration's
/// boundary holds the occupied armour sites adjacent to the window.
pub fn sample_window(field: &UniformField, window: &BoxRegion, cap: u32) -> Result<Configuration> {
    let sites: Vec<Site> = window.sites().collect();
    sample_sites(field, &sites, cap)
}

/// As [`sample_window`] for an arbitrary finite site set.
pub fn sample_sites(field: &UniformField, sites: &[Site], cap: u32) -> Result<Configuration> {
    let (_, c) = jam_armour(field, sites, cap)?;
    Ok(c.restrict(sites)?.with_seed(Some(field.seed())))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::Seed;
    use crate::parking::jam_box;

    #[test]
    fn local_minimum_is_its_own_armour() {
        for seed in 0..200 {
            let f = UniformField::new(Seed(seed), 2).unwrap();
            let i = Site::new(&[0, 0]).unwrap();
            let wi = f.word_at(&i);
            if neighbors(&i).all(|k| f.word_at(&k) > wi) {
                let a = compute_armour(&f, &[i], DEFAULT_CAP).unwrap();
                assert_eq!(a.members(), &[i]);
                assert_eq!(sample_x(&f, &i, DEFAULT_CAP).unwrap(), 1);
            }
        }
    }

    #[test]
    fn armours_are_descent_closed() {
        for d in 1..=3 {
            for seed in 0..300 {
                let f = UniformField::new(Seed(seed), d).unwrap();
                let o = Site::origin(d).unwrap();
                let a = compute_armour(&f, &[o], DEFAULT_CAP).unwrap();
                assert!(a.is_descent_closed(&f), "d={d} seed={seed}");
                assert_eq!(a.members()[0], o);
            }
        }
    }

    #[test]
    fn members_are_reached_by_decreasing_paths() {
        let f = UniformField::new(Seed(12), 2).unwrap();
        let o = Site::origin(2).unwrap();
        let a = compute_armour(&f, &[o], DEFAULT_CAP).unwrap();
        // Every non-seed member has a member neighbour with a larger mark.
        for j in &a.members()[1..] {
            assert!(neighbors(j).any(|k| a.contains(&k) && f.rank_cmp(&k, j).is_gt()));
        }
    }

    #[test]
    fn tiny_cap_overflows_with_partial_set() {
        let mut hit = false;
        for seed in 0..500 {
            let f = UniformField::new(Seed(seed), 1).unwrap();
            match compute_armour(&f, &[Site::at(0)], 1) {
                Err(Error::ArmourOverflow { cap, partial }) => {
                    assert_eq!(cap, 1);
                    assert!(partial.contains(&Site::at(0)));
                    hit = true;
                }
                Ok(a) => assert!(a.radius_around(&Site::at(0)) <= 1),
                Err(e) => panic!("{e}"),
            }
        }
        assert!(hit);
    }

    #[test]
    fn sample_x_matches_box_jam_when_contained() {
        for d in 1..=2 {
            for seed in 0..300 {
                let f = UniformField::new(Seed(seed), d).unwrap();
                let o = Site::origin(d).unwrap();
                let b = BoxRegion::new(o, 6);
                let a = compute_armour(&f, &[o], DEFAULT_CAP).unwrap();
                if a.within(&b) {
                    let x = sample_x(&f, &o, DEFAULT_CAP).unwrap();
                    assert_eq!(Some(x), jam_box(&f, &b).unwrap().get(&o));
                }
            }
        }
    }

    #[test]
    fn window_of_one_site_agrees_with_sample_x() {
        for seed in 0..200 {
            let f = UniformField::new(Seed(seed), 2).unwrap();
            let i = Site::new(&[3, -1]).unwrap();
            let w = sample_window(&f, &BoxRegion::new(i, 0), DEFAULT_CAP).unwrap();
            assert_eq!(w.get(&i), Some(sample_x(&f, &i, DEFAULT_CAP).unwrap()));
        }
    }

    #[test]
    fn window_is_a_maximal_independent_set_with_its_rim() {
        for seed in 0..50 {
            let f = UniformField::new(Seed(seed), 2).unwrap();
            let w = sample_window(&f, &BoxRegion::centered(2, 5).unwrap(), DEFAULT_CAP).unwrap();
            assert!(w.is_independent());
            assert!(w.is_maximal());
        }
    }

    #[test]
    fn doc_marks_align_with_members() {
        let f = UniformField::new(Seed(5), 1).unwrap();
        let a = compute_armour(&f, &[Site::at(0)], DEFAULT_CAP).unwrap();
        let doc = a.to_doc(&f);
        assert_eq!(doc.marks.len(), doc.members.len());
        assert!(doc.marks.iter().all(|&u| u > 0.0 && u < 1.0));
    }
}
