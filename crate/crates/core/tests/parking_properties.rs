use std::collections::HashMap;

use proptest::prelude::*;

use parkjam::lattice::neighbors;
use parkjam::parking::{jam, jam_box, jam_by_key, BoundaryCondition};
use parkjam::{BoxRegion, Seed, Site, UniformField};

fn boundary_strategy() -> impl Strategy<Value = Vec<(i32, u8)>> {
    prop::collection::vec((-12i32..12, 0u8..2), 0..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn free_boundary_jams_are_maximal_independent_sets(seed in any::<u64>(), d in 1usize..=2, n in 0u32..=8) {
        let f = UniformField::new(Seed(seed), d).unwrap();
        let c = jam_box(&f, &BoxRegion::centered(d, n).unwrap()).unwrap();
        prop_assert!(c.is_independent());
        prop_assert!(c.is_maximal());
    }

    #[test]
    fn frozen_boundaries_are_respected(seed in any::<u64>(), n in 1u32..=8, pairs in boundary_strategy()) {
        let f = UniformField::new(Seed(seed), 1).unwrap();
        let b = BoxRegion::centered(1, n).unwrap();
        let outside: Vec<(Site, u8)> = pairs
            .into_iter()
            .map(|(x, v)| (Site::at(x), v))
            .filter(|(s, _)| !b.contains(s))
            .collect();
        let bc = BoundaryCondition::from_pairs(outside).unwrap();
        let sites: Vec<Site> = b.sites().collect();
        let c = jam(&f, &sites, &bc).unwrap();
        prop_assert!(c.is_independent());
        prop_assert!(c.is_maximal());
    }

    #[test]
    fn only_the_order_of_marks_matters(seed in any::<u64>(), d in 1usize..=2, n in 0u32..=6, scale in 1u64..1000) {
        let f = UniformField::new(Seed(seed), d).unwrap();
        let b = BoxRegion::centered(d, n).unwrap();
        let sites: Vec<Site> = b.sites().collect();
        // Synthetic marks: the ranks of the real ones, stretched.
        let mut order = sites.clone();
        order.sort_by_key(|s| (f.word_at(s), *s));
        let rank: HashMap<Site, u64> = order.iter().enumerate().map(|(k, s)| (*s, k as u64 * scale + 7)).collect();
        let synthetic = jam_by_key(&sites, &BoundaryCondition::zero(), |s| rank[s]).unwrap();
        let real = jam_box(&f, &b).unwrap();
        prop_assert_eq!(synthetic.occupancy(), real.occupancy());
    }

    #[test]
    fn a_local_minimum_shields_the_far_side(seed in any::<u64>(), half in 4i32..=20) {
        let f = UniformField::new(Seed(seed), 1).unwrap();
        let sites: Vec<Site> = (-half..=half).map(Site::at).collect();
        let w = |x: i32| f.word_at(&Site::at(x));
        // Interior local minimum closest to the left end.
        let Some(m) = (-half + 1..half).find(|&x| w(x) < w(x - 1) && w(x) < w(x + 1)) else {
            return Ok(());
        };
        let free = jam(&f, &sites, &BoundaryCondition::zero()).unwrap();
        let blocked = jam(&f, &sites, &BoundaryCondition::from_pairs([(Site::at(-half - 1), 1)]).unwrap()).unwrap();
        prop_assert_eq!(free.get(&Site::at(m)), Some(1));
        for x in m..=half {
            prop_assert_eq!(free.get(&Site::at(x)), blocked.get(&Site::at(x)), "site {}", x);
        }
    }
}

#[test]
fn occupied_sites_never_touch() {
    for seed in 0..50 {
        let f = UniformField::new(Seed(seed), 3).unwrap();
        let c = jam_box(&f, &BoxRegion::centered(3, 3).unwrap()).unwrap();
        for (s, &x) in c.sites().iter().zip(c.occupancy()) {
            if x == 1 {
                assert!(neighbors(s).all(|k| c.get(&k) != Some(1)));
            }
        }
        assert!(c.is_maximal());
    }
}

#[test]
fn jamming_is_deterministic() {
    let f = UniformField::new(Seed(31), 2).unwrap();
    let b = BoxRegion::centered(2, 10).unwrap();
    let a = jam_box(&f, &b).unwrap();
    let c = jam_box(&f, &b).unwrap();
    assert_eq!(a.occupancy(), c.occupancy());
    assert_eq!(a.to_grid(&b).unwrap(), c.to_grid(&b).unwrap());
}
