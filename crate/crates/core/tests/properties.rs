use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use salami_core::families::{FamilySpec, FAMILY_NAMES};
use salami_core::properties::{check_properties, random_connected_set, random_draw, random_partition, PROPERTY_NAMES};
use salami_core::{Metric, SalamiPartition};

#[test]
fn extension_properties_on_every_family() {
    for (i, name) in FAMILY_NAMES.iter().enumerate() {
        let family = FamilySpec::default_for(name).unwrap().generate().unwrap();
        let g = family.graph;
        let d = Metric::for_graph(&g).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(i as u64);
        for trial in 0..100 {
            let p = random_partition(&g, &d, &mut rng, 3).unwrap();
            let draw = random_draw(&g, &d, &p, &mut rng).unwrap();
            let report = check_properties(&g, &d, &p, &draw).unwrap();
            if let Some((item, at)) = &report.first_failure {
                panic!("{name} trial {trial}: {} fails at {at}", PROPERTY_NAMES[*item]);
            }
        }
    }
}

#[test]
fn competitors_agree_with_the_draw_on_k() {
    let g = FamilySpec::GluedChains { k: 3, radius: 12 }.generate().unwrap().graph;
    let d = Metric::combinatorial(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..20 {
        let p = random_partition(&g, &d, &mut rng, 3).unwrap();
        let draw = random_draw(&g, &d, &p, &mut rng).unwrap();
        for h in &draw.competitors {
            for (i, &v) in p.k().iter().enumerate() {
                assert_eq!(h.get(v).unwrap(), &draw.f[i]);
            }
            for (u, a) in g.edges() {
                let diff = h.get(a.to).unwrap() - h.get(u).unwrap();
                assert!(diff <= *d.distance(u, a.to).unwrap() && -diff <= *d.distance(u, a.to).unwrap());
            }
        }
        assert!(draw.f.iter().zip(&draw.upper).all(|(f, u)| f <= u));
    }
}

#[test]
fn salami_windows_have_two_ends() {
    for (i, name) in FAMILY_NAMES.iter().filter(|n| **n != "glued_chains").enumerate() {
        let family = FamilySpec::default_for(name).unwrap().generate().unwrap();
        let g = family.graph;
        let root = g.index_of(&family.fixtures.default_k[0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(100 + i as u64);
        for _ in 0..50 {
            let k = random_connected_set(&g, root, &mut rng, 6, 2);
            let ends = g.count_ends(&k).unwrap();
            // steps of length two cross K on the two-jump line unless K holds
            // two consecutive integers
            let separates = *name != "two_jump_line" || {
                let ns: Vec<i64> = k.iter().map(|&v| g.id(v).parse().unwrap()).collect();
                ns.iter().any(|n| ns.contains(&(n + 1)))
            };
            let expected = if separates { 2 } else { 1 };
            assert_eq!(ends.infinite, expected, "{name} K={k:?}");
            assert_eq!(ends.infinite_measure_ends(), expected, "{name} K={k:?}");

            let mut wider = k.clone();
            for &v in &k {
                wider.extend(g.neighbors(v).iter().map(|a| a.to).filter(|&w| !g.is_boundary(w)));
            }
            wider.sort_unstable();
            wider.dedup();
            let stable = g.count_ends(&wider).unwrap();
            assert_eq!(stable.infinite, 2, "{name} enlarged K={wider:?}");
        }
    }
}

#[test]
fn three_ends_fail_the_measure_hypothesis() {
    let family = FamilySpec::default_for("glued_chains").unwrap().generate().unwrap();
    let g = family.graph;
    let root = g.index_of("0").unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..50 {
        let k = random_connected_set(&g, root, &mut rng, 6, 2);
        let ends = g.count_ends(&k).unwrap();
        assert_eq!((ends.infinite, ends.infinite_measure_ends()), (3, 1));
        // no partition of the three ends gives both sides infinite measure
        let heavy: Vec<_> = ends.components.iter().filter(|c| c.infinite_measure).collect();
        assert_eq!(heavy.len(), 1);
        let p = SalamiPartition::from_k_and_seeds(&g, &k, &heavy[0].vertices).unwrap();
        assert!(p.sides_unbounded());
    }
}
