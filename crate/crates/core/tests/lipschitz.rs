use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use salami_core::families::FamilySpec;
use salami_core::lipschitz::{
    extend, gradients, in_f, in_f_by_gradients, is_lipschitz, is_lipschitz_exact, is_lipschitz_on_edges,
    monotonicity_check,
};
use salami_core::properties::{random_connected_set, random_partition};
use salami_core::rational::{int, ratio};
use salami_core::{Error, Field, Metric, Rational, SalamiPartition, ScalarField, WeightedGraph};

fn line(radius: i64, two_jump: bool) -> WeightedGraph {
    let spec = if two_jump {
        FamilySpec::TwoJumpLine { radius }
    } else {
        FamilySpec::UniformChain { radius }
    };
    spec.generate().unwrap().graph
}

fn on_line(g: &WeightedGraph, f: impl Fn(f64) -> f64) -> ScalarField {
    Field::from_fn(g.len(), |v| Some(f(g.id(v).parse::<f64>().unwrap())))
}

#[test]
fn lipschitz_predicates() {
    let g = line(12, false);
    let d = Metric::combinatorial(&g);
    let all: Vec<usize> = (0..g.len()).collect();
    let v0 = g.index_of("5").unwrap();
    let dist = Field::from_fn(g.len(), |v| Some(d.distance_f(v0, v)));
    assert!(is_lipschitz(&g, &d, &dist, &all).unwrap().holds());

    let steep = on_line(&g, |n| 2.0 * n);
    let verdict = is_lipschitz(&g, &d, &steep, &all).unwrap();
    let (_, _, diff, dist) = verdict.violation.unwrap();
    assert_eq!(diff, 2.0 * dist);
    let pair = g.indices_of(&["0", "1"]).unwrap();
    let (u, v, diff, dist) = is_lipschitz(&g, &d, &steep, &pair).unwrap().violation.unwrap();
    assert_eq!((g.id(u), g.id(v), diff, dist), ("0", "1", 2.0, 1.0));
    assert!(is_lipschitz_on_edges(&g, &d, &steep).is_some());

    let h = line(12, true);
    let dh = Metric::combinatorial(&h);
    let half = on_line(&h, |n| n / 2.0);
    let all: Vec<usize> = (0..h.len()).collect();
    let verdict = is_lipschitz(&h, &dh, &half, &all).unwrap();
    assert!(verdict.holds() && verdict.exhaustive);
    assert_eq!(verdict.pairs_checked, all.len() * (all.len() - 1) / 2);
    let exact: Field<Rational> = Field::from_fn(h.len(), |v| Some(ratio(h.id(v).parse().unwrap(), 2)));
    assert!(is_lipschitz_exact(&dh, &exact, &all));
    let ident: Field<Rational> = Field::from_fn(h.len(), |v| Some(int(h.id(v).parse().unwrap())));
    assert!(!is_lipschitz_exact(&dh, &ident, &all));
}

#[test]
fn gradient_examples() {
    let g = line(12, false);
    let d = Metric::combinatorial(&g);
    let x = g.index_of("3").unwrap();
    let constant: ScalarField = Field::total(vec![4.0; g.len()]);
    let grad = gradients(&g, &d, &constant, x).unwrap();
    assert_eq!((grad.plus, grad.minus, grad.abs), (0.0, 0.0, 0.0));
    let ident = on_line(&g, |n| n);
    let grad = gradients(&g, &d, &ident, x).unwrap();
    assert_eq!((grad.plus, grad.minus, grad.abs), (1.0, 1.0, 1.0));
    // a strict local maximum reports the true negative maximum
    let peak = on_line(&g, |n| -n.abs());
    let grad = gradients(&g, &d, &peak, g.index_of("0").unwrap()).unwrap();
    assert_eq!((grad.plus, grad.minus), (-1.0, 1.0));

    let h = line(12, true);
    let dh = Metric::combinatorial(&h);
    let half: Field<Rational> = Field::from_fn(h.len(), |v| Some(ratio(h.id(v).parse().unwrap(), 2)));
    let grad = gradients(&h, &dh, &half, h.index_of("0").unwrap()).unwrap();
    assert_eq!((grad.plus, grad.minus, grad.abs), (int(1), int(1), int(1)));

    let mut partial = ident.clone();
    partial.clear(g.index_of("4").unwrap());
    assert!(matches!(gradients(&g, &d, &partial, x), Err(Error::MissingValue(id)) if id == "4"));
}

#[test]
fn extension_of_constant_data() {
    let g = line(12, false);
    let d = Metric::combinatorial(&g);
    let k = g.indices_of(&["-1", "0", "1"]).unwrap();
    let p = SalamiPartition::from_k(&g, &k).unwrap();
    // ids sort as strings, so the negative side holds the least id
    assert!(p.x().contains(&g.index_of("-5").unwrap()));
    let zero: Field<Rational> = Field::from_fn(g.len(), |v| k.contains(&v).then(Rational::zero));
    let sf = extend(&g, &d, &p, &zero).unwrap();
    for v in 0..g.len() {
        let n: i64 = g.id(v).parse().unwrap();
        let expected = int(n.signum() * (n.abs() - 1).max(0));
        assert_eq!(sf.field.get(v).unwrap(), &expected, "vertex {n}");
        let at: i64 = g.id(sf.attained_at[v]).parse().unwrap();
        assert_eq!(at, n.clamp(-1, 1));
    }

    let ident: Field<Rational> = Field::from_fn(g.len(), |v| Some(int(g.id(v).parse().unwrap())));
    let single = SalamiPartition::from_k(&g, &[g.index_of("0").unwrap()]).unwrap();
    assert_eq!(extend(&g, &d, &single, &ident).unwrap().field, ident);
}

#[test]
fn extension_errors() {
    let g = line(12, false);
    let d = Metric::combinatorial(&g);
    let k = g.indices_of(&["0", "1"]).unwrap();
    let p = SalamiPartition::from_k(&g, &k).unwrap();
    let steep: Field<Rational> = Field::from_fn(g.len(), |v| Some(int(3 * g.id(v).parse::<i64>().unwrap())));
    assert!(matches!(extend(&g, &d, &p, &steep), Err(Error::NotLipschitzOnK(..))));

    // d(-12, 11) = 23 could be shortcut outside the window
    let wide: Vec<usize> = (0..g.len()).filter(|&v| !g.is_boundary(v)).collect();
    let p = SalamiPartition::from_k(&g, &wide).unwrap();
    let zero: Field<Rational> = Field::total(vec![Rational::zero(); g.len()]);
    assert!(matches!(extend(&g, &d, &p, &zero), Err(Error::WindowBufferTooSmall(_))));
}

#[test]
fn membership_examples() {
    let g = line(12, false);
    let d = Metric::combinatorial(&g);
    let p = SalamiPartition::from_k(&g, &[g.index_of("0").unwrap()]).unwrap();
    let ident = on_line(&g, |n| n);
    let report = in_f(&g, &d, &p, &ident).unwrap();
    assert!(report.member && report.window_approximate);
    assert!(in_f_by_gradients(&g, &d, &p, &ident).unwrap());
    let shifted = on_line(&g, |n| n + 7.5);
    assert!(in_f(&g, &d, &p, &shifted).unwrap().member);

    let zero: ScalarField = Field::total(vec![0.0; g.len()]);
    assert!(!in_f(&g, &d, &p, &zero).unwrap().member);
    assert!(!in_f_by_gradients(&g, &d, &p, &zero).unwrap());
    // the mirrored orientation is Lipschitz but not in F(P)
    let mirror = on_line(&g, |n| -n);
    assert!(!in_f(&g, &d, &p, &mirror).unwrap().member);
    assert!(!in_f_by_gradients(&g, &d, &p, &mirror).unwrap());
}

#[test]
fn monotonicity_examples() {
    let g = FamilySpec::GluedChains { k: 3, radius: 12 }.generate().unwrap().graph;
    let d = Metric::combinatorial(&g);
    let k = g.indices_of(&["0", "1:1", "2:1", "3:1"]).unwrap();
    let p = SalamiPartition::from_k_and_seeds(&g, &k, &[g.index_of("1:5").unwrap()]).unwrap();
    let f: ScalarField = Field::from_fn(g.len(), |v| Some(if k.contains(&v) { 0.5 } else { 0.0 }));
    let lifted = f.map(|x| x + 1.0);
    assert!(monotonicity_check(&g, &d, &p, &f, &lifted).unwrap());
    let sf = extend(&g, &d, &p, &f).unwrap();
    let sg = extend(&g, &d, &p, &lifted).unwrap();
    for v in 0..g.len() {
        assert_eq!(sg.field.get(v).unwrap() - sf.field.get(v).unwrap(), 1.0);
    }
    assert!(monotonicity_check(&g, &d, &p, &f, &f).unwrap());
    assert!(matches!(
        monotonicity_check(&g, &d, &p, &lifted, &f),
        Err(Error::HypothesisFails(_))
    ));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..100 {
        let p = random_partition(&g, &d, &mut rng, 3).unwrap();
        let mut low = vec![0.0; g.len()];
        let mut high = vec![0.0; g.len()];
        // draw a Lipschitz pair as distance functions to random points
        let (a, b) = (rng.random_range(0..g.len()), rng.random_range(0..g.len()));
        let lift = rng.random_range(0..4) as f64 * 0.25;
        for v in 0..g.len() {
            low[v] = d.distance_f(a, v).min(d.distance_f(b, v) + 1.0);
            high[v] = low[v] + lift;
        }
        let (low, high) = (Field::total(low), Field::total(high));
        assert!(monotonicity_check(&g, &d, &p, &low, &high).unwrap());
    }
}

#[test]
fn idempotence_on_three_ends() {
    let g = FamilySpec::GluedChains { k: 3, radius: 12 }.generate().unwrap().graph;
    let d = Metric::combinatorial(&g);
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let p = random_partition(&g, &d, &mut rng, 4).unwrap();
        let a = rng.random_range(0..g.len());
        let slope = ratio(rng.random_range(-4..=4), 4);
        let f: Field<Rational> = Field::from_fn(g.len(), |v| Some(d.distance(a, v).unwrap() * &slope));
        let sf = extend(&g, &d, &p, &f).unwrap();
        let again = extend(&g, &d, &p, &sf.field).unwrap();
        assert_eq!(again.field, sf.field);
    }
}

#[test]
fn superpartitions_keep_membership() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in [
        FamilySpec::UniformChain { radius: 16 },
        FamilySpec::TwoJumpLine { radius: 16 },
        FamilySpec::GluedChains { k: 3, radius: 16 },
    ] {
        let family = spec.generate().unwrap();
        let g = family.graph;
        let d = Metric::combinatorial(&g);
        let root = g.index_of(&family.fixtures.default_k[0]).unwrap();
        let rim = (0..g.len()).find(|&v| g.is_boundary(v)).unwrap();
        let mut checked = 0;
        for _ in 0..400 {
            if checked == 40 {
                break;
            }
            let k = random_connected_set(&g, root, &mut rng, 4, 4);
            // a single vertex does not separate the two-jump line
            let Ok(p) = SalamiPartition::from_k_and_seeds(&g, &k, &[rim]) else {
                continue;
            };
            checked += 1;
            let extra = random_connected_set(&g, k[rng.random_range(0..k.len())], &mut rng, 4, 4);
            let mut big = k.clone();
            big.extend(extra);
            big.sort_unstable();
            big.dedup();
            let seeds: Vec<usize> = p.x().iter().copied().filter(|v| big.binary_search(v).is_err()).collect();
            let q = SalamiPartition::from_k_and_seeds(&g, &big, &seeds).unwrap();

            let (a, slope) = (rng.random_range(0..g.len()), rng.random_range(-1.0..=1.0));
            let on_k: ScalarField = Field::from_fn(g.len(), |v| k.contains(&v).then(|| slope * d.distance_f(a, v)));
            let sf = extend(&g, &d, &p, &on_k).unwrap();
            let own = in_f(&g, &d, &p, &sf.field).unwrap();
            assert!(own.member, "{} K={:?}: {own:?}", spec.name(), k);
            let report = in_f(&g, &d, &q, &sf.field).unwrap();
            assert!(report.member, "{} K={:?} K'={:?}: {report:?}", spec.name(), k, big);
        }
        assert_eq!(checked, 40, "{}", spec.name());
    }
}
