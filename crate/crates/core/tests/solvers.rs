mod common;

use common::{arb_graph, arb_tree};
use proptest::prelude::*;
use num_traits::{Signed, Zero};
use salami_core::curvature::{
    all_edges, curvature_dual, curvature_primal, curvature_tree, witness_is_feasible, Witness,
};
use salami_core::rational::int;
use salami_core::{Metric, Rational};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn dual_and_primal_agree_on_random_graphs(g in arb_graph(30)) {
        let d = Metric::combinatorial(&g);
        for (x, y) in all_edges(&g) {
            let dual = curvature_dual(&g, &d, x, y).unwrap();
            let primal = curvature_primal(&g, &d, x, y).unwrap();
            prop_assert_eq!(&dual.kappa, &primal.kappa, "edge {}-{}", g.id(x), g.id(y));
            prop_assert!(witness_is_feasible(&d, &dual));
            let Witness::Plan(plan) = &primal.witness else {
                panic!("primal solver returns a plan");
            };
            prop_assert!(plan.marginal_defect(&g).is_zero());
            // κ = −Σ ρ(x',y') (d(x',y')/d(x,y) − 1)
            let mut cost = Rational::zero();
            for (a, b, m) in &plan.mass {
                prop_assert!(m.is_positive());
                cost += m * (d.distance(*a, *b).unwrap() / &primal.distance - int(1));
            }
            prop_assert_eq!(-cost, primal.kappa.clone());
        }
    }

    #[test]
    fn distant_pairs_agree(g in arb_graph(12)) {
        let d = Metric::combinatorial(&g);
        for x in 0..g.len() {
            for y in x + 1..g.len() {
                let dual = curvature_dual(&g, &d, x, y).unwrap();
                let primal = curvature_primal(&g, &d, x, y).unwrap();
                prop_assert_eq!(dual.kappa, primal.kappa);
            }
        }
    }

    #[test]
    fn tree_formula_matches_the_solvers(g in arb_tree(20)) {
        let d = Metric::combinatorial(&g);
        for (x, y) in all_edges(&g) {
            let closed = curvature_tree(&g, x, y).unwrap();
            prop_assert_eq!(&curvature_dual(&g, &d, x, y).unwrap().kappa, &closed);
            prop_assert_eq!(&curvature_primal(&g, &d, x, y).unwrap().kappa, &closed);
        }
    }
}
