mod common;

use proptest::prelude::*;
use rand::Rng;

use common::{
    bin_masses, dense, dense_tv, exhaustive_max_binned_tv, feasible_k_max, random_instance, rng,
};
use stairbin::binning::{
    binned_tv, optimize_binning, partition_error_to_reference, random_binning, BinnedPair,
};
use stairbin::distance::tv_distance_sparse;
use stairbin::space::ElementIndex;

#[test]
fn oracle_agrees_on_the_fixture_by_hand() {
    // p: {0,1}@0.3 {2,3}@0.2 {4,5}@0, q̂ = {0.4, 0.2, 0.1, 0.3}
    let p = stairbin::stair::build_stair(
        stairbin::space::CategoricalSpace::new(1, 6).unwrap(),
        3,
        4.0 / 6.0,
        &[0.6, 0.4],
    )
    .unwrap();
    let q = stairbin::space::SparsePmf::new(
        p.space(),
        [(0, 0.4), (1, 0.2), (2, 0.1), (3, 0.3)]
            .into_iter()
            .map(|(x, v)| (ElementIndex(x), v))
            .collect(),
    )
    .unwrap();
    let want = [(3, 0.0), (4, 0.1), (5, 0.2), (6, 0.2)];
    for (k, tv) in want {
        assert!((exhaustive_max_binned_tv(&p, &q, k).unwrap() - tv).abs() < 1e-12, "k = {k}");
    }
    assert_eq!(exhaustive_max_binned_tv(&p, &q, 7), None);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn optimizer_matches_exhaustive_search(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 3);
        let oracle = exhaustive_max_binned_tv(&inst.p, &inst.q, inst.k);
        match optimize_binning(&inst.p, &inst.q, inst.k) {
            Ok(b) => {
                let got = BinnedPair::new(&b, &inst.p, &inst.q).tv();
                let want = oracle.expect("oracle finds a partition whenever the optimizer does");
                prop_assert!((got - want).abs() <= 1e-12, "got {got}, want {want}");
                prop_assert_eq!(b.k(), inst.k);
            }
            Err(_) => {
                // too few splittable regions for two-way cuts; finer cuts
                // inside one region must not beat the best feasible binning
                let k_max = feasible_k_max(&inst.p);
                prop_assert!(inst.k > k_max);
                let b = optimize_binning(&inst.p, &inst.q, k_max).unwrap();
                let best = BinnedPair::new(&b, &inst.p, &inst.q).tv();
                if let Some(o) = oracle {
                    prop_assert!((o - best).abs() <= 1e-12, "{o} vs {best}");
                }
            }
        }
    }

    #[test]
    fn binning_never_increases_tv(seed in any::<u64>()) {
        let mut r = rng(seed);
        let inst = random_instance(&mut r, 3);
        let full = tv_distance_sparse(&inst.p, &inst.q).unwrap();

        // arbitrary partitions, regions ignored
        let pd = inst.p.piecewise().to_dense();
        let qd = dense(&inst.q);
        prop_assert!((dense_tv(&pd, &qd) - full).abs() < 1e-12);
        let k = r.random_range(1..=pd.len());
        let labels: Vec<usize> = (0..pd.len()).map(|_| r.random_range(0..k)).collect();
        prop_assert!(binned_tv(&bin_masses(&pd, &labels, k), &bin_masses(&qd, &labels, k)) <= full + 1e-12);

        if let Ok(b) = optimize_binning(&inst.p, &inst.q, inst.k) {
            prop_assert!(BinnedPair::new(&b, &inst.p, &inst.q).tv() <= full + 1e-12);
            let rb = random_binning(&inst.p, &inst.q, inst.k, seed).unwrap();
            prop_assert!(BinnedPair::new(&rb, &inst.p, &inst.q).tv() <= full + 1e-12);
        }
    }

    #[test]
    fn produced_binnings_have_zero_reference_error(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 3);
        if let Ok(b) = optimize_binning(&inst.p, &inst.q, inst.k) {
            b.validate(&inst.p).unwrap();
            prop_assert!(b.error_to_reference(&inst.p).abs() <= 1e-12);
            let explicit = partition_error_to_reference(&b.explicit_bins(), &inst.p).unwrap();
            prop_assert!(explicit.abs() <= 1e-12);

            let rb = random_binning(&inst.p, &inst.q, inst.k, seed ^ 1).unwrap();
            rb.validate(&inst.p).unwrap();
            prop_assert!(rb.error_to_reference(&inst.p).abs() <= 1e-12);
            prop_assert!(BinnedPair::new(&rb, &inst.p, &inst.q).tv() <= BinnedPair::new(&b, &inst.p, &inst.q).tv() + 1e-12);
        }
    }

    #[test]
    fn optimal_tv_grows_with_k(seed in any::<u64>()) {
        let inst = random_instance(&mut rng(seed), 3);
        let mut last = 0.0;
        for k in inst.p.s()..=2 * inst.p.s() {
            let Ok(b) = optimize_binning(&inst.p, &inst.q, k) else { break };
            let tv = BinnedPair::new(&b, &inst.p, &inst.q).tv();
            prop_assert!(tv + 1e-12 >= last);
            last = tv;
        }
    }
}

#[test]
fn cross_region_partition_has_positive_error() {
    let mut r = rng(11);
    for _ in 0..50 {
        let p = common::random_stair(&mut r, 3);
        let size = p.space().size();
        // swap the first element of region 1 with the last element of Ω
        let a = p.region(0).start;
        let z = size - 1;
        let mut bins: Vec<Vec<ElementIndex>> = p
            .regions()
            .map(|reg| (reg.start..reg.end).map(ElementIndex).collect())
            .collect();
        let last = bins.len() - 1;
        bins[0].retain(|x| x.get() != a);
        bins[last].retain(|x| x.get() != z);
        bins[0].push(ElementIndex(z));
        bins[last].push(ElementIndex(a));
        assert!(partition_error_to_reference(&bins, &p).unwrap() > 0.0);
    }
}
