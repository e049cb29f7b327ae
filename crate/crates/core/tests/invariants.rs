//! Property tests: dimension budgets, composition laws, and determinism
//! over randomly drawn shapes, resolutions, and multiplicities.

mod support;

use nccw_core::check::{check_star_hom, CheckConfig};
use nccw_core::discretize::{
    discretize_morphism, linear_dim, Discretizer, Tolerances, Warnings,
};
use nccw_core::expr::{
    self, AlgebraExpr, BlockMapData, GridFraction, Limits, MappingKind, MorphismExpr,
};
use nccw_core::puppe::puppe_chain;
use nccw_core::seeds::rng_for;
use proptest::prelude::*;
use rand::RngCore;

fn finite(sizes: Vec<u32>) -> AlgebraExpr {
    expr::finite_dim(&sizes).unwrap()
}

fn block_dim(sizes: &[u32]) -> usize {
    sizes.iter().map(|&s| (s as usize) * (s as usize)).sum()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn direct_sum_dimensions_add(
        a in proptest::collection::vec(1u32..=3, 1..=3),
        b in proptest::collection::vec(1u32..=3, 1..=3),
        res in 1u32..=6,
    ) {
        let sum = AlgebraExpr::DirectSum {
            left: Box::new(finite(a.clone())),
            right: Box::new(finite(b.clone())),
        };
        prop_assert_eq!(
            linear_dim(&sum, res).unwrap(),
            block_dim(&a) + block_dim(&b)
        );
    }

    #[test]
    fn tensor_dimensions_scale_with_the_grid(
        sizes in proptest::collection::vec(1u32..=3, 1..=2),
        res in 2u32..=6,
    ) {
        let d = block_dim(&sizes);
        let n = res as usize;
        let base = finite(sizes);
        let closed = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(base.clone()) };
        let open = AlgebraExpr::OpenCubeTensor { n: 1, base: Box::new(base.clone()) };
        let half = AlgebraExpr::HalfOpenTensor { base: Box::new(base.clone()) };
        let ends = AlgebraExpr::SphereTensor { n: 0, base: Box::new(base) };
        prop_assert_eq!(linear_dim(&closed, res).unwrap(), (n + 1) * d);
        prop_assert_eq!(linear_dim(&open, res).unwrap(), (n - 1) * d);
        prop_assert_eq!(linear_dim(&half, res).unwrap(), n * d);
        prop_assert_eq!(linear_dim(&ends, res).unwrap(), 2 * d);
    }

    #[test]
    fn cylinder_and_cone_dimension_budgets(
        k in 1u32..=3,
        m in 1u32..=3,
        res in 1u32..=5,
    ) {
        let mult = m.min(k);
        let phi = MorphismExpr::BlockMap {
            domain: Box::new(finite(vec![1])),
            codomain: Box::new(finite(vec![k])),
            data: BlockMapData { multiplicities: vec![vec![mult]], unital: mult == k },
        };
        let dim_a = 1;
        let dim_b = (k as usize) * (k as usize);
        let n = res as usize;
        let cyl = expr::mapping_construction(MappingKind::Cylinder, phi.clone()).unwrap();
        let cone = expr::mapping_construction(MappingKind::Cone, phi).unwrap();
        prop_assert_eq!(linear_dim(&cyl, res).unwrap(), dim_a + n * dim_b);
        prop_assert_eq!(linear_dim(&cone, res).unwrap(), dim_a + (n - 1) * dim_b);
    }

    #[test]
    fn chain_prefixes_are_stable_for_any_lengths(
        short in 2usize..=6,
        extra in 1usize..=3,
    ) {
        let phi = MorphismExpr::Identity { on: Box::new(finite(vec![2])) };
        let limits = Limits::default();
        let a = puppe_chain(&phi, short, &limits).unwrap();
        let b = puppe_chain(&phi, short + extra, &limits).unwrap();
        prop_assert_eq!(&a.terms[..], &b.terms[..short]);
        prop_assert_eq!(&a.maps[..], &b.maps[..short - 1]);
    }

    #[test]
    fn rotations_compose_additively_on_the_grid(
        pow in 1u32..=3,
        j1 in 0u64..=8,
        j2 in 0u64..=8,
    ) {
        let n = 1u32 << pow; // 2, 4, 8
        let j1 = j1 % n as u64;
        let j2 = j2 % n as u64;
        let tols = Tolerances::default();
        let rot = |j: u64| nccw_core::corpus::circle_rotation(j, n as u64).unwrap();
        let a = discretize_morphism(&rot(j1), n, &tols).unwrap().0;
        let b = discretize_morphism(&rot(j2), n, &tols).unwrap().0;
        let c = discretize_morphism(&rot((j1 + j2) % n as u64), n, &tols).unwrap().0;
        // Rotations agree only on the glued subspace, so compare there.
        let basis = b.dom.basis_matrix();
        let defect = nccw_core::linalg::max_abs(&((&a.mat * &b.mat - &c.mat) * basis));
        prop_assert!(defect < 1e-9, "defect {}", defect);
    }

    #[test]
    fn block_maps_discretize_to_star_homs(
        src in 1u32..=3,
        dst in 1u32..=4,
        m in 0u32..=4,
    ) {
        let mult = m.min(dst / src.max(1) * src) / src * src; // multiple of src, at most dst
        let copies = (mult / src).min(dst / src);
        let phi = MorphismExpr::BlockMap {
            domain: Box::new(finite(vec![src])),
            codomain: Box::new(finite(vec![dst])),
            data: BlockMapData {
                multiplicities: vec![vec![copies]],
                unital: copies * src == dst,
            },
        };
        let tols = Tolerances::default();
        let f = discretize_morphism(&phi, 1, &tols).unwrap().0;
        let cfg = CheckConfig::default();
        let report = check_star_hom("prop", &f, &cfg);
        prop_assert!(report.passed());
    }

    #[test]
    fn grid_fractions_land_on_divisible_grids(
        num in 0u64..=12,
        den in 1u64..=12,
        n in 1u32..=12,
    ) {
        prop_assume!(num <= den);
        let f = GridFraction::new(num, den).unwrap();
        match f.on_grid(n) {
            Some(k) => prop_assert_eq!(k as u64 * f.den(), f.num() * n as u64),
            None => prop_assert!((f.num() * n as u64) % f.den() != 0),
        }
    }

    #[test]
    fn restrictions_compose_through_the_middle_grid(
        coarse in 1u32..=3,
        k1 in 2u32..=3,
        k2 in 2u32..=3,
    ) {
        let mid = coarse * k1;
        let fine = mid * k2;
        let expr = AlgebraExpr::IntervalTensor { n: 1, base: Box::new(finite(vec![2])) };
        let tols = Tolerances::default();
        let mut w = Warnings::default();
        let direct =
            Discretizer { res: fine, tols, warnings: &mut w }.restriction(&expr, coarse).unwrap();
        let upper =
            Discretizer { res: fine, tols, warnings: &mut w }.restriction(&expr, mid).unwrap();
        let lower =
            Discretizer { res: mid, tols, warnings: &mut w }.restriction(&expr, coarse).unwrap();
        let defect = nccw_core::linalg::max_abs(&(&lower.mat * &upper.mat - &direct.mat));
        prop_assert!(defect < 1e-12);
    }

    #[test]
    fn seeded_streams_are_reproducible(master in any::<u64>()) {
        let mut a = rng_for(master, "check.alpha");
        let mut b = rng_for(master, "check.alpha");
        let mut c = rng_for(master, "check.beta");
        let xs: Vec<u64> = (0..4).map(|_| a.next_u64()).collect();
        let ys: Vec<u64> = (0..4).map(|_| b.next_u64()).collect();
        prop_assert_eq!(&xs, &ys);
        let zs: Vec<u64> = (0..4).map(|_| c.next_u64()).collect();
        prop_assert_ne!(&xs, &zs);
    }
}
