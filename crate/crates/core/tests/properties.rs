use geotree_kernels::gram::{assemble, DEFAULT_PSD_TOL};
use geotree_kernels::kernel::KernelSpec;
use geotree_kernels::path::{KernelForm, LandmarkSpec, NodeKernelSpec};
use geotree_kernels::baseline::{AverageAttributeSpec, GenerationAverageSpec, PointcloudSpec, ShortestPathSpec, WlConfig};
use geotree_kernels::synth::random_recursive_tree;
use geotree_kernels::{GeometricTree, Node};
use proptest::prelude::*;

fn all_specs() -> Vec<KernelSpec> {
    vec![
        KernelSpec::AllPairsEmbedded(LandmarkSpec::new(KernelForm::Gaussian, 5)),
        KernelSpec::RootpathEmbedded(LandmarkSpec::new(KernelForm::Linear, 5)),
        KernelSpec::AllPairsNode(NodeKernelSpec::gaussian().attributed()),
        KernelSpec::RootpathNodeNaive(NodeKernelSpec::gaussian()),
        KernelSpec::RootpathNode(NodeKernelSpec::gaussian().attributed()),
        KernelSpec::RootpathNodeLinearFast(NodeKernelSpec::linear().attributed()),
        KernelSpec::Pointcloud(PointcloudSpec::default()),
        KernelSpec::Aaw(AverageAttributeSpec::default()),
        KernelSpec::Agaw(GenerationAverageSpec { gen_lo: 1, gen_hi: 3, ..Default::default() }),
        KernelSpec::Lbc,
        KernelSpec::Gbc,
        KernelSpec::Sp(ShortestPathSpec::default()),
        KernelSpec::Wl(WlConfig { iterations: 3 }),
    ]
}

/// Same tree with its nodes supplied in a rotated input order.
fn rotated(t: &GeometricTree, shift: usize) -> GeometricTree {
    let len = t.len();
    let new_index = |v: usize| (v + shift) % len;
    let mut nodes = vec![Node::new(None, vec![]); len];
    for v in 0..len {
        let mut node = Node::new(t.parent(v).map(new_index), t.position(v).to_vec());
        if let Some(a) = t.attributes(v) {
            node = node.with_attributes(a.to_vec());
        }
        nodes[new_index(v)] = node;
    }
    GeometricTree::new(t.id(), t.n(), t.d(), nodes).unwrap()
}

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn kernels_are_exactly_symmetric(s1 in 0u64..1000, s2 in 0u64..1000, m1 in 1usize..12, m2 in 1usize..12) {
        let t1 = random_recursive_tree(s1, m1, 3, 1).unwrap();
        let t2 = random_recursive_tree(s2 + 5000, m2, 3, 1).unwrap();
        for spec in all_specs() {
            prop_assert_eq!(spec.evaluate(&t1, &t2).unwrap(), spec.evaluate(&t2, &t1).unwrap(), "{}", spec.name());
        }
    }

    #[test]
    fn kernels_ignore_input_node_order(seed in 0u64..1000, size in 2usize..12, shift in 1usize..11) {
        let t = random_recursive_tree(seed, size, 3, 1).unwrap();
        let other = random_recursive_tree(seed + 1, 7, 3, 1).unwrap();
        let r = rotated(&t, shift % size);
        for spec in all_specs() {
            let (k1, k2) = (spec.evaluate(&t, &other).unwrap(), spec.evaluate(&r, &other).unwrap());
            prop_assert!(close(k1, k2), "{}: {} vs {}", spec.name(), k1, k2);
        }
    }

    #[test]
    fn small_gram_matrices_are_psd(seed in 0u64..1000) {
        let trees: Vec<GeometricTree> =
            (0..6).map(|k| random_recursive_tree(seed * 10 + k, 2 + (k as usize * 3) % 9, 3, 1).unwrap()).collect();
        for spec in all_specs() {
            let gram = assemble(&trees, &spec, 2).unwrap();
            let report = gram.psd_check(DEFAULT_PSD_TOL).unwrap();
            prop_assert!(report.is_psd, "{}: {:?}", spec.name(), report);
        }
    }
}

#[test]
fn gram_entries_match_pairwise_evaluation() {
    let trees: Vec<GeometricTree> = (0..5).map(|k| random_recursive_tree(k, 3 + k as usize, 2, 2).unwrap()).collect();
    for spec in all_specs() {
        let gram = assemble(&trees, &spec, 3).unwrap();
        for i in 0..trees.len() {
            for j in 0..trees.len() {
                let direct = spec.evaluate(&trees[i], &trees[j]).unwrap();
                assert!(close(gram.values[(i, j)], direct), "{} ({i},{j})", spec.name());
            }
        }
    }
}

#[test]
fn gram_is_independent_of_worker_count() {
    let trees: Vec<GeometricTree> = (0..12).map(|k| random_recursive_tree(k, 2 + k as usize, 3, 1).unwrap()).collect();
    for spec in all_specs() {
        let one = assemble(&trees, &spec, 1).unwrap();
        let many = assemble(&trees, &spec, 8).unwrap();
        assert_eq!(one, many, "{}", spec.name());
    }
}
