use geotree_kernels::path::{
    all_pairs_kernel, rootpath_kernel_decomposed, rootpath_kernel_linear_fast, rootpath_kernel_naive, KernelForm,
    NodeKernelSpec, PathKernelSpec,
};
use geotree_kernels::stats::mean_distance_statistic;
use geotree_kernels::synth::random_recursive_tree;
use geotree_kernels::GeometricTree;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

fn node_variants(d: usize) -> Vec<NodeKernelSpec> {
    let mut specs = vec![NodeKernelSpec::linear(), NodeKernelSpec::gaussian()];
    if d > 0 {
        specs.push(NodeKernelSpec::linear().attributed());
        specs.push(NodeKernelSpec::gaussian().attributed());
    }
    specs
}

fn dot(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| a * b).sum()
}

fn sq(u: &[f64], v: &[f64]) -> f64 {
    u.iter().zip(v).map(|(a, b)| (a - b) * (a - b)).sum()
}

fn oracle_node_kernel(spec: &NodeKernelSpec, t1: &GeometricTree, u: usize, t2: &GeometricTree, v: usize) -> f64 {
    let (x, y) = (t1.position(u), t2.position(v));
    let n = t1.n() as f64;
    match (spec.form, spec.use_attributes) {
        (KernelForm::Linear, false) => dot(x, y),
        (KernelForm::Linear, true) => dot(x, y) * dot(t1.attributes(u).unwrap(), t2.attributes(v).unwrap()),
        (KernelForm::Gaussian, false) => (-sq(x, y) / n).exp(),
        (KernelForm::Gaussian, true) => {
            let d = t1.d() as f64;
            (-sq(x, y) / n).exp() * (-sq(t1.attributes(u).unwrap(), t2.attributes(v).unwrap()) / d).exp()
        }
    }
}

fn ancestors(t: &GeometricTree, v: usize) -> Vec<usize> {
    let mut out = vec![v];
    let mut cur = v;
    while let Some(p) = t.parent(cur) {
        out.push(p);
        cur = p;
    }
    out
}

/// Node sequence from `u` to `v` through their lowest common ancestor.
fn brute_path(t: &GeometricTree, u: usize, v: usize) -> Vec<usize> {
    let up_u = ancestors(t, u);
    let up_v = ancestors(t, v);
    let lca = *up_u.iter().find(|w| up_v.contains(w)).unwrap();
    let mut path: Vec<usize> = up_u.iter().copied().take_while(|&w| w != lca).collect();
    path.push(lca);
    let tail: Vec<usize> = up_v.iter().copied().take_while(|&w| w != lca).collect();
    path.extend(tail.into_iter().rev());
    path
}

fn aligned(spec: &NodeKernelSpec, t1: &GeometricTree, p: &[usize], t2: &GeometricTree, q: &[usize]) -> f64 {
    if p.len() != q.len() {
        return 0.0;
    }
    p.iter().zip(q).map(|(&u, &v)| oracle_node_kernel(spec, t1, u, t2, v)).sum()
}

fn brute_all_pairs(spec: &NodeKernelSpec, t1: &GeometricTree, t2: &GeometricTree) -> f64 {
    let paths = |t: &GeometricTree| -> Vec<Vec<usize>> {
        (0..t.len()).flat_map(|u| (0..t.len()).map(move |v| (u, v))).map(|(u, v)| brute_path(t, u, v)).collect()
    };
    let (p1, p2) = (paths(t1), paths(t2));
    p1.iter().map(|p| p2.iter().map(|q| aligned(spec, t1, p, t2, q)).sum::<f64>()).sum()
}

fn brute_rootpath(spec: &NodeKernelSpec, t1: &GeometricTree, t2: &GeometricTree) -> f64 {
    let mut total = 0.0;
    for u in 0..t1.len() {
        for v in 0..t2.len() {
            total += aligned(spec, t1, &ancestors(t1, u), t2, &ancestors(t2, v));
        }
    }
    total
}

#[test]
fn all_pairs_matches_exhaustive_enumeration() {
    for k in 0..100u64 {
        let d = (k % 3) as usize;
        let t1 = random_recursive_tree(2 * k, 1 + (k as usize % 8), 3, d).unwrap();
        let t2 = random_recursive_tree(2 * k + 1, 1 + (k as usize * 5 % 8), 3, d).unwrap();
        for spec in node_variants(d) {
            let fast = all_pairs_kernel(&t1, &t2, &PathKernelSpec::NodePath(spec.clone())).unwrap();
            let brute = brute_all_pairs(&spec, &t1, &t2);
            assert!(close(fast, brute, 1e-12), "instance {k}, {spec:?}: {fast} vs {brute}");
        }
    }
}

#[test]
fn rootpath_variants_agree_with_direct_sum() {
    for k in 0..60u64 {
        let d = (k % 3) as usize;
        let t1 = random_recursive_tree(1000 + k, 1 + (k as usize * 7 % 30), 3, d).unwrap();
        let t2 = random_recursive_tree(2000 + k, 1 + (k as usize * 11 % 30), 3, d).unwrap();
        for spec in node_variants(d) {
            let brute = brute_rootpath(&spec, &t1, &t2);
            let naive = rootpath_kernel_naive(&t1, &t2, &PathKernelSpec::NodePath(spec.clone())).unwrap();
            let decomposed = rootpath_kernel_decomposed(&t1, &t2, &spec).unwrap();
            assert!(close(naive, brute, 1e-9), "naive {naive} vs {brute}");
            assert!(close(decomposed, brute, 1e-9), "decomposed {decomposed} vs {brute}");
            if spec.form == KernelForm::Linear {
                let fast = rootpath_kernel_linear_fast(&t1, &t2, &spec).unwrap();
                assert!(close(fast, brute, 1e-9), "linear fast {fast} vs {brute}");
            }
        }
    }
}

/// Distance between feature-space means, with features taken as rows of
/// `Q·sqrt(Λ)` from the eigendecomposition of the Gram matrix.
pub fn feature_space_mmd(g: &DMatrix<f64>, a: &[usize], b: &[usize]) -> f64 {
    let eig = g.clone().symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    let features = &eig.eigenvectors * DMatrix::from_diagonal(&roots);
    let mean = |idx: &[usize]| {
        let mut m = vec![0.0; g.nrows()];
        for &i in idx {
            for (k, mk) in m.iter_mut().enumerate() {
                *mk += features[(i, k)] / idx.len() as f64;
            }
        }
        m
    };
    sq(&mean(a), &mean(b)).sqrt()
}

#[test]
fn mean_distance_matches_feature_space() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for size in 2..=20 {
        for _ in 0..5 {
            let rank = rng.random_range(1..=size);
            let b = DMatrix::from_fn(size, rank, |_, _| rng.random::<f64>() * 2.0 - 1.0);
            let g = &b * b.transpose();
            let split = rng.random_range(1..size);
            let a_idx: Vec<usize> = (0..split).collect();
            let b_idx: Vec<usize> = (split..size).collect();
            let ours = mean_distance_statistic(&g, &a_idx, &b_idx).unwrap();
            let oracle = feature_space_mmd(&g, &a_idx, &b_idx);
            let scale = g.diagonal().max().sqrt();
            assert!((ours - oracle).abs() <= 1e-9 * scale.max(1.0), "{size}: {ours} vs {oracle}");
        }
    }
}
