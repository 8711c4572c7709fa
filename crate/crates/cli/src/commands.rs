use std::collections::{BTreeMap, HashMap, HashSet};
use std::fs;
use std::path::Path;

use geotree_kernels::gram::{assemble, GramMeta, DEFAULT_PSD_TOL};
use geotree_kernels::stats::{nearest_mean_classify, permutation_test, Class, TwoSampleResult};
use geotree_kernels::synth::{generate_two_class_population, parse_labels, preset, GeneratorConfig};
use geotree_kernels::tree::load_dataset;
use geotree_kernels::{Error, GramMatrix, KernelSpec};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::args::{ClassifyArgs, GenArgs, KernelArgs, TestArgs};
use crate::manifest::{manifest_path, RunManifest};
use crate::{spec, CliError};

const NAIVE_TOLERANCE: f64 = 1e-9;

#[derive(Deserialize)]
#[serde(untagged)]
enum GenConfigFile {
    Pair { class_a: GeneratorConfig, class_b: GeneratorConfig },
    Single(GeneratorConfig),
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(Error::from)?;
    bytes.push(b'\n');
    fs::write(path, bytes)?;
    Ok(())
}

pub fn gen(args: &GenArgs, threads: usize) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("gen", threads);
    let (mut cfg_a, mut cfg_b) = match &args.config {
        Some(path) => {
            manifest.hash_input(path)?;
            match serde_json::from_slice(&fs::read(path)?).map_err(Error::from)? {
                GenConfigFile::Pair { class_a, class_b } => (class_a, class_b),
                GenConfigFile::Single(cfg) => (cfg.clone(), cfg),
            }
        }
        None => preset(&args.preset, args.seed)?,
    };
    cfg_a.seed = args.seed;
    cfg_b.seed = args.seed;
    let size_a = args.size_a.unwrap_or(args.size - args.size / 2);
    let size_b = args.size_b.unwrap_or(args.size / 2);
    let dataset = generate_two_class_population(&cfg_a, &cfg_b, size_a, size_b)?;

    fs::create_dir_all(&args.out)?;
    let trees_path = args.out.join("trees.json");
    let labels_path = args.out.join("labels.csv");
    fs::write(&trees_path, dataset.trees_json())?;
    fs::write(&labels_path, dataset.labels_csv())?;
    manifest.output(&trees_path);
    manifest.output(&labels_path);
    manifest.seed = Some(args.seed);
    manifest.extra.insert("class_a".into(), json!(cfg_a));
    manifest.extra.insert("class_b".into(), json!(cfg_b));
    manifest.extra.insert("sizes".into(), json!({ "a": size_a, "b": size_b }));
    manifest.write(&args.out.join("manifest.json"))
}

fn relative_diff(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn kernel(args: &KernelArgs, threads: usize) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("kernel", threads);
    manifest.hash_input(&args.trees)?;
    let trees = load_dataset(&args.trees)?;
    let mut seen = HashSet::new();
    if let Some(t) = trees.iter().find(|t| !seen.insert(t.id())) {
        return Err(Error::IdMismatch(format!("tree id {} appears more than once", t.id())).into());
    }
    let kernel_spec: KernelSpec = match (&args.spec_file, args.kernel) {
        (Some(path), _) => {
            manifest.hash_input(path)?;
            serde_json::from_slice(&fs::read(path)?).map_err(|e| CliError::Usage(format!("kernel spec: {e}")))?
        }
        (None, Some(name)) => spec::from_flags(name, &args.params),
        (None, None) => return Err(CliError::Usage("either --kernel or --spec-file is required".into())),
    };
    manifest.kernel_spec = Some(json!(kernel_spec));

    let naive_spec = match (&kernel_spec, args.check_against_naive) {
        (_, false) => None,
        (
            KernelSpec::RootpathNode(s) | KernelSpec::RootpathNodeLinearFast(s) | KernelSpec::RootpathNodeNaive(s),
            true,
        ) => Some(KernelSpec::RootpathNodeNaive(s.clone())),
        (other, true) => {
            return Err(CliError::Usage(format!("--check-against-naive does not apply to {}", other.name())))
        }
    };

    let mut gram = assemble(&trees, &kernel_spec, threads)?;
    let mut failure = None;
    if let Some(naive_spec) = naive_spec {
        if trees.len() > 50 {
            log::warn!("naive check over {} trees may be slow", trees.len());
        }
        let naive = assemble(&trees, &naive_spec, threads)?;
        let worst = gram.values.iter().zip(naive.values.iter()).map(|(a, b)| relative_diff(*a, *b)).fold(0.0, f64::max);
        manifest.extra.insert("naive_max_relative_difference".into(), json!(worst));
        if worst > NAIVE_TOLERANCE {
            failure = Some(format!("differs from the naive kernel by {worst:e} (tolerance {NAIVE_TOLERANCE:e})"));
        }
    }
    if args.normalize {
        gram = gram.normalize()?;
    }
    if args.psd_check {
        let report = gram.psd_check(DEFAULT_PSD_TOL)?;
        eprintln!("eigenvalues in [{:e}, {:e}], psd = {}", report.min_eig, report.max_eig, report.is_psd);
        manifest.extra.insert("psd".into(), json!(report));
        if !report.is_psd && failure.is_none() {
            failure = Some(format!("matrix is not PSD (min eigenvalue {:e})", report.min_eig));
        }
    }
    gram.save(&args.out)?;
    manifest.output(&args.out);
    manifest.write(&manifest_path(&args.out))?;
    match failure {
        Some(msg) => Err(CliError::Data(Error::InvalidSample(msg))),
        None => Ok(()),
    }
}

/// Indices of class A and class B rows; every Gram id must carry a label.
fn split_by_label(gram: &GramMatrix, labels_path: &Path) -> Result<(Vec<usize>, Vec<usize>), CliError> {
    let mut labels = HashMap::new();
    for (id, label) in parse_labels(fs::File::open(labels_path)?)? {
        if labels.insert(id.clone(), label).is_some() {
            return Err(Error::IdMismatch(format!("tree {id} is labelled twice")).into());
        }
    }
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (i, id) in gram.ids.iter().enumerate() {
        match labels.get(id) {
            Some(0) => a.push(i),
            Some(_) => b.push(i),
            None => return Err(Error::IdMismatch(format!("no label for tree {id}")).into()),
        }
    }
    if labels.len() > gram.len() {
        log::warn!("{} labels refer to trees outside the Gram matrix", labels.len() - gram.len());
    }
    Ok((a, b))
}

#[derive(Serialize)]
struct TestReport {
    #[serde(flatten)]
    result: TwoSampleResult,
    gram: GramMeta,
}

pub fn test(args: &TestArgs, threads: usize) -> Result<(), CliError> {
    let mut manifest = RunManifest::start("test", threads);
    manifest.hash_input(&args.gram)?;
    manifest.hash_input(&args.labels)?;
    manifest.seed = Some(args.seed);
    let gram = GramMatrix::load(&args.gram)?;
    let (a, b) = split_by_label(&gram, &args.labels)?;
    let result = permutation_test(&gram.values, &a, &b, args.permutations, args.seed)?;
    println!("statistic = {:e}, p = {:e} ({} permutations)", result.statistic, result.p_value, args.permutations);
    manifest.kernel_spec = Some(json!(gram.source));
    write_json(&args.out, &TestReport { result, gram: gram.meta() })?;
    manifest.output(&args.out);
    manifest.write(&manifest_path(&args.out))
}

#[derive(Serialize)]
struct ClassCounts {
    train: usize,
    test: usize,
    correct: usize,
}

#[derive(Serialize)]
struct ClassifyReport {
    accuracy: f64,
    holdout: f64,
    seed: u64,
    labels_shuffled: bool,
    per_class: BTreeMap<String, ClassCounts>,
    gram: GramMeta,
}

pub fn classify(args: &ClassifyArgs, threads: usize) -> Result<(), CliError> {
    if !(args.holdout > 0.0 && args.holdout < 1.0) {
        return Err(CliError::Usage(format!("--holdout must lie in (0, 1), got {}", args.holdout)));
    }
    let mut manifest = RunManifest::start("classify", threads);
    manifest.hash_input(&args.gram)?;
    manifest.hash_input(&args.labels)?;
    manifest.seed = Some(args.seed);
    let gram = GramMatrix::load(&args.gram)?;
    let (mut a, mut b) = split_by_label(&gram, &args.labels)?;

    let mut rng = ChaCha8Rng::seed_from_u64(args.seed);
    if args.shuffle_labels {
        let mut pooled: Vec<usize> = a.iter().chain(&b).copied().collect();
        pooled.shuffle(&mut rng);
        b = pooled.split_off(a.len());
        a = pooled;
    }
    let mut split = |class: &[usize], name: &str| -> Result<(Vec<usize>, Vec<usize>), CliError> {
        if class.len() < 2 {
            return Err(Error::InvalidSample(format!(
                "class {name} has {} trees; a holdout split needs at least 2",
                class.len()
            ))
            .into());
        }
        let mut idx = class.to_vec();
        idx.shuffle(&mut rng);
        let n_test = ((args.holdout * idx.len() as f64).round() as usize).clamp(1, idx.len() - 1);
        let test = idx.split_off(idx.len() - n_test);
        Ok((idx, test))
    };
    let (train_a, test_a) = split(&a, "A")?;
    let (train_b, test_b) = split(&b, "B")?;

    let queries: Vec<usize> = test_a.iter().chain(&test_b).copied().collect();
    let predicted = nearest_mean_classify(&gram.values, &train_a, &train_b, &queries)?;
    let correct_a = predicted[..test_a.len()].iter().filter(|&&c| c == Class::A).count();
    let correct_b = predicted[test_a.len()..].iter().filter(|&&c| c == Class::B).count();
    let accuracy = (correct_a + correct_b) as f64 / queries.len() as f64;
    println!("accuracy = {accuracy:.4} ({} of {})", correct_a + correct_b, queries.len());

    let per_class = BTreeMap::from([
        ("0".to_string(), ClassCounts { train: train_a.len(), test: test_a.len(), correct: correct_a }),
        ("1".to_string(), ClassCounts { train: train_b.len(), test: test_b.len(), correct: correct_b }),
    ]);
    let report = ClassifyReport {
        accuracy,
        holdout: args.holdout,
        seed: args.seed,
        labels_shuffled: args.shuffle_labels,
        per_class,
        gram: gram.meta(),
    };
    manifest.kernel_spec = Some(json!(gram.source));
    write_json(&args.out, &report)?;
    manifest.output(&args.out);
    manifest.write(&manifest_path(&args.out))
}
