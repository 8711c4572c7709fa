use std::fs;
use std::hint::black_box;
use std::time::{Duration, Instant};

use geotree_kernels::synth::{balanced_tree, GeneratorConfig};
use geotree_kernels::{Error, GeometricTree, KernelSpec};
use serde_json::json;

use crate::args::BenchArgs;
use crate::manifest::{manifest_path, RunManifest};
use crate::{spec, CliError};

/// Each timed repeat runs enough evaluations to last at least this long.
const MIN_REPEAT: Duration = Duration::from_millis(20);

fn seconds_per_pair(spec: &KernelSpec, t1: &GeometricTree, t2: &GeometricTree, repeats: usize) -> Result<f64, CliError> {
    let start = Instant::now();
    black_box(spec.evaluate(t1, t2)?);
    let once = start.elapsed().max(Duration::from_nanos(100));
    let iters = (MIN_REPEAT.as_secs_f64() / once.as_secs_f64()).ceil().max(1.0) as usize;
    let mut samples: Vec<f64> = (0..repeats)
        .map(|_| {
            let start = Instant::now();
            for _ in 0..iters {
                black_box(spec.evaluate(black_box(t1), black_box(t2)).expect("evaluated once already"));
            }
            start.elapsed().as_secs_f64() / iters as f64
        })
        .collect();
    samples.sort_by(f64::total_cmp);
    let mid = samples.len() / 2;
    Ok(if samples.len() % 2 == 1 { samples[mid] } else { 0.5 * (samples[mid - 1] + samples[mid]) })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

pub fn run(args: &BenchArgs, threads: usize) -> Result<(), CliError> {
    if args.repeats == 0 || args.sizes.contains(&0) {
        return Err(CliError::Usage("--repeats and every size must be positive".into()));
    }
    let mut manifest = RunManifest::start("bench", threads);
    manifest.seed = Some(args.seed);
    let cfg = GeneratorConfig { seed: args.seed, ..Default::default() };
    let pairs: Vec<(GeometricTree, GeometricTree)> = args
        .sizes
        .iter()
        .map(|&s| Ok((balanced_tree(&cfg, s, 0)?, balanced_tree(&cfg, s, 1)?)))
        .collect::<Result<_, Error>>()?;

    let mut out = String::from("kernel,nodes,height,repeats,median_seconds,fitted_slope\n");
    let mut specs = Vec::new();
    for &name in &args.kernel {
        let spec = spec::from_flags(name, &args.params);
        let medians: Vec<f64> = pairs
            .iter()
            .map(|(t1, t2)| seconds_per_pair(&spec, t1, t2, args.repeats))
            .collect::<Result<_, _>>()?;
        let sizes: Vec<f64> = args.sizes.iter().map(|&s| s as f64).collect();
        let slope = if sizes.len() > 1 { log_log_slope(&sizes, &medians) } else { f64::NAN };
        eprintln!("{}: fitted log-log slope {slope:.3}", spec.name());
        for ((t1, _), median) in pairs.iter().zip(&medians) {
            out.push_str(&format!(
                "{},{},{},{},{median:e},{slope}\n",
                spec.name(),
                t1.len(),
                t1.height(),
                args.repeats
            ));
        }
        specs.push(json!(spec));
    }
    fs::write(&args.out, out)?;
    manifest.kernel_spec = Some(json!(specs));
    manifest.output(&args.out);
    manifest.write(&manifest_path(&args.out))
}
