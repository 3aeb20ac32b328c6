//! Configured runs with manifests, and byte-identical regeneration from a manifest.

use gilbert_tess::cli::{run, ExperimentConfig};

fn main() -> gilbert_tess::Result<()> {
    let root = std::env::temp_dir().join("gilbert-reproducible");
    let mut cfg = ExperimentConfig::defaults("cov-sweep")?;
    cfg.set("distances", "1,2,4")?;
    cfg.replicates = 2000;
    cfg.master_seed = 11;
    cfg.threads = Some(2);
    cfg.output_dir = root.join("first");
    let out = run(&cfg)?;
    println!("manifest:\n{}", std::fs::read_to_string(&out.manifest)?);

    let mut again = ExperimentConfig::from_key_values(&std::fs::read_to_string(&out.manifest)?)?;
    again.output_dir = root.join("second");
    again.threads = Some(1);
    let rerun = run(&again)?;
    for (a, b) in out.files.iter().zip(&rerun.files) {
        println!("{} identical: {}", a.file_name().unwrap().to_string_lossy(), std::fs::read(a)? == std::fs::read(b)?);
    }
    Ok(())
}
