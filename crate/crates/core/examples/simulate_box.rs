//! Sample a Poisson seed set in a box, grow it until frozen and write CSV and SVG.
//!
//! ```text
//! cargo run --example simulate_box -- [lambda] [box_side] [seed]
//! ```

use gilbert_tess::render::{tessellation_svg, SvgStyle};
use gilbert_tess::{sample_poisson, simulate, BoxDomain, MarkDistribution};

fn main() -> gilbert_tess::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let arg = |i: usize, default: f64| args.get(i).and_then(|s| s.parse().ok()).unwrap_or(default);
    let (lambda, n, seed) = (arg(0, 1.0), arg(1, 20.0), arg(2, 42.0) as u64);

    let seeds = sample_poisson(BoxDomain::new(n)?, lambda, MarkDistribution::default(), seed)?;
    let t = simulate(&seeds, n)?;

    let blocked = t.half_rays().iter().filter(|r| !r.censored()).count();
    println!("{} seeds, {} of {} half-rays blocked", seeds.len(), blocked, t.half_rays().len());
    println!("{} rays escape the box", t.escaping_rays()?);

    let dir = std::env::temp_dir().join("gilbert-examples");
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("simulate_box.csv"), t.to_csv())?;
    std::fs::write(dir.join("simulate_box.svg"), tessellation_svg(&t, &SvgStyle::default()))?;
    println!("wrote {}", dir.display());
    Ok(())
}
