//! Planar subdivision of a frozen tessellation and its Euler bookkeeping.

use gilbert_tess::render::{graph_svg, SvgStyle};
use gilbert_tess::{euler_check, extract_graph, sample_poisson, simulate, BoxDomain, MarkDistribution};

fn main() -> gilbert_tess::Result<()> {
    let n = 10.0;
    let seeds = sample_poisson(BoxDomain::new(n)?, 0.3, MarkDistribution::default(), 3)?;
    let g = extract_graph(&simulate(&seeds, n)?)?;
    let report = euler_check(&g, seeds.len());
    println!(
        "|V_N| = {}: {} vertices, {} edges, {} faces ({} rectangles), V - E + F = {}",
        report.n_seeds, report.vertices, report.edges, report.faces, report.rectangles, report.euler_characteristic
    );
    println!("all identities hold: {}", report.pass);

    let mut hist = std::collections::BTreeMap::new();
    for d in g.degrees() {
        *hist.entry(d).or_insert(0) += 1;
    }
    println!("vertex degrees: {hist:?}");

    let style = SvgStyle { fill_faces: true, ..SvgStyle::default() };
    let path = std::env::temp_dir().join("gilbert-planar-graph.svg");
    std::fs::write(&path, graph_svg(&g, n, &style))?;
    println!("wrote {}", path.display());
    Ok(())
}
