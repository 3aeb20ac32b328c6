//! Ray growth on the integer lattice, frozen inside the box, next to the automaton.

use gilbert_tess::cli::random_lattice_config;
use gilbert_tess::lattice::{compare_ca_with_rays, lattice_ray_simulate};
use gilbert_tess::render::{lattice_svg, SvgStyle};

fn main() -> gilbert_tess::Result<()> {
    let n = 16;
    let config = random_lattice_config(n, 10, 4)?;
    let rays = lattice_ray_simulate(&config, 2 * n as u64);
    for r in &rays.rays {
        let ((x, y), d) = config.seeds()[r.seed];
        println!("({x:>2},{y:>2}) {}{}: length {:>4} {:?}", d.code(), r.side.symbol(), r.length(), r.stop);
    }
    let early = lattice_ray_simulate(&config, n as u64);
    println!("trace in box identical at horizons N and 2N: {}", early.trace_in_box() == rays.trace_in_box());

    println!("t, automaton cells, ray lattice points, shared");
    for row in compare_ca_with_rays(&config, 6) {
        println!("{}, {}, {}, {}", row.t, row.ca_active, row.ray_points, row.shared);
    }
    let path = std::env::temp_dir().join("gilbert-lattice-rays.svg");
    std::fs::write(&path, lattice_svg(&rays, &SvgStyle::default()))?;
    println!("wrote {}", path.display());
    Ok(())
}
