//! The excitatory/inhibitory lattice automaton: cells with both coordinates even inhibit.

use gilbert_tess::lattice::{ca_run, IntBox, LatticeState, DEFAULT_CYCLE_WINDOW};

fn main() -> gilbert_tess::Result<()> {
    let initial = LatticeState::new(IntBox::square(12), [(3, 3), (7, 5), (9, 9)])?;
    let traj = ca_run(&initial, 12, DEFAULT_CYCLE_WINDOW);
    for (t, state) in traj.states.iter().enumerate().take(4) {
        println!("t = {t}, {} active\n{}", state.len(), state.to_grid_text()?);
    }
    println!("sizes: {:?}", traj.sizes());
    match traj.cycle {
        Some(c) => println!("state revisited: cycle from step {} with period {}", c.start, c.period),
        None => println!("no cycle within the window"),
    }
    Ok(())
}
