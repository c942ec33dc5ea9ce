//! Build the feasibility atlas for the circle path and draw the zero-offset
//! slice: q7 on the vertical axis, sampling point on the horizontal one.
//!
//! `cargo run --release --example feasibility_atlas -- [m] [out.csv]`

use std::fs::File;
use std::io::BufWriter;

use redres::feasibility::build_grid;
use redres::kinematics::{DhModel, JointLimits, DEFAULT_SINGULAR_TOL};
use redres::pathmodel::{circle_path, AdjustmentGrid, RedundancyGrid};

fn main() -> redres::Result<()> {
    let mut args = std::env::args().skip(1);
    let m: usize = args.next().map_or(61, |s| s.parse().expect("m must be an integer"));
    let limits = JointLimits::panda();
    let path = circle_path(100, 10.0)?;
    let rg = RedundancyGrid::spanning(&limits, m)?;
    let ag = AdjustmentGrid::new(0.05, 10)?;
    let grid = build_grid(&DhModel::panda(), &path, &rg, &ag, &limits, DEFAULT_SINGULAR_TOL)?;
    println!("{} of {} cells feasible", grid.atlas.feasible_count(), grid.atlas.len());

    let rows = 30;
    for r in (0..rows).rev() {
        let j = r * (m - 1) / (rows - 1);
        let line: String = (0..=path.n()).map(|i| if grid.get(i, j, 0).is_some() { '#' } else { '.' }).collect();
        println!("{:+.2} {line}", rg.value(j));
    }

    if let Some(out) = args.next() {
        grid.export_atlas(BufWriter::new(File::create(&out)?))?;
        println!("atlas written to {out}");
    }
    Ok(())
}
