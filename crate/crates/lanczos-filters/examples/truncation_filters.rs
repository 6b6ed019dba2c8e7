//! The discrepancy-stopped iterate expressed in the basis of a deeper
//! iterate: an exactly-zero tail past the stopping index, with leading
//! entries near (but not exactly) one.
//!
//! Run with `cargo run --release --example truncation_filters`.

use lanczos_filters::bidiag::{GkbState, Reorth};
use lanczos_filters::filters::truncation_filters;
use lanczos_filters::problems::{add_noise, build_shaw};
use lanczos_filters::solvers::discrepancy_stop;

fn main() -> lanczos_filters::Result<()> {
    let problem = add_noise(&build_shaw(400)?, 1e-4, 1)?;
    let a = &problem.matrix;
    let y = &problem.y_noisy;
    let deep = 30;

    let mut gkb = GkbState::init(a, y, Reorth::Full)?;
    let stop = discrepancy_stop(a, y, &mut gkb, problem.abs_noise, 1.0, 60, None)?;
    gkb.advance_to(a, deep)?;

    let set = truncation_filters(&gkb, stop.m, deep)?;
    println!(
        "filters of the m = {} discrepancy iterate inside the m = {deep} basis:",
        stop.m
    );
    println!("   i      gamma_i");
    for (i, (&g, &ok)) in set.gamma.iter().zip(set.defined.iter()).enumerate() {
        if ok {
            println!(" {:3}   {:12.6}", i + 1, g);
        } else {
            println!(" {:3}   undefined", i + 1);
        }
    }
    println!(
        "\nalmost a truncation: the tail is exactly zero, the leading {} \
         entries hover around one without reaching it",
        stop.m
    );
    Ok(())
}
