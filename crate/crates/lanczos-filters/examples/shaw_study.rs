//! The image-reconstruction study: CGNE with the discrepancy principle
//! against direct Tikhonov with the theoretical optimal parameter, and the
//! best shifted iterate at depth 30.
//!
//! Run with `cargo run --release --example shaw_study`.

use lanczos_filters::bidiag::{GkbState, Reorth};
use lanczos_filters::problems::{add_noise, build_shaw, compute_svd, optimal_tikhonov_parameter};
use lanczos_filters::solvers::{best_cgt_parameter, cgne_iterate, cgt_iterate, discrepancy_stop};

fn main() -> lanczos_filters::Result<()> {
    let problem = add_noise(&build_shaw(400)?, 1e-4, 1)?;
    let a = &problem.matrix;
    let y = &problem.y_noisy;
    println!(
        "shaw(400), relative noise 1e-4: ||y|| = {:.4}, ||noise|| = {:.4e}",
        y.norm(),
        problem.abs_noise
    );

    // CGNE stopped by the discrepancy principle.
    let mut gkb = GkbState::init(a, y, Reorth::Full)?;
    let stop = discrepancy_stop(
        a,
        y,
        &mut gkb,
        problem.abs_noise,
        1.0,
        60,
        Some(&problem.x_true),
    )?;
    println!(
        "discrepancy principle stops at m = {} with ||x - x_true|| = {:.4e}",
        stop.m,
        stop.record.err_norm.unwrap()
    );

    // Direct Tikhonov with the (theoretical, not practical) optimal shift.
    let svd = compute_svd(a)?;
    let opt = optimal_tikhonov_parameter(&svd, y, &problem.x_true)?;
    println!(
        "optimal direct Tikhonov: c = {:.4e}, error = {:.4e}",
        opt.c, opt.error
    );

    // Error history of plain CGNE: semiconvergence in action.
    gkb.advance_to(a, 30)?;
    println!("\n  m   ||y - A x_m||     ||x_m - x_true||");
    for m in 1..=30 {
        let rec = cgne_iterate(a, y, &gkb, m, Some(&problem.x_true))?;
        println!(
            " {m:3}   {:12.6e}    {:12.6e}{}",
            rec.nat_res_norm,
            rec.err_norm.unwrap(),
            if m == stop.m {
                "   <- discrepancy stop"
            } else {
                ""
            }
        );
    }

    // The best shifted iterate at depth 30 beats the early-stopped one.
    let best = best_cgt_parameter(a, y, &gkb, 30, &problem.x_true)?;
    let rec = cgt_iterate(a, y, &gkb, 30, best.c, Some(&problem.x_true))?;
    println!(
        "\nbest CGT(30): c = {:.4e}, error = {:.4e} (residual {:.4e})",
        best.c,
        rec.err_norm.unwrap(),
        rec.nat_res_norm
    );
    Ok(())
}
