//! Residual identities connecting the shifted and unshifted iterations:
//! the det-ratio relation between the two normal-equations residuals, the
//! collinearity of the unshifted residual with the next basis vector, and
//! the coefficient-formula norm of the data-space residual.
//!
//! Run with `cargo run --release --example residual_identities`.

use lanczos_filters::bidiag::{GkbState, Reorth};
use lanczos_filters::filters::natural_residual_via_filters;
use lanczos_filters::problems::{add_noise, build_gravity, GravitySolution};
use lanczos_filters::solvers::{cgt_iterate, residual_relation_check};
use lanczos_filters::tridiag::ritz_values;

fn main() -> lanczos_filters::Result<()> {
    let problem = add_noise(
        &build_gravity(200, GravitySolution::PiecewiseLinear)?,
        1e-2,
        1,
    )?;
    let a = &problem.matrix;
    let y = &problem.y_noisy;
    let gkb = GkbState::run(a, y, 10, Reorth::Full)?;

    println!("shifted/unshifted normal-equations residual ratio vs theta/(theta + g):");
    println!("  m        c        predicted      empirical      rel diff   |cos(A'r, v_m+1)|");
    for m in [2usize, 5, 8, 10] {
        let eta_min = ritz_values(&gkb.to_tridiag(m)?)[0];
        let rep = residual_relation_check(a, y, &gkb, m, eta_min)?;
        println!(
            " {m:3}  {:10.3e}  {:12.6e} {:12.6e}  {:9.2e}   1 - {:.2e}",
            rep.c,
            rep.predicted_ratio,
            rep.empirical_ratio,
            rep.relative_difference,
            1.0 - rep.cos_angle.unwrap()
        );
    }

    println!("\ndata-space residual norm from the basis coefficients alone:");
    println!("  m        c          formula         direct");
    for m in [2usize, 6, 10] {
        let t = gkb.to_tridiag(m)?;
        for c in [0.0, 1e-3 * t.a_max()] {
            let via = natural_residual_via_filters(&gkb, m, c)?;
            let direct = cgt_iterate(a, y, &gkb, m, c, None)?.nat_res_norm;
            println!(" {m:3}  {c:10.3e}   {:12.6e}   {:12.6e}", via.norm, direct);
        }
    }
    Ok(())
}
