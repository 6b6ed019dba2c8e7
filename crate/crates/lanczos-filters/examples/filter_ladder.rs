//! The damping factors gamma_i(c) across a ladder of Tikhonov shifts:
//! every factor starts at one for c = 0 and decays toward zero as the
//! shift grows, faster for later basis directions.
//!
//! Run with `cargo run --release --example filter_ladder`.

use lanczos_filters::bidiag::{GkbState, Reorth};
use lanczos_filters::filters::lanczos_filters_ratio;
use lanczos_filters::problems::{add_noise, build_shaw};

fn main() -> lanczos_filters::Result<()> {
    let problem = add_noise(&build_shaw(400)?, 1e-4, 1)?;
    let m = 15;
    let gkb = GkbState::run(&problem.matrix, &problem.y_noisy, m, Reorth::Full)?;
    let a_max = gkb.to_tridiag(m)?.a_max();

    let ladder: Vec<f64> = (-8..=4).step_by(3).map(|k| 10f64.powi(k) * a_max).collect();

    print!("  i  |");
    for c in &ladder {
        print!("  c = {c:9.2e}");
    }
    println!("\n-----+{}", "-".repeat(16 * ladder.len()));
    let sets: Vec<_> = ladder
        .iter()
        .map(|&c| lanczos_filters_ratio(&gkb, m, c))
        .collect::<lanczos_filters::Result<_>>()?;
    for i in 1..=m {
        print!(" {i:3} |");
        for set in &sets {
            if set.defined[i - 1] {
                print!("   {:12.5e}", set.gamma[i - 1]);
            } else {
                print!("   {:>12}", "undefined");
            }
        }
        println!();
    }
    println!(
        "\n(each column multiplies the coefficients of the unshifted iterate; \
         the damping sets in earlier for later directions)"
    );
    Ok(())
}
