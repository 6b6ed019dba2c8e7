//! The determinant-recurrence machinery on a small worked example:
//! explicit inverse entries, the shift-increment split, the determinant
//! identity, monic coefficients and Ritz values.
//!
//! Run with `cargo run --example tridiagonal_identities`.

use lanczos_filters::tridiag::{poly_eval, ritz_values, ThetaPhiTable, TridiagExt};

fn main() -> lanczos_filters::Result<()> {
    // The second-difference matrix [[2,1,0],[1,2,1],[0,1,2]].
    let t = TridiagExt::new(vec![2.0, 2.0, 2.0], vec![1.0, 1.0], 1.0, 0.0)?;
    let table = ThetaPhiTable::new(&t);

    println!("forward recurrence  theta = {:?}", table.thetas());
    println!("backward recurrence phi   = {:?}", table.phis());
    println!("det T = theta_3 = phi_1 = {}", table.det());

    println!("\ninverse entries from the recurrences:");
    for i in 1..=3 {
        for j in 1..=3 {
            print!("  {:8.5}", table.inverse_entry(i, j)?);
        }
        println!();
    }

    let c = 1.0;
    let shift = table.shift(c);
    let (det, det_shifted) = shift.det_pair();
    println!("\nshift increments at c = {c}:");
    println!("  g = {:?}", shift.g_values());
    println!("  h = {:?}", shift.h_values());
    println!("  det T = {det}, det(T + cI) = det T + g_3(c) = {det_shifted}");
    println!("  (T + cI)^-1 [1,1] = {}", shift.inverse_entry(1, 1)?);

    let polys = table.shift_poly_coefficients()?;
    println!("\nmonic polynomial coefficients (lowest degree first):");
    for l in 1..=3 {
        println!(
            "  g_{l} = {:?}  -> g_{l}({c}) = {}",
            polys.g[l],
            poly_eval(&polys.g[l], c)
        );
    }

    println!(
        "\nRitz values (roots of the residual polynomial): {:?}",
        ritz_values(&t)
    );
    Ok(())
}
