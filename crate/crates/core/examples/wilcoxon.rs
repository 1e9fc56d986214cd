//! Paired signed-rank comparison of two score vectors.

use gessvdd::eval::wilcoxon_signed_rank;

fn main() -> gessvdd::Result<()> {
    let ours = [0.91, 0.88, 0.95, 0.79, 0.93, 0.90, 0.86, 0.97, 0.92, 0.89];
    let theirs = [0.85, 0.86, 0.90, 0.80, 0.88, 0.84, 0.86, 0.91, 0.87, 0.83];
    let r = wilcoxon_signed_rank(&ours, &theirs)?;
    println!("n = {} (zero differences dropped), R+ = {}, R- = {}", r.n, r.r_plus, r.r_minus);
    match r.critical {
        Some(cv) => println!("T = {} vs critical {cv}: significant = {}", r.t, r.significant),
        None => println!("T = {}, z = {:?}: significant = {}", r.t, r.z, r.significant),
    }
    Ok(())
}
