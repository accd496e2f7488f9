//! Assembles the pseudorange rigidity matrix of a triangle with one two-way
//! link and prints it as CSV together with its rank.

use pseudorange_rigidity::fixtures;
use pseudorange_rigidity::numeric::{numeric_rank, TolerancePolicy};
use pseudorange_rigidity::rigidity::{
    matrix_to_csv, pseudorange_rigidity_matrix, s_p, Configuration, PseudorangeFramework,
};

fn main() -> pseudorange_rigidity::Result<()> {
    let config = Configuration::new(
        2,
        &[vec![0.0, 0.0], vec![1.0, 0.0], vec![0.0, 2.0]],
        vec![0.0; 3],
    )?;
    let fw = PseudorangeFramework::new(fixtures::fig2a(), config)?;
    let r = pseudorange_rigidity_matrix(&fw)?;
    // columns: x1 y1 x2 y2 x3 y3 | b1 b2 b3
    print!("{}", matrix_to_csv(&r));
    println!(
        "rank {} of {}",
        numeric_rank(&r, TolerancePolicy::default())?,
        s_p(3, 2)
    );
    Ok(())
}
