//! Build a small linear program in code, solve it, and round-trip it through
//! the text format the `lp` subcommand reads.

use coupled_alloc::lp::{self, Relation};

fn main() -> coupled_alloc::Result<()> {
    // maximize x + y  <=>  minimize -x - y
    let program = lp::LinearProgram::new(2)
        .minimize(&[-1.0, -1.0])
        .with(&[(0, 1.0), (1, 2.0)], Relation::Le, 4.0)
        .with(&[(0, 3.0), (1, 1.0)], Relation::Le, 6.0);

    let sol = lp::solve(&program)?;
    println!("status    {}", sol.status);
    println!("objective {:.4}", sol.objective_value.unwrap_or(f64::NAN));
    println!("point     {:?}", sol.point.unwrap_or_default());

    let text = lp::dump(&program);
    print!("\n{text}");
    assert_eq!(lp::parse(&text)?, program);

    // Dropping one row leaves the direction (1, 1) unbounded.
    let open = lp::LinearProgram::new(2)
        .minimize(&[-1.0, -1.0])
        .with(&[(0, 1.0), (1, -1.0)], Relation::Le, 1.0);
    println!("\nwithout the caps: {}", lp::solve(&open)?.status);
    Ok(())
}
