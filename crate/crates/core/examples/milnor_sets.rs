//! Milnor polynomials for a few germs, including the 6-variable determinant.

use std::time::Instant;

use germlab::dsl::{parse_map, parse_polynomial};

fn main() {
    let g = parse_map("G", &["x", "y", "z"], &["x*y", "x*z"]).unwrap();
    let m = g.milnor_polynomial();
    println!("(xy, xz): det A = {}", m.square_det.as_ref().unwrap());

    let g = parse_map(
        "ex1",
        &["x", "y", "z", "w", "a", "b"],
        &["x^2*z + y^2*z", "w*x^2 + w*y^2", "a*x^2 + a*y^2", "b*x^2 + b*y^2"],
    )
    .unwrap();
    let start = Instant::now();
    let m = g.milnor_polynomial();
    let claimed = parse_polynomial("(x^2 + y^2)^7*(2*a^2 + 2*b^2 + 2*w^2 - x^2 - y^2 + 2*z^2)^2", g.ctx()).unwrap();
    println!(
        "ex1: {} terms, matches factored form: {} ({:.2?})",
        m.milnor_poly.num_terms(),
        m.milnor_poly == claimed,
        start.elapsed()
    );
}
