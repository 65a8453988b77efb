//! Multiplying two conformal pairs when the bilinear conditions hold.

use germlab::dsl::parse_map;
use germlab::regularity::{hwc_check, product_pair, ProductOutcome};

fn run(label: &str, comps: [&str; 4]) {
    let g = parse_map(label, &["x", "y", "u", "v"], &comps).unwrap();
    let c = g.components();
    match product_pair(label, [&c[0], &c[1], &c[2], &c[3]]).unwrap() {
        ProductOutcome::Built { germ, hwc } => {
            println!("{}: built", label);
            for (i, p) in germ.components().iter().enumerate() {
                println!("  P{} = {}", i + 1, p);
            }
            println!("  lambda = {}", hwc.lambda);
            assert!(hwc_check(&germ).holds);
        }
        ProductOutcome::Rejected { residuals } => {
            println!("{}: rejected", label);
            for r in residuals {
                println!("  {} = {}", r.label, r.poly);
            }
        }
    }
}

fn main() {
    // holomorphic pairs in disjoint variables
    run("P", ["x^2 - y^2", "2*x*y", "u", "v"]);
    // same pair twice, swapped: <dG1,dG4> + <dG2,dG3> = 2
    run("N", ["x", "y", "y", "x"]);
}
