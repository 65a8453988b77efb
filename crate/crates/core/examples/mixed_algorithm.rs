//! Assembling a mixed function from holomorphic blocks split over two variable groups.

use germlab::dsl::parse_mixed_function;
use germlab::regularity::{hwc_check, mixed_algorithm_build, AlgorithmBlocks};

fn main() {
    let vars = ["z1", "z2", "z3"];
    let f = |name: &str, src: &str| parse_mixed_function(name, &vars, src).unwrap();
    let blocks = AlgorithmBlocks {
        products: vec![(f("f1", "z1^2"), f("g1", "z3^3")), (f("f2", "z1*z2"), f("g2", "z3"))],
        holomorphic: vec![f("r", "z2^4")],
        conjugated: vec![f("h", "z3^5")],
    };
    let (built, cert) = mixed_algorithm_build("F", &[0, 1], &blocks).unwrap();
    println!("F = {}", built.formal());
    println!("holomorphic: {}", built.is_holomorphic());
    println!("hwc holds: {}, real route agrees: {}", cert.holds, hwc_check(built.realified()).holds == cert.holds);

    // a g-block that uses a variable from the first group is refused
    let bad = AlgorithmBlocks { products: vec![(f("f1", "z1"), f("g1", "z2"))], ..Default::default() };
    match mixed_algorithm_build("B", &[0, 1], &bad) {
        Ok(_) => println!("B unexpectedly built"),
        Err(e) => println!("B: {}", e),
    }
}
