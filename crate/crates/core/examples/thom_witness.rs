//! A curve-based certificate that a stratum fails the Thom condition.

use germlab::dsl::parse_document;
use germlab::witness::{direction_limit, thom_irregularity_witness, StratumParam};

const SRC: &str = "
map G : R^3 -> R^2
vars x, y, z
G1 = x
G2 = y*(x^2 + y^2) + x*z^2
assert_set V {
  (0, 0, s)
}
witness w for G {
  stratum (0, 0, s)
  curve (t, 0, s)
  coeffs (-s^2/t, 1/t)
}
";

fn main() {
    let doc = parse_document(SRC).unwrap();
    let g = &doc.germ("G").unwrap().germ;
    let w = doc.witnesses().next().unwrap();
    let stratum = StratumParam::new(g, w.stratum.clone()).unwrap();
    let tw = thom_irregularity_witness(g, &stratum, &w.curve, &w.coeffs).unwrap();
    let normal: Vec<String> = tw.normal.components().iter().map(ToString::to_string).collect();
    println!("normal along the curve: {:?}", normal);
    let limit = direction_limit(&tw.normal).unwrap();
    println!("leading order t^{}: {:?}", limit.valuation, limit.leading.iter().map(ToString::to_string).collect::<Vec<_>>());
    for (j, ip) in tw.inner_products.iter().enumerate() {
        println!("<limit, tangent {}> = {}", j + 1, ip);
    }
    println!("witness: {}", tw.is_witness);
    for t in [0.1, 0.01, 0.001] {
        println!("  n({}, s=1) = {:?}", t, tw.normal.eval_f64(t, &[1.0]));
    }
}
