//! Condition (b): an exact curve witness and the sampled probe, for a failing and a passing germ.

use germlab::dsl::parse_document;
use germlab::witness::{condition_b_probe, verify_b_witness, ProbeConfig};

const FAILS: &str = "
map G : R^3 -> R^2
vars x, y, z
G1 = x*y
G2 = z^2
assert_set V {
  (0, s, 0)
  (s, 0, 0)
}
bwitness b for G {
  curve (t, s, 0)
}
";

const HOLDS: &str = "
map G : R^3 -> R^2
vars x, y, z
G1 = x*y
G2 = x*z
assert_set V {
  (0, s, u)
  (s, 0, 0)
}
";

fn main() {
    let doc = parse_document(FAILS).unwrap();
    let g = &doc.germ("G").unwrap().germ;
    let milnor = g.milnor_polynomial().milnor_poly;
    let b = doc.bwitnesses().next().unwrap();
    let bw = verify_b_witness(g, &milnor, &b.curve).unwrap();
    println!("witness limit {:?}, |limit|^2 = {}", bw.limit.iter().map(ToString::to_string).collect::<Vec<_>>(), bw.limit_norm_sq);

    let cfg = ProbeConfig::default().with_seed(7);
    for (label, src) in [("xy, z^2", FAILS), ("xy, xz", HOLDS)] {
        let doc = parse_document(src).unwrap();
        let decl = doc.germ("G").unwrap();
        let probe = condition_b_probe(&decl.germ, decl.set_components("V"), &cfg).unwrap();
        println!(
            "{}: accepted {} of {}, min relative distance {:?}, violation {}",
            label, probe.accepted, probe.samples, probe.min_relative_distance, probe.violation
        );
    }
}
