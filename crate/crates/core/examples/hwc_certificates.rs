//! Conformality checks on a real map and on mixed functions, by both routes.

use germlab::dsl::{parse_map, parse_mixed_function};
use germlab::regularity::{hwc_check, hwc_check_mixed};

fn main() {
    let g = parse_map("G", &["x", "y", "z", "w"], &["x^2 - y^2 + z^2 - w^2", "2*x*y + 2*z*w"]).unwrap();
    let cert = hwc_check(&g);
    println!("{}: holds={} lambda={}", g.name(), cert.holds, cert.lambda);

    let bad = parse_map("B", &["x", "y"], &["x^2", "y"]).unwrap();
    let cert = hwc_check(&bad);
    println!("{}: holds={}", bad.name(), cert.holds);
    for r in &cert.residuals {
        println!("  {} = {}", r.label, r.poly);
    }

    for (name, src) in [("f", "z1^2*conj(z2) + z1*conj(z2)^3"), ("h", "z1*conj(z1) + z2^2")] {
        let f = parse_mixed_function(name, &["z1", "z2"], src).unwrap();
        let complex = hwc_check_mixed(&f);
        let real = hwc_check(f.realified());
        println!("{}: complex route {} / real route {}", name, complex.holds, real.holds);
        if let Some(pairing) = &complex.pairing {
            println!("  sum df/dz * df/dzbar = {}", pairing);
        }
    }
}
