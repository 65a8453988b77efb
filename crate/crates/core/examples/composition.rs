//! Checks for condition (b) of a composite map, exact, by inclusion and by sampling.

use std::fs;

use germlab::corpus::default_dir;
use germlab::dsl::{parse_document, Document};
use germlab::witness::{
    composition_condition_exact, composition_condition_sampled, image_in_milnor_check, ProbeConfig, SampleRegion,
};

fn load(id: &str) -> Document {
    parse_document(&fs::read_to_string(default_dir().join(format!("{}.germ", id))).unwrap()).unwrap()
}

fn main() {
    let d = load("comp48");
    let (f, g) = (&d.germ("F").unwrap().germ, &d.germ("G").unwrap().germ);
    let c = d.compositions().next().unwrap();
    let sing = d.germ("G").unwrap().set_components("Sing");
    let exact = composition_condition_exact(f, g, &c.milnor_components, c.closure.as_ref(), sing).unwrap();
    println!("comp48 exact: holds {}", exact.holds);

    let d = load("incl");
    for c in d.compositions() {
        let (f, g) = (d.germ(&c.inner).unwrap(), d.germ(&c.outer).unwrap());
        let verdict = image_in_milnor_check(&f.germ, &g.germ, &c.milnor_components, g.set_components("M")).unwrap();
        println!("incl {} = {} o {}: {:?}", c.name, c.outer, c.inner, verdict);
    }

    let d = load("contraexamplo");
    let (f, g) = (&d.germ("F").unwrap().germ, &d.germ("G").unwrap().germ);
    let cfg = ProbeConfig::default();
    let region = SampleRegion::parse("x=free:z; y=log:1e-6:1e-4; z=0.05:0.3; w=0", f.ctx(), cfg.r_max).unwrap();
    let probe = composition_condition_sampled(f, g, d.germ("G").unwrap().set_components("Sing"), &region, &cfg).unwrap();
    println!("contraexamplo sampled: violation {}, min relative distance {:?}", probe.violation, probe.min_relative_distance);
    if let Some(y) = &probe.best_point {
        println!("  image point {:?}", y);
    }
}
