//! Full certification of a corpus document: facts, provenance chains and replay.

use std::fs;

use germlab::corpus::default_dir;
use germlab::dsl::parse_document;
use germlab::facts::Fact;
use germlab::pipeline::{certify, RunConfig};

fn main() {
    let id = std::env::args().nth(1).unwrap_or_else(|| "e21".into());
    let src = fs::read_to_string(default_dir().join(format!("{}.germ", id))).unwrap();
    let doc = parse_document(&src).unwrap();
    let cert = certify(&doc, &RunConfig::default()).unwrap();
    for g in &cert.germs {
        let report = cert.report(&g.name).unwrap();
        println!("== {}", g.name);
        print!("{}", report);
        for f in [Fact::ThomRegular, Fact::ConditionB] {
            if report.has(f) {
                println!("{}: {}", f, report.chain(f));
            }
        }
        println!("replay ok: {}", report.replay().is_ok());
    }
    println!("{}", serde_json::to_string_pretty(&cert.to_json()).unwrap());
}
