// Decode every demand for every user over many seeded trials and print the JSON report.
use privcache::audit::{audit_correctness, Honest};
use privcache::scheme::Scheme;

fn main() {
    let scheme = Scheme::mds_b(3, 3).expect("valid");
    let report = audit_correctness(&scheme, 20, 42, 1, true, &Honest).expect("runs");
    println!("{}", report.to_json());
}
