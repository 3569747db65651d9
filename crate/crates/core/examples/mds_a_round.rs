// One round of scheme A for two files and two users, with its packet table.
use privcache::cli::{simulate_round, SchemeKind, Settings};

fn main() {
    let settings = Settings {
        scheme: Some(SchemeKind::MdsA),
        n: Some(2),
        k: Some(2),
        demand: Some("0,1".into()),
        seed: Some(7),
        subfile_bytes: Some(4),
        table: true,
        ..Settings::default()
    };
    let t = simulate_round(&settings).expect("valid parameters");
    println!("M={} R={} (formula M={} R={})", t.payload_m, t.payload_r, t.formula_m, t.formula_r);
    for (label, content) in t.table.iter().flatten() {
        println!("  {label:<8} {content}");
    }
    for d in &t.decodes {
        println!("user {} decodes file {}: {}", d.user, d.file, if d.ok { "ok" } else { &d.detail });
    }
}
