// Privacy certificate for the MDS schemes: full-rank payload plus auxiliary-variable invariance.
use privcache::audit::{audit_privacy_aux, audit_privacy_rank, Honest, Mode, UnmaskIndices};
use privcache::scheme::Scheme;

fn main() {
    let a = Scheme::mds_a(2, 2).expect("valid");
    let rank = audit_privacy_rank(&a, 50, 1, &Honest).expect("rank audit");
    println!("A(2,2) rank: {}", rank.checks[0].detail);
    let aux = audit_privacy_aux(&a, Mode::Exact, 0, 1, &Honest).expect("9216 states");
    println!("A(2,2) auxiliaries exact: pass={}", aux.pass);
    let broken = audit_privacy_aux(&a, Mode::Exact, 0, 1, &UnmaskIndices).expect("enumerates");
    println!("without index pads: pass={} max TV={:.3}", broken.pass, broken.checks[0].metric);

    let b = Scheme::mds_b(3, 3).expect("valid");
    println!("B(3,3) rank: {}", audit_privacy_rank(&b, 5, 1, &Honest).expect("rank").checks[0].detail);
    let stat = audit_privacy_aux(&b, Mode::Statistical, 2000, 1, &Honest).expect("sampling");
    println!("B(3,3) auxiliaries sampled: pass={} ({})", stat.pass, stat.checks[0].detail);
}
