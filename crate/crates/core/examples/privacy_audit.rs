// Exact privacy audit of the virtual-user scheme, then the same audit on a leaky variant.
use privcache::audit::{audit_colluding, audit_privacy_exact, Honest, LeakDemand};
use privcache::scheme::Scheme;

fn main() {
    let scheme = Scheme::virtual_user(2, 2, 1).expect("valid");
    let honest = audit_privacy_exact(&scheme, &Honest).expect("small enough to enumerate");
    println!("honest: pass={}", honest.pass);
    for c in &honest.checks {
        println!("  {}: {}", c.name, c.detail);
    }
    let leak = audit_privacy_exact(&scheme, &LeakDemand).expect("enumerates");
    println!("leaky: pass={} max TV={}", leak.pass, leak.checks[0].metric);
    let colluding = audit_colluding(&scheme, &[0], &Honest).expect("enumerates");
    println!("user 0 and the library together: pass={}", colluding.pass);
}
