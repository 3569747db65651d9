// Scheme B at N=K=3: place, deliver for (0,1,2), decode, and print the block layout.
use privcache::audit::trial_rng;
use privcache::scheme::Scheme;

fn main() {
    let scheme = Scheme::mds_b(3, 3).expect("K >= N >= 3");
    let mut rng = trial_rng(11, 0);
    let library = scheme.random_library(2, &mut rng);
    let demand = [0, 1, 2];
    let round = scheme.round(&library, &demand, &mut rng).expect("round");
    scheme.verify_round(&library, &round).expect("every user decodes");
    let rates = scheme.measure(&round, library.file_len(), library.symbol_bits());
    println!("M={} R={}; with auxiliary indices the packet is {} bits for {}-bit files",
        rates.payload_m, rates.payload_r, rates.total_r_bits, rates.file_bits());
    for row in scheme.packet_table(&round.placement.server, &round.packet, &demand).expect("table") {
        println!("  {:<16} {}", row.label, row.content);
    }
}
