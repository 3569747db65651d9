// Split every file between the virtual-user scheme and scheme A, half each.
use privcache::audit::trial_rng;
use privcache::bounds::rat;
use privcache::scheme::Scheme;

fn main() {
    let shared = Scheme::shared(Scheme::virtual_user(2, 2, 1).expect("vu"), Scheme::mds_a(2, 2).expect("a"), rat(1, 2))
        .expect("compatible");
    let mut rng = trial_rng(3, 0);
    let library = shared.random_library(1, &mut rng);
    let round = shared.round(&library, &[1, 0], &mut rng).expect("round");
    shared.verify_round(&library, &round).expect("decodes");
    let rates = shared.measure(&round, library.file_len(), library.symbol_bits());
    let (m, r) = shared.formula_point();
    println!("file length {} symbols; measured M={} R={}; expected M={m} R={r}", library.file_len(), rates.payload_m, rates.payload_r);
}
