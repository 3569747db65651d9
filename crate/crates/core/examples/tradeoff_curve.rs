// Achievable and converse series for (N,K) = (2,3) as CSV on stdout.
use privcache::bounds::{achievable_envelope, max_converse, optimal_curve};
use privcache::cli::curve::{curve_rows, write_csv};

fn main() {
    for p in achievable_envelope(2, 3).expect("valid").points() {
        let opt = optimal_curve(2, 3, p.m).expect("in range");
        eprintln!("corner M={} R={} [{}], converse {}, optimal {:?}", p.m, p.r, p.source.tag(),
            max_converse(2, 3, p.m).expect("in range"), opt.value.map(|v| v.to_string()));
    }
    write_csv(&curve_rows(2, 3, 16).expect("valid"), std::io::stdout()).expect("stdout");
}
