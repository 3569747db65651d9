// Delivery signals of the virtual-user scheme at N=2, K=3, r=2 for each restricted demand.
use privcache::subsets::Subset;
use privcache::virtual_user::{demand_mask, xsub_terms, VuScheme};

fn main() {
    let vu = VuScheme::new(2, 3, 2).expect("valid");
    println!("{} subfiles per file, {} labels", vu.subfile_count(), vu.labels());
    for bits in 0..8usize {
        let d: Vec<usize> = (0..3).map(|k| (bits >> (2 - k)) & 1).collect();
        let v = demand_mask(2, &d).expect("restricted demand");
        let t_d = v.min().expect("never empty");
        let columns: Vec<String> = (0..vu.labels())
            .map(|s| {
                if s == t_d {
                    return "/".to_string();
                }
                let terms: Vec<String> = xsub_terms(v, Subset::singleton(s)).iter().map(|r| format!("W[n,{r}]")).collect();
                terms.join("+")
            })
            .collect();
        println!("d={d:?} V_d={v} t_d={t_d} | {}", columns.join(" | "));
    }
}
