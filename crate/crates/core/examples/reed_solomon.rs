// Encode five subfiles into eight segments over GF(2^8), drop three, rebuild.
use privcache::field::{Field, FieldSpec};
use privcache::reed_solomon::ReedSolomon;

fn main() {
    let code = ReedSolomon::with_field(Field::new(FieldSpec::GF256), 8, 5).expect("valid code");
    let message: Vec<Vec<u16>> = (0..5u16).map(|i| vec![i * 17, 200 - i, i ^ 0x5a]).collect();
    let word = code.encode(&message).expect("encodes");
    let survivors = word.subset(&[1, 3, 4, 6, 7]);
    let rebuilt = code.reconstruct(&survivors).expect("any five suffice");
    assert_eq!(rebuilt, message);
    println!("recovered {} subfiles from segments {:?}", rebuilt.len(), survivors.indices);
}
