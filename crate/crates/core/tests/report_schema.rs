use privcache::audit::{audit_correctness, audit_privacy_exact, audit_privacy_rank, Honest, LeakDemand};
use privcache::scheme::Scheme;
use serde_json::Value;

fn validator() -> jsonschema::Validator {
    let text = include_str!("../schema/audit-report.schema.json");
    let schema: Value = serde_json::from_str(text).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

#[test]
fn reports_validate() {
    let v = validator();
    let reports = [
        audit_privacy_exact(&Scheme::virtual_user(2, 2, 1).unwrap(), &Honest).unwrap(),
        audit_privacy_exact(&Scheme::virtual_user(2, 2, 1).unwrap(), &LeakDemand).unwrap(),
        audit_privacy_rank(&Scheme::mds_a(2, 2).unwrap(), 3, 7, &Honest).unwrap(),
        audit_correctness(&Scheme::mds_b(3, 3).unwrap(), 2, 7, 1, true, &Honest).unwrap(),
    ];
    for report in reports {
        let json: Value = serde_json::from_str(&report.to_json()).unwrap();
        let errors: Vec<String> = v.iter_errors(&json).map(|e| e.to_string()).collect();
        assert!(errors.is_empty(), "{errors:?}");
    }
}

#[test]
fn schema_rejects_missing_fields() {
    let v = validator();
    let bad = serde_json::json!({"schema_version": 1, "scheme": "vu", "params": {"n": 2, "k": 2}, "seed": 0, "mode": "exact", "checks": []});
    assert!(!v.is_valid(&bad));
}
