use std::collections::BTreeMap;

use bge::order_stats::{
    default_reconciliation_cases, reconcile_readings, reconciliation_report, MixtureReading, MixtureTermBudget,
};
use bge::series::SeriesControl;

const REL_TOL: f64 = 1e-4;

fn errata() -> BTreeMap<String, String> {
    include_str!("../data/order_stat_errata.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (k, v) = l.split_once('=').expect("key=value");
            (k.to_string(), v.to_string())
        })
        .collect()
}

#[test]
fn readings_match_errata_file() {
    let outcomes = reconcile_readings(
        &default_reconciliation_cases(),
        &MixtureTermBudget::default(),
        &SeriesControl::default(),
        REL_TOL,
    )
    .unwrap();
    let report = reconciliation_report(&outcomes, REL_TOL);
    let path = std::path::Path::new(env!("CARGO_TARGET_TMPDIR")).join("order_stat_reconciliation.txt");
    std::fs::write(&path, &report).unwrap();
    println!("reconciliation report written to {}", path.display());

    let errata = errata();
    assert_eq!(outcomes.len(), 8);
    for o in &outcomes {
        let key = format!("expected[{}|{}]", o.reading.shape.label(), o.reading.length.label());
        let want = errata.get(&key).unwrap_or_else(|| panic!("errata file lacks {key}"));
        let got = if o.pass { "pass" } else { "fail" };
        assert_eq!(got, want, "{key}: max rel error {:e}", o.max_rel_error);
    }
    let v = MixtureReading::VALIDATED;
    assert_eq!(errata["corrected"], format!("{}|{}", v.shape.label(), v.length.label()));
    assert!(report.contains("validated.count=1"));
}
