mod common;

use bge::order_stats::{
    order_stat_mgf, order_stat_moment, order_stat_pdf_direct, MixtureTermBudget, MomentMethod, OrderStatIndex,
};
use bge::quadrature::{integrate_positive_axis, Tolerance};
use bge::series::SeriesControl;
use bge::{Bge, BgeParams};
use common::p;
use proptest::prelude::*;

fn theta() -> impl Strategy<Value = BgeParams> {
    (0.3f64..4.0, 0.3f64..5.0, 0.3f64..3.0, 0.3f64..4.0).prop_map(|(a, b, l, al)| p(a, b, l, al))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ranks_average_to_parent_density(t in theta(), n in 1usize..=5, u in 0.02f64..0.98) {
        let d = Bge::new(t).unwrap();
        let x = d.quantile(u).unwrap();
        let avg: f64 = (1..=n).map(|i| order_stat_pdf_direct(&t, OrderStatIndex::new(i, n).unwrap(), x).unwrap()).sum::<f64>() / n as f64;
        let f = d.pdf(x).unwrap();
        prop_assert!((avg - f).abs() <= 1e-10 * f.max(1.0));
    }
}

#[test]
fn direct_densities_integrate_to_one() {
    for t in [p(2.0, 3.0, 1.0, 1.5), p(0.5, 0.7, 2.0, 0.8)] {
        let center = Bge::new(t).unwrap().quantile(0.5).unwrap();
        for n in 1..=5 {
            for i in 1..=n {
                let idx = OrderStatIndex::new(i, n).unwrap();
                let r = integrate_positive_axis(|x| order_stat_pdf_direct(&t, idx, x).unwrap(), center, Tolerance::default())
                    .unwrap();
                assert!((r.value - 1.0).abs() < 1e-7, "{t:?} i={i} n={n}: {}", r.value);
            }
        }
    }
}

#[test]
fn means_are_ordered_by_rank() {
    let t = p(1.4, 2.2, 1.0, 1.8);
    let n = 5;
    let means: Vec<f64> = (1..=n)
        .map(|i| order_stat_moment(&t, OrderStatIndex::new(i, n).unwrap(), 1, MomentMethod::Quadrature).unwrap())
        .collect();
    assert!(means.windows(2).all(|w| w[0] < w[1]), "{means:?}");
}

#[test]
fn mixture_mgf_is_normalised_and_moments_agree() {
    let idx = OrderStatIndex::new(2, 3).unwrap();
    // Integer b: the expansion is finite.
    let t = p(2.0, 2.0, 1.0, 1.0);
    let (budget, ctl) = (MixtureTermBudget::default(), SeriesControl::default());
    let m0 = order_stat_mgf(&t, idx, 0.0, &budget, &ctl).unwrap().value;
    assert!((m0 - 1.0).abs() < 1e-10, "{m0}");
    for r in 1..=4 {
        let q = order_stat_moment(&t, idx, r, MomentMethod::Quadrature).unwrap();
        let m = order_stat_moment(&t, idx, r, MomentMethod::Mixture).unwrap();
        assert!((m / q - 1.0).abs() < 1e-6, "r={r}: {m} vs {q}");
    }
    // Real b: coefficients decay algebraically, so a longer per-index run and
    // a looser shell tolerance are needed for 1e-6.
    let t = p(1.5, 2.5, 1.0, 1.2);
    let budget = MixtureTermBudget::new(400, 100_000).unwrap();
    let ctl = SeriesControl::new(100_000, 1e-9, 1e-9).unwrap();
    let m0 = order_stat_mgf(&t, idx, 0.0, &budget, &ctl).unwrap().value;
    assert!((m0 - 1.0).abs() < 1e-6, "{m0}");
    // The default budget reports exhaustion rather than a silently short sum.
    assert!(matches!(
        order_stat_mgf(&t, idx, 0.0, &MixtureTermBudget::default(), &SeriesControl::default()),
        Err(bge::Error::BudgetExhausted { .. })
    ));
}
