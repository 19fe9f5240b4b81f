mod common;

use bge::quadrature::{integrate_positive_axis, Tolerance};
use bge::specfun::inc_beta_ratio;
use bge::{Bge, BgeParams};
use common::{ks_critical_1pct, ks_statistic, p};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn theta() -> impl Strategy<Value = BgeParams> {
    (-1.5f64..2.5, -1.5f64..2.5, -1.0f64..1.0, -1.5f64..2.5)
        .prop_map(|(a, b, l, al)| p(a.exp(), b.exp(), l.exp(), al.exp()))
}

proptest! {
    #[test]
    fn cdf_and_survival_are_complementary(t in theta(), u in 0.01f64..0.99) {
        let d = Bge::new(t).unwrap();
        let x = d.quantile(u).unwrap();
        let (f, s) = d.cdf_parts(x);
        prop_assert!((f + s - 1.0).abs() < 1e-13);
        prop_assert!((0.0..=1.0).contains(&f));
    }

    #[test]
    fn cdf_is_monotone(t in theta(), x in 0.01f64..5.0, dx in 1e-3f64..2.0) {
        let d = Bge::new(t).unwrap();
        prop_assert!(d.cdf(x) <= d.cdf(x + dx));
    }

    #[test]
    fn quantile_inverts_cdf(t in theta(), u in 1e-6f64..0.999_999) {
        let d = Bge::new(t).unwrap();
        let x = d.quantile(u).unwrap();
        let (f, s) = d.cdf_parts(x);
        if u < 0.5 {
            prop_assert!((f - u).abs() <= 1e-9 * u, "u={u} F={f}");
        } else {
            prop_assert!((s - (1.0 - u)).abs() <= 1e-9 * (1.0 - u) + 1e-15, "u={u} S={s}");
        }
    }

    #[test]
    fn hazard_is_density_over_survival(t in theta(), u in 0.01f64..0.95) {
        let d = Bge::new(t).unwrap();
        let x = d.quantile(u).unwrap();
        let h = d.hazard(x).unwrap();
        prop_assert!((h - d.pdf(x).unwrap() / d.survival(x)).abs() <= 1e-12 * h.abs().max(1e-300));
    }

    #[test]
    fn sub_model_reductions(l in 0.2f64..3.0, al in 0.2f64..5.0, a in 0.2f64..5.0, b in 0.2f64..5.0, x in 0.05f64..4.0) {
        let g = 1.0 - (-l * x).exp();
        let ge = Bge::new(BgeParams::ge(l, al).unwrap()).unwrap();
        prop_assert!((ge.cdf(x) - g.powf(al)).abs() < 1e-13);
        let dge = Bge::new(BgeParams::dge(b, l, al).unwrap()).unwrap();
        let ln_g = (-(-l * x).exp()).ln_1p();
        let want = (b * (-(al * ln_g).exp_m1()).ln()).exp();
        prop_assert!((dge.survival(x) - want).abs() <= 1e-12 * want.max(1e-12));
        let be = Bge::new(BgeParams::be(a, b, l).unwrap()).unwrap();
        // 1 − G = e^{−λx} is exact, so the survival oracle is well conditioned
        // even where I_G(a, b) is not (small b, G near 1).
        let s_want = inc_beta_ratio((-l * x).exp(), b, a).unwrap();
        prop_assert!((be.survival(x) - s_want).abs() <= 1e-12 * s_want.max(1e-300));
        prop_assert!((be.cdf(x) - (1.0 - s_want)).abs() < 1e-14);
        let exp = Bge::new(BgeParams::exponential(l).unwrap()).unwrap();
        prop_assert!((exp.hazard(x).unwrap() - l).abs() < 1e-12 * l);
    }
}

#[test]
fn density_integrates_to_one() {
    for t in [p(0.4125, 93.4655, 0.92271, 22.6124), p(0.5, 0.5, 1.0, 0.7), p(3.0, 2.0, 2.0, 5.0), p(1.0, 1.0, 1.0, 1.0)] {
        let d = Bge::new(t).unwrap();
        let center = d.quantile(0.5).unwrap();
        let r = integrate_positive_axis(|x| d.pdf(x).unwrap(), center, Tolerance::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{t:?}: {}", r.value);
    }
}

#[test]
fn sampler_is_seeded_and_matches_cdf() {
    let t = p(2.0, 0.6, 1.3, 3.0);
    let d = Bge::new(t).unwrap();
    let s1 = d.sample(20_000, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    let s2 = d.sample(20_000, &mut ChaCha8Rng::seed_from_u64(42)).unwrap();
    assert!(s1.values().iter().zip(s2.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
    let ks = ks_statistic(s1.values(), |x| d.cdf(x));
    assert!(ks < ks_critical_1pct(s1.len()), "KS {ks}");
}
