mod common;

use horofill::bootstrap::*;
use horofill::Error;
use proptest::prelude::*;

use common::bands;

#[test]
fn step_examples() {
    assert_eq!(exponent_step(1.0).unwrap(), 0.5);
    assert_eq!(exponent_step(0.5).unwrap(), 0.375);
    assert_eq!(exponent_step(0.0).unwrap(), 0.0);
    assert!(matches!(exponent_step(1.5), Err(Error::OutOfRange(_))));
    assert!(exponent_step(-0.1).is_err());
    assert!(exponent_step(f64::NAN).is_err());
}

#[test]
fn bound_examples() {
    let b = BrickBound::new(1.0, 1.0, 2.5).unwrap();
    // lam = l / M with l = M^(1/4): both terms at most M^2.5 up to constants
    for m in [10.0f64, 100.0, 1e4] {
        let l = m.powf(0.25);
        let area = mixed_area_bound(&b, l, l / m).unwrap();
        assert!(area <= 2.0 * m.powf(2.5) * (1.0 + 1e-12), "M = {m}: {area}");
    }
    let (t1, t2) = b.terms(2.0, 0.5);
    assert!((t1 - 32.0).abs() < 1e-12);
    assert!((t2 - 4.0 * 0.5f64.powf(-2.5)).abs() < 1e-12);
    assert!(BrickBound::new(0.0, 1.0, 2.0).is_err());
    assert!(BrickBound::new(1.0, 1.0, 1.5).is_err());
    assert!(mixed_area_bound(&b, -1.0, 1.0).is_err());
}

#[test]
fn balanced_terms_match_the_improved_exponent() {
    for eps in [0.25, 0.5, 1.0] {
        let target = 2.0 + exponent_step(eps).unwrap();
        for m in [1e2f64, 1e4, 1e6] {
            let (t1, t2) = balanced_terms(1.0, 1.0, eps, m).unwrap();
            assert!(t1 <= m.powf(target) * (1.0 + 1e-9), "eps {eps} M {m}: {t1}");
            assert!(t2 <= m.powf(target) * (1.0 + 1e-9), "eps {eps} M {m}: {t2}");
        }
    }
}

#[test]
fn term_balance_within_factor() {
    let b = bands();
    let ms = [1e1, 1e2, 1e3, 1e4, 1e5, 1e6];
    for eps in [0.5, 1.0] {
        let spread = term_balance_spread(1.0, 1.0, eps, &ms).unwrap();
        assert!(spread <= b.term_balance_factor, "eps {eps}: {spread}");
    }
    assert!(term_balance_spread(1.0, 1.0, 0.5, &[]).is_err());
    assert!(balanced_terms(1.0, 1.0, 0.5, 1.0).is_err());
}

#[test]
fn bootstrap_examples() {
    let b = bootstrap(1.0, 0.01).unwrap();
    let mut e = 1.0f64;
    let mut n = 0;
    while e > 0.01 {
        e -= e * e / 2.0;
        n += 1;
    }
    assert_eq!(b.steps, n);
    assert_eq!(b.sequence.len(), n + 1);
    assert_eq!(*b.sequence.last().unwrap(), e);
    assert!(b.sequence.windows(2).all(|w| w[1] < w[0]));

    let z = bootstrap(0.0, 1e-3).unwrap();
    assert_eq!(z.steps, 0);
    assert!(bootstrap(1.0, 0.0).is_err());
    assert!(bootstrap(2.0, 0.1).is_err());
}

#[test]
fn bootstrap_reaches_small_excess() {
    let b = bootstrap(1.0, 1e-6).unwrap();
    assert!(*b.sequence.last().unwrap() <= 1e-6);
    assert!(b.sequence.windows(2).all(|w| w[1] < w[0]));
    // e_n ~ 2 / n, so about 2 / tol steps
    assert!((1.9e6..2.1e6).contains(&(b.steps as f64)), "{}", b.steps);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn step_decreases_at_most_by_half(x in 1e-9f64..=1.0) {
        let y = exponent_step(x).unwrap();
        prop_assert!(y < x);
        prop_assert!(y >= x / 2.0);
    }

    #[test]
    fn bound_is_monotone(
        k1 in 0.1f64..10.0, k2 in 0.1f64..10.0, p in 2.0f64..3.0,
        l in 0.5f64..100.0, dl in 0.0f64..10.0, lam in 0.05f64..5.0, dlam in 0.0f64..5.0,
    ) {
        let b = BrickBound::new(k1, k2, p).unwrap();
        let base = mixed_area_bound(&b, l, lam).unwrap();
        prop_assert!(mixed_area_bound(&b, l + dl, lam).unwrap() >= base);
        prop_assert!(mixed_area_bound(&b, l, lam + dlam).unwrap() <= base);
    }
}
