use proptest::prelude::*;
use wgnls::lattice::*;

fn one_root_two() -> ThetaVector {
    ThetaVector::from_entries(&["1", "sqrt(2)"], true, "one-root-two").unwrap()
}

#[test]
fn lambda_examples() {
    let unit = ThetaVector::from_entries(&["1", "1"], false, "unit").unwrap();
    let l = lambda(&unit, &[3, 4]).unwrap();
    assert!(l.is_point());
    assert_eq!(l.mid_f64(), 25.0);
    assert!(lambda(&ThetaVector::sqrt_primes(3).unwrap(), &[0, 0, 0]).unwrap().is_exact_zero());
    let l = lambda(&one_root_two(), &[1, 1]).unwrap();
    assert!((l.mid_f64() - (1.0 + 2f64.sqrt())).abs() < 1e-15);
    assert!(l.width_f64() <= 2f64.powi(-64) * l.mid_f64());
    assert!(lambda(&unit, &[1]).is_err());
}

#[test]
fn lambda_matches_decimal_oracle() {
    // 1 + √2 to 40 digits.
    let t = one_root_two();
    let l = lambda(&t, &[1, 1]).unwrap();
    let oracle = ThetaVector::from_entries(&["2.414213562373095048801688724209698078569"], false, "o").unwrap();
    let diff = l.add(&oracle.squares()[0].neg());
    assert!(diff.abs().hi_f64() < 1e-39);
}

#[test]
fn resonance_level_examples() {
    let t = one_root_two();
    let pairing = Quartet::new(vec![3, -1], vec![3, -1], vec![0, 2], vec![0, 2]);
    let lv = resonance_level(&t, &pairing).unwrap();
    assert!(lv.is_exact_zero());
    assert!(lv.omega.is_exact_zero());

    let q = Quartet::new(vec![0, 1], vec![1, 1], vec![2, 1], vec![1, 1]);
    assert_eq!(momentum_defect(&q), vec![0, 0]);
    let lv = resonance_level(&t, &q).unwrap();
    assert_eq!(lv.coeffs, vec![2, 0]);
    assert_eq!(lv.omega_interval(), (2.0, 2.0));
    assert_eq!(lv.status, ZeroStatus::NonZero);
}

#[test]
fn level_for_minus_seven_five_found_by_search() {
    // Momentum-conserving quartets only realise even coefficients, so the search
    // runs over free quartets in B_3.
    let t = one_root_two();
    let b = LatticeBox::new(2, 3);
    let modes: Vec<Vec<i64>> = b.modes().collect();
    let mut found = None;
    'search: for p in &modes {
        for q in &modes {
            for r in &modes {
                for s in &modes {
                    let cand = Quartet::new(p.clone(), q.clone(), r.clone(), s.clone());
                    if cand.coeffs() == vec![-7, 5] {
                        found = Some(cand);
                        break 'search;
                    }
                }
            }
        }
    }
    let lv = resonance_level(&t, &found.expect("a quartet realises (-7,5)")).unwrap();
    assert!((lv.omega_f64() - (5.0 * 2f64.sqrt() - 7.0)).abs() < 1e-15);
    assert!((lv.omega_f64() - 0.0710678).abs() < 1e-7);
}

#[test]
fn uncertified_near_zero_is_indeterminate() {
    let t = ThetaVector::from_entries(&["1", "2"], false, "rational").unwrap();
    // n = (2, -1) gives exactly zero but is not certifiably so.
    let q = Quartet::new(vec![1, 0], vec![0, 1], vec![1, 0], vec![1, 0]);
    let lv = resonance_level(&t, &q).unwrap();
    assert_eq!(lv.coeffs, vec![1, -1]);
    let lv = ResonanceLevel::from_coeffs(&t, vec![2, -1]).unwrap();
    assert_eq!(lv.status, ZeroStatus::IndeterminateNearZero);
    let lv = ResonanceLevel::from_coeffs(&t, vec![1, 1]).unwrap();
    assert_eq!(lv.status, ZeroStatus::NonZero);
}

#[test]
fn momentum_examples() {
    assert_eq!(momentum_defect(&Quartet::new(vec![1], vec![2], vec![3], vec![2])), vec![0]);
    assert_eq!(
        momentum_defect(&Quartet::new(vec![1, 0], vec![0, 0], vec![0, 0], vec![0, 0])),
        vec![1, 0]
    );
    assert!(resonance_level(&one_root_two(), &Quartet::new(vec![1], vec![1, 2], vec![0], vec![0])).is_err());
}

fn vec_in(d: usize, k: i64) -> impl Strategy<Value = Vec<i64>> {
    prop::collection::vec(-k..=k, d)
}

proptest! {
    #[test]
    fn pairing_is_exact_zero(p in vec_in(3, 20), r in vec_in(3, 20)) {
        let t = ThetaVector::sqrt_primes(3).unwrap();
        let lv = resonance_level(&t, &Quartet::new(p.clone(), p, r.clone(), r)).unwrap();
        prop_assert!(lv.is_exact_zero());
        prop_assert!(lv.omega.contains_zero());
    }

    #[test]
    fn symmetries(p in vec_in(3, 30), q in vec_in(3, 30), r in vec_in(3, 30), s in vec_in(3, 30)) {
        let t = ThetaVector::sqrt_primes(3).unwrap();
        let base = resonance_level(&t, &Quartet::new(p.clone(), q.clone(), r.clone(), s.clone())).unwrap();
        let qs = resonance_level(&t, &Quartet::new(p.clone(), s.clone(), r.clone(), q.clone())).unwrap();
        let pr = resonance_level(&t, &Quartet::new(r.clone(), q.clone(), p.clone(), s.clone())).unwrap();
        let neg = resonance_level(&t, &Quartet::new(q, p, s, r)).unwrap();
        prop_assert_eq!(&base, &qs);
        prop_assert_eq!(&base, &pr);
        prop_assert_eq!(neg.coeffs, base.coeffs.iter().map(|c| -c).collect::<Vec<_>>());
        prop_assert_eq!(neg.omega, base.omega.neg());
    }

    #[test]
    fn exact_zero_soundness(p in vec_in(2, 50), r in vec_in(2, 50), mask in 0u8..4) {
        let t = ThetaVector::sqrt_primes(2).unwrap();
        let pick = |bit: u8, a: i64, b: i64| if mask & bit != 0 { a } else { b };
        let q = vec![pick(1, p[0], r[0]), pick(2, p[1], r[1])];
        let s = vec![pick(1, r[0], p[0]), pick(2, r[1], p[1])];
        let lv = resonance_level(&t, &Quartet::new(p, q, r, s)).unwrap();
        prop_assert!(lv.is_exact_zero());
        prop_assert!(lv.omega.contains_zero() && lv.omega.width_f64() == 0.0);
    }

    #[test]
    fn lambda_nonnegative(p in vec_in(4, 100)) {
        let t = ThetaVector::sqrt_primes(4).unwrap();
        let l = lambda(&t, &p).unwrap();
        if p.iter().all(|&x| x == 0) {
            prop_assert!(l.is_exact_zero());
        } else {
            prop_assert!(l.lo_f64() > 0.0);
        }
        prop_assert!((l.mid_f64() - lambda_f64(&t, &p)).abs() <= 1e-12 * l.mid_f64().max(1.0));
    }

    #[test]
    fn enclosure_width(n in vec_in(3, 1000)) {
        let t = ThetaVector::sqrt_primes(3).unwrap();
        let lv = ResonanceLevel::from_coeffs(&t, n.clone()).unwrap();
        let l1: f64 = n.iter().map(|x| x.abs() as f64).sum();
        prop_assert!(lv.omega.width_f64() <= 2f64.powi(-64) * 3f64.sqrt() * l1 + 1e-300);
    }
}
