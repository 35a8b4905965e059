use codeprov_core::eval::{metrics, split, ConfusionCounts, Metric};
use codeprov_core::model::ProvenanceLabel;
use codeprov_core::Exact;
use num_rational::Ratio;
use proptest::prelude::*;

fn label(k: u8) -> ProvenanceLabel {
    if k.is_multiple_of(3) { ProvenanceLabel::Ai } else { ProvenanceLabel::Human }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn f1_is_harmonic_mean(tp in 0u64..50, fp in 0u64..50, fn_ in 0u64..50, tn in 0u64..50) {
        prop_assume!(tp + fp + fn_ + tn > 0);
        let m = metrics::<Exact>(ConfusionCounts::new(tp, fp, fn_, tn)).unwrap();
        prop_assert_eq!(m.accuracy, Ratio::new((tp + tn) as i128, (tp + fp + fn_ + tn) as i128));
        match (m.precision, m.recall, m.f1) {
            (Metric::Defined(p), Metric::Defined(r), Metric::Defined(f)) => {
                if p + r == Ratio::from_integer(0) {
                    prop_assert_eq!(f, Ratio::from_integer(0));
                } else {
                    prop_assert_eq!(f, Ratio::from_integer(2) * p * r / (p + r));
                }
            }
            (_, _, f) => prop_assert_eq!(f, Metric::Undefined),
        }
    }

    #[test]
    fn split_is_stratified_and_deterministic(labels in prop::collection::vec(any::<u8>(), 2..200), pct in 1u32..100, seed in any::<u64>()) {
        let items: Vec<(usize, u8)> = labels.into_iter().enumerate().collect();
        let fraction = pct as f64 / 100.0;
        let (a, b) = split(&items, |x| label(x.1), fraction, seed).unwrap();
        prop_assert_eq!(a.len() + b.len(), items.len());
        prop_assert_eq!(a.len(), (fraction * items.len() as f64).round() as usize);
        for target in [ProvenanceLabel::Ai, ProvenanceLabel::Human] {
            let total = items.iter().filter(|x| label(x.1) == target).count() as f64;
            let got = a.iter().filter(|x| label(x.1) == target).count() as f64;
            prop_assert!((got - fraction * total).abs() <= 1.0 + 1e-9);
        }
        let mut ids: Vec<usize> = a.iter().chain(&b).map(|x| x.0).collect();
        ids.sort();
        prop_assert_eq!(ids, (0..items.len()).collect::<Vec<_>>());
        prop_assert_eq!(split(&items, |x| label(x.1), fraction, seed).unwrap(), (a, b));
    }
}
