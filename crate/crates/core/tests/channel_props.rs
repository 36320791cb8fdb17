use binldp::channel::{capacity, feasible, rate_of, ChannelConfig, ClientSet, RateVector};
use proptest::prelude::*;

proptest! {
    #[test]
    fn capacity_grows_with_the_subset(powers in prop::collection::vec(0.01f64..100.0, 1..=5)) {
        let ch = ChannelConfig::new(10, powers).unwrap();
        for s in ch.subsets() {
            for i in 0..ch.clients() {
                if !s.contains(i) {
                    let bigger = ClientSet(s.0 | 1 << i);
                    prop_assert!(capacity(bigger, &ch).unwrap() > capacity(s, &ch).unwrap());
                }
            }
        }
    }

    #[test]
    fn shrinking_rates_keeps_feasibility(
        powers in prop::collection::vec(0.1f64..50.0, 1..=4),
        scale in prop::collection::vec(0.0f64..1.0, 4),
    ) {
        let ch = ChannelConfig::new(20, powers).unwrap();
        let n = ch.clients();
        // successive-decoding corner point, pulled slightly inside
        let prefix = |k: usize| if k == 0 { 0.0 } else { capacity(ClientSet((1 << k) - 1), &ch).unwrap() };
        let corner: Vec<f64> = (0..n).map(|i| (prefix(i + 1) - prefix(i)) * (1.0 - 1e-9)).collect();
        prop_assert!(feasible(&RateVector::new(corner.clone()).unwrap(), &ch).unwrap().ok);
        let smaller: Vec<f64> = corner.iter().zip(&scale).map(|(r, s)| r * s).collect();
        prop_assert!(feasible(&RateVector::new(smaller).unwrap(), &ch).unwrap().ok);
    }

    #[test]
    fn rate_grows_with_alphabet(l in 2u64..1000, m in 1u64..100_000) {
        prop_assert!(rate_of(l, m + 1, 10, 40).unwrap() > rate_of(l, m, 10, 40).unwrap());
        prop_assert!(rate_of(l + 1, m, 10, 40).unwrap() > rate_of(l, m, 10, 40).unwrap());
    }
}
