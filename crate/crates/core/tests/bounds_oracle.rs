//! Sensitivity bounds and per-round ε against 60-digit reference values from
//! `oracle/bounds_oracle.py`.

#![allow(clippy::excessive_precision, clippy::type_complexity)]

use binldp::privacy::{Accountant, MechanismConstants};

// (l, G, D, d, delta, delta_inf, delta_1, delta_2)
const SENS: [(u64, f64, f64, usize, f64, f64, f64, f64); 10] = [
    (2, 4.0, 4.0, 10, 0.01, 3.0, 16.015439995165584382, 8.0373959164309928758),
    (3, 4.0, 4.0, 10, 0.01, 4.0, 21.575491932564713983, 11.412464847819234929),
    (5, 4.0, 4.0, 10, 0.01, 6.0, 31.291012155270545191, 16.858033182139742165),
    (16, 4.0, 4.0, 10, 0.01, 17.0, 76.918278496051571167, 39.074068992124327141),
    (32, 4.0, 4.0, 10, 0.01, 33.0, 137.32536633051093283, 65.294604623802937976),
    (2, 1.0, 1.0, 1, 0.1, 3.0, 7.4420565287528045376, 4.6651768137241055242),
    (7, 2.0, 3.0, 5, 0.05, 8.0, 37.2281304143412548, 22.627276484241473536),
    (9, 4.0, 1.0, 100, 0.001, 10.0, 47.571167548247084197, 20.751193720132336648),
    (64, 0.5, 2.0, 20, 0.00001, 65.0, 1309.1203116163921019, 421.76771586704052847),
    (4, 10.0, 4.0, 10, 0.01, 5.0, 17.200402403960981558, 8.7770577370957004722),
];

// (l, m, G, D, d, delta, p, epsilon)
const EPS: [(u64, u64, f64, f64, usize, f64, f64, f64); 10] = [
    (2, 848, 4.0, 4.0, 10, 0.01, 0.5, 2.7806222646330290849),
    (3, 2000, 4.0, 4.0, 10, 0.01, 0.5, 2.2011963822024843039),
    (5, 5000, 4.0, 4.0, 10, 0.01, 0.5, 1.8486175171052222915),
    (16, 100000, 4.0, 4.0, 10, 0.01, 0.5, 0.81656753858689929047),
    (9, 848, 4.0, 4.0, 10, 0.01, 0.5, 9.0065896014869567263),
    (2, 424, 1.0, 1.0, 1, 0.1, 0.5, 1.8839783465823712979),
    (7, 4000, 2.0, 3.0, 5, 0.05, 0.3, 2.6158847974422276877),
    (9, 1695, 4.0, 1.0, 100, 0.001, 0.25, 9.2022243946455698278),
    (64, 10000000, 0.5, 2.0, 20, 0.00001, 0.5, 1.299113016177494045),
    (4, 123456, 10.0, 4.0, 10, 0.01, 0.7, 0.18425185522108183269),
];

fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

#[test]
fn sensitivities_match_reference() {
    for (l, g, dd, d, delta, dinf, d1, d2) in SENS {
        let s = binldp::privacy::sensitivity_bounds(l, g, dd, d, delta).unwrap();
        assert_eq!(s.delta_inf, dinf, "l = {l}");
        assert!(rel(s.delta_1, d1) < 1e-9, "delta_1 at l = {l}: {} vs {d1}", s.delta_1);
        assert!(rel(s.delta_2, d2) < 1e-9, "delta_2 at l = {l}: {} vs {d2}", s.delta_2);
    }
}

#[test]
fn delta_inf_is_levels_plus_one() {
    for l in 2..=32u64 {
        let s = binldp::privacy::sensitivity_bounds(l, 4.0, 4.0, 10, 0.01).unwrap();
        assert_eq!(s.delta_inf, (l + 1) as f64);
    }
}

#[test]
fn epsilon_matches_reference() {
    for (l, m, g, dd, d, delta, p, eps) in EPS {
        let acc = Accountant::new(d, delta, p, g, dd, MechanismConstants::for_p(p)).unwrap();
        let e = acc.epsilon(l, m).unwrap();
        assert!(rel(e, eps) < 1e-9, "(l, m) = ({l}, {m}): {e} vs {eps}");
    }
}
