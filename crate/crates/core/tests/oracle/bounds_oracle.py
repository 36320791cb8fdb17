"""Arbitrary-precision reference values for the sensitivity bounds and the
per-round epsilon accountant.

Run with `python3 bounds_oracle.py`; the printed Rust arrays are pasted into
`tests/bounds_oracle.rs`. Written against mpmath only, so it shares no code
path with the crate.
"""

from mpmath import mp, mpf, sqrt, log, ceil

mp.dps = 60


def sensitivities(l, G, D, d, delta):
    l, G, D, d, delta = mpf(l), mpf(G), mpf(D), mpf(d), mpf(delta)
    ln2 = log(2 / delta)
    cross = 2 * sqrt(d) * D * ln2 / G * (l - 1)
    d_inf = l + 1
    d_1 = sqrt(d) * D / G * (l - 1) + sqrt(cross) + mpf(4) / 3 * ln2
    d_2 = D / G * (l - 1) + sqrt(d_1 + cross)
    return d_inf, d_1, d_2


def constants(p):
    p = mpf(p)
    sq = p**2 + (1 - p) ** 2
    b = mpf(2) / 3 * sq + (1 - 2 * p)
    c = sqrt(2) * (3 * p**3 + 3 * (1 - p) ** 3 + 2 * p**2 + 2 * (1 - p) ** 2)
    dd = mpf(4) / 3 * sq
    return b, c, dd


def epsilon(l, m, G, D, d, delta, p):
    d_inf, d_1, d_2 = sensitivities(l, G, D, d, delta)
    b, c, dd = constants(p)
    delta, p, d = mpf(delta), mpf(p), mpf(d)
    v = mpf(m) * p * (1 - p)
    t1 = d_2 * sqrt(2 * log(mpf("1.25") / delta)) / sqrt(v)
    t2 = (d_2 * c * sqrt(2 * log(10 / delta)) + d_1 * b) / (v * (1 - delta / 10))
    t3 = (mpf(2) / 3 * d_inf * log(mpf("1.25") / delta)
          + d_inf * dd * log(20 * d / delta) * log(10 / delta)) / v
    return t1 + t2 + t3


def gate_min_m(l, G, d, delta, p):
    G, d, delta, p = mpf(G), mpf(d), mpf(delta), mpf(p)
    need = max(23 * log(10 * d / delta), (mpf(l) ** 2 - 1) / G)
    return int(ceil(need / (p * (1 - p))))


# (l, G, D, d, delta)
SENS_POINTS = [
    (2, 4, 4, 10, "0.01"),
    (3, 4, 4, 10, "0.01"),
    (5, 4, 4, 10, "0.01"),
    (16, 4, 4, 10, "0.01"),
    (32, 4, 4, 10, "0.01"),
    (2, 1, 1, 1, "0.1"),
    (7, 2, 3, 5, "0.05"),
    (9, 4, 1, 100, "0.001"),
    (64, "0.5", 2, 20, "0.00001"),
    (4, 10, 4, 10, "0.01"),
]

# (l, m, G, D, d, delta, p); m = None means smallest m passing the gate
EPS_POINTS = [
    (2, None, 4, 4, 10, "0.01", "0.5"),
    (3, 2000, 4, 4, 10, "0.01", "0.5"),
    (5, 5000, 4, 4, 10, "0.01", "0.5"),
    (16, 100000, 4, 4, 10, "0.01", "0.5"),
    (9, None, 4, 4, 10, "0.01", "0.5"),
    (2, None, 1, 1, 1, "0.1", "0.5"),
    (7, 4000, 2, 3, 5, "0.05", "0.3"),
    (9, None, 4, 1, 100, "0.001", "0.25"),
    (64, 10**7, "0.5", 2, 20, "0.00001", "0.5"),
    (4, 123456, 10, 4, 10, "0.01", "0.7"),
]


def main():
    print("// (l, G, D, d, delta, delta_inf, delta_1, delta_2)")
    for (l, G, D, d, delta) in SENS_POINTS:
        di, d1, d2 = sensitivities(l, G, D, d, delta)
        print(f"    ({l}, {mpf(G)}, {mpf(D)}, {d}, {mpf(delta)}, {mp.nstr(di, 20)}, "
              f"{mp.nstr(d1, 20)}, {mp.nstr(d2, 20)}),")
    print("// (l, m, G, D, d, delta, p, epsilon)")
    for (l, m, G, D, d, delta, p) in EPS_POINTS:
        if m is None:
            m = gate_min_m(l, G, d, delta, p)
        e = epsilon(l, m, G, D, d, delta, p)
        print(f"    ({l}, {m}, {mpf(G)}, {mpf(D)}, {d}, {mpf(delta)}, {mpf(p)}, {mp.nstr(e, 20)}),")


if __name__ == "__main__":
    main()
