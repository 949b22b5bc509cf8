"""Empirical convergence rates of the oracle distances on a dyadic sweep."""
from steinkit.casestudies import frechet_study, gumbel_study, rademacher_clt_study, rate_slope

DYADIC = [16, 32, 64, 128, 256, 512, 1024]


def main():
    fr = [frechet_study(n, 1.0).reports[0] for n in DYADIC]
    gu = [gumbel_study(n).reports[0] for n in DYADIC]
    small = [4, 8, 16, 32, 64]
    ra = [rademacher_clt_study(n).reports[0] for n in small]
    for name, ns, reps in (("frechet", DYADIC, fr), ("gumbel", DYADIC, gu),
                           ("rademacher", small, ra)):
        d = [r.oracle_distance for r in reps]
        b = [r.bound for r in reps]
        print(f"{name:11s} oracle slope {rate_slope(ns, d):+.3f}  bound slope {rate_slope(ns, b):+.3f}")


if __name__ == "__main__":
    main()
