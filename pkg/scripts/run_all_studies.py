"""Run every case study at its reference parameters and write one CSV per study."""
import argparse
import csv
import pathlib

import numpy as np

from steinkit.casestudies import (exp_max_uniform_study, frechet_study, gauss_gauss_study,
                                  gumbel_study, poisson_binomial_study, rademacher_clt_study,
                                  student_gauss_study)


def sweeps():
    yield "exp-max-uniform", [exp_max_uniform_study(100, 0.5)]
    yield "frechet", [frechet_study(n, a) for n in (5, 10, 50, 100) for a in (1.0, 2.0)]
    yield "gumbel", [gumbel_study(n) for n in (2, 10, 100)]
    yield "student-gauss", [student_gauss_study(nu) for nu in (3, 5, 10, 50)]
    grid = np.linspace(0.5, 3.0, 10)
    yield "gauss-gauss", [gauss_gauss_study(a, b) for a in grid for b in grid]
    rng = np.random.default_rng(0)
    yield "poisson-binomial", [poisson_binomial_study(rng.uniform(0.01, 0.99, k))
                               for k in range(1, 11)]
    yield "rademacher", [rademacher_clt_study(n) for n in (4, 8, 16, 32, 64)]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="results")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name, results in sweeps():
        rows = [row for res in results for row in res.rows()]
        keys = list(dict.fromkeys(k for r in rows for k in r))
        with open(out / f"{name}.csv", "w", newline="") as fh:
            w = csv.DictWriter(fh, keys)
            w.writeheader()
            for r in rows:
                w.writerow({k: (format(v, ".17g") if isinstance(v, float) else v)
                            for k, v in r.items()})
        sound = all(res.sound for res in results)
        print(f"{name:18s} points={len(rows):3d} sound={sound}")


if __name__ == "__main__":
    main()
