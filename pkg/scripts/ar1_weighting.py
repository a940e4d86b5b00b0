"""Compare the alternating-heavy sequence weights with uniform weights under AR(1) errors."""
import argparse

import numpy as np

from crossover.construction import construct_design, default_weights, uniform_weights
from crossover.design import ModelParams
from crossover.simulation import ErrorModel, variance_mc


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--designs", type=int, default=200)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--rho", type=float, nargs="+", default=[0.0, 0.3, 0.6])
    args = ap.parse_args()

    print("rho   weights   mean var x 160")
    for rho in args.rho:
        err = ErrorModel("ar1", 1.0, rho)
        for name, weights in (("paper", default_weights()), ("uniform", uniform_weights())):
            vs = [variance_mc(construct_design(4, 2, 10, weights, seed=1000 + k), ModelParams(tau=0.0),
                              err, reps=args.reps, seed=k) for k in range(args.designs)]
            print(f"{rho:4.2f}  {name:8s}  {160 * np.mean(vs):.4f}")


if __name__ == "__main__":
    main()
