"""Null and alternative behaviour of the randomization test on the planned design."""
import argparse

import numpy as np
from scipy import stats

from crossover import rng as rngmod
from crossover.analysis import RandomizationScheme, randomization_test
from crossover.construction import construct_design
from crossover.design import ModelParams
from crossover.simulation import MissingnessSpec, simulate_trial


def p_values(tau, n_data, n_rep, miss, seed):
    out = []
    for k in range(n_data):
        d = construct_design(7, 2, 10, seed=rngmod.substream(seed, 0, k))
        data = simulate_trial(d, ModelParams(tau=tau, sigma=1.0), miss=miss, seed=rngmod.substream(seed, 1, k))
        out.append(randomization_test(data, RandomizationScheme.for_data(data), n_rep,
                                      seed=rngmod.substream(seed, 2, k)).p_value)
    return np.array(out)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--datasets", type=int, default=200)
    ap.add_argument("--reps", type=int, default=500)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    miss = MissingnessSpec(final_period_loss=True, tail_losses={"8": 4})
    for tau in (0.0, 0.1, 0.2):
        ps = p_values(tau, args.datasets, args.reps, miss, args.seed)
        ks = stats.kstest(ps, "uniform").pvalue
        print(f"tau={tau:.1f}  reject@5%={np.mean(ps <= 0.05):.3f}  KS p={ks:.3f}")


if __name__ == "__main__":
    main()
