"""Sample size and trial length for the default dialysis-trial planning inputs, plus a small sensitivity grid."""
import argparse

from crossover.planning import PlanInputs, plan_trial


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau0", type=float, default=5.0)
    ap.add_argument("--sigma", type=float, default=22.0)
    ap.add_argument("--n3", type=int, default=4)
    ap.add_argument("--n2", type=int, default=2)
    args = ap.parse_args()

    plan = plan_trial(PlanInputs(args.tau0, args.sigma, n3=args.n3, n2=args.n2), round_even=False)
    print(f"m={plan.m} w={plan.weeks} planned_m={plan.planned_m} var={plan.variance:.4f}")
    print("\npower  alpha    m   w")
    for power in (0.8, 0.9):
        for alpha in (0.05, 0.01):
            p = plan_trial(PlanInputs(args.tau0, args.sigma, alpha, power, args.n3, args.n2))
            print(f"{power:5.2f} {alpha:6.2f} {p.m:4d} {p.weeks:3d}")


if __name__ == "__main__":
    main()
