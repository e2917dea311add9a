"""Best Dirichlet Poincare constant on n x n grids against the continuous value."""

import argparse

import numpy as np

from fvineq.oracle import CONTINUOUS_BEST_CONSTANT, closed_form_lambda_min, poincare_eigen_oracle


def main(ns):
    print(f"{'n':>5} {'lambda_min':>14} {'closed form':>14} {'1/sqrt(lambda)':>15} {'rel. gap':>9}")
    for n in ns:
        r = poincare_eigen_oracle(n)
        gap = r.best_constant / CONTINUOUS_BEST_CONSTANT - 1
        print(f"{n:5d} {r.lambda_min:14.8f} {closed_form_lambda_min(n):14.8f} "
              f"{r.best_constant:15.9f} {gap:9.2e}")
    print(f"continuous 1/(pi sqrt 2) = {CONTINUOUS_BEST_CONSTANT:.9f}, "
          f"pi^2 * 2 = {2 * np.pi**2:.8f}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, nargs="+", default=[8, 16, 32, 64, 128])
    main(ap.parse_args().n)
