"""DDFV demo solver: errors and observed orders for manufactured solutions."""

import argparse
from dataclasses import dataclass, field

from fvineq.solver import convergence_study


@dataclass
class ConvergenceConfig:
    levels: list[int] = field(default_factory=lambda: [2, 3, 4, 5, 6])
    tensor: str = "iso"
    mms: str = "sin"
    family: str = "square"


def run(cfg: ConvergenceConfig):
    rows = convergence_study(cfg.levels, A=cfg.tensor, mms=cfg.mms, family=cfg.family)
    print(f"{'level':>5} {'h':>10} {'unknowns':>9} {'L2 error':>11} {'order':>6} "
          f"{'H1 error':>11} {'CG its':>6} {'||u||/|u|':>9}")
    for r in rows:
        print(f"{r.level:5d} {r.h:10.4g} {r.unknowns:9d} {r.error_l2:11.4e} {r.order_l2:6.2f} "
              f"{r.error_h1:11.4e} {r.iterations:6d} {r.stability:9.4f}")
    return rows


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--levels", type=int, nargs="+", default=[2, 3, 4, 5, 6])
    ap.add_argument("--tensor", default="iso", choices=("iso", "aniso"))
    ap.add_argument("--mms", default="sin", choices=("sin", "poly"))
    ap.add_argument("--family", default="square", choices=("square", "perturbed"))
    a = ap.parse_args()
    run(ConvergenceConfig(a.levels, a.tensor, a.mms, a.family))
