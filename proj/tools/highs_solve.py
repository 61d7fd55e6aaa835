#!/usr/bin/env python3
"""Solve an MPS file with HiGHS and write a hubopt solution file.

Usage: highs_solve.py MODEL.mps SOLUTION.sol [--time-limit S] [--gap G]
Use as:  hubopt solve --solver external --solver-cmd "python3 tools/highs_solve.py {mps} {sol}"
"""
import argparse
import math
import sys

import highspy

STATUS = {
    "Optimal": "Optimal",
    "Infeasible": "Infeasible",
    "Unbounded": "Unbounded",
    "Primal infeasible or unbounded": "Infeasible",
    "Time limit reached": "GapLimit",
    "Iteration limit reached": "IterationLimit",
    "Solution limit reached": "GapLimit",
    "Interrupted by user": "GapLimit",
}


def number(v):
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return repr(float(v))


def main():
    p = argparse.ArgumentParser()
    p.add_argument("mps")
    p.add_argument("sol")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--gap", type=float, default=1e-4)
    a = p.parse_args()

    h = highspy.Highs()
    h.setOptionValue("output_flag", False)
    h.setOptionValue("mip_rel_gap", a.gap)
    h.setOptionValue("primal_feasibility_tolerance", 1e-9)
    h.setOptionValue("mip_feasibility_tolerance", 1e-9)
    if a.time_limit:
        h.setOptionValue("time_limit", a.time_limit)
    if h.readModel(a.mps) != highspy.HighsStatus.kOk:
        print(f"cannot read {a.mps}", file=sys.stderr)
        return 1
    h.run()
    status = STATUS.get(h.modelStatusToString(h.getModelStatus()), "IterationLimit")
    info = h.getInfo()
    sol = h.getSolution()
    has_values = status in ("Optimal", "GapLimit") and sol.value_valid
    if status == "GapLimit" and not sol.value_valid:
        status = "IterationLimit"
    lp = h.getLp()
    with open(a.sol, "w") as f:
        f.write(f"# status {status}\n")
        if has_values:
            f.write(f"# objective {number(info.objective_function_value)}\n")
            if lp.integrality_ and any(int(t) != 0 for t in lp.integrality_):
                f.write(f"# best_bound {number(info.mip_dual_bound)}\n")
            names = lp.col_names_
            for j, v in enumerate(sol.col_value):
                f.write(f"{names[j]} {number(v)}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
