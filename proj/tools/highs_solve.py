#!/usr/bin/env python3
"""External backend for jcedkit: solves an MPS file with HiGHS through scipy.

Usage: highs_solve.py model.mps solution.txt [--time-limit S] [--gap G]

The limits default to $JCEDKIT_TIME_LIMIT and $JCEDKIT_GAP, which the exec
backend sets.

Writes "status <word>", "objective <value>" and one "<name> <value>" line per
column. Names restored from the "* <code> <name>" comments of jcedkit's MPS
writer are used when present.
"""

import argparse
import math
import os
import sys

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp
from scipy.sparse import csc_matrix


def read_mps(path):
    names = {}
    rows, row_index, sense = [], {}, []
    cols, col_index = [], {}
    obj_row = None
    obj, offset = [], 0.0
    ai, aj, av = [], [], []
    rhs = []
    lb, ub, integer = [], [], []
    section = None
    in_int = False

    def col(name):
        if name not in col_index:
            col_index[name] = len(cols)
            cols.append(name)
            obj.append(0.0)
            lb.append(0.0)
            ub.append(math.inf)
            integer.append(in_int)
        return col_index[name]

    with open(path) as f:
        for line in f:
            line = line.rstrip("\r\n")
            if not line:
                continue
            if line.startswith("*"):
                parts = line[1:].split()
                if len(parts) == 2:
                    names[parts[0]] = parts[1]
                continue
            tok = line.split()
            if not line[0].isspace():
                section = tok[0]
                continue
            if section == "ROWS":
                kind, name = tok
                if kind == "N":
                    obj_row = obj_row or name
                    continue
                row_index[name] = len(rows)
                rows.append(name)
                sense.append(kind)
                rhs.append(0.0)
            elif section == "COLUMNS":
                if len(tok) >= 3 and tok[1] == "'MARKER'":
                    in_int = tok[2] == "'INTORG'"
                    continue
                j = col(tok[0])
                for k in range(1, len(tok) - 1, 2):
                    v = float(tok[k + 1])
                    if tok[k] == obj_row:
                        obj[j] += v
                    else:
                        ai.append(row_index[tok[k]])
                        aj.append(j)
                        av.append(v)
            elif section == "RHS":
                for k in range(1, len(tok) - 1, 2):
                    v = float(tok[k + 1])
                    if tok[k] == obj_row:
                        offset = -v
                    else:
                        rhs[row_index[tok[k]]] = v
            elif section == "BOUNDS":
                kind, j = tok[0], col_index[tok[2]]
                val = float(tok[3]) if len(tok) > 3 else None
                if kind == "UP":
                    ub[j] = val
                elif kind == "LO":
                    lb[j] = val
                elif kind == "FX":
                    lb[j] = ub[j] = val
                elif kind == "FR":
                    lb[j], ub[j] = -math.inf, math.inf
                elif kind == "MI":
                    lb[j] = -math.inf
                elif kind == "PL":
                    ub[j] = math.inf
                elif kind == "BV":
                    lb[j], ub[j], integer[j] = 0.0, 1.0, True
                elif kind == "LI":
                    lb[j], integer[j] = val, True
                elif kind == "UI":
                    ub[j], integer[j] = val, True
                else:
                    raise ValueError("unsupported bound type " + kind)
            elif section == "RANGES":
                raise ValueError("RANGES are not supported")

    m, n = len(rows), len(cols)
    A = csc_matrix((av, (ai, aj)), shape=(m, n))
    lo = np.array([r if s in "GE" else -np.inf for r, s in zip(rhs, sense)])
    hi = np.array([r if s in "LE" else np.inf for r, s in zip(rhs, sense)])
    return {
        "names": [names.get(c, c) for c in cols],
        "c": np.array(obj),
        "offset": offset,
        "A": A,
        "lo": lo,
        "hi": hi,
        "lb": np.array(lb),
        "ub": np.array(ub),
        "integer": np.array(integer, dtype=int),
    }


def main(argv):
    ap = argparse.ArgumentParser()
    ap.add_argument("model")
    ap.add_argument("solution")
    env_limit = os.environ.get("JCEDKIT_TIME_LIMIT")
    ap.add_argument("--time-limit", type=float, default=float(env_limit) if env_limit else None)
    ap.add_argument("--gap", type=float, default=float(os.environ.get("JCEDKIT_GAP", "1e-6")))
    args = ap.parse_args(argv)

    p = read_mps(args.model)
    cons = [LinearConstraint(p["A"], p["lo"], p["hi"])] if p["A"].shape[0] else []
    options = {"mip_rel_gap": args.gap, "presolve": True}
    if args.time_limit:
        options["time_limit"] = args.time_limit
    res = milp(p["c"], constraints=cons, integrality=p["integer"], bounds=Bounds(p["lb"], p["ub"]),
               options=options)
    status = {0: "optimal", 1: "limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    with open(args.solution, "w") as out:
        out.write("status %s\n" % status)
        if res.x is not None:
            out.write("objective %r\n" % (float(res.fun) + p["offset"]))
            for name, v in zip(p["names"], res.x):
                out.write("%s %r\n" % (name, float(v)))
    return 0 if status != "error" else 1


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
