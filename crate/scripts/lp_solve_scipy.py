#!/usr/bin/env python3
"""Solve an LP-format model written by hcsp with scipy's HiGHS MILP solver.

usage: lp_solve_scipy.py MODEL.lp SOLUTION.txt [--time-limit SECONDS]
       lp_solve_scipy.py --check

Only the subset of the CPLEX LP format that hcsp writes is understood:
one objective, named rows, `>= 0` bounds and a Binaries section.
"""
import argparse
import re
import sys

TERM = re.compile(r"([+-])\s*([0-9]+(?:\.[0-9]*)?(?:[eE][+-]?[0-9]+)?)\s+([A-Za-z_][A-Za-z0-9_]*)")
SENSE = re.compile(r"(<=|>=|=)\s*(-?[0-9.eE+-]+)\s*$")


def parse(text):
    section = None
    objective, rows, binaries = [], [], []
    names, index = [], {}

    def var(name):
        if name not in index:
            index[name] = len(names)
            names.append(name)
        return index[name]

    current = None
    for raw in text.splitlines():
        line = raw.rstrip()
        if not line or line.startswith("\\"):
            continue
        word = line.strip()
        if word in ("Minimize", "Subject To", "Bounds", "Binaries", "End"):
            section = word
            current = None
            continue
        if section == "Minimize":
            body = word.split(":", 1)[1] if ":" in word and not raw.startswith("  ") else word
            objective.append(body)
        elif section == "Subject To":
            if raw.startswith("  "):
                current[1] += " " + word
            else:
                name, body = word.split(":", 1)
                current = [name, body]
                rows.append(current)
        elif section == "Bounds":
            var(word.split()[0])
        elif section == "Binaries":
            binaries.append(var(word))

    def terms(body):
        out = {}
        for sign, coef, name in TERM.findall(body):
            k = var(name)
            out[k] = out.get(k, 0.0) + (-1.0 if sign == "-" else 1.0) * float(coef)
        return out

    obj = terms(" ".join(objective))
    parsed = []
    for name, body in rows:
        m = SENSE.search(body)
        if not m:
            raise ValueError(f"row {name}: no sense")
        parsed.append((name, terms(body[: m.start()]), m.group(1), float(m.group(2))))
    return names, obj, parsed, set(binaries)


def solve(text, time_limit):
    import numpy as np
    from scipy.optimize import Bounds, LinearConstraint, milp
    from scipy.sparse import coo_array

    names, obj, rows, binaries = parse(text)
    n = len(names)
    c = np.zeros(n)
    for k, v in obj.items():
        c[k] = v
    ri, ci, vals, lo, hi = [], [], [], [], []
    for r, (_, t, sense, rhs) in enumerate(rows):
        for k, v in t.items():
            ri.append(r)
            ci.append(k)
            vals.append(v)
        lo.append(rhs if sense in (">=", "=") else -np.inf)
        hi.append(rhs if sense in ("<=", "=") else np.inf)
    integrality = np.array([1 if k in binaries else 0 for k in range(n)])
    upper = np.array([1.0 if k in binaries else np.inf for k in range(n)])
    constraints = []
    if rows:
        a = coo_array((vals, (ri, ci)), shape=(len(rows), n)).tocsr()
        constraints.append(LinearConstraint(a, lo, hi))
    options = {"time_limit": time_limit} if time_limit else {}
    res = milp(c, constraints=constraints, integrality=integrality, bounds=Bounds(np.zeros(n), upper), options=options)
    status = {0: "optimal", 1: "limit", 2: "infeasible", 3: "unbounded"}.get(res.status, "error")
    if res.x is not None and status == "limit":
        status = "feasible"
    return status, names, res.x


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("model", nargs="?")
    p.add_argument("solution", nargs="?")
    p.add_argument("--time-limit", type=float, default=None)
    p.add_argument("--check", action="store_true", help="exit 0 when scipy's MILP solver is importable")
    args = p.parse_args()
    if args.check:
        from scipy.optimize import milp  # noqa: F401
        return 0
    if not args.model or not args.solution:
        p.error("MODEL and SOLUTION are required")
    with open(args.model) as f:
        status, names, x = solve(f.read(), args.time_limit)
    with open(args.solution, "w") as f:
        f.write(f"status={status}\n")
        if x is not None and status in ("optimal", "feasible"):
            for name, v in zip(names, x):
                f.write(f"{name}={float(v)!r}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
