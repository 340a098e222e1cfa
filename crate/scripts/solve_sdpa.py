"""Solve an SDPA sparse (.dat-s) file with cvxpy and print the optimal value.

Usage: python3 solve_sdpa.py problem.dat-s [solver]

The file is read as the SDPA dual: max <F0, Y> s.t. <Fi, Y> = ci, Y psd.
Negative block sizes are diagonal blocks.
"""

import sys

import cvxpy as cp
import numpy as np


def tokens(line):
    for ch in "{}(),":
        line = line.replace(ch, " ")
    return line.split()


def read(path):
    with open(path) as f:
        lines = [l.strip() for l in f if l.strip() and l.strip()[0] not in '"*']
    m = int(tokens(lines[0])[0])
    nb = int(tokens(lines[1])[0])
    sizes = [int(t) for t in tokens(lines[2])[:nb]]
    c = []
    k = 3
    while len(c) < m:
        c += [float(t) for t in tokens(lines[k])]
        k += 1
    mats = [[np.zeros((abs(s), abs(s))) for s in sizes] for _ in range(m + 1)]
    for line in lines[k:]:
        i, b, r, s, v = line.split()
        i, b, r, s = int(i), int(b) - 1, int(r) - 1, int(s) - 1
        mats[i][b][r, s] = float(v)
        mats[i][b][s, r] = float(v)
    return sizes, np.array(c), mats


def solve(path, solver):
    sizes, c, mats = read(path)
    ys = []
    cons = []
    for s in sizes:
        if s > 0:
            y = cp.Variable((s, s), symmetric=True)
            cons.append(y >> 0)
        else:
            y = cp.Variable(-s, nonneg=True)
        ys.append(y)

    def pair(f):
        terms = []
        for s, y, a in zip(sizes, ys, f):
            if not a.any():
                continue
            terms.append(cp.sum(cp.multiply(a, y)) if s > 0 else np.diag(a) @ y)
        return sum(terms) if terms else 0

    for i in range(len(c)):
        cons.append(pair(mats[i + 1]) == c[i])
    prob = cp.Problem(cp.Maximize(pair(mats[0])), cons)
    prob.solve(solver=solver)
    return prob.value


if __name__ == "__main__":
    solver = sys.argv[2] if len(sys.argv) > 2 else "CLARABEL"
    print(repr(float(solve(sys.argv[1], solver))))
