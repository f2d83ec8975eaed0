"""High-precision reference values for the scalar benchmark.

a = 0.9, b = c = q = r = 1, process variance 1, observation variance 0.

Solves the scalar optimality conditions with mpmath at 30 digits by nested
bracketing (outer unknown d, inner unknown state variance) and prints C++
constants for tests/oracles/frozen_values.h. Run:

    python3 tests/oracles/scalar_reference.py > tests/oracles/frozen_values.h
"""

from mpmath import mp, mpf, log, sqrt

mp.dps = 30
a, b, q, r, sxi = mpf("0.9"), mpf(1), mpf(1), mpf(1), mpf(1)


def bisect(f, lo, hi, it=150):
    flo = f(lo)
    for _ in range(it):
        mid = (lo + hi) / 2
        fm = f(mid)
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return (lo + hi) / 2


def backward(s, d, beta):
    # Σx̂y = s (full observation); Z = d / (s (1 - d)); M = Z / β
    M = d / (beta * s * (1 - d))
    S = (q - M) / (1 - a * a)
    G = r + b * b * S
    if G <= 0:
        return None
    L = -a * b * S / G
    return M, S, L, L * L * G


def state_gap(s, d, beta):
    bw = backward(s, d, beta)
    if bw is None:
        return None
    den = 1 - (a + b * bw[2]) ** 2 * d - a * a * (1 - d)
    if den <= 0:
        return None
    return sxi / den - s


def sign_changes(f, grid):
    out, prev = [], None
    for x in grid:
        v = f(x)
        if v is not None and prev is not None and prev[1] is not None and (v > 0) != (prev[1] > 0):
            out.append((prev[0], x))
        prev = (x, v)
    return out


SGRID = [mpf(10) ** (mpf(i) / 100 - 2) for i in range(0, 400)]


def inner(d, beta):
    f = lambda s: state_gap(s, d, beta)
    return [bisect(f, lo, hi) for lo, hi in sign_changes(f, SGRID)]


def outer_gap(d, beta):
    ss = inner(d, beta)
    if len(ss) != 1:
        return None
    s = ss[0]
    _, _, _, N = backward(s, d, beta)
    return d - max(mpf(0), 1 - 1 / (beta * s * N))


def solve(beta):
    f = lambda d: outer_gap(d, beta)
    brackets = sign_changes(f, [mpf(i) / 200 for i in range(1, 200)])
    assert len(brackets) == 1, brackets
    d = bisect(f, *brackets[0])
    s = inner(d, beta)[0]
    M, S, L, N = backward(s, d, beta)
    return dict(d=d, state_var=s, S=S, L=L, N=N, M=M, lam=s * N,
                info=-log(1 - d) / 2, cost=(q * s + r * L * L * d * s) / 2)


def emit(name, value):
    print(f"inline constexpr double {name} = {mp.nstr(value, 17)};")


print("#pragma once")
print()
print("// Generated by tests/oracles/scalar_reference.py (mpmath, 30 digits).")
print("// Scalar benchmark a = 0.9, b = c = q = r = 1, variances 1 and 0.")
print()
print("namespace oracle::frozen {")
print()
sx0 = sxi / (1 - a * a)
S0 = q / (1 - a * a)
L0 = -a * b * S0 / (r + b * b * S0)
N0 = L0 * L0 * (r + b * b * S0)
emit("kZeroStateVar", sx0)
emit("kZeroCostToGo", S0)
emit("kZeroCost", q * sx0 / 2)
emit("kZeroGain", L0)
emit("kZeroN", N0)
emit("kZeroLambda", sx0 * N0)
emit("kFirstCriticalBeta", 1 / (sx0 * N0))
print()
for tag, beta in [("B006", "0.06"), ("B01", "0.1"), ("B1", "1"), ("B10", "10")]:
    res = solve(mpf(beta))
    print(f"// beta = {beta}")
    emit(f"k{tag}Beta", mpf(beta))
    for key in ["d", "state_var", "S", "L", "N", "M", "lam", "info", "cost"]:
        camel = "".join(p.capitalize() for p in key.split("_"))
        emit(f"k{tag}{camel}", res[key])
    print()
S = (a * a + sqrt(a ** 4 + 4)) / 2  # root of S² − a²S − 1 = 0 (q = r = b = 1)
L = -a * b * S / (r + b * b * S)
s = sxi / (1 - (a + b * L) ** 2)
print("// classic full-information limit")
emit("kLqrCostToGo", S)
emit("kLqrGain", L)
emit("kLqrStateVar", s)
emit("kLqrCost", (q * s + r * L * L * s) / 2)
print()
print("}  // namespace oracle::frozen")
