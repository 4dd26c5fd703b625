"""Independent evaluation of the interference Laplace transform and Zipf weights.

Direct polar integration with scipy; prints values frozen into the C++ tests.
"""
import math
import warnings

import mpmath
from scipy import integrate, stats

P, ALPHA_O, LAM, LAM_P, M = 1.0, 3.0, 0.1, 1e-4, 10
D, DG = 30.0, 2.0


def arc(y, x):
    """Length of the circle of radius y about the origin inside the disk b(x, D)."""
    if x == 0.0:
        return 2 * math.pi * y if y < D else 0.0
    c = (y * y + x * x - D * D) / (2 * x * y)
    if c <= -1:
        return 2 * math.pi * y
    if c >= 1:
        return 0.0
    return 2 * y * math.acos(c)


def area(x):
    if x >= D + DG:
        return math.pi * D * D
    lo, hi = max(DG, x - D), x + D
    pts = [p for p in (D - x, x - D) if lo < p < hi]
    return integrate.quad(lambda y: arc(y, x), lo, hi, points=pts or None, limit=400, epsabs=0, epsrel=1e-10)[0]


def one_minus_psi(s, x, g):
    """1 - E[1/(1 + sP y^-a)] over the cloud at x, integrated directly."""
    lo, hi = max(DG, x - D), x + D
    pts = [p for p in (D - x, x - D) if lo < p < hi]
    f = lambda y: arc(y, x) * s * P / (y**ALPHA_O + s * P)
    return integrate.quad(f, lo, hi, points=pts or None, limit=400, epsabs=0, epsrel=1e-11)[0] / g


def one_minus_phi(s, x):
    g = area(x)
    mu = LAM * g
    log_v = math.log1p(-one_minus_psi(s, x, g))
    pois = stats.poisson(mu)
    total = 0.0
    for j in range(1, M):
        total += pois.pmf(j) * -math.expm1(j * log_v)
    total += pois.sf(M - 1) * -math.expm1(M * log_v)
    return total


def lt(s):
    f = lambda x: one_minus_phi(s, x) * x
    pieces = [0, 10, 20, 28, 30, 32, 36, 45, 60, 80, 120, 200, 400, 800, 1600, 3200, 6400, 12800]
    acc = 0.0
    for a, b in zip(pieces, pieces[1:]):
        acc += integrate.quad(f, a, b, limit=200, epsabs=0, epsrel=1e-11)[0]
    # beyond the last piece x (1 - phi) decays like x^-2
    acc += f(pieces[-1]) * pieces[-1]
    return math.exp(-2 * math.pi * LAM_P * acc)


def zipf(n, gamma):
    mpmath.mp.dps = 40
    w = [mpmath.mpf(i) ** -gamma for i in range(1, n + 1)]
    z = mpmath.fsum(w)
    return [float(v / z) for v in w]


if __name__ == "__main__":
    warnings.simplefilter("ignore")
    for s in (10.0, 100.0, 1e3, 1e4):
        print(f"L({s:g}) = {lt(s):.12g}")
    print("zipf(20, 0.7) =", ", ".join(f"{v:.17g}" for v in zipf(20, 0.7)))
    print("lens(D, D)/D^2 =", repr(2 * math.pi / 3 - math.sqrt(3) / 2))
