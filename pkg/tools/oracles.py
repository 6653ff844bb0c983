#!/usr/bin/env python3
"""Independent reference computations for the frozen test constants.

Every numeric expectation asserted in tests/ is recomputed here from the
closed-form definitions alone, using 50-digit arithmetic (mpmath), so that
an algebra mistake in the library cannot silently agree with its own test.
This script deliberately does NOT import cran_sched.

Run ``python tools/oracles.py`` and compare the printed values with the
constants frozen in the test modules.
"""

from mpmath import mp, mpf, log, sqrt, exp

mp.dps = 50

LN2 = log(2)


def log2(x):
    return log(x) / LN2


def log10(x):
    return log(x) / log(10)


# ----------------------------------------------------------------------
# Turbo-decoder complexity model
# ----------------------------------------------------------------------
# k_factor(eps) = -k_prime / log10(eps)
# complexity(sinr, r) = r / log2(zeta - 1)
#                       * [ log2((zeta - 2) / (k_factor * zeta)) - 2*log2(gap) ]
# with gap = log2(1 + sinr) - r, clamped at 0 from below.

K_PRIME = mpf("0.2")
ZETA = mpf(6)
EPS_CH = mpf("0.1")


def k_factor(k_prime, eps):
    return -k_prime / log10(eps)


def raw_complexity(sinr, r, k_prime=K_PRIME, zeta=ZETA, eps=EPS_CH):
    gap = log2(1 + sinr) - r
    c0 = log2((zeta - 2) / (k_factor(k_prime, eps) * zeta))
    return r / log2(zeta - 1) * (c0 - 2 * log2(gap))


def complexity(sinr, r, **kw):
    if r == 0:
        return mpf(0)
    raw = raw_complexity(sinr, r, **kw)
    return raw if raw > 0 else mpf(0)


def linearize(sinr, r0, k_prime=K_PRIME, zeta=ZETA, eps=EPS_CH):
    """Tangent of log2(gap) at r0, and the induced quadratic coefficients."""
    gap = log2(1 + sinr) - r0
    a = -1 / (LN2 * gap)
    b = log2(gap) - a * r0
    c0 = log2((zeta - 2) / (k_factor(k_prime, eps) * zeta))
    alpha = -2 * a / log2(zeta - 1)
    beta = (c0 - 2 * b) / log2(zeta - 1)
    return a, b, alpha, beta


def quad(alpha, beta, r):
    return alpha * r * r + beta * r


def water_level(alpha, beta, c):
    return sqrt(4 * alpha * c + beta * beta)


def show(name, value, digits=17):
    print(f"{name:58s} = {mp.nstr(value, digits)}")


print("== complexity model ==")
show("k_factor(0.2, 0.1)", k_factor(K_PRIME, mpf("0.1")))
show("k_factor(0.2, 0.01)", k_factor(K_PRIME, mpf("0.01")))
show("complexity(sinr=3, r=1)", complexity(3, 1))
show("complexity(sinr=15, r=3)", complexity(15, 3))
show("raw_complexity(sinr=15, r=1)  (negative, clamps to 0)", raw_complexity(15, 1))
show("complexity(sinr=15, r=1)", complexity(15, 1))
show("iterations_per_bit(sinr=3, r=1) = raw/r", raw_complexity(3, 1) / 1)

print("\n== linearization at (sinr=3, r0=1) ==")
a1, b1, al1, be1 = linearize(3, 1)
show("a", a1)
show("b", b1)
show("quad_alpha", al1)
show("quad_beta", be1)
show("quad(r=1)  (== complexity(3,1) exactly)", quad(al1, be1, 1))
show("quad(r=0.5)", quad(al1, be1, mpf("0.5")))

print("\n== linearization at (sinr=3, r0=0.5), gap=1.5 ==")
a2, b2, al2, be2 = linearize(3, mpf("0.5"))
show("a", a2)
show("b", b2)
show("quad_alpha", al2)
show("quad_beta", be2)
show("quad(r=0.5)  (== complexity(3,0.5) exactly)", quad(al2, be2, mpf("0.5")))
show("complexity(sinr=3, r=0.5) direct", complexity(3, mpf("0.5")))

print("\n== required water level ==")
show("wl(coeffs@(3,1), c=complexity(3,1))", water_level(al1, be1, complexity(3, 1)))
show("   (identity check: 2*alpha + beta)", 2 * al1 + be1)
show("wl(coeffs@(3,0.5), c=quad@0.5)", water_level(al2, be2, quad(al2, be2, mpf("0.5"))))

print("\n== one-user continuous water-filling ==")
# maximize r s.t. alpha r^2 + beta r <= budget with budget = complexity(3,1):
# tight budget -> positive root; water level 1/eta = 2 alpha r + beta.
budget = complexity(3, 1)
r_star = (-be1 + sqrt(be1 * be1 + 4 * al1 * budget)) / (2 * al1)
show("r*", r_star)
show("1/eta = 2*alpha*r* + beta", 2 * al1 * r_star + be1)

print("\n== mcs thresholds, nu = 0.2 dB ==")
NU = mpf(10) ** (mpf("0.2") / 10)
show("nu (linear)", NU)
show("threshold(r=0.5)", NU * (2 ** mpf("0.5") - 1))
show("threshold(r=1.0)", NU * (2 ** mpf("1.0") - 1))

print("\n== two-user greedy trace (rates {0.5, 1.0}, budget 1.0) ==")
# user 1: sinr 3 -> max feasible r=1.0; user 2: sinr 1 -> max feasible r=0.5
thr1 = NU * (2 ** mpf("0.5") - 1)
thr2 = NU * (2 ** mpf("1.0") - 1)
assert mpf(3) >= thr2 and thr1 <= mpf(1) < thr2
c_u1 = complexity(3, 1)
c_u2 = complexity(1, mpf("0.5"))
show("C(user1: sinr=3, r=1)", c_u1)
show("C(user2: sinr=1, r=0.5)", c_u2)
show("initial sum", c_u1 + c_u2)
_, _, alu1, beu1 = linearize(3, 1)
_, _, alu2, beu2 = linearize(1, mpf("0.5"))
show("water level user1", water_level(alu1, beu1, c_u1))
show("water level user2", water_level(alu2, beu2, c_u2))
# user 2 has the higher level -> reduced below the lowest entry -> rate 0.
# sum C = c_u1 <= 1.0 halts the reduction.
assert water_level(alu2, beu2, c_u2) > water_level(alu1, beu1, c_u1)
assert c_u1 <= 1
# re-add pass: restoring user 2 at its max feasible rate needs c_u1 + c_u2 > 1.
show("re-add total (rejected, > 1.0)", c_u1 + c_u2)
print("final: r = (1.0, 0.0), sum_rate = 1.0, sum_complexity =", mp.nstr(c_u1, 17))
# argmax-complexity reduction (c_u2 > c_u1) reduces user 2 first and halts at
# the same allocation, so the trace above covers both greedy schedulers.
assert c_u2 > c_u1

print("\n== uplink sinr compositions ==")
# received power P0 * d^(s*apl) * h * d^(-apl); noise W; no interferers
P0, W, APL, S = mpf(10), mpf("0.1"), mpf("3.7"), mpf("0.1")
show("sinr(d=1, h=1)", P0 * 1 * 1 / W)
show("sinr(d=2, h=1)", P0 * mpf(2) ** (S * APL) * mpf(2) ** (-APL) / W)

print("\n== budget quantile rule ==")


def budget_from_samples(samples, eps):
    # smallest sample c with  #(strictly above c)/n <= eps
    xs = sorted(samples)
    n = len(xs)
    k = int(eps * n + mpf("1e-9"))
    return xs[n - 1 - k]


show("quantile({1..10}, 0.10)", mpf(budget_from_samples(range(1, 11), mpf("0.10"))))
show("quantile({1..10}, 0.25)", mpf(budget_from_samples(range(1, 11), mpf("0.25"))))
show("quantile({5,5,5}, 0.10)", mpf(budget_from_samples([5, 5, 5], mpf("0.10"))))
