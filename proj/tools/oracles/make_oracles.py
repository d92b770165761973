"""Reference values for the unit tests, computed with mpmath at 30 digits
or exactly with sympy.

Run from the repository root:
    python3 tools/oracles/make_oracles.py > tests/oracle_values.hpp
"""

import mpmath as mp
import sympy as sp
from scipy.special import roots_jacobi, roots_legendre

mp.mp.dps = 30


def frac_const(d, alpha):
    return (alpha * mp.mpf(2) ** (alpha - 1) * mp.gamma((d + alpha) / 2)
            / (mp.pi ** (mp.mpf(d) / 2) * mp.gamma(1 - alpha / 2)))


def sphere(d):
    return 2 * mp.pi ** (mp.mpf(d) / 2) / mp.gamma(mp.mpf(d) / 2)


def power_law_rho(d, eps, r):
    return eps / sphere(d) * r ** (-d + eps) if r < 1 else mp.mpf(0)


def hat(x):
    # piecewise linear, peak 1 at 0.5, support [0.25, 0.75]
    return max(mp.mpf(0), 1 - 4 * abs(x - mp.mpf("0.5")))


def hat_inner_1d(alpha):
    # Exact: for h in each quarter the x-integral of (u(x) - u(x + h))^2 is a
    # polynomial in h, which is then integrated against nu^alpha symbolically.
    x, h = sp.symbols("x h", real=True)
    q = sp.Rational(1, 4)
    eps = 2 - sp.Rational(str(alpha))

    def piece(z0, z):
        if z0 < q or z0 >= 3 * q:
            return 0
        return 4 * z - 1 if z0 < 2 * q else 3 - 4 * z

    total = 0
    for k in range(4):
        a, b = k * q, (k + 1) * q
        hm = (a + b) / 2
        ends = {0: sp.Integer(0), 1 - hm: 1 - h}
        for j in range(5):
            if 0 <= j * q <= 1 - hm:
                ends[j * q] = j * q
            if 0 <= j * q - hm <= 1 - hm:
                ends[j * q - hm] = j * q - h
        pts = sorted(ends)
        poly = 0
        for lo, hi in zip(pts[:-1], pts[1:]):
            mid = (lo + hi) / 2
            f = (piece(mid, x) - piece(mid + hm, x + h)) ** 2
            poly += sp.integrate(f, (x, ends[lo], ends[hi]))
        total += sp.integrate(sp.expand(poly) * eps / 2 * h ** (eps - 3), (h, a, b))
    return mp.mpf(str(sp.N(2 * total, 35)))


def hat_cross_1d(alpha):
    # int_Omega u(x)^2 int_{Omega^c} nu(x - y) dy dx, counted once
    eps = 2 - mp.mpf(alpha)

    def tail(a):  # int_a^1 (eps/2) r^(eps-3) dr
        return eps / 2 * (1 - a ** (eps - 2)) / (eps - 2) if a < 1 else mp.mpf(0)

    return mp.quad(lambda x: hat(x) ** 2 * (tail(x) + tail(1 - x)), [0.25, 0.5, 0.75])


def linear_inner_2d(alpha):
    # u(x) = x_1 on the unit square with nu built from the power law in 2D
    eps = 2 - mp.mpf(alpha)

    def radial(t):
        c, s = abs(mp.cos(t)), abs(mp.sin(t))
        return mp.cos(t) ** 2 * (1 / eps - (c + s) / (1 + eps) + c * s / (2 + eps))

    return eps / (2 * mp.pi) * mp.quad(radial, mp.linspace(0, 2 * mp.pi, 9))


values = {
    "kRhoPowerLaw1d": power_law_rho(1, mp.mpf("0.5"), mp.mpf("0.5")),
    "kFracConst1d15": frac_const(1, mp.mpf("1.5")),
    "kFracConst2d19": frac_const(2, mp.mpf("1.9")),
    "kRatio1d1999": frac_const(1, mp.mpf("1.999")) / (2 * 1 * sphere(1) * mp.mpf("0.001")),
    "kRatio2d1999": frac_const(2, mp.mpf("1.999")) / (2 * 2 * sphere(2) * mp.mpf("0.001")),
    "kJ1At03Alpha15": frac_const(1, mp.mpf("1.5")) * mp.mpf("0.3") ** mp.mpf("-2.5"),
    "kJ3TailAlpha15": mp.mpf("0.5") * mp.exp(mp.mpf("-1.5")),
    "kJ1MomentAlpha19": 2 * frac_const(1, mp.mpf("1.9")) / mp.mpf("0.1"),
    "kHatInner1dAlpha15": hat_inner_1d(mp.mpf("1.5")),
    "kHatCross1dAlpha15": hat_cross_1d(mp.mpf("1.5")),
    "kHatInner1dAlpha19": hat_inner_1d(mp.mpf("1.9")),
    "kHatCross1dAlpha19": hat_cross_1d(mp.mpf("1.9")),
    "kLinearInner2dAlpha19": linear_inner_2d(mp.mpf("1.9")),
    "kLinearInner2dAlpha15": linear_inner_2d(mp.mpf("1.5")),
}

print("#pragma once")
print()
print("// Generated by tools/oracles/make_oracles.py; do not edit by hand.")
print()
print("namespace oracle {")
print()
for name, v in values.items():
    print(f"inline constexpr double {name} = {mp.nstr(v, 20)};")
x, w = roots_legendre(5)
print(f"inline constexpr double kLegendre5Node0 = {float(x[0])!r};")
print(f"inline constexpr double kLegendre5Weight0 = {float(w[0])!r};")
x, w = roots_jacobi(6, 0.0, -0.5)
print(f"inline constexpr double kJacobi6Node0 = {float(x[0])!r};  // weight (1+x)^-0.5")
print(f"inline constexpr double kJacobi6Weight0 = {float(w[0])!r};")
print()
print("}  // namespace oracle")
