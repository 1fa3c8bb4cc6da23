#!/usr/bin/env python3
"""High-precision reference values for the unit tests.

Every nested integral is evaluated numerically with mpmath (tanh-sinh) at
every level, with no analytic inner antiderivatives, so the values are
independent of both the C++ oracle and the generated closed forms.  The
printed numbers are frozen into tests/reference_values.hpp.

Runs in a few minutes; the general-gamma point dominates.
"""

import mpmath as mp

mp.mp.dps = 30


def quad(f, a, b):
    return mp.quad(f, [a, b])


def hsabr(alpha, theta, lam, nu, rho, T):
    alpha, theta, lam, nu, rho, T = map(mp.mpf, (alpha, theta, lam, nu, rho, T))
    V = lambda t: alpha**2 * mp.exp(-lam * t) + theta**2 * (1 - mp.exp(-lam * t))
    D = lambda t: quad(lambda t1: mp.exp(-lam * (t1 - t)), t, T)
    tau = quad(V, 0, T)
    i2 = rho * nu * quad(lambda t1: V(t1) * D(t1), 0, T)
    i4 = lambda t: rho**2 * nu**2 * quad(lambda t1: V(t1) * mp.exp(-lam * (t - t1)), 0, t)
    b = i2 / tau**2
    c = (3 * nu**2 / (4 * tau**3) * quad(lambda t: V(t) * D(t) ** 2, 0, T)
         + 3 / tau**3 * quad(lambda t: i4(t) * D(t), 0, T) - 3 * b**2)
    return dict(tau=tau, b=b, c=c)


def zabr(alpha, theta, lam, nu, rho, T, gamma):
    """mrZABR with psi(A) = nu A^(gamma+1); gamma = 1 is mrSABR."""
    alpha, theta, lam, nu, rho, T, gamma = map(mp.mpf, (alpha, theta, lam, nu, rho, T, gamma))
    a = lambda t: theta + (alpha - theta) * mp.exp(-lam * t)
    psi = lambda t: nu * a(t) ** (gamma + 1)
    dpsi = lambda t: (gamma + 1) * nu * a(t) ** gamma
    v2 = lambda t: nu**2 * a(t) ** (2 * gamma)
    grow = lambda t1, t: quad(lambda t2: a(t2) * mp.exp(lam * (t - t2)), t1, t)

    i1 = lambda t: rho * quad(lambda t1: psi(t1) * mp.exp(-lam * (t - t1)), 0, t)
    i2 = lambda t: quad(lambda t1: v2(t1) * mp.exp(-2 * lam * (t - t1)) * grow(t1, t), 0, t)
    i3 = lambda t: rho * quad(lambda t1: psi(t1) * mp.exp(-lam * (t - t1)) * grow(t1, t), 0, t)
    i4 = lambda t: rho**2 / 2 * quad(
        lambda t1: psi(t1) * mp.exp(-lam * (t - t1)) * quad(dpsi, t1, t), 0, t)
    i5 = lambda t: quad(lambda t1: v2(t1) * mp.exp(-2 * lam * (t - t1)), 0, t)

    tau = quad(lambda t: a(t) ** 2, 0, T)
    b = 2 * i3(T) / tau**2
    c = 3 / tau**3 * quad(lambda t: 2 * a(t) * i2(t) + i1(t) ** 2 + 4 * a(t) * i4(t), 0, T) - 3 * b**2
    g = quad(i5, 0, T)
    return dict(tau=tau, b=b, c=c, g=g)


POINTS = [
    ("kHsabrRef", "hsabr", (0.3, 0.2, 3.0, 1.2, -0.6, 1.5), None),
    ("kMrsabrRef", "mrsabr", (0.25, 0.18, 4.0, 1.5, -0.7, 2.0), 1),
    ("kCirzabrRef", "cirzabr", (0.22, 0.2, 5.0, 1.0, -0.5, 1.0), mp.mpf(1) / 2),
]


def main():
    for name, model, args, gamma in POINTS:
        vals = hsabr(*args) if model == "hsabr" else zabr(*args, gamma)
        fields = ", ".join(mp.nstr(vals[k], 20) for k in ("tau", "b", "c", "g") if k in vals)
        print(f"// {model} alpha, theta, lambda, nu, rho, t_ex = {args}")
        print(f"{name}: {fields}", flush=True)


if __name__ == "__main__":
    main()
