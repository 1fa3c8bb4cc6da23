#!/usr/bin/env python3
"""Symbolic derivation of the effective-coefficient closed forms.

Integrates the nested effective-coefficient integrals of the hSABR, mrSABR
and CIR-ZABR (gamma = 1/2) models exactly, reduces every coefficient to a
ratio of two polynomials in (alpha, theta, lambda, nu, rho, T_ex, z) with
z = exp(lambda * T_ex), and emits C++ evaluators for both the z-form and
the w-normalised form (w = 1/z).

Transcribed reference expressions whose reading is unambiguous are checked
against the derivation before anything is written (see PROVENANCE.md).

Usage:
    python3 tools/python/derive_closed_forms.py [--out core/src/closed_form_ratios.inc]
    python3 tools/python/derive_closed_forms.py --check-only [--skip-checks]
"""

import argparse
import random
import re
import sys
from pathlib import Path
from math import comb

import mpmath
import sympy as sp
from sympy.printing.cxx import CXX17CodePrinter

lam, T, nu, rho = sp.symbols("lam T nu rho", positive=True)
x, y, s = sp.symbols("x y s", positive=True)
z, w = sp.symbols("z w", positive=True)

# Taylor degree in (alpha - theta) kept by the CIR-ZABR expansion.  Degree 5
# leaves an O((alpha - theta)^6) residual; degree 4 reproduces the printed
# b-bar expression exactly and is only used by the consistency check.
CIRZABR_DEGREE = 5


# ---------------------------------------------------------------------------
# Exact integration of sums of  c * v^n * exp(beta * v)


def _split(term, var):
    coeff, dep = term.as_independent(var, as_Add=False)
    dep = sp.powsimp(dep, combine="exp")
    n, beta = 0, sp.Integer(0)
    for f in sp.Mul.make_args(dep):
        if f == 1:
            continue
        if f == var:
            n += 1
        elif f.is_Pow and f.base == var and f.exp.is_Integer:
            n += int(f.exp)
        elif isinstance(f, sp.exp):
            arg = sp.expand(f.args[0])
            slope = arg.coeff(var)
            beta += slope
            coeff *= sp.exp(sp.expand(arg - slope * var))
        else:
            raise ValueError(f"unsupported factor {f} in {term}")
    return coeff, n, sp.simplify(beta)


def _antiderivative(n, beta, v):
    if beta == 0:
        return v ** (n + 1) / (n + 1)
    acc = 0
    for k in range(n + 1):
        acc += (-1) ** k * sp.factorial(n) / sp.factorial(n - k) * v ** (n - k) / beta ** (k + 1)
    return sp.exp(beta * v) * acc


def integrate(expr, var, lo, hi):
    expr = sp.expand(expr, power_exp=True)
    total = 0
    for term in sp.Add.make_args(expr):
        coeff, n, beta = _split(term, var)
        F = _antiderivative(n, beta, var)
        total += coeff * (F.subs(var, hi) - F.subs(var, lo))
    return sp.expand(total, power_exp=True)


def truncate(expr, d, degree):
    """Drop every power of d above `degree`."""
    expr = sp.expand(expr)
    poly = sp.Poly(expr, d)
    return sp.expand(sum(c * d**k for (k,), c in poly.terms() if k <= degree))


def to_z(expr):
    """Replace exp(m * lam * T) by z**m."""
    expr = sp.expand(expr, power_exp=True)

    def repl(e):
        m = sp.simplify(e.args[0] / (lam * T))
        if not m.is_Integer:
            raise ValueError(f"unexpected exponent {e}")
        return z**m

    return expr.replace(lambda e: isinstance(e, sp.exp), repl)


def ratio(expr, gens):
    """Return (num, den) integer-coefficient Polys with num/den == expr."""
    num, den = sp.fraction(sp.cancel(sp.together(expr)))
    cn, pn = sp.Poly(num, *gens).clear_denoms()
    cd, pd = sp.Poly(den, *gens).clear_denoms()
    pn = pn.mul_ground(cd)
    pd = pd.mul_ground(cn)
    g = sp.igcd(*[int(c) for c in pn.coeffs() + pd.coeffs()])
    if g != 1:
        pn, pd = pn.quo_ground(g), pd.quo_ground(g)
    if pd.LC() < 0:
        pn, pd = -pn, -pd
    return pn, pd


# ---------------------------------------------------------------------------
# Model derivations.  Every function returns {name: sympy expr in z}.


def derive_hsabr():
    A, Th = sp.symbols("A Th", positive=True)  # alpha^2, theta^2
    V = lambda t: A * sp.exp(-lam * t) + Th * (1 - sp.exp(-lam * t))
    tau = integrate(V(x), x, 0, T)
    inner = integrate(sp.exp(-lam * (y - x)), y, x, T)
    I2 = rho * nu * integrate(V(x) * inner, x, 0, T)
    D = integrate(sp.exp(-lam * (y - s)), y, s, T)
    I4 = rho**2 * nu**2 * integrate(V(x) * sp.exp(-lam * (s - x)), x, 0, s)
    J_vol = integrate(V(s) * D**2, s, 0, T)
    J_skew = integrate(I4 * D, s, 0, T)
    b = I2 / tau**2
    c = sp.Rational(3, 4) * nu**2 * J_vol / tau**3 + 3 * J_skew / tau**3 - 3 * b**2
    gens = (A, Th, lam, nu, rho, T, z)
    return gens, {"tau": to_z(tau), "b": to_z(b), "c": to_z(c)}


def derive_mrsabr():
    a, th = sp.symbols("a th", positive=True)
    af = lambda t: th + (a - th) * sp.exp(-lam * t)
    tau = integrate(af(x) ** 2, x, 0, T)
    in_e = integrate(af(y) * sp.exp(-lam * (y - x)), y, x, s)
    in_p = integrate(af(y), y, x, s)
    I1 = rho * nu * integrate(af(x) ** 2 * sp.exp(-lam * (s - x)), x, 0, s)
    I2 = nu**2 * integrate(af(x) ** 2 * sp.exp(-lam * (s - x)) * in_e, x, 0, s)
    I3 = rho * nu * integrate(af(x) ** 2 * in_e, x, 0, s)
    I4 = rho**2 * nu**2 * integrate(af(x) ** 2 * sp.exp(-lam * (s - x)) * in_p, x, 0, s)
    I5 = nu**2 * integrate(af(x) ** 2 * sp.exp(-2 * lam * (s - x)), x, 0, s)
    b = 2 * I3.subs(s, T) / tau**2
    P = integrate(2 * af(s) * I2 + I1**2 + 4 * af(s) * I4, s, 0, T)
    c = 3 * P / tau**3 - 3 * b**2
    G = integrate(I5, s, 0, T)
    gens = (a, th, lam, nu, rho, T, z)
    return gens, {"tau": to_z(tau), "g": to_z(G), "b": to_z(b), "c": to_z(c)}


def _binom_half(p, k):
    return sp.binomial(sp.Rational(p), k)


def derive_cirzabr(degree=CIRZABR_DEGREE, only_b=False):
    """CIR-ZABR: psi(A) = nu A^{3/2}, v(A)^2 = nu^2 A, theta = q^2."""
    a, q, d = sp.symbols("a q d", positive=True)
    th = q**2
    af = lambda t: th + d * sp.exp(-lam * t)

    def power_series(p, t):
        # (th + d e^{-lam t})^p  =  sum_k C(p,k) q^{2p-2k} d^k e^{-k lam t}
        return sum(_binom_half(p, k) * q ** (2 * sp.Rational(p) - 2 * k) * d**k
                   * sp.exp(-k * lam * t) for k in range(degree + 1))

    tr = lambda e: truncate(e, d, degree)
    psi = lambda t: nu * power_series(sp.Rational(3, 2), t)
    dpsi = lambda t: sp.Rational(3, 2) * nu * power_series(sp.Rational(1, 2), t)

    tau = integrate(af(x) ** 2, x, 0, T)
    in_e = integrate(af(y) * sp.exp(lam * (s - y)), y, x, s)
    I3 = rho * integrate(tr(psi(x) * sp.exp(-lam * (s - x)) * in_e), x, 0, s)
    b = 2 * I3.subs(s, T) / tau**2
    out = {"tau": tau, "b": b}
    if not only_b:
        I1 = rho * integrate(tr(psi(x) * sp.exp(-lam * (s - x))), x, 0, s)
        I2 = integrate(nu**2 * af(x) * sp.exp(-2 * lam * (s - x)) * in_e, x, 0, s)
        in_dpsi = integrate(dpsi(y), y, x, s)
        I4 = sp.Rational(1, 2) * rho**2 * integrate(
            tr(psi(x) * sp.exp(-lam * (s - x)) * in_dpsi), x, 0, s)
        I5 = integrate(nu**2 * af(x) * sp.exp(-2 * lam * (s - x)), x, 0, s)
        P = integrate(tr(2 * af(s) * I2 + I1**2 + 4 * af(s) * I4), s, 0, T)
        out["c"] = 3 * P / tau**3 - 3 * b**2
        out["g"] = integrate(I5, s, 0, T)
    gens = (a, q, lam, nu, rho, T, z)
    return gens, {k: to_z(v.subs(d, a - q**2)) for k, v in out.items()}


# ---------------------------------------------------------------------------
# Transcribed reference expressions, checked verbatim against the derivation.
# Excel syntax; `z` is exp(lambda*T_ex).

REFERENCE_FORMS = {
    ("hsabr", "tau"): "(T_ex*lambda*thetas*z - alphas + thetas + z*(alphas - thetas))/(lambda*z)",
    ("hsabr", "b"): "nu*rho*z*(T_ex*lambda*( - 1*alphas + thetas*z + thetas) + alphas*z - alphas"
                    " - 2*thetas*z + 2*thetas)/(T_ex*lambda*thetas*z - alphas + thetas + z*(alphas - thetas))^2",
    ("hsabr", "c"): "- 3*nu^2*z*(8*rho^2*z*(T_ex*lambda*( - 1*alphas + thetas*z + thetas) + alphas*z - alphas"
                    " - 2*thetas*z + 2*thetas)^2 - (T_ex*lambda*thetas*z - alphas + thetas + z*(alphas - thetas))"
                    "*(2*T_ex*lambda*thetas*z^2*(4*rho^2 + 1) - 2*alphas + 8*rho^2*z^2*(alphas - 3*thetas)"
                    " - 4*rho^2*z*(T_ex^2*alphas*lambda^2 - T_ex^2*lambda^2*thetas + 2*T_ex*alphas*lambda"
                    " - 4*T_ex*lambda*thetas + 2*alphas - 6*thetas) + thetas + z^2*(2*alphas - 5*thetas)"
                    " + 4*z*( - 1*T_ex*alphas*lambda + T_ex*lambda*thetas + thetas)))"
                    "/(8*(T_ex*lambda*thetas*z - alphas + thetas + z*(alphas - thetas))^4)",
    ("mrsabr", "tau"): "(2*T_ex*lambda*theta^2*z^2 - alpha^2 + 2*alpha*theta - theta^2 - 4*theta*z*(alpha - theta)"
                       " + z^2*(alpha^2 + 2*alpha*theta - 3*theta^2))/(2*lambda*z^2)",
    ("cirzabr", "tau"): "(2*T_ex*lambda*theta^2*z^2 - alpha^2 + 2*alpha*theta - theta^2 - 4*theta*z*(alpha - theta)"
                        " + z^2*(alpha^2 + 2*alpha*theta - 3*theta^2))/(2*lambda*z^2)",
    ("cirzabr", "g"): "nu^2*(2*T_ex*lambda*theta*z^2 + 2*alpha - theta + z^2*(2*alpha - 3*theta)"
                      " - 4*z*(alpha - theta))/(4*lambda^2*z^2)",
    # Degree-4 expansion; compared against derive_cirzabr(degree=4).
    ("cirzabr4", "b"): "nu*rho*( - 384*T_ex*lambda*theta^2*z^2*(3*alpha^2 + 6*alpha*theta*z - 6*alpha*theta"
                       " - 4*theta^2*z^2 - 6*theta^2*z + 3*theta^2) - 9*alpha^4 - 112*alpha^3*theta*z"
                       " + 36*alpha^3*theta - 864*alpha^2*theta^2*z^2 + 336*alpha^2*theta^2*z - 54*alpha^2*theta^2"
                       " + 1728*alpha*theta^3*z^2 - 336*alpha*theta^3*z + 36*alpha*theta^3 - 864*theta^4*z^2"
                       " + 112*theta^4*z - 9*theta^4 + 768*theta^3*z^3*(- 1*alpha - 2*theta*z + theta)"
                       " + 96*theta*z*(3*alpha^3 + 6*alpha^2*theta*z - 9*alpha^2*theta - 32*alpha*theta^2*z^2"
                       " - 12*alpha*theta^2*z + 9*alpha*theta^2 + 32*theta^3*z^2 + 6*theta^3*z - 3*theta^3)"
                       " + z^2*(- 3*alpha^4*z^2 - 12*alpha^4*z + 24*alpha^4 + 76*alpha^3*theta*z^2"
                       " + 96*alpha^3*theta*z - 384*alpha^3*theta + 654*alpha^2*theta^2*z^2"
                       " - 792*alpha^2*theta^2*z + 1008*alpha^2*theta^2 + 1548*alpha*theta^3*z^2"
                       " + 1344*alpha*theta^3*z - 192*alpha*theta^3 - 2275*theta^4*z^2 + 900*theta^4*z"
                       " - 456*theta^4))/(192*theta^(3/2)*(2*T_ex*lambda*theta^2*z^2 - alpha^2"
                       " + 2*alpha*theta - theta^2 - 4*theta*z*(alpha - theta) + z^2*(alpha^2"
                       " + 2*alpha*theta - 3*theta^2))^2)",
}


def parse_excel(text, names):
    text = text.replace("^", "**").replace("(3/2)", "(Rational(3,2))").replace("lambda", "lam_")
    loc = dict(names)
    loc["Rational"] = sp.Rational
    return sp.sympify(text, locals=loc)


def _sample_point(rng):
    return dict(alpha=rng.uniform(0.05, 0.5), theta=rng.uniform(0.05, 0.5), lam=rng.uniform(0.5, 20.0),
                nu=rng.uniform(0.1, 5.0), rho=rng.uniform(-0.95, 0.95), T=rng.uniform(0.05, 5.0))


def _eval(expr, gens, model, pt, dps=50):
    mpmath.mp.dps = dps
    a, th = mpmath.mpf(pt["alpha"]), mpmath.mpf(pt["theta"])
    first = {"hsabr": (a * a, th * th), "mrsabr": (a, th), "cirzabr": (a, mpmath.sqrt(th))}[model]
    vals = dict(zip(gens, [first[0], first[1], pt["lam"], pt["nu"], pt["rho"], pt["T"],
                           mpmath.exp(mpmath.mpf(pt["lam"]) * pt["T"])]))
    f = sp.lambdify(gens, expr, modules="mpmath")
    return f(*[mpmath.mpf(vals[g]) for g in gens])


def _special_case(model, key, sigma, pt):
    """Constant-expected-volatility reductions (alpha = theta = sigma)."""
    mpmath.mp.dps = 50
    lam_, nu_, rho_, T_ = (mpmath.mpf(pt[k]) for k in ("lam", "nu", "rho", "T"))
    u = lam_ * T_
    e = mpmath.exp(-u)
    s_ = mpmath.mpf(sigma)
    if model == "hsabr":
        table = {"tau": s_**2 * T_,
                 "b": rho_ * nu_ / s_**2 * (u - 1 + e) / u**2,
                 "c": 3 * nu_**2 / s_**4 * (1 + 2 * u - (2 - e) ** 2) / (8 * u**3)
                 + 3 * rho_**2 * nu_**2 / s_**4 * (u**2 * e - (1 - e) ** 2) / u**4}
        return table[key]
    g = mpmath.mpf(1) if model == "mrsabr" else mpmath.mpf(1) / 2
    p = s_ ** (2 * (g - 1) - 2)
    table = {"tau": s_**2 * T_,
             "b": 2 * rho_ * nu_ * s_ ** (g - 2) * (u - 1 + e) / u**2,
             "c": 3 * (1 + rho_**2) * nu_**2 * p / (2 * u**3) * (2 * u + 4 * e - 3 - e**2)
             + 6 * (1 + g) * rho_**2 * nu_**2 * p / u**3 * (u + 2 * e - 2 + u * e)
             - 12 * rho_**2 * nu_**2 * p * ((u - 1 + e) / u**2) ** 2,
             "g": nu_**2 * s_ ** (2 * g) * (2 * u - 1 + mpmath.exp(-2 * u)) / (4 * lam_**2)}
    return table[key]


def check(derived, rng, npoints=12):
    """Reference-expression and special-case consistency checks.  Returns failures."""
    failures = []
    for (model, key), text in REFERENCE_FORMS.items():
        base = "cirzabr" if model == "cirzabr4" else model
        if model == "cirzabr4":
            gens, exprs = derive_cirzabr(degree=4, only_b=True)
        else:
            gens, exprs = derived[base]
        names = {"hsabr": {"alphas": gens[0], "thetas": gens[1]},
                 "mrsabr": {"alpha": gens[0], "theta": gens[1]},
                 "cirzabr": {"alpha": gens[0], "theta": gens[1] ** 2}}[base]
        names.update({"lam_": lam, "nu": nu, "rho": rho, "T_ex": T, "z": z})
        reference = parse_excel(text, names)
        worst = 0
        for _ in range(npoints):
            pt = _sample_point(rng)
            ref = _eval(exprs[key], gens, base, pt)
            pub = _eval(reference, gens, base, pt)
            worst = max(worst, abs(pub / ref - 1))
        status = "ok" if worst < 1e-30 else "MISMATCH"
        print(f"reference {model:9s} {key:4s} max rel diff {float(worst):.3e}  {status}")
        if status != "ok":
            failures.append((model, key))
    for model, (gens, exprs) in derived.items():
        for key, expr in exprs.items():
            worst = 0
            for _ in range(npoints):
                pt = _sample_point(rng)
                pt["alpha"] = pt["theta"]
                ref = _special_case(model, key, pt["theta"], pt)
                val = _eval(expr, gens, model, pt)
                worst = max(worst, abs(val / ref - 1))
            status = "ok" if worst < 1e-30 else "MISMATCH"
            print(f"special   {model:9s} {key:4s} max rel diff {float(worst):.3e}  {status}")
            if status != "ok":
                failures.append((model, "special-" + key))
    return failures


# ---------------------------------------------------------------------------
# C++ emission

VAR_NAMES = ("a", "t", "lam", "nu", "rho", "T")


class _Printer(CXX17CodePrinter):
    def __init__(self, gens):
        super().__init__()
        self._names = {g: n for g, n in zip(gens, VAR_NAMES)}

    def _print_Symbol(self, e):
        return f"v.{self._names[e]}[1]"

    def _print_Pow(self, e):
        if e.base in self._names and e.exp.is_Integer and e.exp > 0:
            return f"v.{self._names[e.base]}[{int(e.exp)}]"
        raise ValueError(f"unexpected power {e}")

    def _print_Integer(self, e):
        return f"R({int(e)})"

    def _print_Mul(self, e):
        coeff, rest = e.as_coeff_Mul()
        factors = [f"({self._print(f)})" if f.is_Add else self._print(f) for f in sp.Mul.make_args(rest)]
        if coeff == -1:
            return "-" + " * ".join(factors)
        if coeff != 1:
            factors.insert(0, self._print(coeff))
        return " * ".join(factors)


def _poly_in_e(poly, gens, reverse, degree):
    """C++ Horner evaluation in e (z or w) with coefficient polynomials."""
    rest = gens[:-1]
    e_gen = gens[-1]
    coeffs = [sp.Integer(0)] * (degree + 1)
    for monom, c in poly.terms():
        k = monom[-1]
        coeffs[k] += c * sp.Mul(*[g**m for g, m in zip(rest, monom[:-1])])
    if reverse:
        coeffs = coeffs[::-1]
    printer = _Printer(rest)
    parts = []
    for c in coeffs:
        c = sp.expand(c)
        if c == 0:
            parts.append("R(0)")
        else:
            h = sp.polys.polyfuncs.horner(sp.Poly(c, *rest).as_expr(), *rest)
            parts.append(printer.doprint(h))
    # Horner in e: (((c_d) e + c_{d-1}) e + ...) + c_0
    expr = parts[-1]
    for p in reversed(parts[:-1]):
        expr = f"({expr}) * e + ({p})"
    return expr


def _reparse(text, gens, rev, degree):
    """Read emitted C++ back into sympy; guards the printer against dropped parentheses."""
    expr = re.sub(r"v\.(\w+)\[(\d+)\]", r"(\1_**\2)", text)
    expr = re.sub(r"R\((-?\d+)\)", r"(\1)", expr)
    names = {f"{n}_": g for n, g in zip(VAR_NAMES, gens[:-1])}
    names["e"] = gens[-1]
    out = sp.expand(sp.sympify(expr, locals=names))
    if rev:
        out = sp.expand(out.subs(gens[-1], 1 / gens[-1]) * gens[-1] ** degree)
    return out


def emit_function(name, pn, pd, gens):
    degree = max(pn.degree(gens[-1]), pd.degree(gens[-1]))
    out = []
    for form, rev in (("z", False), ("w", True)):
        num = _poly_in_e(pn, gens, rev, degree)
        den = _poly_in_e(pd, gens, rev, degree)
        for text, poly in ((num, pn), (den, pd)):
            if sp.expand(_reparse(text, gens, rev, degree) - poly.as_expr()) != 0:
                raise RuntimeError(f"emitted {name}_{form} does not reproduce its polynomial")
        out.append(
            f"template <class R>\n"
            f"Ratio<R> {name}_{form}(const Vars<R>& v, const R& e) {{\n"
            f"  return {{{num},\n          {den}}};\n}}\n")
    return "\n".join(out), degree


def emit(derived, path):
    max_power = 0
    for gens, exprs in (d for d in derived.values()):
        pass
    bodies = []
    degrees = {}
    for model, (gens, exprs) in derived.items():
        for key in ("tau", "b", "c", "g"):
            if key not in exprs:
                continue
            pn, pd = ratio(exprs[key], gens)
            for p in (pn, pd):
                for monom in p.monoms():
                    max_power = max(max_power, max(monom[:-1]))
            text, deg = emit_function(f"{model}_{key}", pn, pd, gens)
            degrees[(model, key)] = deg
            bodies.append(f"// {model} {key}: {len(pn.terms())} / {len(pd.terms())} terms, degree {deg} in z\n" + text)
            print(f"emitted {model} {key}", file=sys.stderr)
    header = [
        "// Generated by tools/python/derive_closed_forms.py; do not edit by hand.",
        "// Effective-coefficient ratios as polynomials in (a, t, lam, nu, rho, T)",
        "// and e, where e = exp(lam*T) for the *_z forms and e = exp(-lam*T) for",
        "// the *_w forms.  For hsabr a, t are the variances alpha^2, theta^2; for",
        "// mrsabr the volatilities alpha, theta; for cirzabr alpha and sqrt(theta).",
        "",
        "namespace mrsabr::detail::generated {",
        "",
        f"inline constexpr int kMaxPower = {max_power};",
        "",
        "template <class R>",
        "struct Vars {",
    ]
    for n in VAR_NAMES:
        header.append(f"  std::array<R, kMaxPower + 1> {n};")
    header += ["};", "", "template <class R>", "struct Ratio {", "  R num;", "  R den;", "};", ""]
    for model in derived:
        d = max(v for (m, _), v in degrees.items() if m == model)
        header.append(f"inline constexpr int k{model.capitalize()}Degree = {d};")
    header.append("")
    with open(path, "w") as f:
        f.write("\n".join(header) + "\n" + "\n".join(bodies) + "\n}  // namespace mrsabr::detail::generated\n")


def main():
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--out", default=str(Path(__file__).resolve().parents[2] / "core/src/closed_form_ratios.inc"))
    ap.add_argument("--check-only", action="store_true")
    ap.add_argument("--skip-checks", action="store_true", help="emit without the numerical consistency checks")
    ap.add_argument("--seed", type=int, default=20250201)
    args = ap.parse_args()
    derived = {"hsabr": derive_hsabr(), "mrsabr": derive_mrsabr(), "cirzabr": derive_cirzabr()}
    failures = 0 if args.skip_checks else check(derived, random.Random(args.seed))
    if failures:
        print(f"consistency checks failed: {failures}", file=sys.stderr)
        return 1
    if not args.check_only:
        emit(derived, args.out)
    return 0


if __name__ == "__main__":
    sys.exit(main())
