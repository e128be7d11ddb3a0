#!/usr/bin/env python3
"""Symbolic derivation of the improper-limit posterior covariance branches.

For the q-times integrated Wiener prior (q = 1, 2, 3) anchored at t0 and
conditioned on one value observation at t0 plus derivative observations at
t0 + h*c_i, the posterior covariance at (t0 + s, t0 + s') has a finite
closed form in the limit t0 -> infinity.  It is piecewise polynomial in
(s, s') with breakpoints at 0 and the stage offsets.

This script derives every branch exactly, checks the result numerically
against a high-precision finite-anchor solve, and emits C++ branch tables
(src/limit_branches.inc).

Derivation runs in step units (h = 1); the runtime reinstates h through
cov(s, s'; h) = h^(2q+1) * cov(s/h, s'/h; 1).

Usage:  python3 scripts/derive_limit_posteriors.py [--emit path]
"""
import argparse
import random
import sys

import sympy as sp

t0 = sp.symbols("t0", positive=True)
s_, r_ = sp.symbols("s sp", real=True)
u, v, al = sp.symbols("u v a", positive=True)

X, Y = sp.symbols("X Y", positive=True)

# k_q(x, y) for x >= y >= 0, process started at 0, unit output scale.
KS = {
    0: Y,
    1: Y**3 / 3 + (X - Y) * Y**2 / 2,
    2: Y**5 / 20 + (X - Y) / 12 * ((X + Y) * Y**3 - Y**4 / 2),
    3: Y**7 / 252 + (X - Y) * Y**4 / 720 * (5 * X**2 + 2 * X * Y + 3 * Y**2),
}
DY = {q: sp.diff(KS[q], Y) for q in KS}
DX = {q: sp.diff(KS[q], X) for q in KS}
DXY = {q: sp.diff(KS[q], X, Y) for q in KS}


def sub2(f, A, B):
    return f.subs({X: A, Y: B}, simultaneous=True)


def k_(q, A, B, a_ge_b):
    return sub2(KS[q], A, B) if a_ge_b else sub2(KS[q], B, A)


def kd_(q, A, B, a_ge_b):
    """d k(A, B) / dB"""
    return sub2(DY[q], A, B) if a_ge_b else sub2(DX[q], B, A)


def dk_(q, A, B, a_ge_b):
    """d k(A, B) / dA"""
    return sub2(DX[q], A, B) if a_ge_b else sub2(DY[q], B, A)


def dkd_(q, A, B, a_ge_b):
    return sub2(DXY[q], A, B) if a_ge_b else sub2(DXY[q], B, A)


def gram(q, cs):
    """Joint Gram over [value@t0, d/dt@t0+c_1, ..., d/dt@t0+c_m], cs ascending, cs[0]=0."""
    ts = [t0 + c for c in cs]
    n = 1 + len(ts)
    K = sp.zeros(n, n)
    K[0, 0] = k_(q, t0, t0, True)
    for j, tj in enumerate(ts):
        K[0, 1 + j] = kd_(q, t0, tj, j == 0)
        K[1 + j, 0] = dk_(q, tj, t0, True)
        for l, tl in enumerate(ts):
            K[1 + j, 1 + l] = dkd_(q, tj, tl, j >= l)
    return K, ts


def qrow(q, off, cs, ts, idx):
    """Value-query cross covariances at t0+off; idx = region index of off.

    Region 0: off <= 0; region i: cs[i-1] < off <= cs[i]; region len(cs): off > cs[-1].
    """
    row = [k_(q, t0 + off, t0, idx >= 1)]
    for j in range(len(ts)):
        row.append(kd_(q, t0 + off, ts[j], idx >= j + 1))
    return sp.Matrix([row])


def lim_ratio(num, den):
    """limit_{t0->inf} num/den for polynomials in t0."""
    pn = sp.Poly(sp.expand(num), t0)
    pd = sp.Poly(sp.expand(den), t0)
    if pn.degree() < pd.degree():
        return sp.S.Zero
    assert pn.degree() == pd.degree(), (pn.degree(), pd.degree())
    return sp.cancel(pn.coeffs()[0] / pd.coeffs()[0])


def derive_branches(p, cs):
    q = p
    K, ts = gram(q, cs)
    det = K.det()
    adj = K.adjugate()
    nreg = len(cs) + 1
    branches = {}
    for ia in range(nreg):
        for ib in range(ia + 1):
            r1 = qrow(q, s_, cs, ts, ia)
            r2 = qrow(q, r_, cs, ts, ib)
            kqq = k_(q, t0 + s_, t0 + r_, True)  # convention s >= s'
            num = sp.expand(kqq * det - (r1 * adj * r2.T)[0, 0])
            branches[(ia, ib)] = sp.factor(sp.expand(lim_ratio(num, det)))
            print(f"  p={p} region ({ia},{ib}) derived", file=sys.stderr)
    return branches


def derive_mean_weights(p, cs):
    """Limit posterior mean weights over (x0, y_1..y_m) after 1..m+1 observations."""
    q = p
    K, ts = gram(q, cs)
    nreg = len(cs) + 1
    out = []
    for nobs in range(1, len(cs) + 2):
        Ksub = K[:nobs, :nobs]
        dsub = Ksub.det()
        asub = Ksub.adjugate()
        row = qrow(q, s_, cs, ts, nreg - 1)[:, :nobs]
        wnum = row * asub
        out.append([sp.factor(sp.expand(lim_ratio(wnum[0, i], dsub))) for i in range(nobs)])
    return out


def verify_mean_weights(m2, m3):
    """The limit mean weight polynomials have known closed forms; assert them."""
    assert sp.simplify(m2[2][1] - (s_ - s_**2 / (2 * al))) == 0
    assert sp.simplify(m2[2][2] - s_**2 / (2 * al)) == 0
    assert sp.simplify(m3[2][1] - (s_ - s_**2 / (2 * u))) == 0
    assert sp.simplify(m3[2][2] - s_**2 / (2 * u)) == 0
    w1 = s_ - ((s_**2 * u / 2 + s_**2 * v / 2) - s_**3 / 3) / (u * v)
    w2 = s_**2 * (2 * s_ - 3 * v) / (6 * u * (u - v))
    w3 = -(s_**2) * (2 * s_ - 3 * u) / (6 * v * (u - v))
    for got, want in zip(m3[3][1:], [w1, w2, w3]):
        assert sp.simplify(got - want) == 0
    print("mean weight closed forms verified", file=sys.stderr)


def check_numeric(p, branches, cs_val, subs_params, tau_str="1e7", dps=100, tol=3e-5):
    """Compare each branch against a finite-anchor batch solve at tau=1e7.

    The finite-anchor posterior deviates from the limit by O(1/tau), so the
    comparison tolerance is a little above 1e-7 relative.
    """
    import mpmath as mp

    mp.mp.dps = dps
    q = p
    tau = mp.mpf(tau_str)

    def ksn(x, y):
        x, y = (x, y) if x >= y else (y, x)
        if q == 1:
            return y**3 / 3 + (x - y) * y**2 / 2
        if q == 2:
            return y**5 / 20 + (x - y) / 12 * ((x + y) * y**3 - y**4 / 2)
        return y**7 / 252 + (x - y) * y**4 / 720 * (5 * x**2 + 2 * x * y + 3 * y**2)

    def kdn(x, y):
        if q == 1:
            return x**2 / 2 if x < y else x * y - y**2 / 2
        if q == 2:
            if x > y:
                return y**2 / 24 * (y**2 - 4 * x * y + 6 * x**2)
            return -(x**4) / 24 + y * x**3 / 6
        if x > y:
            return y**3 / 720 * (20 * x**3 - 15 * x**2 * y + 6 * x * y**2 - y**3)
        return x**4 / 720 * (15 * y**2 - 6 * x * y + x**2)

    def dkdn(x, y):
        mn, mx = (y, x) if x >= y else (x, y)
        if q == 1:
            return mn
        if q == 2:
            return mn**3 / 3 + (mx - mn) * mn**2 / 2
        return mn**5 / 20 + (mx - mn) / 12 * ((mx + mn) * mn**3 - mn**4 / 2)

    tobs = [tau + mp.mpf(repr(c)) for c in cs_val]
    n = 1 + len(tobs)
    K = mp.matrix(n, n)
    K[0, 0] = ksn(tau, tau)
    for j in range(len(tobs)):
        K[0, 1 + j] = kdn(tau, tobs[j])
        K[1 + j, 0] = K[0, 1 + j]
        for l in range(len(tobs)):
            K[1 + j, 1 + l] = dkdn(tobs[j], tobs[l])

    thr = [0.0] + [float(c) for c in cs_val[1:]]
    spans = [(-0.85, -0.01)]
    for i in range(len(thr) - 1):
        spans.append((thr[i] + 0.01, thr[i + 1] - 0.01))
    spans.append((thr[-1] + 0.01, thr[-1] + 0.85))

    random.seed(7)
    maxrel = 0.0
    for (ia, ib), expr in branches.items():
        f = sp.lambdify((s_, r_), expr.subs(subs_params), "mpmath")
        for _ in range(6):
            aa = random.uniform(*spans[ia])
            bb = random.uniform(*spans[ib])
            if bb > aa:
                aa, bb = bb, aa
            tqa, tqb = tau + mp.mpf(repr(aa)), tau + mp.mpf(repr(bb))
            ra = mp.matrix([ksn(tqa, tau)] + [kdn(tqa, t) for t in tobs])
            rb = mp.matrix([ksn(tqb, tau)] + [kdn(tqb, t) for t in tobs])
            sol = mp.lu_solve(K, rb)
            ref = ksn(tqa, tqb) - sum(ra[i] * sol[i] for i in range(n))
            got = f(mp.mpf(repr(aa)), mp.mpf(repr(bb)))
            rel = abs(float(got - ref)) / max(abs(float(ref)), 1e-9)
            maxrel = max(maxrel, rel)
            assert rel < tol, (p, ia, ib, aa, bb, float(got), float(ref))
    print(f"p={p}: branches match finite-anchor solve, max rel dev {maxrel:.2e}", file=sys.stderr)


def emit_cpp(b1, b2, b3, path):
    def fmt(expr, params):
        code = sp.ccode(expr)
        for sym, name in params.items():
            code = code.replace(sp.ccode(sym), name)
        return code

    lines = [
        "// Generated by scripts/derive_limit_posteriors.py -- do not edit by hand.",
        "// Branch tables for the improper-limit posterior covariance of the",
        "// integrated-Wiener extrapolation step, in step units (h = 1, unit scale).",
        "// Arguments satisfy s >= sp; region indices follow classify_region().",
        "",
    ]
    sets = [
        ("wp1_branch", b1, {}, "double s, double sp"),
        ("wp2_branch", b2, {al: "c2"}, "double s, double sp, double c2"),
        ("wp3_branch", b3, {u: "c2", v: "c3"}, "double s, double sp, double c2, double c3"),
    ]
    for name, branches, params, args in sets:
        lines.append(f"inline double {name}(int ra, int rb, {args}) {{")
        lines.append("  switch (ra * 8 + rb) {")
        for (ia, ib), expr in sorted(branches.items()):
            lines.append(f"    case {ia * 8 + ib}:")
            lines.append(f"      return {fmt(expr, params)};")
        lines.append("    default:")
        lines.append("      break;")
        lines.append("  }")
        lines.append('  throw BranchSelectionError("limit covariance branch selection failed");')
        lines.append("}")
        lines.append("")
    with open(path, "w") as f:
        f.write("\n".join(lines))
    print(f"wrote {path}", file=sys.stderr)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--emit", default="src/limit_branches.inc")
    args = ap.parse_args()

    for q in (1, 2, 3):
        assert sp.simplify(sp.diff(KS[q], X, Y) - KS[q - 1]) == 0

    b1 = derive_branches(1, [sp.S.Zero])
    b2 = derive_branches(2, [sp.S.Zero, al])
    b3 = derive_branches(3, [sp.S.Zero, u, v])

    m2 = derive_mean_weights(2, [sp.S.Zero, al])
    m3 = derive_mean_weights(3, [sp.S.Zero, u, v])
    verify_mean_weights(m2, m3)

    check_numeric(1, b1, [0.0], {})
    check_numeric(2, b2, [0.0, 0.5], {al: sp.Rational(1, 2)})
    check_numeric(3, b3, [0.0, 0.4, 0.7], {u: sp.Rational(2, 5), v: sp.Rational(7, 10)})
    check_numeric(3, b3, [0.0, 0.5, 1.0], {u: sp.Rational(1, 2), v: sp.S.One})

    emit_cpp(b1, b2, b3, args.emit)


if __name__ == "__main__":
    main()
