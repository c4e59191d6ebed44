#!/usr/bin/env python3
"""Generate orthogonal wavelet filter tables (Daubechies, Symlets).

Writes include/brillouin/wavelet_filters.hpp with decomposition low-pass
filters for db1..db10 and sym2..sym8, computed by spectral factorization of
the Daubechies polynomial at 60-digit precision.

Construction: for p vanishing moments, the half-band autocorrelation is
  P(y) = sum_{k=0}^{p-1} C(p-1+k, k) y^k,  y = sin^2(w/2).
Its roots (in y) map to quadruples/pairs of roots of the product filter in z.
Daubechies filters take the minimal-phase choice (all |z| < 1). Symlets pick,
per conjugate root pair, the half that minimizes the deviation of the filter's
phase from linear (least-asymmetric choice), searched exhaustively.

Normalization: sum h = sqrt(2), sum h^2 = 1.
"""

import itertools
import mpmath as mp

mp.mp.dps = 60


def binomial_poly_roots(p):
    # coefficients of P(y), ascending
    coeffs = [mp.binomial(p - 1 + k, k) for k in range(p)]
    if p == 1:
        return []
    return mp.polyroots(list(reversed(coeffs)), maxsteps=200, extraprec=200)


def z_roots_from_y(y):
    # y = -(1-z)^2/(4z)  =>  z^2 - 2(1-2y) z + 1 = 0
    b = 2 * (1 - 2 * y)
    disc = mp.sqrt(b * b - 4)
    z1 = (b + disc) / 2
    z2 = (b - disc) / 2
    return z1, z2


def polymul(a, b):
    out = [mp.mpc(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        for j, bj in enumerate(b):
            out[i + j] += ai * bj
    return out


def build_filter(p, selection):
    """selection[i] chooses which z-root of y-root i is kept."""
    yroots = binomial_poly_roots(p)
    kept = []
    for i, y in enumerate(yroots):
        z1, z2 = z_roots_from_y(y)
        kept.append(z1 if selection[i] == 0 else z2)
    # h(z) = c * (1+z)^p * prod (z - z_k); normalize so sum h = sqrt(2)
    poly = [mp.mpc(1)]
    for _ in range(p):
        poly = polymul(poly, [mp.mpc(1), mp.mpc(1)])
    for zk in kept:
        poly = polymul(poly, [mp.mpc(1), -mp.mpc(zk)])
    h = [mp.re(c) for c in poly]
    s = sum(h)
    h = [c * mp.sqrt(2) / s for c in h]
    return h


def phase_nonlinearity(h):
    """RMS deviation of unwrapped phase from the best linear fit."""
    n = len(h)
    m = 64
    ws = [mp.pi * (k + mp.mpf("0.5")) / m for k in range(m)]
    phases = []
    prev = mp.mpf(0)
    for w in ws:
        H = sum(h[k] * mp.e ** (-1j * w * k) for k in range(n))
        ph = mp.arg(H)
        while ph - prev > mp.pi:
            ph -= 2 * mp.pi
        while ph - prev < -mp.pi:
            ph += 2 * mp.pi
        phases.append(ph)
        prev = ph
    # least squares line through (w, phase)
    sw = sum(ws); sp = sum(phases)
    sww = sum(w * w for w in ws); swp = sum(w * p_ for w, p_ in zip(ws, phases))
    denom = m * sww - sw * sw
    a = (m * swp - sw * sp) / denom
    b = (sp - a * sw) / m
    return sum((p_ - a * w - b) ** 2 for w, p_ in zip(ws, phases))


def daubechies(p):
    nroots = p - 1
    # minimal phase: keep |z| < 1 from each pair
    yroots = binomial_poly_roots(p)
    sel = []
    for y in yroots:
        z1, z2 = z_roots_from_y(y)
        sel.append(0 if abs(z1) < 1 else 1)
    return build_filter(p, sel)


def symlet(p):
    nroots = p - 1
    yroots = binomial_poly_roots(p)
    # conjugate y-roots must get conjugate selections to keep h real;
    # group indices: real roots free, conjugate pairs tied.
    groups = []
    used = set()
    for i, y in enumerate(yroots):
        if i in used:
            continue
        if abs(mp.im(y)) < mp.mpf("1e-40"):
            groups.append((i,))
            used.add(i)
        else:
            for j in range(i + 1, nroots):
                if j not in used and abs(yroots[j] - mp.conj(y)) < mp.mpf("1e-30"):
                    groups.append((i, j))
                    used.add(i); used.add(j)
                    break
            else:
                groups.append((i,))
                used.add(i)
    best = None
    best_obj = None
    for bits in itertools.product((0, 1), repeat=len(groups)):
        sel = [0] * nroots
        for g, b in zip(groups, bits):
            for idx in g:
                sel[idx] = b
        h = build_filter(p, sel)
        if any(abs(mp.im(mp.mpc(c))) > mp.mpf("1e-30") for c in h):
            continue
        obj = phase_nonlinearity(h)
        if best_obj is None or obj < best_obj:
            best_obj = obj
            best = h
    return best


def fmt(h):
    return ",\n        ".join(mp.nstr(c, 20, strip_zeros=False) for c in h)


def main():
    out = []
    out.append("#pragma once")
    out.append("")
    out.append("// Orthogonal wavelet decomposition low-pass filters.")
    out.append("// Generated by scripts/gen_wavelet_filters.py (mpmath spectral")
    out.append("// factorization at 60-digit precision); do not edit by hand.")
    out.append("")
    out.append("#include <map>")
    out.append("#include <string>")
    out.append("#include <vector>")
    out.append("")
    out.append("namespace brillouin::detail {")
    out.append("")
    out.append("inline const std::map<std::string, std::vector<double>>& wavelet_dec_lo_tables() {")
    out.append("    static const std::map<std::string, std::vector<double>> tables = {")
    entries = []
    for p in range(1, 11):
        h = daubechies(p)
        entries.append(f'        {{"db{p}", {{{fmt(h)}}}}}')
    for p in range(2, 9):
        h = symlet(p)
        entries.append(f'        {{"sym{p}", {{{fmt(h)}}}}}')
    out.append(",\n".join(entries))
    out.append("    };")
    out.append("    return tables;")
    out.append("}")
    out.append("")
    out.append("}  // namespace brillouin::detail")
    out.append("")
    with open("include/brillouin/wavelet_filters.hpp", "w") as f:
        f.write("\n".join(out))
    # sanity report
    for name in ("db1", "db2", "db4", "db8"):
        p = int(name[2:])
        h = daubechies(p)
        print(name, [float(mp.nstr(c, 17)) for c in h][:4], "sum=", float(sum(h)), "ss=", float(sum(c * c for c in h)))
    h = symlet(4)
    print("sym4", [float(mp.nstr(c, 17)) for c in h])


if __name__ == "__main__":
    main()
