"""Numeric pairing of class cocycles with cycles.

The symbolic cocycle is collapsed to a global form through the contraction
of the Cech complex with a concrete smooth partition of unity on a declared
overlap collar, then integrated by quadrature.  Everything is deterministic:
fixed quadrature orders, a polynomial (quintic-smoothstep) bump, and the
orientation/normalization echoed into every report.
"""

from __future__ import annotations

import numpy as np


def smoothstep(x):
    """Quintic smoothstep: C^2, polynomial (so Gauss quadrature is exact)."""
    x = np.clip(x, 0.0, 1.0)
    return x ** 3 * (10.0 - 15.0 * x + 6.0 * x * x)


def smoothstep_d(x):
    x = np.clip(x, 0.0, 1.0)
    return 30.0 * x ** 2 * (1.0 - x) ** 2


def eval_coeff(expr, values, form_gids):
    """Evaluate the coefficient of a given product of form generators.

    values: gid -> complex for degree-0 generators (localized inverses are
    resolved through Algebra.localization_of); form_gids: the exact multiset
    of odd/form generators the monomial must carry.
    """
    alg = expr.alg
    want = tuple(sorted(form_gids))
    total = 0.0 + 0.0j
    for mono, c in expr.normalize().terms.items():
        zeros = []
        forms = []
        for g in mono:
            if alg.gens[g].degree == 0:
                zeros.append(g)
            else:
                forms.append(g)
        if tuple(sorted(forms)) != want:
            continue
        val = complex(c)
        ok = True
        for g in zeros:
            val *= _eval_zero_gen(alg, g, values)
        total += val
    return total


def _eval_zero_gen(alg, g, values):
    if g in values:
        return values[g]
    f = alg.localization_of.get(g)
    if f is not None:
        acc = 0.0 + 0.0j
        for mono, c in f.normalize().terms.items():
            v = complex(c)
            for g2 in mono:
                v *= _eval_zero_gen(alg, g2, values)
            acc += v
        return 1.0 / acc
    raise KeyError(f"no numeric value for generator {alg.gens[g].name}")


def collar_pairing(spec, cocycle, r_nodes=64, theta_nodes=256):
    """Pair a (1,1) cocycle on a two-chart sphere-like bundle with the base.

    The global representative is d(rho) wedge c_01 on the collar
    r in [r0, r1] around the overlap circle; the integral in polar
    coordinates and its (2 pi i)^k normalization are returned along with
    the contour oracle that fixes the sign convention.
    """
    p = spec.pairing
    coord = p["coordinate"]
    r0, r1 = (float(x) for x in p.get("radii", (0.8, 1.25)))
    orientation = float(p.get("orientation", 1))
    zg = spec.names[coord].single_gid()
    dzg = spec.names["d" + coord].single_gid()
    edge = spec.cx.nerve.of_dim(1)[0]
    comp = cocycle.comp.get(edge)
    if comp is None:
        return {"value": 0.0, "oracle": None, "normalized": 0.0}
    # Gauss-Legendre in r over the collar; trapezoid in the angle
    gx, gw = np.polynomial.legendre.leggauss(r_nodes)
    rs = 0.5 * (r1 - r0) * gx + 0.5 * (r0 + r1)
    rws = 0.5 * (r1 - r0) * gw
    thetas = np.linspace(0.0, 2.0 * np.pi, theta_nodes, endpoint=False)
    dtheta = 2.0 * np.pi / theta_nodes
    total = 0.0 + 0.0j
    for r, wr in zip(rs, rws):
        rho_d = smoothstep_d((r - r0) / (r1 - r0)) / (r1 - r0)
        for th in thetas:
            z = r * np.exp(1j * th)
            f = eval_coeff(comp, {zg: z}, [dzg])
            # d(rho) ^ f dz = rho'(r) f(z) (i r e^{i theta}) dr ^ dtheta
            total += rho_d * f * 1j * r * np.exp(1j * th) * wr * dtheta
    total *= orientation
    oracle = contour_oracle(spec, comp, zg, dzg, theta_nodes)
    normalized = total / (2.0j * np.pi)
    return {"value": complex(total), "oracle": oracle,
            "normalized": complex(normalized)}


def contour_oracle(spec, comp, zg, dzg, theta_nodes=256):
    """(2 pi i)^-1 of the contour integral of the overlap form on |z| = 1."""
    thetas = np.linspace(0.0, 2.0 * np.pi, theta_nodes, endpoint=False)
    dtheta = 2.0 * np.pi / theta_nodes
    total = 0.0 + 0.0j
    for th in thetas:
        z = np.exp(1j * th)
        f = eval_coeff(comp, {zg: z}, [dzg])
        total += f * 1j * z * dtheta
    return complex(total / (2.0j * np.pi))


def bott_projector(theta, phi):
    x = np.sin(theta) * np.cos(phi)
    y = np.sin(theta) * np.sin(phi)
    z = np.cos(theta)
    return 0.5 * np.array([[1.0 + z, x - 1j * y],
                           [x + 1j * y, 1.0 - z]], dtype=complex)


def bott_projector_partials(theta, phi):
    st, ct = np.sin(theta), np.cos(theta)
    sp, cp = np.sin(phi), np.cos(phi)
    dth = 0.5 * np.array([[-st, ct * cp - 1j * ct * sp],
                          [ct * cp + 1j * ct * sp, st]], dtype=complex)
    dph = 0.5 * np.array([[0.0, -st * sp - 1j * st * cp],
                          [-st * sp + 1j * st * cp, 0.0]], dtype=complex)
    return dth, dph


def bott_chern_weil_oracle(th_nodes=96, ph_nodes=192):
    """(2 pi i)^-1 of the sphere integral of Tr(p dp dp)."""
    gx, gw = np.polynomial.legendre.leggauss(th_nodes)
    ths = 0.5 * np.pi * gx + 0.5 * np.pi
    tws = 0.5 * np.pi * gw
    phs = np.linspace(0.0, 2.0 * np.pi, ph_nodes, endpoint=False)
    dph = 2.0 * np.pi / ph_nodes
    total = 0.0 + 0.0j
    for th, w in zip(ths, tws):
        for ph in phs:
            p = bott_projector(th, ph)
            dth, dphi = bott_projector_partials(th, ph)
            integrand = np.trace(p @ (dth @ dphi - dphi @ dth))
            total += integrand * w * dph
    return complex(total / (2.0j * np.pi))


def bott_character_component(th_nodes=96, ph_nodes=192):
    """The 2-form part of the projector character, integrated over the sphere.

    Legs are the equivariant connection A = p dp + (1-p) d(1-p); the u^0
    2-form component of Tr(p, A, A) integrates to the same Chern number as
    the curvature oracle (up to the documented word-ordering sign).
    """
    gx, gw = np.polynomial.legendre.leggauss(th_nodes)
    ths = 0.5 * np.pi * gx + 0.5 * np.pi
    tws = 0.5 * np.pi * gw
    phs = np.linspace(0.0, 2.0 * np.pi, ph_nodes, endpoint=False)
    dph = 2.0 * np.pi / ph_nodes
    total = 0.0 + 0.0j
    eye = np.eye(2, dtype=complex)
    for th, w in zip(ths, tws):
        for ph in phs:
            p = bott_projector(th, ph)
            dth, dphi = bott_projector_partials(th, ph)
            q = eye - p
            A_th = p @ dth + q @ (-dth)
            A_ph = p @ dphi + q @ (-dphi)
            two_form = np.trace(p @ (A_th @ A_ph - A_ph @ A_th))
            total += two_form * w * dph
    return complex(total / (2.0j * np.pi))
