"""Phase-space symbols of the linearized collision operator.

The gradient part of the operator is -op0(ap); the multiplicative far part
is -am(v); the cross part is -op0(as_).  All three are Carleman-plane
integrals of the canonical (unit density) kernel and reduce, after the
analytic angular step of tables.py, to sphere x radius quadratures.  The
closed-form weight atilde and the shifted symbol a_K complete the family.

Every quadrature symbol is rotation equivariant, so grid-scale consumers
evaluate it through a cubic table in the invariants (|v|, |eta|, cos angle).
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.ndimage import map_coordinates, spline_filter

from .model import ModelParams, phi_delta, phi_delta_bar
from .tables import graded_edges, panel_rule, plane_tables

_SQRT_2PI_M3 = (2.0 * np.pi) ** (-1.5)


# ---------------------------------------------------------------------------
# quadrature rules


def _polar_rule(a: float, level: int = 1, cap: float = 8.0):
    """Nodes/weights in t = cos(polar angle) for the sphere integral with a
    Gaussian factor exp(-(a t)^2 / 2); `a` is |v|.  For large a the rule is
    placed in y = a t to resolve the equatorial band."""
    n = 24 * level
    x, w = leggauss(n)
    if a <= 3.0:
        return x, w
    ycap = min(a, cap)
    y = ycap * x
    return y / a, (ycap / a) * w


def _polar_rule_wide(a: float, level: int = 1):
    """Variant for integrands localized near t = r/|v| with r up to |v|:
    covers y in [-min(a, 8), a]."""
    if a <= 3.0:
        n = 24 * level
        x, w = leggauss(n)
        return x, w
    lo = -min(a, 8.0)
    hi = a
    n = max(24 * level, int(3 * (hi - lo)) * level)
    x, w = leggauss(min(n, 220))
    mid, half = 0.5 * (hi + lo), 0.5 * (hi - lo)
    y = mid + half * x
    return y / a, (half / a) * w


def _azimuth_rule(n: int):
    phi = 2.0 * np.pi * np.arange(n) / n
    return np.cos(phi), np.full(n, 2.0 * np.pi / n)


def _r_rule_near(delta: float, level: int = 1):
    """Radial rule on [0, delta] graded toward 0."""
    inner = 1e-4 if level == 1 else 1e-6
    edges = graded_edges(0.0, delta, ratio=0.7, inner=inner)
    return panel_rule(edges, n_gl=4 + 2 * level)


def _r_rule_far(delta: float, r_max: float, level: int = 1):
    """Radial rule on [delta/4, r_max] for the complementary cutoff."""
    n_pan = max(8, int((r_max - 0.25 * delta) / (0.35 / level)))
    edges = np.linspace(0.25 * delta, r_max, n_pan + 1)
    return panel_rule(edges, n_gl=4 + 2 * level)


def _frame(k_hat: np.ndarray, eta: np.ndarray):
    """Decompose eta = par * k_hat + perp * e1 with perp >= 0."""
    par = float(eta @ k_hat)
    perp_vec = eta - par * k_hat
    perp = float(np.linalg.norm(perp_vec))
    return par, perp


# ---------------------------------------------------------------------------
# direct evaluators


def eval_ap(v, eta, params: ModelParams, level: int = 1) -> np.ndarray:
    """Symbol of the gradient (near-singularity) part, nonnegative.

    Accepts stacked points: v, eta of shape (..., 3).
    """
    v = np.atleast_2d(np.asarray(v, dtype=float))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    v, eta = np.broadcast_arrays(v, eta)
    out = np.empty(v.shape[0])
    tab = plane_tables(params.gamma, params.s, resolution=level)
    r, wr = _r_rule_near(params.delta, level)
    rker = wr * phi_delta(r, params.delta) * r ** (-1.0 - 2.0 * params.s)
    for i in range(v.shape[0]):
        out[i] = _ap_point(v[i], eta[i], params, tab, r, rker, level)
    return out


def _ap_point(v, eta, params, tab, r, rker, level):
    b = np.linalg.norm(eta)
    if b == 0.0:
        return 0.0
    a = np.linalg.norm(v)
    k_hat = v / a if a > 0 else eta / b
    par, perp = _frame(k_hat, eta)
    t, wt = _polar_rule(a, level)
    n_az = max(24 * level, int(3.2 * params.delta * perp) + 8)
    caz, waz = _azimuth_rule(n_az)
    sint = np.sqrt(np.maximum(0.0, 1.0 - t * t))
    gauss = np.exp(-0.5 * (a * t) ** 2)
    Wm = tab.w(np.broadcast_to((a * sint)[:, None], (t.size, r.size)),
               np.broadcast_to(r[None, :], (t.size, r.size)))
    u = par * t[:, None] + perp * sint[:, None] * caz[None, :]
    cosfac = 1.0 - np.cos(r[None, None, :] * u[:, :, None])
    inner = np.einsum("tr,tzr,z->t", Wm * rker[None, :], cosfac, waz,
                      optimize=True)
    return _SQRT_2PI_M3 * float(np.dot(wt * gauss, inner))


def eval_am(v, params: ModelParams, level: int = 1, r_max: float = 30.0) -> np.ndarray:
    """Multiplicative far-part coefficient; positive, eta independent."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    mags = np.linalg.norm(v, axis=-1)
    return am_of_radius(mags, params, level=level, r_max=r_max)


def am_of_radius(a, params: ModelParams, level: int = 1, r_max: float = 30.0) -> np.ndarray:
    a = np.atleast_1d(np.asarray(a, dtype=float))
    tab = plane_tables(params.gamma, params.s, resolution=level)
    r, wr = _r_rule_far(params.delta, r_max, level)
    rker = wr * phi_delta_bar(r, params.delta) * r ** (-1.0 - 2.0 * params.s)
    out = np.empty(a.shape)
    for i, ai in enumerate(a):
        t, wt = _polar_rule_wide(ai, level)
        sint = np.sqrt(np.maximum(0.0, 1.0 - t * t))
        y = ai * t
        Wm = tab.w(np.broadcast_to((ai * sint)[:, None], (t.size, r.size)),
                   np.broadcast_to(r[None, :], (t.size, r.size)))
        gauss = np.exp(-0.5 * (y[:, None] - r[None, :]) ** 2)
        out[i] = 2.0 * np.pi * _SQRT_2PI_M3 * float(
            np.einsum("t,tr,r->", wt, Wm * gauss, rker))
    return out


def eval_as(v, eta, params: ModelParams, level: int = 1) -> np.ndarray:
    """Cross-term symbol; complex valued, conj-symmetric in eta."""
    v = np.atleast_2d(np.asarray(v, dtype=float))
    eta = np.atleast_2d(np.asarray(eta, dtype=float))
    v, eta = np.broadcast_arrays(v, eta)
    out = np.empty(v.shape[0], dtype=complex)
    tab = plane_tables(params.gamma, params.s, resolution=level)
    r, wr = _r_rule_near(params.delta, level)
    rker = wr * phi_delta(r, params.delta) * r ** (-1.0 - 2.0 * params.s)
    for i in range(v.shape[0]):
        out[i] = _as_point(v[i], eta[i], params, tab, r, rker, level)
    return out


def _as_point(v, eta, params, tab, r, rker, level):
    b = np.linalg.norm(eta)
    if b == 0.0:
        return 0.0 + 0.0j
    a = np.linalg.norm(v)
    k_hat = v / a if a > 0 else eta / b
    par, perp = _frame(k_hat, eta)
    t, wt = _polar_rule(a, level)
    n_az = max(24 * level, int(3.2 * params.delta * perp) + 8)
    caz, waz = _azimuth_rule(n_az)
    sint = np.sqrt(np.maximum(0.0, 1.0 - t * t))
    y = a * t
    Wm = tab.w(np.broadcast_to((a * sint)[:, None], (t.size, r.size)),
               np.broadcast_to(r[None, :], (t.size, r.size)))
    # sqrt(mu(alpha+v)) (sqrt(mu)(alpha+v-h) - sqrt(mu)(alpha+v)) collapses to
    # exp(-(y^2+(y-r)^2)/4) - exp(-y^2/2) against the shared plane profile
    gdiff = (np.exp(-0.25 * (y[:, None] ** 2 + (y[:, None] - r[None, :]) ** 2))
             - np.exp(-0.5 * y[:, None] ** 2))
    u = par * t[:, None] + perp * sint[:, None] * caz[None, :]
    osc = np.exp(-1j * r[None, None, :] * u[:, :, None]) - 1.0
    inner = np.einsum("tr,tzr,z->t", Wm * gdiff * rker[None, :], osc, waz,
                      optimize=True)
    return -_SQRT_2PI_M3 * complex(np.dot(wt, inner))


# ---------------------------------------------------------------------------
# closed forms


def eval_atilde(v, eta, params: ModelParams) -> np.ndarray:
    """Weight <v>^gamma (1 + |v|^2 + |eta|^2 + |eta ^ v|^2)^s."""
    v = np.asarray(v, dtype=float)
    eta = np.asarray(eta, dtype=float)
    v2 = np.sum(v * v, axis=-1)
    e2 = np.sum(eta * eta, axis=-1)
    dot = np.sum(v * eta, axis=-1)
    wedge2 = np.maximum(v2 * e2 - dot * dot, 0.0)
    return (1.0 + v2) ** (0.5 * params.gamma) * (1.0 + v2 + e2 + wedge2) ** params.s


def atilde_invariants(a, b, c, params: ModelParams) -> np.ndarray:
    """atilde as a function of |v|, |eta| and the cosine of their angle."""
    a2 = np.asarray(a, dtype=float) ** 2
    b2 = np.asarray(b, dtype=float) ** 2
    wedge2 = a2 * b2 * np.maximum(0.0, 1.0 - np.asarray(c, dtype=float) ** 2)
    return (1.0 + a2) ** (0.5 * params.gamma) * (1.0 + a2 + b2 + wedge2) ** params.s


def eval_a(v, eta, params: ModelParams, level: int = 1) -> np.ndarray:
    """a = ap + am (bit-identical sum of the two evaluators)."""
    return eval_ap(v, eta, params, level) + eval_am(v, params, level)


def eval_aK(v, eta, params: ModelParams, level: int = 1) -> np.ndarray:
    """a_K = a + K <v>^(gamma + 2s)."""
    v = np.asarray(v, dtype=float)
    shift = params.K * (1.0 + np.sum(np.atleast_2d(v) ** 2, axis=-1)) ** (
        0.5 * (params.gamma + 2.0 * params.s))
    return eval_a(v, eta, params, level) + shift


def peetre_ratio(u, w, beta: float) -> np.ndarray:
    """<u>^beta <u+w>^(-|beta|) / <w>^beta; bounded by 2^|beta|."""
    u = np.asarray(u, dtype=float)
    w = np.asarray(w, dtype=float)
    bu = np.sqrt(1.0 + np.sum(u * u, axis=-1))
    bw = np.sqrt(1.0 + np.sum(w * w, axis=-1))
    buw = np.sqrt(1.0 + np.sum((u + w) ** 2, axis=-1))
    return bu ** beta * buw ** (-abs(beta)) / bw ** beta
