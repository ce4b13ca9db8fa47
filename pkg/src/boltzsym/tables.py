"""Reduced radial tables for the collision-kernel plane integrals.

Every Carleman-plane integral in the package has a Gaussian factor centered
at a distance rho inside the plane; its angular part integrates to a Bessel
I0 term.  The resulting one-dimensional profiles are precomputed on (rho, r)
grids and interpolated with bicubic splines:

  W(rho, r)  = int_{|alpha| >= r, alpha in plane} e^{-|alpha+p|^2/2}
               (|alpha|^2 + r^2)^kappa dalpha,         |p| = rho,
             = 2 pi int_r^inf a (a^2+r^2)^kappa e^{-(a-rho)^2/2} i0e(a rho) da

  Vbar(rho, A)  = e^{-rho^2/4} * 2 pi int_0^A t^(-1-2s) (A^2+t^2)^kappa
                  [e^{-t^2/4} I0(rho t / 2) - 1] dt

  V2bar(rho, A) = e^{-rho^2/2} * 2 pi int_0^A t^(-1-2s) (A^2+t^2)^kappa
                  [e^{-t^2/2} I0(rho t) - 2 e^{-t^2/4} I0(rho t/2) + 1] dt

with kappa = (1 + gamma + 2s)/2.  The e^{-rho^2/4} scalings keep all stored
values bounded; callers reassemble the full kernels with complementary
Gaussian factors that are <= 1 by construction.
"""

from __future__ import annotations

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import RectBivariateSpline
from scipy.special import i0e

_GL8 = leggauss(8)


def panel_rule(edges: np.ndarray, n_gl: int = 8):
    """Composite Gauss-Legendre nodes/weights over consecutive panels."""
    x, w = leggauss(n_gl) if n_gl != 8 else _GL8
    lo = edges[:-1]
    hi = edges[1:]
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def graded_edges(lo: float, hi: float, ratio: float = 0.7, inner: float = 1e-4) -> np.ndarray:
    """Panel edges on [lo, hi] geometrically graded toward lo with the given
    ratio; the innermost breakpoint sits at relative offset `inner`."""
    if hi <= lo:
        raise ValueError("empty interval")
    fracs = [1.0]
    while fracs[-1] * ratio > inner and len(fracs) < 80:
        fracs.append(fracs[-1] * ratio)
    rel = np.array([0.0] + fracs[::-1])
    return lo + (hi - lo) * rel


def _w_profile(rho: float, r: np.ndarray, kappa: float) -> np.ndarray:
    """W(rho, r) for one rho and a vector of r values."""
    out = np.empty_like(r)
    hi = rho + 9.0
    for i, ri in enumerate(r):
        top = max(hi, ri + 9.0)
        edges = np.unique(np.concatenate([
            np.array([ri]),
            np.linspace(ri, min(ri + 2.0, top), 9),
            np.linspace(max(ri, rho - 9.0), top, 37),
        ]))
        edges = edges[edges >= ri]
        a, w = panel_rule(edges)
        vals = a * (a * a + ri * ri) ** kappa * np.exp(-0.5 * (a - rho) ** 2) * i0e(a * rho)
        out[i] = 2.0 * np.pi * np.dot(w, vals)
    return out


def _v_profiles(rho: float, A: np.ndarray, kappa: float, s: float):
    """(Vbar, V2bar) for one rho and a vector of plane radii A."""
    vb = np.empty_like(A)
    v2 = np.empty_like(A)
    e4 = np.exp(-0.25 * rho * rho)
    e2 = np.exp(-0.5 * rho * rho)
    for i, Ai in enumerate(A):
        edges = graded_edges(0.0, Ai, ratio=0.7, inner=1e-6)
        t, w = panel_rule(edges)
        poly = t ** (-1.0 - 2.0 * s) * (Ai * Ai + t * t) ** kappa
        g_half = np.exp(-0.25 * (t - rho) ** 2) * i0e(0.5 * rho * t)
        g_full = np.exp(-0.5 * (t - rho) ** 2) * i0e(rho * t)
        vb[i] = 2.0 * np.pi * np.dot(w, poly * (g_half - e4))
        v2[i] = 2.0 * np.pi * np.dot(w, poly * (g_full - 2.0 * e4 * g_half + e2))
    return vb, v2


class PlaneTables:
    """Cached bicubic tables of W, Vbar, V2bar for one (gamma, s)."""

    def __init__(self, gamma: float, s: float, rho_max: float = 16.0,
                 r_max: float = 32.0, resolution: int = 1):
        self.gamma = gamma
        self.s = s
        self.kappa = 0.5 * (1.0 + gamma + 2.0 * s)
        res = max(1, int(resolution))
        rho = np.linspace(0.0, rho_max, 1 + 160 * res)
        r_fine = np.linspace(0.0, 2.0, 1 + 80 * res)
        r_coarse = np.linspace(2.0, r_max, 1 + 120 * res)[1:]
        r = np.concatenate([r_fine, r_coarse])
        Wtab = np.empty((rho.size, r.size))
        for j, rj in enumerate(rho):
            Wtab[j] = _w_profile(rj, r, self.kappa)
        self._w_spline = RectBivariateSpline(rho, r, Wtab, kx=3, ky=3)

        A_fine = np.linspace(1e-3, 2.0, 1 + 60 * res)
        A_coarse = np.linspace(2.0, r_max, 1 + 90 * res)[1:]
        A = np.concatenate([A_fine, A_coarse])
        Vtab = np.empty((rho.size, A.size))
        V2tab = np.empty((rho.size, A.size))
        for j, rj in enumerate(rho):
            Vtab[j], V2tab[j] = _v_profiles(rj, A, self.kappa, s)
        self._v_spline = RectBivariateSpline(rho, A, Vtab, kx=3, ky=3)
        self._v2_spline = RectBivariateSpline(rho, A, V2tab, kx=3, ky=3)
        self._rho_max = rho_max
        self._r_max = r_max

    def w(self, rho, r) -> np.ndarray:
        rho = np.clip(np.asarray(rho, dtype=float), 0.0, self._rho_max)
        r = np.clip(np.asarray(r, dtype=float), 0.0, self._r_max)
        return self._w_spline(rho.ravel(), r.ravel(), grid=False).reshape(rho.shape)

    def vbar(self, rho, A) -> np.ndarray:
        rho = np.clip(np.asarray(rho, dtype=float), 0.0, self._rho_max)
        A = np.clip(np.asarray(A, dtype=float), 1e-3, self._r_max)
        return self._v_spline(rho.ravel(), A.ravel(), grid=False).reshape(rho.shape)

    def v2bar(self, rho, A) -> np.ndarray:
        rho = np.clip(np.asarray(rho, dtype=float), 0.0, self._rho_max)
        A = np.clip(np.asarray(A, dtype=float), 1e-3, self._r_max)
        return self._v2_spline(rho.ravel(), A.ravel(), grid=False).reshape(rho.shape)


_CACHE: dict = {}


def plane_tables(gamma: float, s: float, resolution: int = 1) -> PlaneTables:
    key = (round(float(gamma), 12), round(float(s), 12), int(resolution))
    if key not in _CACHE:
        _CACHE[key] = PlaneTables(gamma, s, resolution=resolution)
    return _CACHE[key]
