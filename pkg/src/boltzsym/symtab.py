"""Cubic tables of the quadrature symbols in rotation invariants.

ap, as and am are rotation equivariant, so their values depend on (v, eta)
only through |v|, |eta| and the cosine of the enclosed angle.  Grid-scale
consumers (dense operators, norm sweeps) evaluate them through tables built
once per parameter set; pointwise spot checks keep using the direct
evaluators in symbols.py.

The per-|v| build contracts the radial kernel against (1 - cos(r u)) and
(e^{-iru} - 1) profiles tabulated on a fine u grid, which turns the sweep
over (|eta|, cos) into interpolation and an azimuth sum.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import map_coordinates, spline_filter

from .model import ModelParams, phi_delta
from .symbols import _polar_rule, _r_rule_near, am_of_radius
from .tables import plane_tables

_SQRT_2PI_M3 = (2.0 * np.pi) ** (-1.5)


class RadialTable:
    """1D cubic-interpolated profile of an eta-independent coefficient."""

    def __init__(self, radii: np.ndarray, values: np.ndarray):
        self.radii = radii
        self.step = radii[1] - radii[0]
        self.coeffs = spline_filter(values, order=3)

    def __call__(self, r) -> np.ndarray:
        r = np.asarray(r, dtype=float)
        idx = np.clip(r / self.step, 0, self.radii.size - 1)
        return map_coordinates(self.coeffs, idx.reshape(1, -1), order=3,
                               prefilter=False, mode="nearest").reshape(r.shape)


class SymbolTable:
    """(|v|, |eta|, cos) tables of ap and as for one parameter set."""

    def __init__(self, params: ModelParams, v_max: float, eta_max: float,
                 level: int = 1, n_a: int | None = None, n_b: int | None = None,
                 n_c: int | None = None):
        self.params = params
        self.v_max = v_max
        self.eta_max = eta_max
        self.level = level
        n_a = n_a or max(48, int(v_max / 0.21) + 1)
        n_b = n_b or max(40, int(eta_max / 0.16) + 1)
        n_c = n_c or 26
        self.a_grid = np.linspace(0.0, v_max, n_a)
        self.b_grid = np.linspace(0.0, eta_max, n_b)
        self.c_grid = np.linspace(0.0, 1.0, n_c)
        ap, asr, asi = self._build()
        self._ap = spline_filter(ap, order=3)
        self._asr = spline_filter(asr, order=3)
        self._asi = spline_filter(asi, order=3)

    def _build(self):
        params = self.params
        level = self.level
        tab = plane_tables(params.gamma, params.s, resolution=level)
        r, wr = _r_rule_near(params.delta, level)
        rker = wr * phi_delta(r, params.delta) * r ** (-1.0 - 2.0 * params.s)
        n_az = max(24 * level, int(3.2 * params.delta * self.eta_max) + 8)
        phi_az = 2.0 * np.pi * np.arange(n_az) / n_az
        caz = np.cos(phi_az)
        w_az = 2.0 * np.pi / n_az
        u_grid = np.linspace(0.0, self.eta_max + 1e-9, max(400, int(self.eta_max / 0.02)))
        B, C = np.meshgrid(self.b_grid, self.c_grid, indexing="ij")
        Bf = B.ravel()
        Cf = C.ravel()
        shape = (self.a_grid.size, self.b_grid.size, self.c_grid.size)
        ap = np.empty(shape)
        asr = np.empty(shape)
        asi = np.empty(shape)
        for ia, a in enumerate(self.a_grid):
            t, wt = _polar_rule(a, level)
            sint = np.sqrt(np.maximum(0.0, 1.0 - t * t))
            y = a * t
            gauss = np.exp(-0.5 * y * y)
            Wm = tab.w(np.broadcast_to((a * sint)[:, None], (t.size, r.size)),
                       np.broadcast_to(r[None, :], (t.size, r.size)))
            gdiff = (np.exp(-0.25 * (y[:, None] ** 2 + (y[:, None] - r[None, :]) ** 2))
                     - np.exp(-0.5 * y[:, None] ** 2))
            cosru = np.cos(r[:, None] * u_grid[None, :])
            sinru = np.sin(r[:, None] * u_grid[None, :])
            prof_p = (Wm * rker[None, :]) @ (1.0 - cosru)          # (t, u)
            prof_sr = (Wm * gdiff * rker[None, :]) @ (cosru - 1.0)
            prof_si = (Wm * gdiff * rker[None, :]) @ sinru
            # u(t, az; b, c) = b (c t + sqrt(1-c^2) sint cos(phi))
            U = (Bf[:, None, None]
                 * (Cf[:, None, None] * t[None, :, None]
                    + np.sqrt(1.0 - Cf[:, None, None] ** 2)
                    * sint[None, :, None] * caz[None, None, :]))
            du = u_grid[1] - u_grid[0]
            pos = np.clip(np.abs(U) / du, 0, u_grid.size - 1.001)
            i0 = pos.astype(int)
            fr = pos - i0
            sgn = np.sign(U)
            acc_p = np.zeros(Bf.size)
            acc_sr = np.zeros(Bf.size)
            acc_si = np.zeros(Bf.size)
            for it in range(t.size):
                pp = prof_p[it]
                pr = prof_sr[it]
                pi = prof_si[it]
                hi = np.minimum(i0[:, it, :] + 1, u_grid.size - 1)
                lookup_p = pp[i0[:, it, :]] * (1 - fr[:, it, :]) + pp[hi] * fr[:, it, :]
                lookup_r = pr[i0[:, it, :]] * (1 - fr[:, it, :]) + pr[hi] * fr[:, it, :]
                lookup_i = pi[i0[:, it, :]] * (1 - fr[:, it, :]) + pi[hi] * fr[:, it, :]
                wte = wt[it] * gauss[it]
                acc_p += wte * lookup_p.sum(axis=1)
                acc_sr += wt[it] * lookup_r.sum(axis=1)
                acc_si += wt[it] * (sgn[:, it, :] * lookup_i).sum(axis=1)
            ap[ia] = (_SQRT_2PI_M3 * w_az * acc_p).reshape(B.shape)
            # as = -(re + i im) assembled from the contracted profiles
            asr[ia] = (-_SQRT_2PI_M3 * w_az * acc_sr).reshape(B.shape)
            asi[ia] = (+_SQRT_2PI_M3 * w_az * acc_si).reshape(B.shape)
        return ap, asr, asi

    # -- queries ---------------------------------------------------------

    def _coords(self, v, eta):
        v = np.asarray(v, dtype=float)
        eta = np.asarray(eta, dtype=float)
        a = np.sqrt(np.sum(v * v, axis=-1))
        b = np.sqrt(np.sum(eta * eta, axis=-1))
        dot = np.sum(v * eta, axis=-1)
        with np.errstate(invalid="ignore", divide="ignore"):
            c = np.where(a * b > 0.0, dot / (a * b), 0.0)
        c = np.clip(c, -1.0, 1.0)
        ia = np.clip(a, 0, self.v_max) / (self.a_grid[1] - self.a_grid[0])
        ib = np.clip(b, 0, self.eta_max) / (self.b_grid[1] - self.b_grid[0])
        ic = np.abs(c) / (self.c_grid[1] - self.c_grid[0])
        return ia, ib, ic, np.sign(c), b

    def ap(self, v, eta) -> np.ndarray:
        ia, ib, ic, _, b = self._coords(v, eta)
        coords = np.stack([ia.ravel(), ib.ravel(), ic.ravel()])
        out = map_coordinates(self._ap, coords, order=3, prefilter=False,
                              mode="nearest").reshape(ia.shape)
        return np.where(b == 0.0, 0.0, np.maximum(out, 0.0))

    def as_(self, v, eta) -> np.ndarray:
        ia, ib, ic, sgn, b = self._coords(v, eta)
        coords = np.stack([ia.ravel(), ib.ravel(), ic.ravel()])
        re = map_coordinates(self._asr, coords, order=3, prefilter=False,
                             mode="nearest").reshape(ia.shape)
        im = map_coordinates(self._asi, coords, order=3, prefilter=False,
                             mode="nearest").reshape(ia.shape)
        return np.where(b == 0.0, 0.0, re + 1j * sgn * im)


class AmTable:
    """Radial table of am."""

    def __init__(self, params: ModelParams, v_max: float, level: int = 1):
        radii = np.linspace(0.0, v_max, max(160, int(v_max / 0.08)))
        vals = am_of_radius(radii, params, level=level)
        self._table = RadialTable(radii, vals)
        self.v_max = v_max

    def of_radius(self, r) -> np.ndarray:
        return self._table(np.clip(r, 0.0, self.v_max))

    def __call__(self, v) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        return self.of_radius(np.sqrt(np.sum(v * v, axis=-1)))


_SYMTAB_CACHE: dict = {}
_AM_CACHE: dict = {}


def symbol_table(params: ModelParams, v_max: float, eta_max: float,
                 level: int = 1) -> SymbolTable:
    key = (params.key(), round(v_max, 9), round(eta_max, 9), level)
    if key not in _SYMTAB_CACHE:
        _SYMTAB_CACHE[key] = SymbolTable(params, v_max, eta_max, level=level)
    return _SYMTAB_CACHE[key]


def am_table(params: ModelParams, v_max: float, level: int = 1) -> AmTable:
    key = (params.key(), round(v_max, 9), level)
    if key not in _AM_CACHE:
        _AM_CACHE[key] = AmTable(params, v_max, level=level)
    return _AM_CACHE[key]
