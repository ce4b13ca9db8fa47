"""Classical, Weyl and Wick quantization on truncated velocity grids.

op0 acts row-wise through the scaled DFT.  Weyl operators use the midpoint
kernel

    K(v_i, v_j) = (2 pi)^-d sum_k q((v_i+v_j)/2, eta_k) e^{i(v_i-v_j).eta_k}
                  deta^d dv^d,

with the frequency sum either on the grid's own dual lattice (eta_refine=1,
periodic algebra: Fourier multipliers commute exactly, pure-v symbols give
exact multiplication) or refined by an integer factor (offsets then live on
a longer transform, which removes wrap-around coupling).  Wick quantization
smooths the symbol with the phase-space Gaussian pi^-d exp(-|Z|^2) before
the Weyl step; the smoothing is a centered trapezoid sum on the quantization
lattice itself, which is spectrally accurate and exact on affine symbols.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import convolve1d

from .grids import GridField, GridSpec, dft


# ---------------------------------------------------------------------------
# classical quantization


def _phased_hat(f: GridField) -> np.ndarray:
    """fhat(eta_k), flat FFT order, for assembly against exp(i v.eta)."""
    return dft(f)


def op0_apply_stack(symbol, fields, chunk: int = 1024):
    """Apply op0(symbol) to a stack of fields on one grid.

    `symbol(V, E)` receives stacked points (m, 1, dim) and frequencies
    (1, n, dim) and returns an (m, n) array (broadcasting allowed).
    """
    fields = list(fields)
    if not fields:
        return []
    spec = fields[0].spec
    E = spec.freqs()
    stack = np.stack([_phased_hat(f) for f in fields], axis=1)
    scale = (spec.deta / (2.0 * np.pi)) ** spec.dim
    pts = spec.points()
    out = np.empty((spec.size, len(fields)), dtype=complex)
    for lo in range(0, spec.size, chunk):
        hi = min(lo + chunk, spec.size)
        Q = np.asarray(symbol(pts[lo:hi, None, :], E[None, :, :]))
        if Q.ndim == 1:
            Q = np.broadcast_to(Q[None, :], (hi - lo, spec.size))
        phase = np.exp(1j * (pts[lo:hi] @ E.T))
        out[lo:hi] = (Q * phase) @ stack * scale
    return [GridField(spec, out[:, i]) for i in range(len(fields))]


def op0_apply(symbol, f: GridField) -> GridField:
    return op0_apply_stack(symbol, [f])[0]


def op0_matrix(symbol, spec: GridSpec, chunk: int = 128) -> np.ndarray:
    """Dense matrix of op0(symbol): row i is the inverse FFT of q(v_i, .)
    gathered at offsets (i - j) mod N."""
    E = spec.freqs()
    pts = spec.points()
    N = spec.n_per_axis
    n = spec.size
    idx = np.arange(N)
    wrap = (idx[:, None] - idx[None, :]) % N
    M = np.empty((n, n), dtype=complex)
    if spec.dim == 1:
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            Q = np.asarray(symbol(pts[lo:hi, None, :], E[None, :, :]))
            rows = np.fft.ifft(Q, axis=-1)
            M[lo:hi] = rows[np.arange(hi - lo)[:, None], wrap[lo:hi]]
        return M
    ii = np.unravel_index(np.arange(n), spec.shape)
    for lo in range(0, n, chunk):
        hi = min(lo + chunk, n)
        Q = np.asarray(symbol(pts[lo:hi, None, :], E[None, :, :]))
        if Q.ndim == 1:
            Q = np.broadcast_to(Q[None, :], (hi - lo, n))
        rows = np.fft.ifftn(Q.reshape(hi - lo, N, N, N), axes=(1, 2, 3))
        r_idx = np.arange(hi - lo)[:, None, None, None]
        d1 = wrap[ii[0][lo:hi]][:, :, None, None]
        d2 = wrap[ii[1][lo:hi]][:, None, :, None]
        d3 = wrap[ii[2][lo:hi]][:, None, None, :]
        M[lo:hi] = rows[r_idx, d1, d2, d3].reshape(hi - lo, n)
    return M


# ---------------------------------------------------------------------------
# Weyl quantization, midpoint route


def midpoint_axis(spec: GridSpec) -> np.ndarray:
    """Midpoints (v_i + v_j)/2 along one axis: 2N-1 values, spacing dv/2."""
    return -spec.half_width + 0.5 * spec.dv * np.arange(2 * spec.n_per_axis - 1)


def _refined_axis_freqs(spec: GridSpec, refine: int) -> np.ndarray:
    M = spec.n_per_axis * refine
    return (spec.deta / refine) * (np.fft.fftfreq(M) * M)


def weyl_matrix(symbol, spec: GridSpec, eta_refine: int = 1) -> np.ndarray:
    """Dense Weyl matrix via the midpoint kernel (see module docstring)."""
    N = spec.n_per_axis
    refine = int(eta_refine)
    M = N * refine
    fax = _refined_axis_freqs(spec, refine)
    scale = ((spec.deta / refine) / (2.0 * np.pi)) ** spec.dim * spec.dv ** spec.dim
    mid_ax = midpoint_axis(spec)
    n_sig = mid_ax.size
    n = spec.size
    idx = np.arange(N)
    K = np.empty((n, n), dtype=complex)
    if spec.dim == 1:
        E = fax[:, None]
        Q = np.asarray(symbol(mid_ax[:, None, None], E[None, :, :]))
        T = np.fft.ifft(Q, axis=-1) * M
        sig = idx[:, None] + idx[None, :]
        dmod = (idx[:, None] - idx[None, :]) % M
        K[:, :] = scale * T[sig, dmod]
        return K
    E = np.stack(np.meshgrid(fax, fax, fax, indexing="ij"), axis=-1).reshape(-1, 3)
    pair_lists = [[] for _ in range(n_sig)]
    for i1 in range(N):
        for j1 in range(N):
            pair_lists[i1 + j1].append((i1, j1))
    sig23 = idx[:, None] + idx[None, :]
    d23 = (idx[:, None] - idx[None, :]) % M
    sub = np.unravel_index(np.arange(N * N), (N, N))
    SIG2 = sig23[sub[0][:, None], sub[0][None, :]]
    SIG3 = sig23[sub[1][:, None], sub[1][None, :]]
    D2 = d23[sub[0][:, None], sub[0][None, :]]
    D3 = d23[sub[1][:, None], sub[1][None, :]]
    mids23 = np.stack(np.meshgrid(mid_ax, mid_ax, indexing="ij"), axis=-1).reshape(-1, 2)
    for s1 in range(n_sig):
        mids = np.concatenate([np.full((mids23.shape[0], 1), mid_ax[s1]), mids23], axis=1)
        Q = np.asarray(symbol(mids[:, None, :], E[None, :, :]))
        if Q.ndim == 1:
            Q = np.broadcast_to(Q[None, :], (mids.shape[0], E.shape[0]))
        T = np.fft.ifftn(Q.reshape(n_sig, n_sig, M, M, M), axes=(2, 3, 4)) * (M ** 3)
        for (i1, j1) in pair_lists[s1]:
            d1 = (i1 - j1) % M
            block = T[SIG2, SIG3, d1, D2, D3]
            K[i1 * N * N:(i1 + 1) * N * N, j1 * N * N:(j1 + 1) * N * N] = scale * block
    return K


def weyl_apply_stack(symbol, fields, eta_refine: int = 1):
    fields = list(fields)
    spec = fields[0].spec
    K = weyl_matrix(symbol, spec, eta_refine=eta_refine)
    F = np.stack([f.values for f in fields], axis=1)
    out = K @ F
    return [GridField(spec, out[:, i]) for i in range(len(fields))]


def weyl_apply(symbol, f: GridField, eta_refine: int = 1) -> GridField:
    return weyl_apply_stack(symbol, [f], eta_refine=eta_refine)[0]


# ---------------------------------------------------------------------------
# Weyl quantization, symbol-transform route (cross check)


def half_shift_symbol(Q6: np.ndarray, spec: GridSpec) -> np.ndarray:
    """Transform a symbol sampled on (v-grid)^d x (eta-lattice)^d so that
    op0 of the result equals the Weyl operator: double lattice Fourier
    transform, multiplied by the cross phase exp(i nu.y / 2).

    The v-grid and eta-lattice are mutually dual, so the cross phase is
    exp(i pi m l / N) per axis pair with signed FFT indices m, l.
    """
    N = spec.n_per_axis
    d = spec.dim
    v_axes = tuple(range(d))
    e_axes = tuple(range(d, 2 * d))
    F = np.fft.fftn(np.fft.fftn(Q6, axes=v_axes), axes=e_axes)
    m = np.fft.fftfreq(N) * N
    phase1 = np.exp(1j * np.pi * np.multiply.outer(m, m) / N)
    if d == 1:
        F = F * phase1
    else:
        F = F * phase1[:, None, None, :, None, None]
        F = F * phase1[None, :, None, None, :, None]
        F = F * phase1[None, None, :, None, None, :]
    return np.fft.ifftn(np.fft.ifftn(F, axes=e_axes), axes=v_axes)


def weyl_apply_transform(symbol, f: GridField) -> GridField:
    """Cross-check route: transform the sampled symbol, then apply op0."""
    spec = f.spec
    pts = spec.points()
    E = spec.freqs()
    Q = np.asarray(symbol(pts[:, None, :], E[None, :, :]))
    Qt = half_shift_symbol(Q.reshape(spec.shape + spec.shape), spec)
    flat = Qt.reshape(spec.size, spec.size)
    fh = _phased_hat(f)
    scale = (spec.deta / (2.0 * np.pi)) ** spec.dim
    phase = np.exp(1j * (pts @ E.T))
    return GridField(spec, scale * ((flat * phase) @ fh))


# ---------------------------------------------------------------------------
# Wick quantization


def _gauss_taps(step: float, reach: float):
    """Normalized trapezoid taps of pi^-1/2 exp(-x^2) at spacing `step`."""
    m = int(np.ceil(reach / step))
    x = step * np.arange(-m, m + 1)
    w = np.exp(-x * x)
    w /= w.sum()
    return w


def smoothed_symbol_lattice(symbol, spec: GridSpec, eta_refine: int = 1,
                            reach: float = 5.0, dtype=float) -> np.ndarray:
    """(q * pi^-d e^{-|.|^2}) sampled on (midpoint lattice) x (refined eta
    lattice), computed by separable centered trapezoid convolution on the
    padded lattice.  Returns shape (n_sig^d, M^d)."""
    if spec.dim != 3:
        raise ValueError("phase-space smoothing is implemented for dim = 3")
    N = spec.n_per_axis
    refine = int(eta_refine)
    M = N * refine
    hv = 0.5 * spec.dv
    he = spec.deta / refine
    wv = _gauss_taps(hv, reach)
    we = _gauss_taps(he, reach)
    pv = (len(wv) - 1) // 2
    pe = (len(we) - 1) // 2
    mid_ax = midpoint_axis(spec)
    n_sig = mid_ax.size
    vpad_ax = np.concatenate([mid_ax[0] - hv * np.arange(pv, 0, -1), mid_ax,
                              mid_ax[-1] + hv * np.arange(1, pv + 1)])
    ford = np.sort(_refined_axis_freqs(spec, refine))
    epad_ax = np.concatenate([ford[0] - he * np.arange(pe, 0, -1), ford,
                              ford[-1] + he * np.arange(1, pe + 1)])
    nv = vpad_ax.size
    ne = epad_ax.size
    # stage A: evaluate on padded lattice and convolve the eta axes,
    # streaming over the first two v axes
    inter = np.empty((nv, nv, nv, M, M, M), dtype=dtype)
    E3 = np.stack(np.meshgrid(epad_ax, epad_ax, epad_ax, indexing="ij"),
                  axis=-1).reshape(-1, 3)
    for i1 in range(nv):
        V3 = np.stack(np.meshgrid(vpad_ax[i1:i1 + 1], vpad_ax, vpad_ax,
                                  indexing="ij"), axis=-1).reshape(-1, 3)
        Q = np.asarray(symbol(V3[:, None, :], E3[None, :, :]))
        if Q.ndim == 1:
            Q = np.broadcast_to(Q[None, :], (V3.shape[0], E3.shape[0]))
        Q = Q.reshape(1, nv, nv, ne, ne, ne).astype(dtype)
        for ax in (3, 4, 5):
            Q = convolve1d(Q, we, axis=ax, mode="constant")
        inter[i1] = Q[0, :, :, pe:pe + M, pe:pe + M, pe:pe + M]
    # stage B: convolve the v axes, crop, reorder eta to FFT order
    for ax in (0, 1, 2):
        inter = convolve1d(inter, wv, axis=ax, mode="constant")
    out = inter[pv:pv + n_sig, pv:pv + n_sig, pv:pv + n_sig]
    unsort = np.argsort(np.argsort(_refined_axis_freqs(spec, refine)))
    out = out[:, :, :, unsort][:, :, :, :, unsort][:, :, :, :, :, unsort]
    return out.reshape(n_sig ** 3, M ** 3)


def wick_matrix(symbol, spec: GridSpec, eta_refine: int = 1,
                reach: float = 5.0) -> np.ndarray:
    """Dense Wick matrix: Gaussian phase-space smoothing, then the Weyl
    midpoint kernel."""
    table = smoothed_symbol_lattice(symbol, spec, eta_refine=eta_refine,
                                    reach=reach, dtype=complex)
    mid_ax = midpoint_axis(spec)
    n_sig = mid_ax.size

    def lookup(V, E):
        # V: (m, 1, 3) midpoints on the midpoint lattice; E: full lattice
        iv = np.rint((V[:, 0, :] - mid_ax[0]) / (0.5 * spec.dv)).astype(int)
        flat = (iv[:, 0] * n_sig + iv[:, 1]) * n_sig + iv[:, 2]
        return table[flat]

    return weyl_matrix(lookup, spec, eta_refine=eta_refine)


def wick_apply(symbol, f: GridField, eta_refine: int = 1) -> GridField:
    K = wick_matrix(symbol, f.spec, eta_refine=eta_refine)
    return GridField(f.spec, K @ f.values)


def coherent_wick_matrix_1d(symbol, spec: GridSpec, pad: float = 6.0) -> np.ndarray:
    """Cross-check route in dimension 1: rank-one sums over discretized
    coherent-state projectors.  Manifestly positive semidefinite for
    nonnegative symbols."""
    if spec.dim != 1:
        raise ValueError("coherent-state assembly is a dim-1 cross check")
    v = spec.points()[:, 0]
    p_ax = np.arange(v[0] - pad, v[-1] + pad + 1e-9, 0.4)
    eta = np.sort(spec.axis_freqs())
    n = spec.size
    K = np.zeros((n, n), dtype=complex)
    Epv = np.exp(-0.5 * (v[:, None] - p_ax[None, :]) ** 2)  # (n, np)
    w_p = 0.4
    w_e = spec.deta
    for ie, ek in enumerate(eta):
        phase = np.exp(1j * v * ek)
        psi = Epv * phase[:, None]                            # (n, np)
        qv = np.asarray(symbol(p_ax[:, None, None], np.array([[[ek]]])))
        qv = np.broadcast_to(qv.reshape(-1), (p_ax.size,))
        K += (psi * qv[None, :]) @ psi.conj().T * (w_p * w_e)
    # normalization: (2 pi)^-1 int Pi_Y dY = Id; fix by the constant symbol
    K *= np.pi ** (-0.5) * spec.dv / (2.0 * np.pi)
    return K


# ---------------------------------------------------------------------------
# composition, bounds, brackets


def moyal_compose_check(sym1, sym2, spec: GridSpec, eta_refine: int = 1):
    """Dense check of the composition expansion: returns the operator norms
    of  P1 P2 - (p1 p2)^w  and  P1 P2 - (p1 p2)^w - (1/2i)({p1,p2})^w."""
    K1 = weyl_matrix(sym1, spec, eta_refine=eta_refine)
    K2 = weyl_matrix(sym2, spec, eta_refine=eta_refine)
    prod = K1 @ K2

    def pointwise(V, E):
        return np.asarray(sym1(V, E)) * np.asarray(sym2(V, E))

    K12 = weyl_matrix(pointwise, spec, eta_refine=eta_refine)

    def bracket(V, E):
        return poisson_bracket_arrays(sym1, sym2, V, E)

    Kbr = weyl_matrix(bracket, spec, eta_refine=eta_refine)
    r1 = prod - K12
    r2 = r1 - Kbr / 2j
    return operator_norm(r1), operator_norm(r2)


def poisson_bracket_arrays(sym1, sym2, V, E, h: float = 1e-4) -> np.ndarray:
    """{p1, p2} = dp1/deta . dp2/dv - dp1/dv . dp2/deta by central
    differences, broadcasting over stacked (V, E)."""
    out = 0.0
    for a in range(3):
        dv = np.zeros(3)
        dv[a] = h
        de = np.zeros(3)
        de[a] = h
        d1_eta = (np.asarray(sym1(V, E + de)) - np.asarray(sym1(V, E - de))) / (2 * h)
        d2_v = (np.asarray(sym2(V + dv, E)) - np.asarray(sym2(V - dv, E))) / (2 * h)
        d1_v = (np.asarray(sym1(V + dv, E)) - np.asarray(sym1(V - dv, E))) / (2 * h)
        d2_eta = (np.asarray(sym2(V, E + de)) - np.asarray(sym2(V, E - de))) / (2 * h)
        out = out + d1_eta * d2_v - d1_v * d2_eta
    return out


def poisson_bracket(sym1, sym2, v, eta, h: float = 1e-4):
    """Poisson bracket at stacked points (Richardson-extrapolated central
    differences)."""
    v = np.atleast_2d(np.asarray(v, dtype=float))[:, None, :]
    eta = np.atleast_2d(np.asarray(eta, dtype=float))[None, :, :] * 1.0
    eta = np.broadcast_to(eta, v.shape).copy()
    c1 = poisson_bracket_arrays(sym1, sym2, v, eta, h=h)
    c2 = poisson_bracket_arrays(sym1, sym2, v, eta, h=0.5 * h)
    return np.squeeze((4.0 * c2 - c1) / 3.0)


def schur_bound(kernel: np.ndarray, dy: float, dz: float):
    """Row/column L^1 masses of a sampled kernel and the bound
    sqrt(M1 M2) on its operator norm."""
    k = np.abs(np.asarray(kernel))
    M1 = float(k.sum(axis=1).max() * dz)
    M2 = float(k.sum(axis=0).max() * dy)
    return M1, M2, float(np.sqrt(M1 * M2))


def operator_norm(mat: np.ndarray, iters: int = 60, seed: int = 7) -> float:
    """Spectral norm by power iteration on mat* mat."""
    rng = np.random.default_rng(seed)
    x = rng.normal(size=mat.shape[1]) + 1j * rng.normal(size=mat.shape[1])
    x /= np.linalg.norm(x)
    last = 0.0
    for _ in range(iters):
        y = mat @ x
        x = mat.conj().T @ y
        nrm = np.linalg.norm(x)
        if nrm == 0:
            return 0.0
        x /= nrm
        if abs(np.sqrt(nrm) - last) < 1e-12 * max(1.0, last):
            break
        last = np.sqrt(nrm)
    return float(np.linalg.norm(mat @ x))


def fd_derivative(symbol, mv, me, V, E, h: float = 1e-3):
    """Central finite-difference derivative d_v^mv d_eta^me q at broadcast
    points, by repeated first differences (one recursion per unit order)."""
    for axis in range(3):
        for _ in range(mv[axis]):
            symbol = _diff(symbol, axis, True, h)
    for axis in range(3):
        for _ in range(me[axis]):
            symbol = _diff(symbol, axis, False, h)
    return np.asarray(symbol(V, E))


def _diff(fun, axis: int, in_v: bool, h: float):
    shift = np.zeros(3)
    shift[axis] = h

    def stepped(V, E):
        if in_v:
            return (np.asarray(fun(V + shift, E)) - np.asarray(fun(V - shift, E))) / (2 * h)
        return (np.asarray(fun(V, E + shift)) - np.asarray(fun(V, E - shift))) / (2 * h)

    return stepped


def _multi_indices(order: int):
    from itertools import product
    out = []
    for mv in product(range(order + 1), repeat=3):
        if sum(mv) > order:
            continue
        rest = order - sum(mv)
        for me in product(range(rest + 1), repeat=3):
            if sum(me) <= rest:
                out.append((mv, me))
    return out


def seminorm(symbol, order: int, points_v: np.ndarray, points_e: np.ndarray,
             weight=None) -> float:
    """Finite-difference seminorm: sup over sample points and over all
    derivatives |a| <= order of |d^a q| / weight.  The step grows with the
    derivative order to keep repeated differencing above roundoff."""
    V = points_v[:, None, :]
    E = points_e[None, :, :]
    wvals = None if weight is None else np.asarray(weight(V, E))
    best = 0.0
    for mv, me in _multi_indices(order):
        total = sum(mv) + sum(me)
        h = 1e-3 if total <= 2 else (0.03 if total <= 4 else 0.1)
        vals = np.abs(fd_derivative(symbol, mv, me, V, E, h=h))
        if wvals is not None:
            vals = vals / wvals
        best = max(best, float(np.max(vals)))
    return best
