"""Physical parameters, Maxwellian equilibrium, angular cross-sections and
collision geometry in the sigma representation."""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class ModelParams:
    """Parameters of the linearized non-cutoff collision model.

    gamma : kinetic exponent of the relative-velocity factor, gamma > -3
    s     : order of the angular singularity, 0 < s < 1
    delta : radius of the near/far splitting in |v' - v|, 0 < delta <= 1
    c_b   : two-sided kernel-equivalence constant (reporting only)
    K     : coercivity shift multiplying <v>^(gamma+2s)
    ell   : exponent of the weighted L^2 control term
    dim   : velocity dimension; collision machinery requires 3
    """

    gamma: float = 0.0
    s: float = 0.5
    delta: float = 1.0
    c_b: float = 1.0
    K: float = 0.0
    ell: float = 0.0
    dim: int = 3

    def __post_init__(self):
        if not self.gamma > -3.0:
            raise ValueError(f"gamma must exceed -3, got {self.gamma}")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")
        if not 0.0 < self.delta <= 1.0:
            raise ValueError(f"delta must lie in (0, 1], got {self.delta}")
        if self.c_b <= 0.0:
            raise ValueError(f"c_b must be positive, got {self.c_b}")
        if self.K < 0.0:
            raise ValueError(f"K must be nonnegative, got {self.K}")
        if self.dim != 3:
            raise ValueError("collision machinery is specific to dim = 3")

    def with_K(self, K: float) -> "ModelParams":
        return ModelParams(self.gamma, self.s, self.delta, self.c_b, K, self.ell, self.dim)

    def with_delta(self, delta: float) -> "ModelParams":
        return ModelParams(self.gamma, self.s, delta, self.c_b, self.K, self.ell, self.dim)

    def key(self) -> tuple:
        """Hashable identity used by table caches."""
        return (self.gamma, self.s, self.delta)

    def to_dict(self) -> dict:
        return asdict(self)


def maxwellian(v) -> np.ndarray:
    """Normalized Maxwellian (2 pi)^(-3/2) exp(-|v|^2 / 2).

    `v` has shape (..., 3); returns shape (...).
    """
    v = np.asarray(v, dtype=float)
    return (TWO_PI) ** (-1.5) * np.exp(-0.5 * np.sum(v * v, axis=-1))


def sqrt_maxwellian(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return (TWO_PI) ** (-0.75) * np.exp(-0.25 * np.sum(v * v, axis=-1))


def post_collision(v, v_star, sigma, unit_tol: float = 1e-12):
    """Post-collision velocities for unit vector(s) sigma.

    Returns (v_prime, v_star_prime).  Inputs broadcast over leading axes;
    the last axis has length 3.  Raises ValueError when sigma is not unit
    length within `unit_tol`.
    """
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    norms = np.sqrt(np.sum(sigma * sigma, axis=-1))
    if not np.all(np.abs(norms - 1.0) <= unit_tol):
        raise ValueError("sigma must be a unit vector")
    center = 0.5 * (v + v_star)
    half_rel = 0.5 * np.linalg.norm(v - v_star, axis=-1)[..., None] * sigma
    return center + half_rel, center - half_rel


def deviation_cosine(v, v_star, sigma) -> np.ndarray:
    """cos(theta) = (v - v_star)/|v - v_star| . sigma."""
    v = np.asarray(v, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    sigma = np.asarray(sigma, dtype=float)
    rel = v - v_star
    nrm = np.linalg.norm(rel, axis=-1)
    return np.sum(rel * sigma, axis=-1) / nrm


@dataclass(frozen=True)
class CrossSection:
    """Angular cross-section b(cos theta), supported on theta in (0, pi/2].

    mode 'singular-model' fixes sin(theta) b(cos theta) theta^(1+2s) = 1; it
    is the canonical representative of the non-integrable model class.
    mode 'mollified' truncates the same density below theta_min, which makes
    every angular integral absolutely convergent.
    """

    s: float
    mode: str = "singular-model"
    theta_min: float = 0.0

    def __post_init__(self):
        if self.mode not in ("singular-model", "mollified"):
            raise ValueError(f"unknown cross-section mode {self.mode!r}")
        if self.mode == "mollified" and not self.theta_min > 0.0:
            raise ValueError("mollified mode requires theta_min > 0")
        if self.mode == "singular-model" and self.theta_min != 0.0:
            raise ValueError("theta_min is only meaningful in mollified mode")
        if not 0.0 < self.s < 1.0:
            raise ValueError(f"s must lie in (0, 1), got {self.s}")

    def b_eval(self, theta) -> np.ndarray:
        """b(cos theta) for theta in (0, pi/2]."""
        theta = np.asarray(theta, dtype=float)
        if np.any(theta <= 0.0) or np.any(theta > 0.5 * np.pi):
            raise ValueError("theta must lie in (0, pi/2]")
        out = 1.0 / (np.sin(theta) * theta ** (1.0 + 2.0 * self.s))
        if self.mode == "mollified":
            out = np.where(theta >= self.theta_min, out, 0.0)
        return out

    def angular_mass(self) -> float:
        """Integral of sin(theta) b over (theta_min, pi/2]; closed form.

        Diverges (returns inf) in singular-model mode.
        """
        if self.mode == "singular-model":
            return np.inf
        s2 = 2.0 * self.s
        return (self.theta_min ** (-s2) - (0.5 * np.pi) ** (-s2)) / s2


def carleman_btilde_from_b(xs: CrossSection, theta) -> np.ndarray:
    """Bounded factor relating the sigma kernel of `xs` to the canonical
    Carleman kernel |alpha+h|^(1+gamma+2s) / |h|^(3+2s); it depends on the
    deviation angle only:  btilde = 4 b(cos theta) sin^(2+2s)(theta/2)."""
    theta = np.asarray(theta, dtype=float)
    return 4.0 * xs.b_eval(theta) * np.sin(0.5 * theta) ** (2.0 + 2.0 * xs.s)


def b_unit_carleman(s: float, theta) -> np.ndarray:
    """Cross-section whose Carleman kernel has btilde identically 1:
    b(cos theta) = sin^-(2+2s)(theta/2) / 4.  This is the sigma-side form of
    the production (unit-btilde) collision model."""
    theta = np.asarray(theta, dtype=float)
    return 0.25 * np.sin(0.5 * theta) ** (-(2.0 + 2.0 * s))


def bump(x) -> np.ndarray:
    """Quintic spline bump on [0, 1]: equals 1 on [0, 1/4], 0 on [1, inf),
    C^2 across both knots.  Used radially as phi(|v|^2 / delta^2)."""
    x = np.asarray(x, dtype=float)
    t = (x - 0.25) / 0.75
    t = np.clip(t, 0.0, 1.0)
    return 1.0 - t ** 3 * (10.0 - 15.0 * t + 6.0 * t ** 2)


def phi_delta(v_or_r, delta: float) -> np.ndarray:
    """Radial cutoff phi_delta: 1 for |v| <= delta/2, 0 for |v| >= delta."""
    arr = np.asarray(v_or_r, dtype=float)
    if arr.ndim and arr.shape[-1] == 3 and arr.ndim > 1:
        r2 = np.sum(arr * arr, axis=-1)
    else:
        r2 = arr * arr
    return bump(r2 / delta ** 2)


def phi_delta_bar(v_or_r, delta: float) -> np.ndarray:
    """Complement 1 - phi_delta."""
    return 1.0 - phi_delta(v_or_r, delta)
