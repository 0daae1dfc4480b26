"""SPS energy ``E = A/2 + B/4 - S/p`` and its derivatives, for both backends.

``A`` is the kinetic term, ``B`` the Coulomb self-interaction and ``S`` the
Slater integral ``int |u|^p``. Gradients are taken with respect to the
weighted L2 inner product of the field's grid, so that ``<E'(u), v>`` is the
directional derivative of the discrete energy.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import radial, spectral
from .errors import ExponentOutOfRange, GeometryError, ZeroField
from .fields import AnyField, Field3, RadialField, RadialGrid, gaussian, l2_norm

P_MIN = 18.0 / 7.0
P_MAX = 3.0
P_SLATER = 8.0 / 3.0


def check_exponent(p: float) -> float:
    if not (P_MIN < p <= P_MAX):
        raise ExponentOutOfRange(f"Slater exponent p={p} outside (18/7, 3]")
    return float(p)


@dataclass(frozen=True)
class EnergyBreakdown:
    A: float
    B: float
    S: float
    p: float
    E: float

    @classmethod
    def from_parts(cls, A: float, B: float, S: float, p: float) -> "EnergyBreakdown":
        return cls(A, B, S, p, A / 2 + B / 4 - S / p)

    @property
    def C(self) -> float:
        return -self.S

    @property
    def G(self) -> float:
        """Reduced functional with the Coulomb term dropped."""
        return self.A / 2 - self.S / self.p


def slater_integral(field: AnyField, p: float) -> float:
    check_exponent(p)
    return float(np.sum(field.grid.weights * np.abs(field.values) ** p))


def _local_force(u: np.ndarray, p: float) -> np.ndarray:
    # sign(u)|u|^(p-1): continuous at u = 0, no regularization
    return np.sign(u) * np.abs(u) ** (p - 1)


def evaluate(field: AnyField, p: float, kernel=None, coulomb: bool = True):
    """Breakdown and raw gradient array in one pass (shares the potential)."""
    check_exponent(p)
    u = field.values
    if isinstance(field, Field3):
        g = field.grid
        lap = spectral.neg_laplacian(field)
        A = float(np.sum(u * lap)) * g.weights
        if coulomb:
            V = spectral.potential_array(u, kernel or spectral.kernel_for(g))
            B = float(np.sum(V * u * u)) * g.weights
        else:
            V, B = 0.0, 0.0
    elif isinstance(field, RadialField):
        lap = radial._neg_laplacian(u, field.grid)
        A = radial.radial_kinetic(field)
        if coulomb:
            V = radial.radial_coulomb_potential(field).values
            B = float(np.sum(field.grid.weights * V * u * u))
        else:
            V, B = 0.0, 0.0
    else:
        raise TypeError(f"unsupported field type {type(field).__name__}")
    force = _local_force(u, p)
    S = float(np.sum(field.grid.weights * force * u))
    grad = lap + V * u - force
    return EnergyBreakdown.from_parts(A, B, S, p), grad


def energy(field: AnyField, p: float = P_SLATER, kernel=None) -> EnergyBreakdown:
    check_exponent(p)
    if isinstance(field, Field3):
        A = spectral.kinetic_energy(field)
        B = spectral.coulomb_energy(field, kernel)
    elif isinstance(field, RadialField):
        A = radial.radial_kinetic(field)
        B = radial.radial_coulomb_energy(field)
    else:
        raise TypeError(f"unsupported field type {type(field).__name__}")
    return EnergyBreakdown.from_parts(A, B, slater_integral(field, p), p)


def el_gradient(field: AnyField, p: float = P_SLATER, kernel=None) -> AnyField:
    """``E'(u) = -Laplacian u + (|x|^-1 * u^2) u - |u|^(p-2) u``."""
    return field.with_values(evaluate(field, p, kernel)[1])


def lagrange_multiplier(field: AnyField, p: float = P_SLATER, kernel=None,
                        breakdown: EnergyBreakdown | None = None) -> float:
    """``lambda = (A + B - S) / rho^2``, the multiplier in ``E'(u) = lambda u``."""
    mass = l2_norm(field) ** 2
    if mass == 0.0:
        raise ZeroField("multiplier undefined for the zero field")
    b = breakdown or energy(field, p, kernel)
    return (b.A + b.B - b.S) / mass


def residual(field: AnyField, p: float = P_SLATER, kernel=None) -> float:
    """``||E'(u) - lambda u|| / max(1, ||E'(u)||)``."""
    b, grad = evaluate(field, p, kernel)
    return residual_from(field, grad, lagrange_multiplier(field, p, breakdown=b))


def residual_from(field: AnyField, grad: np.ndarray, lam: float) -> float:
    w = field.grid.weights
    r = grad - lam * field.values
    gnorm = math.sqrt(float(np.sum(w * grad * grad)))
    return math.sqrt(float(np.sum(w * r * r))) / max(1.0, gnorm)


# -- rescaling u -> theta^(1 - 3 beta / 2) u(x / theta^beta) -----------------

def scaling_exponents(beta: float, p: float) -> tuple[float, float, float]:
    """Exponents of theta in ``A``, ``B`` and ``S`` under ``u_{theta,beta}``."""
    return 2 - 2 * beta, 4 - beta, (1 - 1.5 * beta) * p + 3 * beta


@dataclass(frozen=True)
class GaussianSpec:
    """Closed-form Gaussian ``rho (2 pi sigma^2)^(-3/4) exp(-r^2 / (4 sigma^2))``."""

    sigma: float
    rho: float = 1.0

    def A(self) -> float:
        return 0.75 * self.rho ** 2 / self.sigma ** 2

    def B(self) -> float:
        return self.rho ** 4 / (self.sigma * math.sqrt(math.pi))

    def S(self, p: float = P_SLATER) -> float:
        amp = self.rho * (2 * math.pi * self.sigma ** 2) ** -0.75
        return amp ** p * (4 * math.pi * self.sigma ** 2 / p) ** 1.5

    def breakdown(self, p: float = P_SLATER) -> EnergyBreakdown:
        return EnergyBreakdown.from_parts(self.A(), self.B(), self.S(p), p)

    def rescale(self, theta: float, beta: float) -> "GaussianSpec":
        return GaussianSpec(self.sigma * theta ** beta, self.rho * theta)

    def sample(self, grid) -> AnyField:
        return gaussian(grid, self.sigma, rho=self.rho)


def _support_radius(field: AnyField, rel: float = 1e-10) -> float:
    vals = np.abs(field.values)
    mask = vals > rel * vals.max()
    if isinstance(field, Field3):
        r = field.grid.radius()
        return float(np.max(np.broadcast_to(r, mask.shape)[mask]))
    return float(np.max(field.grid.r[mask]))


def _periodic_sinc(t: np.ndarray, n: int, period: float) -> np.ndarray:
    x = np.pi * t / period
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.sin(n * x) / (n * np.tan(x))
    return np.where(np.abs(np.sin(x)) < 1e-14, np.cos(n * x), out)


def _fourier_resample_matrix(grid, s: float) -> np.ndarray:
    x = grid.axis()
    y = x / s
    M = _periodic_sinc(y[:, None] - x[None, :], grid.n, 2 * grid.L)
    M[(y < -grid.L) | (y >= grid.L)] = 0.0
    return M


def _cosine_resample_matrix(grid: RadialGrid, s: float) -> np.ndarray:
    # basis cos((k + 1/2) pi r / rmax): even at r = 0, zero at rmax (DCT-IV)
    k = np.arange(grid.nr) + 0.5
    y = grid.r / s
    synth = np.cos(np.pi * np.outer(y, k) / grid.rmax)
    synth[y >= grid.rmax] = 0.0
    return synth


def rescale(field, theta: float, beta: float):
    """``u_{theta,beta}(x) = theta^(1 - 3 beta/2) u(x / theta^beta)``.

    ``GaussianSpec`` inputs are rescaled exactly. Grid fields are resampled by
    trigonometric interpolation (Fourier on ``Grid3``, a DCT-IV cosine series
    on ``RadialGrid``) and then normalized so the mass is exactly ``theta``
    times the input mass.
    """
    if theta <= 0:
        raise ValueError("theta must be positive")
    if isinstance(field, GaussianSpec):
        return field.rescale(theta, beta)
    s = theta ** beta
    target = theta * l2_norm(field)
    if s == 1.0:
        return field.with_values(field.values * theta)
    extent = field.grid.L if isinstance(field, Field3) else field.grid.rmax
    if s * _support_radius(field) >= extent:
        raise GeometryError(f"rescaled support exceeds the grid (stretch {s:.3g})")
    if isinstance(field, Field3):
        M = _fourier_resample_matrix(field.grid, s)
        vals = np.einsum("ai,bj,ck,ijk->abc", M, M, M, field.values, optimize=True)
    else:
        coef = sfft.dct(field.values, type=4, norm="ortho") * np.sqrt(2.0 / field.grid.nr)
        vals = _cosine_resample_matrix(field.grid, s) @ coef
    out = field.with_values(vals)
    norm = l2_norm(out)
    if norm == 0.0:
        raise ZeroField("rescaled field vanished on the grid")
    return out.with_values(vals * (target / norm))
