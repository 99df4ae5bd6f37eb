"""Two-level atom in a broad-band free squeezed vacuum (the comparison model).

A minimum-uncertainty broad-band squeezed input is characterized by the
single number L: the X-quadrature spectrum of the input field, with the Y
quadrature at 1/L.  Mode matching eta of the squeezed beam onto the atomic
dipole gives the master equation

    rho_dot = (1 - eta) D[sigma] rho
              + (eta / 4L) D[(L + 1) sigma - (L - 1) sigma+] rho,

which again yields decoupled Bloch equations with

    gamma_x = [(1 - eta) + eta L] / 2
    gamma_y = [(1 - eta) + eta / L] / 2
    gamma_z = gamma_x + gamma_y,   C = 1.

For L < 1 the x decay is inhibited exactly as for in-loop squeezing at the
same input noise level; the differences are that free squeezing broadens
gamma_y (the conjugate quadrature must be anti-squeezed) and leaves the
drive C = 1 unchanged.

In the standard squeezed-bath parametrization by a photon number N and a
correlation M (with M^2 = N(N + 1) at minimum uncertainty and
L = 2N + 2M + 1), the conversion is closed form:

    N = (L - 1)^2 / (4L),   M = (L^2 - 1) / (4L).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bloch import AtomOperator, AtomState, affine_generator, dissipator
from .errors import ParameterError
from .feedback import RateSet


def _validate(eta: float, level: float) -> None:
    if not 0.0 <= eta <= 1.0:
        raise ParameterError(f"mode matching eta must be in [0, 1], got {eta}")
    if not level > 0.0:
        raise ParameterError(f"X-quadrature level L must be positive, got {level}")


def free_rates(eta: float, level: float) -> RateSet:
    """Closed-form decay rates for a free squeezed bath of X level L."""
    _validate(eta, level)
    gx = 0.5 * ((1.0 - eta) + eta * level)
    gy = 0.5 * ((1.0 - eta) + eta / level)
    return RateSet(gamma_x=gx, gamma_y=gy, gamma_z=gx + gy, C=1.0)


def photon_parameters(level: float) -> tuple[float, float]:
    """(N, M) of the minimum-uncertainty bath with X level L:
    N = (L-1)^2/(4L), M = (L^2-1)/(4L); M carries the sign of L - 1 and
    2N + 2M + 1 = L holds exactly."""
    if not level > 0.0:
        raise ParameterError(f"X-quadrature level L must be positive, got {level}")
    n = (level - 1.0) ** 2 / (4.0 * level)
    m = (level * level - 1.0) / (4.0 * level)
    return n, m


def free_steady_state(eta: float, level: float) -> AtomState:
    """Stationary state (0, 0, -1/(gamma_x + gamma_y))."""
    rs = free_rates(eta, level)
    if rs.gamma_z <= 0.0:
        raise ParameterError("gamma_z must be positive for a steady state")
    return AtomState(0.0, 0.0, -rs.C / rs.gamma_z)


@dataclass(frozen=True, eq=False)
class SqueezedBathGenerator:
    """Affine Bloch-space generator of the squeezed-bath master equation,
    assembled numerically from its two damping terms."""

    eta: float
    level: float
    drift: np.ndarray = field(repr=False)
    constant: np.ndarray = field(repr=False)

    def rate_set(self) -> RateSet:
        return free_rates(self.eta, self.level)

    def steady_state(self) -> AtomState:
        return free_steady_state(self.eta, self.level)

    def apply(self, s: AtomState) -> np.ndarray:
        return self.drift @ s.bloch + self.constant


def build_squeezed_generator(eta: float, level: float) -> SqueezedBathGenerator:
    """Assemble the squeezed-bath master equation as an affine Bloch
    generator.  The single jump operator of the squeezed channel is
    (L+1) sigma - (L-1) sigma+ = sigma_x - i L sigma_y."""
    _validate(eta, level)
    sigma = AtomOperator.lowering()
    jump = AtomOperator(0.0, 1.0, -1.0j * level, 0.0)
    w_vac = 1.0 - eta
    w_sq = eta / (4.0 * level)

    def tangent(s: AtomState) -> np.ndarray:
        return w_vac * dissipator(sigma, s) + w_sq * dissipator(jump, s)

    drift, constant = affine_generator(tangent)
    return SqueezedBathGenerator(eta=eta, level=level, drift=drift, constant=constant)


def free_evolve(gen: SqueezedBathGenerator, s0: AtomState, t: float) -> AtomState:
    """Exact propagation under the squeezed-bath Bloch equations."""
    if t < 0.0:
        raise ParameterError(f"evolution time must be nonnegative, got {t}")
    rs = gen.rate_set()
    zss = gen.steady_state().z
    return AtomState(
        s0.x * np.exp(-rs.gamma_x * t),
        s0.y * np.exp(-rs.gamma_y * t),
        zss + (s0.z - zss) * np.exp(-rs.gamma_z * t),
    )
