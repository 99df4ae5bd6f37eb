"""Markovian feedback master equation for the in-loop atom.

In the broad-band (instantaneous feedback) limit, driving a resonant
two-level atom with the in-loop field of a homodyne feedback loop of
round-loop gain g, detector efficiency eps and mode matching eta reduces to
the master equation

    rho_dot = D[sigma] rho
              - i lam [sigma_y / 2, sigma rho + rho sigma+]
              + (lam^2 / (eta eps)) D[sigma_y / 2] rho,

with feedback strength lam = g eta / (1 - g) in (-eta, inf).  The Bloch
equations decouple:

    x_dot = -gamma_x x,   y_dot = -gamma_y y,   z_dot = -gamma_z z - C,

    gamma_x = [1 + 2 lam + lam^2/(eta eps)] / 2
    gamma_y = 1/2                      (the unmonitored quadrature)
    gamma_z = gamma_x + gamma_y
    C       = 1 + lam

Negative feedback (lam < 0) narrows the x-quadrature decay below its
natural value 1/2, down to (1 - eta eps)/2 at lam = -eta eps.  Expressed
through the in-loop squeezing S of the driving field, the narrowed rate is
gamma_x = [(1 - eta) + eta S] / 2, the same dependence as for a free
squeezed bath (see `inloop.squeezed_bath`).

Time is measured in units of the longitudinal atomic lifetime (the
spontaneous decay rate is 1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bloch import (
    AtomOperator,
    AtomState,
    affine_generator,
    coupling_commutator,
    dissipator,
)
from .errors import ParameterError


@dataclass(frozen=True)
class RateSet:
    """Decay rates and constant drive of decoupled Bloch equations
    x_dot = -gamma_x x, y_dot = -gamma_y y, z_dot = -gamma_z z - C."""

    gamma_x: float
    gamma_y: float
    gamma_z: float
    C: float

    def as_dict(self) -> dict:
        return {
            "gamma_x": self.gamma_x,
            "gamma_y": self.gamma_y,
            "gamma_z": self.gamma_z,
            "C": self.C,
        }


def _validate(lam: float, eta: float, eps: float) -> None:
    if not 0.0 < eta <= 1.0:
        raise ParameterError(f"mode matching eta must be in (0, 1], got {eta}")
    if not 0.0 < eps <= 1.0:
        raise ParameterError(f"detector efficiency eps must be in (0, 1], got {eps}")
    if not lam > -eta:
        raise ParameterError(
            f"feedback strength lam must exceed -eta = {-eta} (got {lam}); "
            "stronger values are unreachable for any stable gain"
        )


def rates(lam: float, eta: float, eps: float) -> RateSet:
    """Closed-form decay rates of the feedback master equation.

    Positive lam broadens the x quadrature, negative lam narrows it;
    gamma_x is minimal at lam = -eta eps where it equals (1 - eta eps)/2.
    """
    _validate(lam, eta, eps)
    gx = 0.5 * (1.0 + 2.0 * lam + lam * lam / (eta * eps))
    gy = 0.5
    return RateSet(gamma_x=gx, gamma_y=gy, gamma_z=gx + gy, C=1.0 + lam)


def rates_from_squeezing(s_in: float, eta: float) -> float:
    """x-quadrature decay rate [(1 - eta) + eta S]/2 for input noise level S.

    The two contributions are the unmatched vacuum modes, (1 - eta)/2, and
    the matched driving field, eta S / 2.  S < 1 (squeezing) gives a
    sub-natural rate; S = 1 recovers the natural 1/2.
    """
    return 0.5 * ((1.0 - eta) + eta * s_in)


def steady_state(lam: float, eta: float, eps: float) -> AtomState:
    """Stationary state (0, 0, -C/gamma_z); equivalently
    z_ss = -1 + lam^2 / [2 eta eps (1 + lam) + lam^2]."""
    rs = rates(lam, eta, eps)
    if rs.gamma_z <= 0.0:
        raise ParameterError("gamma_z must be positive for a steady state")
    return AtomState(0.0, 0.0, -rs.C / rs.gamma_z)


@dataclass(frozen=True, eq=False)
class FeedbackGenerator:
    """Affine Bloch-space generator of the feedback master equation.

    `drift` and `constant` are assembled numerically from the superoperator
    terms (damping, feedback coupling, feedback noise), so eigenvalues of
    `drift` provide an independent check of the closed-form rates.
    """

    lam: float
    eta: float
    eps: float
    drift: np.ndarray = field(repr=False)
    constant: np.ndarray = field(repr=False)

    def rate_set(self) -> RateSet:
        return rates(self.lam, self.eta, self.eps)

    def steady_state(self) -> AtomState:
        return steady_state(self.lam, self.eta, self.eps)

    def apply(self, s: AtomState) -> np.ndarray:
        """Bloch tangent drift @ r + constant."""
        return self.drift @ s.bloch + self.constant


def build_generator(lam: float, eta: float, eps: float) -> FeedbackGenerator:
    """Assemble the feedback master equation as an affine Bloch generator.

    The three terms are applied through the generic superoperators and
    tomographed into (drift, constant); trace preservation holds by
    construction since every term is trace free.
    """
    _validate(lam, eta, eps)
    sigma = AtomOperator.lowering()
    half_sy = AtomOperator(0.0, 0.0, 0.5, 0.0)
    noise = lam * lam / (eta * eps)

    def tangent(s: AtomState) -> np.ndarray:
        t = dissipator(sigma, s)
        if lam != 0.0:
            t = t + lam * coupling_commutator(sigma, half_sy, s)
            t = t + noise * dissipator(half_sy, s)
        return t

    drift, constant = affine_generator(tangent)
    return FeedbackGenerator(lam=lam, eta=eta, eps=eps, drift=drift, constant=constant)


def evolve(gen: FeedbackGenerator, s0: AtomState, t: float) -> AtomState:
    """Exact propagation by time t >= 0: the Bloch components decay as
    independent exponentials toward (0, 0, z_ss)."""
    if t < 0.0:
        raise ParameterError(f"evolution time must be nonnegative, got {t}")
    rs = gen.rate_set()
    zss = gen.steady_state().z
    return AtomState(
        s0.x * np.exp(-rs.gamma_x * t),
        s0.y * np.exp(-rs.gamma_y * t),
        zss + (s0.z - zss) * np.exp(-rs.gamma_z * t),
    )


def evolve_path(gen: FeedbackGenerator, s0: AtomState, ts) -> np.ndarray:
    """Vectorized `evolve` over an array of times; returns shape (len(ts), 3)."""
    ts = np.asarray(ts, dtype=float)
    if np.any(ts < 0.0):
        raise ParameterError("evolution times must be nonnegative")
    rs = gen.rate_set()
    zss = gen.steady_state().z
    out = np.empty((ts.size, 3))
    out[:, 0] = s0.x * np.exp(-rs.gamma_x * ts)
    out[:, 1] = s0.y * np.exp(-rs.gamma_y * ts)
    out[:, 2] = zss + (s0.z - zss) * np.exp(-rs.gamma_z * ts)
    return out
