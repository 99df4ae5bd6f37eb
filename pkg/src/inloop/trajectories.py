"""Conditioned stochastic evolution of the in-loop atom with explicit delay.

Each trajectory integrates the Ito stochastic master equation of homodyne
detection, in Bloch form, together with the classical feedback loop:

    ds = dt D[sigma] s + sqrt(eta eps) dW H[sigma] s - dt flow(H_fb) s
    H_fb(t) = sqrt(eta) Phi(t) sigma_y / 2
    Phi(t)  = (g / sqrt(eps)) int_0^tau h(s) I(t - s) ds
    I(t)    = sqrt(eta eps) x(t) + sqrt(eps) Phi(t) + dW/dt,

where Phi = 2 beta phi is the modulator drive scaled by the laser
amplitude (beta cancels from every observable, so neither beta nor phi is
represented separately) and dW is the Gaussian shot-noise increment of
variance dt.  The feedback drive is computed strictly from past current
samples (the filter is sampled at midpoints of the lagged steps), which is
both the physically mandated causal ordering and the discretization for
which the instantaneous-feedback limit tau -> 0 reproduces the Markovian
feedback master equation without Stratonovich corrections: the delay keeps
the fed-back noise independent of the concurrent measurement increment.

Scheme notes
------------
Damping and conditioning are integrated by Euler-Maruyama (order 1/2).
The feedback term is applied as an exact rotation about the y axis by the
angle sqrt(eta) Phi dt, composed after the Euler update.  The rotation
must not be linearized: the drive carries the fed-back shot noise, so its
per-step variance scales like (g^2/eps) dt^2 / (loop memory), which is of
diffusive order dt for practicable step counts; the exact rotation keeps
the norm and captures the quadratic Ito content of the fed-back noise,
where the linearized tangent would need tau/dt >> g^2 orders of magnitude
beyond any practical budget (it silently distorts the ensemble drift long
before it visibly diverges).

A step from a state near the Bloch sphere can still overshoot the surface
by O(dW^2) through the conditioning term.  Whenever the squared Bloch
length exceeds 1 it is rescaled onto the sphere; an excess beyond
PURITY_ABORT_FACTOR * dt aborts the run as a step-size failure.  Recorded
states therefore satisfy the trajectory purity bound exactly.

Ensembles are bitwise deterministic for a fixed (seed, n_traj, dt): each
trajectory consumes its own generator seeded with seed XOR index, all
trajectories are stepped in lockstep by vectorized arithmetic (identical
per-trajectory operation order regardless of ensemble size), and means are
reduced with numpy's fixed pairwise summation over the trajectory axis.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bloch import (
    AtomOperator,
    AtomState,
    TRAJECTORY_PURITY_TOL,
    dissipator,
    hamiltonian_flow,
    measurement_superop,
)
from .errors import InstabilityError, ParameterError, StepSizeError
from .loop import (
    LoopConfig,
    LoopFilter,
    assert_discrete_stable,
    assert_stable,
    welch_spectrum,
)

# Per-step purity overshoot budget, in units of dt.  The conditioning term
# moves a near-pure state off the sphere by ~ eta eps dW^2 = O(dt) with
# chi-squared fluctuations; 200 dt is >= 11 sigma for reachable states
# while still catching runaway steps quickly.
PURITY_ABORT_FACTOR = 200.0

# Absolute backstop: no physical overshoot mechanism reaches this.
PURITY_ABORT_CEILING = 8.0


@dataclass(frozen=True)
class TrajectoryConfig:
    """Controls for a conditioned ensemble run.

    dt must resolve both the filter (dt <= tau/10) and the atomic dynamics
    (dt <= 1e-2, lifetimes = 1).  `record_stride` subsamples the stored
    trajectory records (default ~ every 0.01 lifetimes); `phi_guard` aborts
    on runaway feedback drive.
    """

    loop: LoopConfig
    dt: float
    duration: float
    n_traj: int
    seed: int
    initial_state: AtomState = AtomState(0.0, 0.0, -1.0)
    record_stride: int | None = None
    record_current: bool = False
    record_drive: bool = False
    keep_records: bool = True
    phi_guard: float = 1e3

    def validate(self) -> "TrajectoryConfig":
        tau = self.loop.filter.tau
        if self.dt <= 0.0 or self.duration <= 0.0:
            raise ParameterError("dt and duration must be positive")
        if self.dt > tau / 10.0 + 1e-15:
            raise ParameterError(
                f"dt = {self.dt} must be at most tau/10 = {tau / 10.0:.3g} "
                "to resolve the loop filter"
            )
        if self.dt > 1e-2 + 1e-15:
            raise ParameterError(f"dt = {self.dt} must be at most 1e-2 lifetimes")
        if self.n_traj < 1:
            raise ParameterError("need at least one trajectory")
        if self.phi_guard <= 0.0:
            raise ParameterError("phi_guard must be positive")
        self.initial_state.validate()
        return self

    def stride(self) -> int:
        if self.record_stride is not None:
            if self.record_stride < 1:
                raise ParameterError("record_stride must be >= 1")
            return int(self.record_stride)
        return max(1, int(round(0.01 / self.dt)))


@dataclass(frozen=True, eq=False)
class EnsembleResult:
    """Ensemble means with standard errors at the recorded times, plus the
    per-trajectory records needed for bootstrap fits (optional) and raw
    current records (optional)."""

    times: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    config: TrajectoryConfig
    n_steps: int
    records: np.ndarray | None = None
    currents: np.ndarray | None = None
    drives: np.ndarray | None = None

    def component(self, name: str) -> np.ndarray:
        return self.mean[:, "xyz".index(name)]


def mean_current(s: AtomState, phi: float, eta: float, eps: float) -> float:
    """Expected homodyne current sqrt(eta eps) <sigma_x> + sqrt(eps) Phi."""
    return np.sqrt(eta * eps) * s.x + np.sqrt(eps) * phi


def feedback_drive(history, filt: LoopFilter, g: float, eps: float, dt: float) -> float:
    """Feedback drive Phi = (g/sqrt(eps)) sum_j w_j I_{k-j} from the most
    recent current samples.

    `history` holds current samples in time order (oldest first, newest =
    the strictly previous step).  It must cover at least the nominal filter
    delay tau; samples older than the available history count as zero
    (filters with truncated infinite tails draw on up to their full
    buffered support).  Callers hold Phi at 0 during the initial warm-up.
    """
    weights = filt.discretize(dt)
    hist = np.asarray(history, dtype=float)
    needed = int(round(filt.tau / dt))
    if hist.size < needed:
        raise ParameterError(
            f"insufficient history: filter needs {needed} past samples "
            f"(delay {filt.tau:.3g}), got {hist.size}"
        )
    take = min(weights.size, hist.size)
    window = hist[-take:]
    return float(g / np.sqrt(eps) * (weights[:take] @ window[::-1]))


def step_conditioned(
    s: AtomState,
    phi: float,
    dw: float,
    dt: float,
    eta: float,
    eps: float,
    max_excess: float | None = None,
) -> AtomState:
    """Single step of the conditioned master equation: Euler-Maruyama for
    damping plus homodyne conditioning, composed with the exact feedback
    rotation exp(-i H_fb dt) for H_fb = sqrt(eta) Phi sigma_y / 2 (see the
    module docstring for why the rotation is not linearized), then the
    post-step projection."""
    sigma = AtomOperator.lowering()
    r = (
        s.bloch
        + dt * dissipator(sigma, s)
        + np.sqrt(eta * eps) * dw * measurement_superop(sigma, s)
    )
    theta = np.sqrt(eta) * phi * dt
    if theta != 0.0:
        c, sn = np.cos(theta), np.sin(theta)
        r = np.array([r[0] * c + r[2] * sn, r[1], -r[0] * sn + r[2] * c])
    cap = min(PURITY_ABORT_FACTOR * dt, PURITY_ABORT_CEILING) if max_excess is None else max_excess
    n2 = float(r @ r)
    if n2 > 1.0 + cap:
        raise StepSizeError(
            f"step size too large: purity overshoot {n2 - 1.0:.3e} exceeds "
            f"budget {cap:.3e}"
        )
    if n2 > 1.0:
        r /= np.sqrt(n2)
    return AtomState.from_bloch(r)


def _record_mask(n_steps: int, stride: int) -> np.ndarray:
    mask = np.zeros(n_steps + 1, dtype=bool)
    mask[::stride] = True
    mask[-1] = True
    return mask


def run_ensemble(cfg: TrajectoryConfig) -> EnsembleResult:
    """Integrate an ensemble of conditioned trajectories in lockstep.

    Returns ensemble means and standard errors of (x, y, z) at the recorded
    times.  Bitwise deterministic for fixed configuration (see module
    docstring for the reduction contract).
    """
    cfg.validate()
    assert_stable(cfg.loop)
    n = cfg.n_traj
    dt = cfg.dt
    n_steps = int(round(cfg.duration / dt))
    if n_steps < 1:
        raise ParameterError("duration shorter than one step")
    stride = cfg.stride()
    mask = _record_mask(n_steps, stride)
    rec_steps = np.nonzero(mask)[0]
    rec_of_step = {int(k): i for i, k in enumerate(rec_steps)}

    g = cfg.loop.g
    eta, eps = cfg.loop.eta, cfg.loop.eps
    weights = cfg.loop.filter.discretize(dt)
    assert_discrete_stable(cfg.loop.filter, g, dt)
    m = weights.size
    m_warm = int(round(cfg.loop.filter.tau / dt))
    # Phi evaluation strategy: O(1) running sum for flat weights, O(1)
    # recursion for geometric weights, O(m) dot otherwise.
    if np.allclose(weights, weights[0], rtol=1e-12, atol=0.0):
        filter_mode = "uniform"
        ratio = 1.0
    elif m >= 2 and np.allclose(
        weights[1:] / weights[:-1], weights[1] / weights[0], rtol=1e-9, atol=0.0
    ):
        filter_mode = "geometric"
        ratio = float(weights[1] / weights[0])
    else:
        filter_mode = "general"
        ratio = 0.0
    ratio_m = ratio**m
    fb_scale = g / np.sqrt(eps)
    meas_scale = np.sqrt(eta * eps)
    drive_scale = np.sqrt(eta)
    cap = min(PURITY_ABORT_FACTOR * dt, PURITY_ABORT_CEILING)

    rngs = [np.random.default_rng(cfg.seed ^ i) for i in range(n)]
    # Noise is drawn in step segments to bound memory at ~8 * n * seg bytes.
    seg_len = max(64, min(n_steps, int(2.0e8 // (8 * n)) or 1))

    x = np.full(n, cfg.initial_state.x)
    y = np.full(n, cfg.initial_state.y)
    z = np.full(n, cfg.initial_state.z)
    ring = np.zeros((m, n))
    hist_sum = np.zeros(n)  # running flat sum or geometric state

    records = np.empty((n, rec_steps.size, 3))
    currents = np.empty((n, n_steps)) if cfg.record_current else None
    drives = np.empty((n, n_steps)) if cfg.record_drive else None

    def record(step: int) -> None:
        i = rec_of_step.get(step)
        if i is not None:
            records[:, i, 0] = x
            records[:, i, 1] = y
            records[:, i, 2] = z

    record(0)
    sqrt_dt = np.sqrt(dt)
    buf = np.empty((0, n))
    buf_base = 0
    for k in range(n_steps):
        local = k - buf_base
        if local >= buf.shape[0]:
            buf_base = k
            local = 0
            take = min(seg_len, n_steps - k)
            buf = np.empty((take, n))
            for i, rng in enumerate(rngs):
                buf[:, i] = rng.standard_normal(take)
            buf *= sqrt_dt
        dw = buf[local]

        if k >= m_warm and g != 0.0:
            if filter_mode == "general":
                lag_weights = np.empty(m)
                lag_weights[(k - np.arange(1, m + 1)) % m] = weights
                phi = fb_scale * (lag_weights @ ring)
            else:
                phi = (fb_scale * weights[0]) * hist_sum
            peak = float(np.max(np.abs(phi)))
            if peak > cfg.phi_guard:
                raise InstabilityError(
                    f"feedback drive |Phi| = {peak:.3g} exceeded the guard "
                    f"{cfg.phi_guard:.3g} at t = {k * dt:.4g}"
                )
        else:
            phi = np.zeros(n)

        current = meas_scale * x + np.sqrt(eps) * phi + dw / dt
        if currents is not None:
            currents[:, k] = current
        if drives is not None:
            drives[:, k] = phi

        meas = meas_scale * dw
        one_z = 1.0 + z
        tx = one_z - x * x
        tz = -x * one_z
        x_new = x + dt * (-0.5 * x) + meas * tx
        y_new = y + dt * (-0.5 * y) + meas * (-x * y)
        z_new = z + dt * (-one_z) + meas * tz
        theta = (drive_scale * dt) * phi
        cos_t, sin_t = np.cos(theta), np.sin(theta)
        x = x_new * cos_t + z_new * sin_t
        y = y_new
        z = -x_new * sin_t + z_new * cos_t

        n2 = x * x + y * y + z * z
        worst = float(np.max(n2))
        if worst > 1.0 + cap:
            raise StepSizeError(
                f"step size too large: purity overshoot {worst - 1.0:.3e} at "
                f"t = {(k + 1) * dt:.4g} exceeds budget {cap:.3e}"
            )
        if worst > 1.0:
            fac = 1.0 / np.sqrt(np.maximum(n2, 1.0))
            x *= fac
            y *= fac
            z *= fac

        slot = k % m
        if filter_mode == "uniform":
            hist_sum += current - ring[slot]
        elif filter_mode == "geometric":
            hist_sum *= ratio
            hist_sum += current - ratio_m * ring[slot]
        ring[slot] = current
        record(k + 1)

    mean = records.sum(axis=0) / n
    if n > 1:
        var = np.square(records - mean).sum(axis=0) / (n - 1)
        stderr = np.sqrt(var / n)
    else:
        stderr = np.full_like(mean, np.nan)
    return EnsembleResult(
        times=rec_steps * dt,
        mean=mean,
        stderr=stderr,
        config=cfg,
        n_steps=n_steps,
        records=records if cfg.keep_records else None,
        currents=currents,
        drives=drives,
    )


@dataclass(frozen=True)
class DecayFit:
    """Exponential decay rate fitted to an ensemble-mean component."""

    rate: float
    stderr: float
    component: str
    window: tuple[float, float]
    n_boot: int


def fit_decay_rate(
    result: EnsembleResult,
    component: str = "x",
    window: tuple[float, float] = (0.5, 3.0),
    n_boot: int = 100,
    boot_seed: int = 1234,
) -> DecayFit:
    """Linear regression of log mean-component over the fit window (skipping
    early transients and the late noise floor), with the standard error
    estimated by a trajectory bootstrap of `n_boot` resamples."""
    ci = "xyz".index(component)
    t = result.times
    sel = (t >= window[0]) & (t <= window[1])
    if np.count_nonzero(sel) < 4:
        raise ParameterError("fit window contains fewer than 4 recorded times")
    ts = t[sel]
    mean = result.mean[sel, ci]
    if np.any(mean <= 0.0):
        raise ParameterError(
            "mean component crosses zero inside the fit window; shrink the window"
        )
    rate = -np.polyfit(ts, np.log(mean), 1)[0]
    if result.records is None:
        raise ParameterError("bootstrap needs per-trajectory records (keep_records=True)")
    sub = result.records[:, sel, ci]
    n = sub.shape[0]
    rng = np.random.default_rng(boot_seed)
    boots = np.empty(n_boot)
    for b in range(n_boot):
        idx = rng.integers(0, n, n)
        mb = sub[idx].mean(axis=0)
        if np.any(mb <= 0.0):
            boots[b] = np.nan
            continue
        boots[b] = -np.polyfit(ts, np.log(mb), 1)[0]
    good = boots[np.isfinite(boots)]
    stderr = float(np.std(good, ddof=1)) if good.size > 1 else float("nan")
    return DecayFit(
        rate=float(rate),
        stderr=stderr,
        component=component,
        window=window,
        n_boot=n_boot,
    )


def ensemble_current_psd(
    result: EnsembleResult, nperseg: int | None = None
) -> tuple[np.ndarray, np.ndarray]:
    """Welch spectrum of the recorded current, averaged over trajectories."""
    if result.currents is None:
        raise ParameterError("run with record_current=True to estimate the current PSD")
    dt = result.config.dt
    acc = None
    omega = None
    for row in result.currents:
        omega, psd = welch_spectrum(row, dt, nperseg=nperseg, min_segments=4)
        acc = psd if acc is None else acc + psd
    return omega, acc / result.currents.shape[0]
