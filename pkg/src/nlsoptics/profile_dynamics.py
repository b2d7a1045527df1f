"""Coupled amplitude system: integrators and closed-form oracles.

Each mode j in a ModeSet carries a slowly varying amplitude a_j.  On the torus
the amplitudes are x-independent and satisfy the ODE system

    d/dt a_j = -i lambda sum_{(l_1,...,l_{2s+1}) in I_j} a_{l_1} conj(a_{l_2}) ... a_{l_{2s+1}},

conjugation on even (1-based) slots.  On the Euclidean box each a_j(t,x) is
additionally transported at velocity kappa_j; the substitution
b_j(t,x) = a_j(t, x + t*kappa_j) removes the transport term exactly, and the
shift is realized spectrally, so no spatial derivative is ever discretized.

Time stepping is classical fixed-step RK4 throughout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
import scipy.fft as sfft

from .lattice_geometry import ModeSet, ResonantTuple, enumerate_interactions

__all__ = [
    "SimParams",
    "ProfileStateTorus",
    "ProfileStateEuclid",
    "CompiledInteractions",
    "BlowUpError",
    "compile_interactions",
    "interactions_for",
    "nonlinear_rhs",
    "integrate_torus",
    "integrate_euclid",
    "explicit_torus_1d",
    "explicit_euclid_1d",
    "explicit_two_mode",
    "total_mass",
    "TorusTrajectory",
    "EuclidTrajectory",
]

BLOWUP_FACTOR = 1e6  # abort when any |a_j| exceeds this multiple of the initial E norm


class BlowUpError(RuntimeError):
    """Amplitude exceeded the guard threshold: local existence time passed."""

    def __init__(self, t: float, message: str = ""):
        self.t = t
        super().__init__(message or f"amplitude blow-up guard tripped at t={t:.6g}")


@dataclass(frozen=True)
class SimParams:
    """Coupling, nonlinearity exponent, horizon, and time step."""

    lam: float
    sigma: int
    t_final: float
    dt: float

    def __post_init__(self):
        if not math.isfinite(self.lam):
            raise ValueError("coupling must be finite")
        if self.sigma < 1:
            raise ValueError("sigma must be a positive integer")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        if self.t_final > 0 and self.dt > self.t_final * (1 + 1e-12):
            raise ValueError("dt must not exceed t_final")


@dataclass(frozen=True)
class ProfileStateTorus:
    modes: ModeSet
    amps: np.ndarray  # shape (|J|,), complex
    t: float

    def __post_init__(self):
        amps = np.asarray(self.amps, dtype=complex)
        if amps.shape != (len(self.modes),):
            raise ValueError("one amplitude per mode required")
        object.__setattr__(self, "amps", amps)


@dataclass(frozen=True)
class ProfileStateEuclid:
    modes: ModeSet
    fields: np.ndarray  # shape (|J|, n, ..., n), complex, box [0, length)^d
    t: float
    length: float

    def __post_init__(self):
        fields = np.asarray(self.fields, dtype=complex)
        if fields.ndim != 1 + self.modes.d or fields.shape[0] != len(self.modes):
            raise ValueError("fields must be stacked as (|J|, n per dimension)")
        n = fields.shape[1]
        if any(s != n for s in fields.shape[1:]):
            raise ValueError("grid must be square")
        if n & (n - 1):
            raise ValueError("points per dimension must be a power of two")
        object.__setattr__(self, "fields", fields)

    @property
    def n(self) -> int:
        return self.fields.shape[1]


@dataclass(frozen=True)
class CompiledInteractions:
    """Flat index arrays for evaluating the full nonlinear coupling at once.

    idx[t] holds the ordered indices of tuple t, target[t] its destination
    mode.  Conjugation applies to odd 0-based columns of idx.
    """

    n_modes: int
    sigma: int
    idx: np.ndarray  # (T, 2*sigma+1) int
    target: np.ndarray  # (T,) int


def interactions_for(modes: ModeSet) -> list[list[ResonantTuple]]:
    """Per-target interaction lists, index-aligned with the mode set."""
    return [enumerate_interactions(modes, j) for j in range(len(modes))]


def compile_interactions(
    interactions: Sequence[Sequence[ResonantTuple]], sigma: int
) -> CompiledInteractions:
    width = 2 * sigma + 1
    idx_rows = []
    targets = []
    for j, tuples in enumerate(interactions):
        for tup in tuples:
            if len(tup.indices) != width:
                raise ValueError("interaction width does not match sigma")
            if tup.target != j:
                raise ValueError("interaction list is not aligned with its target")
            idx_rows.append(tup.indices)
            targets.append(j)
    n_modes = len(interactions)
    if idx_rows:
        idx = np.array(idx_rows, dtype=np.intp)
        target = np.array(targets, dtype=np.intp)
    else:
        idx = np.empty((0, width), dtype=np.intp)
        target = np.empty((0,), dtype=np.intp)
    return CompiledInteractions(n_modes=n_modes, sigma=sigma, idx=idx, target=target)


def _coupling_sum(amps: np.ndarray, comp: CompiledInteractions) -> np.ndarray:
    """sum over tuples of a_{l_1} conj(a_{l_2}) ... accumulated per target.

    amps has shape (n_modes,) or (n_modes, *grid); the result matches.
    """
    out = np.zeros_like(amps)
    if comp.idx.shape[0] == 0:
        return out
    prods = amps[comp.idx]  # (T, width, *grid)
    prods[:, 1::2] = np.conj(prods[:, 1::2])
    vals = prods.prod(axis=1)
    np.add.at(out, comp.target, vals)
    return out


def _as_compiled(interactions, sigma: int) -> CompiledInteractions:
    if isinstance(interactions, CompiledInteractions):
        if interactions.sigma != sigma:
            raise ValueError("compiled interactions were built for another sigma")
        return interactions
    return compile_interactions(interactions, sigma)


def nonlinear_rhs(state, interactions, lam: float, sigma: int) -> np.ndarray:
    """-i lambda * coupling sum, for a torus or Euclidean profile state.

    interactions: per-target ResonantTuple lists (or a CompiledInteractions)
    enumerated from the state's own ModeSet with the same sigma.
    """
    comp = _as_compiled(interactions, sigma)
    if isinstance(state, ProfileStateTorus):
        values = state.amps
    elif isinstance(state, ProfileStateEuclid):
        values = state.fields
    else:
        values = np.asarray(state, dtype=complex)
    if values.shape[0] != comp.n_modes:
        raise ValueError("state and interactions disagree on the number of modes")
    return -1j * lam * _coupling_sum(values, comp)


def _segment_times(t_final: float, dt: float, snapshot_times) -> list[float]:
    marks = {0.0, t_final}
    if snapshot_times is not None:
        for t in snapshot_times:
            t = float(t)
            if t < -1e-12 or t > t_final * (1 + 1e-12):
                raise ValueError("snapshot times must lie in [0, t_final]")
            marks.add(min(max(t, 0.0), t_final))
    return sorted(marks)


def _rk4_sweep(
    y0: np.ndarray,
    rhs: Callable[[float, np.ndarray], np.ndarray],
    t_final: float,
    dt: float,
    snapshot_times,
    guard: Callable[[float, np.ndarray], None],
    record: Callable[[float, np.ndarray], None],
) -> None:
    """Fixed-step RK4 from 0 to t_final, landing exactly on snapshot marks.

    Within each segment the step is dt shrunk to divide the segment length.
    record is called at t=0 and after every step; guard may raise.
    """
    y = y0.copy()
    guard(0.0, y)
    record(0.0, y)
    marks = _segment_times(t_final, dt, snapshot_times)
    for left, right in zip(marks[:-1], marks[1:]):
        seg = right - left
        if seg <= 0:
            continue
        m = max(1, math.ceil(seg / dt - 1e-9))
        h = seg / m
        for i in range(m):
            t = left + i * h
            k1 = rhs(t, y)
            k2 = rhs(t + h / 2, y + (h / 2) * k1)
            k3 = rhs(t + h / 2, y + (h / 2) * k2)
            k4 = rhs(t + h, y + h * k3)
            y += (h / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
            t = right if i == m - 1 else left + (i + 1) * h
            guard(t, y)
            record(t, y)


@dataclass
class TorusTrajectory:
    """Recorded states of a torus integration, one row per accepted step."""

    modes: ModeSet
    params: SimParams
    times: np.ndarray  # (S,)
    amps: np.ndarray  # (S, |J|)

    def __iter__(self):
        for t, a in zip(self.times, self.amps):
            yield ProfileStateTorus(self.modes, a, float(t))

    @property
    def final(self) -> ProfileStateTorus:
        return ProfileStateTorus(self.modes, self.amps[-1], float(self.times[-1]))

    def at(self, t: float) -> np.ndarray:
        """Amplitudes at a recorded time (must match a step time to 1e-9)."""
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} was not recorded; pass it as a snapshot time")
        return self.amps[i]

    def mass_series(self) -> np.ndarray:
        return np.sum(np.abs(self.amps) ** 2, axis=1)


def integrate_torus(
    alpha: Sequence[complex],
    modes: ModeSet,
    params: SimParams,
    *,
    interactions=None,
    snapshot_times=None,
) -> TorusTrajectory:
    """RK4 integration of the torus amplitude ODEs from amplitudes alpha.

    Returns the state at every accepted step.  Aborts with BlowUpError when
    any |a_j| exceeds 1e6 times the initial E norm, or on non-finite values.
    """
    alpha = np.asarray(alpha, dtype=complex)
    if alpha.shape != (len(modes),):
        raise ValueError("one initial amplitude per mode required")
    if modes.sigma != params.sigma:
        raise ValueError("params.sigma must match the mode set")
    comp = _as_compiled(
        interactions if interactions is not None else interactions_for(modes),
        params.sigma,
    )
    if comp.n_modes != len(modes):
        raise ValueError("interactions were compiled for another mode set")
    lam = params.lam

    guard_level = BLOWUP_FACTOR * max(float(np.sum(np.abs(alpha))), 1e-300)
    times = []
    rows = []

    def rhs(t, y):
        return -1j * lam * _coupling_sum(y, comp)

    def guard(t, y):
        m = float(np.max(np.abs(y))) if y.size else 0.0
        if not np.isfinite(m):
            raise BlowUpError(t, f"non-finite amplitude at t={t:.6g}")
        if m > guard_level:
            raise BlowUpError(t)

    def record(t, y):
        times.append(t)
        rows.append(y.copy())

    if params.t_final == 0:
        guard(0.0, alpha)
        return TorusTrajectory(modes, params, np.array([0.0]), alpha[None, :].copy())

    _rk4_sweep(alpha, rhs, params.t_final, params.dt, snapshot_times, guard, record)
    return TorusTrajectory(modes, params, np.array(times), np.array(rows))


@dataclass
class EuclidTrajectory:
    """Snapshots of a Euclidean integration in the lab (unshifted) frame."""

    modes: ModeSet
    params: SimParams
    length: float
    times: np.ndarray  # (S,) snapshot times
    fields: np.ndarray  # (S, |J|, n per dimension)
    mass_times: np.ndarray  # every accepted step
    masses: np.ndarray

    @property
    def final(self) -> ProfileStateEuclid:
        return ProfileStateEuclid(
            self.modes, self.fields[-1], float(self.times[-1]), self.length
        )

    def at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        if abs(self.times[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise KeyError(f"time {t} was not recorded; pass it as a snapshot time")
        return self.fields[i]


def _axis_wavenumbers(d: int, n: int, length: float) -> list[np.ndarray]:
    """Physical wavenumbers per axis, each shaped to broadcast over the grid."""
    xi = 2 * math.pi * sfft.fftfreq(n, d=1.0 / n) / length
    out = []
    for axis in range(d):
        shape = [1] * d
        shape[axis] = n
        out.append(xi.reshape(shape))
    return out


def integrate_euclid(
    alpha: np.ndarray,
    modes: ModeSet,
    params: SimParams,
    length: float,
    *,
    interactions=None,
    snapshot_times=None,
) -> EuclidTrajectory:
    """RK4 integration of the Euclidean profile system on a periodic box.

    alpha: initial fields stacked as (|J|, n, ..., n) on [0, length)^d.  The
    transport part is removed exactly by working on b_j(t,x) = a_j(t, x+t*kappa_j);
    the frame change is a spectral phase multiplication.  The box must be large
    enough that profiles stay numerically supported away from the boundary for
    the whole run; that is the caller's responsibility.

    Snapshots (lab frame) are recorded at snapshot_times plus 0 and t_final;
    the discrete mass is recorded at every step.
    """
    alpha = np.asarray(alpha, dtype=complex)
    state0 = ProfileStateEuclid(modes, alpha, 0.0, length)  # validates shape
    if modes.sigma != params.sigma:
        raise ValueError("params.sigma must match the mode set")
    comp = _as_compiled(
        interactions if interactions is not None else interactions_for(modes),
        params.sigma,
    )
    d, n = modes.d, state0.n
    lam = params.lam
    cell = (length / n) ** d
    axes = tuple(range(1, d + 1))
    xi = _axis_wavenumbers(d, n, length)
    kap = modes.as_array().astype(float)  # (|J|, d)

    # kappa_j . xi on the grid, one entry per mode, shaped (|J|, n, ..., n)
    kdotxi = np.zeros((len(modes),) + (n,) * d)
    for j in range(len(modes)):
        acc = np.zeros((n,) * d)
        for axis in range(d):
            acc = acc + kap[j, axis] * xi[axis]
        kdotxi[j] = acc

    spectral0 = sfft.fftn(alpha, axes=axes)
    mags = np.abs(spectral0)
    enorm0 = float((2 * math.pi) ** (-d / 2) * cell * mags.sum())
    guard_level = BLOWUP_FACTOR * max(enorm0, 1e-300)

    def to_lab(t, b):
        """a_j(t, x) from the co-moving fields."""
        return sfft.ifftn(
            sfft.fftn(b, axes=axes) * np.exp(-1j * t * kdotxi), axes=axes
        )

    def rhs(t, b):
        a = to_lab(t, b)
        nonlin = -1j * lam * _coupling_sum(a, comp)
        return sfft.ifftn(
            sfft.fftn(nonlin, axes=axes) * np.exp(1j * t * kdotxi), axes=axes
        )

    snap_marks = _segment_times(params.t_final, params.dt, snapshot_times)
    snap_set = {round(t, 12) for t in snap_marks}
    snap_times, snaps = [], []
    mass_times, masses = [], []

    def guard(t, b):
        m = float(np.max(np.abs(b)))
        if not np.isfinite(m):
            raise BlowUpError(t, f"non-finite field at t={t:.6g}")
        if m > guard_level:
            raise BlowUpError(t)

    def record(t, b):
        mass_times.append(t)
        masses.append(cell * float(np.sum(b.real**2 + b.imag**2)))
        if round(t, 12) in snap_set:
            snap_times.append(t)
            snaps.append(to_lab(t, b))

    if params.t_final == 0:
        guard(0.0, alpha)
        record(0.0, alpha)
    else:
        _rk4_sweep(
            alpha, rhs, params.t_final, params.dt, snapshot_times, guard, record
        )
    return EuclidTrajectory(
        modes,
        params,
        length,
        np.array(snap_times),
        np.array(snaps),
        np.array(mass_times),
        np.array(masses),
    )


def explicit_torus_1d(alpha: Sequence[complex], lam: float, t: float) -> np.ndarray:
    """Closed-form torus amplitudes for d=1, sigma=1: alpha_j e^{-i lam t (2M - |alpha_j|^2)}."""
    alpha = np.asarray(alpha, dtype=complex)
    mod2 = np.abs(alpha) ** 2
    total = mod2.sum()
    return alpha * np.exp(-1j * lam * t * (2 * total - mod2))


def explicit_euclid_1d(
    alpha: Sequence[Callable[[np.ndarray], np.ndarray]],
    kappas: Sequence[float],
    lam: float,
    t: float,
    x: np.ndarray,
    quadrature_dt: float,
) -> np.ndarray:
    """Closed-form Euclidean amplitudes for d=1, sigma=1, at points x.

    a_j(t,x) = alpha_j(x - t kappa_j) e^{i S_j(t,x)} with

        S_j = -2 lam int_0^t sum_{l != j} |alpha_l(x + (tau-t) kappa_j - tau kappa_l)|^2 dtau
              - t lam |alpha_j(x - t kappa_j)|^2.

    The time integral uses composite Simpson quadrature at step quadrature_dt.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    m = len(alpha)
    if len(kappas) != m:
        raise ValueError("one velocity per profile required")
    out = np.empty((m,) + x.shape, dtype=complex)
    if t == 0:
        for j in range(m):
            out[j] = alpha[j](x)
        return out
    if quadrature_dt <= 0:
        raise ValueError("quadrature_dt must be positive")
    panels = max(2, 2 * math.ceil(t / (2 * quadrature_dt)))
    tau = np.linspace(0.0, t, panels + 1)
    weights = np.ones(panels + 1)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    weights *= (t / panels) / 3.0
    for j in range(m):
        shifted = alpha[j](x - t * kappas[j])
        cross = np.zeros_like(x)
        for l in range(m):
            if l == j:
                continue
            # |alpha_l| along the backward characteristic of mode j
            pts = x[None, :] + (tau[:, None] - t) * kappas[j] - tau[:, None] * kappas[l]
            vals = np.abs(alpha[l](pts)) ** 2
            cross += weights @ vals
        phase = -2 * lam * cross - t * lam * np.abs(shifted) ** 2
        out[j] = shifted * np.exp(1j * phase)
    return out


def explicit_two_mode(
    alpha_j: complex, alpha_l: complex, sigma: int, lam: float, t: float
) -> tuple[complex, complex]:
    """Closed-form two-mode torus amplitudes for any sigma.

    Phases are theta = sum_{n=0}^{sigma} C(sigma+1,n) C(sigma,n) |a|^{2(sigma-n)} |a'|^{2n}
    with (a, a') = (alpha_j, alpha_l) for the first mode and swapped for the second.
    """
    if sigma < 1:
        raise ValueError("sigma must be a positive integer")
    mj, ml = abs(alpha_j) ** 2, abs(alpha_l) ** 2

    def theta(own, other):
        return sum(
            math.comb(sigma + 1, n) * math.comb(sigma, n)
            * own ** (sigma - n) * other**n
            for n in range(sigma + 1)
        )

    return (
        alpha_j * np.exp(-1j * lam * t * theta(mj, ml)),
        alpha_l * np.exp(-1j * lam * t * theta(ml, mj)),
    )


def total_mass(state) -> float:
    """sum_j |a_j|^2 on the torus; sum_j of squared discrete L2 norms on the box."""
    if isinstance(state, ProfileStateTorus):
        return float(np.sum(np.abs(state.amps) ** 2))
    if isinstance(state, ProfileStateEuclid):
        cell = (state.length / state.n) ** state.modes.d
        return cell * float(np.sum(state.fields.real**2 + state.fields.imag**2))
    arr = np.asarray(state)
    return float(np.sum(np.abs(arr) ** 2))
