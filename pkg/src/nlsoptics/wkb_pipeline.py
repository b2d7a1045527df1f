"""End-to-end approximation pipeline: assemble multiphase fields, compare
against spectral solutions over an epsilon sweep, bound remainders, and
quantify the modulated-phase instability of the weak limit.

The approximate field carries each profile on its oscillation e^{i phi/eps}
with phi = kappa.x - t|kappa|^2/2; on the torus grid that is a pure Fourier
mode at integer wavenumber kappa/eps, so assembly happens in Fourier space
and is exact to rounding.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.fft import fftfreq, fftn, ifftn
from scipy.optimize import brentq

from .lattice_geometry import ModeSet
from .profile_dynamics import (
    BlowUpError,
    ProfileStateEuclid,
    ProfileStateTorus,
    SimParams,
    integrate_torus,
)
from .small_divisors import survey_divisors
from .spectral_nls import (
    GridField,
    SolverConfig,
    _check_eps,
    default_dt,
    default_grid_size,
    solve,
    sup_norm_of_field,
    w_norm_of_field,
)

__all__ = [
    "ConvergenceRow",
    "ConvergenceTable",
    "RemainderReport",
    "InstabilityRecord",
    "ERROR_FLOOR",
    "assemble_uapp",
    "run_convergence",
    "remainder_report",
    "run_instability",
    "two_mode_theta",
]

ERROR_FLOOR = 1e-10  # rows below this are rounding noise, excluded from fits


def assemble_uapp(
    profiles: ProfileStateTorus, eps: float, n: int
) -> GridField:
    """Build sum_j a_j(t) e^{i(kappa_j.x - t|kappa_j|^2/2)/eps} on an n^d grid.

    Each carrier kappa_j/eps must be an integer wavenumber strictly inside
    the Nyquist band of the grid; otherwise the oscillation cannot be
    represented and a ValueError is raised.
    """
    inv = _check_eps(eps)
    modes = profiles.modes
    d = modes.d
    arr = modes.as_array()
    t = profiles.t
    spec = np.zeros((n,) * d, dtype=np.complex128)
    for j in range(arr.shape[0]):
        kap = arr[j]
        wave = kap * inv
        if np.any(np.abs(wave) >= n // 2):
            raise ValueError(
                f"unresolved carrier frequency {tuple(int(w) for w in wave)} "
                f"for grid size {n}"
            )
        nsq = int(kap @ kap)
        phase = np.exp(-0.5j * nsq * inv * t)
        spec[tuple(int(w) % n for w in wave)] += profiles.amps[j] * phase
    values = ifftn(spec) * n**d
    return GridField(d=d, n=n, values=values)


@dataclass
class ConvergenceRow:
    """One epsilon leg of the sweep.  status is 'ok' or a failure note; a
    failed row keeps NaN errors and is excluded from order fits."""

    eps: float
    n: int
    dt: float
    sup_error: float
    w_error: float
    runtime: float
    status: str = "ok"

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass
class ConvergenceTable:
    rows: list[ConvergenceRow]
    checkpoint_times: tuple[float, ...]
    order_sup: Optional[float]
    order_w: Optional[float]
    at_floor: bool

    def fitted_order_label(self, which: str = "sup") -> str:
        order = self.order_sup if which == "sup" else self.order_w
        if order is None:
            return "n/a (floor)" if self.at_floor else "n/a"
        return f"{order:.3f}"


def _fit_order(rows: Sequence[ConvergenceRow], attr: str) -> Optional[float]:
    pts = [
        (r.eps, getattr(r, attr))
        for r in rows
        if r.ok and getattr(r, attr) > ERROR_FLOOR
    ]
    if len(pts) < 2:
        return None
    x = np.log([p[0] for p in pts])
    y = np.log([p[1] for p in pts])
    return float(np.polyfit(x, y, 1)[0])


def _refine_dt(
    u0: GridField, cfg: SolverConfig, budget: float
) -> tuple[float, int]:
    """Self-consistency check on the default step: integrate a short prefix
    at dt and dt/2, scale the disagreement linearly to the full horizon, and
    halve dt until the estimate sits below a tenth of the error budget.

    The linear scaling is conservative for a second-order splitting whose
    error accumulates at worst linearly in the number of steps.
    """
    dt = cfg.dt
    rounds = 0
    prefix = min(cfg.t_final, 50 * dt)
    if prefix <= 0:
        return dt, rounds
    while rounds < 3:
        cfg_a = SolverConfig(cfg.eps, cfg.lam, cfg.sigma, dt, cfg.n, prefix)
        cfg_b = SolverConfig(cfg.eps, cfg.lam, cfg.sigma, dt / 2, cfg.n, prefix)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            ua = solve(u0, cfg_a).final
            ub = solve(u0, cfg_b).final
        err = float(np.max(np.abs(ua.values - ub.values)))
        scaled = err * (cfg.t_final / prefix)
        if scaled <= 0.1 * budget:
            break
        dt /= 2
        rounds += 1
        prefix = min(cfg.t_final, 50 * dt)
    return dt, rounds


def run_convergence(
    modes: ModeSet,
    alpha: Sequence[complex],
    lam: float,
    eps_list: Sequence[float],
    t_final: float,
    *,
    profile_dt: float = 1e-3,
    dt: Optional[float] = None,
    grid_n: Optional[int] = None,
    checkpoints: int = 8,
    dt_self_check: bool = True,
    jobs: int = 1,
    row_hook: Optional[Callable[[ConvergenceRow], None]] = None,
) -> ConvergenceTable:
    """Sweep epsilon, comparing the spectral solution with the assembled
    multiphase field at t_final and `checkpoints` intermediate times.

    The profile system is integrated once (it does not depend on epsilon)
    and shared across all legs.  With the default dt the step is validated
    per leg by a two-resolution prefix check.  A leg that blows up or fails
    resolution checks is recorded with its failure note instead of aborting
    the sweep.  jobs > 1 runs legs in threads (the transforms release the
    interpreter lock); row order always follows eps_list.
    """
    if not modes.saturated:
        warnings.warn(
            "mode set is not closed under resonances; dropped interactions "
            "make the measured rate meaningless",
            stacklevel=2,
        )
    alpha = np.asarray(alpha, dtype=np.complex128)
    checks = tuple(
        t_final * k / (checkpoints + 1) for k in range(1, checkpoints + 2)
    )
    params = SimParams(lam=lam, sigma=modes.sigma, t_final=t_final, dt=profile_dt)
    traj = integrate_torus(alpha, modes, params, snapshot_times=checks)
    kappa_sup = modes.max_sup_norm

    def one_leg(eps) -> ConvergenceRow:
        eps_f = float(eps)
        n = grid_n if grid_n is not None else default_grid_size(
            eps_f, modes.sigma, kappa_sup
        )
        dt_row = dt if dt is not None else default_dt(eps_f)
        start = time.perf_counter()
        try:
            cfg = SolverConfig(eps_f, lam, modes.sigma, dt_row, n, t_final)
            cfg.validate_resolution(kappa_sup)
            state0 = ProfileStateTorus(modes=modes, amps=alpha, t=0.0)
            u0 = assemble_uapp(state0, eps_f, n)
            if dt is None and dt_self_check:
                dt_row, _ = _refine_dt(u0, cfg, budget=eps_f)
                cfg = SolverConfig(eps_f, lam, modes.sigma, dt_row, n, t_final)
            res = solve(u0, cfg, snapshot_times=checks)
            sup_err = 0.0
            w_err = 0.0
            for t in checks:
                state = ProfileStateTorus(modes=modes, amps=traj.at(t), t=t)
                uapp = assemble_uapp(state, eps_f, n)
                diff = GridField(
                    d=modes.d, n=n, values=res.at(t).values - uapp.values
                )
                sup_err = max(sup_err, sup_norm_of_field(diff))
                w_err = max(w_err, w_norm_of_field(diff))
            return ConvergenceRow(
                eps=eps_f,
                n=n,
                dt=dt_row,
                sup_error=sup_err,
                w_error=w_err,
                runtime=time.perf_counter() - start,
            )
        except (BlowUpError, ValueError, FloatingPointError) as exc:
            return ConvergenceRow(
                eps=eps_f,
                n=n,
                dt=dt_row,
                sup_error=math.nan,
                w_error=math.nan,
                runtime=time.perf_counter() - start,
                status=f"{type(exc).__name__}: {exc}",
            )

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            rows = list(pool.map(one_leg, eps_list))
        if row_hook is not None:
            for row in rows:
                row_hook(row)
    else:
        rows = []
        for eps in eps_list:
            row = one_leg(eps)
            rows.append(row)
            if row_hook is not None:
                row_hook(row)

    ok_rows = [r for r in rows if r.ok]
    at_floor = bool(ok_rows) and all(r.sup_error <= ERROR_FLOOR for r in ok_rows)
    return ConvergenceTable(
        rows=rows,
        checkpoint_times=checks,
        order_sup=_fit_order(rows, "sup_error"),
        order_w=_fit_order(rows, "w_error"),
        at_floor=at_floor,
    )


@dataclass(frozen=True)
class RemainderReport:
    """Ingredients of the remainder estimate for the current profile state.

    r2_bound is half the summed Wiener norm of the profile Laplacians (zero
    on the torus, where profiles carry no transverse variable).  min_delta is
    the smallest nonzero resonance defect over all interaction tuples, in
    lattice units; it is positive whenever any non-resonant tuple exists,
    which is what lets the non-characteristic source be integrated by parts.
    For a set that is not closed under resonances the count only covers
    tuples inside the set, so the report understates the true source.
    """

    sigma: int
    r2_bound: float
    nonresonant_tuples: int
    min_delta: Optional[int]


def remainder_report(state, sigma: Optional[int] = None) -> RemainderReport:
    if not isinstance(state, (ProfileStateTorus, ProfileStateEuclid)):
        raise TypeError("state must be a torus or euclid profile state")
    modes = state.modes
    if sigma is None:
        sigma = modes.sigma
    survey = survey_divisors(modes, sigma)
    if isinstance(state, ProfileStateTorus):
        r2 = 0.0
    else:
        d = modes.d
        n = state.fields.shape[1]
        dx = state.length / n
        dxi = 2.0 * math.pi / state.length
        xi = 2.0 * math.pi * fftfreq(n, d=dx)
        grids = np.meshgrid(*([xi] * d), indexing="ij")
        xi_sq = sum(g * g for g in grids)
        acc = 0.0
        for j in range(state.fields.shape[0]):
            hat = fftn(state.fields[j])
            acc += float(np.sum(xi_sq * np.abs(hat)))
        r2 = 0.5 * (2.0 * math.pi) ** (-0.5 * d) * (dx * dxi) ** d * acc
    return RemainderReport(
        sigma=sigma,
        r2_bound=r2,
        nonresonant_tuples=survey.nonresonant_count,
        min_delta=survey.min_delta,
    )


def two_mode_theta(own_sq: float, other_sq: float, sigma: int) -> float:
    """Constant modulation rate of one profile in a two-mode closed system:
    theta = sum_n C(sigma+1, n) C(sigma, n) own^(sigma-n) other^n with the
    moduli squared as arguments."""
    return float(
        sum(
            math.comb(sigma + 1, nn) * math.comb(sigma, nn)
            * own_sq ** (sigma - nn) * other_sq**nn
            for nn in range(sigma + 1)
        )
    )


@dataclass(frozen=True)
class InstabilityRecord:
    """Two nearby WKB data and the O(1) gap their zero modes develop.

    alpha0/alpha1 describe the base datum alpha0 + alpha1 e^{ix/eps}; the
    tilde pair is the perturbed one.  theta0/theta0_tilde are the zero-mode
    modulation rates, t_star the within-[0, delta] time of maximal gap, and
    gap its value |alpha0 e^{-i lam t theta0} - alpha0~ e^{-i lam t theta0~}|.
    For the weak-limit variant the tilde datum is the formal limit profile
    and alpha1_tilde is None.  solver_gap is the same quantity measured from
    two spectral solves via the zero Fourier mode (None unless cross-checked).
    """

    variant: str
    rho: float
    delta: float
    s: float
    K: int
    sigma: int
    lam: float
    alpha0: float
    alpha1: float
    alpha0_tilde: float
    alpha1_tilde: Optional[float]
    theta0: float
    theta0_tilde: float
    theta_user: Optional[float]
    t_star: float
    gap: float
    hs_condition_ok: bool
    eps: Optional[float] = None
    solver_gap: Optional[float] = None
    solver_t_star: Optional[float] = None
    solver_formula_deviation: Optional[float] = None


def _solve_alpha1_for_theta(alpha0: float, theta: float, sigma: int) -> float:
    """Invert the cross part of the modulation rate: find alpha1 >= 0 with
    theta0(alpha0, alpha1) = theta + alpha0^(2 sigma)."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    own = alpha0 * alpha0

    def excess(y: float) -> float:
        return two_mode_theta(own, y, sigma) - own**sigma - theta

    hi = 1.0
    while excess(hi) < 0:
        hi *= 2.0
        if hi > 1e12:
            raise ValueError("no amplitude realizes the requested theta")
    y = brentq(excess, 0.0, hi, xtol=1e-15, rtol=8.9e-16)
    return math.sqrt(y)


def run_instability(
    rho: float,
    delta: float,
    s: float,
    K: int,
    *,
    sigma: int = 1,
    lam: float = 1.0,
    variant: str = "perturb_high",
    theta: Optional[float] = None,
    grid_points: int = 10_000,
    cross_check: bool = False,
) -> InstabilityRecord:
    """Quantify how an O(K^s)-small (in H^s, s < 0) change of WKB data at
    relative frequency K produces an O(1) zero-mode gap by time delta.

    Variants: 'perturb_high' bumps the high-mode amplitude so the rates
    differ by exactly 2 sigma^2.../delta (for sigma=1, by 2/delta);
    'perturb_zero' bumps the zero-mode amplitude by delta itself;
    'weak_limit' compares one datum against its formal weak limit, whose
    zero mode misses the cross modulation theta entirely (user-chosen).

    The separation argument needs K large enough that the perturbation is
    actually small in H^s, i.e. K > delta^(1/s); smaller K still produces
    the gap but the record flags the premise as unmet.

    With cross_check=True (variants with two data only) the gap is also
    measured from two semiclassical solves at eps = 1/K^2 through the zero
    Fourier mode.  Modest K only: the grid scales like K^2.
    """
    if not (isinstance(K, int) and K >= 1):
        raise ValueError("K must be a positive integer")
    if s >= 0:
        raise ValueError("s must be negative")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    if rho <= 0:
        raise ValueError("rho must be positive")
    if variant not in ("perturb_high", "perturb_zero", "weak_limit"):
        raise ValueError(f"unknown variant {variant!r}")

    alpha0 = rho / 2.0
    own = alpha0 * alpha0
    theta_user = None
    if variant == "perturb_high":
        alpha1 = alpha0 * K ** (-s)
        alpha0_t = alpha0
        alpha1_t = math.sqrt(alpha1 * alpha1 + 1.0 / delta)
        theta0 = two_mode_theta(own, alpha1 * alpha1, sigma)
        theta0_t = two_mode_theta(own, alpha1_t * alpha1_t, sigma)
    elif variant == "perturb_zero":
        alpha1 = alpha0 * K ** (-s)
        alpha0_t = alpha0 + delta
        alpha1_t = alpha1
        theta0 = two_mode_theta(own, alpha1 * alpha1, sigma)
        theta0_t = two_mode_theta(alpha0_t * alpha0_t, alpha1 * alpha1, sigma)
    else:
        if theta is None:
            raise ValueError("weak_limit variant requires theta")
        theta_user = float(theta)
        alpha1 = _solve_alpha1_for_theta(alpha0, theta_user, sigma)
        alpha0_t = alpha0
        alpha1_t = None
        theta0 = two_mode_theta(own, alpha1 * alpha1, sigma)
        theta0_t = own**sigma  # the naive limit only sees its own modulus

    hs_ok = K > delta ** (1.0 / s)
    if not hs_ok:
        warnings.warn(
            f"K={K} <= delta^(1/s)={delta ** (1.0 / s):.6g}: the data are "
            "not close in H^s, the separation premise is unmet",
            stacklevel=2,
        )

    times = np.linspace(0.0, delta, grid_points)
    gaps = np.abs(
        alpha0 * np.exp(-1j * lam * theta0 * times)
        - alpha0_t * np.exp(-1j * lam * theta0_t * times)
    )
    k_star = int(np.argmax(gaps))
    t_star = float(times[k_star])
    gap = float(gaps[k_star])

    eps = solver_gap = solver_t_star = solver_dev = None
    if cross_check:
        if variant == "weak_limit":
            raise ValueError(
                "cross_check needs two data to solve; the weak limit is not "
                "a solution"
            )
        if K > 64:
            raise ValueError(
                "cross_check limited to K <= 64 (grid scales like K^2); use "
                "the closed-form gap for larger K"
            )
        eps = 1.0 / (K * K)
        n = default_grid_size(eps, sigma, 1)
        cfg = SolverConfig(eps, lam, sigma, default_dt(eps), n, delta)
        cfg.validate_resolution(1)
        sample = np.linspace(0.0, delta, 101)
        x_idx = np.round(1.0 / eps).astype(int)
        series = []
        for a0, a1 in ((alpha0, alpha1), (alpha0_t, alpha1_t)):
            spec = np.zeros(n, dtype=np.complex128)
            spec[0] = a0
            spec[x_idx % n] = a1
            u0 = GridField(d=1, n=n, values=ifftn(spec) * n)
            res = solve(u0, cfg, snapshot_times=sample)
            series.append(
                np.array([np.mean(res.at(t).values) for t in sample])
            )
        diffs = np.abs(series[0] - series[1])
        k = int(np.argmax(diffs))
        solver_gap = float(diffs[k])
        solver_t_star = float(sample[k])
        solver_dev = abs(solver_gap - gap)

    return InstabilityRecord(
        variant=variant,
        rho=rho,
        delta=delta,
        s=s,
        K=K,
        sigma=sigma,
        lam=lam,
        alpha0=alpha0,
        alpha1=alpha1,
        alpha0_tilde=alpha0_t,
        alpha1_tilde=alpha1_t,
        theta0=theta0,
        theta0_tilde=theta0_t,
        theta_user=theta_user,
        t_star=t_star,
        gap=gap,
        hs_condition_ok=hs_ok,
        eps=eps,
        solver_gap=solver_gap,
        solver_t_star=solver_t_star,
        solver_formula_deviation=solver_dev,
    )
