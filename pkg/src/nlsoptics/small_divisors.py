"""Small-divisor surveys over non-resonant tuples and Diophantine probes.

The divisor of a (2*sigma+1)-tuple is the absolute resonance defect delta; the
tuples with delta > 0 drive the non-characteristic remainder, and a lower
bound on delta over them controls it after one integration by parts in time.
On an integer lattice delta is a positive integer, so the bound is 1 for free.
For generic real generators no finite scan can prove a bound; the Gram probe
below only searches for small values of |sum beta_ij kappa_i.kappa_j| as
falsification evidence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .lattice_geometry import ModeSet

__all__ = [
    "DivisorSurvey",
    "GramProbe",
    "survey_divisors",
    "fit_generalized_bound",
    "gram_diophantine_probe",
]


@dataclass(frozen=True)
class DivisorSurvey:
    """Defect statistics over all ordered tuples of a mode set.

    min_delta and argmin are None exactly when every tuple is resonant (the
    distinguished all-resonant outcome, e.g. a single mode).  Defects are in
    lattice units: for a rescaled rational set, user-unit defects carry an
    extra factor scale**2.
    """

    sigma: int
    tuples_scanned: int
    nonresonant_count: int
    min_delta: Optional[int]
    argmin: Optional[tuple[int, ...]]
    b: float
    weighted_min: Optional[float]
    scale: Fraction

    @property
    def all_resonant(self) -> bool:
        return self.nonresonant_count == 0


def _defect_table(modes: ModeSet, sigma: int):
    """Yield (prefix indices, defect row over the last index) for all prefixes."""
    arr = modes.as_array()
    n = arr.shape[0]
    norms = np.einsum("ij,ij->i", arr, arr)
    for prefix in itertools.product(range(n), repeat=2 * sigma):
        vec = np.zeros(arr.shape[1], dtype=np.int64)
        nsum = 0
        for p, idx in enumerate(prefix):
            sign = 1 if p % 2 == 0 else -1
            vec += sign * arr[idx]
            nsum += sign * int(norms[idx])
        combined = vec[None, :] + arr  # last position always enters with +
        defects = np.einsum("ij,ij->i", combined, combined) - (nsum + norms)
        yield prefix, defects


def survey_divisors(
    modes: ModeSet, sigma: Optional[int] = None, *, b: float = 0.0
) -> DivisorSurvey:
    """Scan all tuples in J^(2*sigma+1), recording the nonzero-defect minimum.

    weighted_min is min over non-resonant tuples of |delta| * prod_p
    (1+|kappa_p|^2)^(b/2); with b=0 it equals min_delta.
    """
    if sigma is None:
        sigma = modes.sigma
    if sigma < 1:
        raise ValueError("sigma must be a positive integer")
    arr = modes.as_array()
    n = arr.shape[0]
    norms = np.einsum("ij,ij->i", arr, arr)
    log_w = 0.5 * b * np.log1p(norms.astype(float))

    total = n ** (2 * sigma + 1)
    nonres = 0
    best: Optional[int] = None
    best_idx: Optional[tuple[int, ...]] = None
    best_weighted = math.inf
    for prefix, defects in _defect_table(modes, sigma):
        absd = np.abs(defects)
        mask = absd > 0
        count = int(mask.sum())
        if count == 0:
            continue
        nonres += count
        prefix_logw = sum(log_w[i] for i in prefix)
        local = int(absd[mask].min())
        if best is None or local < best:
            best = local
            last = int(np.nonzero(absd == local)[0][0])
            best_idx = prefix + (last,)
        if b != 0.0:
            weighted = absd[mask] * np.exp(prefix_logw + log_w[mask])
            wmin = float(weighted.min())
            if wmin < best_weighted:
                best_weighted = wmin
        # argmin refinement: ties resolved toward the lexicographically first
        elif best == local and best_idx is not None and prefix < best_idx[:-1]:
            last = int(np.nonzero(absd == local)[0][0])
            best_idx = prefix + (last,)

    if b == 0.0:
        best_weighted = float(best) if best is not None else math.inf
    return DivisorSurvey(
        sigma=sigma,
        tuples_scanned=total,
        nonresonant_count=nonres,
        min_delta=best,
        argmin=best_idx,
        b=b,
        weighted_min=None if nonres == 0 else best_weighted,
        scale=modes.scale,
    )


def fit_generalized_bound(
    modes: ModeSet, sigma: Optional[int] = None, b_grid: Sequence[float] = (0.0,)
) -> list[tuple[float, Optional[float]]]:
    """Largest admissible constant c(b) = min over non-resonant tuples of
    |delta| * prod_p <kappa_p>^b, for each b in b_grid.

    Since <kappa> >= 1, c(b) is nondecreasing in b.  Returns (b, c) pairs;
    c is None when the non-resonant set is empty.
    """
    if sigma is None:
        sigma = modes.sigma
    for b in b_grid:
        if b < 0:
            raise ValueError("b must be nonnegative")
    arr = modes.as_array()
    norms = np.einsum("ij,ij->i", arr, arr)
    half_log = 0.5 * np.log1p(norms.astype(float))

    # collect (|delta|, sum of log<kappa>) per non-resonant tuple, then sweep b
    deltas = []
    logws = []
    for prefix, defects in _defect_table(modes, sigma):
        absd = np.abs(defects)
        mask = absd > 0
        if not mask.any():
            continue
        prefix_logw = sum(half_log[i] for i in prefix)
        deltas.append(absd[mask].astype(float))
        logws.append(prefix_logw + half_log[mask])
    if not deltas:
        return [(float(b), None) for b in b_grid]
    delta_arr = np.concatenate(deltas)
    logw_arr = np.concatenate(logws)
    out = []
    for b in b_grid:
        c = float(np.min(delta_arr * np.exp(b * logw_arr)))
        out.append((float(b), c))
    return out


@dataclass(frozen=True)
class GramProbe:
    """Result of the integer-combination scan over a Gram matrix.

    minimum is the smallest nonzero |sum_{i,j} beta_ij G_ij| over scanned
    combinations; beta_argmin realizes it with entries bounded by the
    configured beta_bound.  exact_minimum is set when the generators were
    rational (and then minimum == float(exact_minimum) after re-verification).
    Combinations that vanish identically are excluded from the minimum but
    flagged in zero_combinations: for a nonzero beta they witness an exact
    rational relation among the Gram entries (orthogonal or rationally
    dependent generators), the degenerate situation a generic choice avoids.
    """

    p: int
    beta_bound: int
    combos_scanned: int
    partial: bool
    minimum: float
    exact_minimum: Optional[Fraction]
    beta_argmin: tuple[tuple[int, ...], ...]
    sum_abs_beta: int
    zero_combinations: bool
    b_prime: Optional[float]
    c_prime_at_argmin: Optional[float]
    c_prime_scan: Optional[float]


def _parse_generators(generators):
    """Return (rows, rational) with rows as Fractions when exactly representable."""
    rows = []
    rational = True
    for vec in generators:
        row = []
        for c in vec:
            if isinstance(c, float):
                rational = False
                row.append(c)
            else:
                row.append(Fraction(c))
        rows.append(row)
    if not rows:
        raise ValueError("at least one generator required")
    d = len(rows[0])
    if any(len(r) != d for r in rows):
        raise ValueError("generators must share one dimension")
    return rows, rational


def gram_diophantine_probe(
    generators: Sequence[Sequence],
    beta_bound: int = 6,
    *,
    b_prime: Optional[float] = None,
    budget: int = 10_000_000,
) -> GramProbe:
    """Scan for the smallest nonzero |sum beta_ij kappa_i.kappa_j| over
    integer matrices beta != 0 with entries bounded by beta_bound.

    Because the Gram matrix is symmetric, only the symmetrized combination
    m_ij = beta_ij + beta_ji matters; the scan runs over upper-triangle
    coefficients (diagonal in [-B, B], off-diagonal sums in [-2B, 2B]) and
    reconstructs a realizing beta with entries within [-B, B].  Purely
    antisymmetric matrices annihilate the Gram form identically, so they are
    outside the scanned (and meaningful) space.  Combinations that evaluate
    to exactly zero are excluded from the minimum (for generic generators
    they never occur) and reported through zero_combinations.

    Rational generators are scanned in exact integer arithmetic; float
    generators use extended-precision accumulation and the reported minimum
    is then approximate.  When the coefficient space exceeds the budget the
    scan stops early and is flagged partial.
    """
    if beta_bound < 1:
        raise ValueError("beta_bound must be a positive integer")
    rows, rational = _parse_generators(generators)
    p = len(rows)

    if rational:
        denom = 1
        for r in rows:
            for c in r:
                denom = denom * c.denominator // math.gcd(denom, c.denominator)
        int_rows = [[int(c * denom) for c in r] for r in rows]
        gram_exact = [
            [
                Fraction(sum(a * b for a, b in zip(int_rows[i], int_rows[j])), denom * denom)
                for j in range(p)
            ]
            for i in range(p)
        ]
        q = 1
        for i in range(p):
            for j in range(p):
                q = q * gram_exact[i][j].denominator // math.gcd(
                    q, gram_exact[i][j].denominator
                )
        gram_scaled = np.array(
            [[int(gram_exact[i][j] * q) for j in range(p)] for i in range(p)],
            dtype=np.int64,
        )
        # the scan works on q*value as int64; guard against overflow
        cap = int(np.abs(gram_scaled).sum()) * 2 * beta_bound * p * p
        if cap >= 2**62:
            raise OverflowError("rational generators too large for exact scan")
        gvals_dtype = np.int64
    else:
        gram_scaled = np.array(
            [
                [
                    math.fsum(float(a) * float(b) for a, b in zip(rows[i], rows[j]))
                    for j in range(p)
                ]
                for i in range(p)
            ],
            dtype=np.longdouble,
        )
        q = 1
        gvals_dtype = np.longdouble

    # free coefficients: diagonal entries then upper-triangle pair sums
    coeffs = []  # (gram value in scan units, range array)
    positions = []
    diag_range = np.arange(-beta_bound, beta_bound + 1)
    off_range = np.arange(-2 * beta_bound, 2 * beta_bound + 1)
    for i in range(p):
        coeffs.append((gram_scaled[i, i], diag_range))
        positions.append((i, i))
    for i in range(p):
        for j in range(i + 1, p):
            coeffs.append((gram_scaled[i, j], off_range))
            positions.append((i, j))

    # vectorize over the trailing coefficients whose combined range fits in memory
    tail_size = 1
    split = len(coeffs)
    while split > 0 and tail_size * len(coeffs[split - 1][1]) <= 1_000_000:
        tail_size *= len(coeffs[split - 1][1])
        split -= 1
    head, tail = coeffs[:split], coeffs[split:]

    tail_vals = np.zeros(1, dtype=gvals_dtype)
    tail_abs = np.zeros(1, dtype=np.int64)
    tail_digits = np.zeros((1, 0), dtype=np.int64)
    for g, rng in tail:
        rows = tail_digits.shape[0]
        tail_vals = (tail_vals[:, None] + g * rng[None, :]).ravel()
        tail_abs = (tail_abs[:, None] + np.abs(rng)[None, :]).ravel()
        tail_digits = np.concatenate(
            [np.repeat(tail_digits, len(rng), axis=0), np.tile(rng, rows)[:, None]],
            axis=1,
        )

    best_val = None
    best_digits = None
    best_abs = 0
    best_cprime = math.inf
    zero_found = False
    scanned = 0
    partial = False

    head_ranges = [rng for _, rng in head]
    head_gs = [g for g, _ in head]
    for head_combo in itertools.product(*[r.tolist() for r in head_ranges]):
        head_val = sum(g * c for g, c in zip(head_gs, head_combo))
        head_abs = sum(abs(c) for c in head_combo)
        vals = np.abs(tail_vals + head_val)
        abss = tail_abs + head_abs
        nz = (abss > 0) & (vals != 0)
        zero_found = zero_found or bool(np.any((abss > 0) & (vals == 0)))
        scanned += len(vals)
        if nz.any():
            v = vals[nz]
            a = abss[nz]
            k = int(np.lexsort((a, v))[0])  # min value, then min support
            if (
                best_val is None
                or v[k] < best_val
                or (v[k] == best_val and a[k] < best_abs)
            ):
                best_val = v[k]
                best_abs = int(a[k])
                best_digits = tuple(head_combo) + tuple(
                    int(x) for x in tail_digits[np.nonzero(nz)[0][k]]
                )
            if b_prime is not None:
                weighted = v.astype(float) * (a.astype(float) ** b_prime) / float(q)
                wmin = float(weighted.min())
                if wmin < best_cprime:
                    best_cprime = wmin
        if scanned >= budget:
            partial = True
            break

    if best_val is None:
        raise ValueError(
            "scan found no combination with nonzero value; increase beta_bound"
        )

    # reconstruct a realizing beta matrix with entries within [-B, B]
    beta = [[0] * p for _ in range(p)]
    for (i, j), c in zip(positions, best_digits):
        if i == j:
            beta[i][i] = int(c)
        else:
            hi = int(math.ceil(c / 2))
            beta[i][j] = hi
            beta[j][i] = int(c) - hi

    exact_min = None
    if rational:
        exact_min = Fraction(0)
        for (i, j), c in zip(positions, best_digits):
            exact_min += int(c) * gram_exact[i][j]
        exact_min = abs(exact_min)
        minimum = float(exact_min)
    else:
        minimum = float(best_val)

    sum_abs = sum(abs(beta[i][j]) for i in range(p) for j in range(p))
    c_at = None
    if b_prime is not None:
        c_at = minimum * (sum_abs ** b_prime)
    return GramProbe(
        p=p,
        beta_bound=beta_bound,
        combos_scanned=scanned,
        partial=partial,
        minimum=minimum,
        exact_minimum=exact_min,
        beta_argmin=tuple(tuple(r) for r in beta),
        sum_abs_beta=sum_abs,
        zero_combinations=zero_found,
        b_prime=b_prime,
        c_prime_at_argmin=c_at,
        c_prime_scan=None if b_prime is None else best_cprime,
    )
