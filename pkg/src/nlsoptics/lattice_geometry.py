"""Wave vectors, characteristic phases, and resonance closure.

A plane-wave phase with wave vector kappa is phi(t,x) = kappa.x - t|kappa|^2/2,
the solution of the eikonal equation d_t phi + |grad phi|^2/2 = 0 with linear
initial data.  A (2*sigma+1)-tuple of wave vectors is resonant when its
alternating-sign combination is again characteristic, i.e. when

    |sum_p (-1)^(p+1) kappa_p|^2  ==  sum_p (-1)^(p+1) |kappa_p|^2.

Everything here is exact integer arithmetic.  Rational vectors are admitted at
ingestion and rescaled to a common integer lattice; the scale factor is kept so
results can be reported in user units.
"""

from __future__ import annotations

import itertools
import json
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

__all__ = [
    "WaveVector",
    "Phase",
    "ModeSet",
    "ResonantTuple",
    "ClosureWarning",
    "resonance_defect",
    "complete_rectangle",
    "close_under_resonances",
    "enumerate_interactions",
    "rescale_to_integers",
    "load_mode_document",
    "mode_document",
]


class ClosureWarning(UserWarning):
    """Raised as a warning when a closure run hits a truncation limit."""


@dataclass(frozen=True, order=True)
class WaveVector:
    """Integer lattice vector kappa; equality and ordering are componentwise."""

    coords: tuple[int, ...]

    def __post_init__(self):
        if len(self.coords) == 0:
            raise ValueError("wave vector needs at least one coordinate")
        if not all(isinstance(c, int) for c in self.coords):
            # bools are ints in python, reject them anyway
            if any(isinstance(c, bool) for c in self.coords):
                raise TypeError("wave vector coordinates must be integers")
            coerced = []
            for c in self.coords:
                ic = int(c)
                if ic != c:
                    raise TypeError("wave vector coordinates must be integers")
                coerced.append(ic)
            object.__setattr__(self, "coords", tuple(coerced))

    @property
    def dim(self) -> int:
        return len(self.coords)

    @property
    def norm_sq(self) -> int:
        return sum(c * c for c in self.coords)

    @property
    def sup_norm(self) -> int:
        return max(abs(c) for c in self.coords)

    def dot(self, other: "WaveVector") -> int:
        _check_dim(self, other)
        return sum(a * b for a, b in zip(self.coords, other.coords))

    def __add__(self, other: "WaveVector") -> "WaveVector":
        _check_dim(self, other)
        return WaveVector(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __sub__(self, other: "WaveVector") -> "WaveVector":
        _check_dim(self, other)
        return WaveVector(tuple(a - b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "WaveVector":
        return WaveVector(tuple(-a for a in self.coords))

    def __repr__(self) -> str:
        return f"WaveVector({self.coords})"


def _check_dim(a: WaveVector, b: WaveVector) -> None:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")


@dataclass(frozen=True)
class Phase:
    """Characteristic phase phi(t,x) = kappa.x - t*omega with omega = |kappa|^2/2.

    omega is stored as an exact rational; the invariant omega == |kappa|^2 / 2
    is enforced at construction.
    """

    kappa: WaveVector
    omega: Fraction = None  # type: ignore[assignment]

    def __post_init__(self):
        expected = Fraction(self.kappa.norm_sq, 2)
        if self.omega is None:
            object.__setattr__(self, "omega", expected)
        elif Fraction(self.omega) != expected:
            raise ValueError(f"omega must equal |kappa|^2/2 = {expected}")

    def __call__(self, t: float, x: Sequence[float]) -> float:
        """Evaluate phi(t, x) in user units."""
        return float(sum(k * xi for k, xi in zip(self.kappa.coords, x)) - t * self.omega)


@dataclass(frozen=True)
class ResonantTuple:
    """Ordered index tuple (l_1, ..., l_{2 sigma + 1}) resonant toward mode j."""

    indices: tuple[int, ...]
    target: int


@dataclass(frozen=True)
class ModeSet:
    """A finite set of wave vectors closed (or truncated) under resonances.

    Vectors are kept in lexicographic order; this ordering is the canonical
    index set J that all downstream modules use.  ``generations[i]`` is the
    closure generation at which ``vectors[i]`` first appeared (0 for initial
    data).  ``saturated`` is True iff a full creation scan produced nothing new
    within limits, i.e. the set is genuinely closed.  ``scale`` carries the
    rational unit so that user vectors are ``scale * vectors[i]``.
    """

    d: int
    sigma: int
    vectors: tuple[WaveVector, ...]
    generations: tuple[int, ...]
    saturated: bool
    scale: Fraction = Fraction(1)
    creation_edges: tuple = ()

    def __post_init__(self):
        if self.d < 1:
            raise ValueError("dimension must be >= 1")
        if self.sigma < 1:
            raise ValueError("sigma must be a positive integer")
        if len(self.vectors) != len(self.generations):
            raise ValueError("vectors and generations must be aligned")
        if any(v.dim != self.d for v in self.vectors):
            raise ValueError("all vectors must share the ModeSet dimension")
        if len(set(self.vectors)) != len(self.vectors):
            raise ValueError("duplicate vectors in ModeSet")
        if list(self.vectors) != sorted(self.vectors):
            raise ValueError("ModeSet vectors must be in lexicographic order")

    def __len__(self) -> int:
        return len(self.vectors)

    def index(self, v: WaveVector) -> int:
        try:
            return self._index_map[v]
        except KeyError:
            raise ValueError(f"{v} not in ModeSet") from None

    @property
    def _index_map(self) -> dict:
        # frozen dataclass, cache on first use
        m = self.__dict__.get("_index_map_cache")
        if m is None:
            m = {v: i for i, v in enumerate(self.vectors)}
            self.__dict__["_index_map_cache"] = m
        return m

    def as_array(self) -> np.ndarray:
        """Vectors as an (n, d) int64 array."""
        return np.array([v.coords for v in self.vectors], dtype=np.int64)

    @property
    def max_sup_norm(self) -> int:
        return max(v.sup_norm for v in self.vectors)

    @classmethod
    def from_vectors(
        cls,
        vectors: Iterable[WaveVector],
        sigma: int,
        *,
        generations: Optional[Sequence[int]] = None,
        saturated: bool = False,
        scale: Fraction = Fraction(1),
    ) -> "ModeSet":
        vecs = list(vectors)
        if not vecs:
            raise ValueError("empty vector list")
        d = vecs[0].dim
        gens = list(generations) if generations is not None else [0] * len(vecs)
        order = sorted(range(len(vecs)), key=lambda i: vecs[i])
        return cls(
            d=d,
            sigma=sigma,
            vectors=tuple(vecs[i] for i in order),
            generations=tuple(gens[i] for i in order),
            saturated=saturated,
            scale=scale,
        )


def resonance_defect(vectors: Sequence[WaveVector]) -> int:
    """Exact defect |sum_p (-1)^(p+1) kappa_p|^2 - sum_p (-1)^(p+1) |kappa_p|^2.

    The list length must be odd (2*sigma+1 for some sigma >= 1 or a single
    vector, which trivially gives 0).  Zero defect means the alternating
    combination is characteristic.
    """
    n = len(vectors)
    if n % 2 == 0 or n == 0:
        raise ValueError("resonance defect needs an odd number of vectors")
    d = vectors[0].dim
    for v in vectors:
        if v.dim != d:
            raise ValueError("dimension mismatch in resonance_defect")
    acc = [0] * d
    norms = 0
    for p, v in enumerate(vectors):
        sign = 1 if p % 2 == 0 else -1
        for i, c in enumerate(v.coords):
            acc[i] += sign * c
        norms += sign * v.norm_sq
    return sum(c * c for c in acc) - norms


def complete_rectangle(
    k: WaveVector, l: WaveVector, m: WaveVector
) -> Optional[WaveVector]:
    """Fourth rectangle corner opposite l, if (k, l, m) carries a right angle at l.

    Returns kappa_k - kappa_l + kappa_m when (kappa_l - kappa_m).(kappa_l - kappa_k) == 0
    and the configuration is non-degenerate (k != l and m != l); the two
    degenerate configurations resonate but create nothing, so they return None.
    """
    _check_dim(k, l)
    _check_dim(l, m)
    if k == l or m == l:
        return None
    if (l - m).dot(l - k) != 0:
        return None
    return k - l + m


def rescale_to_integers(
    raw_vectors: Sequence[Sequence],
) -> tuple[list[WaveVector], Fraction]:
    """Scale rational input vectors onto the integer lattice.

    Accepts entries that are ints, Fractions, or strings like "3/4".  Returns
    (integer vectors, scale) with user_vector = scale * integer_vector.  Floats
    are rejected: the defect test must stay decidable.
    """
    rows = []
    for vec in raw_vectors:
        row = []
        for c in vec:
            if isinstance(c, float):
                raise TypeError(
                    "float coordinates are not accepted; pass ints, Fractions, "
                    "or 'p/q' strings so arithmetic stays exact"
                )
            row.append(Fraction(c))
        rows.append(row)
    denom = 1
    for row in rows:
        for c in row:
            denom = denom * c.denominator // math.gcd(denom, c.denominator)
    ints = [
        WaveVector(tuple(int(c * denom) for c in row)) for row in rows
    ]
    return ints, Fraction(1, denom)


def _creation_scan_cubic(
    arr: np.ndarray, new_mask: np.ndarray
) -> list[tuple[tuple[int, int, int], tuple[int, ...]]]:
    """All fourth corners produced by right-angled triples of rows of arr.

    Only triples touching at least one row flagged in new_mask are scanned;
    older triples were handled in a previous generation.  Returns a list of
    ((k, l, m) row indices, created coords).
    """
    n = arr.shape[0]
    created = []
    any_new = bool(new_mask.any())
    for b in range(n):
        diffs = arr[b] - arr  # row i: kappa_l - kappa_i
        gram = diffs @ diffs.T  # gram[k, m] = (l-k).(l-m)
        ks, ms = np.nonzero(gram == 0)
        for ki, mi in zip(ks.tolist(), ms.tolist()):
            if ki == b or mi == b:
                continue  # degenerate, creates nothing
            if any_new and not (new_mask[b] or new_mask[ki] or new_mask[mi]):
                continue
            fourth = arr[ki] - arr[b] + arr[mi]
            created.append(((ki, b, mi), tuple(int(c) for c in fourth)))
    return created


def _creation_scan_general(
    arr: np.ndarray, new_mask: np.ndarray, sigma: int
) -> list[tuple[tuple[int, ...], tuple[int, ...]]]:
    """Brute-force scan of all (2*sigma+1)-tuples for characteristic sums.

    Vectorized over the final index.  Returns ((tuple indices), created coords)
    for every zero-defect combination; callers discard targets already present.
    """
    n = arr.shape[0]
    norms = np.einsum("ij,ij->i", arr, arr)
    width = 2 * sigma + 1
    created = []
    any_new = bool(new_mask.any())
    for prefix in itertools.product(range(n), repeat=width - 1):
        prefix_new = any(new_mask[i] for i in prefix)
        vec = np.zeros(arr.shape[1], dtype=np.int64)
        nsum = 0
        for p, idx in enumerate(prefix):
            sign = 1 if p % 2 == 0 else -1
            vec += sign * arr[idx]
            nsum += sign * int(norms[idx])
        # final position has sign +1
        targets = vec[None, :] + arr
        defects = np.einsum("ij,ij->i", targets, targets) - (nsum + norms)
        for last in np.nonzero(defects == 0)[0].tolist():
            if any_new and not (prefix_new or new_mask[last]):
                continue
            created.append(
                (prefix + (last,), tuple(int(c) for c in targets[last]))
            )
    return created


def close_under_resonances(
    initial: Sequence[WaveVector],
    sigma: int,
    *,
    max_generations: int = 8,
    max_sup_norm: int = 64,
    scale: Fraction = Fraction(1),
    record_edges: bool = False,
) -> ModeSet:
    """Close a set of wave vectors under (2*sigma+1)-wave resonant creation.

    Per generation, every zero-defect alternating combination of current
    vectors contributes its combined vector; combinations already present
    create nothing.  Stops at a fixed point (saturated=True) or when a limit
    is hit (saturated=False, with a ClosureWarning).  Created vectors whose
    sup norm exceeds max_sup_norm are discarded, which also marks the result
    unsaturated.

    For sigma=1 the scan is the rectangle completion of right-angled triples;
    in d=1 with sigma=1 no triple can create, so the closure is the input.
    """
    vecs = list(dict.fromkeys(initial))
    if not vecs:
        raise ValueError("initial set must be nonempty")
    if len(vecs) != len(initial):
        raise ValueError("initial vectors must be distinct")
    d = vecs[0].dim
    for v in vecs:
        if v.dim != d:
            raise ValueError("all initial vectors must share one dimension")
    if max_generations < 1 or max_sup_norm < 1:
        raise ValueError("closure limits must be positive")
    if sigma < 1:
        raise ValueError("sigma must be a positive integer")

    generation = {v: 0 for v in vecs}
    edges = []
    truncated_by_norm = False
    saturated = False

    def scan(current: list[WaveVector], new_from: int):
        arr = np.array([v.coords for v in current], dtype=np.int64)
        new_mask = np.zeros(len(current), dtype=bool)
        new_mask[new_from:] = True
        if sigma == 1:
            return _creation_scan_cubic(arr, new_mask)
        return _creation_scan_general(arr, new_mask, sigma)

    current = list(vecs)
    prev_size = 0
    for gen in range(1, max_generations + 1):
        found = scan(current, prev_size)
        prev_size = len(current)
        fresh = []
        fresh_set = set()
        for idx_tuple, coords in found:
            v = WaveVector(coords)
            if v in generation:
                continue
            if v.sup_norm > max_sup_norm:
                truncated_by_norm = True
                continue
            if record_edges:
                edges.append(
                    (tuple(current[i].coords for i in idx_tuple), v.coords, gen)
                )
            if v not in fresh_set:
                fresh_set.add(v)
                fresh.append(v)
        if not fresh:
            saturated = not truncated_by_norm
            break
        fresh.sort()
        for v in fresh:
            generation[v] = gen
        current = current + fresh
    else:
        # generation budget exhausted with the last scan still productive;
        # one more scan decides whether the set happens to be complete
        found = scan(current, prev_size)
        if all(WaveVector(coords) in generation or WaveVector(coords).sup_norm > max_sup_norm
               for _, coords in found):
            leftovers = [
                coords for _, coords in found
                if WaveVector(coords) not in generation
            ]
            truncated_by_norm = truncated_by_norm or bool(leftovers)
            saturated = not truncated_by_norm
        else:
            saturated = False

    if not saturated:
        reason = "sup-norm cap" if truncated_by_norm else "generation cap"
        warnings.warn(
            f"resonance closure truncated by {reason} "
            f"(max_generations={max_generations}, max_sup_norm={max_sup_norm})",
            ClosureWarning,
            stacklevel=2,
        )

    ordered = sorted(generation)
    return ModeSet(
        d=d,
        sigma=sigma,
        vectors=tuple(ordered),
        generations=tuple(generation[v] for v in ordered),
        saturated=saturated,
        scale=scale,
        creation_edges=tuple(edges),
    )


def enumerate_interactions(modes: ModeSet, j: int) -> list[ResonantTuple]:
    """All ordered resonant tuples in J^(2*sigma+1) targeting mode j.

    Scans ordered prefixes (l_1, ..., l_{2 sigma}); the final index is solved
    from the vector constraint and accepted iff it lies in J and the defect
    vanishes.  Each ordered tuple appears exactly once.
    """
    n = len(modes)
    if not 0 <= j < n:
        raise IndexError(f"mode index {j} out of range for |J| = {n}")
    sigma = modes.sigma
    coords = [v.coords for v in modes.vectors]
    norms = [v.norm_sq for v in modes.vectors]
    lookup = {c: i for i, c in enumerate(coords)}
    target_c = coords[j]
    target_n = norms[j]
    d = modes.d
    out = []
    for prefix in itertools.product(range(n), repeat=2 * sigma):
        vec = list(target_c)
        nsum = target_n
        for p, idx in enumerate(prefix):
            sign = 1 if p % 2 == 0 else -1
            c = coords[idx]
            for i in range(d):
                vec[i] -= sign * c[i]
            nsum -= sign * norms[idx]
        last = lookup.get(tuple(vec))
        if last is None:
            continue
        if nsum == norms[last]:
            out.append(ResonantTuple(indices=prefix + (last,), target=j))
    return out


def load_mode_document(source) -> tuple[int, int, list[WaveVector], Fraction]:
    """Parse {dimension, sigma, vectors: [[...], ...]} from a dict, path, or JSON text.

    Returns (dimension, sigma, integer vectors, scale).  Vector entries may be
    ints or rational strings; they are rescaled to the integer lattice.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = None
        try:
            with open(source) as fh:
                text = fh.read()
        except (TypeError, OSError):
            text = source
        doc = json.loads(text)
    try:
        d = int(doc["dimension"])
        sigma = int(doc["sigma"])
        raw = doc["vectors"]
    except KeyError as exc:
        raise ValueError(f"mode document missing field {exc}") from None
    if not isinstance(raw, list) or not raw:
        raise ValueError("mode document needs a nonempty 'vectors' list")
    for i, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != d:
            raise ValueError(
                f"vectors[{i}] must be a list of {d} coordinates, got {row!r}"
            )
    vectors, scale = rescale_to_integers(raw)
    return d, sigma, vectors, scale


def mode_document(modes: ModeSet) -> dict:
    """Serialize a ModeSet to the structured document format, user units restored."""
    scale = modes.scale

    def report(v: WaveVector):
        if scale == 1:
            return list(v.coords)
        return [str(Fraction(c) * scale) for c in v.coords]

    return {
        "dimension": modes.d,
        "sigma": modes.sigma,
        "vectors": [report(v) for v in modes.vectors],
        "generations": list(modes.generations),
        "saturated": modes.saturated,
        "scale": str(scale),
    }
