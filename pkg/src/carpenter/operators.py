"""Entry oracles: windows onto a self-adjoint operator in a fixed frame.

An oracle serves matrix entries <E f_i, f_j> for 1-based frame indices up
to its window.  Constructions only ever touch the operator through an
oracle, so the same chain code runs against a diagonal model, an explicit
dense matrix, or a basis derived from previously constructed vectors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Mapping

import numpy as np

from .errors import ValidationError
from .sequences import SequenceLike, SequenceSpec, TailRegime, values_of

if TYPE_CHECKING:  # pragma: no cover
    from .moves import FrameVector


class EntryOracle:
    """Interface: ``window`` plus ``entry(i, j)`` with symmetric entries."""

    window: int

    def entry(self, i: int, j: int) -> float:  # pragma: no cover
        raise NotImplementedError

    def _check(self, i: int, j: int) -> None:
        if not (1 <= i <= self.window and 1 <= j <= self.window):
            raise ValidationError(
                f"support exceeds window: entry ({i}, {j}) with window {self.window}"
            )


class DiagonalOracle(EntryOracle):
    """Operator diagonal in its own eigenbasis; off-diagonal entries are 0."""

    def __init__(self, values: SequenceLike):
        self.values = values_of(values)
        if not self.values:
            raise ValidationError("diagonal oracle needs at least one value")
        self.window = len(self.values)

    def entry(self, i: int, j: int) -> float:
        self._check(i, j)
        return self.values[i - 1] if i == j else 0.0


class DenseSymmetricOracle(EntryOracle):
    """Explicit symmetric matrix, validated on construction."""

    def __init__(self, matrix):
        a = np.asarray(matrix, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValidationError(f"matrix must be square, got shape {a.shape}")
        scale = max(1.0, float(np.max(np.abs(a))) if a.size else 1.0)
        if float(np.max(np.abs(a - a.T))) > 1e-12 * scale:
            raise ValidationError("matrix is not symmetric")
        self.matrix = a
        self.window = a.shape[0]

    def entry(self, i: int, j: int) -> float:
        self._check(i, j)
        return float(self.matrix[i - 1, j - 1])


class CompressedBasisOracle(EntryOracle):
    """The operator seen through a family of constructed unit vectors.

    Index i of this oracle is the i-th supplied vector; entries are
    computed through the base oracle and cached.
    """

    def __init__(self, base: EntryOracle, vectors: Mapping[int, "FrameVector"]):
        if not vectors:
            raise ValidationError("derived oracle needs at least one vector")
        self.base = base
        self.vectors = dict(vectors)
        self.window = max(self.vectors)
        if min(self.vectors) < 1:
            raise ValidationError("derived oracle indices must be >= 1")
        self._cache: dict[tuple[int, int], float] = {}

    def entry(self, i: int, j: int) -> float:
        self._check(i, j)
        key = (i, j) if i <= j else (j, i)
        if key not in self._cache:
            try:
                u, v = self.vectors[key[0]], self.vectors[key[1]]
            except KeyError as exc:
                raise ValidationError(f"derived oracle has no vector at index {exc}") from exc
            self._cache[key] = compressed_entry(self.base, u, v)
        return self._cache[key]


def compressed_entry(oracle: EntryOracle, u, v) -> float:
    """<E u, v> for sparse vectors over the oracle's frame."""
    uc, vc = u.coeffs, v.coeffs
    for w in (uc, vc):
        for i in w:
            if not 1 <= i <= oracle.window:
                raise ValidationError(
                    f"support exceeds window: index {i} with window {oracle.window}"
                )
    if isinstance(oracle, DiagonalOracle):
        a, b = (uc, vc) if len(uc) <= len(vc) else (vc, uc)
        return math.fsum(
            c * b[i] * oracle.values[i - 1] for i, c in sorted(a.items()) if i in b
        )
    return math.fsum(
        cu * cv * oracle.entry(i, j)
        for i, cu in sorted(uc.items())
        for j, cv in sorted(vc.items())
    )


@dataclass(frozen=True)
class IntervalLaplacianModel:
    """Second-derivative operator on [0, pi] with classical eigendata.

    Neumann flavor: eigenvalues (j-1)^2 with basis 1/sqrt(pi),
    sqrt(2/pi) cos((j-1)x).  Dirichlet flavor: eigenvalues j^2 with basis
    sqrt(2/pi) sin(jx).
    """

    flavor: str
    window: int

    def __post_init__(self):
        if self.flavor not in ("neumann", "dirichlet"):
            raise ValidationError(f"unknown flavor {self.flavor!r}")
        if self.window < 1:
            raise ValidationError("model window must be >= 1")

    def eigenvalue(self, j: int) -> float:
        if not 1 <= j <= self.window:
            raise ValidationError(f"mode {j} outside window {self.window}")
        return float((j - 1) ** 2 if self.flavor == "neumann" else j**2)

    def eigenvalues(self) -> tuple[float, ...]:
        return tuple(self.eigenvalue(j) for j in range(1, self.window + 1))

    def basis_values(self, j: int, xs: np.ndarray) -> np.ndarray:
        if not 1 <= j <= self.window:
            raise ValidationError(f"mode {j} outside window {self.window}")
        if self.flavor == "neumann":
            if j == 1:
                return np.full_like(xs, 1.0 / math.sqrt(math.pi))
            return math.sqrt(2.0 / math.pi) * np.cos((j - 1) * xs)
        return math.sqrt(2.0 / math.pi) * np.sin(j * xs)


def neumann_model(window: int) -> tuple[DiagonalOracle, SequenceSpec]:
    """Diagonal oracle and eigenvalue spec for the free-end model."""
    model = IntervalLaplacianModel("neumann", window)
    spec = SequenceSpec(model.eigenvalues(), TailRegime.EXPLICIT, name="neumann")
    return DiagonalOracle(spec), spec


def dirichlet_target(window: int) -> SequenceSpec:
    """Fixed-end eigenvalues as a pointwise-dominating diagonal target."""
    model = IntervalLaplacianModel("dirichlet", window)
    return SequenceSpec(model.eigenvalues(), TailRegime.POINTWISE, name="dirichlet")


def sample_function(
    vec,
    flavor: str,
    grid: int,
) -> tuple[np.ndarray, np.ndarray]:
    """Evaluate a coefficient vector as a function on a uniform [0, pi] grid.

    ``grid`` counts sample points including both endpoints.
    """
    if grid < 2:
        raise ValidationError(f"grid needs at least 2 points, got {grid}")
    support = sorted(vec.coeffs)
    if not support:
        raise ValidationError("cannot sample an empty vector")
    model = IntervalLaplacianModel(flavor, max(support))
    xs = np.linspace(0.0, math.pi, grid)
    values = np.zeros_like(xs)
    for j in support:
        values += vec.coeffs[j] * model.basis_values(j, xs)
    return xs, values


def sine_in_cosine_coeffs(j: int, k: int) -> float:
    """Integral of sin(j x) cos(k x) over [0, pi].

    Vanishes when j + k is even (this covers j = k); otherwise equals
    2 j / (j^2 - k^2).
    """
    if not (isinstance(j, int) and isinstance(k, int)) or j < 1 or k < 0:
        raise ValidationError(f"need integer j >= 1 and k >= 0, got ({j!r}, {k!r})")
    if (j + k) % 2 == 0:
        return 0.0
    return 2.0 * j / (j * j - k * k)
