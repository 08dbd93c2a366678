"""Sequence algebra for diagonal targets against an eigenvalue list.

Everything here is pure arithmetic on finite windows of two real sequences:
an operator diagonal ``lambda`` (nondecreasing) and a target diagonal ``d``.
The central object is the surplus profile

    delta_k = sum_{i<=k} (d_i - lambda_i),

whose sign pattern, zeros, records and tail minima drive every construction
route.  Infinite tail behaviour is never inferred from a window; it is a
declared regime that is validated for consistency against the data we can
see and trusted beyond it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence, Union

from .errors import RegimeError, ValidationError, WindowError


class TailRegime(enum.Enum):
    """Declared behaviour of the surplus profile beyond the window."""

    EXPLICIT = "explicit"            # no tail claim: the window is all there is
    CONSERVATION = "conservation"    # liminf delta_k = 0
    EVENTUALLY_ABOVE = "eventually_above"  # delta_k >= alpha eventually, liminf = alpha
    DIPS = "dips"                    # liminf delta_k = alpha > 0, delta_k < alpha infinitely often
    POINTWISE = "pointwise"          # d_i >= lambda_i for every i, lambda unbounded
    ZEROS = "zeros"                  # delta_k = 0 for infinitely many k


_ALPHA_REGIMES = (TailRegime.EVENTUALLY_ABOVE, TailRegime.DIPS)


@dataclass(frozen=True)
class SequenceSpec:
    """A finite prefix of a real sequence plus its declared tail regime.

    User-supplied prefixes must be nondecreasing; intermediate sequences
    produced by transforms (which legitimately bump single entries) are
    built through :meth:`derived` and skip that check.
    """

    values: tuple[float, ...]
    regime: TailRegime = TailRegime.EXPLICIT
    alpha: float | None = None
    name: str = ""
    monotone: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if not self.values:
            raise ValidationError("sequence prefix must contain at least one value")
        for i, v in enumerate(self.values, start=1):
            if not math.isfinite(v):
                raise ValidationError(f"sequence entry {i} is not finite: {v!r}")
        if self.monotone:
            for i in range(1, len(self.values)):
                if self.values[i] < self.values[i - 1]:
                    raise ValidationError(
                        f"prefix is not nondecreasing at position {i + 1}: "
                        f"{self.values[i]!r} < {self.values[i - 1]!r}"
                    )
        if self.regime in _ALPHA_REGIMES:
            if self.alpha is None or not math.isfinite(self.alpha):
                raise RegimeError(
                    f"regime {self.regime.value!r} requires a finite alpha, got {self.alpha!r}"
                )
            if self.regime is TailRegime.EVENTUALLY_ABOVE and self.alpha < 0.0:
                raise RegimeError(f"eventually_above requires alpha >= 0, got {self.alpha!r}")
            if self.regime is TailRegime.DIPS and self.alpha <= 0.0:
                raise RegimeError(f"dips requires alpha > 0, got {self.alpha!r}")

    @classmethod
    def derived(cls, values: Iterable[float], name: str = "") -> "SequenceSpec":
        """Wrap transform output without demanding monotonicity."""
        return cls(tuple(values), TailRegime.EXPLICIT, None, name, monotone=False)

    def __len__(self) -> int:
        return len(self.values)

    def to_json_dict(self) -> dict:
        out: dict = {"values": list(self.values), "regime": self.regime.value}
        if self.alpha is not None:
            out["alpha"] = self.alpha
        if self.name:
            out["name"] = self.name
        return out

    @classmethod
    def from_json_dict(cls, data: dict) -> "SequenceSpec":
        if not isinstance(data, dict) or "values" not in data:
            raise ValidationError("sequence JSON must be an object with a 'values' array")
        regime = TailRegime(data.get("regime", "explicit"))
        return cls(
            tuple(data["values"]),
            regime,
            data.get("alpha"),
            data.get("name", ""),
        )


SequenceLike = Union[SequenceSpec, Sequence[float]]


def values_of(seq: SequenceLike) -> tuple[float, ...]:
    """Accept a SequenceSpec or a plain sequence of floats."""
    if isinstance(seq, SequenceSpec):
        return seq.values
    return tuple(float(v) for v in seq)


def _window_of(lam: tuple[float, ...], d: tuple[float, ...], window: int | None) -> int:
    limit = min(len(lam), len(d))
    if window is None:
        return limit
    if window < 1:
        raise WindowError(f"window must be at least 1, got {window}")
    if window > limit:
        raise WindowError(f"window {window} exceeds provided prefixes (length {limit})")
    return window


def running_sums(terms: Iterable[float]) -> list[float]:
    """Running compensated (Neumaier) partial sums, one per term."""
    total = 0.0
    comp = 0.0
    out: list[float] = []
    for x in terms:
        t = total + x
        if abs(total) >= abs(x):
            comp += (total - t) + x
        else:
            comp += (x - t) + total
        total = t
        out.append(total + comp)
    return out


@dataclass(frozen=True)
class Verdict:
    ok: bool
    first_violation_index: int | None = None
    detail: str = ""


@dataclass(frozen=True)
class DeltaProfile:
    """Surplus partial sums with their structural markers.

    ``deltas[k-1]`` holds delta_k.  Indices in the marker tuples are
    1-based window positions.
    """

    deltas: tuple[float, ...]
    zero_indices: tuple[int, ...]
    tail_minima: tuple[int, ...]
    decrease_records: tuple[int, ...]
    declared_alpha: float | None
    zero_tol: float

    def delta(self, k: int) -> float:
        """delta_k with the convention delta_0 = 0."""
        if k == 0:
            return 0.0
        return self.deltas[k - 1]

    @property
    def window(self) -> int:
        return len(self.deltas)


def delta_profile(
    lam: SequenceLike,
    d: SequenceLike,
    window: int | None = None,
    *,
    zero_tol: float | None = None,
    guard: int = 0,
) -> DeltaProfile:
    """Compute delta_k = sum_{i<=k} (d_i - lambda_i) for k = 1..window.

    ``zero_tol`` classifies which partial sums count as zero; the default is
    1e-12 * max(1, |delta_1|).  Pass 0.0 for sequences known to sum exactly.
    """
    lv, dv = values_of(lam), values_of(d)
    k = _window_of(lv, dv, window)
    deltas = tuple(running_sums(dv[i] - lv[i] for i in range(k)))
    if zero_tol is None:
        zero_tol = 1e-12 * max(1.0, abs(deltas[0]))
    zeros = tuple(i + 1 for i, x in enumerate(deltas) if abs(x) <= zero_tol)
    alpha = d.alpha if isinstance(d, SequenceSpec) else None
    profile = DeltaProfile(deltas, zeros, (), (), alpha, zero_tol)
    minima = running_tail_minima(profile, guard)
    records: tuple[int, ...] = ()
    if min(deltas) > zero_tol:
        records = strict_decrease_records(profile)
    return DeltaProfile(deltas, zeros, minima, records, alpha, zero_tol)


def check_weak_majorization(
    lam: SequenceLike,
    d: SequenceLike,
    window: int | None = None,
    *,
    tol: float | None = None,
) -> Verdict:
    """Verify delta_k >= 0 for every k up to the window."""
    lv, dv = values_of(lam), values_of(d)
    k = _window_of(lv, dv, window)
    deltas = running_sums(dv[i] - lv[i] for i in range(k))
    if tol is None:
        tol = 1e-12 * max(1.0, max(abs(x) for x in deltas))
    for i, x in enumerate(deltas, start=1):
        if x < -tol:
            return Verdict(False, i, f"delta_{i} = {x!r} < 0")
    return Verdict(True)


def check_finite_majorization(
    dtilde: SequenceLike,
    d: SequenceLike,
    *,
    tol: float | None = None,
) -> Verdict:
    """Verify that d is majorized by dtilde as finite multisets.

    Nonincreasing rearrangements must satisfy prefix-sum domination with
    equal totals.
    """
    a = sorted(values_of(dtilde), reverse=True)
    b = sorted(values_of(d), reverse=True)
    if len(a) != len(b):
        raise ValidationError(f"length mismatch: {len(a)} vs {len(b)}")
    if tol is None:
        scale = max([1.0] + [abs(x) for x in a + b])
        tol = 1e-12 * scale
    pa = running_sums(a)
    pb = running_sums(b)
    for i in range(len(a) - 1):
        if pb[i] > pa[i] + tol:
            return Verdict(False, i + 1, f"prefix {i + 1}: {pb[i]!r} > {pa[i]!r}")
    if abs(pa[-1] - pb[-1]) > tol:
        return Verdict(False, len(a), f"totals differ: {pa[-1]!r} vs {pb[-1]!r}")
    return Verdict(True)


@dataclass(frozen=True)
class BlockPartition:
    """Consecutive index blocks cut at surplus zeros.

    Each block is an inclusive (lo, hi) pair.  ``covered`` is true when the
    final block ends at a certified zero, so the blocks tile the window.
    When false the last block is open: majorization holds into it but does
    not close, and constructions must leave it alone.
    """

    blocks: tuple[tuple[int, int], ...]
    covered: bool

    def closed(self) -> tuple[tuple[int, int], ...]:
        if self.covered:
            return self.blocks
        return self.blocks[:-1]


def zero_partition(profile: DeltaProfile) -> BlockPartition:
    """Cut the window into blocks between consecutive surplus zeros."""
    k = profile.window
    cuts = [0] + [z for z in profile.zero_indices]
    blocks: list[tuple[int, int]] = []
    for a, b in zip(cuts, cuts[1:]):
        blocks.append((a + 1, b))
    covered = bool(profile.zero_indices) and profile.zero_indices[-1] == k
    if not covered and cuts[-1] < k:
        blocks.append((cuts[-1] + 1, k))
    return BlockPartition(tuple(blocks), covered)


def strict_decrease_records(profile: DeltaProfile) -> tuple[int, ...]:
    """Indices where the surplus drops below every earlier record.

    m_1 = 1 and m_{j+1} is the first n > m_j with delta_n < delta_{m_j}.
    Requires a strictly positive surplus on the window.
    """
    deltas = profile.deltas
    for i, x in enumerate(deltas, start=1):
        if x <= 0.0:
            raise ValidationError(f"decrease records need delta > 0; delta_{i} = {x!r}")
    records = [1]
    best = deltas[0]
    for n in range(2, len(deltas) + 1):
        if deltas[n - 1] < best:
            records.append(n)
            best = deltas[n - 1]
    return tuple(records)


def running_tail_minima(profile: DeltaProfile, guard: int = 0) -> tuple[int, ...]:
    """Indices n with delta_n <= delta_k for every later k in the window.

    Only candidates at least ``guard`` positions before the window edge are
    certified: a tail minimum too close to the edge could be invalidated by
    data we have not seen.
    """
    if guard < 0:
        raise ValidationError(f"guard must be nonnegative, got {guard}")
    deltas = profile.deltas
    k = len(deltas)
    suffix_min = [0.0] * (k + 1)
    suffix_min[k] = math.inf
    for n in range(k - 1, -1, -1):
        suffix_min[n] = min(deltas[n], suffix_min[n + 1])
    out = []
    for n in range(1, k - guard + 1):
        if deltas[n - 1] <= suffix_min[n]:
            out.append(n)
    return tuple(out)


def averaged_interpolant(
    lam: SequenceLike,
    d: SequenceLike,
    records: Sequence[int],
) -> SequenceSpec:
    """Replace d between surplus records by lambda plus the mean increment.

    For consecutive records a < b every position i in (a, b] receives

        dtilde_i = lambda_i + (delta_b - delta_a) / (b - a),

    so the interpolated surplus is linear on each block, agrees with delta
    at the records, and each block's values majorize the original d there.
    dtilde_1 = d_1.
    """
    lv, dv = values_of(lam), values_of(d)
    if not records:
        raise ValidationError("records must be nonempty")
    if records[0] != 1:
        raise ValidationError(f"records must start at 1, got {records[0]}")
    if any(b <= a for a, b in zip(records, records[1:])):
        raise ValidationError(f"records must increase strictly: {list(records)}")
    span = records[-1]
    if span > min(len(lv), len(dv)):
        raise WindowError(f"record {span} exceeds provided prefixes")
    deltas = running_sums(dv[i] - lv[i] for i in range(span))
    out = [0.0] * span
    out[0] = dv[0]
    for a, b in zip(records, records[1:]):
        inc = (deltas[b - 1] - deltas[a - 1]) / (b - a)
        for i in range(a + 1, b + 1):
            out[i - 1] = lv[i - 1] + inc
    return SequenceSpec.derived(out, name="averaged_interpolant")


def flat_prefix_transform(lam: SequenceLike, d: SequenceLike, n: int) -> SequenceSpec:
    """Push the whole prefix surplus into position 1.

    Requires delta_n <= delta_k for every k <= n.  The output keeps the
    original d beyond position n and equals (lambda_1 + delta_n,
    lambda_2, ..., lambda_n) on the prefix, which majorizes the original
    prefix of d.
    """
    lv, dv = values_of(lam), values_of(d)
    k = min(len(lv), len(dv))
    if not 1 <= n <= k:
        raise WindowError(f"flat prefix length {n} outside window {k}")
    deltas = running_sums(dv[i] - lv[i] for i in range(n))
    slack = 1e-12 * max(1.0, max(abs(x) for x in deltas))
    for j in range(n):
        if deltas[n - 1] > deltas[j] + slack:
            raise ValidationError(
                f"delta_{n} = {deltas[n - 1]!r} is not the prefix minimum "
                f"(delta_{j + 1} = {deltas[j]!r})"
            )
    out = [lv[0] + deltas[n - 1]] + list(lv[1:n]) + list(dv[n:k])
    return SequenceSpec.derived(out, name="flat_prefix")


def tail_minima_transform(
    lam: SequenceLike,
    d: SequenceLike,
    tail_minima: Sequence[int],
) -> SequenceSpec:
    """Concentrate each block's surplus gain at its closing tail minimum.

    With certified tail minima m_1 < m_2 < ... (and m_0 = 0, delta_0 = 0)
    the output is lambda everywhere except dtilde_{m_j} = lambda_{m_j} +
    (delta_{m_j} - delta_{m_{j-1}}).  Its surplus profile is the
    nondecreasing staircase of record values, and on each block
    {m_{j-1}+1, ..., m_j} the output majorizes the original d.
    """
    lv, dv = values_of(lam), values_of(d)
    k = min(len(lv), len(dv))
    if not tail_minima:
        raise ValidationError("tail minima list must be nonempty")
    if any(b <= a for a, b in zip(tail_minima, tail_minima[1:])):
        raise ValidationError(f"tail minima must increase strictly: {list(tail_minima)}")
    if tail_minima[-1] > k:
        raise WindowError(f"tail minimum {tail_minima[-1]} exceeds window {k}")
    deltas = running_sums(dv[i] - lv[i] for i in range(k))
    out = list(lv[:k])
    prev = 0.0
    for m in tail_minima:
        gain = deltas[m - 1] - prev
        if gain < 0.0:
            raise ValidationError(
                f"tail minimum {m} has negative block gain {gain!r}; "
                "records are not nondecreasing in delta"
            )
        out[m - 1] = lv[m - 1] + gain
        prev = deltas[m - 1]
    result = SequenceSpec.derived(out, name="tail_minima_transform")
    blocks = [(a + 1, b) for a, b in zip((0,) + tuple(tail_minima), tail_minima)]
    for lo, hi in blocks:
        verdict = check_finite_majorization(result.values[lo - 1 : hi], dv[lo - 1 : hi])
        if not verdict.ok:
            raise ValidationError(
                f"block ({lo},{hi}) lost majorization: {verdict.detail}"
            )
    return result


def alpha_floor_shift(
    lam: SequenceLike,
    d: SequenceLike,
    alpha: float,
    n: int,
) -> SequenceSpec:
    """Remove a constant surplus floor alpha by spreading it over d_1..d_n.

    The output is d_i - alpha/n for i <= n and d_i beyond, so the shifted
    surplus equals delta_k - k*alpha/n on the prefix and delta_k - alpha
    afterwards.  Requires n >= M (the index from which delta stays >= alpha
    on the window) and n > k*alpha/delta_k for every k < M, which keeps the
    shifted surplus nonnegative.
    """
    if alpha is None or not math.isfinite(alpha) or alpha < 0.0:
        raise RegimeError(f"floor shift needs a finite alpha >= 0, got {alpha!r}")
    lv, dv = values_of(lam), values_of(d)
    k = min(len(lv), len(dv))
    if alpha == 0.0:
        return SequenceSpec.derived(dv[:k], name="alpha_floor_shift")
    if not 1 <= n <= k:
        raise WindowError(f"shift length {n} outside window {k}")
    m_floor, n_min = floor_shift_bounds(lv, dv, alpha, k)
    if n < n_min:
        raise ValidationError(
            f"shift length {n} too small: need at least {n_min} "
            f"(floor attained from index {m_floor})"
        )
    out = [v - alpha / n for v in dv[:n]] + list(dv[n:k])
    shifted = running_sums(out[i] - lv[i] for i in range(k))
    tol = 1e-12 * max(1.0, max(abs(x) for x in shifted))
    for i, x in enumerate(shifted, start=1):
        if x < -tol:
            raise ValidationError(f"shifted surplus negative at {i}: {x!r}")
    return SequenceSpec.derived(out, name="alpha_floor_shift")


def floor_shift_bounds(
    lam: SequenceLike,
    d: SequenceLike,
    alpha: float,
    window: int | None = None,
) -> tuple[int, int]:
    """Smallest M with delta_k >= alpha for all k in [M, window], and the
    minimal admissible shift length N for :func:`alpha_floor_shift`."""
    if alpha is None or not math.isfinite(alpha) or alpha < 0.0:
        raise RegimeError(f"floor shift needs a finite alpha >= 0, got {alpha!r}")
    lv, dv = values_of(lam), values_of(d)
    k = _window_of(lv, dv, window)
    deltas = running_sums(dv[i] - lv[i] for i in range(k))
    tol = 1e-12 * max(1.0, abs(alpha), max(abs(x) for x in deltas))
    m_floor = None
    for m in range(k, 0, -1):
        if deltas[m - 1] < alpha - tol:
            break
        m_floor = m
    if m_floor is None:
        raise RegimeError(
            f"declared floor alpha = {alpha!r} is not attained on the window "
            f"(delta_{k} = {deltas[-1]!r})"
        )
    n_min = m_floor
    for j in range(1, m_floor):
        if deltas[j - 1] <= 0.0:
            raise ValidationError(
                f"cannot shift: delta_{j} = {deltas[j - 1]!r} <= 0 before the floor"
            )
        n_min = max(n_min, math.floor(j * alpha / deltas[j - 1]) + 1)
    return m_floor, n_min


def decay_chain_data(
    lam: SequenceLike,
    d: SequenceLike,
    window: int | None = None,
) -> tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]:
    """Pending values, tail masses and rotation weights for a single chain.

    For a strictly decreasing positive surplus the chain that realizes
    d_1, d_2, ... one rotation at a time carries pending value

        lambda_tilde_n = lambda_n - t_n,      t_n = delta_{n-1}  (t_1 = 0),

    and the rotation weight solving each step with no cross term is

        alpha_tilde_n = (lambda_{n+1} - d_n) / (lambda_{n+1} - lambda_tilde_n).

    Returns (lambda_tilde, t, alpha_tilde); weights lie in (0, 1].  A
    weight of exactly 1 appears when an increment underflows the working
    precision and the surplus stalls: the chain then emits its pending
    vector unchanged, which is still a valid (endpoint) rotation.
    """
    lv, dv = values_of(lam), values_of(d)
    k = _window_of(lv, dv, window)
    deltas = running_sums(dv[i] - lv[i] for i in range(k))
    if deltas[0] <= 0.0:
        raise ValidationError(f"surplus must start positive: delta_1 = {deltas[0]!r}")
    for i in range(1, k):
        if deltas[i] > deltas[i - 1]:
            raise ValidationError(
                f"surplus must not increase: delta_{i + 1} = {deltas[i]!r} "
                f"> delta_{i} = {deltas[i - 1]!r}"
            )
        if deltas[i] <= 0.0:
            raise ValidationError(f"surplus must stay positive: delta_{i + 1} = {deltas[i]!r}")
    if k >= 2 and not dv[0] < lv[1]:
        raise ValidationError(f"need d_1 < lambda_2: {dv[0]!r} >= {lv[1]!r}")
    for n in range(2, k + 1):
        if not lv[0] <= dv[n - 1]:
            raise ValidationError(f"need lambda_1 <= d_{n}: {lv[0]!r} > {dv[n - 1]!r}")
    t = (0.0,) + tuple(deltas[:-1])
    lam_tilde = tuple(lv[n] - t[n] for n in range(k))
    alpha_tilde = []
    for n in range(1, k):
        denom = lv[n] - lam_tilde[n - 1]
        num = lv[n] - dv[n - 1]
        if denom <= 0.0:
            raise ValidationError(f"degenerate chain step {n}: lambda_{n + 1} <= pending value")
        a = num / denom
        if not 0.0 < a <= 1.0:
            raise ValidationError(f"rotation weight outside (0,1] at step {n}: {a!r}")
        alpha_tilde.append(a)
    return lam_tilde, t, tuple(alpha_tilde)


def hlp_majorization_check(
    a: SequenceLike,
    b: SequenceLike,
    phi: str,
    *,
    t: float = 1.0,
    window: int | None = None,
    tol: float | None = None,
) -> Verdict:
    """Check that weak majorization survives a monotone convexity transform.

    With a weakly majorized by b (prefix sums of a below those of b):

    - ``neg_inverse``: x -> -1/x on positive entries; equivalently the
      reciprocal sequences satisfy prefix sums of 1/b below those of 1/a.
    - ``exp_decay``: x -> exp(-x*t); the decayed b-sequence is weakly
      majorized by the decayed a-sequence.
    """
    av, bv = values_of(a), values_of(b)
    k = _window_of(av, bv, window)
    maj = check_weak_majorization(av, bv, k)
    if not maj.ok:
        raise ValidationError(f"inputs are not weakly majorized: {maj.detail}")
    if phi == "neg_inverse":
        if any(x <= 0.0 for x in av[:k]) or any(x <= 0.0 for x in bv[:k]):
            raise ValidationError("neg_inverse requires strictly positive entries")
        lhs = running_sums(1.0 / x for x in bv[:k])
        rhs = running_sums(1.0 / x for x in av[:k])
    elif phi == "exp_decay":
        if not (math.isfinite(t) and t > 0.0):
            raise ValidationError(f"exp_decay needs t > 0, got {t!r}")
        lhs = running_sums(math.exp(-x * t) for x in bv[:k])
        rhs = running_sums(math.exp(-x * t) for x in av[:k])
    else:
        raise ValidationError(f"unknown transform {phi!r}")
    if tol is None:
        tol = 1e-12 * max(1.0, max(abs(x) for x in rhs + lhs))
    for i in range(k):
        if lhs[i] > rhs[i] + tol:
            return Verdict(False, i + 1, f"prefix {i + 1}: {lhs[i]!r} > {rhs[i]!r}")
    return Verdict(True)


def divergence_diagnostic(
    t: Sequence[float],
    window: int | None = None,
) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """Partial sums of (t_n - t_{n+1})/t_{n+1} and their log lower bounds.

    For positive nonincreasing tail masses the partial sums dominate
    log(t_1 / t_{k+1}); the sums diverging is what forces a chain's
    rotation products to vanish, i.e. the chain to lose no mass.
    """
    tv = tuple(float(x) for x in t)
    k = len(tv) if window is None else window
    if k > len(tv):
        raise WindowError(f"window {k} exceeds tail mass list length {len(tv)}")
    if k < 2:
        raise ValidationError("need at least two tail masses")
    for i, x in enumerate(tv[:k], start=1):
        if x <= 0.0:
            raise ValidationError(f"tail masses must be positive: t_{i} = {x!r}")
        if i >= 2 and x > tv[i - 2]:
            raise ValidationError(f"tail masses must be nonincreasing at {i}")
    sums = running_sums((tv[n - 1] - tv[n]) / tv[n] for n in range(1, k))
    bounds = tuple(math.log(tv[0]) - math.log(tv[n]) for n in range(1, k))
    return tuple(sums), bounds


def validate_regime(
    lam: SequenceSpec,
    d: SequenceSpec,
    window: int | None = None,
    *,
    zero_tol: float | None = None,
) -> list[str]:
    """Consistency of the declared tail regime with the visible window.

    Only observable contradictions are reported; a finite window can never
    certify a liminf claim, so silence is not proof.
    """
    lv, dv = lam.values, d.values
    k = _window_of(lv, dv, window)
    profile = delta_profile(lam, d, k, zero_tol=zero_tol)
    deltas = profile.deltas
    tol = profile.zero_tol
    problems: list[str] = []
    regime = d.regime
    if regime is TailRegime.CONSERVATION:
        if deltas[0] > tol and all(v == lv[0] for v in lv[:k]):
            problems.append(
                "constant eigenvalue window cannot carry a positive surplus "
                "back to zero: a nondecreasing d would have to exceed the "
                "constant forever"
            )
    elif regime is TailRegime.EVENTUALLY_ABOVE:
        try:
            floor_shift_bounds(lv, dv, d.alpha, k)
        except (RegimeError, ValidationError) as exc:
            problems.append(str(exc))
    elif regime is TailRegime.POINTWISE:
        scale = max(1.0, max(abs(x) for x in lv[:k] + dv[:k]))
        for i in range(k):
            if dv[i] < lv[i] - 1e-12 * scale:
                problems.append(
                    f"pointwise domination fails at {i + 1}: {dv[i]!r} < {lv[i]!r}"
                )
                break
    # dips: alpha > 0 enforced at construction; zeros/explicit: no checkable claim
    return problems
