"""Two-by-two convex moves and rotation chains on sparse frame vectors.

A move replaces an orthonormal pair (u, v) by the rotated pair

    e      = sqrt(alpha) u + sqrt(1-alpha) sign v,
    etilde = sqrt(1-alpha) u - sqrt(alpha) sign v,

which keeps orthonormality exactly and moves the quadratic-form value of
the first vector to

    g(alpha) = alpha*dt1 + (1-alpha)*dt2 + 2*sign*beta*sqrt(alpha(1-alpha)),

where dt1, dt2 are the pair's current values and beta the off-diagonal
entry between them.  Chains iterate this against fresh basis vectors,
carrying the rotated remainder forward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import BracketingError, ValidationError
from .operators import EntryOracle, compressed_entry

ORTHO_TOL = 1e-10
RENORM_TRIGGER = 1e-12


@dataclass
class FrameVector:
    """Sparse real vector over 1-based frame indices."""

    coeffs: dict[int, float]
    id: str = ""

    @classmethod
    def basis(cls, index: int, id: str = "") -> "FrameVector":
        return cls({index: 1.0}, id or f"f{index}")

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(sorted(self.coeffs))

    def coefficient(self, index: int) -> float:
        return self.coeffs.get(index, 0.0)

    def norm(self) -> float:
        return math.sqrt(math.fsum(c * c for c in self.coeffs.values()))

    def dot(self, other: "FrameVector") -> float:
        a, b = self.coeffs, other.coeffs
        if len(b) < len(a):
            a, b = b, a
        return math.fsum(c * b[i] for i, c in sorted(a.items()) if i in b)

    def scaled(self, factor: float, id: str | None = None) -> "FrameVector":
        out = {i: factor * c for i, c in sorted(self.coeffs.items()) if factor * c != 0.0}
        return FrameVector(out, self.id if id is None else id)

    def copy(self, id: str | None = None) -> "FrameVector":
        return FrameVector(dict(sorted(self.coeffs.items())), self.id if id is None else id)

    @staticmethod
    def combine(a: float, u: "FrameVector", b: float, v: "FrameVector", id: str = "") -> "FrameVector":
        out: dict[int, float] = {}
        for i in sorted(set(u.coeffs) | set(v.coeffs)):
            c = a * u.coeffs.get(i, 0.0) + b * v.coeffs.get(i, 0.0)
            if c != 0.0:
                out[i] = c
        return FrameVector(out, id)


@dataclass(frozen=True)
class PairMove:
    """One executed rotation, with enough data to replay it."""

    step: int
    left_id: str
    right_id: str
    alpha: float
    sign: float
    beta: float
    target: float
    achieved: float
    renormalized: bool = False


@dataclass
class MoveLog:
    chain_id: str
    moves: list[PairMove] = field(default_factory=list)
    feed: list[int] = field(default_factory=list)
    start_index: int | None = None

    def alphas(self) -> list[float]:
        return [m.alpha for m in self.moves]

    def __len__(self) -> int:
        return len(self.moves)


def pair_value(dt1: float, dt2: float, beta: float, sign: float, alpha: float) -> float:
    """Quadratic-form value of the rotated first vector."""
    return alpha * dt1 + (1.0 - alpha) * dt2 + 2.0 * sign * beta * math.sqrt(alpha * (1.0 - alpha))


def solve_two_by_two(
    dt1: float,
    dt2: float,
    beta: float,
    d1: float,
    *,
    tol: float | None = None,
) -> tuple[float, float]:
    """Solve g(alpha) = d1 for alpha in [alpha_0, 1] and the cross-term sign.

    Requires d1 within [min(dt1, dt2), max(dt1, dt2)].  The sign is chosen
    so that g(alpha_0) and g(1) = dt1 bracket d1, with alpha_0 =
    (dt2 - d1) / (dt2 - dt1) the weight that hits d1 with no cross term.
    The root is found by bisection on the rotation angle theta with
    alpha = cos^2(theta/2), which keeps the slope of g bounded all the way
    to the endpoints.  Returns (alpha, sign); sign is the literal
    coefficient applied to the second vector.
    """
    scale = max(1.0, abs(dt1), abs(dt2), abs(beta))
    if tol is None:
        tol = 1e-12 * scale
    if dt1 == dt2:
        raise BracketingError(f"degenerate pair: dt1 = dt2 = {dt1!r}")
    lo_v, hi_v = min(dt1, dt2), max(dt1, dt2)
    if d1 < lo_v - tol or d1 > hi_v + tol:
        raise BracketingError(
            f"target {d1!r} outside pair range [{lo_v!r}, {hi_v!r}] (beta = {beta!r})"
        )
    d1 = min(max(d1, lo_v), hi_v)
    if d1 == dt1:
        return 1.0, -1.0
    alpha0 = (dt2 - d1) / (dt2 - dt1)
    alpha0 = min(max(alpha0, 0.0), 1.0)
    if beta == 0.0:
        return alpha0, -1.0
    cross = 1.0 if d1 > dt1 else -1.0
    sign = cross if beta > 0.0 else -cross

    def settle(a_start: float, s: float) -> tuple[float, float]:
        # g moves by roughly |g'(alpha)| * ulp between adjacent floats, so
        # the best any solver can do is the representable alpha closest to
        # the root; walk downhill from the estimate until the error stops
        # improving
        best_a = min(max(a_start, 0.0), 1.0)
        best_e = abs(pair_value(dt1, dt2, beta, s, best_a) - d1)
        for towards in (math.inf, -math.inf):
            a, e = best_a, best_e
            for _ in range(64):
                step = math.nextafter(a, towards)
                if not 0.0 <= step <= 1.0:
                    break
                e_step = abs(pair_value(dt1, dt2, beta, s, step) - d1)
                if e_step >= e:
                    break
                a, e = step, e_step
            if e < best_e:
                best_a, best_e = a, e
        return best_a, best_e

    def h(theta: float) -> float:
        alpha = 0.5 * (1.0 + math.cos(theta))
        return (
            alpha * dt1
            + (1.0 - alpha) * dt2
            + cross * abs(beta) * math.sin(theta)
            - d1
        )

    theta_hi = 2.0 * math.atan2(math.sqrt(1.0 - alpha0), math.sqrt(alpha0))
    f_lo = h(0.0)
    f_hi = h(theta_hi)
    if f_hi == 0.0:
        return alpha0, sign
    if f_lo == 0.0:
        return 1.0, sign
    candidates = []
    if (f_lo > 0.0) != (f_hi > 0.0):
        lo, hi = 0.0, theta_hi
        for _ in range(128):
            mid = 0.5 * (lo + hi)
            if mid == lo or mid == hi:
                break
            f_mid = h(mid)
            if f_mid == 0.0:
                lo = hi = mid
                break
            if (f_mid > 0.0) == (f_lo > 0.0):
                lo, f_lo = mid, f_mid
            else:
                hi = mid
            if hi - lo <= 1e-16:
                break
        theta = 0.5 * (lo + hi)
        candidates.append(0.5 * (1.0 + math.cos(theta)))
    # g restricted to one sign branch is strictly convex or concave, so a
    # second root can sit outside the bisection bracket, even exactly on
    # alpha_0 or 1; seed those too, plus the closed-form quadratic roots
    # (evaluated stably), and let the direct residual pick the winner
    candidates.extend((alpha0, 1.0))
    p = dt1 - dt2
    q = dt2 - d1
    qa = p * p + 4.0 * beta * beta
    qb = 2.0 * p * q - 4.0 * beta * beta
    disc = qb * qb - 4.0 * qa * (q * q)
    if disc >= 0.0:
        half = -0.5 * (qb + math.copysign(math.sqrt(disc), qb))
        if half != 0.0:
            candidates.extend((half / qa, (q * q) / half))
    best_a, best_e = None, math.inf
    for a_c in candidates:
        a_c, e_c = settle(a_c, sign)
        if e_c < best_e:
            best_a, best_e = a_c, e_c
    if best_a is None or best_e > tol:
        raise BracketingError(
            f"solver cannot meet tolerance at float granularity: "
            f"best |g(alpha) - {d1!r}| = {best_e!r} > {tol!r}"
        )
    return best_a, sign


def apply_pair_move(
    u: FrameVector,
    v: FrameVector,
    alpha: float,
    sign: float,
) -> tuple[FrameVector, FrameVector]:
    """Rotate an orthonormal pair; returns (e, etilde)."""
    if not 0.0 <= alpha <= 1.0:
        raise ValidationError(f"alpha must lie in [0, 1], got {alpha!r}")
    if sign not in (1.0, -1.0):
        raise ValidationError(f"sign must be +1 or -1, got {sign!r}")
    for w in (u, v):
        if abs(w.norm() - 1.0) > ORTHO_TOL:
            raise ValidationError(f"vector {w.id or '?'} is not normalized: |norm - 1| > {ORTHO_TOL}")
    if abs(u.dot(v)) > ORTHO_TOL:
        raise ValidationError(f"vectors {u.id or '?'}, {v.id or '?'} are not orthogonal")
    ca = math.sqrt(alpha)
    cb = math.sqrt(1.0 - alpha)
    e = FrameVector.combine(ca, u, cb * sign, v)
    etilde = FrameVector.combine(cb, u, -ca * sign, v)
    return e, etilde


def chain_execute(
    oracle: EntryOracle,
    start: FrameVector,
    feed: Sequence[int],
    targets: Sequence[float],
    max_steps: int = 10_000,
    *,
    chain_id: str = "c0",
) -> tuple[list[FrameVector], FrameVector, MoveLog]:
    """Run a rotation chain: pair the pending vector with each feed index.

    Step k rotates (pending, f_{feed[k]}) so the constructed vector attains
    targets[k]; the remainder becomes the next pending vector.  The pending
    value is tracked by the trace identity new_value = dt1 + dt2 - achieved
    and renormalized (and flagged) if its norm drifts beyond 1e-12.
    """
    if len(targets) > len(feed):
        raise ValidationError(
            f"chain needs one feed index per target: {len(targets)} targets, {len(feed)} feeds"
        )
    if len(targets) > max_steps:
        raise ValidationError(f"chain needs {len(targets)} steps, max_steps = {max_steps}")
    pending = start.copy()
    pending_value = compressed_entry(oracle, pending, pending)
    vectors: list[FrameVector] = []
    log = MoveLog(chain_id=chain_id, feed=list(feed[: len(targets)]))
    for k, (j, target) in enumerate(zip(feed, targets), start=1):
        f = FrameVector.basis(j)
        dt1 = pending_value
        dt2 = oracle.entry(j, j)
        beta = compressed_entry(oracle, pending, f)
        try:
            alpha, sign = solve_two_by_two(dt1, dt2, beta, target)
        except BracketingError as exc:
            raise BracketingError(
                f"chain {chain_id} step {k} (feed {j}): {exc}", step=k
            ) from exc
        e, new_pending = apply_pair_move(pending, f, alpha, sign)
        achieved = pair_value(dt1, dt2, beta, sign, alpha)
        renorm = False
        nrm = new_pending.norm()
        if abs(nrm - 1.0) > RENORM_TRIGGER and nrm > 0.0:
            new_pending = new_pending.scaled(1.0 / nrm)
            renorm = True
        e.id = f"{chain_id}.e{k}"
        new_pending.id = f"{chain_id}.r{k}"
        log.moves.append(
            PairMove(k, pending.id, f.id, alpha, sign, beta, target, achieved, renorm)
        )
        vectors.append(e)
        pending = new_pending
        pending_value = dt1 + dt2 - achieved
    return vectors, pending, log


def replay_chain(
    start: FrameVector,
    feed: Sequence[int],
    log: MoveLog,
) -> tuple[list[FrameVector], FrameVector]:
    """Re-apply a logged chain without an oracle; no solves, no checks."""
    pending = start.copy()
    vectors: list[FrameVector] = []
    for move, j in zip(log.moves, feed):
        e, pending = apply_pair_move(pending, FrameVector.basis(j), move.alpha, move.sign)
        if move.renormalized:
            nrm = pending.norm()
            if nrm > 0.0:
                pending = pending.scaled(1.0 / nrm)
        e.id = f"{log.chain_id}.e{move.step}"
        pending.id = f"{log.chain_id}.r{move.step}"
        vectors.append(e)
    return vectors, pending


@dataclass(frozen=True)
class ChainDiagnostics:
    """Mass-loss indicators for one chain.

    The chain captures all the mass of its starting vector exactly when the
    rotation products vanish; the ratio sums diverging is the usable
    sufficient condition, and they always stay below 1/product.
    """

    partial_products: tuple[float, ...]
    partial_sums: tuple[float, ...]
    divergence_bound: float
    saturated_steps: tuple[int, ...]


def completeness_diagnostics(log: MoveLog) -> ChainDiagnostics:
    """Partial products of (1 - alpha) and partial sums of alpha/(1-alpha)."""
    products: list[float] = []
    sums: list[float] = []
    saturated: list[int] = []
    prod = 1.0
    total = 0.0
    for move in log.moves:
        a = move.alpha
        prod *= 1.0 - a
        if a >= 1.0:
            saturated.append(move.step)
            total = math.inf
        elif not math.isinf(total):
            total += a / (1.0 - a)
        products.append(prod)
        sums.append(total)
        # 1 + sum_k a_k/(1-a_k) <= prod_k 1/(1-a_k), so sums stay below the
        # reciprocal product; a violation means the log is corrupt.
        if prod > 0.0 and not math.isinf(total):
            if total > 1.0 / prod * (1.0 + 1e-9) + 1e-9:
                raise ValidationError(
                    f"chain {log.chain_id}: ratio sum {total!r} exceeds "
                    f"reciprocal product {1.0 / prod!r} at step {move.step}"
                )
    bound = math.inf if prod == 0.0 else 1.0 / prod
    return ChainDiagnostics(tuple(products), tuple(sums), bound, tuple(saturated))
