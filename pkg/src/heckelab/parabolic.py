"""Parabolic-bundle stability for rank 2 with small symmetric weights.

A parabolic bundle is an underlying bundle plus one line per marked
point; a line is *bad* when it is the fiber of a maximal-slope line
subbundle, and marks are bad in the same direction when one subbundle
witnesses them all.  In the small-weight regime the stability verdict
only depends on the largest such group.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .projective import PROJ_TOL, ProjPoint, chordal
from .rational import (
    RationalBundle,
    RationalSequence,
    membership_H,
)
from .elliptic import (
    EllipticBundle,
    MarkedBundle,
    bad_group_key,
    is_semistable as elliptic_semistable,
    raw_directions,
    sequence_evaluators,
)

#: Default parabolic weight; inside mu < 1/(2n) for all n <= 16.
DEFAULT_WEIGHT = 1e-3


class UnderlyingUnstable(ValueError):
    """Operation needs a semistable underlying bundle."""


class TerminalNotMinimal(ValueError):
    """Sequence terminal bundle does not have minimal Hecke length."""


class Verdict(Enum):
    STABLE = "stable"
    STRICTLY_SEMISTABLE = "strictly-semistable"
    UNSTABLE = "unstable"


@dataclass(frozen=True)
class StabilityVerdict:
    verdict: Verdict
    witness: int  # max count of marks bad in one direction


@dataclass(frozen=True)
class Mark:
    point: object  # chart coordinate (rational) or CurvePoint (elliptic)
    line: ProjPoint


@dataclass(frozen=True)
class ParabolicBundle:
    underlying: RationalBundle | EllipticBundle
    marks: tuple[Mark, ...]
    weight: float = DEFAULT_WEIGHT

    def __post_init__(self):
        object.__setattr__(self, "marks", tuple(self.marks))
        n = len(self.marks)
        if n and self.weight >= 1 / (2 * n):
            raise ValueError(f"weight {self.weight} outside the small regime for n={n}")


def pdeg_line(degree: int, signs, weight: float = DEFAULT_WEIGHT) -> float:
    """Parabolic degree of a line subbundle with induced signs +-1."""
    return degree + weight * sum(signs)


def pslope_line(degree: int, signs, weight: float = DEFAULT_WEIGHT) -> float:
    return pdeg_line(degree, signs, weight)


def pdeg(pb: ParabolicBundle) -> float:
    """Rank-2 parabolic degree: the symmetric weights cancel."""
    u = pb.underlying
    if isinstance(u, RationalBundle):
        return float(u.degree)
    return float(u.det_class().degree)


def pslope(pb: ParabolicBundle) -> float:
    return pdeg(pb) / 2.0


def _underlying_semistable(u) -> bool:
    if isinstance(u, RationalBundle):
        return u.is_semistable()
    return elliptic_semistable(u)


def _mark_keys(pb: ParabolicBundle) -> list:
    """Bad-direction grouping key per mark; None marks a good line."""
    u = pb.underlying
    if isinstance(u, RationalBundle):
        if not u.is_semistable():
            raise UnderlyingUnstable(f"{u} is unstable")
        # Split semistable bundle: every direction is the fiber of a
        # constant subbundle; same direction <=> equal lines.
        return [("dir", m.line) for m in pb.marks]
    if not elliptic_semistable(u):
        raise UnderlyingUnstable(f"{u} is unstable")
    return [bad_group_key(u, m.line) for m in pb.marks]


def classify_lines(pb: ParabolicBundle) -> list[dict]:
    """Per-mark flags: bad or good, and the same-direction group count."""
    keys = _mark_keys(pb)
    out = []
    for i, (mark, key) in enumerate(zip(pb.marks, keys)):
        if key is None:
            out.append({"bad": False, "group_size": 0})
            continue
        size = sum(1 for k in keys if _same_key(key, k))
        out.append({"bad": True, "group_size": size})
    return out


def _same_key(k1, k2) -> bool:
    if k1 is None or k2 is None:
        return False
    if isinstance(k1, tuple) and k1 and k1[0] == "dir":
        return (
            isinstance(k2, tuple)
            and k2
            and k2[0] == "dir"
            and chordal(k1[1], k2[1]) < PROJ_TOL
        )
    return k1 == k2


def max_bad_group(pb: ParabolicBundle) -> int:
    keys = _mark_keys(pb)
    best = 0
    for key in keys:
        if key is None:
            continue
        best = max(best, sum(1 for k in keys if _same_key(key, k)))
    return best


def stability(pb: ParabolicBundle) -> StabilityVerdict:
    """Small-weight verdict: compare the largest bad group m with n/2.

    An unstable underlying bundle is parabolically unstable outright (its
    maximal subbundle wins by at least 1/2 against any weight sum).
    """
    if not _underlying_semistable(pb.underlying):
        return StabilityVerdict(Verdict.UNSTABLE, len(pb.marks))
    m = max_bad_group(pb)
    n = len(pb.marks)
    if 2 * m < n:
        return StabilityVerdict(Verdict.STABLE, m)
    if 2 * m == n:
        return StabilityVerdict(Verdict.STRICTLY_SEMISTABLE, m)
    return StabilityVerdict(Verdict.UNSTABLE, m)


# ---------------------------------------------------------------------------
# The correspondence between sequences and marked lines.


def lines_from_sequence(seq: RationalSequence) -> list[Mark]:
    """Marked lines of a sequence: its direction tuple in the base frame."""
    return [Mark(mu, d) for mu, d in zip(seq.points, seq.h_map())]


def lines_from_elliptic_sequence(base: MarkedBundle, steps) -> list[Mark]:
    steps = list(steps)
    evs, _ = sequence_evaluators(base.bundle, steps)
    dirs = raw_directions(evs, [s.point for s in steps])
    return [Mark(s.point, d) for s, d in zip(steps, dirs)]


def tuple_from_lines(marks: list[Mark]):
    """Inverse correspondence: the marks are exactly the direction tuple."""
    return [m.point for m in marks], [m.line for m in marks]


def rational_terminal_class(marks: list[Mark]) -> RationalBundle:
    """Terminal bundle class of the sequence reinterpreting the marks."""
    points, dirs = tuple_from_lines(marks)
    from .rational import composite_from_tuple, min_column_degree

    n = len(marks)
    if n == 0:
        return RationalBundle(0, 0)
    p = composite_from_tuple(points, dirs)
    d1 = min_column_degree(p)
    return RationalBundle(-d1, -(n - d1))


# ---------------------------------------------------------------------------
# Hecke embeddings into the parabolic moduli spaces.


def hecke_embedding_rational(
    seq: RationalSequence, aux: list[Mark], weight: float = DEFAULT_WEIGHT
) -> ParabolicBundle:
    """Embed a minimal-terminal sequence as a stable parabolic bundle.

    The sequence contributes its direction tuple as marks; three auxiliary
    marks with distinct lines at fresh points make the result stable for
    even length.
    """
    n = len(seq)
    if n % 2:
        raise ValueError("the embedding is defined for even-length sequences")
    if len(aux) != 3:
        raise ValueError("need exactly three auxiliary marks")
    for i in range(3):
        for j in range(i + 1, 3):
            if chordal(aux[i].line, aux[j].line) < PROJ_TOL:
                raise ValueError("auxiliary lines must be distinct")
    dirs = seq.h_map()
    if not membership_H(n, dirs, seq.points):
        raise TerminalNotMinimal(f"terminal bundle {seq.terminal()} is not minimal")
    marks = [Mark(mu, d) for mu, d in zip(seq.points, dirs)] + list(aux)
    pb = ParabolicBundle(RationalBundle(0, 0), tuple(marks), weight)
    return pb


def hecke_embedding_elliptic(
    base: MarkedBundle, steps, weight: float = DEFAULT_WEIGHT
) -> ParabolicBundle:
    """Embed an even minimal sequence on a marked bundle, adding the good
    mark itself as the auxiliary line."""
    steps = list(steps)
    n = len(steps)
    if n % 2:
        raise ValueError("the embedding is defined for even-length sequences")
    evs, bundles = sequence_evaluators(base.bundle, steps)
    if not elliptic_semistable(bundles[-1]):
        raise TerminalNotMinimal(f"terminal bundle {bundles[-1]} is unstable")
    marks = lines_from_elliptic_sequence(base, steps)
    marks.append(Mark(base.q, base.line))
    return ParabolicBundle(base.bundle, tuple(marks), weight)
