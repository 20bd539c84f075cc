"""Belief-function arithmetic.

The production path only ever touches the binary frame {D, ND} through
:class:`MassFunction`, where combination collapses to a closed form.
:class:`GeneralMass` and :func:`dempster_combine_general` implement the rule
over arbitrary small frames and exist so the closed forms can be checked
against brute-force enumeration.

Subsets of a frame with ``n`` elements are encoded as integer bit sets, so
on the binary frame ``D = 0b01``, ``ND = 0b10`` and the full frame is ``0b11``.
All logarithms are base 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import TotalConflict

MASS_TOL = 1e-12
EPS_ENTROPY = 1e-12
MAX_FRAME = 16
LOG2_3 = math.log2(3.0)

D = 0b01
ND = 0b10
THETA = 0b11


@dataclass(frozen=True)
class MassFunction:
    """Mass assignment on {D, ND}; the empty set implicitly carries zero."""

    m_d: float
    m_nd: float = 0.0
    m_theta: float = 0.0

    def __post_init__(self):
        for name in ("m_d", "m_nd", "m_theta"):
            v = getattr(self, name)
            if not (-MASS_TOL <= v <= 1.0 + MASS_TOL):
                raise ValueError(f"{name}={v} outside [0, 1]")
        total = self.m_d + self.m_nd + self.m_theta
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {total}, expected 1")

    def to_general(self) -> "GeneralMass":
        assignments = {}
        for subset, v in ((D, self.m_d), (ND, self.m_nd), (THETA, self.m_theta)):
            if v > 0.0:
                assignments[subset] = v
        return GeneralMass(2, assignments)


@dataclass(frozen=True)
class GeneralMass:
    """Mass assignment over the power set of an ``n``-element frame."""

    frame_size: int
    assignments: dict[int, float] = field(default_factory=dict)

    def __post_init__(self):
        n = self.frame_size
        if not (1 <= n <= MAX_FRAME):
            raise ValueError(f"frame size must be in [1, {MAX_FRAME}], got {n}")
        full = (1 << n) - 1
        total = 0.0
        for subset, v in self.assignments.items():
            if subset == 0:
                raise ValueError("the empty set cannot carry mass")
            if subset & ~full:
                raise ValueError(f"subset {subset:#b} outside a frame of size {n}")
            if not (-MASS_TOL <= v <= 1.0 + MASS_TOL):
                raise ValueError(f"mass {v} outside [0, 1]")
            total += v
        if abs(total - 1.0) > MASS_TOL:
            raise ValueError(f"masses sum to {total}, expected 1")

    @classmethod
    def vacuous(cls, frame_size: int) -> "GeneralMass":
        return cls(frame_size, {(1 << frame_size) - 1: 1.0})

    def get(self, subset: int) -> float:
        return self.assignments.get(subset, 0.0)


def dempster_combine_general(a: GeneralMass, b: GeneralMass) -> tuple[GeneralMass, float]:
    """Combine two masses with Dempster's rule by enumerating focal pairs.

    Returns the normalized combination and the conflict, i.e. the product
    mass that landed on the empty set before normalization.
    """
    if a.frame_size != b.frame_size:
        raise ValueError("masses are defined on different frames")
    raw: dict[int, float] = {}
    conflict = 0.0
    for sa, va in a.assignments.items():
        for sb, vb in b.assignments.items():
            inter = sa & sb
            if inter == 0:
                conflict += va * vb
            else:
                raw[inter] = raw.get(inter, 0.0) + va * vb
    if abs(1.0 - conflict) <= MASS_TOL:
        raise TotalConflict(f"conflict {conflict} leaves nothing to normalize")
    norm = 1.0 - conflict
    return GeneralMass(a.frame_size, {s: v / norm for s, v in raw.items()}), conflict


def combine_simple(p_running: float, q_new: float) -> float:
    """Fused detection mass of two simple-support masses (p, 0, 1-p) and (q, 0, 1-q).

    The two never conflict, so no normalization is needed; the fused
    uncertainty mass is (1-p)(1-q).
    """
    return p_running + q_new - p_running * q_new


def combine_masses(a: MassFunction, b: MassFunction) -> MassFunction:
    """Dempster combination of two simple-support masses on {D, ND}."""
    if a.m_nd or b.m_nd:
        raise ValueError("closed form only covers masses with m_nd = 0")
    # multiply the carried uncertainties; 1 - m_d cancels badly near certainty
    p = combine_simple(a.m_d, b.m_d)
    return MassFunction(p, 0.0, a.m_theta * b.m_theta)


def hartley_entropy(m: MassFunction) -> float:
    """Non-specificity of a binary-frame mass, in bits.

    Singletons contribute nothing. The full frame is weighted by log2(3),
    i.e. log2(2^|F| - 1), which is the weighting the detection model uses
    for its uncertainty mass.
    """
    return m.m_theta * LOG2_3


def belief_entropy(m: GeneralMass | MassFunction) -> float:
    """Belief (Deng) entropy in bits; zero-mass subsets contribute 0."""
    if isinstance(m, MassFunction):
        m = m.to_general()
    total = 0.0
    for subset, v in m.assignments.items():
        if v <= 0.0:
            continue
        weight = (1 << bin(subset).count("1")) - 1
        total -= v * math.log2(v / weight)
    # -0.0 and tiny negative round-off from v == 1 singletons
    return max(total, 0.0)


def fusion_efficiency_generic(fused_entropy: float, geometric_mean_entropy: float) -> float:
    """One minus the ratio of fused entropy to the operands' geometric-mean entropy."""
    if geometric_mean_entropy < EPS_ENTROPY:
        return 0.0
    return 1.0 - fused_entropy / geometric_mean_entropy


def fusion_efficiency_hartley(p_running: float, q_new: float) -> float:
    """Efficiency of fusing a sensor with detection mass ``q_new`` into a
    running system whose fused detection mass is ``p_running``.

    With Hartley entropies the ratio of fused entropy to the geometric mean
    of the operands' entropies reduces to sqrt((1-p)(1-q)). When that
    geometric mean vanishes (a certain operand) the efficiency is 0.
    """
    root = math.sqrt((1.0 - p_running) * (1.0 - q_new))
    if root * LOG2_3 < EPS_ENTROPY:
        return 0.0
    return 1.0 - root
