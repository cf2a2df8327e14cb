"""Projectivity matrix of the centre's strict neighbourhood and the nullity criterion.

Columns are indexed by the inactive subset ``B`` of the four neighbour slots
``{1, 2, 3, 4}``, sorted by size then lexically: column 0 is ``B = {}``
(all active), column 15 is ``B = {1, 2, 3, 4}``. Column c holds the cylinder
``[L \\ B_c, B_c]``.

Rows 0..14 are additivity equations, one per nonempty ``B``:
``mu([A, B]) + mu([A + {m}, B - {m}]) = mu([A, B - {m}])`` with pivot
``m = max(B)``; only the two unknowns on the left get a coefficient. Row 15
holds the conditional probabilities ``Phi_c`` of the centre being active.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, Tuple

import numpy as np
import scipy.linalg

from .dynamics import (FULL_MASK, NEIGHBOURHOOD_SIZE, PotentialSet, _size, exponent, logistic,
                       phi_symmetry_check, symmetry_residual)
from .errors import DomainError

SLOTS = tuple(range(1, NEIGHBOURHOOD_SIZE + 1))

# SUBSETS[c] is the inactive set B of column c
SUBSETS: Tuple[FrozenSet[int], ...] = tuple(
    frozenset(combo) for size in range(NEIGHBOURHOOD_SIZE + 1) for combo in combinations(SLOTS, size)
)
SUBSET_INDEX: Dict[FrozenSet[int], int] = {B: c for c, B in enumerate(SUBSETS)}

DET_RTOL = 1e-9
RESIDUAL_TOL = 1e-10


def subset_index(B: Iterable[int]) -> int:
    B = frozenset(B)
    if B not in SUBSET_INDEX:
        raise DomainError(f"{set(B)} is not a subset of the neighbour slots {set(SLOTS)}")
    return SUBSET_INDEX[B]


def slots_to_mask(S: Iterable[int]) -> int:
    return sum(1 << (s - 1) for s in S)


def mask_to_slots(mask: int) -> FrozenSet[int]:
    return frozenset(s for s in SLOTS if mask >> (s - 1) & 1)


# Column index for a 4-bit mask of INACTIVE slots (bit s-1 <-> slot s)
MASK_TO_COLUMN = np.array([SUBSET_INDEX[mask_to_slots(m)] for m in range(FULL_MASK + 1)], dtype=np.int64)


@dataclass(frozen=True)
class Cylinder:
    """Event ``{x : x_i = 1 on A, x_i = 0 on B}``."""

    A: frozenset = frozenset()
    B: frozenset = frozenset()

    def __post_init__(self):
        A, B = frozenset(self.A), frozenset(self.B)
        if A & B:
            raise DomainError(f"cylinder sets overlap on {set(A & B)}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)


def conditional_phi(K, p: PotentialSet) -> float:
    """Phi(K, Lambda \\ K): probability that the centre is active given active neighbours K."""
    return logistic(exponent(_size(K), p))


@dataclass(frozen=True)
class ProjectivityMatrix:
    entries: np.ndarray
    pivots: Tuple[Tuple[int, int], ...]  # (column of B, column of B minus pivot) per additivity row

    @property
    def phi(self) -> np.ndarray:
        return self.entries[-1]


def build_projectivity_matrix(p: PotentialSet, pivot: str = "max") -> ProjectivityMatrix:
    """16 x 16 matrix; ``pivot`` picks which element of B is moved (``"max"`` or ``"min"``)."""
    if pivot not in ("max", "min"):
        raise DomainError(f"pivot must be 'max' or 'min', got {pivot!r}")
    choose = max if pivot == "max" else min
    n = len(SUBSETS)
    M = np.zeros((n, n))
    pivots = []
    for row, B in enumerate(SUBSETS[1:]):
        c, parent = SUBSET_INDEX[B], SUBSET_INDEX[B - {choose(B)}]
        M[row, c] = 1.0
        M[row, parent] = 1.0
        pivots.append((c, parent))
    M[-1] = [logistic(exponent(NEIGHBOURHOOD_SIZE - len(B), p)) for B in SUBSETS]
    M.setflags(write=False)
    return ProjectivityMatrix(M, tuple(pivots))


def determinant(m) -> Tuple[float, float]:
    """Determinant by LU with partial pivoting, and the Hadamard scale (product of row norms).

    ``|det| <= scale`` always; nullity is judged relative to the scale.
    """
    a = np.array(getattr(m, "entries", m), dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DomainError(f"determinant needs a square matrix, got shape {a.shape}")
    scale = float(np.prod(np.linalg.norm(a, axis=1)))
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=True)
    swaps = np.count_nonzero(piv != np.arange(len(piv)))
    det = float(np.prod(np.diag(lu))) * (-1.0 if swaps % 2 else 1.0)
    return det, scale


def alternating_sum(p: PotentialSet) -> float:
    """Sum over all K of ``(-1)^{|Lambda \\ K|} Phi(K, Lambda \\ K)``, by subset enumeration."""
    total = 0.0
    for B in SUBSETS:
        total += (-1) ** len(B) * logistic(exponent(NEIGHBOURHOOD_SIZE - len(B), p))
    return total


def pairing_deviation(p: PotentialSet) -> float:
    """Max over K of ``|Phi(K, Lambda \\ K) + Phi(Lambda \\ K, K) - 1|``."""
    return max(
        abs(conditional_phi(K, p) + conditional_phi(FULL_MASK ^ K, p) - 1.0) for K in range(FULL_MASK + 1)
    )


@dataclass
class CriterionReport:
    det: float
    det_scale: float
    alt_sum: float
    symmetry_residual: float
    phi_symmetric: bool
    necessary_condition_met: bool
    sufficient_symmetry_met: bool

    def to_dict(self) -> dict:
        return {
            "det": self.det,
            "alt_sum": self.alt_sum,
            "symmetry_residual": self.symmetry_residual,
            "phi_symmetric": self.phi_symmetric,
            "necessary_condition_met": self.necessary_condition_met,
            "sufficient_symmetry_met": self.sufficient_symmetry_met,
        }


def phase_transition_report(p: PotentialSet, det_rtol: float = DET_RTOL,
                            residual_tol: float = RESIDUAL_TOL) -> CriterionReport:
    det, scale = determinant(build_projectivity_matrix(p))
    residual = symmetry_residual(p)
    phi_sym, _ = phi_symmetry_check(p)
    return CriterionReport(
        det=det,
        det_scale=scale,
        alt_sum=alternating_sum(p),
        symmetry_residual=residual,
        phi_symmetric=phi_sym,
        necessary_condition_met=abs(det) < det_rtol * scale,
        sufficient_symmetry_met=abs(residual) < residual_tol and phi_sym,
    )
