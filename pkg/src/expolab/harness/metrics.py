"""Convergence metrics over frame sequences."""

from __future__ import annotations

from typing import Optional, Sequence

from ..percept import r_flk

DEFAULT_EPSILON = 0.02


def convergence_index(diffs: Sequence[float], epsilon: float = DEFAULT_EPSILON) -> Optional[int]:
    """First k (1-based, diffs[k-1] compares frame k with frame k-1) such that
    the diffs at k and k+1 are both below ``epsilon``; None if there is none."""
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    for j in range(len(diffs) - 1):
        if diffs[j] < epsilon and diffs[j + 1] < epsilon:
            return j + 1
    return None


def frames_to_converge(frames: Sequence, epsilon: float = DEFAULT_EPSILON) -> Optional[int]:
    """Frame index at which consecutive-frame differences settle below ``epsilon``.

    Returns None (not converged) if two consecutive sub-threshold differences
    never occur.
    """
    if len(frames) < 2:
        raise ValueError("need at least two frames")
    diffs = [r_flk(frames[j], frames[j - 1]) for j in range(1, len(frames))]
    return convergence_index(diffs, epsilon)
