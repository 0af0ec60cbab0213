"""Normalization regimes keyed by the tail index s."""

from __future__ import annotations

REGIME_SUB = "s<1"
REGIME_ONE = "s=1"
REGIME_MID = "1<s<2"
REGIME_TWO = "s=2"
REGIMES = (REGIME_SUB, REGIME_ONE, REGIME_MID, REGIME_TWO)

# Solved indices within this distance of a boundary value are treated as
# sitting exactly on it.
BOUNDARY_ATOL = 0.02


class RegimeMismatch(ValueError):
    """Requested regime is inconsistent with the model's tail index."""


def regime_for(s: float, atol: float = BOUNDARY_ATOL) -> str:
    """Regime label for tail index s; raises RegimeMismatch beyond s=2."""
    if s <= 0:
        raise RegimeMismatch("tail index must be positive")
    if abs(s - 1.0) <= atol:
        return REGIME_ONE
    if abs(s - 2.0) <= atol:
        return REGIME_TWO
    if s < 1.0:
        return REGIME_SUB
    if s < 2.0:
        return REGIME_MID
    raise RegimeMismatch(
        f"tail index {s:.4f} exceeds 2: diffusive regime is out of scope"
    )


def check_regime(regime: str, s: float, atol: float = BOUNDARY_ATOL) -> None:
    if regime not in REGIMES:
        raise RegimeMismatch(f"unknown regime {regime!r}")
    if regime_for(s, atol) != regime:
        raise RegimeMismatch(
            f"regime {regime!r} inconsistent with tail index {s:.4f}"
        )
