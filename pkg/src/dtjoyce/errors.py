"""Typed errors. Every error carries a short machine-readable ``code``."""

from __future__ import annotations


class DTError(Exception):
    code = "ERROR"

    def __init__(self, message: str = ""):
        super().__init__(f"{self.code}: {message}" if message else self.code)


def _make(name: str, code: str, base: type = DTError) -> type:
    return type(name, (base,), {"code": code})


PoleError = _make("PoleError", "POLE")
BranchCutError = _make("BranchCutError", "BRANCH_CUT")
BranchPointError = _make("BranchPointError", "BRANCH_POINT")
StripViolation = _make("StripViolation", "STRIP_VIOLATION")
PoleNearContour = _make("PoleNearContour", "POLE_NEAR_CONTOUR")
PoleHit = _make("PoleHit", "POLE_HIT")
NoActiveClasses = _make("NoActiveClasses", "NO_ACTIVE_CLASSES")
CutoffTooSmall = _make("CutoffTooSmall", "CUTOFF_TOO_SMALL")
FinitenessUndecidable = _make("FinitenessUndecidable", "FINITENESS_UNDECIDABLE")
AsymmetricOmega = _make("AsymmetricOmega", "ASYMMETRIC_OMEGA")
BoundaryActive = _make("BoundaryActive", "BOUNDARY_ACTIVE")
NotUncoupled = _make("NotUncoupled", "NOT_UNCOUPLED")
NotFinite = _make("NotFinite", "NOT_FINITE")
IllConditioned = _make("IllConditioned", "ILL_CONDITIONED")
ZeroCentralCharge = _make("ZeroCentralCharge", "ZERO_CENTRAL_CHARGE")
DegenerateForm = _make("DegenerateForm", "DEGENERATE_FORM")
DimensionMismatch = _make("DimensionMismatch", "DIMENSION_MISMATCH")
NotTame = _make("NotTame", "NOT_TAME")
OnDiscriminant = _make("OnDiscriminant", "ON_DISCRIMINANT")
RootCollision = _make("RootCollision", "ROOT_COLLISION")
QOnCycle = _make("QOnCycle", "Q_ON_CYCLE")
PZero = _make("PZero", "P_ZERO")
JacobianSingular = _make("JacobianSingular", "JACOBIAN_SINGULAR")
NewtonDiverged = _make("NewtonDiverged", "NEWTON_DIVERGED")
OnWall = _make("OnWall", "WALL")


class NonIntegerBranchWarning(UserWarning):
    """A birational factor was raised to a non-integer power (principal branch used)."""
