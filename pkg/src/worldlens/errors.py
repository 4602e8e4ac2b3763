"""Exception hierarchy for the evaluation engine.

Every error raised by the public API derives from :class:`WorldLensError`
so callers can catch a single base class at the CLI boundary.
"""


class WorldLensError(Exception):
    """Base class for all engine errors."""


# --- interchange ---------------------------------------------------------

class BadMagic(WorldLensError):
    pass


class TruncatedPayload(WorldLensError):
    pass


class UnknownDtype(WorldLensError):
    pass


class ShapeOverflow(WorldLensError):
    pass


class IoFailure(WorldLensError):
    pass


class InvariantViolation(WorldLensError):
    pass


class ParseError(WorldLensError):
    pass


class MissingArtifact(WorldLensError):
    def __init__(self, metric, detail):
        super().__init__(f"{metric}: {detail}")
        self.metric = metric
        self.detail = detail


class DanglingReference(WorldLensError):
    pass


# --- numerics -------------------------------------------------------------

class ZeroVector(WorldLensError):
    pass


class LengthMismatch(WorldLensError):
    pass


class TooShort(WorldLensError):
    pass


class NotSymmetric(WorldLensError):
    pass


class IndefiniteMatrix(WorldLensError):
    pass


class DimMismatch(WorldLensError):
    pass


class TooFewSamples(WorldLensError):
    pass


class EmptyMatrix(WorldLensError):
    pass


class NonFiniteCost(WorldLensError):
    pass


class NegativeMass(WorldLensError):
    pass


class ZeroMass(WorldLensError):
    pass


class ShapeMismatch(WorldLensError):
    pass


class TooSmall(WorldLensError):
    pass


# --- generation -----------------------------------------------------------

class EmptyInput(WorldLensError):
    pass


class NoUsableTracks(WorldLensError):
    pass


class SingleFrame(WorldLensError):
    pass


class EmptyMasks(WorldLensError):
    pass


class UnknownPair(WorldLensError):
    pass


# --- reconstruction -------------------------------------------------------

class EmptyMask(WorldLensError):
    pass


class NonPositiveGtDepth(WorldLensError):
    pass


class UnknownTrajectoryName(WorldLensError):
    pass


class EmptyCondition(WorldLensError):
    pass


# --- action ---------------------------------------------------------------

class ZeroRoute(WorldLensError):
    pass


class OutOfRangeSubScore(WorldLensError):
    pass


# --- downstream -----------------------------------------------------------

class OutOfRange(WorldLensError):
    pass


class NoGroundTruth(WorldLensError):
    pass


class GridMismatch(WorldLensError):
    pass


# --- preference -----------------------------------------------------------

class NoRecords(WorldLensError):
    pass


class UnvalidatedRecord(WorldLensError):
    pass


# --- engine ---------------------------------------------------------------

class ManifestError(WorldLensError):
    pass


class NoMetricsSelected(WorldLensError):
    pass
