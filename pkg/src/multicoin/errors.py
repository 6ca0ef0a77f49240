"""Exception hierarchy shared by all multicoin modules.

Every domain error derives from :class:`MulticoinError` so callers (CLI,
service) can map any data problem to one exit path without enumerating
module-specific failure modes.
"""


class MulticoinError(Exception):
    """Base class for all multicoin domain errors."""


# codec errors

class BadMagic(MulticoinError):
    """Byte stream does not start with the expected magic."""


class BadHeader(MulticoinError):
    """Malformed text header in a PFM/PPM stream."""


class TruncatedPayload(MulticoinError):
    """Payload length does not match what the header promises."""


class UnsupportedColorPfm(MulticoinError):
    """Color ('PF') portable float maps are not supported, only grayscale 'Pf'."""


class UnsupportedBitDepth(MulticoinError):
    """Image bit depth other than 8 bits per channel."""


class CorruptStream(MulticoinError):
    """Undecodable image byte stream."""


class NonFiniteValue(MulticoinError):
    """NaN or infinity where finite values are required."""


# sampling / fixtures

class OutOfBounds(MulticoinError):
    """Sample coordinate outside the field domain."""


class BadParams(MulticoinError):
    """Invalid synthetic-fixture parameters."""


# visualize

class AmbiguousColor(MulticoinError):
    """Pixel color is neither background nor on the depth ramp."""


# trajectory

class NoMotion(MulticoinError):
    """Seed selection on an all-zero flow field."""


class LengthMismatch(MulticoinError):
    """Sequence length does not match the trajectory frame range."""


class NoMatches(MulticoinError):
    """No feature pair passed the correspondence threshold."""


# controls

class MissingFlowSample(MulticoinError):
    """Trajectory covers the frame but carries no flow there."""


class MissingDepthSample(MulticoinError):
    """Trajectory covers the frame but carries no depth there."""


class EmptyInput(MulticoinError):
    """An operation that needs at least one sample got none."""


class NonPositiveDepth(MulticoinError):
    """Depth samples must be finite and positive."""


# regions

class StaticAnchor(MulticoinError):
    """Segmentation anchor sits on zero flow."""


class TimeOutOfRange(MulticoinError):
    """Requested frame index outside the trajectory's time range."""


class AnchorMismatch(MulticoinError):
    """Region anchor does not coincide with the trajectory at the source frame."""


class SlotCollision(MulticoinError):
    """Keyframe and target assigned to the same temporal slot."""


class MissingEndpoints(MulticoinError):
    """First/last keyframe slot not provided."""


# latent_pack

class IndivisibleDims(MulticoinError):
    """Spatial dims not divisible by the VAE/patch factors."""


class ShapeMismatch(MulticoinError):
    """Operands have different shapes."""


# metrics

class EmptyPolyline(MulticoinError):
    """Polyline with no points."""


class DimensionMismatch(MulticoinError):
    """Inputs disagree on spatial dimensions or sequence length."""


class TooSmall(MulticoinError):
    """Image smaller than the metric window."""
