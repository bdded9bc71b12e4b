"""Exception types shared across the toolkit.

Every error raised on a contract violation derives from GaitkinError so
callers can catch toolkit failures without masking programming errors.
"""


class GaitkinError(Exception):
    """Base class for all toolkit errors."""


# -- geometry ---------------------------------------------------------------

class DegenerateVector(GaitkinError):
    """A vector involved in an angle computation has (near-)zero length."""


class MissingJoint(GaitkinError):
    """A required keypoint is absent from a frame."""

    def __init__(self, joint: str):
        super().__init__(f"required keypoint missing: {joint!r}")
        self.joint = joint


class IllConditioned(GaitkinError):
    """A least-squares system is numerically singular."""

    def __init__(self, condition: float):
        super().__init__(f"normal equations ill-conditioned (cond ~ {condition:.3e})")
        self.condition = condition


class SeriesTooShort(GaitkinError):
    """Input series is shorter than the filter window."""


class GapTooLarge(GaitkinError):
    """A run of incomplete frames exceeds the interpolation limit."""

    def __init__(self, start_s: float, end_s: float, n_frames: int):
        super().__init__(
            f"gap of {n_frames} incomplete frames spans [{start_s:.3f}, {end_s:.3f}] s"
        )
        self.start_s = start_s
        self.end_s = end_s
        self.n_frames = n_frames


# -- tcn --------------------------------------------------------------------

class ShapeMismatch(GaitkinError):
    """Tensor shape does not match the model configuration."""


class NonFiniteInput(GaitkinError):
    """An input tensor contains NaN or infinity."""


class DatasetTooSmall(GaitkinError):
    """Dataset cannot support the requested batch/split sizes."""


class NonFiniteLoss(GaitkinError):
    """Training loss became NaN or infinite."""

    def __init__(self, epoch: int):
        super().__init__(f"loss became non-finite at epoch {epoch}")
        self.epoch = epoch


class ConfigMismatch(GaitkinError):
    """Model configuration is incompatible with the dataset."""


# -- model file -------------------------------------------------------------

class BadMagic(GaitkinError):
    """File does not start with the model-format magic bytes."""


class VersionMismatch(GaitkinError):
    """Model file was written with an unsupported format version."""

    def __init__(self, found: int, supported: int):
        super().__init__(f"model format version {found} (supported: {supported})")
        self.found = found
        self.supported = supported


class ChecksumMismatch(GaitkinError):
    """Model file payload fails its CRC32 check."""


class TruncatedFile(GaitkinError):
    """Model file ended before the expected payload."""


# -- synth ------------------------------------------------------------------

class RateMismatch(GaitkinError):
    """Sample rate of an input sequence differs from the expected rate."""


# -- pipeline ---------------------------------------------------------------

class Misaligned(GaitkinError):
    """IMU and label timestamps disagree beyond tolerance."""


class InsufficientSK(GaitkinError):
    """Requested stiff-knee fraction exceeds the available data."""


class LengthMismatch(GaitkinError):
    """Prediction and truth sequences differ in length."""


class ZeroBaseline(GaitkinError):
    """Improvement percentage is undefined for a zero baseline."""


# -- stream -----------------------------------------------------------------

class ChannelMismatch(GaitkinError):
    """A sample's channel count differs from the model input width."""


class NonMonotoneTimestamps(GaitkinError):
    """Stream timestamps are not strictly increasing."""


class EmptyStats(GaitkinError):
    """No ticks were recorded; latency statistics are undefined."""


# -- file parsing -----------------------------------------------------------

class SchemaError(GaitkinError):
    """A data file violates its schema."""

    def __init__(self, path, line: int, reason: str):
        super().__init__(f"{path}:{line}: {reason}")
        self.path = path
        self.line = line
        self.reason = reason
