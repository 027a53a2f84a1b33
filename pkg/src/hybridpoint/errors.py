"""Exception types shared across the toolkit."""


class HybridPointError(Exception):
    """Base class for all toolkit errors."""


class CalibrationError(HybridPointError, ValueError):
    """A camera model violates its construction invariants."""


class OutOfBoundsError(HybridPointError):
    """A pixel coordinate falls outside the image rectangle."""


class OutOfFovError(HybridPointError):
    """A sensor point or ray falls outside the fisheye field of view."""


class NoRootError(OutOfFovError):
    """The fisheye projection equation has no solution for this ray."""


class BehindCameraError(HybridPointError):
    """A ray points behind the perspective camera (z <= 0)."""


class DegenerateHomographyError(HybridPointError, ValueError):
    """A homography matrix is (numerically) non-invertible."""


class RejectionExhaustedError(HybridPointError):
    """Rejection sampling failed to find an acceptable draw."""


class ShapeMismatchError(HybridPointError, ValueError):
    """Array dimensions disagree with what an operation requires."""


class DimensionNotMultipleOf8Error(ShapeMismatchError):
    """Image dimensions must be divisible by the 8-pixel cell size."""


class EmptyInputError(HybridPointError, ValueError):
    """An operation received an empty collection it cannot handle."""


class EmptyOverlapError(HybridPointError):
    """No fisheye cell centroid maps inside the perspective image."""


class EmptyDatasetError(HybridPointError):
    """A dataset directory contains no evaluation pairs."""


class MissingCalibrationError(HybridPointError):
    """A dataset pair lacks the calibration/homography metadata."""
