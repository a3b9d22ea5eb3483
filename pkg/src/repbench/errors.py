"""Exception types shared across the repbench modules."""


class RepbenchError(Exception):
    """Base class for all repbench errors."""


class PointAtInfinity(RepbenchError):
    """Projective division would divide by a near-zero homogeneous weight."""


class DegenerateRegion(RepbenchError):
    """A region transport produced a shape matrix that is not positive definite."""


class SingularHomography(RepbenchError):
    """A 3x3 matrix with zero determinant cannot act as a homography."""


class ParseError(RepbenchError):
    """Malformed input text.

    `line` is the 1-based line number when the error is attributable to one.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvalidRegion(ParseError):
    """A parsed keypoint region violates positive definiteness or finiteness."""


class ManifestError(RepbenchError):
    """A dataset manifest is structurally valid JSON but violates the schema."""


class UndefinedMetric(RepbenchError):
    """A repeatability formula was evaluated with a zero denominator."""


class DescriptorUnavailable(RepbenchError):
    """Descriptor matching was requested on sets without usable descriptors."""


class DegenerateSeries(RepbenchError):
    """A series has zero variance, so correlation is undefined."""


class LengthMismatch(RepbenchError):
    """Two series that must align have different lengths."""


class InsufficientData(RepbenchError):
    """Fewer samples than the operation needs."""
