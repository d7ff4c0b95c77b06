"""Exception and warning types shared across the toolkit.

Hard contract violations raise; recoverable conditions that fall back to a
documented default are emitted as warnings instead.
"""


class BasReliefError(Exception):
    """Base class for all toolkit errors."""


class DimensionMismatch(BasReliefError, ValueError):
    """Two grids that must share a shape do not."""


class EmptyOverlap(BasReliefError, ValueError):
    """A patch placed at the given offset does not intersect the target."""


class UnstableStep(BasReliefError, ValueError):
    """Diffusion step size exceeds the explicit-scheme stability bound."""


class NonConvergence(BasReliefError, RuntimeError):
    """Iterative solve hit its iteration cap above the residual tolerance."""


class EmptyDomain(BasReliefError, ValueError):
    """The foreground mask selects no usable pixels (or quads, for meshes)."""


class LabelGap(BasReliefError, ValueError):
    """A foreground pixel carries a label with no configured offset."""


class BadFormat(BasReliefError, ValueError):
    """Input bytes are not a decodable image of the expected kind."""


class ValidationError(BasReliefError, ValueError):
    """A pipeline config or parameter set failed validation before execution."""


class StageError(BasReliefError, RuntimeError):
    """A pipeline stage failed; carries the stage name and the original error."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class DegenerateSumWarning(UserWarning):
    """Bilateral weighted sum collapsed below 1e-12; pixel fell back to input."""


class FlatDetailWarning(UserWarning):
    """Detail image carries no angular content; tuning returned it unchanged."""


class ConstantFieldWarning(UserWarning):
    """Height field is constant; rescaling returned zeros."""


class NonUnitWarning(UserWarning):
    """Decoded normals deviated from unit length by more than 0.1 before renormalization."""
