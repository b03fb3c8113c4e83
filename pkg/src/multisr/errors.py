"""Exception types shared across the package."""


class DomainError(ValueError):
    """An input lies outside the mathematical domain of an operation."""


class OutOfDomainError(DomainError):
    """A location falls outside a tabulated illumination grid."""


class RankDeficiencyError(DomainError):
    """Vandermonde nodes coincide, so the spanned space degenerates."""


class PreconditionError(DomainError):
    """A lemma hypothesis is not met; the message names the failed inequality."""


class CertificationError(AssertionError):
    """A computed quantity contradicts a proven inequality.

    Never expected in practice: raising it means either a numerical
    failure or a counterexample to the underlying result.
    """


class InterpolationError(DomainError):
    """Requested frequency nodes are absent and cannot be re-evaluated."""
