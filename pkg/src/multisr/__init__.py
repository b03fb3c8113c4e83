"""Resolution limits and recovery tools for multi-illumination point-source imaging."""

__version__ = "0.1.0"

from .errors import (CertificationError, DomainError, InterpolationError, OutOfDomainError,  # noqa: E402
                     PreconditionError, RankDeficiencyError)
from .measure import (ConstantPattern, DiscreteMeasure, IlluminationSet, SinusoidPattern,  # noqa: E402
                      SpeckleGrid, build_illumination_matrix, matched_sinusoids, random_speckle)
from .forward import (FrequencyGrid, MeasurementSet, add_noise, fourier_transform, frame_norm,  # noqa: E402
                      polar_grid, theorem_grid, uniform_grid)
from .incoherence import sigma_inf_min, singular_values  # noqa: E402
from .bounds import (bound_report, location_error_bound, threshold_1d_euclidean,  # noqa: E402
                     threshold_1d_wrapped, threshold_2d)
from .recovery import RecoveryProblem, certify_against_theorem, solve_l0  # noqa: E402
