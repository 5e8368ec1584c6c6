"""Upper bounds on central vanishing orders for orthogonal families,
via density expectations and centered moments of random-matrix linear
statistics, with a generator-space optimizer and Monte Carlo
verification."""

from .bounds import (
    BoundCandidate,
    BoundResult,
    ParityError,
    RankTooSmallError,
    best_bound,
    bound_level1,
    bound_level2,
    bound_moment,
    reproduce_table,
)
from .kernels import (
    DensityValue,
    DensityValue2D,
    SymmetryGroup,
    density_W1,
    density_W2,
    expectation_1level,
    expectation_2level,
    kernel_K,
    kernel_K_eps,
    raw_to_centered,
    raw_to_centered3,
)
from .moments import (
    Matching,
    MomentRequest,
    MomentResult,
    SupportRegimeError,
    centered_moment,
    enumerate_matchings,
    r_term,
)
from .optimize import (
    GeneratorBasis,
    NoFeasiblePointError,
    OptimizationProblem,
    SearchSettings,
    objective,
    search,
)
from .quadrature import (
    QuadratureError,
    QuadratureSettings,
    integrate,
    integrate_2d,
    integrate_sinc_weighted,
)
from .rmt import (
    EnsembleSpec,
    EmpiricalMoments,
    empirical_moments,
    linear_statistic,
    predicted_moment,
    sample_haar,
    verify_moments,
)
from .testfunc import (
    GeneratorSpec,
    TestFunction,
    from_spec_string,
    make_from_generator,
    make_naive,
    min_rank,
    sigma2,
)

__version__ = "0.1.0"

__all__ = [
    "BoundCandidate",
    "BoundResult",
    "DensityValue",
    "DensityValue2D",
    "EmpiricalMoments",
    "EnsembleSpec",
    "GeneratorBasis",
    "GeneratorSpec",
    "Matching",
    "MomentRequest",
    "MomentResult",
    "NoFeasiblePointError",
    "OptimizationProblem",
    "ParityError",
    "QuadratureError",
    "QuadratureSettings",
    "RankTooSmallError",
    "SearchSettings",
    "SupportRegimeError",
    "SymmetryGroup",
    "TestFunction",
    "best_bound",
    "bound_level1",
    "bound_level2",
    "bound_moment",
    "centered_moment",
    "density_W1",
    "density_W2",
    "empirical_moments",
    "enumerate_matchings",
    "expectation_1level",
    "expectation_2level",
    "from_spec_string",
    "integrate",
    "integrate_2d",
    "integrate_sinc_weighted",
    "kernel_K",
    "kernel_K_eps",
    "linear_statistic",
    "make_from_generator",
    "make_naive",
    "min_rank",
    "objective",
    "predicted_moment",
    "r_term",
    "raw_to_centered",
    "raw_to_centered3",
    "reproduce_table",
    "sample_haar",
    "search",
    "sigma2",
    "verify_moments",
]
