"""The Cesàro operator on Köthe echelon spaces of order 0, at finite truncation.

Weight families, operator kernels, criterion verdicts, resolvent and spectrum
machinery, ergodic means and exact oracles.
"""

__version__ = "0.1.0"

from .weights import WeightFamily, builtin, family_from_spec  # noqa: E402
from .kernel import SequenceVector, TriangularKernel, cesaro_apply, cesaro_inverse_apply, seminorm  # noqa: E402
from .criteria import Status, Verdict  # noqa: E402
from .spectral import ResolventParams, assemble_spectrum, resolvent_apply  # noqa: E402
from .ergodic import run_ergodic  # noqa: E402
from .oracle import oracle_suite  # noqa: E402

__all__ = [
    "__version__",
    "WeightFamily",
    "builtin",
    "family_from_spec",
    "SequenceVector",
    "TriangularKernel",
    "cesaro_apply",
    "cesaro_inverse_apply",
    "seminorm",
    "Status",
    "Verdict",
    "ResolventParams",
    "assemble_spectrum",
    "resolvent_apply",
    "run_ergodic",
    "oracle_suite",
]
