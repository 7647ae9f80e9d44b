"""Exact-arithmetic normal forms of formal vector fields.

Truncated vector fields with diagonal linear part over an exact
coefficient field (rationals, Gaussian rationals, or a number field with
a designated complex embedding), together with the Lie calculus on them,
normalization to a prescribed order, resonance and small-divisor
analysis, convergence-condition diagnostics, simultaneous normalization
of commuting families, and first-integral detection.
"""

__version__ = "0.1.0"

from .coeff import ComplexBox, Field, Scalar, all_embeddings, embed, scalar_arith
from .brunovf import (
    BrunoField,
    PointTransform,
    bracket,
    compose_transforms,
    delta_apply,
    eigencomponent,
    from_monomials,
    project,
    substitute,
)
from .resonance import (
    LatticeBasis,
    OmegaSequence,
    ResonanceContext,
    SiegelPlissCertificate,
    lattice,
    omega_sequence,
    resonant_exponents,
    siegel_pliss_certificate,
    weight,
)
from .normalize import (
    NormalizationResult,
    block_step,
    homological_solve,
    normalize,
    solve_distinguished,
    term_step,
    verify_conjugation,
)
from .conditions import (
    ASReport,
    Decomposition,
    HullStatus,
    MajorantReport,
    check_AS,
    check_hull,
    check_isoresonance,
    closed_form_homological,
    delta_majorant_norm,
    majorant_norm,
    nilpotency_check,
    step_estimate_check,
)
from .commuting import (
    CommutingFamily,
    al_closed_form,
    check_AL,
    check_commute,
    omega_sharp,
    simultaneous_block_step,
    simultaneous_normalize,
)
from .integrability import (
    IntegralReport,
    integrability_report,
    is_first_integral,
    lie_derivative_monomial,
    series_integral_check,
)
