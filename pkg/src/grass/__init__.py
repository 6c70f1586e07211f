"""A parametric kernel for graded-substructural typing.

Declare a preordered system of modes (grade algebras, contraction ideals,
weakening flags), then check typing derivations, run beta/eta rewriting
with preservation guarantees, and compare derivations against a finite
sets-and-relations denotational backend by exhaustive enumeration.
"""

from .derivation import Derivation, check_derivation, elaborate
from .errors import (
    CheckError,
    ConfigError,
    ElaborationError,
    GrassError,
    InputError,
    ModeOrderError,
    ParseError,
    ShapeError,
)
from .grades import (
    Grade,
    GradeAlgebra,
    Ideal,
    Mode,
    ModeMorphism,
    algebra_axioms_check,
    builtin_algebra,
    ideal_check,
    ideal_closure,
    mode_morphism_check,
)
from .modespace import (
    ModeSpace,
    independence_check,
    modespace_validate,
    scalar_mul,
    scale_vector,
    vector_leq,
)
from .rewrite import (
    SubstitutionBundle,
    beta_step,
    eta_expand,
    normalize,
    preservation_check,
    subst_simultaneous,
)
from .semantics import (
    FinSetObj,
    ModelBackend,
    Rel,
    interp_ctx,
    interp_derivation,
    interp_type,
    model_coherence_validate,
    scalar_act,
    semantic_eq,
    subst_comp_check,
)
from .syntax import Judgment, Term, Type, alpha_eq, free_vars, type_wf

__all__ = [name for name in dir() if not name.startswith("_")]
