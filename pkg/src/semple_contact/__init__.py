"""Exact intersection-theoretic contact calculus on the Semple tower F(n).

Modules:

* ``tower_ring``: Chow ring of F(n), degree map, dual bases, pairing matrix.
* ``contact_calculus``: contact modules, proto-contact numbers, formulas.
* ``branch_lift``: lifting parametrized branches, cusp numbers kappa_j.
* ``jet_operators``: the derivations P and Q, operator identities and
  the ranks of the universal-family matrices.
* ``cli``: the ``semple-contact`` command.
"""
from .errors import InputError, InvariantError, PrecisionError
from .series import Series
from .tower_ring import (
    ChowClass,
    TowerPresentation,
    build_tower,
    dual_basis,
    integrate,
    pairing_matrix,
    solve_z2,
    theorem1_check,
)
from .contact_calculus import (
    CurveCharacteristics,
    FamilyCharacteristics,
    curve_module,
    emit_formula,
    evaluate,
    lift_class,
    multiply_modules,
    nonsingular_module,
    proto_contact,
)
from .branch_lift import (
    BranchSeries,
    analyze_branch,
    curve_characteristics,
    desingularization_level,
    lift_step,
)
from .jet_operators import (
    ChartPoint,
    ChartSpec,
    JetPolynomial,
    apply_P,
    apply_Q,
    defining_sequence,
    exact_rank,
    fiber_system,
    lemma_b_check,
    universal_matrix,
    weight_of,
)

__version__ = "0.1.0"
