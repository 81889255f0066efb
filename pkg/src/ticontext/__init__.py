"""Variational optima and certified bounds for contextuality in
translation-invariant spin chains.

The package optimizes the ground-state energy density of infinite
translation-invariant chains whose local interaction is built from a
Bell-type functional's couplings, and certifies lower bounds on the
achievable density with exact linear programs over no-signaling boxes
and moment-matrix semidefinite relaxations. A variational value that
certifiably beats the classical bound witnesses contextuality.
"""

from .classical import brute_force_periodic, classical_bound
from .functionals import (
    BellFunctional,
    CorrelatorVector,
    catalog,
    catalog_entry,
    evaluate,
    load_functional,
    local_term,
    reference_values,
    resolve,
    save_functional,
)
from .observables import (
    Signature,
    build_observable,
    check_observable,
    enumerate_signatures,
    n_parameters,
)
from .optimizer import (
    DescentResult,
    POVMPair,
    Schedule,
    Trace,
    TraceStep,
    descend,
    descend_multistart,
    energy_of_params,
    gradient,
    max_imaginary_part,
    povm_descend,
    povm_observables,
    povm_project,
    scan_surface,
)
from .relax_lp import (
    NSBoxLP,
    NSSolution,
    build_ltins,
    fitted_sequence_check,
    solve_exact,
    solve_float,
)
from .relax_sdp import (
    MomentSDP,
    MonomialIndex,
    SDPResult,
    build_ltinpa,
    solve_sdp,
)
from .umps import (
    UMPS,
    NonInjectiveError,
    energy_density,
    fixed_points,
    ground_state,
    load_checkpoint,
    reduced_density,
    save_checkpoint,
)

__version__ = "0.1.0"

__all__ = [
    "BellFunctional",
    "CorrelatorVector",
    "DescentResult",
    "MomentSDP",
    "MonomialIndex",
    "NSBoxLP",
    "NSSolution",
    "NonInjectiveError",
    "POVMPair",
    "SDPResult",
    "Schedule",
    "Signature",
    "Trace",
    "TraceStep",
    "UMPS",
    "brute_force_periodic",
    "build_ltinpa",
    "build_ltins",
    "build_observable",
    "catalog",
    "catalog_entry",
    "check_observable",
    "classical_bound",
    "descend",
    "descend_multistart",
    "energy_density",
    "energy_of_params",
    "enumerate_signatures",
    "evaluate",
    "fitted_sequence_check",
    "fixed_points",
    "gradient",
    "ground_state",
    "load_checkpoint",
    "load_functional",
    "local_term",
    "max_imaginary_part",
    "n_parameters",
    "povm_descend",
    "povm_observables",
    "povm_project",
    "reduced_density",
    "reference_values",
    "resolve",
    "save_checkpoint",
    "save_functional",
    "scan_surface",
    "solve_exact",
    "solve_float",
    "solve_sdp",
    "__version__",
]
