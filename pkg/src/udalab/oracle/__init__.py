"""Exact finite-domain oracle.

Everything the adversarial trainer estimates from samples is computed in
closed form here on finite representation spaces, together with brute-force
critic enumeration and executable checks of the generalization bounds and
their tightness characterizations.
"""

from .instance import (
    CriticFamily,
    DiscreteInstance,
    default_family,
    merge_columns,
    normalize_weights,
    random_instance,
    ratio_weights,
    shared_conditional_instance,
    validate_weights,
)
from .exact import (
    d_fc_exact,
    inv_exact,
    inv_weighted_exact,
    labelling_function,
    risk_exact,
    tsf_exact,
    tsf_hat_exact,
    tsf_weighted_exact,
)
from .bruteforce import (
    d_fc_bruteforce,
    inv_bruteforce,
    tsf_bruteforce,
    tsf_hat_bruteforce,
)
from .checks import (
    adversarial_objective,
    check_dann_cdan_equality,
    check_inductive_weights,
    check_minent_bound,
    check_tightness,
    check_tightness_weighted,
    dann_cdan_values,
    verify_bound2,
    verify_bound3,
    verify_bound4,
)

__all__ = [name for name in dir() if not name.startswith("_")]
