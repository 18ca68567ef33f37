from .reduction import (
    F_map,
    GenericityReport,
    NormalFormResult,
    genericity_check,
    jacobian_F,
    lemma_exchange_roots,
    normal_form_quartic,
    normalize_quartic,
)
