from .quartic import (
    Quartic,
    RootSet,
    companion_roots,
    conjugate_pairs,
    discriminant,
    eval_poly,
    normalized_discriminant,
    solve_quartic,
)
from .tracking import (
    Permutation4,
    RootTrack,
    classify_permutation,
    is_conjugate_pair_exchange,
    loop_permutation,
    match_roots,
    track_roots,
)
