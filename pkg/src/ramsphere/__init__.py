"""Multicolor Ramsey lower bounds from random sphere graphs.

Library layout (one module per concern):

* ``numerics``    - special functions, root finding, log-space combinatorics
* ``model``       - the threshold equation and its limit constants
* ``bounds``      - closed-form exponents and baseline comparisons
* ``improvement`` - the finite-D analysis and the certified epsilon
* ``graphs``      - sphere-graph sampling, clique search, Monte Carlo
* ``coloring``    - pulled-back edge colorings and their verification
* ``cli``         - the ``ramsphere`` command-line tool
"""

from .bounds import compare_baselines, ctt_log2_bound, delta, find_p_star, sawin_chain_log2
from .cliques import BACKEND as CLIQUE_BACKEND
from .coloring import (
    EdgeColoring,
    certify_kt_free,
    construct_coloring,
    estimate_crt,
    verify_coloring,
)
from .graphs import (
    MCEstimate,
    SphereGraph,
    exact_triangle_probability,
    independence_number,
    max_clique,
    mc_tuple_probability,
    sample_graph,
)
from .improvement import (
    BoundParams,
    analysis_report,
    bound_params,
    f_of_x,
    f_prime_zero_closed,
    f_prime_zero_fd,
    find_gamma_epsilon,
)
from .model import (
    LimitConstants,
    ModelParams,
    a_of_c,
    convergence_study,
    limit_c,
    limit_constants,
    solve_threshold,
)
from .numerics import (
    Log2,
    coord_cdf,
    find_root,
    log2_binomial,
    maximize_scalar,
    normal_quantile,
    stirling2_exact,
    stirling2_log2,
)

__version__ = "0.1.0"
