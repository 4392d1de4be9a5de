"""riglab: simulate sparse random intersection graphs and verify them
against closed-form degree and clustering laws.

Two graph kinds share one bipartite structure of n random attribute
sets over m attributes: the actor graph links sets overlapping in at
least s attributes; the attribute graph links attribute pairs covered
by at least s sets.  ``theory`` holds the limit laws, ``oracle`` the
exact finite-size ground truth, ``sampler``/``stats`` the simulation
side, and ``cli`` the scenario runner that compares them.
"""

from .model import (
    BinomialSizes,
    Degenerate,
    DerivedParams,
    DiscretePmf,
    ModelParams,
    Moments,
    SizeDistribution,
    Table,
    TruncatedPowerLaw,
    binomial,
    conditional_ge2,
    derive_params,
    falling_factorial,
    log_binomial,
    make_size_dist,
    moments,
    size_biased,
)
from .sampler import (
    Graph,
    Incidence,
    ResourceLimitError,
    RngStream,
    build_active,
    build_passive,
    sample_incidence,
    sample_subset,
    write_edge_list,
)

__version__ = "0.1.0"
