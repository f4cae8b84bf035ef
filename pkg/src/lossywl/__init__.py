"""Message passing complexity: the lossy WL test, its estimators and bounds."""

import warnings

# numba probes for TBB on import of parallel kernels; the fallback layers are fine
warnings.filterwarnings("ignore", message="The TBB threading layer requires TBB version")

from .analysis import (  # noqa: E402
    Bound,
    BoundSet,
    Direction,
    Joint,
    MessageSet,
    Propagate,
    Provenance,
    Retain,
    RingTransfer,
    bound_retain,
    bound_ring,
    bound_transfer,
    check_refinement,
    check_triangle,
    estimate_mpc,
    exact_mpc,
    exact_probability,
    mpc_lower_from_necessary,
    mpc_upper_from_sufficient,
    rw_lower_bound,
    sufficient_set_ring,
)
from .cycles import cycle_counts, cycles_through, enumerate_cycles  # noqa: E402
from .errors import *  # noqa: E402,F401,F403
from .exact import count_visible_channels, exact_success_prob  # noqa: E402
from .generators import gen_erdos_renyi, gen_planted_ring, gen_random_regular  # noqa: E402
from .graph import (  # noqa: E402
    INF,
    Cycle,
    Dataset,
    Graph,
    InfluenceModel,
    influence_matrix,
    shortest_path,
    walk_probability,
)
from .io import load_dataset, load_graph, save_graph  # noqa: E402
from .sim import (  # noqa: E402
    Conjunction,
    McEstimate,
    ReachTrace,
    TargetReached,
    mc_success_prob,
    propagate,
    simulate_reach,
)
from .transforms import Arch, MPGraph, Role, Variant, add_readout, mp_influence, transform  # noqa: E402
from .wl import WlColoring, graph_hash, uniqueness_fraction, wl_graph_hash, wl_refine, wlc  # noqa: E402

__version__ = "0.1.0"
