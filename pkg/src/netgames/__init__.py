"""Network games on directed weighted graphs.

Game construction over random network families, approximate potential
functions with certified mismatch levels, gated learning dynamics reaching
approximate equilibria, welfare suboptimality bounds, and a reproducible
experiment harness.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .game import (LQGame, SmoothGame, best_response, load_game, local_aggregate,
                   make_lq_game, ne_gap, relative_ne_gap, save_game,
                   social_welfare, uniform_profile, utility)
from .network import (Network, NetworkMetrics, asymmetry_inf_norm,
                      gen_complete_errors, gen_erdos_renyi, gen_influential,
                      gen_random_signs, gen_small_world, gen_star_erased,
                      inf_norm, load_network, make_network, network_metrics,
                      save_network, spectral_norm)

__version__ = "0.1.0"
