"""
.. include:: ../../README.md
"""

import logging

# Set up logging
fmt = "%(asctime)s [%(levelname)s] %(message)s"
logging.basicConfig(level=logging.INFO, format=fmt)
logging.getLogger("numexpr").disabled = True
logging.getLogger("numexpr").propagate = False

from .analytic import (  # noqa
    joint_best_tail,
    sop,
    survivor_g,
    top,
    top_opportunistic,
    top_random,
)
from .capability import Constraints, capability, max_tolerable, required_eps_t  # noqa
from .channel import NetworkConfig, Scheme, rate_to_threshold  # noqa
from .montecarlo import SimJob, estimate  # noqa
from .specialfn import QuadratureConfig, QuadratureError  # noqa
from .sweep import Sweep, SweepSpec, package_version  # noqa

# Fetches the version of the package as defined in pyproject.toml
__version__ = package_version()
