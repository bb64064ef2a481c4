"""Interface-fluctuation laboratory for the sign-switching corner-flip model.

Subpackages:

- ``core``          height configurations, slope projection, discrete calculus
- ``dynamics``      exact event-driven simulation with martingale ledgers
- ``measures``      stationary and profile samplers, exact small-N measures
- ``combinatorics`` big-integer counts of balanced words by integral class
- ``oracle``        exact expectations and the Dirichlet-form identity
- ``pde``           solver for the coupled drift-switching heat/Burgers system
- ``harness``       experiment drivers, statistics, file formats
- ``cli``           command-line entry point (``ifl <subcommand>``)
"""

from .core import (HeightConfig, CornerFlip, TestFunction, ValidationError,
                   NotFlippableError, apply_flip, pairing_density,
                   pairing_fluctuation, block_average, parse_config,
                   format_config)
from .rng import RngStream
from .dynamics import (RateParams, rates_for_sign, simulate, simulate_events,
                       step, MartingaleLedger, Trajectory, integral_martingale)

__version__ = "0.1.0"
