"""kpzlab: a desk-scale simulation and verification lab for the discrete
line-ensemble machinery behind the ASEP, the stochastic six-vertex model and
Hall-Littlewood measures on plane partitions.

Submodules
----------
paths            lattice up-right paths and uniform bridge measures
gibbs            Hall-Littlewood resampling weights and the rejection kernel
hall_littlewood  partitions, skew branching coefficients, plane partitions
six_vertex       exact sampler of the stochastic six-vertex model
asep             event-driven asymmetric simple exclusion process
coupling         dyadic strong coupling of walk bridges with Brownian bridges
analysis         KPZ scaling maps, Tracy-Widom reference, diagnostics
harness          run configs, manifests, parallel replica execution
cli              batch command-line interface
"""

__version__ = "0.1.0"

from . import paths, gibbs, hall_littlewood, six_vertex, asep, coupling, analysis  # noqa: F401
