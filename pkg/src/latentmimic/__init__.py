"""latentmimic: cross-embodiment imitation by latent goal planning.

A desk-scale pipeline: a tape-based autodiff core, a two-embodiment planar
arm world, a JEPA-style action-conditioned world model, a goal predictor
that translates source demonstrations into target-compatible latent goals,
a CEM planner, and a closed-loop runtime with adaptive goal updating.
"""

__version__ = "0.1.0"
