"""holoball: Bergman-Besov kernels, weighted operators, and pseudo-ball
geometry on the unit ball of C^N, with Monte Carlo experiments checking
the boundedness/weight-class characterizations at desk scale."""

__version__ = "0.1.0"
