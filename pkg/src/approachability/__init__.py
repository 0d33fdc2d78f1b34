"""Solvers and simulators for weak approachability in repeated games.

The package is organised around the averaging differential game whose value
classifies target sets as weakly approachable or weakly excludable:

- :mod:`approachability.games` -- bilinear vector-payoff games and target sets.
- :mod:`approachability.lp` -- LP core: matrix-game values with duality certificates.
- :mod:`approachability.hjb` -- semi-Lagrangian backward solver for the value grid.
- :mod:`approachability.synthesis` -- delayed piecewise-constant strategies and
  their discretisation into repeated-game strategies.
- :mod:`approachability.simulate` -- deterministic n-stage simulator and adversaries.
- :mod:`approachability.transport` -- exact discrete optimal transport and
  normalised dual potentials.
- :mod:`approachability.monitoring` -- partial-monitoring reduction to a
  polytope of compatible distributions.
- :mod:`approachability.lifted` -- the lifted game on probability measures:
  Hamiltonian, inequality checks, greedy strategy, simulator.
"""

__version__ = "0.1.0"
