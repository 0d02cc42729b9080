"""Mean-square displacement of a charged quantum Brownian particle in a magnetic field.

Three independent routes compute the same quantity: the residue-sum closed
form (:mod:`qbm.closedform`), direct quadrature of the fluctuation-dissipation
integral (:mod:`qbm.quadrature`) and, in the classical limit, an ensemble
simulation (:mod:`qbm.simulate`). :mod:`qbm.limits` holds the high- and
low-temperature asymptotes and :mod:`qbm.analysis` classifies curves as
monotonic or damped-oscillatory.
"""
__version__ = "0.1.0"

from qbm.model import Ohmic, ReducedParams, SingleRelaxation  # noqa: E402
