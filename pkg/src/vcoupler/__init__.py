"""Passivity and absolute-stability analysis of series damped elastic actuation
driven through a virtual coupler.

Subpackages:

- poly       exact polynomial arithmetic and Sturm-chain root tools
- stability  Hurwitz tests, imaginary-axis residues, positive realness
- model      physical parameters, derived coefficients, hybrid two-port
- passivity  two-port passivity and absolute-stability criteria
- perf       rendered-impedance performance metrics
- optimize   virtual-coupler parameter optimization
- cli        command-line interface
"""

__version__ = "0.1.0"
