"""Numerical laboratory for no-pair relativistic atomic structure.

Hartree atomic units throughout unless a module states otherwise; the
hydrogenic module works in the scaled convention c = 1 where energies
are measured in units of c^2.
"""

__version__ = "0.1.0"
