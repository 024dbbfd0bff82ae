"""Ground-state energies split into condensed and normal parts.

Subpackages and modules
-----------------------
basis
    Configuration encoding, sector enumeration, the cond/norm split.
models
    Hamiltonian families as matrix-element oracles.
exact
    Exact diagonalization on the full space and on restrictions.
quadratic
    Free-fermion and transverse-field Ising closed forms.
qmc
    Continuous-time projector Monte Carlo.
analysis
    Sweeps over g, critical-point location, coupling bounds.
cli
    Command-line front end.
"""

__version__ = "0.1.0"
