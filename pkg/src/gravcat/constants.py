"""Numerical tolerances shared by the whole package.

Every threshold used for validation or testing lives here so there is a
single place to tune them.
"""

# entrywise checks on freshly constructed operators (hermiticity, trace)
CONSTRUCTION_TOL = 1e-12
# algebraic identities: unitarity, orthonormality, reconstruction, commutators
ALGEBRAIC_TOL = 1e-10
# quantities derived through several numerical steps
DERIVED_TOL = 1e-9

# Jacobi eigensolver
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 100

# populations of a density matrix below this are rejected, above it clamped
POPULATION_FLOOR = -1e-10
# imaginary part allowed on a trace that must be real
IMAG_TOL = 1e-10

# largest exponent evaluated directly by the raw partition function
MAX_EXPONENT = 700.0

# orthonormalization of random Gaussian draws
DEGENERATE_NORM = 1e-12

# CODATA gravitational constant, m^3 kg^-1 s^-2
G_CODATA = 6.674e-11
