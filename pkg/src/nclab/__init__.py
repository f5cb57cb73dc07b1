"""Numerical laboratory for Hochschild characters of finitely summable triples.

Modules
-------
opcore      spectral routines on sparse operators
ideals      singular values, weak and Lorentz norms, Dixmier means
doi         double operator integrals
triples     truncated spectral triple models and the doubling trick
hochschild  chains, boundary, Chern character and multilinear functionals
asym        heat traces, zeta residues and the kernel transforms
cli         ``nclab`` command-line runner
"""

__version__ = "0.1.0"
