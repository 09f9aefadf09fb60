"""stripspec: a numerical spectral laboratory for mixed Dirichlet-Neumann
Laplacians on ruled strips.

Builds the weighted quadratic forms of bent/twisted strips from curvature
and twist profiles, computes low-lying spectra of the resulting sparse
pairs, and checks the numerically decidable consequences of the
theory: discrete-spectrum certificates, Hardy positivity, thin-strip and
scaled-strip eigenvalue asymptotics, and norm-resolvent decay.
"""

__version__ = "0.1.0"
