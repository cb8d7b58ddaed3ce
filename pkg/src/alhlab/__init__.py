"""alhlab: exact-symbolic and numerical toolkit for the asymptotic geometry
of ALH* gravitational instantons -- model metrics and curvature, degenerate
elliptic operators with mode reduction and indicial analysis, the leading
asymptotics of the Hodge-de Rham system, and the hyperkaehler-triple
deformation algebra.
"""

__version__ = "0.1.0"
