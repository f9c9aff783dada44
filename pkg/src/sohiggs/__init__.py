"""Exact verification toolkit for SO(n,n+1) Higgs bundle families and
Theta-positivity in SO(n,n-1), SO(n,n) and SO(n,n+1)."""

__version__ = "0.1.0"
