"""Verification toolkit for structured PSD quadratic forms and Ricci-curvature
inequalities of Lagrangian submanifolds in Kaehler QCH ambient spaces."""

__version__ = "0.1.0"
