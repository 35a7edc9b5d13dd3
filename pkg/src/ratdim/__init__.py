"""Exact computations with localized rational groups, ordered abelian groups,
Laurent polynomials in e^x, and the KMS bundle group G_Z."""

__version__ = "0.1.0"
