"""Exact constructions of para-unitary matrices over roots of unity and the
complementary sequence families they generate."""

__version__ = "0.1.0"
