"""Verification lab for lottery menus vs item pricings in unit-demand mechanism design."""

__version__ = "0.1.0"
