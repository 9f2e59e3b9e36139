"""Exact dynamics over the rational function field Q(t)."""

from qtdyn.qt_arith import (
    FFElem,
    Place,
    Poly,
    ResidueValue,
    format_ffelem,
    parse_ffelem,
    product_formula_check,
    residue,
    valuation,
)

__all__ = [
    "FFElem",
    "Place",
    "Poly",
    "ResidueValue",
    "format_ffelem",
    "parse_ffelem",
    "product_formula_check",
    "residue",
    "valuation",
]
