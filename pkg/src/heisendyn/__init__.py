"""Expansiveness and homoclinic structure of principal actions of the discrete Heisenberg group."""

from .core import (
    Box,
    Configuration,
    GroupElement,
    ParseError,
    RingElement,
    act_rho,
    format_poly,
    group_inv,
    group_mul,
    involution,
    l1_norm,
    parse_poly,
    ring_mul,
)

__version__ = "0.1.0"
