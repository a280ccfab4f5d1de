"""p-adic invariants of imaginary quadratic fields and their Z_3 layers."""

__version__ = "0.1.0"
