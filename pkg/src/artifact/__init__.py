"""Open subgroups of GL2 over the profinite integers, modular curves and adelic Galois images."""

__version__ = "0.1.0"
