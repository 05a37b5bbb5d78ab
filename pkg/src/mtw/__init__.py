"""mtw: a desk-scale many-sorted model theory workbench.

Subpackages cover formula syntax, finite and symbolic structures, satisfaction
and bounded entailment, the Ehrenfeucht-Fraisse game family, a
consistency-property tableau prover, and interpolation machinery, plus a CLI
and a small HTTP service for playing the games interactively.
"""

__version__ = "0.1.0"
