"""
clique-reduction - instrumented GF(2) matrix reduction on clique filtrations
"""

__version__ = "0.1.0"
