"""
Cardinality-constrained MIQP package.
"""

__version__ = '0.0.1'
