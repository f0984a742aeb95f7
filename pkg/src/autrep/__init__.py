"""autrep: free-group automorphism dynamics on SL2 representation tuples."""

__version__ = "0.1.0"
