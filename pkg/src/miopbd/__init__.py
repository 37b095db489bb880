"""Multi-indexed discrete orthogonal polynomials and exactly solvable birth and death processes."""

__version__ = "0.1.0"
