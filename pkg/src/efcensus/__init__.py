"""efcensus: exact census of distinct Egyptian-fraction subset sums.

The package counts |E_N| = |{sum of 1/n over any subset of {1..N}}| exactly,
certifies which N double the count (the doubling set), and checks the
analytic growth bounds for ln|E_N| numerically.  Heavy counting runs behind a
small HTTP service; the bundled CLI is a thin client that runs the service
in-process by default.
"""

__version__ = "0.1.0"
