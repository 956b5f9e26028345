"""Desk-scale laboratory for limsup sets on the unit interval.

The package is organised around one experimental loop: pick a family of
resonant points (rational numbers, horoball bases), shrink a ball around
each one at a prescribed rate, and study the set of points that land in
infinitely many of the balls.  Everything else -- symbolic convergence
tests, interval unions, density ratios, Diophantine counting, geodesic
excursions -- exists to make the quantitative side of that loop checkable
on a laptop.

Modules
-------
functions   symbolic power/log/loglog forms, series verdicts, critical exponents
intervals   finite unions of subintervals of [0,1], exact or float endpoints
systems     resonant systems, stage sets, stage measure scans
ubiquity    local density ratios of stage sets against a comparison measure
counting    Diophantine counting and its mean-value prediction
geodesics   continued fractions, the modular surface, cusp excursions
horoballs   Ford configuration: enumeration, counting bands, tangency checks
cli         command-line front end producing CSV/JSONL result files
"""

from limsuplab.errors import (
    CompositionError,
    DomainError,
    PrecisionExhausted,
    ResourceCapError,
    UsageError,
)

__version__ = "0.1.0"

__all__ = [
    "CompositionError",
    "DomainError",
    "PrecisionExhausted",
    "ResourceCapError",
    "UsageError",
    "__version__",
]
