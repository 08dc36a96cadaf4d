"""Point sets with unit minimum distance and small squared distance-gap sums.

The package builds a three-part planar construction (a Poisson-sampled
rectangle strip, Poisson-sampled polar lobes, and an explicit ring of circle
points), computes its exact sorted all-pairs distance spectrum, and verifies
the probabilistic machinery behind the gap-sum analysis: dyadic witness
bounds for empty distance ranges, Janson-type bracketing of zero-bond
probabilities for Poisson processes, and the scaling orders of expected
bond counts.
"""

__version__ = "0.1.0"
