"""Shared exception types."""


class DiracBCError(Exception):
    """Base class for library errors."""


class NearSpectrum(DiracBCError):
    """The mass parameter sits too close to the chiral spectrum of a mode."""


class NearDirichletSpectrum(DiracBCError):
    """m^2 sits too close to the Dirichlet spectrum of a mode."""


class ConformalGaugeAmbiguity(DiracBCError):
    """At m = 0 only the conformal class (and tangential log-scale derivatives)
    of the boundary metric are determined; the overall scale must be prescribed."""


class Unsupported(DiracBCError):
    """The requested recovery branch is outside the determined regime."""
