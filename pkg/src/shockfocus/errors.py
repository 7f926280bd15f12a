"""Exception types shared across the solver."""


class ShockfocusError(Exception):
    """Base class for all solver errors."""


class FluidStateInvalid(ShockfocusError):
    """Fluid strain trace left the EOS domain (1 + tr(eps) too small)."""


class DegenerateImpedance(ShockfocusError):
    """A Riemann wave family has zero impedance on both sides but a
    nonzero flux jump to carry: the material configuration is broken."""


class CflViolation(ShockfocusError):
    """Local Courant number exceeded 1 during a sweep."""


class NoPropagation(ShockfocusError):
    """Every cell has zero characteristic speed; no stable dt exists."""


class VacuumState(ShockfocusError):
    """Density fell below the floor in the 1D Euler comparison solver."""


class BadGeometry(ShockfocusError):
    """Scenario geometry parameters are inconsistent."""


class GaugeOutsideDomain(ShockfocusError):
    """A gauge location lies outside the computational domain."""


class TimeBracketMissing(ShockfocusError):
    """Coarse data does not bracket the requested ghost-fill time."""


class ParseError(ShockfocusError):
    """A text input (voxel mask, field dump, checkpoint) failed to parse."""


class DimensionMismatch(ShockfocusError):
    """Array or grid dimensions disagree with the declared header."""


class ConfigError(ShockfocusError):
    """Run configuration failed validation; message carries path.field info."""
