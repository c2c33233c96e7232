"""Exception hierarchy shared across the kit.

Every error raised on a user-facing path derives from CycleError so the
CLI and HTTP layers can map them to exit codes / status codes in one place.
"""


class CycleError(Exception):
    """Base class for all cyclesim errors."""


# --- fluids ---------------------------------------------------------------

class FluidError(CycleError):
    pass


class EmptyMixture(FluidError):
    pass


class LiquidInGasMixture(FluidError):
    pass


class GasInLiquidMixture(FluidError):
    pass


class InvalidGamma(FluidError):
    pass


class InvalidMach(FluidError):
    pass


class NoSolution(FluidError):
    """Area-ratio inversion requested for AR < 1."""


class UnknownSpecies(FluidError):
    pass


class UnknownPropellantPair(FluidError):
    pass


# --- components / model --------------------------------------------------

class ModelError(CycleError):
    pass


class UnknownComponentFamily(ModelError):
    pass


class UnknownPort(ModelError):
    pass


class KindMismatch(ModelError):
    pass


class AlreadyConnected(ModelError):
    pass


class InvalidParameter(ModelError):
    pass


class GasInPump(ModelError):
    pass


class LiquidInTurbine(ModelError):
    pass


class NotWellPosed(ModelError):
    pass


# --- solver / workflow ----------------------------------------------------

class SolverError(CycleError):
    pass


class NonFiniteResidual(SolverError):
    def __init__(self, residual_name, message=None):
        self.residual_name = residual_name
        super().__init__(message or f"residual {residual_name!r} is not finite")


class SolveFailed(SolverError):
    """A solve finished without convergence (status carried on the result)."""

    def __init__(self, result, message=None):
        self.result = result
        super().__init__(message or f"solve failed with status {result.status}")


class NonPhysicalSizing(CycleError):
    """A design run produced a non-positive sized geometry parameter."""


class PressureRise(CycleError):
    """Turbine outlet total pressure >= inlet at a converged solution."""


class ReversePressureGradient(CycleError):
    """Injector inlet total pressure <= outlet at a converged solution."""


class NegativeFuelFlow(CycleError):
    pass


class ReverseFlow(CycleError):
    pass


class OverrideNotBoundary(CycleError):
    """Off-design override addressed a non-boundary (frozen) parameter."""


# --- io --------------------------------------------------------------------

class ParseError(CycleError):
    """Model file rejected; carries every diagnostic, not just the first."""

    def __init__(self, diagnostics):
        if isinstance(diagnostics, str):
            diagnostics = [diagnostics]
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics))


# --- warnings (reported, never fatal) ---------------------------------------

class FlowSeparationWarning(UserWarning):
    """Nozzle exit pressure below the Summerfield limit (p_e < 0.4 p_amb)."""
