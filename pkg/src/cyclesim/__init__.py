"""cyclesim: steady-state 0D component-network simulation of liquid-propellant
rocket engine cycles.

Workflow: build or load a Model, size it with run_design (efficiencies and
specifications in, geometry out), then explore off-design behavior with
run_offdesign and parameter sweeps.
"""

from .components import Component, PerformanceMetrics, FAMILIES
from .fluids import FluidDb, GasProperties, Mixture, Species, default_db, load_db
from .network import DofReport, Model, NonlinearSystem, SpecEntry, assemble, validate
from .solver import SolveResult, SolverConfig, SweepResult, newton_solve, sweep
from .workflow import SizedModel, SimulationOutcome, run_design, run_offdesign

__version__ = "0.1.0"

__all__ = [
    "Component", "DofReport", "FluidDb", "FAMILIES", "GasProperties",
    "Mixture", "Model", "NonlinearSystem", "PerformanceMetrics",
    "SizedModel", "SimulationOutcome", "SolveResult", "SolverConfig",
    "SpecEntry", "Species", "SweepResult", "assemble", "default_db",
    "load_db", "newton_solve", "run_design", "run_offdesign", "sweep",
    "validate", "__version__",
]
