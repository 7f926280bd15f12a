"""Finite-volume simulation of focused shock waves in fluid/solid media."""

__version__ = "0.1.0"

from .amr import AmrHierarchy, FlagRule
from .config import RunConfig, load_config, parse_config
from .diagnostics import (AnalyticPulse, GaugeRecorder, GaugeSpec,
                          MaxStressMaps, PressureBall,
                          principal_stress_metrics)
from .errors import ShockfocusError
from .runner import RunResult, build_hierarchy, resume_run, run_scenario
from .statecore import (MaterialSample, PatchGrid, blend_material,
                        fluid_material, solid_material)

__all__ = [
    "AmrHierarchy", "AnalyticPulse", "FlagRule", "GaugeRecorder", "GaugeSpec",
    "MaterialSample", "MaxStressMaps", "PatchGrid", "PressureBall",
    "RunConfig", "RunResult", "ShockfocusError", "__version__",
    "blend_material", "build_hierarchy", "fluid_material", "load_config",
    "parse_config", "principal_stress_metrics", "resume_run", "run_scenario",
    "solid_material",
]
