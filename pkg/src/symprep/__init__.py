"""
Deterministic preparation of symmetric N-qubit states: staircase encoding,
selective collective flops through a dispersive bus, a Fock-state route, and
SLOCC classification by Majorana roots.
"""
from .states import (
    DickeLabel,
    StateVector,
    SymmetricCoefficients,
    assemble_symmetric,
    dicke_state,
    fidelity,
    recursion_amplitudes,
)
from .encoder import EncodingCircuit, RotationPair, build_circuit, encode, staircase_decompose
from .dynamics import AddressingSpec, DerivedParams, DriveConfig, derive_params, propagate, solve_delta2
from .compiler import Schedule, StepPlan, execute, make_schedule, physical_units
from .fock_route import ChirpProfile, PulseSequence, adiabatic_map, fock_route_prepare, law_eberly_synthesize
from .classifier import DegeneracyConfig, classify, coefficients_from_roots, majorana_roots

__version__ = "0.1.0"
