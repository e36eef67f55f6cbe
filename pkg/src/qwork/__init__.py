"""Quantum work statistics for driven finite-dimensional systems.

Exact two-point-measurement work distributions, the one-shot work POVM with
its Kraus operators, an M-qubit phase-estimation sampling circuit with an
independent analytic cross-check, and Jarzynski free-energy estimation from
sampled work values.

Submodules are imported lazily so the console entry point can pin numerical
threading before numpy loads.
"""

__version__ = "0.1.0"

_EXPORTS = {
    "spectral": [
        "HermitianOperator",
        "UnitaryMatrix",
        "DensityMatrix",
        "SpectralDecomposition",
        "eigendecompose",
        "propagator",
        "thermal_state",
        "log_partition_function",
        "random_hamiltonian",
        "spectral_bound_check",
    ],
    "work_povm": [
        "QuenchProtocol",
        "WorkDistribution",
        "KrausSet",
        "exact_work_distribution",
        "kraus_operators",
        "post_measurement_state",
        "jarzynski_exact",
    ],
    "phase_estimation": [
        "SamplerConfig",
        "CoarseGrainedDistribution",
        "JointState",
        "WorkSampleSet",
        "x_to_work",
        "work_values",
        "filter_weight",
        "convolve_distribution",
        "rectangular_coarse_grain",
        "simulate_circuit",
        "qft",
        "sample",
        "sup_norm_distance",
    ],
    "estimators": [
        "FreeEnergyEstimate",
        "ConvergencePoint",
        "estimate_free_energy",
        "exact_exponential_average",
        "free_energy_from_distribution",
        "work_moments",
        "convergence_curve",
    ],
    "scenarios": [
        "ScenarioSpec",
        "build_gue_quench",
        "build_two_level_sg",
        "load_custom",
        "build_protocol",
    ],
}

_ORIGIN = {name: module for module, names in _EXPORTS.items() for name in names}

__all__ = sorted(_ORIGIN)


def __getattr__(name):
    module_name = _ORIGIN.get(name)
    if module_name is None:
        raise AttributeError(f"module {__name__!r} has no attribute {name!r}")
    from importlib import import_module

    module = import_module(f".{module_name}", __name__)
    value = getattr(module, name)
    globals()[name] = value
    return value
