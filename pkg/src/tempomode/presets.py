"""Versioned scenario presets.

Any change to a preset's ``config`` must bump its ``version``; the test suite
locks a content hash per (name, version).
"""

from __future__ import annotations

import copy
import hashlib
import json
import math

# Calibrated so the first four Schmidt weights of the sinc model are close to
# (0.65, 0.19, 0.067, 0.028); see calibration.calibrate_sinc_model.
LAW_BANDWIDTH_RATIO = 2.1228931714518993
LAW_ASYMMETRY = 0.2602896950383027

_GRID = {"center": 2.4e15, "span": 4e13, "n_points": 128}

PRESETS = {
    "basis-hg5": {
        "version": "1",
        "description": "Five Hermite-Gaussian temporal modes: orthonormality and weighted overlaps",
        "config": {
            "experiment": "basis",
            "seed": 0,
            "grid": dict(_GRID, n_points=256),
            "params": {"bandwidth": 2e12, "count": 5},
        },
    },
    "nonorthogonality-scan": {
        "version": "1",
        "description": "sqrt(omega)-weighted HG0/HG1 overlap at bandwidth/center = 0.2, 0.1, 0.05",
        "config": {
            "experiment": "basis",
            "seed": 0,
            "grid": {"center": 2.4e15, "span": 4.32e15, "n_points": 512},
            "params": {"bandwidth": 4.8e14, "count": 2, "overlap_ratios": [0.2, 0.1, 0.05]},
        },
    },
    "kl-hg01": {
        "version": "1",
        "description": "Karhunen-Loeve recovery of planted HG0/HG1 modes with variances (2, 1)",
        "config": {
            "experiment": "kl",
            "seed": 11,
            "grid": dict(_GRID),
            "params": {"bandwidth": 2e12, "variances": [2.0, 1.0], "realizations": 10000},
        },
    },
    "energy-single-tm": {
        "version": "1",
        "description": "Pulse-energy statistics of a single-temporal-mode ensemble (exponential law)",
        "config": {
            "experiment": "energy-stats",
            "seed": 7,
            "grid": dict(_GRID),
            "params": {"bandwidth": 2e12, "variances": [1.0], "realizations": 100000},
        },
    },
    "energy-five-tm": {
        "version": "1",
        "description": "Pulse-energy statistics of five equal-variance temporal modes (Erlang-5 law)",
        "config": {
            "experiment": "energy-stats",
            "seed": 7,
            "grid": dict(_GRID),
            "params": {"bandwidth": 2e12, "variances": [1.0] * 5, "realizations": 100000},
        },
    },
    "law2000": {
        "version": "1",
        "description": "Sinc phase-matching pair source calibrated to Schmidt weights (0.65, 0.19, 0.067, 0.028)",
        "config": {
            "experiment": "spdc",
            "seed": 0,
            "grid": {"n_points": 160},
            "params": {
                "model": "sinc-calibrated",
                "bandwidth_ratio": LAW_BANDWIDTH_RATIO,
                "asymmetry": LAW_ASYMMETRY,
                "targets": [0.65, 0.19, 0.067, 0.028],
                "target_tol": 0.05,
                "boundary_tol": 1e-3,
                "count": 8,
            },
        },
    },
    "gaussian-schmidt-oracle": {
        "version": "1",
        "description": "Correlated Gaussian JSA on a 256^2 grid against the closed-form geometric spectrum",
        "config": {
            "experiment": "spdc",
            "seed": 0,
            "grid": {"center": 2.355e15, "span": 1.2e14, "n_points": 256},
            "params": {
                "model": "gaussian",
                "pump_bandwidth": 4e12,
                "k1": 1.5e-10,
                "k2": -0.8e-10,
                "length": 2e-3,
                "count": 8,
            },
        },
    },
    "separable-gaussian": {
        "version": "1",
        "description": "Spectrally separable Gaussian pair source (single Schmidt mode)",
        "config": {
            "experiment": "spdc",
            "seed": 0,
            "grid": {"center": 2.355e15, "span": 1.2e14, "n_points": 256},
            "params": {
                "model": "gaussian",
                "pump_bandwidth": 14693177484605.834,
                "k1": 1.5e-10,
                "k2": -0.8e-10,
                "length": 2e-3,
                "count": 4,
                "targets": [1.0],
                "target_tol": 1e-6,
            },
        },
    },
    "twin-beam-r05": {
        "version": "1",
        "description": "Two-mode squeezed vacuum at r = 0.5 (twin beams)",
        "config": {
            "experiment": "spdc",
            "seed": 0,
            "grid": {"n_points": 8},
            "params": {"model": "twin-beam", "r": 0.5, "n_max": 60, "epsilon": 0.1},
        },
    },
    "fc-random": {
        "version": "1",
        "description": "Ten random frequency-conversion models: unitarity and joint Schmidt reconstruction",
        "config": {
            "experiment": "fc",
            "seed": 2024,
            "grid": {"n_points": 128},
            "params": {
                "band1": {"center": 2.0e15, "span": 4e13},
                "band2": {"center": 3.2e15, "span": 4e13},
                "random_configs": 10,
            },
        },
    },
    "qpg-separable": {
        "version": "1",
        "description": "Quantum pulse gate with separable generator at pi/2 coupling, plus correlated sweep",
        "config": {
            "experiment": "qpg",
            "seed": 0,
            "grid": {"n_points": 128},
            "params": {
                "band1": {"center": 2.0e15, "span": 4.6e14},
                "band2": {"center": 3.2e15, "span": 4.6e14},
                "phase_matching": {"k1": 1.0e-10, "k2": 2.0e-10, "length": 1e-3},
                "coupling": math.pi / 2,
                "sweep_factors": [0.5, 0.8, 1.0, 1.25, 2.0],
            },
        },
    },
    "memory-raman": {
        "version": "1",
        "description": "Separable Raman-memory toy: full write, then read-out into a reshaped mode",
        "config": {
            "experiment": "memory",
            "seed": 0,
            "grid": {"n_points": 128},
            "params": {
                "toy": "separable-raman",
                "T": 1e-9,
                "L": 1e-2,
                "write": {"coupling": math.pi / 2, "field_order": 0, "medium_order": 0},
                "read": {"coupling": math.pi / 2, "field_order": 1, "medium_order": 0},
            },
        },
    },
    "fock-swap-32": {
        "version": "1",
        "description": "Full conversion (rho = 1) of |3, 2>",
        "config": {
            "experiment": "fock-bs",
            "seed": 0,
            "grid": {"n_points": 8},
            "params": {"rho": 1.0, "state": [[3, 2, 1.0, 0.0]], "n_max": 5},
        },
    },
    "hom-mixed-0648": {
        "version": "1",
        "description": "Two-photon interference of identical (0.6, 0.4) mixed single photons",
        "config": {
            "experiment": "hom",
            "seed": 0,
            "grid": dict(_GRID),
            "params": {
                "bandwidth": 2e12,
                "modes": 2,
                "state_a": {"probabilities": [0.6, 0.4]},
                "state_b": {"probabilities": [0.6, 0.4]},
                "expected": 0.48,
            },
        },
    },
    "hbt-single-photon": {
        "version": "1",
        "description": "Intensity correlation of a three-mode mixed single photon",
        "config": {
            "experiment": "hbt",
            "seed": 0,
            "grid": dict(_GRID),
            "params": {
                "bandwidth": 2e12,
                "modes": 3,
                "state": {"kind": "single-photon", "probabilities": [0.5, 0.3, 0.2]},
            },
        },
    },
    "bhd-single-photon": {
        "version": "1",
        "description": "Homodyne statistics of a mixed single photon with the LO on HG0",
        "config": {
            "experiment": "bhd",
            "seed": 5,
            "grid": dict(_GRID),
            "params": {
                "bandwidth": 2e12,
                "modes": 2,
                "state": {"kind": "single-photon", "probabilities": [0.7, 0.3]},
                "lo": {"mode_coefficients": [1.0, 0.0], "phase": 0.0},
                "samples": 20000,
                "expected_variance": 1.2,
            },
        },
    },
}


# Used when a run names neither a preset nor a config file.
DEFAULT_PRESETS = {
    "basis": "basis-hg5",
    "kl": "kl-hg01",
    "energy-stats": "energy-single-tm",
    "spdc": "gaussian-schmidt-oracle",
    "fc": "fc-random",
    "qpg": "qpg-separable",
    "memory": "memory-raman",
    "fock-bs": "fock-swap-32",
    "hom": "hom-mixed-0648",
    "hbt": "hbt-single-photon",
    "bhd": "bhd-single-photon",
}


def list_presets() -> list[dict]:
    """Catalog entries ``{name, version, experiment, description}`` sorted by name."""
    return [
        {
            "name": name,
            "version": p["version"],
            "experiment": p["config"]["experiment"],
            "description": p["description"],
        }
        for name, p in sorted(PRESETS.items())
    ]


def get_preset(name: str) -> dict:
    """Deep copy of the preset's config."""
    if name not in PRESETS:
        raise KeyError(name)
    return copy.deepcopy(PRESETS[name]["config"])


def content_hash(name: str) -> str:
    blob = json.dumps(PRESETS[name]["config"], sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()
