"""Named experiment configs.

``paper-example`` uses the fibre demonstration's key length and photon
number with a 10% efficient eavesdropper; M is not part of that example
and is fixed at 4096 (U and n0 do not depend on it).
"""

import copy

PRESETS = {
    "paper-example": {
        "scenario": "unicity",
        "trials": 100_000,
        "channel": {"M": 4096, "N": 40000, "eta": 0.1},
        "key": {"L": 4400},
    },
    "eta-bob": {
        "scenario": "unicity",
        "trials": 20_000,
        "channel": {"M": 4096, "N": 40000, "eta_factors": [0.1, 0.5, 0.8]},
        "key": {"L": 4400},
    },
    "alpha-300": {
        "scenario": "unicity",
        "trials": 20_000,
        "channel": {"M": 4096, "alpha": 300},
        "key": {"L": 4400},
    },
    "info-gain-sweep": {
        "scenario": "info_gain",
        "trials": 100_000,
        "channel": {"M": 4096, "N": 40000, "eta": 0.1},
        "info_gain": {"sigmas": [4, 8, 16]},
    },
    "bob-ber": {
        "scenario": "ber",
        "trials": 1_000_000,
        "channel": {"M": 4096, "sigma": 256},
        "key": {"L": 16},
    },
    "attack-toy": {
        "scenario": "attack_sweep",
        "trials": 100,
        "channel": {"M": 16, "sigma": 1.5},
        "attack": {"g": [6, 8, 10, 12], "plaintext_known": True, "success_threshold": 0.99},
    },
    "attack-toy-unknown": {
        "scenario": "attack_sweep",
        "trials": 100,
        "channel": {"M": 16, "sigma": 1.5},
        "attack": {"g": [6, 8, 10, 12], "plaintext_known": False, "success_threshold": 0.99},
    },
    "dsr-noiseless": {
        "scenario": "dsr",
        "trials": 100_000,
        "channel": {"M": 16, "N": 1.0, "dsr": True, "dsr_sigma_zero": True},
        "dsr": {"toy_M": 16, "L": 8, "n_symbols": 2, "resolution": 4},
    },
    "dsr-fiber": {
        "scenario": "dsr",
        "trials": 1_000_000,
        "channel": {"M": 4096, "N": 40000, "eta_factors": [0.1, 0.5, 0.8], "dsr": True},
        "key": {"L": 16},
        "dsr": {"toy_M": 16, "toy_sigma": 1.5, "L": 8, "n_symbols": 2, "resolution": 4,
                "repetition": 3, "g": 8, "attack_trials": 50, "budget": 60},
    },
    "additive-baseline": {
        "scenario": "additive_baseline",
        "trials": 1,
        "channel": {"M": 4, "N": 1.0},
        "additive": {"L": 12, "n_bits": 12, "offset": 5},
    },
}


def get_preset(name: str) -> dict:
    try:
        return copy.deepcopy(PRESETS[name])
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; try list-presets") from None
