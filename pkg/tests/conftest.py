import numpy as np
import pytest

from thzchan.config import config_from_dict


def make_config(**overrides):
    """Small valid scenario; overrides merge section dictionaries."""
    data = {
        "seed": 5,
        "realizations": 2,
        "pattern": "isotropic",
        "band": {"f_start_hz": 300e9, "f_stop_hz": 301e9, "n_sub": 10},
        "link": {"distance_m": 3.0, "k_factor": 0.0},
        "arrays": {
            "tx": {"m_v": 4, "m_h": 4, "delta_v_m": 4.6122e-4, "delta_h_m": 4.6122e-4},
            "rx": {"m_v": 2, "m_h": 2, "delta_v_m": 4.6122e-4, "delta_h_m": 4.6122e-4},
        },
        "motion": {"rx": {"speed_mps": 0.6, "alpha_a_rad": np.pi / 3}},
        "snapshots": {"count": 3, "delta_t_s": 0.001},
        "clusters": {"initial_count": 4, "ray_count": 10, "d_bar_n_m": 1.5},
        "stats": {"estimators": [], "anchors_hz": []},
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(data.get(key), dict):
            for section, inner in value.items():
                if isinstance(inner, dict) and isinstance(data[key].get(section), dict):
                    data[key][section].update(inner)
                else:
                    data[key][section] = inner
        else:
            data[key] = value
    return config_from_dict(data)


@pytest.fixture
def small_config():
    return make_config()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
