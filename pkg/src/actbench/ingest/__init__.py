from .aras import ARAS_ACTIVITIES, load_aras
from .casas import CASAS_SENSORS, load_casas
from .split import split_by_days
from .synthetic import (
    SynthConfig,
    generate_synthetic,
    generator_fhmm_params,
    generator_hmm_params,
    load_synth_config,
    random_synth_config,
)

__all__ = [
    "ARAS_ACTIVITIES",
    "CASAS_SENSORS",
    "SynthConfig",
    "generate_synthetic",
    "generator_fhmm_params",
    "generator_hmm_params",
    "load_aras",
    "load_casas",
    "load_synth_config",
    "random_synth_config",
    "split_by_days",
]
