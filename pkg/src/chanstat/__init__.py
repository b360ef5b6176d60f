"""Stationarity analysis of time-variant wireless channels.

Local scattering functions are estimated per time tile with a DPSS
multitaper estimator and compared over time with the collinearity metric.
A geometric rotary-arm synthesizer provides test channels.
"""

from chanstat.data import AnalysisConfig, ChannelTransferFunction, extract_lctf, num_lctf
from chanstat.dpss import TaperSet, dpss_oracle, generate_dpss, make_tf_window
from chanstat.errors import (
    ChanstatError,
    ConfigError,
    DegenerateError,
    FormatError,
    OracleBudgetError,
)
from chanstat.lsf import (
    LsfSequence,
    doppler_delay_transform,
    estimate_lsf,
    lsf_sequence,
    windowed_transfer,
)
from chanstat.stationarity import (
    CollinearityMatrix,
    StationarityResult,
    collinearity,
    collinearity_matrix,
    index_to_angle,
    stationarity,
    stationarity_time,
)
from chanstat.synth import (
    PropagationPath,
    Scenario,
    jakes_wssus_ctf,
    synth_ctf,
    tx_position,
)

__version__ = "0.1.0"

__all__ = [
    "AnalysisConfig",
    "ChannelTransferFunction",
    "ChanstatError",
    "CollinearityMatrix",
    "ConfigError",
    "DegenerateError",
    "FormatError",
    "LsfSequence",
    "OracleBudgetError",
    "PropagationPath",
    "Scenario",
    "StationarityResult",
    "TaperSet",
    "collinearity",
    "collinearity_matrix",
    "doppler_delay_transform",
    "dpss_oracle",
    "estimate_lsf",
    "extract_lctf",
    "generate_dpss",
    "index_to_angle",
    "jakes_wssus_ctf",
    "lsf_sequence",
    "make_tf_window",
    "num_lctf",
    "stationarity",
    "stationarity_time",
    "synth_ctf",
    "tx_position",
    "windowed_transfer",
]
