"""Sensing-secure OFDM ISAC toolkit.

Shapes the transmit autocorrelation function with structured subcarrier
power allocations so passive eavesdropping radars see periodic artificial
targets, simulates the legitimate (matched/reciprocal filter) and
eavesdropper receiver chains, and solves the constrained signaling design
problem trading communication rate, legitimate-sensing SNR loss, and
sensing-security level.
"""

from .acf import (
    AcfProfile,
    SecurityMetrics,
    empirical_acf,
    expected_sq_acf,
    isl,
    metrics_closed_form,
    metrics_from_allocation,
    monte_carlo_sq_acf,
    psl,
)
from .constellation import Constellation, SymbolBlock, draw_symbols, make_constellation
from .designer import (
    DesignRequest,
    DesignResult,
    psl_budget,
    select_kappa,
    solve_p2,
    tradeoff_sweep,
)
from .detection import CfarConfig, DetectionResult, DetectionScenario, ca_cfar, pd_curve
from .errors import (
    ConfigError,
    DivisibilityError,
    EstimationError,
    FloorError,
    InfeasibleAcfError,
    InfeasibleSecurityError,
    IsiRegionError,
    SecsenseError,
    SolverError,
    StructureError,
    UnknownConstellationError,
)
from .estimation import MusicConfig, RmseReport, rmse_experiment, root_music_ranges
from .harness import ExperimentConfig, run_experiment
from .receivers import (
    RangeDopplerMap,
    RangeProfile,
    SnrReport,
    alice_mf,
    alice_rf,
    eve_mf,
    eve_rf,
    integrate_profiles,
    rd_map,
    snr_loss_closed_form,
)
from .scene import (
    CommChannel,
    OfdmGrid,
    RadarScene,
    Reflector,
    RicianRef,
    comm_rate,
    default_grid,
    eve_reference,
    sensing_snapshot,
    steering,
)
from .util import db, derive_seed, undb
from .waveform import (
    PowerAllocation,
    SecureAcfSpec,
    equal_allocation,
    ideal_acf_to_allocation,
    secure_acf_comb,
    stochastic_allocation,
    structured_allocation,
)

__version__ = "0.1.0"
