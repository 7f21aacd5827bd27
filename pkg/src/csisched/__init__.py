"""Intermittent CSI estimation for massive MIMO: aged-CSI rate models,
pilot-budget optimization, realizable schedules and Monte Carlo validation."""

__version__ = "0.1.0"

from .ratemodel import (
    MF,
    ZF,
    RateTable,
    RateTableBank,
    SystemConfig,
    UserLink,
    build_rate_table,
    build_rate_tables,
    g_extended,
    g_smoothed,
    g_smoothed_prime,
    rate,
    s_of_p,
    s_smoothed,
    s_smoothed_prime,
    sinr,
    total_snr,
)
from .optimizer import (
    FrequencyAllocation,
    OptimizerSettings,
    optimize_frequencies,
    optimize_pilot_length,
    project_capped_simplex,
)
from .scheduler import (
    IntervalDistribution,
    Schedule,
    ScheduleStats,
    build_schedule,
    exact_average_rate,
    interval_distribution,
    read_schedule,
    schedule_stats,
    write_schedule,
)
from .simulator import (
    MonteCarloReport,
    autocorrelation_check,
    complex_gaussian,
    evolve_channel,
    mf_precoder,
    validate_closed_form,
    zf_precoder,
)
