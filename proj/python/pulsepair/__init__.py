"""Polarized pulse-pair drift-scan simulator and binomial likelihood analysis."""

from ._pulsepair import (
    Polarization,
    PulsePair,
    ThresholdEvent,
    ValidationError,
    __version__,
    analyze_summary,
    bayes_update,
    binomial_density,
    df_coincidence_analytic,
    df_coincidence_mc,
    harmonic_excise,
    mjd_to_lst,
    modal_count,
    near_clock_harmonic,
    normalized_likelihood,
    power_spectrum,
    process_events,
    ra_bin,
    read_events,
    read_pairs,
    selftest,
    simulate_events,
    uniformity_test,
)

__all__ = [
    "Polarization",
    "PulsePair",
    "ThresholdEvent",
    "ValidationError",
    "__version__",
    "analyze_summary",
    "bayes_update",
    "binomial_density",
    "df_coincidence_analytic",
    "df_coincidence_mc",
    "harmonic_excise",
    "mjd_to_lst",
    "modal_count",
    "near_clock_harmonic",
    "normalized_likelihood",
    "power_spectrum",
    "process_events",
    "ra_bin",
    "read_events",
    "read_pairs",
    "selftest",
    "simulate_events",
    "uniformity_test",
]
