"""Determinant-maximization clustering and peer-prediction mechanisms."""

from ._core import (
    DmicError,
    dmi_cluster,
    dmi_score,
    extract_knowledge,
    fixture,
    fixture_names,
    kdmi_payments,
    preset_names,
    simulate_reports,
    spectral_truth_serum,
    surprisingly_popular_choice,
    surprisingly_popular_multitask,
)

__all__ = [
    "DmicError",
    "dmi_cluster",
    "dmi_score",
    "extract_knowledge",
    "fixture",
    "fixture_names",
    "kdmi_payments",
    "preset_names",
    "simulate_reports",
    "spectral_truth_serum",
    "surprisingly_popular_choice",
    "surprisingly_popular_multitask",
]
