"""Wire cutting: fragmentation, Pauli-basis reconstruction and randomized Clifford cuts."""

from __future__ import annotations

from .clifford import canonical_phase, clifford_group, random_clifford_1q
from .fragments import Fragment, FragmentationError, FragmentSet, StitchEdge, fragment
from .pauli import (
    PAULI_TERMS,
    FragmentConfig,
    PauliTermTable,
    enumerate_pauli_configs,
    exact_config_results,
    reconstruct_pauli,
    run_pauli_cut,
    sample_config_results,
)
from .randomized import (
    ChannelChoice,
    Clifford,
    Depolarizing,
    RandomizedCutResult,
    Rotation,
    clip_and_normalize,
    exact_channel_distributions,
    instantiate_fragment,
    instantiate_randomized_sample,
    randomized_cut_samples,
    recombine_channels,
    run_randomized_cut,
    run_randomized_cut_reference,
    sample_channel_choice,
)

__all__ = [
    "PAULI_TERMS",
    "ChannelChoice",
    "Clifford",
    "Depolarizing",
    "Fragment",
    "FragmentConfig",
    "FragmentSet",
    "FragmentationError",
    "PauliTermTable",
    "RandomizedCutResult",
    "Rotation",
    "StitchEdge",
    "canonical_phase",
    "clifford_group",
    "clip_and_normalize",
    "enumerate_pauli_configs",
    "exact_channel_distributions",
    "exact_config_results",
    "fragment",
    "instantiate_fragment",
    "instantiate_randomized_sample",
    "random_clifford_1q",
    "randomized_cut_samples",
    "reconstruct_pauli",
    "recombine_channels",
    "run_pauli_cut",
    "run_randomized_cut",
    "run_randomized_cut_reference",
    "sample_channel_choice",
    "sample_config_results",
]
