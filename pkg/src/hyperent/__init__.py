"""Randomized hypergraph states: exact construction, entanglement measures,
PPT-mixer genuine multipartite negativity and projector-witness thresholds."""

__version__ = "0.1.0"

from .entmeasures import (
    Bipartition,
    all_bipartitions,
    eigenvalues_hermitian,
    is_ppt,
    jacobi_eigh,
    negativity,
    negativity_trace_norm,
    partial_transpose,
)
from .gmn import SdpError, SdpProblem, SdpSolution, check_certificate, gmn, solve_sdp, verify_witness
from .hypercore import (
    CapacityError,
    Hypergraph,
    HypergraphError,
    clover,
    family,
    flower,
    parse_catalog,
    parse_hypergraph,
    spanning_subhypergraphs,
)
from .polynomial import RationalPolynomial
from .randomizer import RandomizationParams, randomize, randomized_density, symbolic_randomize
from .statevec import DensityMatrix, SignState, build_state, check_stabilizers, stabilizer, stabilizer_projector
from .witnesslab import (
    WitnessSpec,
    critical_probability,
    flower_overlap_closed_form,
    overlap_polynomial,
    robustness_threshold,
    witness_alpha,
    witness_expectation,
)
