"""Classical simulation of coherent-state image encoding and cosine-similarity measurement."""

from .codec import (
    EXPECTATION,
    EncodingParams,
    Expectation,
    GrayImage,
    MeasurementRecord,
    PhaseImage,
    Sampled,
    angle_to_intensity,
    encode_image,
    expected_pixel_signal,
    global_transform,
    intensity_to_angle,
    interfere_with_auxiliary,
    optimal_amplitude,
    point_transform,
    retrieve_image,
    sample_pixel_signal,
)
from .network import (
    NetworkPlan,
    PlanKind,
    build_balanced_tree,
    build_gamma_chain,
    build_plan,
    chop,
    effective_unitary,
)
from .optics import (
    BeamSplitter,
    CoherentField,
    DomainError,
    ModeUnitary,
    PhaseShifter,
    apply_unitary,
    bs_matrix,
    compose,
    embed_two_mode,
    expected_photon_number,
    overlap,
    propagate,
)
from .similarity import (
    Exhaustive,
    ImageDatabase,
    SimilarityReport,
    Stochastic,
    cosine_similarity,
    cosine_similarity_measured,
    cross_kerr_apply,
    database_single_run,
    mse,
    rank_database,
)

__version__ = "0.1.0"
