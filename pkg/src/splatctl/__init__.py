"""Codec-statistics-driven density control for Gaussian-splatting optimization.

Pipeline: parse per-frame encoder logs (codec_log), convert them to frame
confidence scores (confidence), modulate densify/prune thresholds and
apply them to an anchored Gaussian population (density_control), derive
Bernoulli supervision masks from match reliability (quality_mask), and
validate everything in a 2D splatting optimizer (splat_sim). The cli
module exposes each stage as a subcommand.
"""

from . import codec_log, confidence, config, density_control, errors, quality_mask, splat_sim
from .codec_log import (
    FrameLogSeries,
    FrameRecord,
    FrameType,
    LogSource,
    ValidationReport,
    parse_generic_json,
    parse_x265_csv,
    serialize_generic_json,
    validate,
)
from .confidence import (
    ConfidenceSeries,
    EmaInit,
    ScoringConfig,
    ScoringVariant,
    bit_confidence,
    combine,
    ema_smooth,
    qp_confidence,
    score_sequence,
    score_sequence_streaming,
    sigmoid_score,
)
from .density_control import (
    Anchor,
    AnchorPopulation,
    Decision,
    DensityPolicyConfig,
    DensityUpdate,
    GaussianPrimitive,
    Modulation,
    PruneReason,
    ScaleSource,
    adaptive_thresholds,
    anchor_scale_norm,
    apply_policy,
    base_decision,
    linear_variant_thresholds,
    scale_prune_threshold,
    thresholds_for,
    update_scale_vectors,
)
from .quality_mask import (
    MaskConfig,
    MaskPlan,
    MatchStats,
    drop_rate,
    inlier_ratio,
    load_match_stats,
    make_mask,
    mask_seed,
    masked_photometric_loss,
    plan_for_frame,
    serialize_match_stats,
    to_pbm,
    validate_match_stats,
)

__version__ = "0.1.0"
