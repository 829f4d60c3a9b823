"""Desk-scale 2D splatting optimizer exercising the density policy end to end."""

from .degrade import degrade_frame, gaussian_blur, gradient_energy, psnr, quantize_levels
from .experiment import ExperimentConfig, ExperimentReport, FrameTrace, run_experiment
from .gradients import SceneGradients, loss_and_gradients, masked_mse
from .image_io import load_npy, load_png, save_npy, save_png
from .metrics import average_ranks, spearman_rank_correlation
from .render import RenderCache, forward, render
from .scene import Scene2D, gaussian_mean_from_anchor, grid_scene
from .sequence import (
    SequenceConfig,
    SyntheticSequence,
    gop_frame_types,
    make_ground_truth,
    sawtooth_qp_schedule,
    synth_match_stats,
    synthesize_sequence,
)

__all__ = [
    "ExperimentConfig",
    "ExperimentReport",
    "FrameTrace",
    "RenderCache",
    "Scene2D",
    "SceneGradients",
    "SequenceConfig",
    "SyntheticSequence",
    "average_ranks",
    "degrade_frame",
    "forward",
    "gaussian_blur",
    "gaussian_mean_from_anchor",
    "gop_frame_types",
    "gradient_energy",
    "grid_scene",
    "load_npy",
    "load_png",
    "loss_and_gradients",
    "make_ground_truth",
    "masked_mse",
    "psnr",
    "quantize_levels",
    "render",
    "run_experiment",
    "save_npy",
    "save_png",
    "sawtooth_qp_schedule",
    "spearman_rank_correlation",
    "synth_match_stats",
    "synthesize_sequence",
]
