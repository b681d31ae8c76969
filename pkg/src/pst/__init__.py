"""Phaseless subspace tracking from magnitude-only linear measurements."""

from . import baselines, detection, metrics, model, pstpca, spectral
from .baselines import BaselineConfig, lrpr_altmin, wf_columns, wf_single
from .detection import detect_change, roc_curve
from .metrics import norm_err, phase_invariant_dist, subspace_error
from .model import draw_change, generate_scenario, perturb_subspace
from .pstpca import RecoveryResult, refine_with_lrpr, run_pst_pca

__version__ = "0.1.0"
