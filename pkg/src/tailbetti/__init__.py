"""Tail Betti numbers of Čech complexes built on heavy-tailed point clouds."""

from .cech import build_cech, components
from .density import ExpDensity, PointCloud, PowerLawDensity, sample_cloud
from .harness import ExperimentConfig, preset, run_convergence
from .homology import betti
from .limits import MuSpec, XiSpec, mu_estimate, mu_total, xi_estimate, xi_total
from .regimes import RegimeSpec, classify_regime
from .tail import component_profile, tail_betti, tail_betti_curve

__version__ = "0.1.0"
