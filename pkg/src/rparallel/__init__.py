"""Measures of observed shapes against r-parallel sets of reference shapes."""

__version__ = "0.1.0"

from .distfield import DistanceField, DomainError, GridSpec, build_distance_field, interpolate
from .geometry import GeometryError, Germ, GermGrainScene, Plane, SceneError, SimplicialComplex, Sphere, Window, validate
from .measures import MISSING, PAIRS, MeasureCurve, MeasurePair, RadiusGrid, mu, mu_curve, n_curve, normalization, nu, nu_curve
from .oracle import TangentBallScene, analytic_consistency_check, analytic_mu
from .summary import IntensityEstimates, SummaryCurve, cross_k_points, estimate_intensities, k_hat, l_hat
from .synth import SynthSpec, gen_plane_scene, gen_sphere_process

__all__ = [
    "DistanceField", "DomainError", "GridSpec", "build_distance_field", "interpolate",
    "GeometryError", "Germ", "GermGrainScene", "Plane", "SceneError", "SimplicialComplex", "Sphere", "Window", "validate",
    "MISSING", "PAIRS", "MeasureCurve", "MeasurePair", "RadiusGrid", "mu", "mu_curve", "n_curve", "normalization", "nu", "nu_curve",
    "TangentBallScene", "analytic_consistency_check", "analytic_mu",
    "IntensityEstimates", "SummaryCurve", "cross_k_points", "estimate_intensities", "k_hat", "l_hat",
    "SynthSpec", "gen_plane_scene", "gen_sphere_process",
]
