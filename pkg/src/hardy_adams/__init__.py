"""Numerical verification of the sharp Adams-type inequality in the radial Hardy space H(R^{2N})."""

from .concentration import Profile, moser_function, moser_profile, triangle_profile
from .decomposition import ExtractionConfig, SequenceFamily, decompose
from .orlicz import OrliczSpec, exp_functional, orlicz_norm
from .quadrature import QuadratureSpec
from .radial import Dimension, LogRadialFunction, PiecewiseLinear, h_norm, hardy_gradient_norm, l2_norm

__all__ = [
    "Dimension", "ExtractionConfig", "LogRadialFunction", "OrliczSpec", "PiecewiseLinear", "Profile",
    "QuadratureSpec", "SequenceFamily", "decompose", "exp_functional", "h_norm", "hardy_gradient_norm",
    "l2_norm", "moser_function", "moser_profile", "orlicz_norm", "triangle_profile",
]
