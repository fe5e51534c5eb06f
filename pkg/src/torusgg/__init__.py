"""Line bundles and semihomogeneous bundles on complex tori, sampled global generation, Mukai and Fujita arithmetic."""

__version__ = "0.1.0"

from .appell_humbert import HermitianForm, LineBundleData, Semicharacter, h0, is_ample, tensor_power
from .gg import SampleStrategy, check_gg_bundle, check_gg_line, lefschetz_suite
from .lattice import IntAltForm, Isogeny, Torus, frobenius_normal_form, smith_normal_form
from .semihomogeneous import SemiRep, SHBundle, from_pushforward, sh_h0
from .theta import ThetaBasis, TruncationParams, section_basis

__all__ = [
    "HermitianForm",
    "IntAltForm",
    "Isogeny",
    "LineBundleData",
    "SHBundle",
    "SampleStrategy",
    "SemiRep",
    "Semicharacter",
    "ThetaBasis",
    "Torus",
    "TruncationParams",
    "check_gg_bundle",
    "check_gg_line",
    "frobenius_normal_form",
    "from_pushforward",
    "h0",
    "is_ample",
    "lefschetz_suite",
    "section_basis",
    "sh_h0",
    "smith_normal_form",
    "tensor_power",
]
