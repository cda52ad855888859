"""Problem data: the standard-form container, file formats and generators."""

from .generators import (
    GeneratorSpec,
    gen_maxcut_sdp,
    gen_meb,
    gen_random_lp,
    gen_sqrt_lasso,
    generate,
)
from .problem import Problem

__all__ = [
    "Problem",
    "GeneratorSpec",
    "generate",
    "gen_meb",
    "gen_sqrt_lasso",
    "gen_maxcut_sdp",
    "gen_random_lp",
]
