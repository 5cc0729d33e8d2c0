"""Seeded samplers for lattices, trees, random-walk sets, drainage networks and self-similar spaces."""

from unidim.generators.canopy import (LevelLaw, canopy_ball_size, canopy_level_cover, canopy_level_law,
                                      canopy_survival, canopy_window, designed_law, gen_canopy,
                                      gen_generalized_canopy, generalized_canopy_window, geometric_law)
from unidim.generators.drainage import drainage_window, gen_drainage, lazy_heights
from unidim.generators.egw import OffspringDistribution, egw_window, gen_egw, gw_heights, gw_tree
from unidim.generators.lattice import gen_lattice, lattice_window
from unidim.generators.selfsimilar import (IFSSpec, cantor_digit, cantor_ifs, cantor_nested, folded_ifs,
                                           gen_cantor, gen_koch, gen_self_similar, koch_path, koch_window,
                                           self_similar_window, sierpinski_ifs)
from unidim.generators.survival import SurvivalTable, height_survival, survival_from_heights
from unidim.generators.walks import (JumpDistribution, gen_srw_image, gen_srw_zeros, gen_subdivision,
                                     return_time_survival, return_times, subdivided_gaps)

__all__ = [
    "IFSSpec", "JumpDistribution", "LevelLaw", "OffspringDistribution", "SurvivalTable",
    "canopy_ball_size", "canopy_level_cover", "canopy_level_law", "canopy_survival", "canopy_window",
    "cantor_digit", "cantor_ifs", "cantor_nested", "designed_law", "drainage_window", "egw_window", "folded_ifs",
    "gen_canopy", "gen_cantor", "gen_drainage", "gen_egw", "gen_generalized_canopy", "gen_koch",
    "gen_lattice", "gen_self_similar", "gen_srw_image", "gen_srw_zeros", "gen_subdivision",
    "generalized_canopy_window", "geometric_law", "gw_heights", "gw_tree", "height_survival",
    "koch_path", "koch_window", "lattice_window", "lazy_heights", "return_time_survival", "return_times",
    "self_similar_window", "sierpinski_ifs", "subdivided_gaps", "survival_from_heights",
]
