# Users should import from specific submodules, e.g.:
# from mistura.core.entropies import entropic_dual
# from mistura.core.mixability import MixabilitySearch

__version__ = "0.1.0"
