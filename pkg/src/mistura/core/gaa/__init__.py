from mistura.core.gaa.gaa import CROSS_CHECK_TOLERANCE, ExponentialWeights, GaaState

__all__ = ["CROSS_CHECK_TOLERANCE", "ExponentialWeights", "GaaState"]
